//! TOML scenario files: domain, data expressions or tables, solver and output blocks.

use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use toml::Spanned;

use super::expr::Expression;
use crate::diagnostics::MonitorSet;
use crate::domain::{build_domain, Domain, Shape};
use crate::error::{LakeError, Result};
use crate::scenario::{Forcing, ScenarioData, SourceVariant, TimeField};
use crate::solver::{SolverConfig, TimeStep};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: RawDomain,
    #[serde(default)]
    data: RawData,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    shape: Spanned<String>,
    resolution: usize,
    center: Option<[f64; 2]>,
    radius: Option<f64>,
    semi_axes: Option<[f64; 2]>,
    min: Option<[f64; 2]>,
    max: Option<[f64; 2]>,
    corner_radius: Option<f64>,
    vertices: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum FieldSpec {
    Number(f64),
    Expr(String),
    Table { csv: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NumberOrText {
    Number(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    b: Option<Spanned<FieldSpec>>,
    a: Option<Spanned<FieldSpec>>,
    alpha: Option<Spanned<FieldSpec>>,
    eta: Option<Spanned<FieldSpec>>,
    kappa: Option<Spanned<FieldSpec>>,
    #[serde(rename = "A")]
    source: Option<Spanned<FieldSpec>>,
    gx: Option<Spanned<FieldSpec>>,
    gy: Option<Spanned<FieldSpec>>,
    rot_g_over_b: Option<Spanned<FieldSpec>>,
    omega0: Option<Spanned<FieldSpec>>,
    p: Option<Spanned<NumberOrText>>,
    /// Adjust a (or A) so that the flux data balance exactly.
    #[serde(default)]
    balance: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    nu: Option<f64>,
    theta: Option<f64>,
    r: Option<Spanned<NumberOrText>>,
    t_end: Option<f64>,
    dt: Option<Spanned<NumberOrText>>,
    cfl: Option<f64>,
    dt_max: Option<f64>,
    tol_lin: Option<f64>,
    tol_fp: Option<f64>,
    max_picard: Option<usize>,
    relaxation: Option<f64>,
    tol_comp: Option<f64>,
    source_variant: Option<SourceVariant>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    cadence: Option<usize>,
    monitors: Option<Spanned<String>>,
}

/// Output block.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Every `cadence`-th step is written, plus the first and the last state.
    pub cadence: usize,
    pub monitors: MonitorSet,
}

/// A fully materialized scenario file.
#[derive(Debug)]
pub struct LoadedConfig {
    pub domain: Domain,
    pub scenario: ScenarioData,
    pub solver: SolverConfig,
    pub output: OutputConfig,
    pub warnings: Vec<String>,
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn error_at(text: &str, span: Option<Range<usize>>, message: impl Into<String>) -> LakeError {
    let (line, column) = span.map_or((0, 0), |s| position(text, s.start));
    LakeError::Config { line, column, message: message.into() }
}

/// Where a field lives.
#[derive(Clone, Copy, PartialEq)]
enum Support {
    Cells,
    Shore,
}

/// Tabulated values: (x, y, value) matched to the nearest point, or (s, value)
/// interpolated periodically along the shoreline.
enum Table {
    Points(Vec<([f64; 2], f64)>),
    Arc(Vec<(f64, f64)>),
}

fn read_table(path: &Path) -> std::result::Result<Table, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let value = col("value").ok_or_else(|| format!("{}: missing column `value`", path.display()))?;
    let parse = |r: &csv::StringRecord, i: usize| -> std::result::Result<f64, String> {
        r.get(i)
            .ok_or_else(|| "short row".to_string())?
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("{}: {e}", path.display()))
    };
    let records: Vec<csv::StringRecord> = reader.records().collect::<std::result::Result<_, _>>().map_err(|e| e.to_string())?;
    if records.is_empty() {
        return Err(format!("{}: no rows", path.display()));
    }
    match (col("x"), col("y"), col("s")) {
        (Some(x), Some(y), _) => records
            .iter()
            .map(|r| Ok(([parse(r, x)?, parse(r, y)?], parse(r, value)?)))
            .collect::<std::result::Result<_, String>>()
            .map(Table::Points),
        (_, _, Some(s)) => {
            let mut rows: Vec<(f64, f64)> =
                records.iter().map(|r| Ok((parse(r, s)?, parse(r, value)?))).collect::<std::result::Result<_, String>>()?;
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            Ok(Table::Arc(rows))
        }
        _ => Err(format!("{}: needs columns x, y, value or s, value", path.display())),
    }
}

impl Table {
    fn at(&self, p: [f64; 2], s: f64, length: f64) -> std::result::Result<f64, String> {
        match self {
            Table::Points(rows) => Ok(rows
                .iter()
                .min_by(|a, b| {
                    let da = (a.0[0] - p[0]).powi(2) + (a.0[1] - p[1]).powi(2);
                    let db = (b.0[0] - p[0]).powi(2) + (b.0[1] - p[1]).powi(2);
                    da.total_cmp(&db)
                })
                .expect("non-empty table")
                .1),
            Table::Arc(rows) => {
                let s = s.rem_euclid(length);
                let k = rows.partition_point(|r| r.0 <= s);
                let (a, b) = if k == 0 || k == rows.len() {
                    let last = rows[rows.len() - 1];
                    let first = rows[0];
                    (( last.0 - length, last.1), (first.0 + if k == 0 { 0.0 } else { length }, first.1))
                } else {
                    (rows[k - 1], rows[k])
                };
                let (a, b) = if k == rows.len() { ((a.0 + length, a.1), b) } else { (a, b) };
                if b.0 <= a.0 {
                    return Ok(a.1);
                }
                Ok(a.1 + (s - a.0) / (b.0 - a.0) * (b.1 - a.1))
            }
        }
    }
}

struct FieldBuilder<'a> {
    text: &'a str,
    base: &'a Path,
    domain: &'a Domain,
}

impl FieldBuilder<'_> {
    fn points(&self, support: Support) -> Vec<([f64; 2], f64)> {
        match support {
            Support::Cells => self.domain.grid.centers.iter().map(|p| (*p, 0.0)).collect(),
            Support::Shore => self.domain.boundary.nodes.iter().map(|n| (n.position, n.s)).collect(),
        }
    }

    fn build(&self, spec: &Spanned<FieldSpec>, support: Support, name: &str, allow_time: bool) -> Result<TimeField> {
        let span = Some(spec.span());
        let points = self.points(support);
        match spec.get_ref() {
            FieldSpec::Number(v) => {
                if !v.is_finite() {
                    return Err(error_at(self.text, span, format!("{name}: value must be finite")));
                }
                Ok(TimeField::Steady(vec![*v; points.len()]))
            }
            FieldSpec::Expr(src) => {
                let e = Expression::parse(src).map_err(|m| error_at(self.text, span.clone(), format!("{name}: {m}")))?;
                if e.is_time_dependent() {
                    if !allow_time {
                        return Err(error_at(self.text, span, format!("{name} may not depend on t")));
                    }
                    let e = Arc::new(e);
                    Ok(TimeField::unsteady(move |t| points.iter().map(|(p, s)| e.eval(p[0], p[1], *s, t)).collect()))
                } else {
                    let v: Vec<f64> = points.iter().map(|(p, s)| e.eval(p[0], p[1], *s, 0.0)).collect();
                    if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                        let p = points[k].0;
                        return Err(error_at(
                            self.text,
                            span,
                            format!("{name} is not finite at ({}, {})", p[0], p[1]),
                        ));
                    }
                    Ok(TimeField::Steady(v))
                }
            }
            FieldSpec::Table { csv } => {
                let path = self.base.join(csv);
                let table = read_table(&path).map_err(|m| error_at(self.text, span.clone(), format!("{name}: {m}")))?;
                let length = self.domain.boundary.length;
                let v = points
                    .iter()
                    .map(|(p, s)| table.at(*p, *s, length))
                    .collect::<std::result::Result<Vec<f64>, String>>()
                    .map_err(|m| error_at(self.text, span, format!("{name}: {m}")))?;
                Ok(TimeField::Steady(v))
            }
        }
    }

    fn steady(&self, spec: &Spanned<FieldSpec>, support: Support, name: &str) -> Result<Vec<f64>> {
        match self.build(spec, support, name, false)? {
            TimeField::Steady(v) => Ok(v),
            TimeField::Unsteady(_) => unreachable!("time dependence rejected above"),
        }
    }
}

fn shape_of(text: &str, d: &RawDomain) -> Result<Shape> {
    let span = Some(d.shape.span());
    let missing = |key: &str| error_at(text, span.clone(), format!("shape needs `{key}`"));
    let shape = match d.shape.get_ref().as_str() {
        "disk" => Shape::Disk { center: d.center.unwrap_or([0.0, 0.0]), radius: d.radius.ok_or_else(|| missing("radius"))? },
        "ellipse" => Shape::Ellipse { center: d.center.unwrap_or([0.0, 0.0]), semi_axes: d.semi_axes.ok_or_else(|| missing("semi_axes"))? },
        "rectangle" | "square" => Shape::Rectangle {
            min: d.min.unwrap_or([0.0, 0.0]),
            max: d.max.unwrap_or([1.0, 1.0]),
            corner_radius: d.corner_radius.unwrap_or(0.0),
        },
        "polygon" => Shape::Polygon {
            vertices: d.vertices.clone().ok_or_else(|| missing("vertices"))?,
            corner_radius: d.corner_radius.ok_or_else(|| missing("corner_radius"))?,
        },
        other => {
            return Err(error_at(
                text,
                span,
                format!("unknown shape {other:?}, expected disk, ellipse, rectangle, square or polygon"),
            ))
        }
    };
    Ok(shape)
}

fn number_or_keyword(text: &str, v: &Spanned<NumberOrText>, keyword: &str, name: &str) -> Result<Option<f64>> {
    match v.get_ref() {
        NumberOrText::Number(x) => Ok(Some(*x)),
        NumberOrText::Text(s) if s.eq_ignore_ascii_case(keyword) => Ok(None),
        NumberOrText::Text(s) => Err(error_at(text, Some(v.span()), format!("{name}: expected a number or {keyword:?}, got {s:?}"))),
    }
}

/// Parses a scenario file; relative table paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<LoadedConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| error_at(text, e.span(), e.message().to_string()))?;
    let shape = shape_of(text, &raw.domain)?;
    let domain = build_domain(&shape, raw.domain.resolution)?;
    let fields = FieldBuilder { text, base, domain: &domain };
    let data = &raw.data;
    let mut scenario = ScenarioData::quiescent(&domain);
    if let Some(b) = &data.b {
        scenario.b = fields.steady(b, Support::Cells, "b")?;
        scenario.b_shore = fields.steady(b, Support::Shore, "b")?;
        if let Some(k) = scenario.b.iter().chain(&scenario.b_shore).position(|v| !(*v > 0.0)) {
            let n = domain.len();
            let p = if k < n { domain.grid.centers[k] } else { domain.boundary.nodes[k - n].position };
            let v = if k < n { scenario.b[k] } else { scenario.b_shore[k - n] };
            return Err(error_at(text, Some(b.span()), format!("b = {v} is not positive at ({}, {})", p[0], p[1])));
        }
    }
    if let Some(a) = &data.a {
        scenario.a = fields.build(a, Support::Shore, "a", true)?;
    }
    if let Some(v) = &data.alpha {
        scenario.alpha = fields.build(v, Support::Shore, "alpha", true)?;
    }
    if let Some(v) = &data.eta {
        scenario.eta = fields.build(v, Support::Shore, "eta", true)?;
    }
    if let Some(v) = &data.kappa {
        scenario.kappa = fields.build(v, Support::Cells, "kappa", true)?;
    }
    if let Some(v) = &data.source {
        scenario.source = fields.build(v, Support::Cells, "A", true)?;
    }
    match (&data.gx, &data.gy, &data.rot_g_over_b) {
        (None, None, None) => {}
        (Some(gx), Some(gy), None) => {
            scenario.forcing = Forcing::Field {
                gx: fields.build(gx, Support::Cells, "gx", true)?,
                gy: fields.build(gy, Support::Cells, "gy", true)?,
            }
        }
        (None, None, Some(c)) => scenario.forcing = Forcing::Curl(fields.build(c, Support::Cells, "rot_g_over_b", true)?),
        _ => {
            let span = data.gx.as_ref().or(data.gy.as_ref()).or(data.rot_g_over_b.as_ref()).map(|s| s.span());
            return Err(error_at(text, span, "give either both gx and gy or rot_g_over_b"));
        }
    }
    if let Some(w) = &data.omega0 {
        scenario.omega0 = fields.steady(w, Support::Cells, "omega0")?;
    }
    if let Some(p) = &data.p {
        scenario.p = match p.get_ref() {
            NumberOrText::Number(x) => *x,
            NumberOrText::Text(s) if s == "inf" || s == "infinity" => f64::INFINITY,
            NumberOrText::Text(s) => return Err(error_at(text, Some(p.span()), format!("p: expected a number or \"inf\", got {s:?}"))),
        };
        if !(scenario.p > 1.0) {
            return Err(error_at(text, Some(p.span()), "p must exceed 1"));
        }
    }
    let mut warnings = Vec::new();
    if data.balance {
        scenario = scenario.balanced(&domain);
    }
    let residual = scenario.flux_imbalance(&domain, 0.0).abs();
    let scale = scenario.flux_scale(&domain, 0.0);
    let solver = solver_config(text, &raw.solver)?;
    if residual > solver.tol_comp * scale {
        warnings.push(format!(
            "flux data are not compatible at t = 0: |∮ b a − ∫ A| = {residual:e}; set data.balance = true to adjust them"
        ));
    }
    scenario.validate(&domain)?;
    let monitors = match &raw.output.monitors {
        Some(m) => MonitorSet::parse(m.get_ref()).map_err(|e| error_at(text, Some(m.span()), e.to_string()))?,
        None => MonitorSet::all(),
    };
    let cadence = raw.output.cadence.unwrap_or(1);
    if cadence == 0 {
        return Err(error_at(text, None, "output.cadence must be at least 1"));
    }
    Ok(LoadedConfig {
        domain,
        scenario,
        solver,
        output: OutputConfig { dir: raw.output.dir.clone(), cadence, monitors },
        warnings,
    })
}

fn solver_config(text: &str, raw: &RawSolver) -> Result<SolverConfig> {
    let d = SolverConfig::default();
    let r = match &raw.r {
        Some(v) => number_or_keyword(text, v, "auto", "r")?,
        None => d.r,
    };
    let dt = match &raw.dt {
        Some(v) => match number_or_keyword(text, v, "cfl", "dt")? {
            Some(x) => TimeStep::Fixed(x),
            None => TimeStep::Cfl,
        },
        None => d.dt,
    };
    let cfg = SolverConfig {
        nu: raw.nu.unwrap_or(d.nu),
        theta: raw.theta.unwrap_or(d.theta),
        r,
        t_end: raw.t_end.unwrap_or(d.t_end),
        dt,
        cfl: raw.cfl.unwrap_or(d.cfl),
        dt_max: raw.dt_max.or(d.dt_max),
        tol_lin: raw.tol_lin.unwrap_or(d.tol_lin),
        tol_fp: raw.tol_fp.unwrap_or(d.tol_fp),
        max_picard: raw.max_picard.unwrap_or(d.max_picard),
        relaxation: raw.relaxation.unwrap_or(d.relaxation),
        tol_comp: raw.tol_comp.unwrap_or(d.tol_comp),
        source_variant: raw.source_variant.unwrap_or(d.source_variant),
    };
    cfg.validate().map_err(|e| error_at(text, None, e.to_string()))?;
    Ok(cfg)
}

/// Reads and parses a scenario file.
pub fn load_config(path: &Path) -> Result<(LoadedConfig, String)> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    Ok((parse_config(&text, base)?, text))
}
