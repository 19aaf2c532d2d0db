//! Gronwall-type bound for integral inequalities with a lagged average.

use crate::error::{LakeError, Result};

/// t ↦ 2 exp(∫₀ᵗ D)[y₀ + ∫₀ᵗ B(r) exp(−∫₀ʳ D) dr] on the sample times, with both
/// integrals by the trapezoid rule.
pub fn discrete_gronwall_bound(y0: f64, times: &[f64], d: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if times.len() != d.len() || times.len() != b.len() {
        return Err(LakeError::InvalidArgument("series lengths differ".into()));
    }
    if let Some(v) = d.iter().chain(b).find(|v| !(**v >= 0.0)) {
        return Err(LakeError::InvalidArgument(format!("D and B must be non-negative, found {v}")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LakeError::InvalidArgument("times must increase".into()));
    }
    if !(y0 >= 0.0) {
        return Err(LakeError::InvalidArgument("y0 must be non-negative".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut int_d = 0.0;
    let mut int_b = 0.0;
    for k in 0..times.len() {
        if k > 0 {
            let h = times[k] - times[k - 1];
            let prev = int_d;
            int_d += 0.5 * h * (d[k - 1] + d[k]);
            int_b += 0.5 * h * (b[k - 1] * (-prev).exp() + b[k] * (-int_d).exp());
        }
        out.push(2.0 * int_d.exp() * (y0 + int_b));
    }
    Ok(out)
}

/// The sufficient lag condition 2θ·sup D ≤ 1/2.
pub fn gronwall_precondition(d: &[f64], theta: f64) -> bool {
    2.0 * theta * d.iter().cloned().fold(0.0, f64::max) <= 0.5
}

/// Solves y(t) = y₀ + ∫₀ᵗ [D(u + y) + B] with u(t) = (1/θ)∫_{t−θ}^t y and y = 0 for
/// t < 0, by explicit steps on the uniform grid `times` (spacing h, θ a multiple of h
/// is not required). D and B are sampled on `times`.
pub fn lagged_integral_solution(y0: f64, times: &[f64], d: &[f64], b: &[f64], theta: f64) -> Result<Vec<f64>> {
    if times.len() != d.len() || times.len() != b.len() {
        return Err(LakeError::InvalidArgument("series lengths differ".into()));
    }
    if !(theta > 0.0) {
        return Err(LakeError::InvalidArgument(format!("lag must be positive, got {theta}")));
    }
    let n = times.len();
    let mut y = vec![0.0; n];
    if n == 0 {
        return Ok(y);
    }
    y[0] = y0;
    // Running integral of y over [0, t_k] by the trapezoid rule.
    let mut cum = vec![0.0; n];
    let integral_to = |cum: &[f64], y: &[f64], k: usize, s: f64| -> f64 {
        // ∫₀ˢ y for s ≤ t_k, linear interpolation inside the last interval.
        if s <= 0.0 {
            return 0.0;
        }
        let j = match times[..=k].binary_search_by(|t| t.total_cmp(&s)) {
            Ok(j) => return cum[j],
            Err(j) => j - 1,
        };
        let h = times[j + 1] - times[j];
        let f = (s - times[j]) / h;
        let ys = y[j] + f * (y[j + 1] - y[j]);
        cum[j] + 0.5 * (s - times[j]) * (y[j] + ys)
    };
    let lag = |cum: &[f64], y: &[f64], k: usize| -> f64 {
        let t = times[k];
        (integral_to(cum, y, k, t) - integral_to(cum, y, k, t - theta)) / theta
    };
    let mut rate_prev = d[0] * (lag(&cum, &y, 0) + y[0]) + b[0];
    for k in 1..n {
        let h = times[k] - times[k - 1];
        // Predictor-corrector (Heun) on the integral equation.
        y[k] = y[k - 1] + h * rate_prev;
        cum[k] = cum[k - 1] + 0.5 * h * (y[k - 1] + y[k]);
        for _ in 0..3 {
            let rate = d[k] * (lag(&cum, &y, k) + y[k]) + b[k];
            y[k] = y[k - 1] + 0.5 * h * (rate_prev + rate);
            cum[k] = cum[k - 1] + 0.5 * h * (y[k - 1] + y[k]);
        }
        rate_prev = d[k] * (lag(&cum, &y, k) + y[k]) + b[k];
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, t: f64) -> Vec<f64> {
        (0..=n).map(|k| t * k as f64 / n as f64).collect()
    }

    #[test]
    fn closed_forms() {
        let t = grid(1000, 1.0);
        let zero = vec![0.0; t.len()];
        let bound = discrete_gronwall_bound(1.5, &t, &zero, &zero).unwrap();
        assert!(bound.iter().all(|v| (v - 3.0).abs() < 1e-15));
        let d = vec![0.7; t.len()];
        let bound = discrete_gronwall_bound(1.5, &t, &d, &zero).unwrap();
        for (ti, v) in t.iter().zip(&bound) {
            assert!((v - 3.0 * (0.7 * ti).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_entries_are_rejected() {
        let t = grid(3, 1.0);
        let bad = vec![0.0, -1.0, 0.0, 0.0];
        assert!(discrete_gronwall_bound(1.0, &t, &bad, &bad).is_err());
    }

    #[test]
    fn lagged_solution_of_constant_rates() {
        // D = 0: y = y0 + B t.
        let t = grid(200, 2.0);
        let zero = vec![0.0; t.len()];
        let b = vec![0.5; t.len()];
        let y = lagged_integral_solution(1.0, &t, &zero, &b, 0.1).unwrap();
        for (ti, yi) in t.iter().zip(&y) {
            assert!((yi - (1.0 + 0.5 * ti)).abs() < 1e-12);
        }
        // Small lag: u ≈ y, so y ≈ y0 e^{2Dt}.
        let t = grid(4000, 1.0);
        let d = vec![0.5; t.len()];
        let zero = vec![0.0; t.len()];
        let y = lagged_integral_solution(1.0, &t, &d, &zero, 1e-3).unwrap();
        assert!((y.last().unwrap() - 1.0f64.exp()).abs() < 5e-3);
    }
}
