//! Trailing window of vorticity snapshots and the lagged, clipped average.

use std::collections::VecDeque;

/// Clamps every value to [−R, R].
pub fn clip(omega: &[f64], r: f64) -> Vec<f64> {
    omega.iter().map(|w| w.clamp(-r, r)).collect()
}

/// Snapshots (t, ω) covering at least the last θ of simulated time; ω is taken as
/// zero before t = 0.
#[derive(Debug, Clone)]
pub struct VorticityHistory {
    theta: f64,
    entries: VecDeque<(f64, Vec<f64>)>,
}

impl VorticityHistory {
    pub fn new(theta: f64) -> Self {
        assert!(theta > 0.0, "lag must be positive");
        VorticityHistory { theta, entries: VecDeque::new() }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn latest(&self) -> Option<(f64, &[f64])> {
        self.entries.back().map(|(t, w)| (*t, w.as_slice()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.entries.iter().map(|(t, w)| (*t, w.as_slice()))
    }

    /// Appends a snapshot and drops those no longer needed for windows ending at `t`.
    pub fn push(&mut self, t: f64, omega: Vec<f64>) {
        if let Some((last, _)) = self.entries.back() {
            assert!(t > *last, "history times must increase");
        }
        self.entries.push_back((t, omega));
        let start = t - self.theta;
        while self.entries.len() > 1 && self.entries[1].0 <= start {
            self.entries.pop_front();
        }
    }

    /// ⟨ω⟩(t) with `extra` appended as the newest snapshot when given.
    pub fn average(&self, t: f64, r: f64, extra: Option<(f64, &[f64])>) -> Vec<f64> {
        let mut points: Vec<(f64, &[f64])> = self.entries().collect();
        if let Some(e) = extra {
            points.push(e);
        }
        timelag_cutoff_average(&points, t, self.theta, r)
    }
}

/// (1/θ)∫_{t−θ}^{t} [ω]_R dτ over the piecewise-linear interpolant of clipped
/// snapshots, with ω = 0 before the first snapshot at τ = 0 and held constant
/// after the last one.
pub fn timelag_cutoff_average(points: &[(f64, &[f64])], t: f64, theta: f64, r: f64) -> Vec<f64> {
    let n = points.first().map_or(0, |p| p.1.len());
    let mut acc = vec![0.0; n];
    if points.is_empty() {
        return acc;
    }
    let lo = (t - theta).max(points[0].0);
    let clipped: Vec<Vec<f64>> = points.iter().map(|p| clip(p.1, r)).collect();
    let mut add = |a: f64, b: f64, wa: &[f64], wb: &[f64], ta: f64, tb: f64| {
        // Exact integral over [a, b] ⊂ [ta, tb] of the linear interpolant.
        if b <= a {
            return;
        }
        let span = tb - ta;
        let fa = if span > 0.0 { (a - ta) / span } else { 0.0 };
        let fb = if span > 0.0 { (b - ta) / span } else { 0.0 };
        let len = b - a;
        for i in 0..n {
            let va = wa[i] + fa * (wb[i] - wa[i]);
            let vb = wa[i] + fb * (wb[i] - wa[i]);
            acc[i] += 0.5 * len * (va + vb);
        }
    };
    for k in 0..points.len().saturating_sub(1) {
        let (ta, tb) = (points[k].0, points[k + 1].0);
        add(lo.max(ta), t.min(tb), &clipped[k], &clipped[k + 1], ta, tb);
    }
    let (tl, last) = (points[points.len() - 1].0, &clipped[points.len() - 1]);
    if t > tl {
        add(lo.max(tl), t, last, last, tl, t);
    }
    acc.iter_mut().for_each(|v| *v /= theta);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_history_averages_to_itself_once_the_window_is_full() {
        let mut h = VorticityHistory::new(0.1);
        for k in 0..=20 {
            h.push(k as f64 * 0.01, vec![2.0, -3.0]);
        }
        let avg = h.average(0.2, 10.0, None);
        assert!((avg[0] - 2.0).abs() < 1e-12 && (avg[1] + 3.0).abs() < 1e-12);
        let clipped = h.average(0.2, 1.0, None);
        assert!((clipped[0] - 1.0).abs() < 1e-12 && (clipped[1] + 1.0).abs() < 1e-12);
        assert!(h.len() <= 12);
    }

    #[test]
    fn zero_before_start() {
        let mut h = VorticityHistory::new(1.0);
        h.push(0.0, vec![1.0]);
        let w = [1.0];
        let avg = h.average(0.5, 10.0, Some((0.5, &w)));
        assert!((avg[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn linear_history_is_integrated_exactly() {
        let mut h = VorticityHistory::new(0.3);
        for k in 0..=10 {
            let t = k as f64 * 0.1;
            h.push(t, vec![t]);
        }
        // Window [0.7, 1.0]: mean of τ is 0.85.
        let avg = h.average(1.0, 10.0, None);
        assert!((avg[0] - 0.85).abs() < 1e-12);
    }
}
