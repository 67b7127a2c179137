//! Isotonic calibration by pool-adjacent-violators.

use serde::{Deserialize, Serialize};

use super::LearnError;

/// Piecewise-linear monotone map from raw score to probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibrator {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl Calibrator {
    pub fn validate(&self) -> Result<(), LearnError> {
        if self.breakpoints.is_empty() || self.breakpoints.len() != self.values.len() {
            return Err(LearnError::Shape { expected: self.breakpoints.len(), found: self.values.len() });
        }
        if self.breakpoints.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(LearnError::Format("calibrator knots must be strictly increasing".into()));
        }
        if self.values.windows(2).any(|w| w[0] > w[1]) || self.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(LearnError::Format("calibrator values must be non-decreasing in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn apply(&self, s: f64) -> f64 {
        apply_calibrator(self, s)
    }
}

/// Fits the least-squares non-decreasing map from `scores` to `labels`.
/// Rows with equal scores are pooled before fitting.
pub fn fit_isotonic(scores: &[f64], labels: &[u8]) -> Result<Calibrator, LearnError> {
    if scores.len() != labels.len() {
        return Err(LearnError::Shape { expected: scores.len(), found: labels.len() });
    }
    if scores.is_empty() {
        return Err(LearnError::Degenerate("no calibration rows".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) || labels.iter().any(|&l| l > 1) {
        return Err(LearnError::Degenerate("scores must be finite and labels 0 or 1".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // tie groups: (score, label sum, weight)
    let mut groups: Vec<(f64, f64, f64)> = Vec::new();
    for i in order {
        let (s, y) = (scores[i], labels[i] as f64);
        match groups.last_mut() {
            Some(g) if g.0 == s => {
                g.1 += y;
                g.2 += 1.0;
            }
            _ => groups.push((s, y, 1.0)),
        }
    }

    // blocks: (first score, last score, label sum, weight)
    let mut blocks: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(groups.len());
    for (s, sum, w) in groups {
        blocks.push((s, s, sum, w));
        while blocks.len() >= 2 {
            let n = blocks.len();
            let (prev, last) = (blocks[n - 2], blocks[n - 1]);
            if prev.2 / prev.3 <= last.2 / last.3 {
                break;
            }
            blocks[n - 2] = (prev.0, last.1, prev.2 + last.2, prev.3 + last.3);
            blocks.pop();
        }
    }

    let mut breakpoints = Vec::with_capacity(blocks.len() * 2);
    let mut values = Vec::with_capacity(blocks.len() * 2);
    for (lo, hi, sum, w) in blocks {
        let v = sum / w;
        breakpoints.push(lo);
        values.push(v);
        if hi > lo {
            breakpoints.push(hi);
            values.push(v);
        }
    }
    Ok(Calibrator { breakpoints, values })
}

/// Linear interpolation between knots, clamped to the end values outside.
pub fn apply_calibrator(cal: &Calibrator, s: f64) -> f64 {
    let (xs, ys) = (&cal.breakpoints, &cal.values);
    let last = xs.len() - 1;
    if s.is_nan() || s <= xs[0] {
        return ys[0];
    }
    if s >= xs[last] {
        return ys[last];
    }
    let hi = xs.partition_point(|&k| k <= s);
    let lo = hi - 1;
    if xs[lo] == s {
        return ys[lo];
    }
    let t = (s - xs[lo]) / (xs[hi] - xs[lo]);
    (ys[lo] + t * (ys[hi] - ys[lo])).clamp(ys[lo], ys[hi])
}
