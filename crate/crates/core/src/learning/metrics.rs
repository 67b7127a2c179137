//! Threshold metrics and ROC-AUC.

use serde::{Deserialize, Serialize};

use super::LearnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `None` when the labels hold a single class.
    pub roc_auc: Option<f64>,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// A probability at or above `threshold` counts as a positive prediction.
pub fn evaluate(probs: &[f64], labels: &[u8], threshold: f64) -> Result<EvalReport, LearnError> {
    if probs.len() != labels.len() {
        return Err(LearnError::Shape { expected: probs.len(), found: labels.len() });
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (&p, &y) in probs.iter().zip(labels) {
        match (p >= threshold, y == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |a: u64, b: u64| if a + b == 0 { 0.0 } else { a as f64 / (a + b) as f64 };
    let precision = ratio(tp, fp);
    let recall = ratio(tp, fn_);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Ok(EvalReport { precision, recall, f1, roc_auc: roc_auc(probs, labels), tp, fp, tn, fn_ })
}

/// Mann-Whitney AUC with midranks, so tied scores earn half credit.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Option<f64> {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 || scores.len() != labels.len() {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Some((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_auc(s: &[f64], y: &[u8]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..s.len() {
            for j in 0..s.len() {
                if y[i] == 1 && y[j] == 0 {
                    den += 1.0;
                    num += if s[i] > s[j] { 1.0 } else if s[i] == s[j] { 0.5 } else { 0.0 };
                }
            }
        }
        num / den
    }

    #[test]
    fn four_point_auc() {
        assert_eq!(roc_auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]), Some(0.75));
    }

    #[test]
    fn midranks_match_pairwise_count() {
        let s = [0.2, 0.2, 0.5, 0.1, 0.5, 0.9, 0.2, 0.0];
        let y = [1, 0, 0, 1, 1, 0, 1, 0];
        assert!((roc_auc(&s, &y).unwrap() - brute_auc(&s, &y)).abs() < 1e-15);
    }

    #[test]
    fn perfect_separation() {
        let r = evaluate(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1], 0.5).unwrap();
        assert_eq!((r.precision, r.recall, r.f1, r.roc_auc), (1.0, 1.0, 1.0, Some(1.0)));
    }

    #[test]
    fn symmetric_counts() {
        let mut probs = vec![1.0; 8];
        probs.extend([1.0; 2]);
        probs.extend([0.0; 2]);
        probs.extend([0.0; 5]);
        let mut labels = vec![1u8; 8];
        labels.extend([0; 2]);
        labels.extend([1; 2]);
        labels.extend([0; 5]);
        let r = evaluate(&probs, &labels, 0.5).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_, r.tn), (8, 2, 2, 5));
        assert!((r.precision - 0.8).abs() < 1e-15 && (r.recall - 0.8).abs() < 1e-15 && (r.f1 - 0.8).abs() < 1e-15);
    }

    #[test]
    fn no_predicted_positives() {
        let r = evaluate(&[0.3, 1.0], &[0, 1], 1.0 + 1e-9).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn single_class_has_no_auc() {
        assert_eq!(evaluate(&[0.3, 0.6], &[1, 1], 0.5).unwrap().roc_auc, None);
    }
}
