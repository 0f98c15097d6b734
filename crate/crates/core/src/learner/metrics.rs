//! Classification metrics: support-weighted precision/recall/F1, accuracy,
//! and rank-based ROC-AUC with average-rank tie handling.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::learner::Label;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub f1_weighted: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub roc_auc: f64,
    pub accuracy: f64,
}

/// Computes the full metric bundle. Polite is the positive class for AUC.
pub fn evaluate(y_true: &[Label], y_pred: &[Label], margins: &[f64]) -> Result<Metrics> {
    if y_true.len() != y_pred.len() || y_true.len() != margins.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len().min(margins.len()),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput("labels".into()));
    }
    if margins.iter().any(|m| !m.is_finite()) {
        return Err(Error::InvalidInput("non-finite margin".into()));
    }

    let n = y_true.len() as f64;
    let mut precision_weighted = 0.0;
    let mut recall_weighted = 0.0;
    let mut f1_weighted = 0.0;
    for class in [Label::Polite, Label::Rude] {
        let tp = y_true
            .iter()
            .zip(y_pred)
            .filter(|(t, p)| **t == class && **p == class)
            .count() as f64;
        let fp = y_true
            .iter()
            .zip(y_pred)
            .filter(|(t, p)| **t != class && **p == class)
            .count() as f64;
        let fn_ = y_true
            .iter()
            .zip(y_pred)
            .filter(|(t, p)| **t == class && **p != class)
            .count() as f64;
        let support = tp + fn_;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if support > 0.0 { tp / support } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let weight = support / n;
        precision_weighted += weight * precision;
        recall_weighted += weight * recall;
        f1_weighted += weight * f1;
    }

    let accuracy = y_true
        .iter()
        .zip(y_pred)
        .filter(|(t, p)| t == p)
        .count() as f64
        / n;
    let roc_auc = roc_auc_from_margins(y_true, margins)?;

    Ok(Metrics {
        f1_weighted,
        precision_weighted,
        recall_weighted,
        roc_auc,
        accuracy,
    })
}

/// Mann-Whitney formulation: AUC = (R_pos - n_pos(n_pos+1)/2) / (n_pos * n_neg)
/// where R_pos is the sum of average ranks of positive margins. Equals the
/// fraction of correctly ordered (positive, negative) pairs with ties at 1/2.
pub fn roc_auc_from_margins(y_true: &[Label], margins: &[f64]) -> Result<f64> {
    let n_pos = y_true.iter().filter(|l| **l == Label::Polite).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClassAuc);
    }

    let mut order: Vec<usize> = (0..margins.len()).collect();
    order.sort_by(|&a, &b| margins[a].partial_cmp(&margins[b]).unwrap());

    // average ranks (1-based) over tie groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && margins[order[j]] == margins[order[i]] {
            j += 1;
        }
        let avg_rank = ((i + 1) + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if y_true[idx] == Label::Polite {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }

    let np = n_pos as f64;
    let u = rank_sum_pos - np * (np + 1.0) / 2.0;
    Ok(u / (np * n_neg as f64))
}
