//! Dual coordinate descent for the L1-hinge linear SVM.
//!
//! Solves min_w 0.5||w||^2 + C * sum_i max(0, 1 - y_i w.x_i) via its box-
//! constrained dual (Hsieh et al., 2008). The bias is handled as an augmented
//! constant feature, so `w` here has `n_features + 1` entries with the bias
//! last. Training is deterministic given (data order, seed): the per-epoch
//! index permutation comes from a seeded ChaCha stream.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::Result;

#[derive(Debug)]
pub struct DualSolution {
    /// Augmented weight vector; last entry is the bias.
    pub weights: Vec<f64>,
    pub alpha: Vec<f64>,
    pub epochs: usize,
    /// Dual objective after each epoch (non-decreasing).
    pub dual_history: Vec<f64>,
}

impl DualSolution {
    pub fn bias(&self) -> f64 {
        *self.weights.last().unwrap()
    }

    pub fn feature_weights(&self) -> &[f64] {
        &self.weights[..self.weights.len() - 1]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Primal objective 0.5||w||^2 + C * sum hinge, over augmented rows.
pub fn primal_objective(rows: &[Vec<f64>], y: &[f64], w: &[f64], c: f64) -> f64 {
    let reg = 0.5 * dot(w, w);
    let loss: f64 = rows
        .iter()
        .zip(y)
        .map(|(x, &yi)| (1.0 - yi * dot(x, w)).max(0.0))
        .sum();
    reg + c * loss
}

fn dual_objective(alpha: &[f64], w: &[f64]) -> f64 {
    alpha.iter().sum::<f64>() - 0.5 * dot(w, w)
}

/// Runs dual coordinate descent until the duality gap drops below `tol`.
/// `rows` must NOT contain the bias column; it is appended internally.
pub fn solve(rows: &[Vec<f64>], y: &[f64], c: f64, tol: f64, seed: u64) -> Result<DualSolution> {
    if rows.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: y.len(),
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("training rows".into()));
    }
    if !(c > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("need C > 0 and tol > 0, got C={c} tol={tol}")));
    }
    let has_pos = y.iter().any(|&v| v > 0.0);
    let has_neg = y.iter().any(|&v| v < 0.0);
    if !has_pos || !has_neg {
        return Err(Error::SingleClass);
    }

    // augment with the bias feature
    let augmented: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut a = r.clone();
            a.push(1.0);
            a
        })
        .collect();
    let n = augmented.len();
    let dim = augmented[0].len();
    let q_diag: Vec<f64> = augmented.iter().map(|x| dot(x, x)).collect();

    let mut w = vec![0.0; dim];
    let mut alpha = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut dual_history = Vec::new();

    const MAX_EPOCHS: usize = 100_000;
    let mut epochs = 0;
    for _ in 0..MAX_EPOCHS {
        order.shuffle(&mut rng);
        for &i in &order {
            let xi = &augmented[i];
            let yi = y[i];
            let grad = yi * dot(xi, &w) - 1.0;
            let projected = if alpha[i] == 0.0 {
                grad.min(0.0)
            } else if alpha[i] == c {
                grad.max(0.0)
            } else {
                grad
            };
            if projected != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - grad / q_diag[i]).clamp(0.0, c);
                let delta = (alpha[i] - old) * yi;
                if delta != 0.0 {
                    for (wj, xij) in w.iter_mut().zip(xi) {
                        *wj += delta * xij;
                    }
                }
            }
        }
        epochs += 1;
        dual_history.push(dual_objective(&alpha, &w));
        let gap = primal_objective(&augmented, y, &w, c) - dual_objective(&alpha, &w);
        if gap <= tol {
            break;
        }
    }

    Ok(DualSolution {
        weights: w,
        alpha,
        epochs,
        dual_history,
    })
}
