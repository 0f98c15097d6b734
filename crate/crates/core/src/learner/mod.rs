//! Quartile-extreme labeling, linear-SVM training, grid search, prediction,
//! and evaluation.

pub mod metrics;
pub mod svm;

pub use metrics::{evaluate, roc_auc_from_margins, Metrics};

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::stats::ScoreVector;
use crate::vectorizer::FeatureMatrix;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Polite,
    Rude,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Polite => 1.0,
            Label::Rude => -1.0,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Polite => write!(f, "polite"),
            Label::Rude => write!(f, "rude"),
        }
    }
}

impl std::str::FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polite" => Ok(Label::Polite),
            "rude" => Ok(Label::Rude),
            other => Err(Error::InvalidInput(format!("unknown label {other:?}"))),
        }
    }
}

/// Output of the quartile-extreme split: ids only, join with features later.
#[derive(Debug, Clone)]
pub struct QuartileSplit {
    pub polite: Vec<String>,
    pub rude: Vec<String>,
    /// True when score ties straddled a quartile boundary and post-id order
    /// decided membership.
    pub boundary_ties: bool,
}

impl QuartileSplit {
    pub fn labels(&self) -> impl Iterator<Item = (&str, Label)> {
        self.polite
            .iter()
            .map(|id| (id.as_str(), Label::Polite))
            .chain(self.rude.iter().map(|id| (id.as_str(), Label::Rude)))
    }
}

/// Keeps the top and bottom floor(n/4) posts by score; the middle half is
/// dropped. Boundary ties break by stable post-id order.
pub fn quartile_split(scores: &ScoreVector) -> Result<QuartileSplit> {
    let n = scores.len();
    if n < 8 {
        return Err(Error::TooFewPosts(n));
    }
    let q = n / 4;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        scores.values()[a]
            .partial_cmp(&scores.values()[b])
            .unwrap()
            .then_with(|| scores.ids()[a].cmp(&scores.ids()[b]))
    });

    let rude: Vec<String> = order[..q]
        .iter()
        .map(|&i| scores.ids()[i].clone())
        .collect();
    let polite: Vec<String> = order[n - q..]
        .iter()
        .rev()
        .map(|&i| scores.ids()[i].clone())
        .collect();

    let tie_at = |a: usize, b: usize| scores.values()[order[a]] == scores.values()[order[b]];
    let boundary_ties = tie_at(q - 1, q) || tie_at(n - q, n - q - 1);
    if boundary_ties {
        log::warn!("quartile boundary ties broken by post-id order");
    }
    Ok(QuartileSplit {
        polite,
        rude,
        boundary_ties,
    })
}

/// Labeled feature rows ready for training.
#[derive(Debug, Clone)]
pub struct LabeledSet {
    pub post_ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl LabeledSet {
    /// Joins a quartile split with a feature matrix. Every labeled post must
    /// have a feature row.
    pub fn from_split(features: &FeatureMatrix, split: &QuartileSplit) -> Result<Self> {
        let mut post_ids = Vec::new();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (id, label) in split.labels() {
            let Some(row_idx) = features.post_ids().iter().position(|p| p == id) else {
                return Err(Error::InvalidInput(format!(
                    "labeled post {id:?} missing from feature matrix"
                )));
            };
            let row = features.row(row_idx).to_vec();
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteFeature(id.to_string()));
            }
            post_ids.push(id.to_string());
            rows.push(row);
            labels.push(label);
        }
        Ok(LabeledSet {
            post_ids,
            feature_names: features.categories().to_vec(),
            rows,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn subset(&self, indices: &[usize]) -> LabeledSet {
        LabeledSet {
            post_ids: indices.iter().map(|&i| self.post_ids[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Trained linear model: weights in standardized feature space plus the
/// scaler needed to apply them to raw proportions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearModel {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub tol: f64,
    /// Zero-variance features dropped before training.
    pub dropped_features: Vec<String>,
    /// FNV-1a hash over the training post ids, for provenance checks.
    pub training_hash: String,
}

pub const MODEL_VERSION: u32 = 1;

fn fnv1a(data: impl Iterator<Item = u8>) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in data {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

impl LinearModel {
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)
            .map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let model: LinearModel =
            serde_json::from_reader(r).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if model.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {}",
                model.version
            )));
        }
        if model.weights.len() != model.feature_names.len() {
            return Err(Error::ModelFormat("weight/feature length mismatch".into()));
        }
        Ok(model)
    }
}

/// Trains a linear SVM with train-set standardization (population SD, the
/// scikit-learn convention). Zero-variance features are dropped and recorded.
pub fn train_linear_svm(data: &LabeledSet, c: f64, tol: f64, seed: u64) -> Result<LinearModel> {
    if data.is_empty() {
        return Err(Error::EmptyInput("training set".into()));
    }
    let has_pos = data.labels.iter().any(|l| *l == Label::Polite);
    let has_neg = data.labels.iter().any(|l| *l == Label::Rude);
    if !has_pos || !has_neg {
        return Err(Error::SingleClass);
    }
    for (row, id) in data.rows.iter().zip(&data.post_ids) {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature(id.clone()));
        }
    }

    let n = data.len() as f64;
    let k = data.feature_names.len();
    let mut kept = Vec::new();
    let mut means = Vec::new();
    let mut sds = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..k {
        let mean = data.rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = data.rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        if sd == 0.0 {
            dropped.push(data.feature_names[j].clone());
        } else {
            kept.push(j);
            means.push(mean);
            sds.push(sd);
        }
    }
    if kept.is_empty() {
        return Err(Error::ZeroVariance("every feature column".into()));
    }

    let rows: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|r| {
            kept.iter()
                .enumerate()
                .map(|(pos, &j)| (r[j] - means[pos]) / sds[pos])
                .collect()
        })
        .collect();
    let y: Vec<f64> = data.labels.iter().map(|l| l.sign()).collect();

    let solution = svm::solve(&rows, &y, c, tol, seed)?;
    let training_hash = format!(
        "{:016x}",
        fnv1a(data.post_ids.iter().flat_map(|s| s.bytes().chain([b'\n'])))
    );

    Ok(LinearModel {
        version: MODEL_VERSION,
        feature_names: kept
            .iter()
            .map(|&j| data.feature_names[j].clone())
            .collect(),
        means,
        sds,
        weights: solution.feature_weights().to_vec(),
        bias: solution.bias(),
        c,
        tol,
        dropped_features: dropped,
        training_hash,
    })
}

/// Grid-search outcome: the chosen C plus the mean weighted F1 per candidate.
#[derive(Debug, Clone)]
pub struct GridSearchResult {
    pub best_c: f64,
    /// (C, mean weighted F1 across folds), in grid order.
    pub scores: Vec<(f64, f64)>,
}

/// Stratified k-fold grid search maximizing mean weighted F1.
/// Ties go to the smaller C (stronger regularization).
pub fn grid_search(
    data: &LabeledSet,
    c_grid: &[f64],
    folds: usize,
    tol: f64,
    seed: u64,
) -> Result<GridSearchResult> {
    if c_grid.is_empty() {
        return Err(Error::EmptyInput("C grid".into()));
    }
    if folds < 2 {
        return Err(Error::InvalidInput(format!("folds must be >= 2, got {folds}")));
    }
    let pos: Vec<usize> = (0..data.len())
        .filter(|&i| data.labels[i] == Label::Polite)
        .collect();
    let neg: Vec<usize> = (0..data.len())
        .filter(|&i| data.labels[i] == Label::Rude)
        .collect();
    let smallest = pos.len().min(neg.len());
    if smallest < folds {
        return Err(Error::StratificationImpossible {
            folds,
            class_size: smallest,
        });
    }

    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut pos = pos;
    let mut neg = neg;
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    // round-robin assignment keeps folds stratified
    let mut fold_of = vec![0usize; data.len()];
    for (rank, &i) in pos.iter().enumerate() {
        fold_of[i] = rank % folds;
    }
    for (rank, &i) in neg.iter().enumerate() {
        fold_of[i] = rank % folds;
    }

    let mut sorted_grid: Vec<f64> = c_grid.to_vec();
    sorted_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut scores = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for &c in &sorted_grid {
        let mut fold_f1 = Vec::new();
        for fold in 0..folds {
            let train_idx: Vec<usize> =
                (0..data.len()).filter(|&i| fold_of[i] != fold).collect();
            let test_idx: Vec<usize> =
                (0..data.len()).filter(|&i| fold_of[i] == fold).collect();
            let model = train_linear_svm(&data.subset(&train_idx), c, tol, seed)?;
            let test = data.subset(&test_idx);
            let (pred, margins) = predict_rows(&model, &test.feature_names, &test.rows)?;
            let m = evaluate(&test.labels, &pred, &margins)?;
            fold_f1.push(m.f1_weighted);
        }
        let mean = fold_f1.iter().sum::<f64>() / fold_f1.len() as f64;
        scores.push((c, mean));
        // strictly-greater keeps the smallest C on ties (grid is ascending)
        if best.map_or(true, |(_, b)| mean > b) {
            best = Some((c, mean));
        }
    }
    Ok(GridSearchResult {
        best_c: best.unwrap().0,
        scores,
    })
}

/// Predictions plus raw margins.
#[derive(Debug, Clone)]
pub struct Predictions {
    pub post_ids: Vec<String>,
    pub labels: Vec<Label>,
    pub margins: Vec<f64>,
}

/// Applies a model to a feature matrix. Model features missing from the
/// matrix are zero-filled (with a warning); extra columns are ignored.
/// Margin 0 classifies as rude.
pub fn predict(model: &LinearModel, features: &FeatureMatrix) -> Result<Predictions> {
    let rows: Vec<Vec<f64>> = (0..features.n_rows())
        .map(|i| features.row(i).to_vec())
        .collect();
    let (labels, margins) = predict_rows(model, features.categories(), &rows)?;
    Ok(Predictions {
        post_ids: features.post_ids().to_vec(),
        labels,
        margins,
    })
}

fn predict_rows(
    model: &LinearModel,
    columns: &[String],
    rows: &[Vec<f64>],
) -> Result<(Vec<Label>, Vec<f64>)> {
    let mut col_of: Vec<Option<usize>> = Vec::with_capacity(model.feature_names.len());
    let mut missing = Vec::new();
    for name in &model.feature_names {
        let idx = columns.iter().position(|c| c == name);
        if idx.is_none() {
            missing.push(name.as_str());
        }
        col_of.push(idx);
    }
    if missing.len() == model.feature_names.len() {
        return Err(Error::NoSharedFeatures);
    }
    if !missing.is_empty() {
        log::warn!(
            "{} model features missing from input, zero-filled: {missing:?}",
            missing.len()
        );
    }

    let mut labels = Vec::with_capacity(rows.len());
    let mut margins = Vec::with_capacity(rows.len());
    for row in rows {
        let mut margin = model.bias;
        for (j, col) in col_of.iter().enumerate() {
            let raw = col.map(|c| row[c]).unwrap_or(0.0);
            margin += model.weights[j] * (raw - model.means[j]) / model.sds[j];
        }
        labels.push(if margin > 0.0 { Label::Polite } else { Label::Rude });
        margins.push(margin);
    }
    Ok((labels, margins))
}
