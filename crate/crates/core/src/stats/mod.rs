//! Annotation standardization, inter-rater reliability, and
//! feature-politeness correlation with multiple-comparison correction.
//!
//! All operations are pure functions over immutable inputs.

pub mod dist;

use std::collections::HashMap;
use std::io::Write;

use crate::corpus::AnnotationTable;
use crate::error::Error;
use crate::vectorizer::FeatureMatrix;
use crate::Result;

/// Standardized, annotator-averaged politeness score per post.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    ids: Vec<String>,
    values: Vec<f64>,
    index: HashMap<String, usize>,
}

impl ScoreVector {
    pub fn from_pairs(pairs: Vec<(String, f64)>) -> Result<Self> {
        let mut ids = Vec::with_capacity(pairs.len());
        let mut values = Vec::with_capacity(pairs.len());
        let mut index = HashMap::new();
        for (id, v) in pairs {
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(Error::DuplicateId(id));
            }
            ids.push(id);
            values.push(v);
        }
        Ok(ScoreVector { ids, values, index })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.index.get(id).map(|&i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.ids
            .iter()
            .map(|s| s.as_str())
            .zip(self.values.iter().copied())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample (n-1) standard deviation.
fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// Z-scores each annotator's present cells (sample SD), then averages the
/// available z-scores per post.
pub fn standardize_scores(table: &AnnotationTable) -> Result<ScoreVector> {
    let n_posts = table.n_posts();
    let mut sums = vec![0.0; n_posts];
    let mut counts = vec![0usize; n_posts];

    for ai in 0..table.n_annotators() {
        let cells = table.annotator_scores(ai);
        let raw: Vec<f64> = cells.iter().map(|&(_, s)| s as f64).collect();
        let m = mean(&raw);
        let sd = sample_sd(&raw);
        if sd == 0.0 {
            return Err(Error::ZeroVarianceAnnotator(
                table.annotator_ids()[ai].clone(),
            ));
        }
        for &(pi, s) in &cells {
            sums[pi] += (s as f64 - m) / sd;
            counts[pi] += 1;
        }
    }

    let pairs = table
        .post_ids()
        .iter()
        .zip(sums.iter().zip(counts.iter()))
        .map(|(id, (&sum, &count))| (id.clone(), sum / count as f64))
        .collect();
    ScoreVector::from_pairs(pairs)
}

/// Pearson product-moment correlation with a two-tailed analytic p-value
/// from the t-distribution with n-2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewObservations { need: 3, got: n });
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x".into()));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        dist::t_two_tailed(t, df)
    };
    Ok((r, p))
}

/// Bonferroni mask: `mask[i] = p[i] < alpha / m` with `m = p.len()`.
pub fn bonferroni(pvalues: &[f64], alpha: f64) -> Result<Vec<bool>> {
    if pvalues.is_empty() {
        return Err(Error::EmptyInput("p-values".into()));
    }
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::InvalidInput(format!("alpha {alpha} not in (0,1)")));
    }
    let threshold = alpha / pvalues.len() as f64;
    Ok(pvalues.iter().map(|&p| p < threshold).collect())
}

/// Krippendorff's alpha with interval distance (a-b)^2, computed from the
/// pairable values of each unit (post). Missing cells simply do not pair.
pub fn krippendorff_alpha_interval(table: &AnnotationTable) -> Result<f64> {
    if table.n_annotators() < 2 {
        return Err(Error::TooFewObservations {
            need: 2,
            got: table.n_annotators(),
        });
    }
    // values per unit, keeping only units with >= 2 present scores
    let mut units: Vec<Vec<f64>> = Vec::new();
    for pi in 0..table.n_posts() {
        let vals: Vec<f64> = (0..table.n_annotators())
            .filter_map(|ai| table.score(pi, ai).map(|s| s as f64))
            .collect();
        if vals.len() >= 2 {
            units.push(vals);
        }
    }
    if units.is_empty() {
        return Err(Error::NoPairableValues);
    }

    let n: f64 = units.iter().map(|u| u.len() as f64).sum();

    // observed disagreement
    let mut d_o = 0.0;
    for unit in &units {
        let m = unit.len() as f64;
        let mut within = 0.0;
        for (i, &a) in unit.iter().enumerate() {
            for (j, &b) in unit.iter().enumerate() {
                if i != j {
                    within += (a - b).powi(2);
                }
            }
        }
        d_o += within / (m - 1.0);
    }
    d_o /= n;

    // expected disagreement over all pairable values pooled
    let pooled: Vec<f64> = units.iter().flatten().copied().collect();
    let mut d_e = 0.0;
    for (i, &a) in pooled.iter().enumerate() {
        for (j, &b) in pooled.iter().enumerate() {
            if i != j {
                d_e += (a - b).powi(2);
            }
        }
    }
    d_e /= n * (n - 1.0);

    if d_e == 0.0 {
        return Err(Error::DegenerateReliability(
            "zero expected disagreement (constant ratings)".into(),
        ));
    }
    Ok(1.0 - d_o / d_e)
}

/// ICC(2,k): two-way random effects, average measures, absolute agreement.
/// Rows are posts, columns are annotators; the matrix must be complete.
pub fn icc2k(matrix: &[Vec<f64>]) -> Result<f64> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::TooFewObservations { need: 2, got: n });
    }
    let k = matrix[0].len();
    if k < 2 {
        return Err(Error::TooFewObservations { need: 2, got: k });
    }
    if matrix.iter().any(|row| row.len() != k) {
        return Err(Error::LengthMismatch {
            left: k,
            right: matrix.iter().map(|r| r.len()).find(|&l| l != k).unwrap(),
        });
    }

    let nf = n as f64;
    let kf = k as f64;
    let grand = matrix.iter().flatten().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = matrix.iter().map(|r| mean(r)).collect();
    let col_means: Vec<f64> = (0..k)
        .map(|j| matrix.iter().map(|r| r[j]).sum::<f64>() / nf)
        .collect();

    let ss_rows = kf * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_cols = nf * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_total: f64 = matrix
        .iter()
        .flatten()
        .map(|v| (v - grand).powi(2))
        .sum();
    let ss_err = ss_total - ss_rows - ss_cols;

    let ms_rows = ss_rows / (nf - 1.0);
    let ms_cols = ss_cols / (kf - 1.0);
    let ms_err = ss_err / ((nf - 1.0) * (kf - 1.0));

    if ms_rows == 0.0 {
        return Err(Error::DegenerateReliability(
            "zero between-post variance".into(),
        ));
    }
    Ok((ms_rows - ms_err) / (ms_rows + (ms_cols - ms_err) / nf))
}

/// ICC(2,k) over a complete [`AnnotationTable`].
pub fn icc2k_table(table: &AnnotationTable) -> Result<f64> {
    let mut matrix = Vec::with_capacity(table.n_posts());
    for pi in 0..table.n_posts() {
        let mut row = Vec::with_capacity(table.n_annotators());
        for ai in 0..table.n_annotators() {
            match table.score(pi, ai) {
                Some(s) => row.push(s as f64),
                None => {
                    return Err(Error::IncompleteMatrix {
                        post: table.post_ids()[pi].clone(),
                        annotator: table.annotator_ids()[ai].clone(),
                    })
                }
            }
        }
        matrix.push(row);
    }
    icc2k(&matrix)
}

/// One row of a correlation report.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryCorrelation {
    pub category: String,
    pub r: f64,
    pub p: f64,
    pub significant: bool,
}

/// Per-category Pearson correlations against the politeness scores, with a
/// pooled Bonferroni family over all testable categories.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub entries: Vec<CategoryCorrelation>,
    /// Zero-variance categories, excluded from the Bonferroni family.
    pub untestable: Vec<String>,
    /// Number of tested categories (the Bonferroni m).
    pub m: usize,
    pub alpha: f64,
    pub n_posts: usize,
}

impl CorrelationReport {
    pub fn threshold(&self) -> f64 {
        self.alpha / self.m as f64
    }

    /// TSV layout: `category, r, p, significant`, preceded by a header
    /// recording alpha, m, and the per-test threshold.
    pub fn write_tsv<W: Write>(&self, mut w: W, extra_comments: &[String]) -> Result<()> {
        let io_err = |e: std::io::Error| Error::Io {
            path: "<writer>".into(),
            source: e,
        };
        for comment in extra_comments {
            writeln!(w, "# {comment}").map_err(io_err)?;
        }
        writeln!(
            w,
            "# alpha={} m={} threshold={:e} n={}",
            self.alpha,
            self.m,
            self.threshold(),
            self.n_posts
        )
        .map_err(io_err)?;
        writeln!(w, "category\tr\tp\tsignificant").map_err(io_err)?;
        for e in &self.entries {
            writeln!(w, "{}\t{:.6}\t{:e}\t{}", e.category, e.r, e.p, e.significant)
                .map_err(io_err)?;
        }
        for cat in &self.untestable {
            writeln!(w, "{cat}\tNA\tNA\tuntestable").map_err(io_err)?;
        }
        Ok(())
    }
}

/// Correlates every feature column with the scores of the overlapping posts.
pub fn correlate_features(
    features: &FeatureMatrix,
    scores: &ScoreVector,
    alpha: f64,
) -> Result<CorrelationReport> {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (i, id) in features.post_ids().iter().enumerate() {
        if let Some(score) = scores.get(id) {
            rows.push(i);
            y.push(score);
        }
    }
    if rows.is_empty() {
        return Err(Error::NoOverlap);
    }

    let mut tested: Vec<(String, f64, f64)> = Vec::new();
    let mut untestable = Vec::new();
    for (ci, category) in features.categories().iter().enumerate() {
        let x: Vec<f64> = rows.iter().map(|&r| features.get(r, ci)).collect();
        let mx = mean(&x);
        if x.iter().all(|&v| v == mx) {
            untestable.push(category.clone());
            continue;
        }
        let (r, p) = pearson(&x, &y)?;
        tested.push((category.clone(), r, p));
    }
    if tested.is_empty() {
        return Err(Error::ZeroVariance("all feature columns".into()));
    }

    let pvalues: Vec<f64> = tested.iter().map(|t| t.2).collect();
    let mask = bonferroni(&pvalues, alpha)?;
    let entries = tested
        .into_iter()
        .zip(mask)
        .map(|((category, r, p), significant)| CategoryCorrelation {
            category,
            r,
            p,
            significant,
        })
        .collect();
    Ok(CorrelationReport {
        entries,
        untestable,
        m: pvalues.len(),
        alpha,
        n_posts: rows.len(),
    })
}
