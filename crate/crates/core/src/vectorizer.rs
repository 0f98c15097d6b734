//! Proportion-feature extraction.
//!
//! Counting categories score `matched token positions / token count` (a
//! phrase of length k contributes k). Anchored categories score
//! `matching sentences / sentences`. Mandarin substring categories score
//! `matched codepoints / non-punctuation codepoints`. All features live in
//! [0, 1]; categories with no hits are explicit zeros.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::corpus::Corpus;
use crate::error::Error;
use crate::lexicon::CompiledMatcher;
use crate::tokenizer::{tokenize_post, TokenizedPost};
use crate::Result;

/// Per-post category proportions.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub post_id: String,
    pub values: BTreeMap<String, f64>,
}

/// Dense row-per-post feature matrix with lexicographic column order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    post_ids: Vec<String>,
    categories: Vec<String>,
    /// Row-major, `values[row * categories.len() + col]`.
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(post_ids: Vec<String>, categories: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != post_ids.len() * categories.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: post_ids.len() * categories.len(),
            });
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput("NaN cell in feature matrix".into()));
        }
        Ok(FeatureMatrix {
            post_ids,
            categories,
            values,
        })
    }

    pub fn post_ids(&self) -> &[String] {
        &self.post_ids
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn n_rows(&self) -> usize {
        self.post_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.categories.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.categories.len();
        &self.values[i * k..(i + 1) * k]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.categories.len() + col]
    }

    /// Column values in row order.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    pub fn column_index(&self, category: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == category)
    }

    /// Writes the TSV layout: `post_id` first, then one column per category,
    /// values as decimal fractions with 6 significant digits. Lines passed in
    /// `header_comments` are written first, prefixed `#`.
    pub fn write_tsv<W: Write>(&self, mut w: W, header_comments: &[String]) -> Result<()> {
        let io_err = |e: std::io::Error| Error::Io {
            path: "<writer>".into(),
            source: e,
        };
        for comment in header_comments {
            writeln!(w, "# {comment}").map_err(io_err)?;
        }
        writeln!(w, "post_id\t{}", self.categories.join("\t")).map_err(io_err)?;
        for (i, id) in self.post_ids.iter().enumerate() {
            let cells: Vec<String> = self.row(i).iter().map(|v| format_sig6(*v)).collect();
            writeln!(w, "{id}\t{}", cells.join("\t")).map_err(io_err)?;
        }
        Ok(())
    }

    /// Reads the TSV layout back. `#` comment lines are skipped.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let mut header: Option<Vec<String>> = None;
        let mut post_ids = Vec::new();
        let mut values = Vec::new();
        loop {
            let Some((idx, line)) = lines.next() else {
                break;
            };
            let line = line.map_err(|e| Error::Io {
                path: format!("line {}", idx + 1),
                source: e,
            })?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').collect();
            match &header {
                None => {
                    if cells.first() != Some(&"post_id") {
                        return Err(Error::MalformedRecord {
                            line: idx + 1,
                            reason: "expected post_id header column".into(),
                        });
                    }
                    header = Some(cells[1..].iter().map(|s| s.to_string()).collect());
                }
                Some(cats) => {
                    if cells.len() != cats.len() + 1 {
                        return Err(Error::MalformedRecord {
                            line: idx + 1,
                            reason: format!(
                                "expected {} columns, got {}",
                                cats.len() + 1,
                                cells.len()
                            ),
                        });
                    }
                    post_ids.push(cells[0].to_string());
                    for cell in &cells[1..] {
                        let v: f64 = cell.parse().map_err(|_| Error::MalformedRecord {
                            line: idx + 1,
                            reason: format!("bad number {cell:?}"),
                        })?;
                        values.push(v);
                    }
                }
            }
        }
        let categories = header.ok_or_else(|| Error::EmptyInput("feature TSV".into()))?;
        FeatureMatrix::new(post_ids, categories, values)
    }
}

/// 6 significant digits, plain decimal.
fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Extracts one post's feature vector against the given matchers.
pub fn extract(post: &TokenizedPost, matchers: &[&CompiledMatcher]) -> Result<FeatureVector> {
    if post.token_count() == 0 {
        return Err(Error::EmptyPost(post.post_id.clone()));
    }
    let mut values: BTreeMap<String, f64> = BTreeMap::new();
    for matcher in matchers {
        let result = matcher.match_post(post);
        for (ci, category) in matcher.categories().iter().enumerate() {
            let value = if matcher.is_anchored(ci) {
                let n_sentences = post.sentences.len().max(1);
                result.anchored_sentences[ci].len() as f64 / n_sentences as f64
            } else {
                let mut v =
                    result.token_positions[ci].len() as f64 / post.token_count() as f64;
                if result.non_punct_chars > 0 {
                    v += result.char_positions[ci].len() as f64 / result.non_punct_chars as f64;
                }
                v.min(1.0)
            };
            // categories shared across lexica accumulate, still capped at 1
            let slot = values.entry(category.clone()).or_insert(0.0);
            *slot = (*slot + value).min(1.0);
        }
    }
    Ok(FeatureVector {
        post_id: post.post_id.clone(),
        values,
    })
}

/// Extracts a whole corpus into a dense matrix. Row order follows the corpus;
/// column order is the lexicographic union of all matcher categories.
pub fn extract_corpus(corpus: &Corpus, matchers: &[&CompiledMatcher]) -> Result<FeatureMatrix> {
    let mut categories: Vec<String> = matchers
        .iter()
        .flat_map(|m| m.categories().iter().cloned())
        .collect();
    categories.sort();
    categories.dedup();

    let mut post_ids = Vec::with_capacity(corpus.len());
    let mut values = Vec::with_capacity(corpus.len() * categories.len());
    for post in corpus.iter() {
        let tokenized = tokenize_post(post);
        let vector = extract(&tokenized, matchers)?;
        post_ids.push(post.id.clone());
        for category in &categories {
            values.push(vector.values.get(category).copied().unwrap_or(0.0));
        }
    }
    FeatureMatrix::new(post_ids, categories, values)
}
