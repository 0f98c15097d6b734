//! Corpus and annotation ingestion.
//!
//! Corpora are JSONL (canonical) or CSV with a mandatory header; annotations
//! are long-format CSV (`post_id,annotator_id,score`) so that different
//! annotator pairs can label different post batches. All returned structures
//! are immutable after loading.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Language of a post. `lang` is a trusted input field; no detection happens here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    En,
    Zh,
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lang::En => write!(f, "en"),
            Lang::Zh => write!(f, "zh"),
        }
    }
}

impl std::str::FromStr for Lang {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "en" => Ok(Lang::En),
            "zh" => Ok(Lang::Zh),
            other => Err(Error::UnknownLanguage(other.to_string())),
        }
    }
}

/// One microblog post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub lang: Lang,
    pub text: String,
}

/// An ordered, id-unique collection of posts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    posts: Vec<Post>,
}

/// Corpus file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl Corpus {
    /// Validates and wraps a list of posts. Order is preserved.
    pub fn new(posts: Vec<Post>) -> Result<Self> {
        let mut seen = HashSet::new();
        for post in &posts {
            if post.id.is_empty() {
                return Err(Error::InvalidInput("empty post id".into()));
            }
            if !seen.insert(post.id.clone()) {
                return Err(Error::DuplicateId(post.id.clone()));
            }
            if post.text.trim().is_empty() {
                return Err(Error::EmptyText(post.id.clone()));
            }
        }
        Ok(Corpus { posts })
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Post> {
        self.posts.iter()
    }

    /// Writes the corpus back out as JSONL.
    pub fn write_jsonl<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for post in &self.posts {
            let line = serde_json::to_string(post)
                .map_err(|e| Error::InvalidInput(format!("serialize post: {e}")))?;
            writeln!(w, "{line}").map_err(|e| Error::Io {
                path: "<writer>".into(),
                source: e,
            })?;
        }
        Ok(())
    }
}

/// Loads a corpus from JSONL or headered CSV. Record order is preserved.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::Jsonl => load_corpus_jsonl(BufReader::new(file)),
        CorpusFormat::Csv => load_corpus_csv(file),
    }
}

pub fn load_corpus_jsonl<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut posts = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Io {
            path: format!("line {lineno}"),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                line: lineno,
                reason: e.to_string(),
            })?;
        posts.push(post_from_json(&value, lineno)?);
    }
    Corpus::new(posts)
}

fn post_from_json(value: &serde_json::Value, line: usize) -> Result<Post> {
    let get = |field: &str| -> Result<&str> {
        value
            .get(field)
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::MalformedRecord {
                line,
                reason: format!("missing or non-string field {field:?}"),
            })
    };
    let id = get("id")?.to_string();
    let lang: Lang = get("lang")?.parse()?;
    let text = get("text")?.to_string();
    Ok(Post { id, lang, text })
}

fn load_corpus_csv<R: Read>(reader: R) -> Result<Corpus> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedRecord {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MalformedRecord {
                line: 1,
                reason: format!("missing column {name:?}"),
            })
    };
    let (id_col, lang_col, text_col) = (col("id")?, col("lang")?, col("text")?);

    let mut posts = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let lineno = idx + 2; // header is line 1
        let record = record.map_err(|e| Error::MalformedRecord {
            line: lineno,
            reason: e.to_string(),
        })?;
        let field = |c: usize| -> Result<&str> {
            record.get(c).ok_or_else(|| Error::MalformedRecord {
                line: lineno,
                reason: "short record".into(),
            })
        };
        posts.push(Post {
            id: field(id_col)?.to_string(),
            lang: field(lang_col)?.parse()?,
            text: field(text_col)?.to_string(),
        });
    }
    Corpus::new(posts)
}

/// Posts x annotators matrix of raw integer politeness scores in [-3, +3],
/// with missing cells first-class (required for Krippendorff's alpha on
/// incomplete data).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationTable {
    post_ids: Vec<String>,
    annotator_ids: Vec<String>,
    /// Row-major: `scores[post][annotator]`.
    scores: Vec<Vec<Option<i8>>>,
}

impl AnnotationTable {
    /// Builds a table from long-format triples. Row/column order follows
    /// first appearance in the input.
    pub fn from_triples(triples: &[(String, String, i8)]) -> Result<Self> {
        let mut post_ids: Vec<String> = Vec::new();
        let mut annotator_ids: Vec<String> = Vec::new();
        let mut post_index: HashMap<String, usize> = HashMap::new();
        let mut annot_index: HashMap<String, usize> = HashMap::new();
        let mut cells: HashMap<(usize, usize), i8> = HashMap::new();

        for (post, annotator, score) in triples {
            if !(-3..=3).contains(score) {
                return Err(Error::ScoreOutOfRange {
                    post: post.clone(),
                    annotator: annotator.clone(),
                    score: *score as i64,
                });
            }
            let pi = *post_index.entry(post.clone()).or_insert_with(|| {
                post_ids.push(post.clone());
                post_ids.len() - 1
            });
            let ai = *annot_index.entry(annotator.clone()).or_insert_with(|| {
                annotator_ids.push(annotator.clone());
                annotator_ids.len() - 1
            });
            if cells.insert((pi, ai), *score).is_some() {
                return Err(Error::DuplicateAnnotation {
                    post: post.clone(),
                    annotator: annotator.clone(),
                });
            }
        }

        let mut scores = vec![vec![None; annotator_ids.len()]; post_ids.len()];
        for ((pi, ai), s) in cells {
            scores[pi][ai] = Some(s);
        }

        let table = AnnotationTable {
            post_ids,
            annotator_ids,
            scores,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        if self.post_ids.is_empty() {
            return Err(Error::InvalidAnnotationTable("empty table".into()));
        }
        for (pi, row) in self.scores.iter().enumerate() {
            if row.iter().all(|c| c.is_none()) {
                return Err(Error::InvalidAnnotationTable(format!(
                    "post {:?} has no scores",
                    self.post_ids[pi]
                )));
            }
        }
        for (ai, annotator) in self.annotator_ids.iter().enumerate() {
            let present = self.scores.iter().filter(|row| row[ai].is_some()).count();
            if present < 2 {
                return Err(Error::InvalidAnnotationTable(format!(
                    "annotator {annotator:?} has {present} scores; at least 2 required for standardization"
                )));
            }
        }
        Ok(())
    }

    pub fn post_ids(&self) -> &[String] {
        &self.post_ids
    }

    pub fn annotator_ids(&self) -> &[String] {
        &self.annotator_ids
    }

    pub fn score(&self, post: usize, annotator: usize) -> Option<i8> {
        self.scores[post][annotator]
    }

    pub fn n_posts(&self) -> usize {
        self.post_ids.len()
    }

    pub fn n_annotators(&self) -> usize {
        self.annotator_ids.len()
    }

    /// All present scores of one annotator, with their post row indexes.
    pub fn annotator_scores(&self, annotator: usize) -> Vec<(usize, i8)> {
        self.scores
            .iter()
            .enumerate()
            .filter_map(|(pi, row)| row[annotator].map(|s| (pi, s)))
            .collect()
    }

    /// True when every cell is present.
    pub fn is_complete(&self) -> bool {
        self.scores
            .iter()
            .all(|row| row.iter().all(|c| c.is_some()))
    }

    /// Serializes back to long-format CSV triples, row-major.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["post_id", "annotator_id", "score"])
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        for (pi, row) in self.scores.iter().enumerate() {
            for (ai, cell) in row.iter().enumerate() {
                if let Some(s) = cell {
                    wtr.write_record([
                        self.post_ids[pi].as_str(),
                        self.annotator_ids[ai].as_str(),
                        &s.to_string(),
                    ])
                    .map_err(|e| Error::InvalidInput(e.to_string()))?;
                }
            }
        }
        wtr.flush().map_err(|e| Error::Io {
            path: "<writer>".into(),
            source: e,
        })?;
        Ok(())
    }
}

/// Loads an annotation table from CSV with header `post_id,annotator_id,score`.
pub fn load_annotations(path: &Path) -> Result<AnnotationTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_annotations_reader(file)
}

pub fn load_annotations_reader<R: Read>(reader: R) -> Result<AnnotationTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedRecord {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let expect = ["post_id", "annotator_id", "score"];
    if headers.len() < 3 || !expect.iter().zip(headers.iter()).all(|(e, h)| e == &h) {
        return Err(Error::MalformedRecord {
            line: 1,
            reason: format!("expected header post_id,annotator_id,score, got {headers:?}"),
        });
    }

    let mut triples = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let lineno = idx + 2;
        let record = record.map_err(|e| Error::MalformedRecord {
            line: lineno,
            reason: e.to_string(),
        })?;
        let raw = record.get(2).unwrap_or("").trim();
        let score: i64 = raw.parse().map_err(|_| Error::NonIntegerScore {
            value: raw.to_string(),
            line: lineno,
        })?;
        let post = record.get(0).unwrap_or("").to_string();
        let annotator = record.get(1).unwrap_or("").to_string();
        if !(-3..=3).contains(&score) {
            return Err(Error::ScoreOutOfRange {
                post,
                annotator,
                score,
            });
        }
        triples.push((post, annotator, score as i8));
    }
    AnnotationTable::from_triples(&triples)
}
