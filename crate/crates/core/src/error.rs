//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    // corpus loading
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("unknown language {0:?} (expected \"en\" or \"zh\")")]
    UnknownLanguage(String),
    #[error("duplicate post id {0:?}")]
    DuplicateId(String),
    #[error("post {0:?} has empty text")]
    EmptyText(String),

    // annotation loading
    #[error("score {score} for post {post:?} / annotator {annotator:?} outside [-3, +3]")]
    ScoreOutOfRange {
        post: String,
        annotator: String,
        score: i64,
    },
    #[error("non-integer score {value:?} at line {line}")]
    NonIntegerScore { value: String, line: usize },
    #[error("duplicate annotation for (post {post:?}, annotator {annotator:?})")]
    DuplicateAnnotation { post: String, annotator: String },
    #[error("annotation table violates {0}")]
    InvalidAnnotationTable(String),

    // lexicon parsing
    #[error("lexicon parse error in {path} at line {line}: {reason}")]
    LexiconParse {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("lexicon {0:?} is empty")]
    EmptyLexicon(String),
    #[error("category {0:?} has no patterns")]
    EmptyCategory(String),
    #[error("malformed wildcard pattern {0:?}")]
    MalformedWildcard(String),
    #[error("category {0:?} mixes anchored and plain patterns")]
    MixedAnchoring(String),
    #[error("PoliteLex en/zh category sets differ: {0}")]
    BilingualMismatch(String),

    // vectorizer
    #[error("post {0:?} has no tokens")]
    EmptyPost(String),

    // stats
    #[error("annotator {0:?} has zero variance")]
    ZeroVarianceAnnotator(String),
    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { need: usize, got: usize },
    #[error("zero variance in {0}")]
    ZeroVariance(String),
    #[error("no pairable values in annotation table")]
    NoPairableValues,
    #[error("degenerate reliability input: {0}")]
    DegenerateReliability(String),
    #[error("matrix is incomplete: missing cell for post {post:?} / annotator {annotator:?}")]
    IncompleteMatrix { post: String, annotator: String },
    #[error("no overlapping posts between features and scores")]
    NoOverlap,
    #[error("empty input: {0}")]
    EmptyInput(String),

    // learner
    #[error("quartile split needs at least 8 scored posts, got {0}")]
    TooFewPosts(usize),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("non-finite feature value for post {0:?}")]
    NonFiniteFeature(String),
    #[error("cannot stratify {folds} folds: smallest class has {class_size} members")]
    StratificationImpossible { folds: usize, class_size: usize },
    #[error("no features shared between model and input matrix")]
    NoSharedFeatures,
    #[error("ROC-AUC undefined: labels contain a single class")]
    SingleClassAuc,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
