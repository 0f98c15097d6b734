//! Bilingual (English/Mandarin) lexicon-based politeness analysis.
//!
//! The crate is organized as a pipeline:
//!
//! 1. [`corpus`] loads microblog posts and annotation tables from disk.
//! 2. [`lexicon`] parses politeness/psycholinguistic dictionaries and
//!    compiles them into immutable matchers.
//! 3. [`tokenizer`] normalizes social-media text with meta-tokens,
//!    segments Mandarin by forward maximum matching, and splits sentences.
//! 4. [`vectorizer`] turns tokenized posts into per-category proportion
//!    features.
//! 5. [`stats`] covers score standardization, inter-rater reliability
//!    (Krippendorff's alpha, ICC(2,k)), and Bonferroni-corrected Pearson
//!    correlations.
//! 6. [`learner`] trains and evaluates linear-SVM politeness classifiers
//!    on quartile-extreme labels.

pub mod corpus;
pub mod error;
pub mod learner;
pub mod lexicon;
pub mod stats;
pub mod tokenizer;
pub mod vectorizer;

pub use corpus::{AnnotationTable, Corpus, Lang, Post};
pub use error::Error;
pub use lexicon::{CompiledMatcher, Lexicon, Pattern, PatternKind};
pub use tokenizer::TokenizedPost;
pub use vectorizer::{FeatureMatrix, FeatureVector};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
