//! Lexicon parsing and matcher compilation.
//!
//! Three dictionary formats are supported: the PoliteLex JSON format, the
//! LIWC `.dic` layout (format only; no proprietary content ships), and the
//! EmoLex tab-separated layout. All parse into a unified [`Lexicon`] that
//! compiles into an immutable [`CompiledMatcher`].
//!
//! Matching semantics:
//! - English patterns match against the token stream, case-insensitively
//!   (tokens are already lowercased by the tokenizer). Entries ending in `*`
//!   are stem wildcards; entries with internal whitespace are token phrases;
//!   entries prefixed `^` anchor to sentence starts.
//! - Mandarin PoliteLex patterns match as codepoint-exact substrings; `…`
//!   inside an entry is a bounded gap of 1..=6 codepoints.
//! - A token may match any number of categories; matches are not exclusive.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::corpus::Lang;
use crate::error::Error;
use crate::tokenizer::{tokenize_en, TokenizedPost};
use crate::Result;

/// Bounded gap width (in codepoints) for `…` inside Mandarin patterns.
const GAP_MIN: usize = 1;
const GAP_MAX: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    LiteralToken,
    TokenPhrase,
    StemWildcard,
    Anchored,
}

/// One lexicon entry in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub kind: PatternKind,
    /// Canonical surface: lowercased, `^` stripped for anchored entries,
    /// `*` retained for stems.
    pub surface: String,
    pub lang: Lang,
    /// True for Mandarin PoliteLex entries, which match as substrings rather
    /// than against segmented tokens.
    pub substring: bool,
}

impl Pattern {
    /// Parses a raw entry string. `substring` selects Mandarin substring
    /// semantics (whitespace inside the entry is dropped).
    pub fn parse(raw: &str, lang: Lang, substring: bool) -> Result<Pattern> {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(Error::InvalidInput("empty lexicon entry".into()));
        }
        let (anchored, body) = match raw.strip_prefix('^') {
            Some(rest) => (true, rest),
            None => (false, raw),
        };
        if body.is_empty() {
            return Err(Error::InvalidInput(format!("bare anchor in entry {raw:?}")));
        }
        let body = if substring {
            body.split_whitespace().collect::<String>()
        } else {
            body.to_lowercase()
        };

        let star_count = body.matches('*').count();
        if star_count > 0 {
            if anchored || star_count != 1 || !body.ends_with('*') || body.chars().count() < 3 {
                return Err(Error::MalformedWildcard(raw.to_string()));
            }
            return Ok(Pattern {
                kind: PatternKind::StemWildcard,
                surface: body,
                lang,
                substring: false, // stems always match token prefixes
            });
        }

        let kind = if anchored {
            PatternKind::Anchored
        } else if body.split_whitespace().count() > 1 {
            PatternKind::TokenPhrase
        } else {
            PatternKind::LiteralToken
        };
        Ok(Pattern {
            kind,
            surface: body,
            lang,
            substring,
        })
    }

    /// A concrete string that this pattern is guaranteed to match, used by the
    /// self-match tests. Gaps are filled with a single placeholder codepoint.
    pub fn canonical_example(&self) -> String {
        match self.kind {
            PatternKind::StemWildcard => self.surface.trim_end_matches('*').to_string(),
            _ => self.surface.replace('…', "呀"),
        }
    }
}

/// Declared language coverage of a lexicon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconLanguage {
    En,
    Zh,
    Bilingual,
}

impl fmt::Display for LexiconLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexiconLanguage::En => write!(f, "en"),
            LexiconLanguage::Zh => write!(f, "zh"),
            LexiconLanguage::Bilingual => write!(f, "bilingual"),
        }
    }
}

/// A category -> patterns mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub name: String,
    pub language: LexiconLanguage,
    pub categories: BTreeMap<String, Vec<Pattern>>,
}

impl Lexicon {
    pub fn new(
        name: String,
        language: LexiconLanguage,
        categories: BTreeMap<String, Vec<Pattern>>,
    ) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::EmptyLexicon(name));
        }
        for (cat, patterns) in &categories {
            if cat.is_empty() {
                return Err(Error::EmptyCategory("<unnamed>".into()));
            }
            if patterns.is_empty() {
                return Err(Error::EmptyCategory(cat.clone()));
            }
            let anchored = patterns
                .iter()
                .filter(|p| p.kind == PatternKind::Anchored)
                .count();
            if anchored != 0 && anchored != patterns.len() {
                return Err(Error::MixedAnchoring(cat.clone()));
            }
        }
        Ok(Lexicon {
            name,
            language,
            categories,
        })
    }

    pub fn category_names(&self) -> Vec<&str> {
        self.categories.keys().map(|s| s.as_str()).collect()
    }

    /// True when every pattern of the category anchors to sentence starts.
    pub fn is_anchored_category(&self, category: &str) -> bool {
        self.categories
            .get(category)
            .map(|p| p.iter().all(|p| p.kind == PatternKind::Anchored))
            .unwrap_or(false)
    }
}

#[derive(Deserialize)]
struct PoliteLexFile {
    name: String,
    languages: BTreeMap<String, BTreeMap<String, Vec<String>>>,
}

/// Parses the PoliteLex JSON format.
pub fn parse_politelex(path: &Path) -> Result<Lexicon> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_politelex_str(&text).map_err(|e| match e {
        Error::InvalidInput(reason) => Error::LexiconParse {
            path: path.display().to_string(),
            line: 0,
            reason,
        },
        other => other,
    })
}

pub fn parse_politelex_str(text: &str) -> Result<Lexicon> {
    let file: PoliteLexFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("invalid PoliteLex JSON: {e}")))?;
    if file.languages.is_empty() {
        return Err(Error::InvalidInput("no languages declared".into()));
    }

    let mut categories: BTreeMap<String, Vec<Pattern>> = BTreeMap::new();
    let mut per_lang_names: Vec<(Lang, BTreeSet<String>)> = Vec::new();
    for (lang_key, cats) in &file.languages {
        let lang: Lang = lang_key.parse()?;
        let substring = lang == Lang::Zh;
        per_lang_names.push((lang, cats.keys().cloned().collect()));
        for (cat, entries) in cats {
            if entries.is_empty() {
                return Err(Error::EmptyCategory(cat.clone()));
            }
            let slot = categories.entry(cat.clone()).or_default();
            for entry in entries {
                slot.push(Pattern::parse(entry, lang, substring)?);
            }
        }
    }

    let language = match per_lang_names.len() {
        1 => match per_lang_names[0].0 {
            Lang::En => LexiconLanguage::En,
            Lang::Zh => LexiconLanguage::Zh,
        },
        _ => {
            let (a, b) = (&per_lang_names[0].1, &per_lang_names[1].1);
            if a != b {
                let diff: Vec<&String> = a.symmetric_difference(b).collect();
                return Err(Error::BilingualMismatch(format!("{diff:?}")));
            }
            LexiconLanguage::Bilingual
        }
    };
    Lexicon::new(file.name, language, categories)
}

/// Parses the standard LIWC `.dic` layout: a `%`-delimited header of
/// `id<TAB>category` lines followed by `word<TAB>id...` body lines.
pub fn parse_liwc_dic(path: &Path) -> Result<Lexicon> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_liwc_dic_str(&text, &path.display().to_string())
}

pub fn parse_liwc_dic_str(text: &str, source: &str) -> Result<Lexicon> {
    let err = |line: usize, reason: String| Error::LexiconParse {
        path: source.to_string(),
        line,
        reason,
    };

    let mut lines = text.lines().enumerate();
    // header opens with '%'
    let mut opened = false;
    for (idx, line) in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "%" {
            opened = true;
            break;
        }
        return Err(err(idx + 1, "expected leading '%' delimiter".into()));
    }
    if !opened {
        return Err(err(0, "missing '%' delimiters".into()));
    }

    let mut id_to_name: HashMap<u32, String> = HashMap::new();
    let mut closed = false;
    for (idx, line) in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "%" {
            closed = true;
            break;
        }
        let mut parts = line.split_whitespace();
        let id: u32 = parts
            .next()
            .unwrap()
            .parse()
            .map_err(|_| err(idx + 1, "category id is not an integer".into()))?;
        let name = parts
            .next()
            .ok_or_else(|| err(idx + 1, "missing category name".into()))?;
        id_to_name.insert(id, name.to_string());
    }
    if !closed {
        return Err(err(0, "missing closing '%' delimiter".into()));
    }

    let mut categories: BTreeMap<String, Vec<Pattern>> = BTreeMap::new();
    for name in id_to_name.values() {
        categories.insert(name.clone(), Vec::new());
    }
    let mut body_entries = 0usize;
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap();
        let mut ids = parts.peekable();
        if ids.peek().is_none() {
            return Err(err(idx + 1, format!("word {word:?} has no category ids")));
        }
        for id in ids {
            let id: u32 = id
                .parse()
                .map_err(|_| err(idx + 1, format!("bad category id {id:?}")))?;
            let name = id_to_name
                .get(&id)
                .ok_or_else(|| err(idx + 1, format!("id {id} not declared in header")))?;
            let pattern = Pattern::parse(word, Lang::En, false)
                .map_err(|e| err(idx + 1, e.to_string()))?;
            categories.get_mut(name).unwrap().push(pattern);
        }
        body_entries += 1;
    }
    if body_entries == 0 {
        log::warn!("{source}: .dic file declares categories but has no word entries");
    }
    // Header-only categories stay valid but empty; drop them only if the whole
    // body is empty would make the lexicon unrepresentable, so keep a stub.
    categories.retain(|_, v| !v.is_empty());
    if categories.is_empty() {
        if body_entries == 0 {
            // degenerate but valid: 0 patterns
            return Ok(Lexicon {
                name: source.to_string(),
                language: LexiconLanguage::En,
                categories: BTreeMap::new(),
            });
        }
        return Err(Error::EmptyLexicon(source.to_string()));
    }
    Lexicon::new(source.to_string(), LexiconLanguage::En, categories)
}

/// Parses the EmoLex layout: `word<TAB>category<TAB>flag` with flag in {0,1}.
/// Only flag=1 associations become patterns.
pub fn parse_emolex(path: &Path) -> Result<Lexicon> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_emolex_str(&text, &path.display().to_string())
}

pub fn parse_emolex_str(text: &str, source: &str) -> Result<Lexicon> {
    let err = |line: usize, reason: String| Error::LexiconParse {
        path: source.to_string(),
        line,
        reason,
    };
    let mut categories: BTreeMap<String, Vec<Pattern>> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(err(idx + 1, format!("expected 3 columns, got {}", cols.len())));
        }
        let flag = match cols[2].trim() {
            "0" => false,
            "1" => true,
            other => return Err(err(idx + 1, format!("non-binary flag {other:?}"))),
        };
        if !flag {
            continue;
        }
        let pattern =
            Pattern::parse(cols[0], Lang::En, false).map_err(|e| err(idx + 1, e.to_string()))?;
        categories
            .entry(cols[1].trim().to_string())
            .or_default()
            .push(pattern);
    }
    if categories.is_empty() {
        return Err(Error::EmptyLexicon(source.to_string()));
    }
    Lexicon::new(source.to_string(), LexiconLanguage::En, categories)
}

/// The PoliteLex that ships with the crate.
pub fn builtin_politelex() -> Lexicon {
    parse_politelex_str(include_str!("../assets/politelex.json")).expect("shipped PoliteLex")
}

/// Small open demo dictionary in LIWC `.dic` format.
pub fn builtin_demo_dic() -> Lexicon {
    parse_liwc_dic_str(include_str!("../assets/demo.dic"), "demo.dic").expect("shipped demo dic")
}

/// Small open demo sample in EmoLex format.
pub fn builtin_demo_emolex() -> Lexicon {
    parse_emolex_str(include_str!("../assets/demo_emolex.tsv"), "demo_emolex.tsv")
        .expect("shipped demo emolex")
}

/// Substring pattern split on gap markers: consecutive literal parts with a
/// bounded codepoint gap between them.
#[derive(Debug, Clone)]
struct SubstringPattern {
    parts: Vec<Vec<char>>,
    category: usize,
}

/// Immutable matching structure. Safe to share across threads.
pub struct CompiledMatcher {
    name: String,
    /// Lexicographic category order; all per-category vectors index into this.
    categories: Vec<String>,
    anchored: Vec<bool>,
    /// exact lowercased token -> category ids
    token_index: HashMap<String, Vec<usize>>,
    /// stem prefixes grouped by first char
    stems: HashMap<char, Vec<(String, usize)>>,
    /// first token -> full phrase token sequences, longest first
    phrases: HashMap<String, Vec<(Vec<String>, usize)>>,
    /// token sequences tested at sentence starts
    anchored_phrases: Vec<(Vec<String>, usize)>,
    /// Mandarin substring patterns
    zh_patterns: Vec<SubstringPattern>,
    zh_anchored: Vec<SubstringPattern>,
}

/// Per-category match evidence for one post.
pub struct MatchResult {
    /// Matched token positions per category (counting categories).
    pub token_positions: Vec<BTreeSet<usize>>,
    /// Matched non-punctuation codepoint positions per category (zh substrings).
    pub char_positions: Vec<BTreeSet<usize>>,
    /// Sentence indexes whose start matches (anchored categories).
    pub anchored_sentences: Vec<BTreeSet<usize>>,
    /// Number of non-punctuation codepoints in the substring haystack.
    pub non_punct_chars: usize,
}

fn en_pattern_tokens(surface: &str) -> Vec<String> {
    tokenize_en(surface).tokens
}

fn is_punct_char(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace() && c != '\u{FFFC}'
}

impl CompiledMatcher {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Category names in deterministic (lexicographic) output order.
    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    /// True when the category is matched at sentence starts only.
    pub fn is_anchored(&self, category_idx: usize) -> bool {
        self.anchored[category_idx]
    }

    /// Compiles a lexicon. English literal entries are run through the
    /// tokenizer so that e.g. `mr.` compiles to the phrase `[mr, .]` and
    /// matches real token streams.
    pub fn compile(lexicon: &Lexicon) -> CompiledMatcher {
        let categories: Vec<String> = lexicon.categories.keys().cloned().collect();
        let cat_idx: HashMap<&str, usize> = categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        let anchored: Vec<bool> = categories
            .iter()
            .map(|c| lexicon.is_anchored_category(c))
            .collect();

        let mut token_index: HashMap<String, Vec<usize>> = HashMap::new();
        let mut stems: HashMap<char, Vec<(String, usize)>> = HashMap::new();
        let mut phrases: HashMap<String, Vec<(Vec<String>, usize)>> = HashMap::new();
        let mut anchored_phrases: Vec<(Vec<String>, usize)> = Vec::new();
        let mut zh_patterns = Vec::new();
        let mut zh_anchored = Vec::new();

        for (cat, patterns) in &lexicon.categories {
            let ci = cat_idx[cat.as_str()];
            for pattern in patterns {
                if pattern.substring {
                    let parts: Vec<Vec<char>> = pattern
                        .surface
                        .split('…')
                        .filter(|p| !p.is_empty())
                        .map(|p| p.chars().collect())
                        .collect();
                    let compiled = SubstringPattern {
                        parts,
                        category: ci,
                    };
                    if pattern.kind == PatternKind::Anchored {
                        zh_anchored.push(compiled);
                    } else {
                        zh_patterns.push(compiled);
                    }
                    continue;
                }
                match pattern.kind {
                    PatternKind::StemWildcard => {
                        let prefix = pattern.surface.trim_end_matches('*').to_string();
                        let first = prefix.chars().next().unwrap();
                        stems.entry(first).or_default().push((prefix, ci));
                    }
                    PatternKind::Anchored => {
                        anchored_phrases.push((en_pattern_tokens(&pattern.surface), ci));
                    }
                    PatternKind::LiteralToken | PatternKind::TokenPhrase => {
                        let tokens = en_pattern_tokens(&pattern.surface);
                        match tokens.len() {
                            0 => {}
                            1 => token_index
                                .entry(tokens[0].clone())
                                .or_default()
                                .push(ci),
                            _ => phrases
                                .entry(tokens[0].clone())
                                .or_default()
                                .push((tokens, ci)),
                        }
                    }
                }
            }
        }
        for bucket in phrases.values_mut() {
            bucket.sort_by_key(|(seq, _)| std::cmp::Reverse(seq.len()));
        }
        for bucket in token_index.values_mut() {
            bucket.sort_unstable();
            bucket.dedup();
        }

        CompiledMatcher {
            name: lexicon.name.clone(),
            categories,
            anchored,
            token_index,
            stems,
            phrases,
            anchored_phrases,
            zh_patterns,
            zh_anchored,
        }
    }

    /// Matches one tokenized post, collecting per-category evidence.
    pub fn match_post(&self, post: &TokenizedPost) -> MatchResult {
        let k = self.categories.len();
        let mut result = MatchResult {
            token_positions: vec![BTreeSet::new(); k],
            char_positions: vec![BTreeSet::new(); k],
            anchored_sentences: vec![BTreeSet::new(); k],
            non_punct_chars: 0,
        };
        let tokens = &post.tokens;

        // exact tokens and stems
        for (pos, token) in tokens.iter().enumerate() {
            if let Some(cats) = self.token_index.get(token) {
                for &ci in cats {
                    result.token_positions[ci].insert(pos);
                }
            }
            if let Some(first) = token.chars().next() {
                if let Some(bucket) = self.stems.get(&first) {
                    for (prefix, ci) in bucket {
                        if token.starts_with(prefix.as_str()) {
                            result.token_positions[*ci].insert(pos);
                        }
                    }
                }
            }
        }

        // phrases: all occurrences; the per-category position set makes
        // overlapping matches within a category count each token once
        for start in 0..tokens.len() {
            if let Some(bucket) = self.phrases.get(&tokens[start]) {
                for (seq, ci) in bucket {
                    if start + seq.len() <= tokens.len()
                        && tokens[start..start + seq.len()].iter().eq(seq.iter())
                    {
                        for pos in start..start + seq.len() {
                            result.token_positions[*ci].insert(pos);
                        }
                    }
                }
            }
        }

        // anchored token sequences at sentence starts
        for (si, &(s, e)) in post.sentences.iter().enumerate() {
            for (seq, ci) in &self.anchored_phrases {
                if s + seq.len() <= e && tokens[s..s + seq.len()].iter().eq(seq.iter()) {
                    result.anchored_sentences[*ci].insert(si);
                }
            }
        }

        // Mandarin substring matching over the joined haystack
        if !self.zh_patterns.is_empty() || !self.zh_anchored.is_empty() {
            self.match_substrings(post, &mut result);
        }
        result
    }

    fn match_substrings(&self, post: &TokenizedPost, result: &mut MatchResult) {
        // Haystack: tokens joined; a meta-token collapses to one placeholder
        // codepoint so patterns cannot match across it.
        let mut chars: Vec<char> = Vec::new();
        let mut token_of: Vec<usize> = Vec::new();
        let mut sentence_starts: Vec<usize> = Vec::new();
        let mut token_char_start: Vec<usize> = Vec::new();
        for (ti, token) in post.tokens.iter().enumerate() {
            token_char_start.push(chars.len());
            if crate::tokenizer::META_TOKENS.contains(&token.as_str()) {
                chars.push('\u{FFFC}');
                token_of.push(ti);
            } else {
                for c in token.chars() {
                    chars.push(c);
                    token_of.push(ti);
                }
            }
        }
        for &(s, _) in &post.sentences {
            sentence_starts.push(token_char_start[s]);
        }
        result.non_punct_chars = chars.iter().filter(|&&c| !is_punct_char(c)).count();

        for pattern in &self.zh_patterns {
            for start in 0..chars.len() {
                if let Some(matched) = match_parts_at(&pattern.parts, &chars, start) {
                    for pos in matched {
                        if !is_punct_char(chars[pos]) {
                            result.char_positions[pattern.category].insert(pos);
                        }
                    }
                }
            }
        }
        for pattern in &self.zh_anchored {
            for (si, &start) in sentence_starts.iter().enumerate() {
                if match_parts_at(&pattern.parts, &chars, start).is_some() {
                    result.anchored_sentences[pattern.category].insert(si);
                }
            }
        }
    }

    /// Names of categories with any match evidence. Deterministic order.
    pub fn matched_categories(&self, post: &TokenizedPost) -> Vec<String> {
        let result = self.match_post(post);
        self.categories
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                !result.token_positions[*i].is_empty()
                    || !result.char_positions[*i].is_empty()
                    || !result.anchored_sentences[*i].is_empty()
            })
            .map(|(_, c)| c.clone())
            .collect()
    }
}

/// Tries to match the literal parts at `start`, with a bounded gap between
/// consecutive parts. Returns the matched literal codepoint positions.
fn match_parts_at(parts: &[Vec<char>], chars: &[char], start: usize) -> Option<Vec<usize>> {
    fn go(
        parts: &[Vec<char>],
        chars: &[char],
        at: usize,
        acc: &mut Vec<usize>,
    ) -> bool {
        let Some(part) = parts.first() else {
            return true;
        };
        if at + part.len() > chars.len() || chars[at..at + part.len()] != part[..] {
            return false;
        }
        let end = at + part.len();
        let checkpoint = acc.len();
        acc.extend(at..end);
        if parts.len() == 1 {
            return true;
        }
        for gap in GAP_MIN..=GAP_MAX {
            if go(&parts[1..], chars, end + gap, acc) {
                return true;
            }
            acc.truncate(checkpoint + part.len());
        }
        acc.truncate(checkpoint);
        false
    }

    let mut acc = Vec::new();
    if parts.is_empty() {
        return None;
    }
    if go(parts, chars, start, &mut acc) {
        Some(acc)
    } else {
        None
    }
}
