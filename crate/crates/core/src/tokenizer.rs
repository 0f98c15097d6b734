//! Microblog tokenization.
//!
//! English text is normalized with meta-tokens (`<url>`, `<user>`, ...) and
//! split on whitespace/punctuation boundaries with punctuation retained.
//! Mandarin text gets the same meta-token normalization, then dictionary-based
//! forward maximum matching over the shipped word-frequency list; OOV runs
//! fall back to single codepoints and Latin/digit runs are kept whole.
//! Everything here is a pure function over immutable inputs.

use std::collections::HashSet;

use once_cell::sync::Lazy;
use regex::Regex;

use crate::corpus::{Lang, Post};

/// Meta-token surface forms, exactly as they appear in the token stream.
pub const META_TOKENS: [&str; 9] = [
    "<url>",
    "<email>",
    "<user>",
    "<percent>",
    "<money>",
    "<phone>",
    "<time>",
    "<date>",
    "<emoticon>",
];

/// A tokenized post: token stream plus sentence spans over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedPost {
    pub post_id: String,
    pub tokens: Vec<String>,
    /// Half-open `(start, end)` spans over `tokens`; non-overlapping, ordered,
    /// and covering all tokens.
    pub sentences: Vec<(usize, usize)>,
}

impl TokenizedPost {
    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }
}

static ASCII_EMOTICONS: &[&str] = &[
    ":-)", ":-(", ":-D", ":-P", ":-p", ":-/", ":-|", ":')", ":'(", ";-)", "^_^", "T_T", "-_-",
    "=)", "=(", "=D", "<3", "</3", ":)", ":(", ":D", ":P", ":p", ":/", ":|", ":o", ":O", ";)",
    ";(", "xD", "XD", ":3",
];

static META_RE: Lazy<Regex> = Lazy::new(|| {
    let mut emoticons: Vec<String> = ASCII_EMOTICONS.iter().map(|e| regex::escape(e)).collect();
    // Longest first so alternation prefers ":-)" over ":-".
    emoticons.sort_by_key(|e| std::cmp::Reverse(e.len()));
    let emoticon_alt = emoticons.join("|");
    let emoji = r"[\x{1F000}-\x{1FAFF}\x{2600}-\x{27BF}\x{2B00}-\x{2BFF}\x{FE0F}]+";
    let pattern = format!(
        "(?P<url>(?:https?://|www\\.)\\S+)\
        |(?P<email>[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\\.[A-Za-z0-9-]+)*\\.[A-Za-z]{{2,}})\
        |(?P<user>@[\\w\\p{{Han}}]+)\
        |(?P<time>\\b\\d{{1,2}}:\\d{{2}}(?::\\d{{2}})?(?:\\s?(?i:[ap]\\.?m\\.?))?\\b)\
        |(?P<date>\\b\\d{{4}}[-/]\\d{{1,2}}[-/]\\d{{1,2}}\\b|\\b\\d{{1,2}}[-/]\\d{{1,2}}[-/]\\d{{2,4}}\\b)\
        |(?P<percent>[-+]?\\d+(?:\\.\\d+)?%)\
        |(?P<money>[$€£¥￥]\\d+(?:[.,]\\d+)*|\\b\\d+(?:\\.\\d+)?\\s?(?i:dollars|bucks|usd|euros?)\\b)\
        |(?P<phone>(?:\\+\\d{{1,2}}[\\s-]?)?(?:\\(\\d{{3}}\\)[\\s-]?|\\b\\d{{3}}-)\\d{{3}}-\\d{{4}}\\b)\
        |(?P<emoticon>{emoticon_alt}|{emoji})"
    );
    Regex::new(&pattern).expect("meta-token regex compiles")
});

enum Segment<'a> {
    Meta(&'static str),
    Text(&'a str),
}

/// Splits raw text into plain-text segments and recognized meta-token spans.
fn normalize(text: &str) -> Vec<Segment<'_>> {
    let mut segments = Vec::new();
    let mut last = 0;
    for caps in META_RE.captures_iter(text) {
        let m = caps.get(0).unwrap();
        if m.start() > last {
            segments.push(Segment::Text(&text[last..m.start()]));
        }
        let meta = if caps.name("url").is_some() {
            "<url>"
        } else if caps.name("email").is_some() {
            "<email>"
        } else if caps.name("user").is_some() {
            "<user>"
        } else if caps.name("time").is_some() {
            "<time>"
        } else if caps.name("date").is_some() {
            "<date>"
        } else if caps.name("percent").is_some() {
            "<percent>"
        } else if caps.name("money").is_some() {
            "<money>"
        } else if caps.name("phone").is_some() {
            "<phone>"
        } else {
            "<emoticon>"
        };
        segments.push(Segment::Meta(meta));
        last = m.end();
    }
    if last < text.len() {
        segments.push(Segment::Text(&text[last..]));
    }
    segments
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '’'
}

/// Word/punctuation split for Latin-script text. Word tokens are lowercased;
/// punctuation becomes one token per character; `#` is its own token so
/// hashtag contents stay searchable.
fn split_words(text: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = text.chars().collect();
    let mut buf = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if is_word_char(c) {
            buf.extend(c.to_lowercase());
        } else if is_apostrophe(c)
            && !buf.is_empty()
            && i + 1 < chars.len()
            && is_word_char(chars[i + 1])
        {
            buf.push('\'');
        } else {
            if !buf.is_empty() {
                out.push(std::mem::take(&mut buf));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        }
        i += 1;
    }
    if !buf.is_empty() {
        out.push(buf);
    }
}

/// Tokenizes English microblog text.
pub fn tokenize_en(text: &str) -> TokenizedPost {
    let mut tokens = Vec::new();
    for segment in normalize(text) {
        match segment {
            Segment::Meta(m) => tokens.push(m.to_string()),
            Segment::Text(t) => split_words(t, &mut tokens),
        }
    }
    let sentences = split_sentences(&tokens, Lang::En);
    TokenizedPost {
        post_id: String::new(),
        tokens,
        sentences,
    }
}

/// Shipped word-frequency dictionary for forward maximum matching.
pub struct ZhDict {
    words: HashSet<String>,
    max_len: usize,
}

impl ZhDict {
    /// Parses `word<SPACE>frequency` lines. Blank lines and `#` comments are
    /// skipped; the frequency column must parse but is otherwise unused by FMM.
    pub fn parse(text: &str) -> crate::Result<Self> {
        let mut words = HashSet::new();
        let mut max_len = 1;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap();
            let freq = parts.next().ok_or_else(|| crate::Error::MalformedRecord {
                line: idx + 1,
                reason: "expected `word frequency`".into(),
            })?;
            freq.parse::<u64>()
                .map_err(|_| crate::Error::MalformedRecord {
                    line: idx + 1,
                    reason: format!("bad frequency {freq:?}"),
                })?;
            max_len = max_len.max(word.chars().count());
            words.insert(word.to_string());
        }
        Ok(ZhDict { words, max_len })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Forward maximum matching over a run of Han characters.
    fn fmm(&self, run: &[char], out: &mut Vec<String>) {
        let mut i = 0;
        while i < run.len() {
            let longest = self.max_len.min(run.len() - i);
            let mut matched = 1;
            for len in (2..=longest).rev() {
                let candidate: String = run[i..i + len].iter().collect();
                if self.words.contains(&candidate) {
                    matched = len;
                    break;
                }
            }
            out.push(run[i..i + matched].iter().collect());
            i += matched;
        }
    }
}

static DEFAULT_ZH_DICT: Lazy<ZhDict> =
    Lazy::new(|| ZhDict::parse(include_str!("../assets/zh_dict.txt")).expect("shipped zh dict"));

/// The dictionary shipped with the crate.
pub fn default_zh_dict() -> &'static ZhDict {
    &DEFAULT_ZH_DICT
}

fn is_han(c: char) -> bool {
    matches!(c as u32,
        0x4E00..=0x9FFF | 0x3400..=0x4DBF | 0x20000..=0x2A6DF | 0xF900..=0xFAFF)
}

/// Segments Mandarin text with the shipped dictionary.
pub fn segment_zh(text: &str) -> TokenizedPost {
    segment_zh_with(text, default_zh_dict())
}

/// Segments Mandarin text against a caller-supplied dictionary.
pub fn segment_zh_with(text: &str, dict: &ZhDict) -> TokenizedPost {
    let mut tokens = Vec::new();
    for segment in normalize(text) {
        match segment {
            Segment::Meta(m) => tokens.push(m.to_string()),
            Segment::Text(t) => {
                let chars: Vec<char> = t.chars().collect();
                let mut i = 0;
                while i < chars.len() {
                    let c = chars[i];
                    if c.is_whitespace() {
                        i += 1;
                    } else if is_han(c) {
                        let start = i;
                        while i < chars.len() && is_han(chars[i]) {
                            i += 1;
                        }
                        dict.fmm(&chars[start..i], &mut tokens);
                    } else if is_word_char(c) || is_apostrophe(c) {
                        // Latin/digit run kept whole, lowercased.
                        let mut buf = String::new();
                        while i < chars.len()
                            && !is_han(chars[i])
                            && (is_word_char(chars[i]) || is_apostrophe(chars[i]))
                        {
                            buf.extend(chars[i].to_lowercase());
                            i += 1;
                        }
                        tokens.push(buf);
                    } else {
                        tokens.push(c.to_string());
                        i += 1;
                    }
                }
            }
        }
    }
    let sentences = split_sentences(&tokens, Lang::Zh);
    TokenizedPost {
        post_id: String::new(),
        tokens,
        sentences,
    }
}

/// Tokenizes a post according to its language tag.
pub fn tokenize_post(post: &Post) -> TokenizedPost {
    let mut tokenized = match post.lang {
        Lang::En => tokenize_en(&post.text),
        Lang::Zh => segment_zh(&post.text),
    };
    tokenized.post_id = post.id.clone();
    tokenized
}

fn is_terminal(token: &str, lang: Lang) -> bool {
    match lang {
        Lang::En => matches!(token, "." | "!" | "?" | "…"),
        Lang::Zh => matches!(token, "。" | "！" | "？" | "；" | "…"),
    }
}

/// Splits a token stream into sentence spans. A run of terminal punctuation
/// stays with the sentence it closes; a post with no terminal punctuation is
/// one sentence.
pub fn split_sentences(tokens: &[String], lang: Lang) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    for i in 0..tokens.len() {
        let closes = is_terminal(&tokens[i], lang)
            && (i + 1 == tokens.len() || !is_terminal(&tokens[i + 1], lang));
        if closes {
            spans.push((start, i + 1));
            start = i + 1;
        }
    }
    if start < tokens.len() {
        spans.push((start, tokens.len()));
    }
    spans
}
