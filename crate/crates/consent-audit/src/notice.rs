//! Pattern engine for copyright notices and license declarations in the
//! caption and OCR text channels.
//!
//! Matching operates on Unicode scalar values after NFC normalization, so
//! match spans refer to the normalized form of the input (identical to the
//! input whenever the input is already NFC, which is the common case).

use std::borrow::Cow;
use std::sync::OnceLock;

use regex::Regex;
use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

use crate::model::{Channel, ConsentFlags, ConsentMatch, MatchCategory, Sample};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("pattern {source_text:?} does not compile: {message}")]
    BadPattern { source_text: String, message: String },
    #[error("category {0:?} has no patterns")]
    EmptyCategory(String),
    #[error("copyright_symbol needs at least three encoding variants, got {0}")]
    TooFewSymbolVariants(usize),
    #[error("unknown category header {0:?}")]
    UnknownCategory(String),
    #[error("pattern line {0} appears before any category header")]
    PatternOutsideCategory(usize),
    #[error("pattern file defines no categories")]
    NoCategories,
}

#[derive(Debug, Clone)]
struct PatternEntry {
    category: MatchCategory,
    source: String,
    regex: Regex,
}

/// An ordered, compiled set of notice patterns. Compile once, share across
/// any number of scanning workers.
#[derive(Debug, Clone)]
pub struct PatternSet {
    entries: Vec<PatternEntry>,
    case_insensitive: bool,
}

/// One match from [`scan_text`]: byte span into the scanned (NFC) text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextMatch {
    pub category: MatchCategory,
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl PatternSet {
    /// Compiles a pattern set, enforcing that every pattern compiles, every
    /// category is non-empty, and a copyright-symbol category carries at
    /// least three encoding variants.
    pub fn compile(
        categories: &[(MatchCategory, Vec<String>)],
        case_insensitive: bool,
    ) -> Result<Self, PatternError> {
        if categories.is_empty() {
            return Err(PatternError::NoCategories);
        }
        let mut entries = Vec::new();
        for (category, patterns) in categories {
            if patterns.is_empty() {
                return Err(PatternError::EmptyCategory(category.to_string()));
            }
            if *category == MatchCategory::CopyrightSymbol && patterns.len() < 3 {
                return Err(PatternError::TooFewSymbolVariants(patterns.len()));
            }
            for source in patterns {
                let full = if case_insensitive {
                    format!("(?i){source}")
                } else {
                    source.clone()
                };
                let regex = Regex::new(&full).map_err(|e| PatternError::BadPattern {
                    source_text: source.clone(),
                    message: e.to_string(),
                })?;
                entries.push(PatternEntry {
                    category: *category,
                    source: source.clone(),
                    regex,
                });
            }
        }
        Ok(PatternSet {
            entries,
            case_insensitive,
        })
    }

    pub fn case_insensitive(&self) -> bool {
        self.case_insensitive
    }

    /// Pattern sources in order, with their categories.
    pub fn sources(&self) -> impl Iterator<Item = (MatchCategory, &str)> {
        self.entries.iter().map(|e| (e.category, e.source.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The built-in pattern sources, grouped by category.
///
/// Copyright General: the word "copyright" followed within 40 characters by
/// a year or a capitalized name token; "copr." as its own token; the phrase
/// "all rights reserved". Copyright Symbol: three encoding variants — the
/// literal symbol, the HTML entity, and "(c)" when adjacent to a four-digit
/// year. Creative Commons: the phrase, the CC BY license family across all
/// six types and past versions, and CC0.
pub fn builtin_pattern_sources() -> Vec<(MatchCategory, Vec<String>)> {
    vec![
        (
            MatchCategory::CopyrightGeneral,
            vec![
                r"\b(?i:copyright)\b[^\r\n]{0,40}?(?:\b\d{4}\b|\p{Lu}\p{L}+)".to_string(),
                r"(?i)\bcopr\.".to_string(),
                r"(?i)\ball rights reserved\b".to_string(),
            ],
        ),
        (
            MatchCategory::CopyrightSymbol,
            vec![
                "©".to_string(),
                r"(?i)&copy;".to_string(),
                r"(?i)\(c\)[ \t]{0,3}\d{4}\b|\b\d{4}[ \t]{0,3}\(c\)".to_string(),
            ],
        ),
        (
            MatchCategory::CreativeCommons,
            vec![
                r"(?i)\bcreative commons\b".to_string(),
                r"(?i)\bCC[- ]BY(?:-(?:NC-SA|NC-ND|NC|SA|ND))?(?:[- ][1-4]\.0)?\b".to_string(),
                r"(?i)\bCC0\b".to_string(),
            ],
        ),
    ]
}

/// The built-in set. Compiled once; repeated calls return the same object.
pub fn default_pattern_set() -> &'static PatternSet {
    static SET: OnceLock<PatternSet> = OnceLock::new();
    SET.get_or_init(|| {
        PatternSet::compile(&builtin_pattern_sources(), false)
            .expect("builtin patterns must compile")
    })
}

/// Parses a user pattern file: `[CategoryName]` headers with one pattern
/// per line. `#` lines are comments; a leading `!case-insensitive`
/// directive applies the flag to every pattern.
pub fn parse_pattern_file(text: &str) -> Result<PatternSet, PatternError> {
    let mut case_insensitive = false;
    let mut categories: Vec<(MatchCategory, Vec<String>)> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.eq_ignore_ascii_case("!case-insensitive") {
            case_insensitive = true;
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let category = parse_category(name)
                .ok_or_else(|| PatternError::UnknownCategory(name.to_string()))?;
            categories.push((category, Vec::new()));
            continue;
        }
        match categories.last_mut() {
            Some((_, patterns)) => patterns.push(raw_line.trim_end().to_string()),
            None => return Err(PatternError::PatternOutsideCategory(idx + 1)),
        }
    }
    PatternSet::compile(&categories, case_insensitive)
}

fn parse_category(name: &str) -> Option<MatchCategory> {
    let folded: String = name
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase();
    match folded.as_str() {
        "copyrightgeneral" => Some(MatchCategory::CopyrightGeneral),
        "copyrightsymbol" => Some(MatchCategory::CopyrightSymbol),
        "creativecommons" => Some(MatchCategory::CreativeCommons),
        _ => None,
    }
}

fn nfc(text: &str) -> Cow<'_, str> {
    match is_nfc_quick(text.chars()) {
        IsNormalized::Yes => Cow::Borrowed(text),
        _ => Cow::Owned(text.nfc().collect()),
    }
}

/// All non-overlapping leftmost matches per pattern, ordered by start
/// offset. Empty text yields an empty list.
pub fn scan_text(text: &str, set: &PatternSet) -> Vec<TextMatch> {
    let scanned = nfc(text);
    let mut out: Vec<(usize, usize, TextMatch)> = Vec::new();
    for (idx, entry) in set.entries.iter().enumerate() {
        for m in entry.regex.find_iter(&scanned) {
            out.push((
                m.start(),
                idx,
                TextMatch {
                    category: entry.category,
                    start: m.start(),
                    end: m.end(),
                    text: m.as_str().to_string(),
                },
            ));
        }
    }
    out.sort_by_key(|(start, idx, m)| (*start, *idx, m.end));
    out.into_iter().map(|(_, _, m)| m).collect()
}

/// Scans the caption and OCR channels of one sample. The EXIF channel is
/// handled by the metadata extractors; the returned flags carry
/// `exif_hit = false`.
pub fn scan_sample(sample: &Sample, set: &PatternSet) -> ConsentFlags {
    let mut matches = Vec::new();
    for m in scan_text(&sample.caption, set) {
        matches.push(ConsentMatch {
            channel: Channel::Caption,
            category: m.category,
            text: m.text,
        });
    }
    if let Some(ocr) = &sample.ocr_text {
        for m in scan_text(ocr, set) {
            matches.push(ConsentMatch {
                channel: Channel::Ocr,
                category: m.category,
                text: m.text,
            });
        }
    }
    ConsentFlags::from_matches(matches)
}
