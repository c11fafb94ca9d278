//! IPA tokenization against a phone feature table.
//!
//! Symbols are matched greedily, longest first, over extended grapheme
//! clusters so a combining diacritic never separates from its base. Under the
//! Min profile a run of Chao tone numerals (1-5) becomes one tone token.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

use crate::corpus::LanguageProfile;

/// Embedded default table, versioned by its first comment line.
pub const BUILTIN_TABLE_TSV: &str = include_str!("../resources/phone_features.tsv");

pub const GLOTTAL_STOP: &str = "ʔ";

#[derive(Debug, Error, PartialEq)]
pub enum PhonError {
    #[error("feature table line {line}: {message}")]
    TableRow { line: usize, message: String },
    #[error("empty transcription")]
    EmptyTranscription,
    #[error("cannot tokenize `{transcription}`: no symbol matches `{grapheme}` at byte {offset}")]
    Unmatched {
        transcription: String,
        grapheme: String,
        offset: usize,
    },
    #[error("`{transcription}`: `{digit}` at byte {offset} is not a Chao tone numeral (1-5)")]
    BadToneDigit {
        transcription: String,
        digit: char,
        offset: usize,
    },
    #[error("tone token `{0}` has no sonority")]
    ToneSonority(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Segment,
    Tone,
}

impl FromStr for TokenKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "segment" => Ok(Self::Segment),
            "tone" => Ok(Self::Tone),
            other => Err(format!("unknown kind `{other}`")),
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Segment => "segment",
            Self::Tone => "tone",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhoneFeatures {
    /// 1-9 for segments; stored as 0 and never consulted for tones.
    pub sonority: u8,
    pub consonantal: bool,
    pub kind: TokenKind,
}

impl PhoneFeatures {
    pub const TONE: Self = Self {
        sonority: 0,
        consonantal: false,
        kind: TokenKind::Tone,
    };

    pub fn segment(sonority: u8, consonantal: bool) -> Self {
        Self {
            sonority,
            consonantal,
            kind: TokenKind::Segment,
        }
    }
}

/// A violated table invariant, reported by [`PhoneTable::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableIssue {
    pub symbol: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhoneTable {
    entries: BTreeMap<String, PhoneFeatures>,
    /// Longest key, counted in grapheme clusters.
    max_symbol_len: usize,
}

fn grapheme_len(s: &str) -> usize {
    s.graphemes(true).count()
}

impl PhoneTable {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, PhoneFeatures)>) -> Self {
        let entries: BTreeMap<_, _> = entries.into_iter().collect();
        let max_symbol_len = entries.keys().map(|k| grapheme_len(k)).max().unwrap_or(0);
        Self {
            entries,
            max_symbol_len,
        }
    }

    /// The embedded default table.
    pub fn builtin() -> &'static PhoneTable {
        static TABLE: OnceLock<PhoneTable> = OnceLock::new();
        TABLE.get_or_init(|| parse_table(BUILTIN_TABLE_TSV).expect("built-in table parses"))
    }

    pub fn get(&self, symbol: &str) -> Option<&PhoneFeatures> {
        self.entries.get(symbol)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_symbol_len(&self) -> usize {
        self.max_symbol_len
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&str, &PhoneFeatures)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Checks the sonority conventions the syllabifier relies on: vowels
    /// (non-consonantal segments other than the glottal stop) at 8 or above,
    /// consonants at 7 or below.
    pub fn validate(&self) -> Vec<TableIssue> {
        let mut issues = Vec::new();
        for (sym, f) in &self.entries {
            if f.kind != TokenKind::Segment {
                continue;
            }
            let issue = |m: String| TableIssue {
                symbol: sym.clone(),
                message: m,
            };
            if !(1..=9).contains(&f.sonority) {
                issues.push(issue(format!("segment sonority {} outside 1-9", f.sonority)));
            } else if !f.consonantal && sym != GLOTTAL_STOP && f.sonority < 8 {
                issues.push(issue(format!("vowel sonority {} below 8", f.sonority)));
            } else if f.consonantal && f.sonority > 7 {
                issues.push(issue(format!("consonant sonority {} above 7", f.sonority)));
            }
        }
        issues
    }

    /// Renders the table in the format read by [`load_feature_table`].
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("symbol\tsonority\tconsonantal\tkind\n");
        for (sym, f) in &self.entries {
            out.push_str(&format!(
                "{sym}\t{}\t{}\t{}\n",
                f.sonority, f.consonantal, f.kind
            ));
        }
        out
    }
}

fn parse_table(text: &str) -> Result<PhoneTable, PhonError> {
    let mut entries: Vec<(String, PhoneFeatures)> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim_end_matches('\r');
        if row.trim().is_empty() || row.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = row.split('\t').map(str::trim).collect();
        if cols.first() == Some(&"symbol") {
            continue;
        }
        let bad = |message: String| PhonError::TableRow { line, message };
        if cols.len() != 4 {
            return Err(bad(format!("expected 4 columns, found {}", cols.len())));
        }
        let symbol = cols[0];
        if symbol.is_empty() {
            return Err(bad("empty symbol".into()));
        }
        let sonority: u8 = cols[1]
            .parse()
            .ok()
            .filter(|s| *s <= 9)
            .ok_or_else(|| bad(format!("sonority `{}` outside 0-9", cols[1])))?;
        let consonantal: bool = cols[2]
            .parse()
            .map_err(|_| bad(format!("consonantal `{}` is not true/false", cols[2])))?;
        let kind: TokenKind = cols[3].parse().map_err(bad)?;
        let features = PhoneFeatures {
            sonority: if kind == TokenKind::Tone { 0 } else { sonority },
            consonantal,
            kind,
        };
        if let Some(&k) = index.get(symbol) {
            log::warn!("feature table line {line}: duplicate symbol `{symbol}`, last one wins");
            entries[k].1 = features;
        } else {
            index.insert(symbol.to_string(), entries.len());
            entries.push((symbol.to_string(), features));
        }
    }
    Ok(PhoneTable::from_entries(entries))
}

/// Loads a feature table TSV (`symbol, sonority, consonantal, kind`). A
/// stream without rows yields the built-in table.
pub fn load_feature_table(text: &str) -> Result<PhoneTable, PhonError> {
    let table = parse_table(text)?;
    if table.is_empty() {
        return Ok(PhoneTable::builtin().clone());
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub symbol: String,
    pub features: PhoneFeatures,
}

impl Token {
    pub fn is_tone(&self) -> bool {
        self.features.kind == TokenKind::Tone
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol)
    }
}

fn is_ascii_digit_grapheme(g: &str) -> Option<char> {
    let mut chars = g.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_digit() => Some(c),
        _ => None,
    }
}

pub fn tokenize(
    transcription: &str,
    table: &PhoneTable,
    profile: LanguageProfile,
) -> Result<Vec<Token>, PhonError> {
    let text = transcription.trim();
    if text.is_empty() {
        return Err(PhonError::EmptyTranscription);
    }
    let lead = transcription.len() - transcription.trim_start().len();
    let graphemes: Vec<(usize, &str)> = text.grapheme_indices(true).collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < graphemes.len() {
        if profile == LanguageProfile::Min && is_ascii_digit_grapheme(graphemes[i].1).is_some() {
            let start = i;
            while i < graphemes.len() {
                let Some(d) = is_ascii_digit_grapheme(graphemes[i].1) else {
                    break;
                };
                if !('1'..='5').contains(&d) {
                    return Err(PhonError::BadToneDigit {
                        transcription: transcription.to_string(),
                        digit: d,
                        offset: lead + graphemes[i].0,
                    });
                }
                i += 1;
            }
            let end = graphemes.get(i).map_or(text.len(), |g| g.0);
            tokens.push(Token {
                symbol: text[graphemes[start].0..end].to_string(),
                features: PhoneFeatures::TONE,
            });
            continue;
        }

        let longest = table.max_symbol_len.min(graphemes.len() - i);
        let matched = (1..=longest).rev().find_map(|len| {
            let end = graphemes.get(i + len).map_or(text.len(), |g| g.0);
            let candidate = &text[graphemes[i].0..end];
            table.get(candidate).map(|f| (len, candidate, *f))
        });
        match matched {
            Some((len, symbol, features)) => {
                tokens.push(Token {
                    symbol: symbol.to_string(),
                    features,
                });
                i += len;
            }
            None => {
                return Err(PhonError::Unmatched {
                    transcription: transcription.to_string(),
                    grapheme: graphemes[i].1.to_string(),
                    offset: lead + graphemes[i].0,
                })
            }
        }
    }
    Ok(tokens)
}

pub fn sonority(tok: &Token) -> Result<u8, PhonError> {
    match tok.features.kind {
        TokenKind::Segment => Ok(tok.features.sonority),
        TokenKind::Tone => Err(PhonError::ToneSonority(tok.symbol.clone())),
    }
}
