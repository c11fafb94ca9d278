//! Syllabification into onset, nucleus and coda.
//!
//! Two procedures are provided:
//!
//! * [`syllabify_ssp`] (generic and Dutch profiles) follows the sonority
//!   sequencing principle. Maximal runs of vowels (sonority 8 or higher) are
//!   nuclei, so diphthongs and triphthongs form a single nucleus. Consonant
//!   clusters between nuclei give the longest onset that rises (or stays level)
//!   in sonority to the following nucleus; the rest is coda. At the word edges
//!   a consonant that would break the rise into the first nucleus, or the fall
//!   after the last one, is extrasyllabic and becomes a syllable of its own
//!   around its sonority peak. The Dutch profile lowers [s] next to a stop at
//!   a word edge to sonority 0 so that [sp]/[st] and [ps] clusters stay whole.
//! * [`syllabify_min`] uses tone numerals as syllable boundaries and assigns
//!   non-consonantal segments (other than the glottal stop) to the nucleus.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LanguageProfile;
use crate::phoncore::{tokenize, PhonError, PhoneFeatures, PhoneTable, Token, TokenKind, GLOTTAL_STOP};

pub const VOWEL_MIN_SONORITY: u8 = 8;

#[derive(Debug, Error, PartialEq)]
pub enum SyllabifyError {
    #[error("cannot syllabify an empty token sequence")]
    Empty,
    #[error("tone token `{symbol}` at position {index} in a sonority-syllabified word")]
    UnexpectedTone { symbol: String, index: usize },
    #[error("tone token `{symbol}` at position {index} closes a syllable with no segments")]
    EmptySyllable { symbol: String, index: usize },
    #[error("segments from position {index} onward are not closed by a tone")]
    MissingTone { index: usize },
    #[error("vowel at position {index} follows a coda in the same syllable")]
    DiscontinuousNucleus { index: usize },
    #[error("syllables do not partition the {n_tokens} tokens (mismatch at token {at})")]
    PartitionMismatch { n_tokens: usize, at: usize },
    #[error("malformed syllable rendering `{0}`")]
    Rendering(String),
    #[error(transparent)]
    Phon(#[from] PhonError),
}

/// One syllable as token index ranges into the word it was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syllable {
    pub onset: Range<usize>,
    pub nucleus: Range<usize>,
    pub coda: Range<usize>,
    pub tone: Option<usize>,
}

impl Syllable {
    fn new(onset: Range<usize>, nucleus: Range<usize>, coda: Range<usize>) -> Self {
        Self {
            onset,
            nucleus,
            coda,
            tone: None,
        }
    }

    /// One past the last token belonging to this syllable.
    pub fn end(&self) -> usize {
        self.tone.map_or(self.coda.end, |t| t + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstituentLabel {
    #[serde(rename = "O")]
    Onset,
    #[serde(rename = "N")]
    Nucleus,
    #[serde(rename = "C")]
    Coda,
    #[serde(rename = "T")]
    Tone,
}

impl ConstituentLabel {
    pub const ALL: [ConstituentLabel; 4] = [Self::Onset, Self::Nucleus, Self::Coda, Self::Tone];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ConstituentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Onset => "O",
            Self::Nucleus => "N",
            Self::Coda => "C",
            Self::Tone => "T",
        })
    }
}

fn is_stop(tok: &Token) -> bool {
    tok.features.kind == TokenKind::Segment && (1..=2).contains(&tok.features.sonority)
}

fn is_s(tok: &Token) -> bool {
    tok.symbol == "s"
}

/// Sonority of each token, with the Dutch word-edge [s] override applied.
/// Tone tokens read as 0. The table itself is not touched.
pub fn apply_s_override(tokens: &[Token], profile: LanguageProfile) -> Vec<u8> {
    let mut view: Vec<u8> = tokens
        .iter()
        .map(|t| match t.features.kind {
            TokenKind::Segment => t.features.sonority,
            TokenKind::Tone => 0,
        })
        .collect();
    if profile != LanguageProfile::Dutch || tokens.len() < 2 {
        return view;
    }
    let n = tokens.len();
    if is_s(&tokens[0]) && is_stop(&tokens[1]) {
        view[0] = 0;
    }
    if is_s(&tokens[n - 1]) && is_stop(&tokens[n - 2]) {
        view[n - 1] = 0;
    }
    view
}

/// Syllable for a stretch with no vowel: the leftmost sonority maximum is the
/// nucleus.
fn peak_syllable(son: &[u8], span: Range<usize>) -> Syllable {
    let peak = span
        .clone()
        .fold(span.start, |best, i| if son[i] > son[best] { i } else { best });
    Syllable::new(span.start..peak, peak..peak + 1, peak + 1..span.end)
}

/// Start of the longest suffix of `span` that is non-decreasing in sonority.
fn rising_suffix_start(son: &[u8], span: Range<usize>) -> usize {
    let mut start = span.end;
    while start > span.start && (start == span.end || son[start - 1] <= son[start]) {
        start -= 1;
    }
    start
}

/// End of the longest prefix of `span` that is non-increasing in sonority.
fn falling_prefix_end(son: &[u8], span: Range<usize>) -> usize {
    let mut end = span.start;
    while end < span.end && (end == span.start || son[end] <= son[end - 1]) {
        end += 1;
    }
    end
}

pub fn syllabify_ssp(
    tokens: &[Token],
    profile: LanguageProfile,
) -> Result<Vec<Syllable>, SyllabifyError> {
    if tokens.is_empty() {
        return Err(SyllabifyError::Empty);
    }
    if let Some((index, t)) = tokens.iter().enumerate().find(|(_, t)| t.is_tone()) {
        return Err(SyllabifyError::UnexpectedTone {
            symbol: t.symbol.clone(),
            index,
        });
    }
    let son = apply_s_override(tokens, profile);
    let n = tokens.len();

    let mut nuclei: Vec<Range<usize>> = Vec::new();
    let mut i = 0;
    while i < n {
        if son[i] >= VOWEL_MIN_SONORITY {
            let start = i;
            while i < n && son[i] >= VOWEL_MIN_SONORITY {
                i += 1;
            }
            nuclei.push(start..i);
        } else {
            i += 1;
        }
    }
    if nuclei.is_empty() {
        return Ok(vec![peak_syllable(&son, 0..n)]);
    }

    let mut out = Vec::with_capacity(nuclei.len() + 2);

    let first = &nuclei[0];
    let onset_start = rising_suffix_start(&son, 0..first.start);
    if onset_start > 0 {
        out.push(peak_syllable(&son, 0..onset_start));
    }
    let mut onset = onset_start..first.start;

    for (k, nuc) in nuclei.iter().enumerate() {
        let coda_end = match nuclei.get(k + 1) {
            Some(next) => rising_suffix_start(&son, nuc.end..next.start),
            None => falling_prefix_end(&son, nuc.end..n),
        };
        out.push(Syllable::new(onset.clone(), nuc.clone(), nuc.end..coda_end));
        onset = coda_end..nuclei.get(k + 1).map_or(n, |next| next.start);
    }
    if !onset.is_empty() {
        out.push(peak_syllable(&son, onset));
    }
    Ok(out)
}

fn is_min_nucleus(tok: &Token) -> bool {
    !tok.features.consonantal && tok.symbol != GLOTTAL_STOP
}

pub fn syllabify_min(tokens: &[Token]) -> Result<Vec<Syllable>, SyllabifyError> {
    if tokens.is_empty() {
        return Err(SyllabifyError::Empty);
    }
    let mut out = Vec::new();
    let mut start = 0;
    let mut nucleus: Option<Range<usize>> = None;

    for (i, tok) in tokens.iter().enumerate() {
        if tok.is_tone() {
            if i == start {
                return Err(SyllabifyError::EmptySyllable {
                    symbol: tok.symbol.clone(),
                    index: i,
                });
            }
            let mut syl = match nucleus.take() {
                Some(nuc) => Syllable::new(start..nuc.start, nuc.clone(), nuc.end..i),
                None => {
                    let son: Vec<u8> = tokens.iter().map(|t| t.features.sonority).collect();
                    peak_syllable(&son, start..i)
                }
            };
            syl.tone = Some(i);
            out.push(syl);
            start = i + 1;
        } else if is_min_nucleus(tok) {
            match nucleus.as_mut() {
                Some(nuc) if nuc.end == i => nuc.end += 1,
                Some(_) => return Err(SyllabifyError::DiscontinuousNucleus { index: i }),
                None => nucleus = Some(i..i + 1),
            }
        }
    }
    if start < tokens.len() {
        return Err(SyllabifyError::MissingTone { index: start });
    }
    Ok(out)
}

/// Dispatches on the profile.
pub fn syllabify(tokens: &[Token], profile: LanguageProfile) -> Result<Vec<Syllable>, SyllabifyError> {
    match profile {
        LanguageProfile::Min => syllabify_min(tokens),
        _ => syllabify_ssp(tokens, profile),
    }
}

/// Flattens syllables into one label per token.
pub fn constituent_labels(
    tokens: &[Token],
    syllables: &[Syllable],
) -> Result<Vec<ConstituentLabel>, SyllabifyError> {
    let n = tokens.len();
    let mut labels = Vec::with_capacity(n);
    let mismatch = |at: usize| SyllabifyError::PartitionMismatch { n_tokens: n, at };
    for syl in syllables {
        let cursor = labels.len();
        if syl.onset.start != cursor
            || syl.onset.end != syl.nucleus.start
            || syl.nucleus.is_empty()
            || syl.nucleus.end != syl.coda.start
            || syl.coda.end < syl.coda.start
            || syl.end() > n
        {
            return Err(mismatch(cursor));
        }
        labels.extend(syl.onset.clone().map(|_| ConstituentLabel::Onset));
        labels.extend(syl.nucleus.clone().map(|_| ConstituentLabel::Nucleus));
        labels.extend(syl.coda.clone().map(|_| ConstituentLabel::Coda));
        if let Some(t) = syl.tone {
            if t != syl.coda.end {
                return Err(mismatch(t));
            }
            labels.push(ConstituentLabel::Tone);
        }
    }
    if labels.len() != n {
        return Err(mismatch(labels.len()));
    }
    for (i, (tok, label)) in tokens.iter().zip(&labels).enumerate() {
        if tok.is_tone() != (*label == ConstituentLabel::Tone) {
            return Err(mismatch(i));
        }
    }
    Ok(labels)
}

fn concat(tokens: &[Token], span: Range<usize>) -> String {
    tokens[span].iter().map(|t| t.symbol.as_str()).collect()
}

/// Renders as `ons|nuc|cod` (with a fourth `|tone` field when toned), one
/// syllable per item, joined by `.`.
pub fn render_syllables(tokens: &[Token], syllables: &[Syllable]) -> String {
    syllables
        .iter()
        .map(|s| {
            let mut r = format!(
                "{}|{}|{}",
                concat(tokens, s.onset.clone()),
                concat(tokens, s.nucleus.clone()),
                concat(tokens, s.coda.clone())
            );
            if let Some(t) = s.tone {
                r.push('|');
                r.push_str(&tokens[t].symbol);
            }
            r
        })
        .collect::<Vec<_>>()
        .join(".")
}

/// Inverse of [`render_syllables`], re-tokenizing each constituent with `table`.
pub fn parse_rendered(
    rendered: &str,
    table: &PhoneTable,
) -> Result<(Vec<Token>, Vec<Syllable>), SyllabifyError> {
    let mut tokens: Vec<Token> = Vec::new();
    let mut syllables = Vec::new();
    let bad = || SyllabifyError::Rendering(rendered.to_string());
    for part in rendered.split('.') {
        let fields: Vec<&str> = part.split('|').collect();
        if !(3..=4).contains(&fields.len()) || fields[1].is_empty() {
            return Err(bad());
        }
        let mut spans = Vec::with_capacity(3);
        for field in &fields[..3] {
            let start = tokens.len();
            if !field.is_empty() {
                tokens.extend(tokenize(field, table, LanguageProfile::Generic)?);
            }
            spans.push(start..tokens.len());
        }
        let mut syl = Syllable::new(spans[0].clone(), spans[1].clone(), spans[2].clone());
        if let Some(tone) = fields.get(3) {
            if tone.is_empty() || !tone.chars().all(|c| ('1'..='5').contains(&c)) {
                return Err(bad());
            }
            syl.tone = Some(tokens.len());
            tokens.push(Token {
                symbol: tone.to_string(),
                features: PhoneFeatures::TONE,
            });
        }
        syllables.push(syl);
    }
    Ok((tokens, syllables))
}
