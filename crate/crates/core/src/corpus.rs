//! Concept-aligned dialect wordlists.
//!
//! The on-disk format is UTF-8 TSV with a header row
//!
//! ```text
//! site_id  site_name  longitude  latitude  concept_id  transcription
//! ```
//!
//! and one row per (site, concept). Pronunciation variants share a cell and
//! are separated by `|`; only the first one is modelled.

pub mod synth;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use synth::{site_parameters, synth_continuum, SiteParams, SynthConfig};

pub const HEADER: [&str; 6] = [
    "site_id",
    "site_name",
    "longitude",
    "latitude",
    "concept_id",
    "transcription",
];

pub const VARIANT_SEPARATOR: char = '|';

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("line {line}: expected header `{}`, found `{found}`", HEADER.join("\\t"))]
    Header { line: usize, found: String },
    #[error("line {line}: expected {expected} tab-separated columns, found {found}")]
    ColumnCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: bad {axis} `{value}`: {reason}")]
    Coordinate {
        line: usize,
        axis: &'static str,
        value: String,
        reason: String,
    },
    #[error("line {line}: site `{site}` reappears with a different name or coordinates")]
    InconsistentSite { line: usize, site: String },
    #[error("word entry for concept `{0}` has no variants")]
    NoVariants(String),
    #[error("unknown language profile `{0}` (expected generic, dutch or min)")]
    UnknownProfile(String),
    #[error("synthetic corpus configuration: {0}")]
    Config(String),
}

/// Selects tokenization and syllabification conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageProfile {
    #[default]
    Generic,
    /// Sonority syllabification with the [s]+stop override.
    Dutch,
    /// Chao tone numerals delimit syllables.
    Min,
}

impl FromStr for LanguageProfile {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "generic" => Ok(Self::Generic),
            "dutch" => Ok(Self::Dutch),
            "min" => Ok(Self::Min),
            other => Err(CorpusError::UnknownProfile(other.to_string())),
        }
    }
}

impl fmt::Display for LanguageProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Generic => "generic",
            Self::Dutch => "dutch",
            Self::Min => "min",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordEntry {
    pub concept_id: String,
    /// The selected variant.
    pub raw_transcription: String,
    pub variants: Vec<String>,
}

impl WordEntry {
    pub fn new(
        concept_id: impl Into<String>,
        variants: Vec<String>,
    ) -> Result<Self, CorpusError> {
        let concept_id = concept_id.into();
        if variants.is_empty() {
            return Err(CorpusError::NoVariants(concept_id));
        }
        let raw_transcription = select_variant_of(&variants).to_string();
        Ok(Self {
            concept_id,
            raw_transcription,
            variants,
        })
    }
}

fn select_variant_of(variants: &[String]) -> &str {
    &variants[0]
}

/// Returns the first listed variant.
pub fn select_variant(entry: &WordEntry) -> &str {
    select_variant_of(&entry.variants)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialectLexicon {
    pub site_id: String,
    pub site_name: String,
    pub longitude: f64,
    pub latitude: f64,
    pub entries: Vec<WordEntry>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub lexica: Vec<DialectLexicon>,
    pub language_profile: LanguageProfile,
}

impl Dataset {
    pub fn site(&self, site_id: &str) -> Option<&DialectLexicon> {
        self.lexica.iter().find(|l| l.site_id == site_id)
    }

    pub fn n_entries(&self) -> usize {
        self.lexica.iter().map(|l| l.entries.len()).sum()
    }
}

/// Result of [`parse_wordlist`]: the dataset plus the 1-based line numbers of
/// rows dropped for an empty transcription.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedWordlist {
    pub dataset: Dataset,
    pub skipped_rows: Vec<usize>,
}

fn parse_coordinate(
    line: usize,
    axis: &'static str,
    raw: &str,
    limit: f64,
) -> Result<f64, CorpusError> {
    let bad = |reason: String| CorpusError::Coordinate {
        line,
        axis,
        value: raw.to_string(),
        reason,
    };
    let value: f64 = raw.trim().parse().map_err(|e| bad(format!("{e}")))?;
    if !value.is_finite() || value.abs() > limit {
        return Err(bad(format!("outside [-{limit}, {limit}]")));
    }
    Ok(value)
}

/// Parses a wordlist TSV. An empty stream yields an empty dataset.
pub fn parse_wordlist(text: &str, profile: LanguageProfile) -> Result<ParsedWordlist, CorpusError> {
    let mut lexica: Vec<DialectLexicon> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut skipped_rows = Vec::new();
    let mut seen_header = false;

    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if !seen_header {
            if cols.iter().map(|c| c.trim()).ne(HEADER.iter().copied()) {
                return Err(CorpusError::Header {
                    line: line_no,
                    found: line.to_string(),
                });
            }
            seen_header = true;
            continue;
        }
        if cols.len() != HEADER.len() {
            return Err(CorpusError::ColumnCount {
                line: line_no,
                expected: HEADER.len(),
                found: cols.len(),
            });
        }
        let site_id = cols[0].trim();
        let site_name = cols[1].trim();
        let longitude = parse_coordinate(line_no, "longitude", cols[2], 180.0)?;
        let latitude = parse_coordinate(line_no, "latitude", cols[3], 90.0)?;
        let concept_id = cols[4].trim();
        let variants: Vec<String> = cols[5]
            .split(VARIANT_SEPARATOR)
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(str::to_string)
            .collect();
        if variants.is_empty() {
            log::warn!("line {line_no}: empty transcription for {site_id}/{concept_id}, row skipped");
            skipped_rows.push(line_no);
            continue;
        }
        let entry = WordEntry::new(concept_id, variants)?;

        let slot = match index.get(site_id) {
            Some(&k) => {
                let lex = &lexica[k];
                if lex.site_name != site_name
                    || lex.longitude != longitude
                    || lex.latitude != latitude
                {
                    return Err(CorpusError::InconsistentSite {
                        line: line_no,
                        site: site_id.to_string(),
                    });
                }
                k
            }
            None => {
                index.insert(site_id.to_string(), lexica.len());
                lexica.push(DialectLexicon {
                    site_id: site_id.to_string(),
                    site_name: site_name.to_string(),
                    longitude,
                    latitude,
                    entries: Vec::new(),
                });
                lexica.len() - 1
            }
        };
        lexica[slot].entries.push(entry);
    }

    // A site whose every row was skipped never gets created, so all lexica
    // are non-empty here.
    Ok(ParsedWordlist {
        dataset: Dataset {
            lexica,
            language_profile: profile,
        },
        skipped_rows,
    })
}

/// Writes the dataset in the format read by [`parse_wordlist`].
pub fn serialize_wordlist(ds: &Dataset) -> String {
    let mut out = HEADER.join("\t");
    out.push('\n');
    for lex in &ds.lexica {
        for e in &lex.entries {
            let cell = e.variants.join("|");
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                lex.site_id, lex.site_name, lex.longitude, lex.latitude, e.concept_id, cell
            ));
        }
    }
    out
}

/// Drops every site listed in `excluded`, preserving order. Returns the
/// filtered dataset and the excluded ids that matched no site.
pub fn filter_sites(ds: &Dataset, excluded: &BTreeSet<String>) -> (Dataset, Vec<String>) {
    let present: BTreeSet<&str> = ds.lexica.iter().map(|l| l.site_id.as_str()).collect();
    let missing: Vec<String> = excluded
        .iter()
        .filter(|id| !present.contains(id.as_str()))
        .cloned()
        .collect();
    for id in &missing {
        log::warn!("excluded site `{id}` is not in the dataset");
    }
    let lexica = ds
        .lexica
        .iter()
        .filter(|l| !excluded.contains(&l.site_id))
        .cloned()
        .collect();
    (
        Dataset {
            lexica,
            language_profile: ds.language_profile,
        },
        missing,
    )
}
