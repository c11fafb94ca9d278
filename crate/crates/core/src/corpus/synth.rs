//! Synthetic dialect continuum with a built-in compensation tradeoff.
//!
//! Sites sit on a regular grid centred on a capital. Every word is a string of
//! CV syllables. Two per-site knobs fall off linearly with distance from the
//! capital:
//!
//! * harmony strength `h = harmony_gradient * sqrt(1 - d / d_max)`: each
//!   non-initial vowel agrees with the word's first vowel in backness and
//!   rounding with probability `h` and is drawn from the full eight-vowel set
//!   otherwise, so larger `h` means lower phonotactic entropy;
//! * mean syllable count: `base + length_gradient * (1 - d / d_max)`.
//!
//! Sites near the capital therefore have long, predictable words and outlying
//! sites short, less constrained ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Dataset, DialectLexicon, LanguageProfile, WordEntry};

/// Consonant inventory, truncated to `vocabulary` entries.
pub const CONSONANTS: [&str; 12] = ["p", "t", "k", "m", "n", "l", "s", "f", "b", "d", "r", "v"];
/// Vowels grouped by backness and rounding; each pair differs in height only.
pub const VOWEL_CLASSES: [[&str; 2]; 4] = [["i", "e"], ["y", "ø"], ["ɯ", "ɑ"], ["u", "o"]];

const GRID_SPACING_DEG: f64 = 0.25;
const BASE_SYLLABLES: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n_sites: usize,
    /// `[longitude, latitude]`.
    pub capital: (f64, f64),
    /// Number of consonants in the inventory.
    pub vocabulary: usize,
    /// Harmony strength at the capital, in [0, 1].
    pub harmony_gradient: f64,
    /// Extra syllables per word at the capital.
    pub length_gradient: f64,
    pub words_per_site: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_sites: 30,
            capital: (119.3, 26.08),
            vocabulary: 6,
            harmony_gradient: 1.0,
            length_gradient: 2.0,
            words_per_site: 200,
            seed: 7,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), CorpusError> {
        let fail = |m: &str| Err(CorpusError::Config(m.to_string()));
        if self.n_sites < 2 {
            return fail("n_sites must be at least 2");
        }
        if self.vocabulary == 0 || self.vocabulary > CONSONANTS.len() {
            return fail(&format!(
                "vocabulary must be between 1 and {}",
                CONSONANTS.len()
            ));
        }
        if self.words_per_site == 0 {
            return fail("words_per_site must be positive");
        }
        if !(0.0..=1.0).contains(&self.harmony_gradient) {
            return fail("harmony_gradient must lie in [0, 1]");
        }
        if !(self.length_gradient.is_finite() && self.length_gradient >= 0.0) {
            return fail("length_gradient must be finite and non-negative");
        }
        let (lon, lat) = self.capital;
        if !(lon.abs() <= 170.0 && lat.abs() <= 80.0) {
            return fail("capital must leave room for the site grid");
        }
        Ok(())
    }
}

/// Generator parameters for one site.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteParams {
    pub site_id: String,
    pub longitude: f64,
    pub latitude: f64,
    pub distance: f64,
    pub harmony: f64,
    pub mean_syllables: f64,
}

pub fn site_parameters(cfg: &SynthConfig) -> Result<Vec<SiteParams>, CorpusError> {
    cfg.validate()?;
    let cols = (cfg.n_sites as f64).sqrt().ceil() as usize;
    let rows = cfg.n_sites.div_ceil(cols);
    let (lon0, lat0) = cfg.capital;
    let width = cfg.n_sites.to_string().len().max(2);

    let mut coords = Vec::with_capacity(cfg.n_sites);
    for k in 0..cfg.n_sites {
        let (r, c) = (k / cols, k % cols);
        let dx = (c as f64 - (cols as f64 - 1.0) / 2.0) * GRID_SPACING_DEG;
        let dy = (r as f64 - (rows as f64 - 1.0) / 2.0) * GRID_SPACING_DEG;
        coords.push((lon0 + dx, lat0 + dy, dx.hypot(dy)));
    }
    let d_max = coords.iter().map(|c| c.2).fold(0.0, f64::max);

    Ok(coords
        .into_iter()
        .enumerate()
        .map(|(k, (lon, lat, d))| {
            let closeness = 1.0 - d / d_max;
            SiteParams {
                site_id: format!("S{:0width$}", k + 1),
                longitude: lon,
                latitude: lat,
                distance: d,
                harmony: (cfg.harmony_gradient * closeness.sqrt()).clamp(0.0, 1.0),
                mean_syllables: BASE_SYLLABLES + cfg.length_gradient * closeness,
            }
        })
        .collect())
}

fn sample_word(rng: &mut ChaCha8Rng, params: &SiteParams, consonants: &[&str]) -> String {
    let m = params.mean_syllables;
    let jitter: i64 = rng.gen_range(-1..=1);
    let n_syl = ((m + rng.gen::<f64>()).floor() as i64 + jitter).max(1) as usize;

    let mut word = String::new();
    let mut first_class: Option<&[&str; 2]> = None;
    for _ in 0..n_syl {
        word.push_str(consonants[rng.gen_range(0..consonants.len())]);
        let vowel = match first_class {
            Some(class) if rng.gen::<f64>() < params.harmony => class[rng.gen_range(0..2)],
            _ => {
                let v = rng.gen_range(0..8);
                let class = &VOWEL_CLASSES[v / 2];
                first_class.get_or_insert(class);
                class[v % 2]
            }
        };
        word.push_str(vowel);
    }
    word
}

/// Generates the continuum. Identical configurations give identical datasets.
pub fn synth_continuum(cfg: &SynthConfig) -> Result<Dataset, CorpusError> {
    let sites = site_parameters(cfg)?;
    let consonants = &CONSONANTS[..cfg.vocabulary];
    let concept_width = cfg.words_per_site.to_string().len();
    let lexica = sites
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let site_seed = cfg
                .seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(k as u64 + 1);
            let mut rng = ChaCha8Rng::seed_from_u64(site_seed);
            let entries = (0..cfg.words_per_site)
                .map(|j| {
                    let w = sample_word(&mut rng, p, consonants);
                    WordEntry::new(format!("c{:0concept_width$}", j + 1), vec![w])
                        .expect("one variant")
                })
                .collect();
            DialectLexicon {
                site_id: p.site_id.clone(),
                site_name: format!("Synthetic {}", p.site_id),
                longitude: p.longitude,
                latitude: p.latitude,
                entries,
            }
        })
        .collect();
    Ok(Dataset {
        lexica,
        language_profile: LanguageProfile::Generic,
    })
}
