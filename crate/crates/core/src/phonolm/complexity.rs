//! Held-out bits per phoneme by k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{encode_all, train_with_vocab, LmError, LmWord, ModelConfig, Vocabulary};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub site_id: String,
    pub bits_per_phoneme: f64,
    pub avg_word_length: f64,
    pub n_words: usize,
}

/// Mean number of segment tokens per word. Tones are not phonemes.
pub fn avg_word_length(words: &[LmWord]) -> f64 {
    if words.is_empty() {
        return 0.0;
    }
    words.iter().map(|w| w.segment_count()).sum::<usize>() as f64 / words.len() as f64
}

/// Trains one model per fold on the remaining words and pools the held-out
/// phone-head cross-entropy. Every held-out word contributes its tokens plus
/// one end-of-word prediction to the denominator.
pub fn estimate_complexity<T: Scalar>(
    site_id: &str,
    words: &[LmWord],
    config: &ModelConfig<T>,
) -> Result<ComplexityRow, LmError> {
    config.validate()?;
    if words.len() < config.min_words.max(config.folds) {
        return Err(LmError::TooFewWords {
            have: words.len(),
            need: config.min_words.max(config.folds),
        });
    }
    // The vocabulary covers the whole lexicon so held-out words never hit an
    // unseen symbol.
    let vocab = Vocabulary::from_words(words)?;
    let encoded = encode_all(words, &vocab)?;

    let mut order: Vec<usize> = (0..words.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let k = config.folds;

    let mut nats = 0.0f64;
    let mut n_tokens = 0usize;
    for fold in 0..k {
        let (held, rest): (Vec<_>, Vec<_>) = order.iter().enumerate().partition(|(pos, _)| pos % k == fold);
        if rest.len() < 2 {
            return Err(LmError::FoldTooSmall {
                fold,
                train: rest.len(),
            });
        }
        let train_words: Vec<LmWord> = rest.iter().map(|(_, &i)| words[i].clone()).collect();
        let fold_config = ModelConfig {
            seed: config.seed.wrapping_add(fold as u64 + 1),
            ..config.clone()
        };
        let (model, report) = train_with_vocab(vocab.clone(), &train_words, &fold_config)?;
        log::debug!(
            "{site_id} fold {fold}: {} epochs, dev {:.4}",
            report.stopped_epoch,
            report.best_dev
        );
        for (_, &i) in &held {
            nats -= model.word_log_prob(&encoded[i].ids).f64();
            n_tokens += encoded[i].n_targets();
        }
    }
    Ok(ComplexityRow {
        site_id: site_id.to_string(),
        bits_per_phoneme: nats / n_tokens as f64 / std::f64::consts::LN_2,
        avg_word_length: avg_word_length(words),
        n_words: words.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LanguageProfile;
    use crate::phoncore::PhoneTable;

    fn word(t: &str, profile: LanguageProfile) -> LmWord {
        LmWord::from_transcription(t, PhoneTable::builtin(), profile, false).unwrap()
    }

    #[test]
    fn word_length_counts_segments() {
        assert_eq!(avg_word_length(&[word("ʔɔrdə", LanguageProfile::Dutch)]), 5.0);
        assert_eq!(avg_word_length(&[word("ŋi31tʰæ51", LanguageProfile::Min)]), 4.0);
        assert_eq!(avg_word_length(&[word("a", LanguageProfile::Generic)]), 1.0);
        assert_eq!(
            avg_word_length(&[word("kla", LanguageProfile::Generic), word("a", LanguageProfile::Generic)]),
            2.0
        );
    }

    #[test]
    fn fold_and_floor_errors() {
        let ws: Vec<LmWord> = (0..4).map(|_| word("pa", LanguageProfile::Generic)).collect();
        let c = ModelConfig::<f64> {
            folds: 2,
            min_words: 2,
            ..Default::default()
        };
        assert!(matches!(
            estimate_complexity("x", &ws[..3], &ModelConfig { folds: 4, ..c.clone() }),
            Err(LmError::TooFewWords { .. })
        ));
        assert_eq!(
            estimate_complexity("x", &ws[..2], &c).unwrap_err(),
            LmError::FoldTooSmall { fold: 0, train: 1 }
        );
    }
}
