//! Phone-level recurrent language model with an auxiliary syllable
//! constituency head, and phonotactic complexity as held-out bits per phoneme.
//!
//! Each word is fed as `BOS x₁ … x_L`. The hidden state after reading `x_t`
//! predicts the next phone `x_{t+1}` (`EOS` after the last one) and, when
//! multitask training is on, the constituent label (O/N/C/T) of that next
//! phone. Labels are targets only and never enter as inputs, so the phone
//! distribution at every step depends on the prefix alone.
//!
//! Losses are mean cross-entropies in nats. Training combines them with fixed
//! weights or with learned log-variances `η_t`, contributing
//! `½(e^{−η_t} L_t + η_t)` per task. Complexity always uses the phone head
//! alone.

mod complexity;
mod gradcheck;
mod io;
mod model;
mod train;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LanguageProfile;
use crate::phoncore::{tokenize, PhonError, PhoneTable, Token, TokenKind};
use crate::syllabify::{constituent_labels, syllabify, ConstituentLabel, SyllabifyError};
use crate::Scalar;

pub use complexity::{avg_word_length, estimate_complexity, ComplexityRow};
pub use gradcheck::{gradient_check, gradient_check_with, GradCheckReport};
pub use io::{ModelDump, ParamGroup};
pub use model::{Losses, PhonoLm, StepOutput};
pub use train::{train, train_with_vocab, EpochRecord, TrainReport};

pub const BOS: &str = "<bos>";
pub const EOS: &str = "<eos>";
pub const N_CONSTITUENTS: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum LmError {
    #[error("vocabulary has no phone symbols")]
    EmptyVocabulary,
    #[error("symbol `{0}` is not in the model vocabulary")]
    UnknownSymbol(String),
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("need at least {need} words, got {have}")]
    TooFewWords { have: usize, need: usize },
    #[error("fold {fold} leaves {train} training words (need at least 2)")]
    FoldTooSmall { fold: usize, train: usize },
    #[error("multitask training needs constituent labels on every word")]
    MissingLabels,
    #[error("loss became non-finite ({loss}) at epoch {epoch}; try a learning rate below {learning_rate}")]
    NonFinite {
        epoch: usize,
        loss: f64,
        learning_rate: f64,
    },
    #[error("model dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Phon(#[from] PhonError),
    #[error(transparent)]
    Syllabify(#[from] SyllabifyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Uncertainty,
    Static,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig<T> {
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub layers: usize,
    pub learning_rate: T,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub multitask: bool,
    pub weighting: Weighting,
    /// Static weight on the phone loss.
    pub lambda_phon: T,
    /// Static weight on the constituency loss.
    pub lambda_syl: T,
    pub folds: usize,
    /// Smallest lexicon accepted for training.
    pub min_words: usize,
}

impl<T: Scalar> Default for ModelConfig<T> {
    fn default() -> Self {
        Self {
            embedding_dim: 32,
            hidden_dim: 64,
            layers: 1,
            learning_rate: T::of(0.005),
            max_epochs: 150,
            patience: 15,
            batch_size: 32,
            seed: 0,
            multitask: false,
            weighting: Weighting::Uncertainty,
            lambda_phon: T::one(),
            lambda_syl: T::one(),
            folds: 5,
            min_words: 20,
        }
    }
}

impl<T: Scalar> ModelConfig<T> {
    pub fn validate(&self) -> Result<(), LmError> {
        let fail = |m: &str| Err(LmError::Config(m.to_string()));
        if self.embedding_dim == 0 || self.hidden_dim == 0 || self.layers == 0 {
            return fail("dimensions and layer count must be at least 1");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1");
        }
        if !(self.learning_rate > T::zero() && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if self.lambda_phon < T::zero() || self.lambda_syl < T::zero() {
            return fail("static loss weights must be non-negative");
        }
        if self.folds < 2 {
            return fail("folds must be at least 2");
        }
        Ok(())
    }
}

/// Phone symbols plus the two boundary markers, `BOS` at 0 and `EOS` at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub const BOS_ID: usize = 0;
    pub const EOS_ID: usize = 1;

    /// Builds a vocabulary from phone symbols; order and duplicates are
    /// irrelevant.
    pub fn new<S: AsRef<str>>(phones: impl IntoIterator<Item = S>) -> Result<Self, LmError> {
        let mut phones: Vec<String> = phones
            .into_iter()
            .map(|s| s.as_ref().to_string())
            .filter(|s| s != BOS && s != EOS)
            .collect();
        phones.sort();
        phones.dedup();
        if phones.is_empty() {
            return Err(LmError::EmptyVocabulary);
        }
        let symbols: Vec<String> = [BOS.to_string(), EOS.to_string()]
            .into_iter()
            .chain(phones)
            .collect();
        Ok(Self::from_symbols(symbols))
    }

    pub(crate) fn from_symbols(symbols: Vec<String>) -> Self {
        let index = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self { symbols, index }
    }

    pub fn from_words(words: &[LmWord]) -> Result<Self, LmError> {
        Self::new(words.iter().flat_map(|w| w.tokens.iter().map(|t| t.symbol.as_str())))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn id(&self, symbol: &str) -> Result<usize, LmError> {
        self.index
            .get(symbol)
            .copied()
            .ok_or_else(|| LmError::UnknownSymbol(symbol.to_string()))
    }
}

/// A tokenized word, optionally with one constituent label per token.
#[derive(Debug, Clone, PartialEq)]
pub struct LmWord {
    pub tokens: Vec<Token>,
    pub labels: Option<Vec<ConstituentLabel>>,
}

impl LmWord {
    pub fn new(tokens: Vec<Token>) -> Self {
        Self {
            tokens,
            labels: None,
        }
    }

    /// Tokenizes and, when `with_labels`, syllabifies a transcription.
    pub fn from_transcription(
        text: &str,
        table: &PhoneTable,
        profile: LanguageProfile,
        with_labels: bool,
    ) -> Result<Self, LmError> {
        let tokens = tokenize(text, table, profile)?;
        let labels = if with_labels {
            let syllables = syllabify(&tokens, profile)?;
            Some(constituent_labels(&tokens, &syllables)?)
        } else {
            None
        };
        Ok(Self { tokens, labels })
    }

    /// Segment tokens only; tones are excluded from word length.
    pub fn segment_count(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| t.features.kind == TokenKind::Segment)
            .count()
    }
}

/// Word as vocabulary ids.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct EncodedWord {
    pub ids: Vec<usize>,
    pub labels: Option<Vec<usize>>,
}

impl EncodedWord {
    pub fn encode(word: &LmWord, vocab: &Vocabulary) -> Result<Self, LmError> {
        let ids = word
            .tokens
            .iter()
            .map(|t| vocab.id(&t.symbol))
            .collect::<Result<Vec<_>, _>>()?;
        let labels = word
            .labels
            .as_ref()
            .map(|ls| ls.iter().map(|l| l.index()).collect());
        Ok(Self { ids, labels })
    }

    /// Phone predictions: every token plus EOS.
    pub fn n_targets(&self) -> usize {
        self.ids.len() + 1
    }
}

pub(crate) fn encode_all(words: &[LmWord], vocab: &Vocabulary) -> Result<Vec<EncodedWord>, LmError> {
    words.iter().map(|w| EncodedWord::encode(w, vocab)).collect()
}

/// Combines the two task losses per the configuration.
pub fn total_loss<T: Scalar>(l_phon: T, l_syl: T, eta: [T; 2], config: &ModelConfig<T>) -> T {
    if !config.multitask {
        return l_phon;
    }
    match config.weighting {
        Weighting::Static => config.lambda_phon * l_phon + config.lambda_syl * l_syl,
        Weighting::Uncertainty => {
            T::half() * ((-eta[0]).exp() * l_phon + eta[0])
                + T::half() * ((-eta[1]).exp() * l_syl + eta[1])
        }
    }
}

/// `∂total/∂L_phon`, `∂total/∂L_syl`.
pub(crate) fn loss_weights<T: Scalar>(eta: [T; 2], config: &ModelConfig<T>) -> [T; 2] {
    if !config.multitask {
        return [T::one(), T::zero()];
    }
    match config.weighting {
        Weighting::Static => [config.lambda_phon, config.lambda_syl],
        Weighting::Uncertainty => [T::half() * (-eta[0]).exp(), T::half() * (-eta[1]).exp()],
    }
}

/// `∂total/∂η_t`; zero unless uncertainty weighting is active.
pub(crate) fn eta_gradient<T: Scalar>(l: [T; 2], eta: [T; 2], config: &ModelConfig<T>) -> [T; 2] {
    if !config.multitask || config.weighting != Weighting::Uncertainty {
        return [T::zero(); 2];
    }
    [
        T::half() * (T::one() - (-eta[0]).exp() * l[0]),
        T::half() * (T::one() - (-eta[1]).exp() * l[1]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(multitask: bool, weighting: Weighting) -> ModelConfig<f64> {
        ModelConfig {
            multitask,
            weighting,
            ..Default::default()
        }
    }

    #[test]
    fn static_weights_reduce_to_single_task() {
        let c = ModelConfig {
            lambda_syl: 0.0,
            ..cfg(true, Weighting::Static)
        };
        assert_eq!(total_loss(2.0, 5.0, [0.0; 2], &c), 2.0);
        assert_eq!(total_loss(2.0, 5.0, [0.3, 0.1], &cfg(false, Weighting::Uncertainty)), 2.0);
    }

    #[test]
    fn uncertainty_at_zero_eta_halves_the_sum() {
        let c = cfg(true, Weighting::Uncertainty);
        assert_eq!(total_loss(2.0, 1.0, [0.0; 2], &c), 1.5);
    }

    #[test]
    fn eta_gradient_matches_finite_differences() {
        let c = cfg(true, Weighting::Uncertainty);
        // at η = 0 with L = 1 the derivative vanishes
        assert_eq!(eta_gradient([1.0, 1.0], [0.0, 0.0], &c), [0.0, 0.0]);
        let (l, eta) = ([2.3, 0.7], [0.4, -1.1]);
        let g = eta_gradient(l, eta, &c);
        let h = 1e-6;
        for t in 0..2 {
            let mut up = eta;
            let mut down = eta;
            up[t] += h;
            down[t] -= h;
            let fd = (total_loss(l[0], l[1], up, &c) - total_loss(l[0], l[1], down, &c)) / (2.0 * h);
            assert_abs_diff_eq!(g[t], fd, epsilon = 1e-8);
            assert_abs_diff_eq!(g[t], 0.5 * (1.0 - (-eta[t]).exp() * l[t]), epsilon = 1e-15);
        }
    }

    #[test]
    fn vocabulary_layout() {
        let v = Vocabulary::new(["t", "a", "t", "s"]).unwrap();
        assert_eq!(v.symbols(), ["<bos>", "<eos>", "a", "s", "t"]);
        assert_eq!(v.id("s").unwrap(), 3);
        assert_eq!(v.id("x"), Err(LmError::UnknownSymbol("x".into())));
        assert_eq!(Vocabulary::new(Vec::<String>::new()), Err(LmError::EmptyVocabulary));
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::<f64>::default().validate().is_ok());
        let bad = ModelConfig::<f64> {
            hidden_dim: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ModelConfig::<f64> {
            folds: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ModelConfig::<f64> {
            lambda_syl: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn words_from_transcriptions() {
        let w = LmWord::from_transcription("ŋi31tʰæ51", PhoneTable::builtin(), LanguageProfile::Min, true)
            .unwrap();
        assert_eq!(w.segment_count(), 4);
        assert_eq!(w.labels.as_ref().unwrap().len(), 6);
        let w = LmWord::from_transcription("ʔɔrdə", PhoneTable::builtin(), LanguageProfile::Dutch, false)
            .unwrap();
        assert_eq!(w.segment_count(), 5);
        assert!(w.labels.is_none());
    }
}
