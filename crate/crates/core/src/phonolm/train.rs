//! Adam training with early stopping on a held-out dev slice.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::model::PhonoLm;
use super::{encode_all, EncodedWord, LmError, LmWord, ModelConfig, Vocabulary};
use crate::Scalar;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;
const DEV_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training objective over the epoch's minibatches.
    pub train_loss: f64,
    pub dev_phon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Last epoch run (1-based).
    pub stopped_epoch: usize,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_dev: f64,
    pub n_train: usize,
    pub n_dev: usize,
}

struct Adam<T> {
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
    lr: T,
}

impl<T: Scalar> Adam<T> {
    fn new(n: usize, lr: T) -> Self {
        Self {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [T], grad: &[T]) {
        self.t += 1;
        let (b1, b2, eps) = (T::of(BETA1), T::of(BETA2), T::of(EPSILON));
        let c1 = T::one() - b1.powi(self.t);
        let c2 = T::one() - b2.powi(self.t);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let mhat = *m / c1;
            let vhat = *v / c2;
            *p -= self.lr * mhat / (vhat.sqrt() + eps);
        }
    }
}

/// Trains a model whose vocabulary is drawn from `words`.
pub fn train<T: Scalar>(
    words: &[LmWord],
    config: &ModelConfig<T>,
) -> Result<(PhonoLm<T>, TrainReport), LmError> {
    if words.len() < config.min_words {
        return Err(LmError::TooFewWords {
            have: words.len(),
            need: config.min_words,
        });
    }
    let vocab = Vocabulary::from_words(words)?;
    train_with_vocab(vocab, words, config)
}

/// Trains on `words` with a fixed vocabulary, which may include symbols the
/// words never use.
pub fn train_with_vocab<T: Scalar>(
    vocab: Vocabulary,
    words: &[LmWord],
    config: &ModelConfig<T>,
) -> Result<(PhonoLm<T>, TrainReport), LmError> {
    config.validate()?;
    if words.len() < 2 {
        return Err(LmError::TooFewWords {
            have: words.len(),
            need: 2,
        });
    }
    if config.multitask && words.iter().any(|w| w.labels.is_none()) {
        return Err(LmError::MissingLabels);
    }
    let mut model = PhonoLm::init(vocab, config)?;
    let encoded = encode_all(words, &model.vocab)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    order.shuffle(&mut rng);
    let n_dev = ((encoded.len() as f64 * DEV_FRACTION).round() as usize).clamp(1, encoded.len() - 1);
    let dev: Vec<EncodedWord> = order[..n_dev].iter().map(|&i| encoded[i].clone()).collect();
    let train: Vec<EncodedWord> = order[n_dev..].iter().map(|&i| encoded[i].clone()).collect();

    let mut adam = Adam::new(model.n_params(), config.learning_rate);
    let mut best_params = model.params.clone();
    let mut best_dev = model.losses_encoded(&dev, false).phon.f64();
    let mut best_epoch = 0;
    let mut epochs = Vec::new();
    let mut idx: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=config.max_epochs {
        idx.shuffle(&mut rng);
        let mut sum = 0.0;
        for chunk in idx.chunks(config.batch_size) {
            let batch: Vec<EncodedWord> = chunk.iter().map(|&i| train[i].clone()).collect();
            let (loss, _, grad) = model.objective_and_gradient(&batch, config);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(LmError::NonFinite {
                    epoch,
                    loss: loss.f64(),
                    learning_rate: config.learning_rate.f64(),
                });
            }
            sum += loss.f64() * chunk.len() as f64;
            adam.step(&mut model.params, &grad);
        }
        let dev_phon = model.losses_encoded(&dev, false).phon.f64();
        if !dev_phon.is_finite() {
            return Err(LmError::NonFinite {
                epoch,
                loss: dev_phon,
                learning_rate: config.learning_rate.f64(),
            });
        }
        epochs.push(EpochRecord {
            epoch,
            train_loss: sum / train.len() as f64,
            dev_phon,
        });
        if dev_phon < best_dev {
            best_dev = dev_phon;
            best_epoch = epoch;
            best_params.copy_from_slice(&model.params);
        } else if epoch - best_epoch >= config.patience {
            log::debug!("early stop at epoch {epoch}, best {best_epoch}");
            break;
        }
    }
    model.params = best_params;
    let stopped_epoch = epochs.len();
    Ok((
        model,
        TrainReport {
            epochs,
            stopped_epoch,
            best_epoch,
            best_dev,
            n_train: train.len(),
            n_dev,
        },
    ))
}
