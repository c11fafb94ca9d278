//! LSTM parameters, forward pass and backpropagation through time.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    encode_all, eta_gradient, loss_weights, total_loss, EncodedWord, LmError, LmWord, ModelConfig,
    Vocabulary, N_CONSTITUENTS,
};
use crate::phoncore::Token;
use crate::Scalar;

/// Offsets of each parameter group in the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layout {
    pub vocab: usize,
    pub embed: usize,
    pub hidden: usize,
    pub embedding: Range<usize>,
    /// Per layer: gate weights `4H × (in + H)` acting on `[x; h_prev]`, and
    /// gate biases `4H`. Gate order is input, forget, candidate, output.
    pub lstm: Vec<(Range<usize>, Range<usize>)>,
    pub phone_w: Range<usize>,
    pub phone_b: Range<usize>,
    pub syl_w: Range<usize>,
    pub syl_b: Range<usize>,
    pub eta: Range<usize>,
    pub total: usize,
}

impl Layout {
    pub fn new(vocab: usize, embed: usize, hidden: usize, layers: usize) -> Self {
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        let embedding = take(vocab * embed);
        let lstm = (0..layers)
            .map(|l| {
                let input = if l == 0 { embed } else { hidden };
                (take(4 * hidden * (input + hidden)), take(4 * hidden))
            })
            .collect();
        let phone_w = take(vocab * hidden);
        let phone_b = take(vocab);
        let syl_w = take(N_CONSTITUENTS * hidden);
        let syl_b = take(N_CONSTITUENTS);
        let eta = take(2);
        Self {
            vocab,
            embed,
            hidden,
            embedding,
            lstm,
            phone_w,
            phone_b,
            syl_w,
            syl_b,
            eta,
            total: at,
        }
    }

    pub fn input_dim(&self, layer: usize) -> usize {
        if layer == 0 {
            self.embed
        } else {
            self.hidden
        }
    }

    /// Named groups, in storage order.
    pub fn groups(&self) -> Vec<(String, Range<usize>)> {
        let mut g = vec![("embedding".to_string(), self.embedding.clone())];
        for (l, (w, b)) in self.lstm.iter().enumerate() {
            g.push((format!("lstm{l}.weight"), w.clone()));
            g.push((format!("lstm{l}.bias"), b.clone()));
        }
        g.push(("phone.weight".into(), self.phone_w.clone()));
        g.push(("phone.bias".into(), self.phone_b.clone()));
        g.push(("syllable.weight".into(), self.syl_w.clone()));
        g.push(("syllable.bias".into(), self.syl_b.clone()));
        g.push(("eta".into(), self.eta.clone()));
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhonoLm<T> {
    pub(crate) vocab: Vocabulary,
    pub(crate) layout: Layout,
    pub(crate) params: Vec<T>,
}

/// Distributions emitted after reading one input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput<T> {
    pub phone: Vec<T>,
    pub constituency: Vec<T>,
}

/// Mean cross-entropies (nats) and the number of targets behind each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Losses<T> {
    pub phon: T,
    pub syl: T,
    pub phon_targets: usize,
    pub syl_targets: usize,
}

/// Per-layer activations for one time step.
struct LayerCache<T> {
    xh: Vec<T>,
    gates: Vec<T>,
    c_prev: Vec<T>,
    tanh_c: Vec<T>,
}

struct StepCache<T> {
    layers: Vec<LayerCache<T>>,
    h_top: Vec<T>,
    phone_probs: Vec<T>,
    syl_probs: Vec<T>,
}

fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// `out = W x + b` for row-major `W` (`rows × x.len()`).
fn affine<T: Scalar>(w: &[T], b: &[T], x: &[T], out: &mut [T]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        let mut s = b[r];
        for (&a, &v) in row.iter().zip(x) {
            s += a * v;
        }
        *o = s;
    }
}

/// `dx += Wᵀ dy`, `dW += dy ⊗ x`, `db += dy`.
fn affine_backward<T: Scalar>(w: &[T], x: &[T], dy: &[T], dw: &mut [T], db: &mut [T], dx: &mut [T]) {
    let cols = x.len();
    for (r, &g) in dy.iter().enumerate() {
        if g == T::zero() {
            continue;
        }
        db[r] += g;
        let row = &w[r * cols..(r + 1) * cols];
        let drow = &mut dw[r * cols..(r + 1) * cols];
        for c in 0..cols {
            drow[c] += g * x[c];
            dx[c] += g * row[c];
        }
    }
}

fn softmax_in_place<T: Scalar>(v: &mut [T]) {
    let max = v.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// Natural-log probability of `target` under softmax(`logits`), computed
/// without forming the distribution.
fn log_softmax_at<T: Scalar>(logits: &[T], target: usize) -> T {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = logits.iter().map(|&x| (x - max).exp()).sum::<T>().ln() + max;
    logits[target] - lse
}

impl<T: Scalar> PhonoLm<T> {
    /// Uniform initialization in `±1/√fan_in` from the configured seed;
    /// `η = 0`.
    pub fn init(vocab: Vocabulary, config: &ModelConfig<T>) -> Result<Self, LmError> {
        config.validate()?;
        let layout = Layout::new(
            vocab.len(),
            config.embedding_dim,
            config.hidden_dim,
            config.layers,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = vec![T::zero(); layout.total];
        let mut fill = |range: Range<usize>, fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut params[range] {
                *p = T::of(rng.gen_range(-bound..bound));
            }
        };
        fill(layout.embedding.clone(), layout.embed);
        for (l, (w, b)) in layout.lstm.iter().enumerate() {
            let fan_in = layout.input_dim(l) + layout.hidden;
            fill(w.clone(), fan_in);
            fill(b.clone(), fan_in);
        }
        fill(layout.phone_w.clone(), layout.hidden);
        fill(layout.phone_b.clone(), layout.hidden);
        fill(layout.syl_w.clone(), layout.hidden);
        fill(layout.syl_b.clone(), layout.hidden);
        Ok(Self {
            vocab,
            layout,
            params,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn param_groups(&self) -> Vec<(String, Range<usize>)> {
        self.layout.groups()
    }

    pub fn eta(&self) -> [T; 2] {
        let e = &self.params[self.layout.eta.clone()];
        [e[0], e[1]]
    }

    pub fn hidden_dim(&self) -> usize {
        self.layout.hidden
    }

    pub fn embedding_dim(&self) -> usize {
        self.layout.embed
    }

    pub fn layers(&self) -> usize {
        self.layout.lstm.len()
    }

    /// Runs the network over `BOS ids…`, returning one cache per input.
    fn run(&self, ids: &[usize]) -> Vec<StepCache<T>> {
        let lay = &self.layout;
        let h = lay.hidden;
        let n_layers = lay.lstm.len();
        let mut hs = vec![vec![T::zero(); h]; n_layers];
        let mut cs = vec![vec![T::zero(); h]; n_layers];
        let mut steps = Vec::with_capacity(ids.len() + 1);
        let emb = &self.params[lay.embedding.clone()];

        for &sym in std::iter::once(&Vocabulary::BOS_ID).chain(ids) {
            let mut input: Vec<T> = emb[sym * lay.embed..(sym + 1) * lay.embed].to_vec();
            let mut layers = Vec::with_capacity(n_layers);
            for l in 0..n_layers {
                let (wr, br) = &lay.lstm[l];
                let mut xh = input;
                xh.extend_from_slice(&hs[l]);
                let mut gates = vec![T::zero(); 4 * h];
                affine(&self.params[wr.clone()], &self.params[br.clone()], &xh, &mut gates);
                for (k, g) in gates.iter_mut().enumerate() {
                    *g = if (2 * h..3 * h).contains(&k) {
                        g.tanh()
                    } else {
                        sigmoid(*g)
                    };
                }
                let c_prev = cs[l].clone();
                let mut tanh_c = vec![T::zero(); h];
                for j in 0..h {
                    let (i_g, f_g, g_g, o_g) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                    let c = f_g * c_prev[j] + i_g * g_g;
                    cs[l][j] = c;
                    tanh_c[j] = c.tanh();
                    hs[l][j] = o_g * tanh_c[j];
                }
                input = hs[l].clone();
                layers.push(LayerCache {
                    xh,
                    gates,
                    c_prev,
                    tanh_c,
                });
            }
            let h_top = input;
            let mut phone_probs = vec![T::zero(); lay.vocab];
            affine(
                &self.params[lay.phone_w.clone()],
                &self.params[lay.phone_b.clone()],
                &h_top,
                &mut phone_probs,
            );
            softmax_in_place(&mut phone_probs);
            let mut syl_probs = vec![T::zero(); N_CONSTITUENTS];
            affine(
                &self.params[lay.syl_w.clone()],
                &self.params[lay.syl_b.clone()],
                &h_top,
                &mut syl_probs,
            );
            softmax_in_place(&mut syl_probs);
            steps.push(StepCache {
                layers,
                h_top,
                phone_probs,
                syl_probs,
            });
        }
        steps
    }

    /// Phone and constituency distributions for each of the `len + 1`
    /// prediction steps of a word (the last one predicts `EOS`).
    pub fn forward(&self, tokens: &[Token]) -> Result<Vec<StepOutput<T>>, LmError> {
        let ids = tokens
            .iter()
            .map(|t| self.vocab.id(&t.symbol))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self
            .run(&ids)
            .into_iter()
            .map(|s| StepOutput {
                phone: s.phone_probs,
                constituency: s.syl_probs,
            })
            .collect())
    }

    /// Natural-log probability of a word, `EOS` included.
    pub(crate) fn word_log_prob(&self, ids: &[usize]) -> T {
        let lay = &self.layout;
        let (w, b) = (&self.params[lay.phone_w.clone()], &self.params[lay.phone_b.clone()]);
        let mut logits = vec![T::zero(); lay.vocab];
        self.run(ids)
            .iter()
            .enumerate()
            .map(|(t, step)| {
                let target = ids.get(t).copied().unwrap_or(Vocabulary::EOS_ID);
                affine(w, b, &step.h_top, &mut logits);
                log_softmax_at(&logits, target)
            })
            .sum()
    }

    /// Log probability of a word in nats.
    pub fn log_prob(&self, word: &LmWord) -> Result<T, LmError> {
        Ok(self.word_log_prob(&EncodedWord::encode(word, &self.vocab)?.ids))
    }

    /// Mean phone and constituency cross-entropy over a batch.
    pub fn losses(&self, batch: &[LmWord]) -> Result<Losses<T>, LmError> {
        let enc = encode_all(batch, &self.vocab)?;
        Ok(self.losses_encoded(&enc, true))
    }

    /// Total training objective for a batch.
    pub fn total_loss(&self, batch: &[LmWord], config: &ModelConfig<T>) -> Result<T, LmError> {
        let enc = encode_all(batch, &self.vocab)?;
        Ok(self.objective(&enc, config))
    }

    pub(crate) fn objective(&self, batch: &[EncodedWord], config: &ModelConfig<T>) -> T {
        let l = self.losses_encoded(batch, config.multitask);
        total_loss(l.phon, l.syl, self.eta(), config)
    }

    pub(crate) fn losses_encoded(&self, batch: &[EncodedWord], need_syl: bool) -> Losses<T> {
        let mut phon = T::zero();
        let mut syl = T::zero();
        let (mut np, mut ns) = (0usize, 0usize);
        for word in batch {
            let steps = self.run(&word.ids);
            for (t, step) in steps.iter().enumerate() {
                let target = word.ids.get(t).copied().unwrap_or(Vocabulary::EOS_ID);
                phon -= step.phone_probs[target].ln();
                np += 1;
                if let Some(labels) = word.labels.as_ref().filter(|_| need_syl) {
                    if let Some(&lab) = labels.get(t) {
                        syl -= step.syl_probs[lab].ln();
                        ns += 1;
                    }
                }
            }
        }
        Losses {
            phon: if np > 0 { phon / T::of_usize(np) } else { T::zero() },
            syl: if ns > 0 { syl / T::of_usize(ns) } else { T::zero() },
            phon_targets: np,
            syl_targets: ns,
        }
    }

    /// Objective value and its gradient with respect to every parameter.
    pub(crate) fn objective_and_gradient(
        &self,
        batch: &[EncodedWord],
        config: &ModelConfig<T>,
    ) -> (T, Losses<T>, Vec<T>) {
        let lay = &self.layout;
        let h = lay.hidden;
        let n_layers = lay.lstm.len();
        let use_syl = config.multitask;
        let mut grad = vec![T::zero(); lay.total];

        let np: usize = batch.iter().map(|w| w.n_targets()).sum();
        let ns: usize = if use_syl {
            batch
                .iter()
                .map(|w| w.labels.as_ref().map_or(0, |l| l.len()))
                .sum()
        } else {
            0
        };
        let eta = self.eta();
        let [wp, ws] = loss_weights(eta, config);
        let scale_p = if np > 0 { wp / T::of_usize(np) } else { T::zero() };
        let scale_s = if ns > 0 { ws / T::of_usize(ns) } else { T::zero() };

        let mut sum_p = T::zero();
        let mut sum_s = T::zero();

        // split the gradient buffer by group
        let (g_emb_all, rest) = grad.split_at_mut(lay.embedding.end);
        let g_emb = &mut g_emb_all[lay.embedding.clone()];
        let lstm_end = lay.lstm.last().map_or(lay.embedding.end, |(_, b)| b.end);
        let (g_lstm_all, rest) = rest.split_at_mut(lstm_end - lay.embedding.end);
        let mut g_lstm: Vec<(&mut [T], &mut [T])> = Vec::with_capacity(n_layers);
        {
            let mut remaining = g_lstm_all;
            for (w, b) in &lay.lstm {
                let (gw, r) = remaining.split_at_mut(w.len());
                let (gb, r) = r.split_at_mut(b.len());
                g_lstm.push((gw, gb));
                remaining = r;
            }
        }
        let (g_pw, rest) = rest.split_at_mut(lay.phone_w.len());
        let (g_pb, rest) = rest.split_at_mut(lay.phone_b.len());
        let (g_sw, rest) = rest.split_at_mut(lay.syl_w.len());
        let (g_sb, g_eta) = rest.split_at_mut(lay.syl_b.len());

        let pw = &self.params[lay.phone_w.clone()];
        let sw = &self.params[lay.syl_w.clone()];

        for word in batch {
            let steps = self.run(&word.ids);
            let labels = word.labels.as_ref().filter(|_| use_syl);
            let mut dh_next = vec![vec![T::zero(); h]; n_layers];
            let mut dc_next = vec![vec![T::zero(); h]; n_layers];
            let mut dlogits = vec![T::zero(); lay.vocab];
            let mut dsyl = vec![T::zero(); N_CONSTITUENTS];

            for t in (0..steps.len()).rev() {
                let step = &steps[t];
                let target = word.ids.get(t).copied().unwrap_or(Vocabulary::EOS_ID);
                sum_p -= step.phone_probs[target].ln();
                for (d, &p) in dlogits.iter_mut().zip(&step.phone_probs) {
                    *d = p * scale_p;
                }
                dlogits[target] -= scale_p;

                let mut dh = dh_next[n_layers - 1].clone();
                affine_backward(pw, &step.h_top, &dlogits, g_pw, g_pb, &mut dh);

                if let Some(&lab) = labels.and_then(|l| l.get(t)) {
                    sum_s -= step.syl_probs[lab].ln();
                    for (d, &p) in dsyl.iter_mut().zip(&step.syl_probs) {
                        *d = p * scale_s;
                    }
                    dsyl[lab] -= scale_s;
                    affine_backward(sw, &step.h_top, &dsyl, g_sw, g_sb, &mut dh);
                }

                for l in (0..n_layers).rev() {
                    if l < n_layers - 1 {
                        for (a, &b) in dh.iter_mut().zip(&dh_next[l]) {
                            *a += b;
                        }
                    }
                    let cache = &step.layers[l];
                    let g = &cache.gates;
                    let mut dz = vec![T::zero(); 4 * h];
                    for j in 0..h {
                        let (i_g, f_g, g_g, o_g) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                        let tc = cache.tanh_c[j];
                        let d_o = dh[j] * tc;
                        let dc = dh[j] * o_g * (T::one() - tc * tc) + dc_next[l][j];
                        dz[j] = dc * g_g * i_g * (T::one() - i_g);
                        dz[h + j] = dc * cache.c_prev[j] * f_g * (T::one() - f_g);
                        dz[2 * h + j] = dc * i_g * (T::one() - g_g * g_g);
                        dz[3 * h + j] = d_o * o_g * (T::one() - o_g);
                        dc_next[l][j] = dc * f_g;
                    }
                    let (wr, _) = &lay.lstm[l];
                    let mut dxh = vec![T::zero(); cache.xh.len()];
                    let (gw, gb) = &mut g_lstm[l];
                    affine_backward(&self.params[wr.clone()], &cache.xh, &dz, gw, gb, &mut dxh);
                    let in_dim = lay.input_dim(l);
                    dh_next[l].copy_from_slice(&dxh[in_dim..]);
                    if l == 0 {
                        let sym = if t == 0 { Vocabulary::BOS_ID } else { word.ids[t - 1] };
                        let row = &mut g_emb[sym * lay.embed..(sym + 1) * lay.embed];
                        for (r, &d) in row.iter_mut().zip(&dxh[..in_dim]) {
                            *r += d;
                        }
                    } else {
                        dh = dxh[..in_dim].to_vec();
                    }
                }
            }
        }

        let losses = Losses {
            phon: if np > 0 { sum_p / T::of_usize(np) } else { T::zero() },
            syl: if ns > 0 { sum_s / T::of_usize(ns) } else { T::zero() },
            phon_targets: np,
            syl_targets: ns,
        };
        let d_eta = eta_gradient([losses.phon, losses.syl], eta, config);
        g_eta[0] = d_eta[0];
        g_eta[1] = d_eta[1];
        let total = total_loss(losses.phon, losses.syl, eta, config);
        (total, losses, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::super::Weighting;
    use super::*;
    use crate::corpus::LanguageProfile;
    use crate::phoncore::PhoneTable;
    use approx::assert_abs_diff_eq;

    fn word(s: &str) -> LmWord {
        LmWord::from_transcription(s, PhoneTable::builtin(), LanguageProfile::Generic, true).unwrap()
    }

    fn small_config() -> ModelConfig<f64> {
        ModelConfig {
            embedding_dim: 5,
            hidden_dim: 6,
            seed: 11,
            ..Default::default()
        }
    }

    fn model(symbols: &[&str]) -> PhonoLm<f64> {
        PhonoLm::init(Vocabulary::new(symbols.iter().copied()).unwrap(), &small_config()).unwrap()
    }

    #[test]
    fn init_is_deterministic() {
        let a = model(&["a", "t", "k"]);
        let b = model(&["a", "t", "k"]);
        assert_eq!(a, b);
        assert_eq!(a.eta(), [0.0, 0.0]);
        let mut cfg = small_config();
        cfg.seed = 12;
        let c = PhonoLm::init(Vocabulary::new(["a", "t", "k"]).unwrap(), &cfg).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn phone_head_width_is_vocabulary_size() {
        let syms = ["a", "e", "i", "o", "u", "p", "t", "k"];
        let m = model(&syms);
        assert_eq!(m.vocabulary().len(), 10);
        let out = m.forward(&word("pa").tokens).unwrap();
        assert!(out.iter().all(|s| s.phone.len() == 10 && s.constituency.len() == 4));
    }

    #[test]
    fn distributions_are_normalized() {
        let m = model(&["a", "t", "k", "s"]);
        for s in m.forward(&word("taksa").tokens).unwrap() {
            assert_abs_diff_eq!(s.phone.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(s.constituency.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn single_token_word_has_two_steps() {
        let m = model(&["a"]);
        assert_eq!(m.forward(&word("a").tokens).unwrap().len(), 2);
    }

    #[test]
    fn unknown_symbol_is_named() {
        let m = model(&["a"]);
        assert_eq!(
            m.forward(&word("ta").tokens),
            Err(LmError::UnknownSymbol("t".into()))
        );
    }

    #[test]
    fn prefix_distributions_ignore_the_suffix() {
        let m = model(&["a", "t", "k", "s", "i"]);
        let a = m.forward(&word("tatki").tokens).unwrap();
        let b = m.forward(&word("tasit").tokens).unwrap();
        for i in 0..=2 {
            assert_eq!(a[i].phone, b[i].phone);
        }
        assert_ne!(a[3].phone, b[3].phone);
    }

    #[test]
    fn losses_match_a_scalar_recomputation() {
        let m = model(&["a", "t", "k", "s", "i"]);
        let batch = vec![word("tak"), word("sikat")];
        let l = m.losses(&batch).unwrap();
        let mut sum = 0.0;
        let mut n = 0;
        let mut syl_sum = 0.0;
        let mut syl_n = 0;
        for w in &batch {
            let steps = m.forward(&w.tokens).unwrap();
            let labels = w.labels.as_ref().unwrap();
            for (t, s) in steps.iter().enumerate() {
                let target = match w.tokens.get(t) {
                    Some(tok) => m.vocabulary().id(&tok.symbol).unwrap(),
                    None => Vocabulary::EOS_ID,
                };
                sum += -s.phone[target].ln();
                n += 1;
                if let Some(lab) = labels.get(t) {
                    syl_sum += -s.constituency[lab.index()].ln();
                    syl_n += 1;
                }
            }
        }
        assert_eq!((l.phon_targets, l.syl_targets), (10, 8));
        assert_abs_diff_eq!(l.phon, sum / n as f64, epsilon = 1e-12);
        assert_abs_diff_eq!(l.syl, syl_sum / syl_n as f64, epsilon = 1e-12);
        // the log-probability path agrees with the distribution path
        let lp: f64 = batch.iter().map(|w| m.log_prob(w).unwrap()).sum();
        assert_abs_diff_eq!(-lp / 10.0, l.phon, epsilon = 1e-12);
    }

    #[test]
    fn uniform_model_has_log_v_loss() {
        let mut m = model(&["a", "t", "k", "s", "i", "u"]);
        let r = m.layout.phone_w.start..m.layout.phone_b.end;
        m.params[r].iter_mut().for_each(|p| *p = 0.0);
        let l = m.losses(&[word("tak"), word("su")]).unwrap();
        assert_abs_diff_eq!(l.phon, (8.0f64).ln(), epsilon = 1e-12);
    }

    #[test]
    fn confident_correct_model_has_near_zero_loss() {
        // One phone "a"; bias the head hard toward the right target at every
        // step of the word "a": step 0 predicts a, step 1 predicts EOS.
        let mut m = model(&["a"]);
        let lay = m.layout.clone();
        m.params[lay.phone_w.clone()].iter_mut().for_each(|p| *p = 0.0);
        let a = m.vocabulary().id("a").unwrap();
        // separate the two top states along their difference
        let h_bos = m.run(&[])[0].h_top.clone();
        let h_a = m.run(&[a])[1].h_top.clone();
        let diff: Vec<f64> = h_a.iter().zip(&h_bos).map(|(x, y)| x - y).collect();
        let scale = 1e4 / diff.iter().map(|d| d * d).sum::<f64>();
        for (j, d) in diff.iter().enumerate() {
            m.params[lay.phone_w.start + a * lay.hidden + j] = -d * scale;
            m.params[lay.phone_w.start + Vocabulary::EOS_ID * lay.hidden + j] = d * scale;
        }
        let mid: Vec<f64> = h_a.iter().zip(&h_bos).map(|(x, y)| 0.5 * (x + y)).collect();
        let offset: f64 = mid.iter().zip(&diff).map(|(m, d)| m * d).sum::<f64>() * scale;
        m.params[lay.phone_b.start + a] = offset;
        m.params[lay.phone_b.start + Vocabulary::EOS_ID] = -offset;
        m.params[lay.phone_b.start + Vocabulary::BOS_ID] = -1e4;
        let l = m.losses(&[LmWord::new(word("a").tokens)]).unwrap();
        assert!(l.phon < 1e-9, "{}", l.phon);
    }

    #[test]
    fn gradient_path_reports_same_losses() {
        let m = model(&["a", "t", "k", "s", "i"]);
        let batch = vec![word("tak"), word("sikat")];
        let enc = encode_all(&batch, &m.vocab).unwrap();
        let cfg = ModelConfig {
            multitask: true,
            weighting: Weighting::Uncertainty,
            ..small_config()
        };
        let (total, l, g) = m.objective_and_gradient(&enc, &cfg);
        let plain = m.losses(&batch).unwrap();
        assert_abs_diff_eq!(l.phon, plain.phon, epsilon = 1e-12);
        assert_abs_diff_eq!(l.syl, plain.syl, epsilon = 1e-12);
        assert_abs_diff_eq!(total, 0.5 * (plain.phon + plain.syl), epsilon = 1e-12);
        assert_eq!(g.len(), m.n_params());
    }

    #[test]
    fn deeper_stacks_run() {
        let cfg = ModelConfig {
            layers: 2,
            ..small_config()
        };
        let m = PhonoLm::<f64>::init(Vocabulary::new(["a", "t"]).unwrap(), &cfg).unwrap();
        assert_eq!(m.layers(), 2);
        let l = m.losses(&[word("tat")]).unwrap();
        assert!(l.phon.is_finite());
    }

    #[test]
    fn single_precision_model() {
        let cfg = ModelConfig::<f32> {
            embedding_dim: 4,
            hidden_dim: 4,
            ..Default::default()
        };
        let m = PhonoLm::<f32>::init(Vocabulary::new(["a", "t"]).unwrap(), &cfg).unwrap();
        let out = m.forward(&word("ta").tokens).unwrap();
        assert!((out[0].phone.iter().sum::<f32>() - 1.0).abs() < 1e-5);
    }
}
