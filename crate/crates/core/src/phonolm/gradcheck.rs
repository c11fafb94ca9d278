//! Finite-difference validation of the hand-written backward pass.

use serde::Serialize;

use super::model::PhonoLm;
use super::{encode_all, LmError, LmWord, ModelConfig};

const STEP: f64 = 1e-5;
const FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    /// Worst group error, each group scored as
    /// `max|g_a − g_n| / max(max|g_a|, max|g_n|, 1e-8)`.
    pub max_rel_error: f64,
    pub per_group: Vec<(String, f64)>,
    /// Worst single-entry ratio. Entries whose gradient is near the
    /// finite-difference noise floor (about 1e-10 here) dominate it.
    pub max_entry_error: f64,
    pub n_params: usize,
}

/// Compares the analytic gradient of the training objective to central
/// differences on every parameter, including the two log-variances.
pub fn gradient_check(
    model: &PhonoLm<f64>,
    batch: &[LmWord],
    config: &ModelConfig<f64>,
) -> Result<GradCheckReport, LmError> {
    gradient_check_with(model, batch, config, |_| {})
}

/// As [`gradient_check`], but lets `tamper` edit the analytic gradient first.
pub fn gradient_check_with(
    model: &PhonoLm<f64>,
    batch: &[LmWord],
    config: &ModelConfig<f64>,
    tamper: impl FnOnce(&mut [f64]),
) -> Result<GradCheckReport, LmError> {
    if config.multitask && batch.iter().any(|w| w.labels.is_none()) {
        return Err(LmError::MissingLabels);
    }
    let enc = encode_all(batch, &model.vocab)?;
    let (_, _, mut analytic) = model.objective_and_gradient(&enc, config);
    tamper(&mut analytic);

    let mut probe = model.clone();
    let numeric: Vec<f64> = (0..analytic.len())
        .map(|i| {
            let orig = probe.params[i];
            probe.params[i] = orig + STEP;
            let up = probe.objective(&enc, config);
            probe.params[i] = orig - STEP;
            let down = probe.objective(&enc, config);
            probe.params[i] = orig;
            (up - down) / (2.0 * STEP)
        })
        .collect();

    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let per_group: Vec<(String, f64)> = model
        .param_groups()
        .into_iter()
        .map(|(name, r)| {
            let (ga, gn) = (&analytic[r.clone()], &numeric[r]);
            let diff = ga.iter().zip(gn).fold(0.0f64, |m, (a, n)| m.max((a - n).abs()));
            (name, diff / max_abs(ga).max(max_abs(gn)).max(FLOOR))
        })
        .collect();
    let max_entry_error = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(FLOOR))
        .fold(0.0, f64::max);
    Ok(GradCheckReport {
        max_rel_error: per_group.iter().map(|g| g.1).fold(0.0, f64::max),
        per_group,
        max_entry_error,
        n_params: analytic.len(),
    })
}
