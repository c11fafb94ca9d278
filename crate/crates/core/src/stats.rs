//! Pearson and Spearman correlation across dialect sites.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phonolm::ComplexityRow;
use crate::Scalar;

pub const MIN_SITES: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {MIN_SITES} observations, got {0}")]
    TooFew(usize),
    #[error("correlation undefined: a series has zero variance")]
    ZeroVariance,
}

fn check<T>(xs: &[T], ys: &[T]) -> Result<(), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < MIN_SITES {
        return Err(StatsError::TooFew(xs.len()));
    }
    Ok(())
}

fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::of_usize(v.len())
}

/// Sample Pearson correlation.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T, StatsError> {
    check(xs, ys)?;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Err(StatsError::ZeroVariance);
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

/// 1-based ranks; tied values share the average of their positions.
pub fn average_ranks<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("finite values"));
    let mut ranks = vec![T::zero(); v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1
        let avg = T::of_usize(i + j + 2) / T::of(2.0);
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of average ranks.
pub fn spearman<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T, StatsError> {
    check(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub pearson_r: f64,
    pub spearman_rho: f64,
    pub n_sites: usize,
}

/// Correlates bits per phoneme against average word length.
pub fn correlate_dialects(rows: &[ComplexityRow]) -> Result<CorrelationReport, StatsError> {
    let bits: Vec<f64> = rows.iter().map(|r| r.bits_per_phoneme).collect();
    let lengths: Vec<f64> = rows.iter().map(|r| r.avg_word_length).collect();
    Ok(CorrelationReport {
        pearson_r: pearson(&bits, &lengths)?,
        spearman_rho: spearman(&bits, &lengths)?,
        n_sites: rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn perfect_correlations() {
        assert_abs_diff_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(spearman(&[1.0, 2.0, 3.0], &[9.0, 4.0, 1.0]).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn hand_computed_pearson() {
        // deviations (-1.5,-.5,.5,1.5) and (-1.5,.5,-.5,1.5): cov 4, var 5 each
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(r, 4.0 / 5.0, epsilon = 1e-12);
        let r32 = pearson(&[1.0f32, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(r32, 0.8, epsilon = 1e-6);
    }

    #[test]
    fn tied_ranks_are_averaged() {
        assert_eq!(average_ranks(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
        assert_eq!(average_ranks(&[5.0, 1.0, 5.0, 5.0]), vec![3.0, 1.0, 3.0, 3.0]);
        // ranks (1.5,1.5,3) vs (1,2,3): cov 1.5, var 1.5 and 2
        let rho = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(rho, 1.5 / (1.5f64 * 2.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(rho, 0.866, epsilon = 1e-3);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(StatsError::ZeroVariance));
        assert_eq!(spearman(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]), Err(StatsError::ZeroVariance));
        assert_eq!(pearson(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::TooFew(2)));
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]), Err(StatsError::LengthMismatch(3, 2)));
    }

    #[test]
    fn identical_rows_have_no_correlation() {
        let row = ComplexityRow {
            site_id: "A".into(),
            bits_per_phoneme: 2.5,
            avg_word_length: 5.0,
            n_words: 100,
        };
        let rows = vec![row.clone(), row.clone(), row];
        assert_eq!(correlate_dialects(&rows), Err(StatsError::ZeroVariance));
    }

    fn series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (3usize..30).prop_flat_map(|n| {
            (
                prop::collection::vec(-100.0f64..100.0, n),
                prop::collection::vec(-100.0f64..100.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn affine_maps_give_unit_correlation(xs in prop::collection::vec(-100.0f64..100.0, 3..30), a in 0.1f64..10.0, b in -5.0f64..5.0, neg in any::<bool>()) {
            prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-3));
            let a = if neg { -a } else { a };
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let r = pearson(&xs, &ys).unwrap();
            prop_assert!((r - a.signum()).abs() < 1e-9);
        }

        #[test]
        fn symmetric_and_bounded((xs, ys) in series()) {
            if let (Ok(r1), Ok(r2)) = (pearson(&xs, &ys), pearson(&ys, &xs)) {
                prop_assert!((r1 - r2).abs() < 1e-12);
                prop_assert!(r1.abs() <= 1.0);
            }
            if let (Ok(r1), Ok(r2)) = (spearman(&xs, &ys), spearman(&ys, &xs)) {
                prop_assert!((r1 - r2).abs() < 1e-12);
                prop_assert!(r1.abs() <= 1.0);
            }
        }

        #[test]
        fn spearman_ignores_monotone_transforms((xs, ys) in series()) {
            if let Ok(rho) = spearman(&xs, &ys) {
                let tx: Vec<f64> = xs.iter().map(|x| (x / 50.0).exp()).collect();
                let ty: Vec<f64> = ys.iter().map(|y| y * y * y + 3.0 * y).collect();
                prop_assert_eq!(spearman(&tx, &ty).unwrap(), rho);
            }
        }
    }
}
