//! Bivariate thin plate spline smoothing over site coordinates.
//!
//! The fitted surface is
//!
//! ```text
//! f(p) = Σ_i δ_i η(‖p − c_i‖) + β₀ + β₁ x + β₂ y,   η(r) = r² log r
//! ```
//!
//! with side conditions `Tᵀδ = 0` (`T = [1, x, y]`), minimizing
//! `‖y − f‖² + λ δᵀEδ`. The side conditions are eliminated with the trailing
//! columns `Q₂` of a QR factorization of `T`, leaving the symmetric positive
//! definite system `(Q₂ᵀEQ₂ + λ I) z = Q₂ᵀy`, `δ = Q₂z`. The effective degrees
//! of freedom are `3 + tr((Q₂ᵀEQ₂ + λI)⁻¹ Q₂ᵀEQ₂)`.
//!
//! Coordinates are centred on their mean and divided by one shared scale
//! (root mean of the two axis variances), which keeps the aspect ratio and
//! makes fits invariant to rotation. Exactly duplicated sites are merged into
//! one point carrying the mean response and the duplicate count as weight.

mod grid;
pub mod linalg;

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::Scalar;
use linalg::{cholesky, cholesky_solve, householder_qr, upper_solve, Mat};

pub use grid::{convex_hull, surface_grid, BBox, GridPoint, SurfaceGrid};

/// Minimum number of distinct sites.
pub const MIN_POINTS: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("need at least {MIN_POINTS} distinct sites, got {0}")]
    TooFewPoints(usize),
    #[error("{points} points but {values} values")]
    LengthMismatch { points: usize, values: usize },
    #[error("non-finite coordinate or value at index {0}")]
    NonFinite(usize),
    #[error("smoothing parameter must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("sites are collinear; the planar part of the surface is not identifiable")]
    Degenerate,
    #[error("penalized system is singular at lambda = {0}")]
    Singular(f64),
    #[error("smoothing parameter grid is empty")]
    EmptyGrid,
    #[error("no smoothing parameter in the grid gave a fit")]
    AllFitsFailed,
    #[error("grid resolution must be at least 2 per axis, got {0}x{1}")]
    Resolution(usize, usize),
}

/// Thin plate spline radial basis, `r² log r` with `η(0) = 0`.
pub fn tps_basis<T: Scalar>(r: T) -> T {
    if r <= T::zero() {
        T::zero()
    } else {
        r * r * r.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoordTransform<T> {
    pub center: [T; 2],
    pub scale: T,
}

impl<T: Scalar> CoordTransform<T> {
    pub fn apply(&self, p: [T; 2]) -> [T; 2] {
        [
            (p[0] - self.center[0]) / self.scale,
            (p[1] - self.center[1]) / self.scale,
        ]
    }

    pub fn invert(&self, q: [T; 2]) -> [T; 2] {
        [
            q[0] * self.scale + self.center[0],
            q[1] * self.scale + self.center[1],
        ]
    }
}

fn dist<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TpsFit<T> {
    /// Distinct sites in transformed coordinates.
    pub centers: Vec<[T; 2]>,
    /// Number of observations merged into each center.
    pub weights: Vec<T>,
    pub delta: Vec<T>,
    /// Intercept, x and y coefficients in transformed coordinates.
    pub beta: [T; 3],
    pub lambda: T,
    pub edf: T,
    pub rss: T,
    pub tss: T,
    pub adj_r2: T,
    pub gcv: T,
    /// Number of observations, counting duplicates.
    pub n: usize,
    pub transform: CoordTransform<T>,
}

impl<T: Scalar> TpsFit<T> {
    fn eval_transformed(&self, q: [T; 2]) -> T {
        let radial: T = self
            .centers
            .iter()
            .zip(&self.delta)
            .map(|(&c, &d)| d * tps_basis(dist(q, c)))
            .sum();
        radial + self.beta[0] + self.beta[1] * q[0] + self.beta[2] * q[1]
    }

    /// Surface value at raw (longitude, latitude).
    pub fn value_at(&self, p: [T; 2]) -> T {
        self.eval_transformed(self.transform.apply(p))
    }

    /// Raw site coordinates.
    pub fn sites(&self) -> Vec<[T; 2]> {
        self.centers.iter().map(|&c| self.transform.invert(c)).collect()
    }

    /// Σδ, Σδx, Σδy, which vanish for a valid fit.
    pub fn side_conditions(&self) -> [T; 3] {
        let mut s = [T::zero(); 3];
        for (c, &d) in self.centers.iter().zip(&self.delta) {
            s[0] += d;
            s[1] += d * c[0];
            s[2] += d * c[1];
        }
        s
    }
}

pub fn evaluate<T: Scalar>(fit: &TpsFit<T>, queries: &[[T; 2]]) -> Vec<T> {
    queries.iter().map(|&q| fit.value_at(q)).collect()
}

/// Precomputed pieces shared by fits of one dataset at different λ.
#[derive(Debug, Clone)]
pub struct TpsProblem<T> {
    transform: CoordTransform<T>,
    centers: Vec<[T; 2]>,
    weights: Vec<T>,
    group_means: Vec<T>,
    values: Vec<T>,
    group_of: Vec<usize>,
    e: Mat<T>,
    q1: Mat<T>,
    q2: Mat<T>,
    r: Mat<T>,
    /// Q₂ᵀEQ₂
    b: Mat<T>,
    /// Q₂ᵀW⁻¹Q₂
    g: Mat<T>,
    tss: T,
}

impl<T: Scalar> TpsProblem<T> {
    pub fn new(points: &[[T; 2]], values: &[T]) -> Result<Self, GeoError> {
        if points.len() != values.len() {
            return Err(GeoError::LengthMismatch {
                points: points.len(),
                values: values.len(),
            });
        }
        if let Some(i) = (0..points.len())
            .find(|&i| !(points[i][0].is_finite() && points[i][1].is_finite() && values[i].is_finite()))
        {
            return Err(GeoError::NonFinite(i));
        }

        // merge exact duplicates, keeping first-appearance order
        let key = |p: [T; 2]| {
            let z = |v: T| if v == T::zero() { 0u64 } else { v.f64().to_bits() };
            (z(p[0]), z(p[1]))
        };
        let mut index: HashMap<(u64, u64), usize> = HashMap::new();
        let mut raw_centers: Vec<[T; 2]> = Vec::new();
        let mut sums: Vec<T> = Vec::new();
        let mut weights: Vec<T> = Vec::new();
        let mut group_of = Vec::with_capacity(points.len());
        for (&p, &v) in points.iter().zip(values) {
            let g = *index.entry(key(p)).or_insert_with(|| {
                raw_centers.push(p);
                sums.push(T::zero());
                weights.push(T::zero());
                raw_centers.len() - 1
            });
            sums[g] += v;
            weights[g] += T::one();
            group_of.push(g);
        }
        let m = raw_centers.len();
        if m < MIN_POINTS {
            return Err(GeoError::TooFewPoints(m));
        }
        let group_means: Vec<T> = sums.iter().zip(&weights).map(|(&s, &w)| s / w).collect();

        let nm = T::of_usize(m);
        let cx = raw_centers.iter().map(|c| c[0]).sum::<T>() / nm;
        let cy = raw_centers.iter().map(|c| c[1]).sum::<T>() / nm;
        let var = |f: &dyn Fn(&[T; 2]) -> T| raw_centers.iter().map(|c| f(c) * f(c)).sum::<T>() / nm;
        let vx = var(&|c| c[0] - cx);
        let vy = var(&|c| c[1] - cy);
        let scale = ((vx + vy) / T::of(2.0)).sqrt();
        if !scale.is_finite() || scale <= T::zero() {
            return Err(GeoError::Degenerate);
        }
        let transform = CoordTransform {
            center: [cx, cy],
            scale,
        };
        let centers: Vec<[T; 2]> = raw_centers.iter().map(|&c| transform.apply(c)).collect();

        let mut e = Mat::zeros(m, m);
        for i in 0..m {
            for j in i + 1..m {
                let v = tps_basis(dist(centers[i], centers[j]));
                e[(i, j)] = v;
                e[(j, i)] = v;
            }
        }
        let mut t = Mat::zeros(m, 3);
        for (i, c) in centers.iter().enumerate() {
            t[(i, 0)] = T::one();
            t[(i, 1)] = c[0];
            t[(i, 2)] = c[1];
        }
        let (q, r) = householder_qr(&t);
        let r00 = r[(0, 0)].abs();
        if (0..3).any(|k| r[(k, k)].abs() <= T::of(1e-10) * r00.max(T::one())) {
            return Err(GeoError::Degenerate);
        }
        let mut q1 = Mat::zeros(m, 3);
        let mut q2 = Mat::zeros(m, m - 3);
        for i in 0..m {
            for j in 0..m {
                if j < 3 {
                    q1[(i, j)] = q[(i, j)];
                } else {
                    q2[(i, j - 3)] = q[(i, j)];
                }
            }
        }
        let b = q2.t_mul(&e.mul(&q2));
        let mut q2w = q2.clone();
        for i in 0..m {
            let inv = T::one() / weights[i];
            for j in 0..m - 3 {
                q2w[(i, j)] *= inv;
            }
        }
        let g = q2.t_mul(&q2w);

        let mean = values.iter().copied().sum::<T>() / T::of_usize(values.len());
        let tss = values.iter().map(|&v| (v - mean) * (v - mean)).sum();

        Ok(Self {
            transform,
            centers,
            weights,
            group_means,
            values: values.to_vec(),
            group_of,
            e,
            q1,
            q2,
            r,
            b,
            g,
            tss,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn fit(&self, lambda: T) -> Result<TpsFit<T>, GeoError> {
        if !(lambda > T::zero() && lambda.is_finite()) {
            return Err(GeoError::BadLambda(lambda.f64()));
        }
        let m = self.centers.len();
        let k = m - 3;
        let mut kmat = self.b.clone();
        for (kv, &gv) in kmat.data.iter_mut().zip(&self.g.data) {
            *kv += lambda * gv;
        }
        let l = cholesky(&kmat).ok_or(GeoError::Singular(lambda.f64()))?;

        let mut z = self.q2.t_mul_vec(&self.group_means);
        cholesky_solve(&l, &mut z);
        let delta = self.q2.mul_vec(&z);

        let e_delta = self.e.mul_vec(&delta);
        let resid_plane: Vec<T> = (0..m)
            .map(|i| self.group_means[i] - e_delta[i] - lambda * delta[i] / self.weights[i])
            .collect();
        let mut beta_v = self.q1.t_mul_vec(&resid_plane);
        upper_solve(&self.r, &mut beta_v);
        let beta = [beta_v[0], beta_v[1], beta_v[2]];

        let fitted: Vec<T> = (0..m)
            .map(|i| {
                let c = self.centers[i];
                e_delta[i] + beta[0] + beta[1] * c[0] + beta[2] * c[1]
            })
            .collect();
        let rss: T = self
            .values
            .iter()
            .zip(&self.group_of)
            .map(|(&y, &g)| (y - fitted[g]) * (y - fitted[g]))
            .sum();

        let mut trace = T::zero();
        let mut col = vec![T::zero(); k];
        for j in 0..k {
            // B is symmetric, so row j is column j
            col.copy_from_slice(self.b.row(j));
            cholesky_solve(&l, &mut col);
            trace += col[j];
        }
        let edf = T::of(3.0) + trace;

        let n = T::of_usize(self.n());
        let resid_df = n - edf;
        let gcv = if resid_df > T::of(1e-9) {
            n * rss / (resid_df * resid_df)
        } else {
            T::infinity()
        };
        let adj_r2 = if resid_df > T::zero() && n > T::one() {
            T::one() - (rss / resid_df) / (self.tss / (n - T::one()))
        } else if rss == T::zero() {
            T::one()
        } else {
            T::neg_infinity()
        };

        Ok(TpsFit {
            centers: self.centers.clone(),
            weights: self.weights.clone(),
            delta,
            beta,
            lambda,
            edf,
            rss,
            tss: self.tss,
            adj_r2,
            gcv,
            n: self.n(),
            transform: self.transform,
        })
    }
}

/// Fits a thin plate spline at a fixed smoothing parameter.
pub fn fit_tps<T: Scalar>(points: &[[T; 2]], values: &[T], lambda: T) -> Result<TpsFit<T>, GeoError> {
    TpsProblem::new(points, values)?.fit(lambda)
}

/// `log10 λ ∈ {−6, −5.5, …, 6}`.
pub fn default_lambda_grid<T: Scalar>() -> Vec<T> {
    (0..=24).map(|k| T::of(10f64.powf(-6.0 + 0.5 * k as f64))).collect()
}

#[derive(Debug, Clone)]
pub struct GcvSelection<T> {
    pub lambda: T,
    /// `(λ, GCV(λ))` for every λ that produced a fit.
    pub curve: Vec<(T, T)>,
    pub fit: TpsFit<T>,
}

/// Picks the λ minimizing `n·RSS / (n − edf)²`. Scores equal to the minimum
/// up to rounding (relative to the response variance) count as ties, which go
/// to the larger λ.
pub fn gcv_select<T: Scalar>(
    points: &[[T; 2]],
    values: &[T],
    grid: &[T],
) -> Result<GcvSelection<T>, GeoError> {
    if grid.is_empty() {
        return Err(GeoError::EmptyGrid);
    }
    if let Some(&bad) = grid.iter().find(|&&l| !(l > T::zero() && l.is_finite())) {
        return Err(GeoError::BadLambda(bad.f64()));
    }
    let problem = TpsProblem::new(points, values)?;
    let fits: Vec<TpsFit<T>> = grid
        .iter()
        .filter_map(|&lambda| match problem.fit(lambda) {
            Ok(f) => Some(f),
            Err(e) => {
                log::warn!("GCV: skipping lambda {lambda}: {e}");
                None
            }
        })
        .collect();
    let min = fits
        .iter()
        .map(|f| f.gcv)
        .fold(T::infinity(), |a, b| a.min(b));
    if fits.is_empty() || !min.is_finite() {
        return Err(GeoError::AllFitsFailed);
    }
    let noise = T::of(1e-10) * problem.tss / T::of_usize(problem.n());
    let best = fits
        .iter()
        .filter(|f| f.gcv <= min + noise)
        .max_by(|a, b| a.lambda.partial_cmp(&b.lambda).expect("finite lambda"))
        .expect("minimum is attained")
        .clone();
    Ok(GcvSelection {
        lambda: best.lambda,
        curve: fits.iter().map(|f| (f.lambda, f.gcv)).collect(),
        fit: best,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    /// Planar part at the site centroid, the analogue of a GAM intercept.
    pub intercept: f64,
    /// Planar part in raw coordinates: `a + b·lon + c·lat`.
    pub plane_origin: f64,
    pub plane_longitude: f64,
    pub plane_latitude: f64,
    pub edf: f64,
    pub adj_r2: f64,
    pub rss: f64,
    pub lambda: f64,
    pub gcv: f64,
    pub n: usize,
}

pub fn fit_summary<T: Scalar>(fit: &TpsFit<T>) -> FitSummary {
    let s = fit.transform.scale;
    let [cx, cy] = fit.transform.center;
    let slope_x = fit.beta[1] / s;
    let slope_y = fit.beta[2] / s;
    FitSummary {
        intercept: fit.beta[0].f64(),
        plane_origin: (fit.beta[0] - slope_x * cx - slope_y * cy).f64(),
        plane_longitude: slope_x.f64(),
        plane_latitude: slope_y.f64(),
        edf: fit.edf.f64(),
        adj_r2: fit.adj_r2.f64(),
        rss: fit.rss.f64(),
        lambda: fit.lambda.f64(),
        gcv: fit.gcv.f64(),
        n: fit.n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Least-squares plane through the data via the 3x3 normal equations.
    fn ols_plane(points: &[[f64; 2]], values: &[f64]) -> [f64; 3] {
        let mut a = [[0.0; 3]; 3];
        let mut b = [0.0; 3];
        for (p, &y) in points.iter().zip(values) {
            let row = [1.0, p[0], p[1]];
            for i in 0..3 {
                b[i] += row[i] * y;
                for j in 0..3 {
                    a[i][j] += row[i] * row[j];
                }
            }
        }
        // Cramer's rule
        let det = |m: [[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d = det(a);
        let mut out = [0.0; 3];
        for k in 0..3 {
            let mut m = a;
            for i in 0..3 {
                m[i][k] = b[i];
            }
            out[k] = det(m) / d;
        }
        out
    }

    fn scattered(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| [rng.gen_range(3.0..7.0), rng.gen_range(50.0..53.5)])
            .collect()
    }

    fn raw_plane(fit: &TpsFit<f64>) -> [f64; 3] {
        let s = fit_summary(fit);
        [s.plane_origin, s.plane_longitude, s.plane_latitude]
    }

    #[test]
    fn huge_lambda_gives_ols_plane() {
        let pts = scattered(20, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ys: Vec<f64> = pts
            .iter()
            .map(|p| 1.0 + 0.3 * p[0] - 0.2 * p[1] + 0.1 * (p[0] * p[1]).sin() + rng.gen_range(-0.05..0.05))
            .collect();
        let fit = fit_tps(&pts, &ys, 1e9).unwrap();
        let ols = ols_plane(&pts, &ys);
        let got = raw_plane(&fit);
        for k in 0..3 {
            assert!((got[k] - ols[k]).abs() < 1e-6, "{got:?} vs {ols:?}");
        }
        assert!(fit.delta.iter().map(|d| d * d).sum::<f64>().sqrt() < 1e-6);
        assert_abs_diff_eq!(fit.edf, 3.0, epsilon = 0.01);
    }

    #[test]
    fn tiny_lambda_interpolates() {
        let pts = scattered(20, 3);
        let ys: Vec<f64> = pts.iter().map(|p| (p[0] * 1.7).sin() + p[1].cos()).collect();
        let fit = fit_tps(&pts, &ys, 1e-9).unwrap();
        let fitted = evaluate(&fit, &pts);
        for (f, y) in fitted.iter().zip(&ys) {
            assert!((f - y).abs() < 1e-5);
        }
        assert!(fit.edf > 19.9);
        let sc = fit.side_conditions();
        assert!(sc.iter().all(|s| s.abs() < 1e-8), "{sc:?}");
    }

    #[test]
    fn plane_fit_summary() {
        let pts = scattered(15, 4);
        let ys: Vec<f64> = pts.iter().map(|p| 2.0 - 0.5 * p[0] + 0.25 * p[1]).collect();
        let fit = fit_tps(&pts, &ys, 1e8).unwrap();
        let s = fit_summary(&fit);
        assert_abs_diff_eq!(s.edf, 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.adj_r2, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.plane_longitude, -0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(s.plane_latitude, 0.25, epsilon = 1e-9);
        // the planar part at the site centroid is the mean response
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        assert_abs_diff_eq!(s.intercept, mean, epsilon = 1e-9);
        let cx = pts.iter().map(|p| p[0]).sum::<f64>() / 15.0;
        let cy = pts.iter().map(|p| p[1]).sum::<f64>() / 15.0;
        assert_abs_diff_eq!(fit.value_at([cx, cy]), mean, epsilon = 1e-9);
    }

    #[test]
    fn far_field_is_finite() {
        let pts = scattered(12, 5);
        let ys: Vec<f64> = pts.iter().map(|p| p[0].sin() * p[1].cos()).collect();
        let fit = fit_tps(&pts, &ys, 1e-2).unwrap();
        let v = fit.value_at([5.0 + 40.0, 51.75 + 35.0]);
        assert!(v.is_finite());
    }

    #[test]
    fn errors() {
        let pts = scattered(3, 6);
        assert_eq!(fit_tps(&pts, &[1.0, 2.0, 3.0], 1.0), Err(GeoError::TooFewPoints(3)));
        let line: Vec<[f64; 2]> = (0..6).map(|i| [i as f64, 2.0 * i as f64]).collect();
        assert_eq!(fit_tps(&line, &[1.0; 6], 1.0), Err(GeoError::Degenerate));
        let pts = scattered(6, 7);
        assert!(matches!(fit_tps(&pts, &[1.0; 6], 0.0), Err(GeoError::BadLambda(_))));
        assert!(matches!(fit_tps(&pts, &[1.0; 5], 1.0), Err(GeoError::LengthMismatch { .. })));
        assert!(matches!(gcv_select(&pts, &[1.0; 6], &[]), Err(GeoError::EmptyGrid)));
    }

    #[test]
    fn duplicates_are_merged() {
        let mut pts = scattered(10, 8);
        let mut ys: Vec<f64> = pts.iter().map(|p| p[0] + p[1].sin()).collect();
        pts.push(pts[2]);
        ys.push(ys[2] + 1.0);
        let fit = fit_tps(&pts, &ys, 0.1).unwrap();
        assert_eq!(fit.centers.len(), 10);
        assert_eq!(fit.n, 11);
        assert_eq!(fit.weights[2], 2.0);
        // tiny lambda interpolates the mean of the duplicates
        let fit = fit_tps(&pts, &ys, 1e-9).unwrap();
        assert_abs_diff_eq!(fit.value_at(pts[2]), ys[2] + 0.5, epsilon = 1e-5);
        assert!(fit.edf <= 10.0 + 1e-6);
    }

    #[test]
    fn edf_falls_with_lambda() {
        let pts = scattered(25, 9);
        let ys: Vec<f64> = pts.iter().map(|p| (p[0] * p[1]).sin()).collect();
        let problem = TpsProblem::new(&pts, &ys).unwrap();
        let edfs: Vec<f64> = default_lambda_grid::<f64>()
            .iter()
            .map(|&l| problem.fit(l).unwrap().edf)
            .collect();
        assert!(edfs.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{edfs:?}");
        assert!(edfs.iter().all(|&e| (3.0 - 1e-9..=25.0 + 1e-9).contains(&e)));
    }

    #[test]
    fn smoother_is_linear() {
        let pts = scattered(18, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y1: Vec<f64> = (0..18).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y2: Vec<f64> = (0..18).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y12: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a + b).collect();
        let f = |y: &[f64]| evaluate(&fit_tps(&pts, y, 0.05).unwrap(), &pts);
        let (a, b, c) = (f(&y1), f(&y2), f(&y12));
        for i in 0..18 {
            assert_abs_diff_eq!(a[i] + b[i], c[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn rotation_invariant() {
        let pts = scattered(20, 12);
        let ys: Vec<f64> = pts.iter().map(|p| (p[0] * 0.9).sin() + (p[1] * 1.3).cos()).collect();
        let theta: f64 = 0.7;
        let rot = |p: [f64; 2]| [p[0] * theta.cos() - p[1] * theta.sin(), p[0] * theta.sin() + p[1] * theta.cos()];
        let rpts: Vec<[f64; 2]> = pts.iter().map(|&p| rot(p)).collect();
        let fit = fit_tps(&pts, &ys, 0.01).unwrap();
        let rfit = fit_tps(&rpts, &ys, 0.01).unwrap();
        let queries = scattered(30, 13);
        for q in queries {
            assert_abs_diff_eq!(fit.value_at(q), rfit.value_at(rot(q)), epsilon = 1e-6);
        }
    }

    #[test]
    fn gcv_prefers_smoothest_on_planes() {
        let pts = scattered(16, 14);
        let ys: Vec<f64> = pts.iter().map(|p| 0.4 * p[0] - 0.1 * p[1]).collect();
        let sel = gcv_select(&pts, &ys, &default_lambda_grid()).unwrap();
        assert_eq!(sel.lambda, 1e6);
        assert!(sel.curve.iter().all(|&(_, g)| g < 1e-16));
        let single = gcv_select(&pts, &ys, &[0.3]).unwrap();
        assert_eq!(single.lambda, 0.3);
    }

    #[test]
    fn single_precision_fit() {
        let pts: Vec<[f32; 2]> = scattered(12, 15).iter().map(|p| [p[0] as f32, p[1] as f32]).collect();
        let ys: Vec<f32> = pts.iter().map(|p| p[0].sin() + p[1] * 0.1).collect();
        let fit = fit_tps(&pts, &ys, 0.1f32).unwrap();
        assert!(fit.edf > 3.0 && fit.edf < 12.0);
        assert!(fit.rss.is_finite());
    }
}
