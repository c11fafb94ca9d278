//! Lattice evaluation of a fitted surface for contour plotting.

use serde::Serialize;

use super::{GeoError, TpsFit};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BBox<T> {
    pub min: [T; 2],
    pub max: [T; 2],
}

impl<T: Scalar> BBox<T> {
    pub fn of_points(points: &[[T; 2]]) -> Option<Self> {
        let first = *points.first()?;
        Some(points.iter().fold(
            Self {
                min: first,
                max: first,
            },
            |b, p| Self {
                min: [b.min[0].min(p[0]), b.min[1].min(p[1])],
                max: [b.max[0].max(p[0]), b.max[1].max(p[1])],
            },
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint<T> {
    pub longitude: T,
    pub latitude: T,
    pub value: T,
    pub inside_hull: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceGrid<T> {
    pub nx: usize,
    pub ny: usize,
    /// Latitude-major: row `j * nx + i` is longitude step `i`, latitude step `j`.
    pub rows: Vec<GridPoint<T>>,
    /// The site hull has zero area, so every point is outside.
    pub degenerate_hull: bool,
}

impl<T: Scalar> SurfaceGrid<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("longitude,latitude,value,inside_hull\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.longitude, r.latitude, r.value, r.inside_hull
            ));
        }
        out
    }

    /// Grid point with the smallest value, optionally restricted to the hull.
    pub fn argmin(&self, inside_only: bool) -> Option<&GridPoint<T>> {
        self.rows
            .iter()
            .filter(|r| !inside_only || r.inside_hull)
            .min_by(|a, b| a.value.partial_cmp(&b.value).expect("finite surface"))
    }
}

fn cross<T: Scalar>(o: [T; 2], a: [T; 2], b: [T; 2]) -> T {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull in counter-clockwise order (monotone chain). Collinear points
/// are dropped, so a degenerate set yields fewer than three vertices.
pub fn convex_hull<T: Scalar>(points: &[[T; 2]]) -> Vec<[T; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .expect("finite")
            .then(a[1].partial_cmp(&b[1]).expect("finite"))
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[T; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[T; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero()
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn hull_area<T: Scalar>(hull: &[[T; 2]]) -> T {
    if hull.len() < 3 {
        return T::zero();
    }
    let mut a = T::zero();
    for i in 0..hull.len() {
        let (p, q) = (hull[i], hull[(i + 1) % hull.len()]);
        a += p[0] * q[1] - q[0] * p[1];
    }
    a.abs() / T::of(2.0)
}

fn inside<T: Scalar>(hull: &[[T; 2]], p: [T; 2], tol: T) -> bool {
    (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], p) >= -tol)
}

/// Evaluates the fit on an `nx × ny` lattice spanning `bbox` and marks the
/// points outside the convex hull of the fitted sites.
pub fn surface_grid<T: Scalar>(
    fit: &TpsFit<T>,
    bbox: BBox<T>,
    resolution: (usize, usize),
) -> Result<SurfaceGrid<T>, GeoError> {
    let (nx, ny) = resolution;
    if nx < 2 || ny < 2 {
        return Err(GeoError::Resolution(nx, ny));
    }
    let sites = fit.sites();
    let hull = convex_hull(&sites);
    let span = (bbox.max[0] - bbox.min[0]).max(bbox.max[1] - bbox.min[1]);
    let degenerate_hull = hull.len() < 3 || hull_area(&hull) <= T::of(1e-12) * span * span;
    if degenerate_hull {
        log::warn!("site hull has zero area; every grid point is marked outside");
    }
    let tol = T::of(1e-9) * span.max(T::one()) * span.max(T::one());

    let step = |lo: T, hi: T, k: usize, n: usize| lo + (hi - lo) * T::of_usize(k) / T::of_usize(n - 1);
    let mut rows = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let lat = step(bbox.min[1], bbox.max[1], j, ny);
        for i in 0..nx {
            let lon = step(bbox.min[0], bbox.max[0], i, nx);
            let p = [lon, lat];
            rows.push(GridPoint {
                longitude: lon,
                latitude: lat,
                value: fit.value_at(p),
                inside_hull: !degenerate_hull && inside(&hull, p, tol),
            });
        }
    }
    Ok(SurfaceGrid {
        nx,
        ny,
        rows,
        degenerate_hull,
    })
}
