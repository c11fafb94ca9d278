//! Small dense kernels for the spline solver.

use crate::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `selfᵀ · other`.
    pub fn t_mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.rows, other.rows);
        let mut out = Mat::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a = self.row(k);
            let b = other.row(k);
            for (i, &aik) in a.iter().enumerate() {
                if aik == T::zero() {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &bkj) in dst.iter_mut().zip(b) {
                    *d += aik * bkj;
                }
            }
        }
        out
    }

    /// `self · other`.
    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in self.row(i).iter().enumerate() {
                if aik == T::zero() {
                    continue;
                }
                for (d, &bkj) in dst.iter_mut().zip(other.row(k)) {
                    *d += aik * bkj;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn t_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![T::zero(); self.cols];
        for (r, &vr) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += a * vr;
            }
        }
        out
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

/// Householder QR of a tall matrix. Returns the full orthogonal factor
/// (`rows × rows`) and the leading `cols × cols` block of R.
pub fn householder_qr<T: Scalar>(a: &Mat<T>) -> (Mat<T>, Mat<T>) {
    let (m, n) = (a.rows, a.cols);
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(n);
    for k in 0..n {
        let norm = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<T>().sqrt();
        let mut v: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
        if norm == T::zero() {
            reflectors.push(vec![T::zero(); m - k]);
            continue;
        }
        let alpha = if v[0] > T::zero() { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        for x in &mut v {
            *x /= vnorm;
        }
        for j in k..n {
            let dot: T = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            for i in k..m {
                r[(i, j)] -= T::of(2.0) * v[i - k] * dot;
            }
        }
        reflectors.push(v);
    }
    // Q = H_0 H_1 ... H_{n-1}, built by applying reflectors to I in reverse.
    let mut q = Mat::identity(m);
    for k in (0..n).rev() {
        let v = &reflectors[k];
        for j in 0..m {
            let dot: T = (k..m).map(|i| v[i - k] * q[(i, j)]).sum();
            if dot == T::zero() {
                continue;
            }
            for i in k..m {
                q[(i, j)] -= T::of(2.0) * v[i - k] * dot;
            }
        }
    }
    let mut r_top = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r_top[(i, j)] = r[(i, j)];
        }
    }
    (q, r_top)
}

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// if a pivot is not positive.
pub fn cholesky<T: Scalar>(a: &Mat<T>) -> Option<Mat<T>> {
    let n = a.rows;
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !d.is_finite() || d <= T::zero() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` in place.
pub fn cholesky_solve<T: Scalar>(l: &Mat<T>, b: &mut [T]) {
    let n = l.rows;
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[(k, i)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Solves the upper triangular system `R x = b` in place.
pub fn upper_solve<T: Scalar>(r: &Mat<T>, b: &mut [T]) {
    let n = r.rows;
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= r[(i, k)] * b[k];
        }
        b[i] = s / r[(i, i)];
    }
}
