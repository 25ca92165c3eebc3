//! Small dense linear algebra: Cholesky, symmetric eigenvalues, generalized
//! symmetric-definite pencils.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * c).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = *d + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `x^T A x`.
    pub fn quadratic(&self, x: &[T]) -> T {
        dot(x, &self.matvec(x))
    }

    /// Largest `|A - A^T|` entry.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.data.len(), found: other.data.len() });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: n, found: a.cols() });
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag = diag - l[(j, k)] * l[(j, k)];
        }
        if !(diag > T::zero()) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: diag.to_f64_lossy() });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            let (ri, rj) = (i * n, j * n);
            for k in 0..j {
                s = s - l.data[ri + k] * l.data[rj + k];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn forward_substitute<T: Real>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s = s - l[(i, k)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `L^T x = b` for lower-triangular `L`.
pub fn backward_substitute_transposed<T: Real>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s = s - l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `A x = b` for symmetric positive-definite `A`.
pub fn solve_spd<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let l = cholesky(a)?;
    Ok(backward_substitute_transposed(&l, &forward_substitute(&l, b)))
}

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// Householder reduction to tridiagonal form followed by implicit QL.
pub fn symmetric_eigenvalues<T: Real>(a: &Matrix<T>) -> Result<Vec<T>> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: n, found: a.cols() });
    }
    let (mut d, mut e) = tridiagonalize(a.clone());
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(d)
}

/// Returns diagonal `d` and off-diagonal `e` (with `e[i]` coupling `i` and `i+1`).
fn tridiagonalize<T: Real>(mut a: Matrix<T>) -> (Vec<T>, Vec<T>) {
    let n = a.rows();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let two = T::lit(2.0);
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let col: Vec<T> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let norm = col.iter().map(|&x| x * x).sum::<T>().sqrt();
        d[k] = a[(k, k)];
        if norm == T::zero() {
            e[k] = T::zero();
            continue;
        }
        let alpha = if col[0] > T::zero() { -norm } else { norm };
        let vv = &mut v[..m];
        vv.copy_from_slice(&col);
        vv[0] = vv[0] - alpha;
        let vnorm = vv.iter().map(|&x| x * x).sum::<T>().sqrt();
        e[k] = alpha;
        if vnorm == T::zero() {
            continue;
        }
        for x in vv.iter_mut() {
            *x = *x / vnorm;
        }
        // p = A_sub v
        let pp = &mut p[..m];
        for (ii, pi) in pp.iter_mut().enumerate() {
            let row = &a.data[(k + 1 + ii) * n + k + 1..(k + 1 + ii) * n + n];
            *pi = dot(row, vv);
        }
        let vp = dot(vv, pp);
        for (pi, &vi) in pp.iter_mut().zip(vv.iter()) {
            *pi = *pi - vp * vi;
        }
        for ii in 0..m {
            let (vi, qi) = (vv[ii], pp[ii]);
            let row = &mut a.data[(k + 1 + ii) * n + k + 1..(k + 1 + ii) * n + n];
            for jj in 0..m {
                row[jj] = row[jj] - two * (vi * pp[jj] + qi * vv[jj]);
            }
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2, n - 2)];
        e[n - 2] = a[(n - 1, n - 2)];
    }
    if n >= 1 {
        d[n - 1] = a[(n - 1, n - 1)];
    }
    (d, e)
}

fn tridiagonal_ql<T: Real>(d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::NoConvergence("tridiagonal QL"));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r } else { -r });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Eigenvalues of the pencil `(A, B)` with `B` symmetric positive definite,
/// ascending, via the congruence `L^{-1} A L^{-T}` with `B = L L^T`.
pub fn generalized_eigenvalues<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Vec<T>> {
    let n = a.rows();
    if b.rows() != n || !a.is_square() || !b.is_square() {
        return Err(Error::DimensionMismatch { expected: n, found: b.rows() });
    }
    let l = cholesky(b)?;
    // W = L^{-1} A, column by column of A (A symmetric so rows suffice).
    let mut w = Matrix::zeros(n, n);
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| a[(i, j)]).collect();
        let x = forward_substitute(&l, &col);
        for i in 0..n {
            w[(i, j)] = x[i];
        }
    }
    // C = W L^{-T} = (L^{-1} W^T)^T
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        let x = forward_substitute(&l, w.row(i));
        for j in 0..n {
            c[(i, j)] = x[j];
        }
    }
    // symmetrize away rounding
    let cs = Matrix::from_fn(n, n, |i, j| (c[(i, j)] + c[(j, i)]) * T::lit(0.5));
    symmetric_eigenvalues(&cs)
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub fn rank<T: Real>(a: &Matrix<T>, rel_tol: T) -> usize {
    let mut m = a.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let scale = m.max_abs().max(T::min_positive_value());
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (piv, val) = (r..rows).map(|i| (i, m[(i, c)].abs())).fold((r, T::zero()), |best, x| if x.1 > best.1 { x } else { best });
        if val <= rel_tol * scale {
            continue;
        }
        for j in 0..cols {
            let tmp = m[(r, j)];
            m[(r, j)] = m[(piv, j)];
            m[(piv, j)] = tmp;
        }
        for i in (r + 1)..rows {
            let f = m[(i, c)] / m[(r, c)];
            for j in c..cols {
                let v = m[(r, j)];
                m[(i, j)] = m[(i, j)] - f * v;
            }
        }
        r += 1;
    }
    r
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if x.len() < 2 || x.iter().chain(y).any(|&v| !(v > T::zero())) {
        return Err(Error::invalid("data", "need at least two positive points"));
    }
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let n = T::from_usize_lossy(x.len());
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let sxy: T = lx.iter().zip(&ly).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let sxx: T = lx.iter().map(|&a| (a - mx) * (a - mx)).sum();
    if sxx == T::zero() {
        return Err(Error::invalid("x", "abscissae must not all coincide"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize) -> Matrix<f64> {
        Matrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64)
    }

    #[test]
    fn eigenvalues_of_known_tridiagonal() {
        // second-difference matrix: eigenvalues 2 - 2 cos(k pi/(n+1))
        let n = 12;
        let a = Matrix::from_fn(n, n, |i, j| if i == j { 2.0 } else if i.abs_diff(j) == 1 { -1.0 } else { 0.0 });
        let ev = symmetric_eigenvalues(&a).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - want).abs() < 1e-13, "{k}: {v} vs {want}");
        }
    }

    #[test]
    fn eigenvalues_trace_and_dense_case() {
        let n = 30;
        let a = Matrix::from_fn(n, n, |i, j| ((i * 7 + j * 7 + i * j) % 11) as f64 + if i == j { 3.0 } else { 0.0 });
        let sym = Matrix::from_fn(n, n, |i, j| a[(i, j)] + a[(j, i)]);
        let ev = symmetric_eigenvalues(&sym).unwrap();
        let trace: f64 = (0..n).map(|i| sym[(i, i)]).sum();
        let frob2: f64 = sym.as_slice().iter().map(|v| v * v).sum();
        assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-10);
        assert!((ev.iter().map(|v| v * v).sum::<f64>() - frob2).abs() < 1e-8 * frob2);
    }

    #[test]
    fn cholesky_reconstructs_and_rejects_indefinite() {
        let h = hilbert(6);
        let l = cholesky(&h).unwrap();
        let back = l.matmul(&l.transpose()).unwrap();
        assert!(back.sub(&h).unwrap().max_abs() < 1e-14);
        let mut bad = Matrix::<f64>::identity(3);
        bad[(2, 2)] = -1.0;
        assert!(matches!(cholesky(&bad), Err(Error::NotPositiveDefinite { pivot: 2, .. })));
    }

    #[test]
    fn generalized_pencil_identity() {
        let h = hilbert(5);
        let ev = generalized_eigenvalues(&h.scaled(3.0), &h).unwrap();
        for v in ev {
            assert!((v - 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rank_of_chain() {
        let m = Matrix::from_rows(3, 3, vec![0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(rank(&m, 1e-12), 3);
        let singular = Matrix::from_rows(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(rank(&singular, 1e-12), 1);
    }
}
