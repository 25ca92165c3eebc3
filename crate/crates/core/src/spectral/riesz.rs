//! Exact cell-pair integrals of the weakly singular kernels `|x-y|^{-1/2}`,
//! `(x+y)^{-1/2}` and `(2-x-y)^{-1/2}` for piecewise-constant densities.

use super::grid::Control;
use crate::linalg::Matrix;
use crate::scalar::Real;

/// `|k+1|^{3/2} - 2|k|^{3/2} + |k-1|^{3/2}`, with a binomial series for large `k`
/// to avoid cancellation.
pub fn second_difference_32<T: Real>(k: usize) -> T {
    let kf = T::from_usize_lossy(k);
    if k == 0 {
        return T::lit(2.0);
    }
    if k >= 20 {
        let inv2 = T::one() / (kf * kf);
        let series = inv2
            * (T::lit(3.0 / 8.0)
                + inv2 * (T::lit(3.0 / 128.0) + inv2 * (T::lit(7.0 / 1024.0) + inv2 * (T::lit(693.0 / 229376.0) + inv2 * T::lit(0.0016365051269531)))));
        return T::lit(2.0) * kf * kf.sqrt() * series;
    }
    let p = |v: T| v * v.sqrt();
    p(kf + T::one()) - T::lit(2.0) * p(kf) + p(kf - T::one())
}

/// Cell matrix of `|x-y|^{-1/2}` on `m` cells of width `h`:
/// `S_ij = (4/3) h^{3/2} d2(|i-j|)`.
pub fn riesz_cell_matrix<T: Real>(m: usize, h: T) -> Matrix<T> {
    let c = T::lit(4.0 / 3.0) * h * h.sqrt();
    let d: Vec<T> = (0..m).map(|k| c * second_difference_32(k)).collect();
    Matrix::from_fn(m, m, |i, j| d[i.abs_diff(j)])
}

/// Cell matrix of `(x+y)^{-1/2}`: `(4/3) h^{3/2} d2(i+j+1)` (zero-based cells).
pub fn plus_cell_matrix<T: Real>(m: usize, h: T) -> Matrix<T> {
    let c = T::lit(4.0 / 3.0) * h * h.sqrt();
    let d: Vec<T> = (0..2 * m).map(|k| c * second_difference_32(k)).collect();
    Matrix::from_fn(m, m, |i, j| d[i + j + 1])
}

/// Cell matrix of `(2-x-y)^{-1/2}` on the unit interval (index-reversed plus kernel).
pub fn reflected_plus_cell_matrix<T: Real>(m: usize) -> Matrix<T> {
    let h = T::one() / T::from_usize_lossy(m);
    let c = T::lit(4.0 / 3.0) * h * h.sqrt();
    let d: Vec<T> = (0..2 * m).map(|k| c * second_difference_32(k)).collect();
    Matrix::from_fn(m, m, |i, j| d[2 * m - 1 - i - j])
}

/// `int int |x-y|^{-1/2} f(x) f(y)` for `f` piecewise constant on equal cells of `(0,1)`.
pub fn riesz_form<T: Real>(cells: &[T]) -> T {
    let m = cells.len();
    if m == 0 {
        return T::zero();
    }
    let h = T::one() / T::from_usize_lossy(m);
    let c = T::lit(4.0 / 3.0) * h * h.sqrt();
    // Toeplitz: sum_k d(k) * sum_i f_i f_{i+k}, doubled off the diagonal.
    let mut total = T::zero();
    for k in 0..m {
        let corr: T = (0..m - k).map(|i| cells[i] * cells[i + k]).sum();
        let w = if k == 0 { T::one() } else { T::lit(2.0) };
        total = total + w * second_difference_32::<T>(k) * corr;
    }
    c * total
}

/// Riesz form of the primitive `U` (with `U(0) = 0`) of a control, `U` taken
/// piecewise constant on the control's own cells:
/// `int int |x-y|^{-1/2} U(x) U(y)` over `(0,T)^2`.
pub fn weak_norm_sq<T: Real>(u: &Control<T>) -> T {
    let n = u.grid().n_t();
    let cells = u.primitive_cell_averages(n);
    // Rescale from the unit interval: cells of width T/n contribute T^{3/2}.
    riesz_form(&cells) * u.grid().horizon() * u.grid().horizon().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_direct_difference() {
        for k in [20usize, 25, 40] {
            let p = |v: f64| v.powf(1.5);
            let direct = p(k as f64 + 1.0) - 2.0 * p(k as f64) + p(k as f64 - 1.0);
            let s: f64 = second_difference_32(k);
            assert!(((s - direct) / s).abs() < 1e-11, "{k}: {s} {direct}");
        }
    }

    #[test]
    fn single_cell_values() {
        let s = riesz_cell_matrix::<f64>(1, 1.0);
        assert!((s[(0, 0)] - 8.0 / 3.0).abs() < 1e-15);
        let p = plus_cell_matrix::<f64>(1, 1.0);
        assert!((p[(0, 0)] - 8.0 / 3.0 * (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((riesz_form(&[1.0f64; 7]) - 8.0 / 3.0).abs() < 1e-13);
    }
}
