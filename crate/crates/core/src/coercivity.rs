//! Quadratic forms of kernel matrices and their coercivity in the weak
//! Riesz norm of the control primitive.

use crate::error::{Error, Result};
use crate::kernel::{assemble_k0, midpoint_nodes, KernelMatrix};
use crate::linalg::{cholesky, generalized_eigenvalues, symmetric_eigenvalues, Matrix};
use crate::scalar::Real;
use crate::spectral::{plus_cell_matrix, reflected_plus_cell_matrix, riesz_cell_matrix, Control};

/// Gram matrix `P^T S P` of the Riesz form `int int |x-y|^{-1/2} U(x) U(y)`
/// over piecewise-constant controls on `m` cells of `(0,1)`, where `P` maps
/// cell values to cell averages of the primitive (`U(0) = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct GramOperator<T> {
    matrix: Matrix<T>,
}

/// Cell values to cell averages of the primitive: `h` below the diagonal,
/// `h/2` on it.
pub fn primitive_operator<T: Real>(m: usize) -> Matrix<T> {
    let h = T::one() / T::from_usize_lossy(m);
    Matrix::from_fn(m, m, |i, j| {
        if j < i {
            h
        } else if j == i {
            h / T::lit(2.0)
        } else {
            T::zero()
        }
    })
}

impl<T: Real> GramOperator<T> {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("M", "at least one cell required"));
        }
        let h = T::one() / T::from_usize_lossy(m);
        let p = primitive_operator::<T>(m);
        let s = riesz_cell_matrix(m, h);
        let matrix = p.transpose().matmul(&s)?.matmul(&p)?;
        let matrix = Matrix::from_fn(m, m, |i, j| (matrix[(i, j)] + matrix[(j, i)]) / T::lit(2.0));
        Ok(Self { matrix })
    }

    /// Wraps an arbitrary symmetric positive definite matrix.
    pub fn from_matrix(matrix: Matrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.rows(), found: matrix.cols() });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    /// `R(U)` for cell values `u`.
    pub fn form(&self, u: &[T]) -> T {
        self.matrix.quadratic(u)
    }
}

fn check_nodes<T: Real>(k: &KernelMatrix<T>) -> Result<()> {
    let m = k.size();
    let want = midpoint_nodes::<T>(m);
    let tol = T::lit(1e-12);
    if k.nodes().iter().zip(&want).any(|(&a, &b)| (a - b).abs() > tol) {
        return Err(Error::invalid("nodes", "kernel nodes must be the cell midpoints of (0,1)"));
    }
    Ok(())
}

/// `K_ij h^2`, the matrix of the form on cell values.
pub fn weighted_matrix<T: Real>(k: &KernelMatrix<T>) -> Matrix<T> {
    let h = T::one() / T::from_usize_lossy(k.size());
    k.values().scaled(h * h)
}

/// `sum K_ij u_i u_j h^2` with `u_i` the cell averages of `u` on the kernel's cells.
pub fn quadratic_form<T: Real>(k: &KernelMatrix<T>, u: &Control<T>) -> Result<T> {
    check_nodes(k)?;
    if (u.grid().horizon() - T::one()).abs() > T::lit(1e-12) {
        return Err(Error::invalid("u", "control must live on [0, 1]"));
    }
    quadratic_form_cells(k, &u.cell_averages(k.size()))
}

/// The form on explicit cell values.
pub fn quadratic_form_cells<T: Real>(k: &KernelMatrix<T>, cells: &[T]) -> Result<T> {
    if cells.len() != k.size() {
        return Err(Error::DimensionMismatch { expected: k.size(), found: cells.len() });
    }
    Ok(weighted_matrix(k).quadratic(cells))
}

/// Both sides of `<K^0 u, u> = (3/4) int int [(2-x-y)^{-1/2} + |x-y|^{-1/2}] U U`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub gap: T,
}

/// Evaluates both sides on `m` cells; the right side uses closed-form
/// cell-pair integrals of both singular kernels against the primitive.
pub fn k0_identity_check<T: Real>(u: &Control<T>, m: usize) -> Result<IdentityCheck<T>> {
    let k0 = assemble_k0::<T>(m)?;
    let lhs = quadratic_form(&k0, u)?;
    let h = T::one() / T::from_usize_lossy(m);
    let prim = u.primitive_cell_averages(m);
    let minus = riesz_cell_matrix::<T>(m, h).quadratic(&prim);
    let reflected = reflected_plus_cell_matrix::<T>(m).quadratic(&prim);
    let rhs = T::lit(0.75) * (minus + reflected);
    let scale = lhs.abs().max(rhs.abs());
    let gap = if scale == T::zero() { T::zero() } else { (lhs - rhs).abs() / scale };
    Ok(IdentityCheck { lhs, rhs, gap })
}

/// Smallest eigenvalue of the `(x+y)^{-1/2}` cell matrix on `m` cells of `(0,1)`.
pub fn plus_kernel_psd_check<T: Real>(m: usize) -> Result<T> {
    if m == 0 {
        return Err(Error::invalid("M", "at least one cell required"));
    }
    let h = T::one() / T::from_usize_lossy(m);
    let ev = symmetric_eigenvalues(&plus_cell_matrix::<T>(m, h))?;
    Ok(ev[0])
}

/// Gram matrices whose Cholesky pivots spread by more than this (squared) are rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e13;

/// Smallest generalized eigenvalue of `(k_w, gram)`, i.e.
/// `inf_u <K u, u> / R(U)` over piecewise-constant `u`.
pub fn coercivity_constant_weighted<T: Real>(k_w: &Matrix<T>, gram: &GramOperator<T>) -> Result<T> {
    if k_w.rows() != gram.size() || !k_w.is_square() {
        return Err(Error::DimensionMismatch { expected: gram.size(), found: k_w.rows() });
    }
    let l = cholesky(gram.matrix()).map_err(|_| Error::IllConditioned { condition: f64::INFINITY })?;
    let diag: Vec<f64> = (0..l.rows()).map(|i| l[(i, i)].to_f64_lossy()).collect();
    let hi = diag.iter().cloned().fold(0.0, f64::max);
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = (hi / lo).powi(2);
    if !(condition < MAX_GRAM_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    Ok(generalized_eigenvalues(k_w, gram.matrix())?[0])
}

/// [`coercivity_constant_weighted`] for a kernel on the cell midpoints.
pub fn coercivity_constant<T: Real>(k: &KernelMatrix<T>, gram: &GramOperator<T>) -> Result<T> {
    check_nodes(k)?;
    coercivity_constant_weighted(&weighted_matrix(k), gram)
}

/// Positive eigenvalues of the `-|x-y|^{3/2}` operator and their ratios to
/// the asymptotic law `(3 sqrt(2) / (4 pi^2)) n^{-5/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenAsymptotics<T> {
    /// `lambda_1 >= lambda_2 >= ...`, positive part only, up to `n_max`.
    pub eigenvalues: Vec<T>,
    /// `ratios[n-1]` belongs to `lambda_n`.
    pub ratios: Vec<T>,
    /// Number of negative eigenvalues of the discretized operator.
    pub negative_count: usize,
}

impl<T: Real> EigenAsymptotics<T> {
    pub fn ratio(&self, n: usize) -> Option<T> {
        n.checked_sub(1).and_then(|k| self.ratios.get(k).copied())
    }
}

/// `(3 sqrt(2) / (4 pi^2)) n^{-5/2}`.
pub fn asymptotic_eigenvalue<T: Real>(n: usize) -> T {
    T::lit(3.0) * T::SQRT_2() / (T::lit(4.0) * T::PI() * T::PI()) * T::from_usize_lossy(n).powf(T::lit(-2.5))
}

/// Midpoint Nystrom discretization on `resolution` cells.
pub fn eigen_asymptotics<T: Real>(n_max: usize, resolution: usize) -> Result<EigenAsymptotics<T>> {
    if n_max == 0 {
        return Err(Error::invalid("n_max", "at least one eigenvalue required"));
    }
    if resolution < 8 * n_max {
        return Err(Error::invalid("resolution", format!("need at least {} cells for {n_max} eigenvalues", 8 * n_max)));
    }
    let h = T::one() / T::from_usize_lossy(resolution);
    let x = midpoint_nodes::<T>(resolution);
    let a = Matrix::from_fn(resolution, resolution, |i, j| {
        let d = (x[i] - x[j]).abs();
        -d * d.sqrt() * h
    });
    let ev = symmetric_eigenvalues(&a)?;
    let negative_count = ev.iter().filter(|&&v| v < T::zero()).count();
    let eigenvalues: Vec<T> = ev.iter().rev().take_while(|&&v| v > T::zero()).take(n_max).copied().collect();
    let ratios = eigenvalues.iter().enumerate().map(|(k, &v)| v / asymptotic_eigenvalue::<T>(k + 1)).collect();
    Ok(EigenAsymptotics { eigenvalues, ratios, negative_count })
}
