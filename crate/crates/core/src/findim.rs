//! Finite-dimensional analogue: a controlled linear state `a` feeding a
//! quadratic drift in `b`,
//!
//! ```text
//! a' = M a + u(t) m,    b' = L b + Q(a, a).
//! ```

use crate::error::{Error, Result};
use crate::linalg::{rank, Matrix};
use crate::scalar::Real;
use crate::special::gauss_legendre;
use crate::spectral::Control;

/// Default RK4 step count.
pub const DEFAULT_STEPS: usize = 4096;

/// Largest `|M| dt` keeping the RK4 local error of the linear part near `1e-10`.
const LINEAR_STEP_LIMIT: f64 = 0.025;

#[derive(Clone, Debug, PartialEq)]
pub struct FinDimSystem<T> {
    m_mat: Matrix<T>,
    m_vec: Vec<T>,
    l_mat: Matrix<T>,
    /// One symmetric `n x n` matrix per component of `b`.
    q: Vec<Matrix<T>>,
}

impl<T: Real> FinDimSystem<T> {
    /// `q[k]` holds the coefficients of `Q_k(a, a) = a^T q[k] a`; each is symmetrized.
    pub fn new(m_mat: Matrix<T>, m_vec: Vec<T>, l_mat: Matrix<T>, q: Vec<Matrix<T>>) -> Result<Self> {
        let n = m_vec.len();
        if m_mat.rows() != n || m_mat.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m_mat.rows() });
        }
        let p = q.len();
        if l_mat.rows() != p || l_mat.cols() != p {
            return Err(Error::DimensionMismatch { expected: p, found: l_mat.rows() });
        }
        let half = T::lit(0.5);
        let q = q
            .into_iter()
            .map(|qk| {
                if qk.rows() != n || qk.cols() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: qk.rows() });
                }
                Ok(Matrix::from_fn(n, n, |i, j| half * (qk[(i, j)] + qk[(j, i)])))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m_mat, m_vec, l_mat, q })
    }

    pub fn state_dim(&self) -> usize {
        self.m_vec.len()
    }

    pub fn drift_dim(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[Matrix<T>] {
        &self.q
    }

    /// `Q(x, y)` with the symmetrized coefficients.
    pub fn q_form(&self, x: &[T], y: &[T]) -> Vec<T> {
        self.q
            .iter()
            .map(|qk| x.iter().zip(qk.matvec(y)).map(|(&a, b)| a * b).sum())
            .collect()
    }

    /// Rank of `[m, M m, ..., M^{n-1} m]`.
    pub fn kalman_rank(&self) -> usize {
        let n = self.state_dim();
        let mut cols = vec![self.m_vec.clone()];
        for _ in 1..n {
            let next = self.m_mat.matvec(cols.last().expect("nonempty"));
            cols.push(next);
        }
        let k = Matrix::from_fn(n, n, |i, j| cols[j][i]);
        rank(&k, T::lit(1e-12))
    }

    fn rhs(&self, a: &[T], b: &[T], u: T) -> (Vec<T>, Vec<T>) {
        let da = self.m_mat.matvec(a).into_iter().zip(&self.m_vec).map(|(v, &mv)| v + u * mv).collect();
        let db = self.l_mat.matvec(b).into_iter().zip(self.q_form(a, a)).map(|(v, q)| v + q).collect();
        (da, db)
    }

    /// Steps needed on `(0, horizon)`: at least `min_steps`, more when `|M|` is large.
    pub fn steps_for(&self, horizon: T, min_steps: usize) -> usize {
        let norm = self.m_mat.frobenius_norm().max(self.l_mat.frobenius_norm());
        let need = (norm * horizon / T::lit(LINEAR_STEP_LIMIT)).ceil().to_usize().unwrap_or(min_steps);
        need.max(min_steps).max(1)
    }
}

/// The chain `a1' = a2, a2' = a3, a3' = u` with a scalar `b` and `L = 0`.
pub fn chain_system<T: Real>(q: Matrix<T>) -> Result<FinDimSystem<T>> {
    let (o, z) = (T::one(), T::zero());
    let m = Matrix::from_rows(3, 3, vec![z, o, z, z, z, o, z, z, z])?;
    FinDimSystem::new(m, vec![z, z, o], Matrix::zeros(1, 1), vec![q])
}

/// The three worked chain examples, by their drift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainExample {
    /// `b' = a2^2 + a1 a3`: `b - a1 a2` is conserved.
    Conservation,
    /// `b' = a3^2`: `b` grows by `int (theta'')^2`.
    SecondDerivativeDrift,
    /// `b' = a2^2`: `b` grows by `int (theta')^2`.
    FirstDerivativeDrift,
}

impl ChainExample {
    pub fn system<T: Real>(self) -> FinDimSystem<T> {
        let mut q = Matrix::zeros(3, 3);
        let (o, half) = (T::one(), T::lit(0.5));
        match self {
            ChainExample::Conservation => {
                q[(1, 1)] = o;
                q[(0, 2)] = half;
                q[(2, 0)] = half;
            }
            ChainExample::SecondDerivativeDrift => q[(2, 2)] = o,
            ChainExample::FirstDerivativeDrift => q[(1, 1)] = o,
        }
        chain_system(q).expect("chain dimensions are consistent")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FinDimTrajectory<T> {
    pub times: Vec<T>,
    pub a: Vec<Vec<T>>,
    pub b: Vec<Vec<T>>,
}

impl<T: Real> FinDimTrajectory<T> {
    pub fn final_a(&self) -> &[T] {
        self.a.last().expect("trajectory holds the initial state")
    }

    pub fn final_b(&self) -> &[T] {
        self.b.last().expect("trajectory holds the initial state")
    }
}

/// Classical RK4 on `steps` uniform steps of `(0, horizon)` with `u` evaluated
/// at the stage times.
pub fn simulate_ab_fn<T: Real>(
    sys: &FinDimSystem<T>,
    u: impl Fn(T) -> T,
    horizon: T,
    steps: usize,
    a0: &[T],
    b0: &[T],
) -> Result<FinDimTrajectory<T>> {
    if a0.len() != sys.state_dim() {
        return Err(Error::DimensionMismatch { expected: sys.state_dim(), found: a0.len() });
    }
    if b0.len() != sys.drift_dim() {
        return Err(Error::DimensionMismatch { expected: sys.drift_dim(), found: b0.len() });
    }
    if !(horizon > T::zero()) || steps == 0 {
        return Err(Error::invalid("horizon", "need a positive horizon and at least one step"));
    }
    let dt = horizon / T::from_usize_lossy(steps);
    let half = T::lit(0.5);
    let axpy = |x: &[T], c: T, d: &[T]| -> Vec<T> { x.iter().zip(d).map(|(&x, &d)| x + c * d).collect() };
    let mut traj = FinDimTrajectory { times: vec![T::zero()], a: vec![a0.to_vec()], b: vec![b0.to_vec()] };
    let (mut a, mut b) = (a0.to_vec(), b0.to_vec());
    for k in 0..steps {
        let t = dt * T::from_usize_lossy(k);
        let (ua, um, ub) = (u(t), u(t + half * dt), u(t + dt));
        let (ka1, kb1) = sys.rhs(&a, &b, ua);
        let (ka2, kb2) = sys.rhs(&axpy(&a, half * dt, &ka1), &axpy(&b, half * dt, &kb1), um);
        let (ka3, kb3) = sys.rhs(&axpy(&a, half * dt, &ka2), &axpy(&b, half * dt, &kb2), um);
        let (ka4, kb4) = sys.rhs(&axpy(&a, dt, &ka3), &axpy(&b, dt, &kb3), ub);
        let sixth = dt / T::lit(6.0);
        for i in 0..a.len() {
            a[i] = a[i] + sixth * (ka1[i] + T::lit(2.0) * (ka2[i] + ka3[i]) + ka4[i]);
        }
        for i in 0..b.len() {
            b[i] = b[i] + sixth * (kb1[i] + T::lit(2.0) * (kb2[i] + kb3[i]) + kb4[i]);
        }
        traj.times.push(if k + 1 == steps { horizon } else { t + dt });
        traj.a.push(a.clone());
        traj.b.push(b.clone());
    }
    Ok(traj)
}

/// [`simulate_ab_fn`] with the linear interpolant of a sampled control; the
/// step count is a multiple of the control's intervals.
pub fn simulate_ab<T: Real>(sys: &FinDimSystem<T>, u: &Control<T>, a0: &[T], b0: &[T]) -> Result<FinDimTrajectory<T>> {
    let horizon = u.grid().horizon();
    let n_t = u.grid().n_t();
    let steps = sys.steps_for(horizon, DEFAULT_STEPS);
    let steps = steps.div_ceil(n_t) * n_t;
    simulate_ab_fn(sys, |t| u.eval(t), horizon, steps, a0, b0)
}

/// `max_t |(b - a1 a2)(t) - (b - a1 a2)(0)|` along the conservation example.
pub fn conservation_check_example1<T: Real>(u: impl Fn(T) -> T, horizon: T, a0: &[T], b0: T) -> Result<T> {
    let sys = ChainExample::Conservation.system::<T>();
    let traj = simulate_ab_fn(&sys, u, horizon, sys.steps_for(horizon, DEFAULT_STEPS), a0, &[b0])?;
    let inv = |a: &[T], b: &[T]| b[0] - a[0] * a[1];
    let start = inv(&traj.a[0], &traj.b[0]);
    Ok(traj.a.iter().zip(&traj.b).fold(T::zero(), |m, (a, b)| m.max((inv(a, b) - start).abs())))
}

/// Polynomial `sum c_k t^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    pub coeffs: Vec<T>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs }
    }

    /// `t^p (T - t)^q`.
    pub fn bump(horizon: T, p: usize, q: usize) -> Self {
        let mut c = vec![T::zero(); p + q + 1];
        // (T - t)^q = sum_j binom(q, j) T^{q-j} (-t)^j
        let mut binom = T::one();
        for j in 0..=q {
            let sign = if j % 2 == 0 { T::one() } else { -T::one() };
            c[p + j] = binom * sign * horizon.powi((q - j) as i32);
            binom = binom * T::from_usize_lossy(q - j) / T::from_usize_lossy(j + 1);
        }
        Self { coeffs: c }
    }

    pub fn eval(&self, t: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * T::from_usize_lossy(k)).collect();
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Outcome of a drift example: the simulated growth of `b` and the weak
/// norm it should equal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftCheck<T> {
    pub increment: T,
    pub weak_norm: T,
    /// `|a(T)|`, zero up to integration error for an admissible profile.
    pub final_a_norm: T,
}

impl<T: Real> DriftCheck<T> {
    pub fn relative_error(&self) -> T {
        if self.weak_norm == T::zero() {
            self.increment.abs()
        } else {
            (self.increment - self.weak_norm).abs() / self.weak_norm.abs()
        }
    }
}

/// Tolerance on `theta, theta', theta''` at both ends.
pub const END_CONDITION_TOL: f64 = 1e-10;

/// Drives the chain from rest with `u = theta'''` and compares the growth of
/// `b` with `int (theta'')^2` (second-derivative drift) or `int (theta')^2`
/// (first-derivative drift), the latter computed by exact Gauss-Legendre quadrature.
pub fn drift_check_examples23<T: Real>(example: ChainExample, theta: &Polynomial<T>, horizon: T) -> Result<DriftCheck<T>> {
    let weak_order = match example {
        ChainExample::SecondDerivativeDrift => 2,
        ChainExample::FirstDerivativeDrift => 1,
        ChainExample::Conservation => return Err(Error::invalid("example", "the conservation example has no drift")),
    };
    let d1 = theta.derivative();
    let d2 = d1.derivative();
    let d3 = d2.derivative();
    let residual = [theta, &d1, &d2]
        .iter()
        .flat_map(|p| [p.eval(T::zero()), p.eval(horizon)])
        .fold(T::zero(), |m, v| m.max(v.abs()));
    if residual > T::lit(END_CONDITION_TOL) {
        return Err(Error::EndConditions { residual: residual.to_f64_lossy() });
    }
    let sys = example.system::<T>();
    let traj = simulate_ab_fn(&sys, |t| d3.eval(t), horizon, sys.steps_for(horizon, DEFAULT_STEPS), &[T::zero(); 3], &[T::zero()])?;
    let weak = if weak_order == 2 { &d2 } else { &d1 };
    let nodes = weak.degree() + 2;
    let (x, w) = gauss_legendre::<T>(nodes);
    let half = horizon * T::lit(0.5);
    let weak_norm = x.iter().zip(&w).map(|(&x, &w)| {
        let v = weak.eval(half * (x + T::one()));
        w * v * v
    }).sum::<T>() * half;
    let final_a_norm = traj.final_a().iter().map(|&v| v * v).sum::<T>().sqrt();
    Ok(DriftCheck { increment: traj.final_b()[0], weak_norm, final_a_norm })
}

/// Pairing of the weak quadratic term at the constant state with a test function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketPairing<T> {
    /// `(1/2) int_0^1 phi_x` by quadrature.
    pub value: T,
    /// `(phi(1) - phi(0)) / 2`.
    pub boundary: T,
    /// `phi(0) = phi(1) = 0` within `1e-12`.
    pub admissible: bool,
}

/// `<Q(1,1), phi> = (1/2) int phi_x` for each test function, given with its derivative.
pub fn lie_bracket_q11_check<T: Real>(tests: &[(&dyn Fn(T) -> T, &dyn Fn(T) -> T)]) -> Vec<BracketPairing<T>> {
    let (x, w) = gauss_legendre::<T>(32);
    let half = T::lit(0.5);
    let panels = 16;
    let width = T::one() / T::from_usize_lossy(panels);
    tests
        .iter()
        .map(|(phi, dphi)| {
            let mut integral = T::zero();
            for p in 0..panels {
                let a = width * T::from_usize_lossy(p);
                for (&xi, &wi) in x.iter().zip(&w) {
                    integral = integral + wi * dphi(a + half * width * (xi + T::one()));
                }
            }
            let value = half * half * width * integral;
            let (p0, p1) = (phi(T::zero()), phi(T::one()));
            let tol = T::lit(1e-12);
            BracketPairing { value, boundary: half * (p1 - p0), admissible: p0.abs() <= tol && p1.abs() <= tol }
        })
        .collect()
}
