//! Steering the Burgers state to rest by adjoint-gradient optimization, and
//! minimal-energy control of the modes the scalar control can reach.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::burgers::{max_principle_bound, project, random_control, rho_samples, substeps_for, Stepper, BLOW_UP_FACTOR};
use crate::error::{Error, Result};
use crate::linalg::{solve_spd, symmetric_eigenvalues, Matrix};
use crate::scalar::Real;
use crate::spectral::{one_coefficient, solve_heat_spectral, Control, ExpWeights, HeatSource, SineBasis, SpaceGrid, TimeGrid};

/// `J = |y(T)|^2 / 2` and its gradient with respect to the control.
#[derive(Clone, Debug, PartialEq)]
pub struct CostGradient<T> {
    pub cost: T,
    /// `dJ/du_k` for each sample.
    pub sample_gradient: Vec<T>,
    /// `L^2` gradient: sample gradient divided by the trapezoid weights, so
    /// that `dJ[v] = <gradient, v>` in the trapezoid inner product.
    pub gradient: Control<T>,
    pub final_coeffs: Vec<T>,
}

/// Integrator steps per output interval for a control, as the forward solver picks them.
pub fn substeps_for_control<T: Real>(u: &Control<T>, y0: &[T], space: &SpaceGrid<T>) -> usize {
    substeps_for(max_principle_bound(u, y0), u.grid().dt(), space.h())
}

fn check_inputs<T: Real>(y0: &[T], space: &SpaceGrid<T>) -> Result<()> {
    if y0.len() != space.n_x() {
        return Err(Error::DimensionMismatch { expected: space.n_x(), found: y0.len() });
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("y0", "non-finite initial value"));
    }
    Ok(())
}

/// Control value at the start and end of substep `j` of `m` in interval `k`.
fn substep_values<T: Real>(samples: &[T], k: usize, j: usize, m: usize) -> (T, T) {
    let (ua, ub) = (samples[k], samples[k + 1]);
    let mf = T::from_usize_lossy(m);
    let a = ua + (ub - ua) * T::from_usize_lossy(j) / mf;
    let b = ua + (ub - ua) * T::from_usize_lossy(j + 1) / mf;
    (a, b)
}

/// Final coefficients after the forward sweep with a fixed substep count.
pub fn forward_final<T: Real>(nu: T, u: &Control<T>, y0: &[T], space: SpaceGrid<T>, substeps: usize) -> Result<Vec<T>> {
    Ok(forward_checkpoints(nu, u, y0, space, substeps, false)?.0)
}

fn forward_checkpoints<T: Real>(
    nu: T,
    u: &Control<T>,
    y0: &[T],
    space: SpaceGrid<T>,
    substeps: usize,
    keep: bool,
) -> Result<(Vec<T>, Vec<Vec<T>>, Stepper<T>)> {
    check_inputs(y0, &space)?;
    let time = *u.grid();
    let m = substeps.max(1);
    let stepper = Stepper::new(nu, space, time.dt() / T::from_usize_lossy(m))?;
    let bound = max_principle_bound(u, y0);
    let limit = T::lit(BLOW_UP_FACTOR) * bound.max(T::min_positive_value());
    let mut c = stepper.basis().analyze(y0, space.n_x())?.coeffs;
    let mut checkpoints = Vec::new();
    let samples = u.samples();
    for k in 0..time.n_t() {
        for j in 0..m {
            if keep {
                checkpoints.push(c.clone());
            }
            let (a, b) = substep_values(samples, k, j, m);
            c = stepper.step(&c, a, b);
        }
        let sup = stepper.basis().synthesize_coeffs(&c)?.iter().fold(T::zero(), |s, &v| if v.is_finite() { s.max(v.abs()) } else { T::infinity() });
        if !sup.is_finite() || sup > limit {
            return Err(Error::BlowUp { time: time.node(k + 1).to_f64_lossy(), sup: sup.to_f64_lossy(), bound: bound.to_f64_lossy() });
        }
    }
    Ok((c, checkpoints, stepper))
}

/// Cost and gradient by reverse-mode differentiation of the discrete solver
/// with the given substep count (states are checkpointed at every substep).
pub fn adjoint_gradient_with<T: Real>(nu: T, u: &Control<T>, y0: &[T], space: SpaceGrid<T>, substeps: usize) -> Result<CostGradient<T>> {
    let (c_final, checkpoints, stepper) = forward_checkpoints(nu, u, y0, space, substeps, true)?;
    let time = *u.grid();
    let m = substeps.max(1);
    let samples = u.samples();
    let cost = T::lit(0.5) * c_final.iter().map(|&v| v * v).sum::<T>();
    let mut bar = c_final.clone();
    let mut g = vec![T::zero(); samples.len()];
    let mf = T::from_usize_lossy(m);
    for k in (0..time.n_t()).rev() {
        for j in (0..m).rev() {
            let (a, b) = substep_values(samples, k, j, m);
            let (_, stages) = stepper.step_recording(&checkpoints[k * m + j], a, b);
            let mut du = (T::zero(), T::zero());
            bar = stepper.step_adjoint(&stages, &bar, &mut du);
            let (s0, s1) = (T::from_usize_lossy(j) / mf, T::from_usize_lossy(j + 1) / mf);
            g[k] = g[k] + (T::one() - s0) * du.0 + (T::one() - s1) * du.1;
            g[k + 1] = g[k + 1] + s0 * du.0 + s1 * du.1;
        }
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { time: 0.0, sup: f64::INFINITY, bound: 0.0 });
    }
    let density = g.iter().zip(u.weights()).map(|(&gi, &w)| gi / w).collect();
    Ok(CostGradient { cost, gradient: Control::new(time, density)?, sample_gradient: g, final_coeffs: c_final })
}

/// [`adjoint_gradient_with`] using the solver's own substep choice.
pub fn adjoint_gradient<T: Real>(nu: T, u: &Control<T>, y0: &[T], space: SpaceGrid<T>) -> Result<CostGradient<T>> {
    adjoint_gradient_with(nu, u, y0, space, substeps_for_control(u, y0, &space))
}

/// `int e^{-lambda (T - s)} phi_k(s) ds` for the hat functions of the grid.
fn hat_moments<T: Real>(lambda: T, time: &TimeGrid<T>) -> Vec<T> {
    let n = time.n_t();
    let w = ExpWeights::new(lambda, time.dt());
    let mut beta = vec![T::zero(); n + 1];
    // After interval k the contribution decays over the remaining n - k - 1 intervals.
    let mut tail = T::one();
    for k in (0..n).rev() {
        beta[k] = beta[k] + tail * w.w_start;
        beta[k + 1] = beta[k + 1] + tail * w.w_end;
        tail = tail * w.decay;
    }
    beta
}

/// Gradient of `J` for the linear heat flow (no convection), in closed form:
/// `dJ/du_k = sum_n c_n(T) g_n beta_{n,k}` with `g_n = <1, e_n>`.
pub fn linear_gradient<T: Real>(nu: T, u: &Control<T>, y0: &[T], space: SpaceGrid<T>) -> Result<CostGradient<T>> {
    check_inputs(y0, &space)?;
    let basis = SineBasis::new(space);
    let time = *u.grid();
    let coeffs = solve_heat_spectral(nu, HeatSource::Scalar(u), y0, &time, &basis)?;
    let c_final = coeffs.last().expect("initial row").clone();
    let pi2 = T::PI() * T::PI();
    let mut g = vec![T::zero(); time.n_t() + 1];
    for (k, &c) in c_final.iter().enumerate() {
        let gn = one_coefficient::<T>(k + 1);
        if gn == T::zero() {
            continue;
        }
        let nf = T::from_usize_lossy(k + 1);
        let beta = hat_moments(nu * nf * nf * pi2, &time);
        for (gi, b) in g.iter_mut().zip(beta) {
            *gi = *gi + c * gn * b;
        }
    }
    let cost = T::lit(0.5) * c_final.iter().map(|&v| v * v).sum::<T>();
    let density = g.iter().zip(u.weights()).map(|(&gi, &w)| gi / w).collect();
    Ok(CostGradient { cost, gradient: Control::new(time, density)?, sample_gradient: g, final_coeffs: c_final })
}

/// Adjoint directional derivatives against central differences.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientCheck<T> {
    pub adjoint: Vec<T>,
    pub finite_difference: Vec<T>,
    pub max_relative_error: T,
}

/// Compares `<grad J, v>` with `(J(u + h v) - J(u - h v)) / 2h` along seeded
/// random directions, holding the substep count fixed.
pub fn gradient_fd_check<T: Real>(
    nu: T,
    u: &Control<T>,
    y0: &[T],
    space: SpaceGrid<T>,
    directions: usize,
    step: T,
    seed: u64,
) -> Result<GradientCheck<T>> {
    let m = substeps_for_control(u, y0, &space) + 1;
    let grad = adjoint_gradient_with(nu, u, y0, space, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost = |v: &Control<T>| -> Result<T> {
        let c = forward_final(nu, v, y0, space, m)?;
        Ok(T::lit(0.5) * c.iter().map(|&x| x * x).sum::<T>())
    };
    let mut adjoint = Vec::with_capacity(directions);
    let mut fd = Vec::with_capacity(directions);
    let mut worst = T::zero();
    for _ in 0..directions {
        let dir = random_control(*u.grid(), T::one(), &mut rng);
        let exact = grad.gradient.inner(&dir);
        let plus = cost(&u.add_scaled(step, &dir)?)?;
        let minus = cost(&u.add_scaled(-step, &dir)?)?;
        let approx = (plus - minus) / (T::lit(2.0) * step);
        let scale = exact.abs().max(approx.abs());
        let err = if scale == T::zero() { T::zero() } else { (exact - approx).abs() / scale };
        worst = worst.max(err);
        adjoint.push(exact);
        fd.push(approx);
    }
    Ok(GradientCheck { adjoint, finite_difference: fd, max_relative_error: worst })
}

/// Optimizer settings for [`attempt_null_control`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptSettings {
    pub n_x: usize,
    pub n_t: usize,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    pub max_halvings: usize,
    /// Stop once a projected step moves the control by less than this fraction of the budget.
    pub step_tol: f64,
}

impl Default for OptSettings {
    fn default() -> Self {
        Self { n_x: 63, n_t: 128, armijo: 1e-4, max_halvings: 30, step_tol: 1e-12 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptStatus {
    /// All requested iterations were taken.
    IterationLimit,
    /// The projected step became negligible or the gradient vanished.
    Stationary,
    /// No step size within the halving budget decreased the cost.
    LineSearchFailed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptRun<T> {
    pub delta: T,
    pub horizon: T,
    pub eta: T,
    pub seed: u64,
    /// Cost after each accepted iterate, starting with the initial guess.
    pub costs: Vec<T>,
    /// `<rho, y(T)>` along the same iterates.
    pub projections: Vec<T>,
    pub control: Control<T>,
    /// `|y(T)|_2` of the final iterate.
    pub final_norm: T,
    /// `|rho|_2` on the grid.
    pub rho_norm: T,
    pub status: OptStatus,
}

impl<T: Real> OptRun<T> {
    pub fn final_projection(&self) -> T {
        *self.projections.last().expect("initial iterate recorded")
    }

    pub fn cost_non_increasing(&self) -> bool {
        self.costs.windows(2).all(|w| w[1] <= w[0])
    }

    /// `iteration,cost,projection` lines with a header.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,cost,projection\n");
        for (i, (c, p)) in self.costs.iter().zip(&self.projections).enumerate() {
            out.push_str(&format!("{i},{:e},{:e}\n", c.to_f64_lossy(), p.to_f64_lossy()));
        }
        out
    }
}

fn project_ball<T: Real>(u: Control<T>, eta: T) -> Control<T> {
    let n = u.l2_norm();
    if n > eta {
        u.scaled(eta / n)
    } else {
        u
    }
}

/// Projected gradient descent on `J = |y(T)|^2 / 2` over `|u|_2 <= eta`
/// with unit viscosity and `y0 = delta rho`, from a seeded initial guess of
/// norm `min(eta, 100 delta) * U(1/2, 1)`.
pub fn attempt_null_control<T: Real>(delta: T, horizon: T, eta: T, iterations: usize, seed: u64, settings: OptSettings) -> Result<OptRun<T>> {
    if !(delta >= T::zero()) || !(eta > T::zero()) {
        return Err(Error::invalid("delta/eta", "need delta >= 0 and eta > 0"));
    }
    let space = SpaceGrid::<T>::new(settings.n_x)?;
    let time = TimeGrid::new(settings.n_t, horizon)?;
    let rho = rho_samples(&space);
    let rho_norm = project(&rho, &rho, &space)?.sqrt();
    let y0: Vec<T> = rho.iter().map(|&r| delta * r).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = eta.min(T::lit(100.0) * delta) * T::lit(0.5 + 0.5 * rng.gen::<f64>());
    let mut u = random_control(time, size, &mut rng);
    let basis = SineBasis::new(space);
    let projection_of = |c: &[T]| -> Result<T> { project(&rho, &basis.synthesize_coeffs(c)?, &space) };
    let evaluate = |v: &Control<T>| adjoint_gradient(T::one(), v, &y0, space);
    let mut current = evaluate(&u)?;
    let mut costs = vec![current.cost];
    let mut projections = vec![projection_of(&current.final_coeffs)?];
    let mut status = OptStatus::IterationLimit;
    let c_armijo = T::lit(settings.armijo);
    let mut trial = T::zero();
    for _ in 0..iterations {
        let gnorm = current.gradient.l2_norm();
        if gnorm == T::zero() || current.cost == T::zero() {
            status = OptStatus::Stationary;
            break;
        }
        if trial == T::zero() {
            trial = eta / gnorm;
        }
        let mut accepted = None;
        let mut s = trial;
        for _ in 0..=settings.max_halvings {
            let cand = project_ball(u.add_scaled(-s, &current.gradient)?, eta);
            let diff = cand.add_scaled(-T::one(), &u)?;
            let moved = diff.l2_norm();
            if moved <= T::lit(settings.step_tol) * eta {
                status = OptStatus::Stationary;
                break;
            }
            // Blow-up of a trial counts as a rejected step.
            if let Ok(next) = evaluate(&cand) {
                if next.cost <= current.cost - c_armijo * moved * moved / s {
                    accepted = Some((cand, next, s));
                    break;
                }
            }
            s = s * T::lit(0.5);
        }
        match accepted {
            Some((cand, next, s)) => {
                u = cand;
                current = next;
                costs.push(current.cost);
                projections.push(projection_of(&current.final_coeffs)?);
                trial = s * T::lit(2.0);
            }
            None => {
                if status != OptStatus::Stationary {
                    status = OptStatus::LineSearchFailed;
                }
                break;
            }
        }
    }
    let final_norm = (T::lit(2.0) * current.cost).sqrt();
    Ok(OptRun { delta, horizon, eta, seed, costs, projections, control: u, final_norm, rho_norm, status })
}

/// Independent optimization runs for consecutive seeds.
pub fn null_control_suite<T: Real>(
    delta: T,
    horizon: T,
    eta: T,
    iterations: usize,
    seeds: std::ops::Range<u64>,
    settings: OptSettings,
) -> Result<Vec<OptRun<T>>> {
    seeds.into_par_iter().map(|s| attempt_null_control(delta, horizon, eta, iterations, s, settings)).collect()
}

/// Gramian solves with a larger condition estimate are refused.
pub const MAX_MODE_GRAMIAN_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct ModeControl<T> {
    pub control: Control<T>,
    /// `(mode, target, reached)` from a forward heat solve.
    pub modes: Vec<(usize, T, T)>,
    pub max_error: T,
    /// Ratio of extreme Gramian eigenvalues.
    pub condition: T,
}

/// Minimal-`L^2` control (piecewise linear on `n_ctrl` intervals) steering
/// the listed sine modes of `a_t - eps a_xx = u(t)` from `a_start` to their
/// targets at time `horizon`. Only odd-index modes (profiles even about
/// `x = 1/2`) are reachable; even-index targets are rejected.
pub fn even_mode_control<T: Real>(
    eps: T,
    horizon: T,
    targets: &[(usize, T)],
    n_ctrl: usize,
    a_start: &[T],
    space: SpaceGrid<T>,
) -> Result<ModeControl<T>> {
    if !(eps > T::zero()) {
        return Err(Error::invalid("eps", "viscosity must be positive"));
    }
    if a_start.len() != space.n_x() {
        return Err(Error::DimensionMismatch { expected: space.n_x(), found: a_start.len() });
    }
    for &(n, _) in targets {
        if n == 0 || n > space.n_x() {
            return Err(Error::invalid("targets", format!("mode {n} outside 1..={}", space.n_x())));
        }
        if n % 2 == 0 {
            return Err(Error::invalid("targets", format!("mode {n} has zero source coefficient and cannot be steered")));
        }
    }
    let time = TimeGrid::new(n_ctrl, horizon)?;
    let basis = SineBasis::new(space);
    let c0 = basis.analyze(a_start, space.n_x())?.coeffs;
    let pi2 = T::PI() * T::PI();
    let weights = time.trapezoid_weights();
    let p = targets.len();
    let mut rows = Vec::with_capacity(p);
    let mut rhs = Vec::with_capacity(p);
    for &(n, target) in targets {
        let nf = T::from_usize_lossy(n);
        let lambda = eps * nf * nf * pi2;
        let gn = one_coefficient::<T>(n);
        rows.push(hat_moments(lambda, &time).into_iter().map(|b| gn * b).collect::<Vec<T>>());
        rhs.push(target - (-lambda * horizon).exp() * c0[n - 1]);
    }
    // Minimise sum w_k u_k^2 subject to R u = rhs: u = W^{-1} R^T (R W^{-1} R^T)^{-1} rhs.
    let (samples, condition) = if p == 0 {
        (vec![T::zero(); n_ctrl + 1], T::one())
    } else {
        let gram = Matrix::from_fn(p, p, |i, j| rows[i].iter().zip(&rows[j]).zip(&weights).map(|((&a, &b), &w)| a * b / w).sum());
        let ev: Vec<T> = symmetric_eigenvalues(&gram)?;
        let condition = ev[p - 1] / ev[0];
        if !(ev[0] > T::zero()) || !(condition < T::lit(MAX_MODE_GRAMIAN_CONDITION)) {
            return Err(Error::IllConditioned { condition: condition.to_f64_lossy() });
        }
        let lam = solve_spd(&gram, &rhs)?;
        ((0..=n_ctrl).map(|k| (0..p).map(|i| lam[i] * rows[i][k]).sum::<T>() / weights[k]).collect(), condition)
    };
    let control = Control::new(time, samples)?;
    let reached = solve_heat_spectral(eps, HeatSource::Scalar(&control), a_start, &time, &basis)?;
    let last = reached.last().expect("initial row");
    let modes: Vec<(usize, T, T)> = targets.iter().map(|&(n, t)| (n, t, last[n - 1])).collect();
    let max_error = modes.iter().fold(T::zero(), |m, &(_, t, r)| m.max((t - r).abs()));
    Ok(ModeControl { control, modes, max_error, condition })
}
