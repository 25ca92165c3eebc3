use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{one_coefficient, Control, ExpWeights, Field, SineBasis, SpaceGrid};

/// Substeps are chosen so that `sup|y| dt / h` stays below this.
pub const CFL_TARGET: f64 = 0.25;

/// A run is declared blown up once `sup|y|` exceeds this multiple of the
/// maximum-principle bound.
pub const BLOW_UP_FACTOR: f64 = 10.0;

/// Solution of `y_t - nu y_xx + y y_x = u(t)` with zero boundary values.
#[derive(Clone, Debug)]
pub struct BurgersRun<T> {
    pub trajectory: Field<T>,
    pub control: Control<T>,
    pub viscosity: T,
    pub y0: Vec<T>,
    /// Sine coefficients at the final time.
    pub final_coeffs: Vec<T>,
    /// Total number of integrator steps.
    pub steps: usize,
    /// Largest `sup|y| dt / h` met at the output times.
    pub max_cfl: T,
    /// `sup|y0| + |u|_{L^1}`.
    pub max_principle_bound: T,
}

impl<T: Real> BurgersRun<T> {
    pub fn final_state(&self) -> &[T] {
        self.trajectory.last()
    }

    pub fn horizon(&self) -> T {
        self.trajectory.time_grid().horizon()
    }
}

/// One integrating-factor RK4 step for the sine coefficients, with the
/// linear heat part and the piecewise-linear source integrated exactly and
/// the convective term dealiased by the two-thirds rule.
#[derive(Debug)]
pub struct Stepper<T: Real> {
    pub(crate) basis: SineBasis<T>,
    pub(crate) dt: T,
    pub(crate) full: Vec<T>,
    pub(crate) half: Vec<T>,
    pub(crate) mask: Vec<T>,
    pub(crate) source: Vec<T>,
    /// Source weights `(start, end)` over half a step and a whole step.
    pub(crate) half_w: Vec<(T, T)>,
    pub(crate) full_w: Vec<(T, T)>,
}

/// Stage inputs kept for reverse-mode differentiation of one step.
#[derive(Clone, Debug)]
pub(crate) struct StageInputs<T> {
    pub inputs: [Vec<T>; 4],
}

impl<T: Real> Stepper<T> {
    pub fn new(nu: T, space: SpaceGrid<T>, dt: T) -> Result<Self> {
        if !(nu > T::zero()) || !nu.is_finite() {
            return Err(Error::invalid("nu", "viscosity must be positive"));
        }
        if !(dt > T::zero()) {
            return Err(Error::invalid("dt", "step must be positive"));
        }
        let n = space.n_x();
        let keep = (2 * (n + 1)) / 3;
        let pi2 = T::PI() * T::PI();
        let mut full = Vec::with_capacity(n);
        let mut half = Vec::with_capacity(n);
        let mut half_w = Vec::with_capacity(n);
        let mut full_w = Vec::with_capacity(n);
        for k in 1..=n {
            let kf = T::from_usize_lossy(k);
            let lambda = nu * kf * kf * pi2;
            let wf = ExpWeights::new(lambda, dt);
            let wh = ExpWeights::new(lambda, dt / T::lit(2.0));
            full.push(wf.decay);
            half.push(wh.decay);
            full_w.push((wf.w_start, wf.w_end));
            // The source at mid-step is the average of the end values.
            half_w.push((wh.w_start + wh.w_end / T::lit(2.0), wh.w_end / T::lit(2.0)));
        }
        let mask = (1..=n).map(|k| if k < keep { T::one() } else { T::zero() }).collect();
        let source = (1..=n).map(one_coefficient).collect();
        Ok(Self { basis: SineBasis::new(space), dt, full, half, mask, source, half_w, full_w })
    }

    pub fn basis(&self) -> &SineBasis<T> {
        &self.basis
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// `-P(y y_x)` with `y` built from the dealiased coefficients.
    pub(crate) fn convection(&self, c: &[T]) -> Vec<T> {
        let masked: Vec<T> = c.iter().zip(&self.mask).map(|(&a, &m)| a * m).collect();
        let (y, yx) = self.basis.synthesize_with_derivative(&masked).expect("mode count fixed");
        let prod: Vec<T> = y.iter().zip(&yx).map(|(&a, &b)| a * b).collect();
        let coeffs = self.basis.analyze(&prod, c.len()).expect("mode count fixed").coeffs;
        coeffs.iter().zip(&self.mask).map(|(&v, &m)| -v * m).collect()
    }

    /// Transpose of the derivative of [`Self::convection`] at `c`, applied to `w`.
    pub(crate) fn convection_adjoint(&self, c: &[T], w: &[T]) -> Vec<T> {
        let masked: Vec<T> = c.iter().zip(&self.mask).map(|(&a, &m)| a * m).collect();
        let (y, yx) = self.basis.synthesize_with_derivative(&masked).expect("mode count fixed");
        let wm: Vec<T> = w.iter().zip(&self.mask).map(|(&a, &m)| a * m).collect();
        let v = self.basis.synthesize_coeffs(&wm).expect("mode count fixed");
        let p1: Vec<T> = yx.iter().zip(&v).map(|(&a, &b)| a * b).collect();
        let p2: Vec<T> = y.iter().zip(&v).map(|(&a, &b)| a * b).collect();
        let a1 = self.basis.analyze(&p1, c.len()).expect("mode count fixed").coeffs;
        let a2 = self.basis.cosine_correlate(&p2, c.len()).expect("mode count fixed");
        let h = self.basis.grid().h();
        let pi = T::PI();
        (0..c.len())
            .map(|k| -self.mask[k] * (a1[k] + h * pi * T::from_usize_lossy(k + 1) * a2[k]))
            .collect()
    }

    fn source_terms(&self, u_a: T, u_b: T) -> (Vec<T>, Vec<T>) {
        let sh = self.source.iter().zip(&self.half_w).map(|(&g, &(a, b))| g * (a * u_a + b * u_b)).collect();
        let s1 = self.source.iter().zip(&self.full_w).map(|(&g, &(a, b))| g * (a * u_a + b * u_b)).collect();
        (sh, s1)
    }

    /// Advances `c` by one step with the control linear from `u_a` to `u_b`.
    pub fn step(&self, c: &[T], u_a: T, u_b: T) -> Vec<T> {
        self.step_recording(c, u_a, u_b).0
    }

    pub(crate) fn step_recording(&self, c: &[T], u_a: T, u_b: T) -> (Vec<T>, StageInputs<T>) {
        let n = c.len();
        let dt = self.dt;
        let two = T::lit(2.0);
        let (sh, s1) = self.source_terms(u_a, u_b);
        let x1 = c.to_vec();
        let k1 = self.convection(&x1);
        let x2: Vec<T> = (0..n).map(|i| self.half[i] * (c[i] + dt / two * k1[i]) + sh[i]).collect();
        let k2 = self.convection(&x2);
        let x3: Vec<T> = (0..n).map(|i| self.half[i] * c[i] + dt / two * k2[i] + sh[i]).collect();
        let k3 = self.convection(&x3);
        let x4: Vec<T> = (0..n).map(|i| self.full[i] * c[i] + dt * self.half[i] * k3[i] + s1[i]).collect();
        let k4 = self.convection(&x4);
        let sixth = dt / T::lit(6.0);
        let next = (0..n)
            .map(|i| {
                self.full[i] * c[i]
                    + sixth * (self.full[i] * k1[i] + two * self.half[i] * (k2[i] + k3[i]) + k4[i])
                    + s1[i]
            })
            .collect();
        (next, StageInputs { inputs: [x1, x2, x3, x4] })
    }

    /// Reverse of one step: given `dJ/dc_new`, returns `dJ/dc` and adds the
    /// sensitivities to the two control values into `du`.
    pub(crate) fn step_adjoint(&self, stages: &StageInputs<T>, bar: &[T], du: &mut (T, T)) -> Vec<T> {
        let n = bar.len();
        let dt = self.dt;
        let two = T::lit(2.0);
        let sixth = dt / T::lit(6.0);
        let third = dt / T::lit(3.0);
        let mut c_bar: Vec<T> = (0..n).map(|i| self.full[i] * bar[i]).collect();
        let mut k1_bar: Vec<T> = (0..n).map(|i| sixth * self.full[i] * bar[i]).collect();
        let mut k2_bar: Vec<T> = (0..n).map(|i| third * self.half[i] * bar[i]).collect();
        let mut k3_bar = k2_bar.clone();
        let k4_bar: Vec<T> = (0..n).map(|i| sixth * bar[i]).collect();
        let mut s1_bar = bar.to_vec();

        let x4_bar = self.convection_adjoint(&stages.inputs[3], &k4_bar);
        for i in 0..n {
            c_bar[i] = c_bar[i] + self.full[i] * x4_bar[i];
            k3_bar[i] = k3_bar[i] + dt * self.half[i] * x4_bar[i];
            s1_bar[i] = s1_bar[i] + x4_bar[i];
        }
        let x3_bar = self.convection_adjoint(&stages.inputs[2], &k3_bar);
        let mut sh_bar = x3_bar.clone();
        for i in 0..n {
            c_bar[i] = c_bar[i] + self.half[i] * x3_bar[i];
            k2_bar[i] = k2_bar[i] + dt / two * x3_bar[i];
        }
        let x2_bar = self.convection_adjoint(&stages.inputs[1], &k2_bar);
        for i in 0..n {
            c_bar[i] = c_bar[i] + self.half[i] * x2_bar[i];
            k1_bar[i] = k1_bar[i] + dt / two * self.half[i] * x2_bar[i];
            sh_bar[i] = sh_bar[i] + x2_bar[i];
        }
        let x1_bar = self.convection_adjoint(&stages.inputs[0], &k1_bar);
        for i in 0..n {
            c_bar[i] = c_bar[i] + x1_bar[i];
            let g = self.source[i];
            du.0 = du.0 + g * (self.half_w[i].0 * sh_bar[i] + self.full_w[i].0 * s1_bar[i]);
            du.1 = du.1 + g * (self.half_w[i].1 * sh_bar[i] + self.full_w[i].1 * s1_bar[i]);
        }
        c_bar
    }
}

/// `sup|y0| + |u|_{L^1}`.
pub fn max_principle_bound<T: Real>(u: &Control<T>, y0: &[T]) -> T {
    y0.iter().fold(T::zero(), |m, &v| m.max(v.abs())) + u.l1_norm()
}

/// Integrator steps per output interval: the smallest count keeping
/// `bound * dt / h <= CFL_TARGET`.
pub fn substeps_for<T: Real>(bound: T, output_dt: T, h: T) -> usize {
    let ratio = (bound * output_dt / (T::lit(CFL_TARGET) * h)).ceil();
    ratio.to_usize().unwrap_or(1).max(1)
}

/// Solves the controlled viscous Burgers equation on `[0, T]` with `T` the
/// horizon of `u`'s grid. The control is the linear interpolant of its samples.
pub fn solve_burgers<T: Real>(nu: T, u: &Control<T>, y0: &[T], space: SpaceGrid<T>) -> Result<BurgersRun<T>> {
    if y0.len() != space.n_x() {
        return Err(Error::DimensionMismatch { expected: space.n_x(), found: y0.len() });
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("y0", "non-finite initial value"));
    }
    let time = *u.grid();
    let bound = max_principle_bound(u, y0);
    let m = substeps_for(bound, time.dt(), space.h());
    let stepper = Stepper::new(nu, space, time.dt() / T::from_usize_lossy(m))?;
    let basis = stepper.basis();
    let mut c = basis.analyze(y0, space.n_x())?.coeffs;
    let mut rows = Vec::with_capacity(time.n_t() + 1);
    rows.push(y0.to_vec());
    let samples = u.samples();
    let limit = T::lit(BLOW_UP_FACTOR) * bound.max(T::min_positive_value());
    let mut max_cfl = T::zero();
    let mf = T::from_usize_lossy(m);
    for k in 0..time.n_t() {
        let (ua, ub) = (samples[k], samples[k + 1]);
        for j in 0..m {
            let a = ua + (ub - ua) * T::from_usize_lossy(j) / mf;
            let b = ua + (ub - ua) * T::from_usize_lossy(j + 1) / mf;
            c = stepper.step(&c, a, b);
        }
        let y = basis.synthesize_coeffs(&c)?;
        let sup = y.iter().fold(T::zero(), |s, &v| if v.is_finite() { s.max(v.abs()) } else { T::infinity() });
        if !sup.is_finite() || sup > limit {
            return Err(Error::BlowUp { time: time.node(k + 1).to_f64_lossy(), sup: sup.to_f64_lossy(), bound: bound.to_f64_lossy() });
        }
        max_cfl = max_cfl.max(sup * stepper.dt() / space.h());
        rows.push(y);
    }
    Ok(BurgersRun {
        trajectory: Field::new(rows, time, space)?,
        control: u.clone(),
        viscosity: nu,
        y0: y0.to_vec(),
        final_coeffs: c,
        steps: m * time.n_t(),
        max_cfl,
        max_principle_bound: bound,
    })
}

