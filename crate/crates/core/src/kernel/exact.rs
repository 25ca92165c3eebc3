//! The exact quadratic kernel at positive viscosity and its generators.

use std::fmt;

use super::asymptotic::k0_value;
use super::matrix::{midpoint_nodes, KernelMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{erf, erfc, gauss_legendre, push_mapped_rule};
use crate::spectral::{corrector_h, elementary_g, erf_layer, rho_coefficient, rho_eval, PhiSeries, G_CROSSOVER};

/// Resolution of the tensor quadrature for the kernel.
///
/// Time is integrated over `(max(s1,s2), 1)` after the substitution
/// `t = s + (1-s) w^2`, which removes the square-root behaviour at the lower
/// end; space uses Gauss-Legendre panels graded on the two layer widths
/// `sqrt(4 eps (t - s_i))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelQuadrature {
    pub time_panels: usize,
    pub time_order: usize,
    pub space_order: usize,
    /// Largest admissible spatial panel.
    pub max_panel: f64,
    /// Cosine modes kept in the adjoint profile.
    pub phi_modes: usize,
}

impl Default for KernelQuadrature {
    fn default() -> Self {
        Self { time_panels: 2, time_order: 16, space_order: 10, max_panel: 0.05, phi_modes: 200 }
    }
}

impl KernelQuadrature {
    pub const MIN_ORDER: usize = 4;
    pub const MIN_PHI_MODES: usize = 16;

    pub fn validate(&self) -> Result<()> {
        if self.time_panels == 0 {
            return Err(Error::invalid("time_panels", "at least one time panel required"));
        }
        if self.time_order < Self::MIN_ORDER || self.space_order < Self::MIN_ORDER {
            return Err(Error::invalid("order", format!("quadrature order below minimum {}", Self::MIN_ORDER)));
        }
        if !(self.max_panel > 0.0 && self.max_panel <= 0.5) {
            return Err(Error::invalid("max_panel", "must lie in (0, 1/2]"));
        }
        if self.phi_modes < Self::MIN_PHI_MODES {
            return Err(Error::invalid("phi_modes", format!("below minimum {}", Self::MIN_PHI_MODES)));
        }
        Ok(())
    }

    /// Twice the time panels, half the spatial panel size, more modes.
    pub fn refined(&self) -> Self {
        Self {
            time_panels: 2 * self.time_panels,
            time_order: self.time_order,
            space_order: self.space_order,
            max_panel: self.max_panel / 2.0,
            phi_modes: 2 * self.phi_modes,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("quadrature `{text}`: expected t<panels>x<order>/x<order>/p<panel>/m<modes>"));
        let parts: Vec<&str> = text.trim().split('/').collect();
        if parts.len() != 4 {
            return Err(bad());
        }
        let (tp, to) = parts[0].strip_prefix('t').and_then(|s| s.split_once('x')).ok_or_else(bad)?;
        let q = Self {
            time_panels: tp.parse().map_err(|_| bad())?,
            time_order: to.parse().map_err(|_| bad())?,
            space_order: parts[1].strip_prefix('x').ok_or_else(bad)?.parse().map_err(|_| bad())?,
            max_panel: parts[2].strip_prefix('p').ok_or_else(bad)?.parse().map_err(|_| bad())?,
            phi_modes: parts[3].strip_prefix('m').ok_or_else(bad)?.parse().map_err(|_| bad())?,
        };
        q.validate()?;
        Ok(q)
    }
}

impl fmt::Display for KernelQuadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}x{}/x{}/p{}/m{}", self.time_panels, self.time_order, self.space_order, self.max_panel, self.phi_modes)
    }
}

/// Pointwise evaluator of `K^eps(s1, s2)` and of the integrand
/// `A(t, s1, s2) = int_0^{1/2} Phi_x(1-t, x) G(t-s1, x) G(t-s2, x) dx`.
#[derive(Clone, Debug)]
pub struct KernelEvaluator<T> {
    eps: T,
    quad: KernelQuadrature,
    /// `(n pi, sqrt(2) n pi rho_n)` for even `n`.
    phi_terms: Vec<(T, T)>,
    x_rule: (Vec<T>, Vec<T>),
    t_rule: (Vec<T>, Vec<T>),
    phi: PhiSeries<T>,
}

impl<T: Real> KernelEvaluator<T> {
    pub fn new(eps: T, quad: KernelQuadrature) -> Result<Self> {
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(Error::invalid("eps", "viscosity must be positive"));
        }
        quad.validate()?;
        let phi_terms = (2..=quad.phi_modes)
            .step_by(2)
            .map(|n| {
                let k = T::from_usize_lossy(n) * T::PI();
                (k, T::SQRT_2() * k * rho_coefficient::<T>(n))
            })
            .collect();
        let phi = PhiSeries::new(eps, quad.phi_modes)?;
        Ok(Self {
            eps,
            quad,
            phi_terms,
            x_rule: gauss_legendre(quad.space_order),
            t_rule: gauss_legendre(quad.time_order),
            phi,
        })
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn quadrature(&self) -> KernelQuadrature {
        self.quad
    }

    pub fn phi(&self) -> &PhiSeries<T> {
        &self.phi
    }

    /// Panels on `(0, top)` graded on the layer widths of the two elapsed
    /// times. With `full` the range always reaches `1/2`; otherwise it stops
    /// where both profiles are flat to machine precision.
    pub fn space_nodes(&self, tau1: T, tau2: T, full: bool) -> (Vec<T>, Vec<T>) {
        let four_eps = T::lit(4.0) * self.eps;
        let (lo, hi) = if tau1 < tau2 { (tau1, tau2) } else { (tau2, tau1) };
        let s_lo = (four_eps * lo).sqrt();
        let s_hi = (four_eps * hi).sqrt();
        let half = T::lit(0.5);
        let top = if full { half } else { (T::lit(8.0) * s_hi).min(half) };
        let mut breaks = vec![T::zero()];
        for c in [0.25, 0.5, 1.0, 2.0, 4.0] {
            breaks.push(s_lo * T::lit(c));
        }
        for c in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            breaks.push(s_hi * T::lit(c));
        }
        breaks.retain(|&b| b < top);
        breaks.push(top);
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        breaks.dedup();
        let max_panel = T::lit(self.quad.max_panel);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let k = ((b - a) / max_panel).ceil().to_f64_lossy().max(1.0) as usize;
            let step = (b - a) / T::from_usize_lossy(k);
            for j in 0..k {
                let aa = a + step * T::from_usize_lossy(j);
                push_mapped_rule(&self.x_rule, aa, aa + step, &mut nodes, &mut weights);
            }
        }
        (nodes, weights)
    }

    /// `Phi_x(tau, x)` at each `x` by Clenshaw summation in `cos(2 pi x)`.
    pub fn phi_x_many(&self, tau: T, xs: &[T]) -> Vec<T> {
        let first = self.phi_terms.first().map(|&(k, r)| (r * (-self.eps * k * k * tau).exp()).abs()).unwrap_or(T::zero());
        let floor = first * T::lit(1e-18);
        let mut coeffs = Vec::with_capacity(self.phi_terms.len());
        for &(k, r) in &self.phi_terms {
            let c = r * (-self.eps * k * k * tau).exp();
            if c.abs() < floor {
                break;
            }
            coeffs.push(c);
        }
        xs.iter()
            .map(|&x| {
                // coeffs[j] multiplies cos((j+1) phi) with phi = 2 pi x.
                let two_c = T::lit(2.0) * (T::lit(2.0) * T::PI() * x).cos();
                let (mut b1, mut b2) = (T::zero(), T::zero());
                for &c in coeffs.iter().rev() {
                    let b0 = c + two_c * b1 - b2;
                    b2 = b1;
                    b1 = b0;
                }
                // sum_{j>=1} c_j cos(j phi) = b_1 cos(phi) - b_2.
                b1 * two_c / T::lit(2.0) - b2
            })
            .collect()
    }

    /// `G(tau, x)` at each `x`; `tau = 0` gives the unit initial datum.
    pub fn g_many(&self, tau: T, xs: &[T]) -> Vec<T> {
        if tau == T::zero() {
            return vec![T::one(); xs.len()];
        }
        let et = self.eps * tau;
        if et < T::lit(G_CROSSOVER) {
            let sigma = (T::lit(4.0) * et).sqrt();
            let cutoff = T::lit(7.0);
            xs.iter()
                .map(|&x| {
                    let mut g = T::one();
                    let mut sign = T::one();
                    for k in 0..64 {
                        let kf = T::from_usize_lossy(k);
                        let left = (kf + x) / sigma;
                        let right = (kf + T::one() - x) / sigma;
                        if left > cutoff && right > cutoff {
                            break;
                        }
                        g = g - sign * (erfc(left) + erfc(right));
                        sign = -sign;
                    }
                    g
                })
                .collect()
        } else {
            let pi = T::PI();
            let mut amps = Vec::new();
            let mut n = 1usize;
            loop {
                let k = T::from_usize_lossy(n) * pi;
                let arg = et * k * k;
                if arg > T::lit(45.0) {
                    break;
                }
                amps.push(T::lit(4.0) / k * (-arg).exp());
                n += 2;
            }
            xs.iter()
                .map(|&x| {
                    let theta = pi * x;
                    let two_c = T::lit(2.0) * (T::lit(2.0) * theta).cos();
                    // sin((2j+1) theta) by the three-term recurrence.
                    let (mut prev, mut cur) = (-theta.sin(), theta.sin());
                    let mut sum = T::zero();
                    for &a in &amps {
                        sum = sum + a * cur;
                        let next = two_c * cur - prev;
                        prev = cur;
                        cur = next;
                    }
                    sum
                })
                .collect()
        }
    }

    /// `A(t, s1, s2)`, integrated only where `G G - 1` is not negligible.
    /// Uses that `Phi_x(tau, .)` has zero mean on `(0, 1/2)`.
    pub fn integrand(&self, t: T, s1: T, s2: T) -> T {
        let (tau1, tau2) = (t - s1, t - s2);
        let (x, w) = self.space_nodes(tau1, tau2, false);
        let px = self.phi_x_many(T::one() - t, &x);
        let g1 = self.g_many(tau1, &x);
        let g2 = self.g_many(tau2, &x);
        (0..x.len()).map(|i| w[i] * px[i] * (g1[i] * g2[i] - T::one())).sum()
    }

    /// `K^eps(s1, s2)`; zero when `max(s1, s2) = 1`.
    pub fn value(&self, s1: T, s2: T) -> T {
        let s = s1.max(s2);
        let len = T::one() - s;
        if !(len > T::zero()) {
            return T::zero();
        }
        let (gx, gw) = &self.t_rule;
        let panels = T::from_usize_lossy(self.quad.time_panels);
        let mut total = T::zero();
        for p in 0..self.quad.time_panels {
            let a = T::from_usize_lossy(p) / panels;
            let half = T::lit(0.5) / panels;
            for (&xi, &wi) in gx.iter().zip(gw) {
                let w = a + half * (xi + T::one());
                let t = s + len * w * w;
                total = total + half * wi * T::lit(2.0) * len * w * self.integrand(t, s1, s2);
            }
        }
        total
    }
}

/// `K^eps` at the cell midpoints of `(0,1)`.
pub fn assemble_k_eps<T: Real>(eps: T, m: usize, quad: KernelQuadrature) -> Result<KernelMatrix<T>> {
    assemble_k_eps_at(eps, midpoint_nodes(m), quad)
}

pub fn assemble_k_eps_at<T: Real>(eps: T, nodes: Vec<T>, quad: KernelQuadrature) -> Result<KernelMatrix<T>> {
    if nodes.len() < 2 {
        return Err(Error::invalid("M", "at least two nodes required"));
    }
    if nodes.iter().any(|&s| !(s >= T::zero() && s <= T::one())) {
        return Err(Error::invalid("nodes", "must lie in [0, 1]"));
    }
    let eval = KernelEvaluator::new(eps, quad)?;
    KernelMatrix::from_symmetric_fn(nodes, Some(eps), quad.to_string(), |a, b| eval.value(a, b))
}

/// Leading-order coefficient `1/(45 sqrt(pi))` multiplying `sqrt(eps) K^0`.
pub fn leading_coefficient<T: Real>() -> T {
    T::one() / (T::lit(45.0) * T::PI().sqrt())
}

/// `K^eps - (sqrt(eps)/(45 sqrt(pi))) K^0` at the cell midpoints.
pub fn residual_matrix<T: Real>(eps: T, m: usize, quad: KernelQuadrature) -> Result<KernelMatrix<T>> {
    let k = assemble_k_eps(eps, m, quad)?;
    residual_from(&k)
}

/// Residual of an already assembled exact kernel.
pub fn residual_from<T: Real>(k: &KernelMatrix<T>) -> Result<KernelMatrix<T>> {
    let eps = k.eps.ok_or_else(|| Error::invalid("kernel", "residual needs a positive-viscosity kernel"))?;
    let nodes = k.nodes().to_vec();
    let k0 = KernelMatrix::from_symmetric_fn(nodes, None, "closed-form".into(), k0_value)?;
    k.minus_scaled(eps.sqrt() * leading_coefficient::<T>(), &k0)
}

/// `sqrt(a^2 + b^2) / (a b sqrt(pi))`, the value of
/// `int_0^inf (1 - erf(a x) erf(b x)) dx`.
pub fn erf_identity<T: Real>(alpha: T, beta: T) -> Result<T> {
    if !(alpha > T::zero()) || !(beta > T::zero()) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::invalid("rate", "both rates must be positive and finite"));
    }
    Ok((alpha * alpha + beta * beta).sqrt() / (alpha * beta * T::PI().sqrt()))
}

/// Which piece of the kernel integrand to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    /// Boundary value of `rho_x` against the product of two erf layers.
    LayerProduct,
    /// Remainder of `rho_x` against the erf layers.
    ProfileRemainder,
    /// Viscous correction of the adjoint profile against the erf layers.
    ViscousCorrection,
    /// Corrector of the first profile against the second layer.
    FirstCorrector,
    /// Corrector of the second profile against the first layer.
    SecondCorrector,
    /// Product of both correctors.
    CorrectorProduct,
    /// The whole integrand on `(0, 1)`.
    Total,
}

impl Generator {
    pub const PIECES: [Generator; 6] = [
        Generator::LayerProduct,
        Generator::ProfileRemainder,
        Generator::ViscousCorrection,
        Generator::FirstCorrector,
        Generator::SecondCorrector,
        Generator::CorrectorProduct,
    ];

    /// `1..=6` for the pieces, `None` for the total.
    pub fn index(self) -> Option<usize> {
        Self::PIECES.iter().position(|&g| g == self).map(|i| i + 1)
    }

    pub fn from_index(i: usize) -> Option<Self> {
        i.checked_sub(1).and_then(|k| Self::PIECES.get(k).copied())
    }
}

/// Value of one generator at `(t, s1, s2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorSample<T> {
    pub which: Generator,
    pub value: T,
}

/// Evaluates a generator of the kernel integrand with a fixed panel rule on
/// `(0, 1/2)`. The pieces subtract `1` from the layer product, which leaves
/// their sum unchanged because `Phi_x` has zero mean on `(0, 1/2)`. The total
/// is computed independently over `(0, 1)` and halved by the symmetry of the
/// integrand about `x = 1/2`.
pub fn generator_a<T: Real>(eval: &KernelEvaluator<T>, t: T, s1: T, s2: T, which: Generator) -> Result<GeneratorSample<T>> {
    let eps = eval.eps();
    if !(s1 >= T::zero() && s2 >= T::zero() && t <= T::one()) {
        return Err(Error::invalid("t", "need 0 <= s1, s2 and t <= 1"));
    }
    if t < s1.max(s2) || (t == s1.max(s2) && !(s1 == s2)) {
        return Err(Error::invalid("t", format!("t = {t} must exceed max(s1, s2)")));
    }
    let (tau1, tau2) = (t - s1, t - s2);
    if tau1 == T::zero() && tau2 == T::zero() {
        return Ok(GeneratorSample { which, value: T::zero() });
    }
    let modes = eval.quadrature().phi_modes.max(64) * 4;
    let phi = eval.phi();
    let back = T::one() - t;
    let layer = |tau: T, x: T| erf_layer(eps, tau, x);
    let corr = |tau: T, x: T| -> Result<T> {
        if tau == T::zero() {
            Ok(T::one() - layer(tau, x))
        } else {
            corrector_h(eps, tau, x, modes)
        }
    };
    let (xs, ws) = eval.space_nodes(tau1, tau2, true);
    let rho_x0 = rho_eval(T::zero(), 1)?;
    let mut total = T::zero();
    match which {
        Generator::Total => {
            let g = |tau: T, x: T| -> Result<T> {
                if tau == T::zero() {
                    Ok(T::one())
                } else {
                    elementary_g(eps, tau, x, modes)
                }
            };
            for (&x, &w) in xs.iter().zip(&ws) {
                for y in [x, T::one() - x] {
                    total = total + w * phi.dx(back, y) * g(tau1, y)? * g(tau2, y)?;
                }
            }
            return Ok(GeneratorSample { which, value: total / T::lit(2.0) });
        }
        _ => {
            for (&x, &w) in xs.iter().zip(&ws) {
                let v = match which {
                    Generator::LayerProduct => rho_x0 * (layer(tau1, x) * layer(tau2, x) - T::one()),
                    Generator::ProfileRemainder => (rho_eval(x, 1)? - rho_x0) * (layer(tau1, x) * layer(tau2, x) - T::one()),
                    Generator::ViscousCorrection => eps * phi.small_phi_dx(back, x) * (layer(tau1, x) * layer(tau2, x) - T::one()),
                    Generator::FirstCorrector => phi.dx(back, x) * corr(tau1, x)? * layer(tau2, x),
                    Generator::SecondCorrector => phi.dx(back, x) * corr(tau2, x)? * layer(tau1, x),
                    Generator::CorrectorProduct => phi.dx(back, x) * corr(tau1, x)? * corr(tau2, x)?,
                    Generator::Total => unreachable!(),
                };
                total = total + w * v;
            }
        }
    }
    Ok(GeneratorSample { which, value: total })
}

/// Small-viscosity limit of the first generator:
/// `-2 sqrt(eps) rho_x(0) * erf_identity(1/sqrt(tau1), 1/sqrt(tau2))`.
pub fn layer_product_limit<T: Real>(eps: T, tau1: T, tau2: T) -> Result<T> {
    let rho_x0 = rho_eval(T::zero(), 1)?;
    Ok(-T::lit(2.0) * eps.sqrt() * rho_x0 * erf_identity(T::one() / tau1.sqrt(), T::one() / tau2.sqrt())?)
}

/// `1 - erf(a x) erf(b x)`, the integrand of [`erf_identity`].
pub fn erf_identity_integrand<T: Real>(alpha: T, beta: T, x: T) -> T {
    T::one() - erf(alpha * x) * erf(beta * x)
}
