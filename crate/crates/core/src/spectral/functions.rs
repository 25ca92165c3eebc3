//! The drift profile `rho`, the elementary Dirichlet heat solution `G` and
//! its boundary-layer split, and the adjoint profile `Phi`.

use super::grid::{Field, SpaceGrid, TimeGrid};
use super::sine::SineBasis;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{erf, erfc};

/// `rho(x) = x^5/5 - x^4/2 + x^3/3 - x/30` and its first two derivatives.
pub fn rho_eval<T: Real>(x: T, order: u8) -> Result<T> {
    let one = T::one();
    match order {
        0 => Ok(x * (x * x * (x * x / T::lit(5.0) - x / T::lit(2.0) + one / T::lit(3.0)) - one / T::lit(30.0))),
        1 => Ok(x * x * (x * x - T::lit(2.0) * x + one) - one / T::lit(30.0)),
        2 => Ok(T::lit(2.0) * x * (x - one) * (T::lit(2.0) * x - one)),
        _ => Err(Error::invalid("order", format!("derivative order {order} not in 0..=2"))),
    }
}

/// `<rho, e_n> = -12 sqrt(2) (1 + (-1)^n) / (n pi)^5`; zero for odd `n`.
pub fn rho_coefficient<T: Real>(n: usize) -> T {
    if n % 2 == 1 {
        return T::zero();
    }
    let npi = T::from_usize_lossy(n) * T::PI();
    -T::lit(24.0) * T::SQRT_2() / npi.powi(5)
}

/// `<rho_xx, e_n> = 12 sqrt(2) (1 + (-1)^n) / (n pi)^3`; zero for odd `n`.
pub fn rho_xx_coefficient<T: Real>(n: usize) -> T {
    if n % 2 == 1 {
        return T::zero();
    }
    let npi = T::from_usize_lossy(n) * T::PI();
    T::lit(24.0) * T::SQRT_2() / npi.powi(3)
}

/// `<1, e_n> = sqrt(2) (1 - (-1)^n) / (n pi)`; zero for even `n`.
pub fn one_coefficient<T: Real>(n: usize) -> T {
    if n % 2 == 0 {
        return T::zero();
    }
    T::lit(2.0) * T::SQRT_2() / (T::from_usize_lossy(n) * T::PI())
}

/// `erf(x / sqrt(4 eps t))`.
pub fn erf_layer<T: Real>(eps: T, t: T, x: T) -> T {
    if t == T::zero() {
        return if x > T::zero() { T::one() } else if x < T::zero() { -T::one() } else { T::zero() };
    }
    erf(x / (T::lit(4.0) * eps * t).sqrt())
}

/// Below this value of `eps t` the image series is used for `G`.
pub const G_CROSSOVER: f64 = 0.02;

/// Heat solution on `(0,1)` with unit initial data and zero Dirichlet data,
/// viscosity `eps`, at time `t`.
pub fn elementary_g<T: Real>(eps: T, t: T, x: T, n_modes: usize) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(Error::invalid("eps", "viscosity must be positive"));
    }
    if !(t > T::zero()) {
        return Err(Error::invalid("t", "time must be positive"));
    }
    if eps * t < T::lit(G_CROSSOVER) {
        Ok(g_image_series(eps, t, x))
    } else {
        Ok(g_sine_series(eps, t, x, n_modes))
    }
}

/// `G` by reflections of the erf profile across both walls.
pub fn g_image_series<T: Real>(eps: T, t: T, x: T) -> T {
    let sigma = (T::lit(4.0) * eps * t).sqrt();
    let cutoff = T::lit(7.0);
    let one = T::one();
    let mut g = one;
    let mut sign = one;
    for k in 0..64 {
        let kf = T::from_usize_lossy(k);
        let left = (kf + x) / sigma;
        let right = (kf + one - x) / sigma;
        if left > cutoff && right > cutoff {
            break;
        }
        g = g - sign * (erfc(left) + erfc(right));
        sign = -sign;
    }
    g
}

/// `G = sum_{n odd} 4/(n pi) exp(-eps n^2 pi^2 t) sin(n pi x)` over `n <= n_modes`.
pub fn g_sine_series<T: Real>(eps: T, t: T, x: T, n_modes: usize) -> T {
    let pi = T::PI();
    let mut sum = T::zero();
    let mut n = 1;
    while n <= n_modes {
        let nf = T::from_usize_lossy(n);
        let arg = eps * nf * nf * pi * pi * t;
        if arg > T::lit(45.0) {
            break;
        }
        sum = sum + T::lit(4.0) / (nf * pi) * (-arg).exp() * (nf * pi * x).sin();
        n += 2;
    }
    sum
}

/// `H = G - erf(x/sqrt(4 eps t))` on `(0, 1/2]`.
pub fn corrector_h<T: Real>(eps: T, t: T, x: T, n_modes: usize) -> Result<T> {
    if !(x > T::zero() && x <= T::lit(0.5)) {
        return Err(Error::invalid("x", format!("{x} outside (0, 1/2]")));
    }
    Ok(elementary_g(eps, t, x, n_modes)? - erf_layer(eps, t, x))
}

/// Trace mismatch `-(d/dx) erf(x/sqrt(4s))` at `x = 1/2`.
pub fn sigma<T: Real>(s: T) -> T {
    -(T::one() / (s * T::PI()).sqrt()) * (-T::one() / (T::lit(16.0) * s)).exp()
}

/// Sine-series evaluator for `Phi(tau) = exp(eps tau d_xx) rho`, its
/// derivatives and the rescaled correction `phi = (Phi - rho)/eps`.
#[derive(Clone, Debug)]
pub struct PhiSeries<T> {
    eps: T,
    /// `(n pi, rho_n)` for even `n`.
    terms: Vec<(T, T)>,
}

impl<T: Real> PhiSeries<T> {
    pub fn new(eps: T, n_modes: usize) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(Error::invalid("eps", "viscosity must be positive"));
        }
        let terms = (2..=n_modes).step_by(2).map(|n| (T::from_usize_lossy(n) * T::PI(), rho_coefficient(n))).collect();
        Ok(Self { eps, terms })
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    fn sum(&self, x: T, f: impl Fn(T, T) -> T, trig: impl Fn(T) -> T) -> T {
        self.terms.iter().map(|&(k, r)| f(k, r) * trig(k * x)).sum::<T>() * T::SQRT_2()
    }

    pub fn value(&self, tau: T, x: T) -> T {
        self.sum(x, |k, r| r * (-self.eps * k * k * tau).exp(), |a| a.sin())
    }

    pub fn dx(&self, tau: T, x: T) -> T {
        self.sum(x, |k, r| r * k * (-self.eps * k * k * tau).exp(), |a| a.cos())
    }

    /// `Phi_tx = eps Phi_xxx`.
    pub fn dtx(&self, tau: T, x: T) -> T {
        self.sum(x, |k, r| -self.eps * k * k * r * k * (-self.eps * k * k * tau).exp(), |a| a.cos())
    }

    /// `phi_x` with `phi = (Phi - rho)/eps`, free of cancellation.
    pub fn small_phi_dx(&self, tau: T, x: T) -> T {
        self.sum(x, |k, r| r * k * (-self.eps * k * k * tau).exp_m1() / self.eps, |a| a.cos())
    }

    /// Coefficients `(n, c_n)` of `Phi_x` in the basis `sqrt(2) cos(n pi x)`.
    pub fn dx_cosine_coefficients(&self, tau: T) -> Vec<T> {
        self.terms.iter().map(|&(k, r)| r * k * (-self.eps * k * k * tau).exp()).collect()
    }

    /// Cosine wavenumbers `n pi` matching [`Self::dx_cosine_coefficients`].
    pub fn wavenumbers(&self) -> Vec<T> {
        self.terms.iter().map(|&(k, _)| k).collect()
    }
}

/// Sampled `Phi`, `Phi_x` and `phi` on `tau in [0, horizon] x (0,1)`.
#[derive(Clone, Debug)]
pub struct PhiFields<T> {
    pub phi: Field<T>,
    pub phi_x: Field<T>,
    pub small_phi: Field<T>,
}

/// Solves the backward profile equation `Phi_tau = eps Phi_xx`, `Phi(0) = rho`
/// spectrally on the given grids, together with `phi = (Phi - rho)/eps`.
pub fn solve_phi<T: Real>(eps: T, time: TimeGrid<T>, space: SpaceGrid<T>) -> Result<PhiFields<T>> {
    if !(eps > T::zero()) {
        return Err(Error::invalid("eps", "viscosity must be positive"));
    }
    let basis = SineBasis::new(space);
    let n = space.n_x();
    let pi2 = T::PI() * T::PI();
    let rho: Vec<T> = (1..=n).map(rho_coefficient).collect();
    let mut phi = Vec::with_capacity(time.n_t() + 1);
    let mut phi_x = Vec::with_capacity(time.n_t() + 1);
    let mut small = Vec::with_capacity(time.n_t() + 1);
    for tau in time.nodes() {
        let mut c = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        for (k, &r) in rho.iter().enumerate() {
            let nf = T::from_usize_lossy(k + 1);
            let z = -eps * nf * nf * pi2 * tau;
            c.push(r * z.exp());
            d.push(r * z.exp_m1() / eps);
        }
        let (v, dv) = basis.synthesize_with_derivative(&c)?;
        phi.push(v);
        phi_x.push(dv);
        small.push(basis.synthesize_coeffs(&d)?);
    }
    Ok(PhiFields {
        phi: Field::new(phi, time, space)?,
        phi_x: Field::new(phi_x, time, space)?,
        small_phi: Field::new(small, time, space)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_values() {
        assert!((rho_eval(0.0f64, 1).unwrap() + 1.0 / 30.0).abs() < 1e-16);
        assert!(rho_eval(0.5f64, 0).unwrap().abs() < 1e-16);
        assert_eq!(rho_eval(1.0f64, 2).unwrap(), 0.0);
        assert!(rho_eval(0.3f64, 3).is_err());
    }

    #[test]
    fn sigma_value() {
        let want = -(1.0 / (0.01 * std::f64::consts::PI).sqrt()) * (-6.25f64).exp();
        assert!((sigma(0.01f64) - want).abs() < 1e-16);
        assert!((sigma(0.01f64) + 0.0108914).abs() < 1e-7);
    }

    #[test]
    fn representations_agree() {
        let g1 = g_sine_series(0.01f64, 0.5, 0.25, 512);
        let g2 = g_image_series(0.01f64, 0.5, 0.25);
        assert!((g1 - g2).abs() < 1e-10);
    }
}
