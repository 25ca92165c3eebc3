use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest sampled value of each weakly-singular-kernel ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WsioEstimate<T> {
    /// `|L(x,y)| |x-y|^{1/2}`.
    pub size: T,
    /// `|L(x,y) - L(x',y)| |x-y|^{1/2+delta} / |x-x'|^delta`.
    pub first_holder: T,
    /// The same with the second argument perturbed.
    pub second_holder: T,
    /// Candidates that passed admissibility.
    pub admissible: usize,
}

impl<T: Real> WsioEstimate<T> {
    pub fn kappa(&self) -> T {
        self.size.max(self.first_holder).max(self.second_holder)
    }
}

/// Default Hoelder exponent.
pub const DEFAULT_DELTA: f64 = 0.75;

/// Sampled weakly-singular constant of `l` on `domain^2`.
///
/// Every candidate consumes the same four random draws, so the candidates for
/// `samples` are a prefix of those for any larger count and the estimate is
/// non-decreasing in `samples`. A candidate whose perturbed point leaves the
/// domain, or that lands on the diagonal, is discarded before any evaluation.
pub fn estimate_wsio_kappa<T: Real>(
    l: impl Fn(T, T) -> T,
    domain: (T, T),
    delta: T,
    samples: usize,
    seed: u64,
) -> Result<WsioEstimate<T>> {
    if !(delta > T::lit(0.5) && delta <= T::one()) {
        return Err(Error::invalid("delta", "must lie in (1/2, 1]"));
    }
    let (lo, hi) = domain;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("domain", "need a bounded non-empty interval"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = T::lit(0.5);
    let mut est = WsioEstimate { size: T::zero(), first_holder: T::zero(), second_holder: T::zero(), admissible: 0 };
    for _ in 0..samples {
        let draws: [f64; 4] = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
        let x = lo + (hi - lo) * T::lit(draws[0]);
        let y = lo + (hi - lo) * T::lit(draws[1]);
        let d = (x - y).abs();
        let step = d * half * T::lit(draws[2]);
        let sign = if draws[3] < 0.5 { -T::one() } else { T::one() };
        let xp = x + sign * step;
        let yp = y + sign * step;
        if d == T::zero() || step == T::zero() || xp < lo || xp > hi || yp < lo || yp > hi {
            continue;
        }
        est.admissible += 1;
        let base = l(x, y);
        est.size = est.size.max(base.abs() * d.sqrt());
        let scale = d.powf(half + delta) / step.powf(delta);
        est.first_holder = est.first_holder.max((base - l(xp, y)).abs() * scale);
        est.second_holder = est.second_holder.max((base - l(x, yp)).abs() * scale);
    }
    Ok(est)
}

/// Centered mixed derivative `d^2 f / dx dy` with step `min(1e-3, |x-y|/8)`,
/// so the stencil never crosses the diagonal.
pub fn mixed_derivative<T: Real>(f: &impl Fn(T, T) -> T, x: T, y: T) -> T {
    let h = T::lit(1e-3).min((x - y).abs() / T::lit(8.0));
    (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (T::lit(4.0) * h * h)
}
