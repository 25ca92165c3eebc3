use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::gauss_legendre;
use crate::spectral::Control;

/// Both sides of the integration by parts of `int int_{x<y} L u(x) u(y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IbpCheck<T> {
    /// `int int_{x<y} L(x,y) u(x) u(y)`.
    pub direct: T,
    /// Mixed-derivative part plus boundary part.
    pub transformed: T,
    /// `(1/2) int (d1 L - d2 L)(x,x) U(x)^2`.
    pub boundary_term: T,
}

impl<T: Real> IbpCheck<T> {
    pub fn gap(&self) -> T {
        (self.direct - self.transformed).abs()
    }
}

const GL_ORDER: usize = 8;

/// Compares `int int_{x<y} L u u` with
/// `int int_{x<y} d12 L U U + (1/2) int (d1 L - d2 L)(x,x) U^2`, `U(0) = 0`.
///
/// `u` must live on `[0, 1]`; its linear interpolant is integrated cell by
/// cell (Duffy map on the diagonal cells). Derivatives of `L` are finite
/// differences taken from points of `{x <= y}`; `L` is sampled up to `4e-3`
/// outside the unit square, so it must be defined there.
pub fn ibp_transform_check<T: Real>(l: impl Fn(T, T) -> T, u: &Control<T>) -> Result<IbpCheck<T>> {
    if (u.grid().horizon() - T::one()).abs() > T::lit(1e-12) {
        return Err(Error::invalid("u", "control must be defined on [0, 1]"));
    }
    let probe: Vec<T> = (0..=16).map(|k| T::from_usize_lossy(k) / T::lit(16.0)).collect();
    let scale = probe.iter().flat_map(|&x| probe.iter().map(move |&y| (x, y))).filter(|&(x, y)| x <= y).fold(T::zero(), |m, (x, y)| m.max(l(x, y).abs()));
    let violation = probe.iter().fold(T::zero(), |m, &x| m.max(l(x, T::one()).abs()));
    if violation > T::lit(1e-10) * scale.max(T::one()) {
        return Err(Error::BoundaryCondition { violation: violation.to_f64_lossy() });
    }

    let n = u.grid().n_t();
    let width = T::one() / T::from_usize_lossy(n);
    let (gx, gw) = gauss_legendre::<T>(GL_ORDER);
    let map = |a: T, xi: T| a + width * (xi + T::one()) / T::lit(2.0);
    let wscale = width / T::lit(2.0);
    let prim = |x: T| u.primitive_at(x);

    // Centered mixed difference with one Richardson step.
    let d12 = |x: T, y: T| {
        let h = T::lit(1e-3).min((y - x) / T::lit(4.0));
        let centered = |h: T| (l(x + h, y + h) - l(x + h, y - h) - l(x - h, y + h) + l(x - h, y - h)) / (T::lit(4.0) * h * h);
        (T::lit(4.0) * centered(h / T::lit(2.0)) - centered(h)) / T::lit(3.0)
    };

    let mut direct = T::zero();
    let mut mixed = T::zero();
    for i in 0..n {
        let ai = T::from_usize_lossy(i) * width;
        for (&xi, &wi) in gx.iter().zip(&gw) {
            // Diagonal cell: y = x + (b - x) v on the triangle x < y < b.
            let x = map(ai, xi);
            let b = ai + width;
            for (&vi, &wv) in gx.iter().zip(&gw) {
                let v = (vi + T::one()) / T::lit(2.0);
                let y = x + (b - x) * v;
                let w = wi * wscale * wv / T::lit(2.0) * (b - x);
                direct = direct + w * l(x, y) * u.eval(x) * u.eval(y);
                mixed = mixed + w * d12(x, y) * prim(x) * prim(y);
            }
            for j in i + 1..n {
                let aj = T::from_usize_lossy(j) * width;
                for (&yj, &wj) in gx.iter().zip(&gw) {
                    let y = map(aj, yj);
                    let w = wi * wj * wscale * wscale;
                    direct = direct + w * l(x, y) * u.eval(x) * u.eval(y);
                    mixed = mixed + w * d12(x, y) * prim(x) * prim(y);
                }
            }
        }
    }

    // One-sided fourth-order derivatives from inside {x <= y}.
    let h = T::lit(1e-3);
    let stencil = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let mut boundary = T::zero();
    for i in 0..n {
        let ai = T::from_usize_lossy(i) * width;
        for (&xi, &wi) in gx.iter().zip(&gw) {
            let x = map(ai, xi);
            let (mut d1, mut d2) = (T::zero(), T::zero());
            for (k, &c) in stencil.iter().enumerate() {
                let kh = T::from_usize_lossy(k) * h;
                d1 = d1 - T::lit(c) * l(x - kh, x);
                d2 = d2 + T::lit(c) * l(x, x + kh);
            }
            let diff = (d1 - d2) / (T::lit(12.0) * h);
            let p = prim(x);
            boundary = boundary + wi * wscale * diff * p * p;
        }
    }
    let boundary_term = boundary / T::lit(2.0);
    Ok(IbpCheck { direct, transformed: mixed + boundary_term, boundary_term })
}
