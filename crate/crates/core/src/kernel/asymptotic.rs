use super::matrix::{midpoint_nodes, KernelMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `(2 - s1 - s2)^{3/2} - |s1 - s2|^{3/2}`.
pub fn k0_value<T: Real>(s1: T, s2: T) -> T {
    let p = |v: T| v * v.sqrt();
    p(T::lit(2.0) - s1 - s2) - p((s1 - s2).abs())
}

/// `int_0^1 int_0^1 K^0 = (4/35)(2^{7/2} - 2) - 8/35`.
pub fn k0_unit_form<T: Real>() -> T {
    T::lit(4.0 / 35.0) * (T::lit(2.0).powf(T::lit(3.5)) - T::lit(2.0)) - T::lit(8.0 / 35.0)
}

/// `K^0` at the cell midpoints of `(0,1)`.
pub fn assemble_k0<T: Real>(m: usize) -> Result<KernelMatrix<T>> {
    assemble_k0_at(midpoint_nodes(m))
}

pub fn assemble_k0_at<T: Real>(nodes: Vec<T>) -> Result<KernelMatrix<T>> {
    if nodes.len() < 2 {
        return Err(Error::invalid("M", "at least two nodes required"));
    }
    if nodes.iter().any(|&s| !(s >= T::zero() && s <= T::one())) {
        return Err(Error::invalid("nodes", "must lie in [0, 1]"));
    }
    KernelMatrix::from_symmetric_fn(nodes, None, "closed-form".into(), k0_value)
}
