use crate::scalar::Real;

/// Extension of a kernel on the unit square to the plane minus the diagonal:
/// constant along diagonals in the strip `|x - y| < 1`, then a power decay
/// `|x - y|^{-1+s}` matched to the corner values.
#[derive(Clone, Debug)]
pub struct ExtendedKernel<F, T> {
    inner: F,
    order: T,
}

pub fn extend_kernel<T: Real, F: Fn(T, T) -> T>(inner: F, order: T) -> ExtendedKernel<F, T> {
    ExtendedKernel { inner, order }
}

impl<T: Real, F: Fn(T, T) -> T> ExtendedKernel<F, T> {
    pub fn inner(&self, x: T, y: T) -> T {
        (self.inner)(x, y)
    }

    pub fn eval(&self, x: T, y: T) -> T {
        let (zero, one) = (T::zero(), T::one());
        let inside = |v: T| v >= zero && v <= one;
        if inside(x) && inside(y) {
            return (self.inner)(x, y);
        }
        let d = (x - y).abs();
        let decay = |corner: T| corner * d.powf(self.order - one);
        if y > x {
            if d >= one {
                decay((self.inner)(zero, one))
            } else if x <= zero {
                (self.inner)(zero, d)
            } else {
                (self.inner)(one - d, one)
            }
        } else if d >= one {
            decay((self.inner)(one, zero))
        } else if y <= zero {
            (self.inner)(d, zero)
        } else {
            (self.inner)(one, one - d)
        }
    }
}
