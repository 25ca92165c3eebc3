//! Error function family and Gauss–Legendre rules.

use crate::scalar::Real;

const SERIES_CUTOFF: f64 = 2.5;

/// Error function, accurate to a few ulps in `f64`.
pub fn erf<T: Real>(x: T) -> T {
    if x < T::zero() {
        return -erf(-x);
    }
    if x < T::lit(SERIES_CUTOFF) {
        erf_series(x)
    } else {
        T::one() - erfc_continued_fraction(x)
    }
}

/// Complementary error function `1 - erf(x)` without cancellation for large `x`.
pub fn erfc<T: Real>(x: T) -> T {
    if x < T::zero() {
        return T::lit(2.0) - erfc(-x);
    }
    // 1 - erf loses at most ~3 digits below the cutoff; the continued
    // fraction converges quickly above it.
    if x < T::lit(SERIES_CUTOFF) {
        T::one() - erf_series(x)
    } else if x > T::lit(27.0) {
        T::zero()
    } else {
        erfc_continued_fraction(x)
    }
}

/// `erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (2n+1)!!`; all terms positive.
fn erf_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0usize;
    loop {
        n += 1;
        term = term * T::lit(2.0) * x2 / T::from_usize_lossy(2 * n + 1);
        sum = sum + term;
        if term < sum * T::epsilon() * T::lit(0.25) || n > 200 {
            break;
        }
    }
    T::lit(2.0) / T::PI().sqrt() * (-x2).exp() * sum
}

/// Lentz evaluation of `erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
fn erfc_continued_fraction<T: Real>(x: T) -> T {
    let tiny = T::min_positive_value() * T::lit(1e10);
    let half = T::lit(0.5);
    let mut f = x;
    if f == T::zero() {
        f = tiny;
    }
    let mut c = f;
    let mut d = T::zero();
    for k in 1..500 {
        let a = half * T::from_usize_lossy(k);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / (T::PI().sqrt() * f)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::from_usize_lossy(n);
    for i in 0..n.div_ceil(2) {
        let guess = (T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut z = guess;
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z = z - dz;
            if dz.abs() <= T::epsilon() * T::lit(4.0) {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let w = T::lit(2.0) / ((T::one() - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Real>(n: usize, z: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = z;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize_lossy(n);
    let dp = nf * (z * p1 - p0) / (z * z - T::one());
    (p1, dp)
}

/// Gauss–Legendre rule mapped onto `[a, b]`, appended to `nodes`/`weights`.
pub fn push_mapped_rule<T: Real>(rule: &(Vec<T>, Vec<T>), a: T, b: T, nodes: &mut Vec<T>, weights: &mut Vec<T>) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    for (z, w) in rule.0.iter().zip(&rule.1) {
        nodes.push(mid + half * *z);
        weights.push(half * *w);
    }
}

/// Adaptive Gauss–Kronrod-free quadrature: recursive Simpson with Richardson correction.
///
/// Used only for scalar one-dimensional integrals with smooth integrands.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> T {
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) * T::lit(0.5);
    let fm = f(m);
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T {
    let m = (a + b) * T::lit(0.5);
    let lm = (a + m) * T::lit(0.5);
    let rm = (m + b) * T::lit(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / T::lit(6.0) * (fa + T::lit(4.0) * flm + fm);
    let right = (b - m) / T::lit(6.0) * (fm + T::lit(4.0) * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= T::lit(15.0) * tol {
        return left + right + diff / T::lit(15.0);
    }
    let half_tol = tol * T::lit(0.5);
    simpson_step(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
}
