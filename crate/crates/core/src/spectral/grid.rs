use crate::error::{Error, Result};
use crate::scalar::Real;

/// Interior nodes `x_i = i h`, `i = 1..=n_x`, of the unit interval with `h = 1/(n_x+1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceGrid<T> {
    n_x: usize,
    h: T,
}

impl<T: Real> SpaceGrid<T> {
    pub fn new(n_x: usize) -> Result<Self> {
        if n_x == 0 {
            return Err(Error::invalid("n_x", "need at least one interior node"));
        }
        Ok(Self { n_x, h: T::one() / T::from_usize_lossy(n_x + 1) })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn h(&self) -> T {
        self.h
    }

    /// Coordinate of the `i`-th interior node, zero-based (`x = (i+1) h`).
    #[inline]
    pub fn node(&self, i: usize) -> T {
        T::from_usize_lossy(i + 1) / T::from_usize_lossy(self.n_x + 1)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n_x).map(|i| self.node(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(T) -> T) -> Vec<T> {
        (0..self.n_x).map(|i| f(self.node(i))).collect()
    }

    /// Index of the node mirrored about `x = 1/2`.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.n_x - 1 - i
    }
}

/// Uniform time nodes `t_k = k T / n_t`, `k = 0..=n_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    n_t: usize,
    horizon: T,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(n_t: usize, horizon: T) -> Result<Self> {
        if n_t == 0 {
            return Err(Error::invalid("n_t", "need at least one time step"));
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::invalid("horizon", format!("must be positive, got {horizon}")));
        }
        Ok(Self { n_t, horizon })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn dt(&self) -> T {
        self.horizon / T::from_usize_lossy(self.n_t)
    }

    #[inline]
    pub fn node(&self, k: usize) -> T {
        if k == self.n_t {
            self.horizon
        } else {
            self.horizon * T::from_usize_lossy(k) / T::from_usize_lossy(self.n_t)
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..=self.n_t).map(|k| self.node(k)).collect()
    }

    /// Trapezoid weights on the nodes.
    pub fn trapezoid_weights(&self) -> Vec<T> {
        let dt = self.dt();
        let mut w = vec![dt; self.n_t + 1];
        w[0] = dt * T::lit(0.5);
        w[self.n_t] = dt * T::lit(0.5);
        w
    }
}

/// Space-time samples `values[k][i]` at `(t_k, x_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    values: Vec<Vec<T>>,
    time: TimeGrid<T>,
    space: SpaceGrid<T>,
}

impl<T: Real> Field<T> {
    pub fn new(values: Vec<Vec<T>>, time: TimeGrid<T>, space: SpaceGrid<T>) -> Result<Self> {
        if values.len() != time.n_t() + 1 {
            return Err(Error::DimensionMismatch { expected: time.n_t() + 1, found: values.len() });
        }
        if let Some(row) = values.iter().find(|r| r.len() != space.n_x()) {
            return Err(Error::DimensionMismatch { expected: space.n_x(), found: row.len() });
        }
        Ok(Self { values, time, space })
    }

    pub fn zeros(time: TimeGrid<T>, space: SpaceGrid<T>) -> Self {
        Self { values: vec![vec![T::zero(); space.n_x()]; time.n_t() + 1], time, space }
    }

    pub fn time_grid(&self) -> &TimeGrid<T> {
        &self.time
    }

    pub fn space_grid(&self) -> &SpaceGrid<T> {
        &self.space
    }

    pub fn at(&self, k: usize) -> &[T] {
        &self.values[k]
    }

    pub fn last(&self) -> &[T] {
        &self.values[self.time.n_t()]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }

    /// Pointwise `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.time != other.time || self.space != other.space {
            return Err(Error::DimensionMismatch { expected: self.values.len(), found: other.values.len() });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| x - y).collect())
            .collect();
        Ok(Self { values, time: self.time, space: self.space })
    }

    /// `max_{t,x} |f(t,x) - s f(t,1-x)|` with `s = 1` for even and `s = -1` for odd checks.
    pub fn parity_defect(&self, sign: T) -> T {
        let mut worst = T::zero();
        for row in &self.values {
            for i in 0..row.len() {
                worst = worst.max((row[i] - sign * row[self.space.mirror(i)]).abs());
            }
        }
        worst
    }

    /// Discrete `L^2(0,T; L^2(0,1))` norm (trapezoid in time, interior sum in space).
    pub fn l2_norm(&self) -> T {
        let w = self.time.trapezoid_weights();
        let h = self.space.h();
        self.values
            .iter()
            .zip(&w)
            .map(|(row, &wk)| wk * h * row.iter().map(|&v| v * v).sum::<T>())
            .sum::<T>()
            .sqrt()
    }

    /// Discrete `L^2` norm of the time derivative by forward differences.
    pub fn time_derivative_l2(&self) -> T {
        let dt = self.time.dt();
        let h = self.space.h();
        self.values
            .windows(2)
            .map(|p| {
                p[0].iter().zip(&p[1]).map(|(&a, &b)| ((b - a) / dt).powi(2)).sum::<T>() * h * dt
            })
            .sum::<T>()
            .sqrt()
    }
}

/// Scalar control sampled on a time grid, with its running primitive.
#[derive(Clone, Debug, PartialEq)]
pub struct Control<T> {
    grid: TimeGrid<T>,
    samples: Vec<T>,
    primitive: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> Control<T> {
    pub fn new(grid: TimeGrid<T>, samples: Vec<T>) -> Result<Self> {
        if samples.len() != grid.n_t() + 1 {
            return Err(Error::DimensionMismatch { expected: grid.n_t() + 1, found: samples.len() });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("samples", "non-finite control value"));
        }
        let dt = grid.dt();
        let half = T::lit(0.5);
        let mut primitive = Vec::with_capacity(samples.len());
        let mut acc = T::zero();
        primitive.push(acc);
        for p in samples.windows(2) {
            acc = acc + half * dt * (p[0] + p[1]);
            primitive.push(acc);
        }
        let weights = grid.trapezoid_weights();
        Ok(Self { grid, samples, primitive, weights })
    }

    pub fn from_fn(grid: TimeGrid<T>, f: impl Fn(T) -> T) -> Self {
        let samples = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, samples).expect("sample count matches grid")
    }

    pub fn zero(grid: TimeGrid<T>) -> Self {
        Self::from_fn(grid, |_| T::zero())
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn primitive(&self) -> &[T] {
        &self.primitive
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::new(self.grid, self.samples.iter().map(|&v| v * c).collect()).expect("same grid")
    }

    pub fn add_scaled(&self, c: T, other: &Self) -> Result<Self> {
        if other.grid != self.grid {
            return Err(Error::DimensionMismatch { expected: self.samples.len(), found: other.samples.len() });
        }
        Self::new(self.grid, self.samples.iter().zip(&other.samples).map(|(&a, &b)| a + c * b).collect())
    }

    /// Piecewise-linear interpolant of the samples.
    pub fn eval(&self, t: T) -> T {
        let n = self.grid.n_t();
        let pos = (t / self.grid.dt()).max(T::zero());
        let k = pos.floor().to_usize().unwrap_or(n).min(n - 1);
        let theta = (pos - T::from_usize_lossy(k)).min(T::one());
        self.samples[k] * (T::one() - theta) + self.samples[k + 1] * theta
    }

    /// Exact primitive of the piecewise-linear interpolant.
    pub fn primitive_at(&self, t: T) -> T {
        let n = self.grid.n_t();
        let dt = self.grid.dt();
        let pos = (t / dt).max(T::zero());
        let k = pos.floor().to_usize().unwrap_or(n).min(n - 1);
        let theta = (pos - T::from_usize_lossy(k)).min(T::one());
        let (a, b) = (self.samples[k], self.samples[k + 1]);
        self.primitive[k] + dt * (a * theta + (b - a) * theta * theta * T::lit(0.5))
    }

    /// Averages of the interpolant over `cells` equal cells of `(0, T)`.
    pub fn cell_averages(&self, cells: usize) -> Vec<T> {
        let horizon = self.grid.horizon();
        let width = horizon / T::from_usize_lossy(cells);
        let edges: Vec<T> = (0..=cells)
            .map(|j| if j == cells { self.primitive_at(horizon) } else { self.primitive_at(width * T::from_usize_lossy(j)) })
            .collect();
        edges.windows(2).map(|p| (p[1] - p[0]) / width).collect()
    }

    /// Averages of the primitive `U` over `cells` equal cells.
    pub fn primitive_cell_averages(&self, cells: usize) -> Vec<T> {
        // Integrate U exactly: it is piecewise quadratic between samples.
        let horizon = self.grid.horizon();
        let width = horizon / T::from_usize_lossy(cells);
        let integral_u_to = |t: T| -> T {
            let n = self.grid.n_t();
            let dt = self.grid.dt();
            let pos = (t / dt).max(T::zero());
            let k = pos.floor().to_usize().unwrap_or(n).min(n - 1);
            let theta = (pos - T::from_usize_lossy(k)).min(T::one());
            let mut acc = T::zero();
            for j in 0..k {
                acc = acc + self.segment_primitive_integral(j, T::one());
            }
            acc + self.segment_primitive_integral(k, theta)
        };
        let edges: Vec<T> = (0..=cells).map(|j| integral_u_to(width * T::from_usize_lossy(j))).collect();
        edges.windows(2).map(|p| (p[1] - p[0]) / width).collect()
    }

    /// `int_{t_j}^{t_j + theta dt} U`.
    fn segment_primitive_integral(&self, j: usize, theta: T) -> T {
        let dt = self.grid.dt();
        let (a, b) = (self.samples[j], self.samples[j + 1]);
        let th2 = theta * theta;
        dt * (self.primitive[j] * theta + dt * (a * th2 * T::lit(0.5) + (b - a) * th2 * theta / T::lit(6.0)))
    }

    /// Trapezoid `L^2(0,T)` norm.
    pub fn l2_norm(&self) -> T {
        self.samples.iter().zip(&self.weights).map(|(&u, &w)| w * u * u).sum::<T>().sqrt()
    }

    /// Trapezoid `L^1(0,T)` norm.
    pub fn l1_norm(&self) -> T {
        self.samples.iter().zip(&self.weights).map(|(&u, &w)| w * u.abs()).sum()
    }

    /// Trapezoid inner product with another control on the same grid.
    pub fn inner(&self, other: &Self) -> T {
        self.samples.iter().zip(&other.samples).zip(&self.weights).map(|((&a, &b), &w)| w * a * b).sum()
    }
}
