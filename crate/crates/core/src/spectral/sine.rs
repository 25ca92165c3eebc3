use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::grid::SpaceGrid;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coefficients against `e_n(x) = sqrt(2) sin(n pi x)`, `n = 1..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState<T> {
    pub coeffs: Vec<T>,
    /// Viscosity the state has been evolved with, if any.
    pub viscosity: Option<T>,
}

impl<T: Real> SpectralState<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs, viscosity: None }
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self::new(vec![T::zero(); n_modes])
    }

    /// Unit coefficient on mode `n` (one-based).
    pub fn mode(n_modes: usize, n: usize) -> Self {
        let mut s = Self::zeros(n_modes);
        s.coeffs[n - 1] = T::one();
        s
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    /// `L^2(0,1)` norm (the basis is orthonormal).
    pub fn l2_norm(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum::<T>().sqrt()
    }
}

/// Fast sine transform between grid samples and sine coefficients.
///
/// Both directions are a length `2(n_x+1)` complex FFT of an odd extension.
#[derive(Clone)]
pub struct SineBasis<T: Real> {
    grid: SpaceGrid<T>,
    len: usize,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for SineBasis<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineBasis").field("n_x", &self.grid.n_x()).finish()
    }
}

impl<T: Real> SineBasis<T> {
    pub fn new(grid: SpaceGrid<T>) -> Self {
        let len = 2 * (grid.n_x() + 1);
        let mut planner = FftPlanner::new();
        Self { grid, len, inverse: planner.plan_fft_inverse(len) }
    }

    pub fn grid(&self) -> &SpaceGrid<T> {
        &self.grid
    }

    pub fn n_x(&self) -> usize {
        self.grid.n_x()
    }

    fn check_samples(&self, samples: &[T]) -> Result<()> {
        if samples.len() != self.n_x() {
            return Err(Error::DimensionMismatch { expected: self.n_x(), found: samples.len() });
        }
        Ok(())
    }

    fn check_modes(&self, n_modes: usize) -> Result<()> {
        if n_modes > self.n_x() {
            return Err(Error::DimensionMismatch { expected: self.n_x(), found: n_modes });
        }
        Ok(())
    }

    /// `sum_i f_i exp(+2 pi i n i / L)` for `n = 0..L`, with `f` placed at grid indices `1..=n_x`.
    fn transform_samples(&self, samples: &[T]) -> Vec<Complex<T>> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.len];
        for (i, &v) in samples.iter().enumerate() {
            buf[i + 1] = Complex::new(v, T::zero());
        }
        self.inverse.process(&mut buf);
        buf
    }

    /// Sine coefficients of grid samples, truncated to `n_modes`.
    pub fn analyze(&self, samples: &[T], n_modes: usize) -> Result<SpectralState<T>> {
        self.check_samples(samples)?;
        self.check_modes(n_modes)?;
        let buf = self.transform_samples(samples);
        let scale = T::SQRT_2() * self.grid.h();
        Ok(SpectralState::new((1..=n_modes).map(|n| scale * buf[n].im).collect()))
    }

    /// `sum_i q_i sqrt(2) cos(n pi x_i)`, `n = 1..=n_modes` (no grid weight).
    pub fn cosine_correlate(&self, samples: &[T], n_modes: usize) -> Result<Vec<T>> {
        self.check_samples(samples)?;
        self.check_modes(n_modes)?;
        let buf = self.transform_samples(samples);
        Ok((1..=n_modes).map(|n| T::SQRT_2() * buf[n].re).collect())
    }

    fn synthesize_with(&self, coeffs: &[T], weight: impl Fn(usize) -> T) -> Vec<Complex<T>> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.len];
        for (k, &c) in coeffs.iter().enumerate() {
            buf[k + 1] = Complex::new(weight(k + 1) * c, T::zero());
        }
        self.inverse.process(&mut buf);
        buf
    }

    /// Grid values of the sine series.
    pub fn synthesize(&self, state: &SpectralState<T>) -> Result<Vec<T>> {
        self.synthesize_coeffs(&state.coeffs)
    }

    pub fn synthesize_coeffs(&self, coeffs: &[T]) -> Result<Vec<T>> {
        self.check_modes(coeffs.len())?;
        let buf = self.synthesize_with(coeffs, |_| T::SQRT_2());
        Ok((1..=self.n_x()).map(|i| buf[i].im).collect())
    }

    /// Grid values of the x-derivative of the sine series.
    pub fn synthesize_derivative(&self, coeffs: &[T]) -> Result<Vec<T>> {
        self.check_modes(coeffs.len())?;
        let pi = T::PI();
        let buf = self.synthesize_with(coeffs, |n| T::SQRT_2() * pi * T::from_usize_lossy(n));
        Ok((1..=self.n_x()).map(|i| buf[i].re).collect())
    }

    /// Values and x-derivative from a single transform.
    ///
    /// Derivative weights go in at index `n` and sine weights as `i c_n` at `L - n`;
    /// the real part at grid index `j` is then `D_j + V_j` and at `L - j` it is `D_j - V_j`.
    pub fn synthesize_with_derivative(&self, coeffs: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        self.check_modes(coeffs.len())?;
        let pi = T::PI();
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.len];
        for (k, &c) in coeffs.iter().enumerate() {
            let n = k + 1;
            buf[n] = Complex::new(T::SQRT_2() * pi * T::from_usize_lossy(n) * c, T::zero());
            buf[self.len - n] = Complex::new(T::zero(), T::SQRT_2() * c);
        }
        self.inverse.process(&mut buf);
        let half = T::lit(0.5);
        let (values, derivs) = (1..=self.n_x())
            .map(|i| {
                let (a, b) = (buf[i].re, buf[self.len - i].re);
                ((a - b) * half, (a + b) * half)
            })
            .unzip();
        Ok((values, derivs))
    }
}
