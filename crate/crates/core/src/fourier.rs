//! Truncated Fourier series of 1-periodic functions.
//!
//! A [`FourierSeries`] holds the coefficients `c_k`, `k = -N..=N`, of
//! `f(θ) = Σ c_k e^{2πikθ}`. Linear operations (shift, derivative, primitive)
//! act diagonally on the coefficients and are exact; nonlinear compositions go
//! through an oversampled [`Grid`].

use std::cell::RefCell;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

/// Largest admissible `|log|e^{2πikω}||` before a shift or an evaluation is refused.
pub const DEFAULT_EXPONENT_BUDGET: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error("coefficient vector has even length {0}; expected 2N+1")]
    EvenLength(usize),
    #[error("shift by Im = {im} at cutoff {cutoff} exceeds the exponent budget {budget}")]
    ShiftOverflow { im: f64, cutoff: usize, budget: f64 },
    #[error("series has nonzero mean {0}")]
    NonZeroMean(Complex64),
    #[error("grid of {n} points cannot resolve {required} (must be a power of two >= {required})")]
    GridTooSmall { n: usize, required: usize },
}

/// Coefficients `c_k` for `k ∈ [-N, N]`, stored at index `k + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    cutoff: usize,
    coeffs: Vec<Complex64>,
    real_symmetric: bool,
}

impl FourierSeries {
    pub fn zeros(cutoff: usize) -> Self {
        Self { cutoff, coeffs: vec![Complex64::new(0.0, 0.0); 2 * cutoff + 1], real_symmetric: true }
    }

    /// General complex series from coefficients ordered `k = -N..=N`.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self, FourierError> {
        if coeffs.len().is_multiple_of(2) {
            return Err(FourierError::EvenLength(coeffs.len()));
        }
        let cutoff = coeffs.len() / 2;
        Ok(Self { cutoff, coeffs, real_symmetric: false })
    }

    /// Series of a real function. The coefficients are projected onto
    /// `c_{-k} = conj(c_k)` so the symmetry holds exactly.
    pub fn real_from_coeffs(coeffs: Vec<Complex64>) -> Result<Self, FourierError> {
        let mut s = Self::from_coeffs(coeffs)?;
        s.symmetrize();
        Ok(s)
    }

    /// `a_0 + Σ_{k≥1} a_k cos 2πkθ + b_k sin 2πkθ`, with `cos[k-1] = a_k`, `sin[k-1] = b_k`.
    pub fn from_cos_sin(a0: f64, cos: &[f64], sin: &[f64]) -> Self {
        let cutoff = cos.len().max(sin.len());
        let mut s = Self::zeros(cutoff);
        s.coeffs[cutoff] = Complex64::new(a0, 0.0);
        for k in 1..=cutoff {
            let a = cos.get(k - 1).copied().unwrap_or(0.0);
            let b = sin.get(k - 1).copied().unwrap_or(0.0);
            let c = Complex64::new(0.5 * a, -0.5 * b);
            s.coeffs[cutoff + k] = c;
            s.coeffs[cutoff - k] = c.conj();
        }
        s
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Coefficients ordered `k = -N..=N`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_real_symmetric(&self) -> bool {
        self.real_symmetric
    }

    /// `c_k`, zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.cutoff as i64) as usize]
        }
    }

    fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.cutoff as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - n, c))
    }

    /// Builds a series from a per-mode rule; the result is real-symmetric only
    /// if `real` is set, in which case the rule is evaluated for `k ≥ 0` and mirrored.
    fn from_rule(cutoff: usize, real: bool, mut rule: impl FnMut(i64) -> Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * cutoff + 1];
        if real {
            coeffs[cutoff] = Complex64::new(rule(0).re, 0.0);
            for k in 1..=cutoff {
                let c = rule(k as i64);
                coeffs[cutoff + k] = c;
                coeffs[cutoff - k] = c.conj();
            }
        } else {
            for (i, c) in coeffs.iter_mut().enumerate() {
                *c = rule(i as i64 - cutoff as i64);
            }
        }
        Self { cutoff, coeffs, real_symmetric: real }
    }

    /// Maps every coefficient through `f(k, c_k)`. The caller asserts whether
    /// the result is still the series of a real function.
    pub fn map_modes(&self, real: bool, mut f: impl FnMut(i64, Complex64) -> Complex64) -> Self {
        let real = real && self.real_symmetric;
        Self::from_rule(self.cutoff, real, |k| f(k, self.coeff(k)))
    }

    /// Enforces `c_{-k} = conj(c_k)` by averaging and marks the series real.
    pub fn symmetrize(&mut self) {
        let n = self.cutoff;
        self.coeffs[n].im = 0.0;
        for k in 1..=n {
            let c = 0.5 * (self.coeffs[n + k] + self.coeffs[n - k].conj());
            self.coeffs[n + k] = c;
            self.coeffs[n - k] = c.conj();
        }
        self.real_symmetric = true;
    }

    /// Largest `|c_{-k} - conj(c_k)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.cutoff;
        (0..=n).map(|k| (self.coeffs[n - k] - self.coeffs[n + k].conj()).norm()).fold(0.0, f64::max)
    }

    /// Truncates or zero-pads to a new cutoff.
    pub fn resized(&self, cutoff: usize) -> Self {
        let mut out = Self::from_rule(cutoff, false, |k| self.coeff(k));
        out.real_symmetric = self.real_symmetric;
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }

    pub fn scaled_complex(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out.real_symmetric = self.real_symmetric && factor.im == 0.0;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let cutoff = self.cutoff.max(other.cutoff);
        let mut out = Self::from_rule(cutoff, false, |k| self.coeff(k) + other.coeff(k));
        out.real_symmetric = self.real_symmetric && other.real_symmetric;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// `f(θ) ↦ f(-θ)`, i.e. `c_k ↦ c_{-k}`.
    pub fn reflect(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.reverse();
        out
    }

    /// `c_k ↦ conj(c_{-k})`: the series of `θ ↦ conj(f(conj θ))`.
    pub fn conj_reflect(&self) -> Self {
        let mut out = self.reflect();
        out.coeffs.iter_mut().for_each(|c| *c = c.conj());
        out
    }

    /// Σ_k c_k e^{2πikz}.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let n = self.cutoff;
        let mut acc = self.coeffs[n];
        if n == 0 {
            return acc;
        }
        let w = (Complex64::i() * TAU * z).exp();
        let w_inv = (-Complex64::i() * TAU * z).exp();
        let (mut up, mut down) = (w, w_inv);
        for k in 1..=n {
            acc += self.coeffs[n + k] * up + self.coeffs[n - k] * down;
            up *= w;
            down *= w_inv;
        }
        if self.real_symmetric && z.im == 0.0 {
            acc.im = 0.0;
        }
        acc
    }

    /// Like [`evaluate`](Self::evaluate) but refuses arguments whose imaginary
    /// part would push `e^{2π N |Im z|}` past the exponent budget.
    pub fn evaluate_checked(&self, z: Complex64, budget: f64) -> Result<Complex64, FourierError> {
        self.check_budget(z.im, budget)?;
        Ok(self.evaluate(z))
    }

    fn check_budget(&self, im: f64, budget: f64) -> Result<(), FourierError> {
        if TAU * self.cutoff as f64 * im.abs() > budget {
            return Err(FourierError::ShiftOverflow { im, cutoff: self.cutoff, budget });
        }
        Ok(())
    }

    /// `θ ↦ f(θ + ω)`: coefficient `k` becomes `c_k e^{2πikω}`.
    pub fn shift(&self, omega: Complex64) -> Result<Self, FourierError> {
        self.shift_with_budget(omega, DEFAULT_EXPONENT_BUDGET)
    }

    pub fn shift_with_budget(&self, omega: Complex64, budget: f64) -> Result<Self, FourierError> {
        self.check_budget(omega.im, budget)?;
        let real = omega.im == 0.0;
        Ok(self.map_modes(real, |k, c| c * (Complex64::i() * TAU * k as f64 * omega).exp()))
    }

    /// `f'`: coefficient `k` becomes `2πik c_k`.
    pub fn derivative(&self) -> Self {
        self.map_modes(true, |k, c| c * Complex64::new(0.0, TAU * k as f64))
    }

    /// The zero-mean primitive: `c_k / (2πik)` for `k ≠ 0`, `0` at `k = 0`.
    pub fn primitive_zero_mean(&self) -> Result<Self, FourierError> {
        let mean = self.mean();
        if mean.norm() > 0.0 {
            return Err(FourierError::NonZeroMean(mean));
        }
        Ok(self.map_modes(true, |k, c| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                c / Complex64::new(0.0, TAU * k as f64)
            }
        }))
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[self.cutoff]
    }

    /// The mean-free part.
    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[self.cutoff] = Complex64::new(0.0, 0.0);
        out
    }

    /// `∫₀¹ a(θ) b(θ) dθ = Σ_k a_k b_{-k}`, the analytic (unconjugated) product.
    pub fn product_mean(a: &Self, b: &Self) -> Complex64 {
        let n = a.cutoff.min(b.cutoff) as i64;
        (-n..=n).map(|k| a.coeff(k) * b.coeff(-k)).sum()
    }

    /// `Σ_k |c_k|`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// `Σ_k |c_k| e^{2π|k|R}`, an upper bound for the sup of `|f|` on the strip `|Im θ| ≤ R`.
    pub fn strip_norm(&self, radius: f64) -> f64 {
        self.modes().map(|(k, c)| c.norm() * (TAU * k.abs() as f64 * radius).exp()).sum()
    }

    /// `|c_N| + |c_{N-1}|` taken over both signs of `k`.
    pub fn tail_indicator(&self) -> f64 {
        let n = self.cutoff as i64;
        let at = |k: i64| self.coeff(k).norm().max(self.coeff(-k).norm());
        if n == 0 {
            return 0.0;
        }
        at(n) + at(n - 1)
    }

    /// Largest coefficient-wise difference, over the union of both ranges.
    pub fn max_coeff_diff(a: &Self, b: &Self) -> f64 {
        let n = a.cutoff.max(b.cutoff) as i64;
        (-n..=n).map(|k| (a.coeff(k) - b.coeff(k)).norm()).fold(0.0, f64::max)
    }

    /// Values `f(j/n)`, `j = 0..n`.
    pub fn sample(&self, n: usize) -> Result<Grid, FourierError> {
        let required = 2 * self.cutoff + 1;
        if !n.is_power_of_two() || n < required {
            return Err(FourierError::GridTooSmall { n, required });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in self.modes() {
            buf[k.rem_euclid(n as i64) as usize] = c;
        }
        fft(n, true).process(&mut buf);
        if self.real_symmetric {
            buf.iter_mut().for_each(|v| v.im = 0.0);
        }
        Ok(Grid { values: buf })
    }

    /// Composition `θ ↦ g(θ + u(θ))` sampled on an oversampled real grid and
    /// projected back to `max(N_g, N_u)` modes.
    pub fn compose_id_plus(g: &Self, u: &Self, n: usize) -> Result<Self, FourierError> {
        Self::compose_id_plus_with_budget(g, u, n, DEFAULT_EXPONENT_BUDGET)
    }

    pub fn compose_id_plus_with_budget(g: &Self, u: &Self, n: usize, budget: f64) -> Result<Self, FourierError> {
        let required = 4 * (g.cutoff + u.cutoff);
        if !n.is_power_of_two() || n < required.max(1) {
            return Err(FourierError::GridTooSmall { n, required });
        }
        let out_cutoff = g.cutoff.max(u.cutoff);
        let grid = compose_on_grid(g, u, n, budget)?;
        let mut out = grid.project(out_cutoff)?;
        if g.real_symmetric && u.real_symmetric {
            out.symmetrize();
        }
        Ok(out)
    }
}

/// Samples `g(θ_j + u(θ_j))` on the real grid `θ_j = j/n`.
pub fn compose_on_grid(g: &FourierSeries, u: &FourierSeries, n: usize, budget: f64) -> Result<Grid, FourierError> {
    let u_vals = u.sample(n)?;
    let mut values = Vec::with_capacity(n);
    for (j, du) in u_vals.values.iter().enumerate() {
        let z = Complex64::new(j as f64 / n as f64, 0.0) + du;
        values.push(g.evaluate_checked(z, budget)?);
    }
    Ok(Grid { values })
}

/// Equispaced samples of a 1-periodic function on `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub values: Vec<Complex64>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discrete Fourier projection onto modes `[-cutoff, cutoff]`.
    pub fn project(&self, cutoff: usize) -> Result<FourierSeries, FourierError> {
        let n = self.values.len();
        let required = 2 * cutoff + 1;
        if !n.is_power_of_two() || n < required {
            return Err(FourierError::GridTooSmall { n, required });
        }
        let mut buf = self.values.clone();
        fft(n, false).process(&mut buf);
        let scale = 1.0 / n as f64;
        let coeffs = (-(cutoff as i64)..=cutoff as i64).map(|k| buf[k.rem_euclid(n as i64) as usize] * scale).collect();
        FourierSeries::from_coeffs(coeffs)
    }

    /// Trapezoid mean, spectrally exact for trigonometric polynomials of degree < n.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}
