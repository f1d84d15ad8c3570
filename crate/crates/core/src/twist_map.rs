//! Standard-like twist maps `T(x, y) = (x + y + g(x), y + g(x))` and their
//! generating function `h(x, x') = ½(x - x')² + G(x)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::fourier::{FourierError, FourierSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("force profile must have zero mean, got {0}")]
    NonZeroMean(f64),
    #[error("force profile must be real on the real line")]
    NotReal,
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// A point of the lifted cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// The force `g = eps_scale · base`, its zero-mean primitive `G`, and `g'`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    base: FourierSeries,
    g: FourierSeries,
    g_prime: FourierSeries,
    potential: FourierSeries,
    eps_scale: f64,
    strip_radius: f64,
    norm_r1: f64,
}

impl MapSpec {
    pub fn new(base: FourierSeries, eps_scale: f64, strip_radius: f64) -> Result<Self, MapError> {
        if !base.is_real_symmetric() || base.symmetry_defect() > 0.0 {
            return Err(MapError::NotReal);
        }
        if base.mean().norm() > 0.0 {
            return Err(MapError::NonZeroMean(base.mean().re));
        }
        let g = base.scaled(eps_scale);
        let potential = g.primitive_zero_mean()?;
        let g_prime = g.derivative();
        let norm_r1 = g.strip_norm(strip_radius);
        Ok(Self { base, g, g_prime, potential, eps_scale, strip_radius, norm_r1 })
    }

    /// `g = ε sin 2πx`.
    pub fn standard(eps: f64) -> Self {
        Self::new(FourierSeries::from_cos_sin(0.0, &[], &[1.0]), eps, 0.1).expect("sine profile is real with zero mean")
    }

    /// `g = ε₁ sin 2πx + ε₂ sin 4πx`.
    pub fn two_mode(eps1: f64, eps2: f64) -> Self {
        Self::new(FourierSeries::from_cos_sin(0.0, &[], &[eps1, eps2]), 1.0, 0.1)
            .expect("sine profile is real with zero mean")
    }

    /// `g = 0`.
    pub fn integrable() -> Self {
        Self::new(FourierSeries::zeros(1), 0.0, 0.1).expect("zero profile")
    }

    /// Same base profile with a different multiplier.
    pub fn with_scale(&self, eps_scale: f64) -> Self {
        Self::new(self.base.clone(), eps_scale, self.strip_radius).expect("base already validated")
    }

    pub fn force_series(&self) -> &FourierSeries {
        &self.g
    }

    pub fn force_derivative_series(&self) -> &FourierSeries {
        &self.g_prime
    }

    pub fn potential_series(&self) -> &FourierSeries {
        &self.potential
    }

    pub fn eps_scale(&self) -> f64 {
        self.eps_scale
    }

    pub fn strip_radius(&self) -> f64 {
        self.strip_radius
    }

    /// Upper bound `Σ |ĝ_k| e^{2π|k|R₁}` for the sup-norm of `g` on the strip of radius `R₁`.
    pub fn norm_r1(&self) -> f64 {
        self.norm_r1
    }

    pub fn is_integrable(&self) -> bool {
        self.g.l1_norm() == 0.0
    }

    pub fn force(&self, x: f64) -> f64 {
        self.g.evaluate(Complex64::new(x, 0.0)).re
    }

    pub fn force_derivative(&self, x: f64) -> f64 {
        self.g_prime.evaluate(Complex64::new(x, 0.0)).re
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.potential.evaluate(Complex64::new(x, 0.0)).re
    }

    pub fn apply(&self, p: PhasePoint) -> PhasePoint {
        let y = p.y + self.force(p.x);
        PhasePoint { x: p.x + y, y }
    }

    /// The map continued to complex coordinates.
    pub fn apply_complex(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let y1 = y + self.g.evaluate(x);
        (x + y1, y1)
    }

    /// The map on deviations from the rigid rotation: for `(θ + a, ω + b)`
    /// returns `(a', b')` with `T(θ + a, ω + b) = (θ + ω + a', ω + b')`.
    /// The rotation part cancels exactly, so no precision is lost to `θ + ω`.
    pub fn apply_deviation(&self, theta: f64, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        let b1 = b + self.g.evaluate(theta + a);
        (a + b1, b1)
    }

    /// Determinant of the Jacobian `[[1 + g', 1], [g', 1]]`.
    pub fn jacobian_det(&self, p: PhasePoint) -> f64 {
        let gp = self.force_derivative(p.x);
        (1.0 + gp) * 1.0 - gp
    }

    pub fn generating_h(&self, x0: f64, x1: f64) -> f64 {
        0.5 * (x1 - x0).powi(2) + self.potential(x0)
    }

    pub fn generating_h_complex(&self, x0: Complex64, x1: Complex64) -> Complex64 {
        0.5 * (x1 - x0).powi(2) + self.potential.evaluate(x0)
    }

    /// `(∂₁h, ∂₂h)` at `(x0, x1)`.
    pub fn partial_derivatives_h(&self, x0: f64, x1: f64) -> (f64, f64) {
        (x0 - x1 + self.force(x0), x1 - x0)
    }

    /// The mixed derivative `∂²h/∂x₀∂x₁`; constant for this family.
    pub fn twist(&self) -> f64 {
        -1.0
    }

    /// Defects of the two identities
    /// `h(x+m, x'+m+1) = h(x, x') + x' - x + ½` and `h(x', x) = h(x, x') + G(x') - G(x)`.
    pub fn h_symmetry_defects(&self, x: f64, x1: f64, m: i64) -> (f64, f64) {
        let m = m as f64;
        let h = self.generating_h(x, x1);
        let d1 = self.generating_h(x + m, x1 + m + 1.0) - h - (x1 - x) - 0.5;
        let d2 = self.generating_h(x1, x) - h - self.potential(x1) + self.potential(x);
        (d1, d2)
    }

    /// `n_steps + 1` points starting at `p0`.
    pub fn orbit(&self, p0: PhasePoint, n_steps: usize) -> Vec<PhasePoint> {
        let mut out = Vec::with_capacity(n_steps + 1);
        let mut p = p0;
        out.push(p);
        for _ in 0..n_steps {
            p = self.apply(p);
            out.push(p);
        }
        out
    }

    /// Rotation number estimate from `n_steps` iterates without storing the orbit.
    /// The integer part of `x` is carried separately so long orbits keep full precision.
    pub fn rotation_number_along(&self, p0: PhasePoint, n_steps: usize) -> RotationEstimate {
        let half = n_steps / 2;
        let start = p0.x.floor();
        let mut p = PhasePoint::new(p0.x - start, p0.y);
        let frac0 = p.x;
        let mut wraps = 0i64;
        let mut disp_half = 0.0;
        for i in 1..=n_steps {
            p = self.apply(p);
            let f = p.x.floor();
            p.x -= f;
            wraps += f as i64;
            if i == half {
                disp_half = wraps as f64 + (p.x - frac0);
            }
        }
        let disp = wraps as f64 + (p.x - frac0);
        RotationEstimate::from_endpoints(0.0, disp_half, disp, n_steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationEstimate {
    pub omega: f64,
    /// `|(x_n - x_0)/n - (x_{n/2} - x_0)/(n/2)|`.
    pub error_indicator: f64,
}

impl RotationEstimate {
    fn from_endpoints(x0: f64, x_half: f64, x_n: f64, n: usize) -> Self {
        if n == 0 {
            return Self { omega: 0.0, error_indicator: f64::INFINITY };
        }
        let omega = (x_n - x0) / n as f64;
        let half = n / 2;
        let error_indicator = if half == 0 { f64::INFINITY } else { (omega - (x_half - x0) / half as f64).abs() };
        Self { omega, error_indicator }
    }
}

/// `(x_n - x_0)/n` over a stored orbit.
pub fn rotation_number_estimate(orbit: &[PhasePoint]) -> RotationEstimate {
    let n = orbit.len().saturating_sub(1);
    if n == 0 {
        return RotationEstimate::from_endpoints(0.0, 0.0, 0.0, 0);
    }
    RotationEstimate::from_endpoints(orbit[0].x, orbit[n / 2].x, orbit[n].x, n)
}
