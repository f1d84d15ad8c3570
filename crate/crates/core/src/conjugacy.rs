//! Spectral solver for the conjugacy equation
//! `u(θ+ω) - 2u(θ) + u(θ-ω) = g(θ + u(θ))` at a fixed real or complex `ω`.
//!
//! The iteration runs on the forcing `s = L_ω u` rather than on `u`. On mode
//! `k` the operator `L_ω` multiplies by `(z-1)²/z` with `z = e^{2πikω}`, which
//! is symmetric under `z ↦ 1/z`; writing every multiplier in terms of whichever
//! of `z, 1/z` lies in the closed unit disk keeps all quantities bounded for
//! any `Im ω`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fourier::{compose_on_grid, FourierError, FourierSeries, Grid, DEFAULT_EXPONENT_BUDGET};
use crate::twist_map::{MapSpec, PhasePoint, RotationEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Picard,
    Newton,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Picard => "picard",
            Scheme::Newton => "newton",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Mode cutoff `N` of `u`.
    pub cutoff: usize,
    /// Collocation grid size; a power of two with room for `g ∘ (id + u)`.
    pub grid: usize,
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Smallest admissible `|2(cos 2πkω - 1)|` for `1 ≤ |k| ≤ N`.
    pub min_divisor_guard: f64,
    pub scheme: Scheme,
    /// Picard steps before switching to Newton.
    pub picard_warmup: usize,
    /// On failure, retry from a chain of halved force amplitudes.
    pub continuation: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cutoff: 64,
            grid: 512,
            tol_residual: 1e-12,
            max_iter: 60,
            min_divisor_guard: 1e-14,
            scheme: Scheme::Newton,
            picard_warmup: 5,
            continuation: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, map: &MapSpec) -> Result<(), ConjugacyError> {
        let n_g = map.force_series().cutoff();
        let required = 4 * (self.cutoff + n_g.max(1));
        if self.cutoff == 0 {
            return Err(ConjugacyError::InvalidConfig("cutoff must be positive".into()));
        }
        if !self.grid.is_power_of_two() || self.grid < required {
            return Err(ConjugacyError::InvalidConfig(format!(
                "grid must be a power of two ≥ {required}, got {}",
                self.grid
            )));
        }
        if !(self.tol_residual > 0.0) || !(self.min_divisor_guard >= 0.0) {
            return Err(ConjugacyError::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConjugacyError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("small divisor at mode {k}: |λ_k| = {magnitude:e}")]
    SmallDivisorBreakdown { k: i64, magnitude: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("residual stagnated at {residual:e} after {iterations} iterations")]
    ResidualStagnation { iterations: usize, residual: f64, last: Box<CurveSolution> },
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// `2(cos 2πkω - 1)`, evaluated as `-4 sin²(πkω)`.
pub fn small_divisor(k: i64, omega: Complex64) -> Complex64 {
    let s = (PI * k as f64 * omega).sin();
    -4.0 * s * s
}

/// Per-mode multipliers taking the forcing `s` to `u`, `v`, `u(·+ω)` and `v(·+ω)`.
#[derive(Debug, Clone, Copy)]
struct Mode {
    u: Complex64,
    v: Complex64,
    u_fwd: Complex64,
    v_fwd: Complex64,
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

impl Mode {
    fn zero() -> Self {
        Self { u: ZERO, v: ZERO, u_fwd: ZERO, v_fwd: ZERO }
    }

    fn new(k: i64, omega: Complex64) -> (Self, f64) {
        let phase = TAU * k as f64 * omega;
        let inside = phase.im >= 0.0;
        let phi = if inside { phase } else { -phase };
        let zeta = (Complex64::i() * phi).exp();
        let zm1 = if zeta.norm() < 0.5 {
            zeta - ONE
        } else {
            2.0 * Complex64::i() * (0.5 * Complex64::i() * phi).exp() * (0.5 * phi).sin()
        };
        let magnitude = zm1.norm_sqr() / zeta.norm();
        let u = zeta / (zm1 * zm1);
        let mode = if inside {
            Self { u, v: ONE / zm1, u_fwd: zeta * u, v_fwd: zeta / zm1 }
        } else {
            Self { u, v: -zeta / zm1, u_fwd: ONE / (zm1 * zm1), v_fwd: -ONE / zm1 }
        };
        (mode, magnitude)
    }
}

struct Multipliers {
    cutoff: usize,
    modes: Vec<Mode>,
}

impl Multipliers {
    fn new(cutoff: usize, omega: Complex64, guard: f64) -> Result<Self, ConjugacyError> {
        let mut modes = Vec::with_capacity(2 * cutoff + 1);
        for k in -(cutoff as i64)..=cutoff as i64 {
            if k == 0 {
                modes.push(Mode::zero());
                continue;
            }
            let (mode, magnitude) = Mode::new(k, omega);
            if !(magnitude >= guard) {
                return Err(ConjugacyError::SmallDivisorBreakdown { k, magnitude });
            }
            modes.push(mode);
        }
        Ok(Self { cutoff, modes })
    }

    fn mode(&self, k: i64) -> &Mode {
        &self.modes[(k + self.cutoff as i64) as usize]
    }

    fn apply(&self, s: &FourierSeries, real: bool, pick: impl Fn(&Mode) -> Complex64) -> FourierSeries {
        s.map_modes(real, |k, c| if k == 0 { ZERO } else { c * pick(self.mode(k)) })
    }
}

/// `L_ω⁻¹ f` on zero-mean `f`, with the default divisor guard.
pub fn apply_l_inverse(f: &FourierSeries, omega: Complex64) -> Result<FourierSeries, ConjugacyError> {
    apply_l_inverse_guarded(f, omega, SolverConfig::default().min_divisor_guard)
}

pub fn apply_l_inverse_guarded(
    f: &FourierSeries,
    omega: Complex64,
    guard: f64,
) -> Result<FourierSeries, ConjugacyError> {
    if f.mean().norm() > 0.0 {
        return Err(FourierError::NonZeroMean(f.mean()).into());
    }
    let m = Multipliers::new(f.cutoff(), omega, guard)?;
    Ok(m.apply(f, omega.im == 0.0, |md| md.u))
}

/// `u(θ+ω) - 2u(θ) + u(θ-ω)`.
pub fn apply_l(u: &FourierSeries, omega: Complex64) -> FourierSeries {
    u.map_modes(omega.im == 0.0, |k, c| c * small_divisor(k, omega))
}

/// A solved (or last-iterate) invariant curve `U = θ + u`, `V = ω + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSolution {
    pub omega: Complex64,
    pub u: FourierSeries,
    /// `u - u(· - ω)`.
    pub v: FourierSeries,
    /// `L_ω u`, the iteration variable.
    pub forcing: FourierSeries,
    /// Grid sup of `|L_ω u - g(θ + u)|`.
    pub residual_sup: f64,
    pub invariance_defect: f64,
    /// `|mean g(θ + u)|`.
    pub mean_defect: f64,
    pub iterations: usize,
    pub scheme: Scheme,
    /// Size of the two outermost modes of `u`.
    pub tail_indicator: f64,
    pub residual_history: Vec<f64>,
}

impl CurveSolution {
    fn assemble(
        map: &MapSpec,
        omega: Complex64,
        forcing: FourierSeries,
        grid: usize,
        guard: f64,
    ) -> Result<(Self, Grid), ConjugacyError> {
        let mult = Multipliers::new(forcing.cutoff(), omega, guard)?;
        let real = omega.im == 0.0 && forcing.is_real_symmetric();
        let u = mult.apply(&forcing, real, |m| m.u);
        let v = mult.apply(&forcing, real, |m| m.v);
        let composed = compose_on_grid(map.force_series(), &u, grid, DEFAULT_EXPONENT_BUDGET)?;
        let s_grid = forcing.sample(grid)?;
        let residual_sup = s_grid.values.iter().zip(&composed.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let mean_defect = composed.mean().norm();
        let tail_indicator = u.tail_indicator();
        let sol = Self {
            omega,
            u,
            v,
            forcing,
            residual_sup,
            invariance_defect: f64::NAN,
            mean_defect,
            iterations: 0,
            scheme: Scheme::Picard,
            tail_indicator,
            residual_history: Vec::new(),
        };
        Ok((sol, composed))
    }

    /// Rebuilds a solution from the coefficients of `u` alone.
    pub fn from_u(map: &MapSpec, omega: Complex64, u: FourierSeries, grid: usize) -> Result<Self, ConjugacyError> {
        let mut forcing = apply_l(&u.without_mean(), omega);
        if !forcing.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(ConjugacyError::InvalidConfig("u is too large for this Im ω".into()));
        }
        if omega.im == 0.0 && u.is_real_symmetric() {
            forcing.symmetrize();
        }
        let (mut sol, _) = Self::assemble(map, omega, forcing, grid, 0.0)?;
        sol.invariance_defect = verify_invariance(map, &sol, grid)?;
        Ok(sol)
    }

    /// Same curve with the forcing truncated to `cutoff` modes.
    pub fn truncated(&self, map: &MapSpec, cutoff: usize, grid: usize) -> Result<Self, ConjugacyError> {
        let (mut sol, _) = Self::assemble(map, self.omega, self.forcing.resized(cutoff), grid, 0.0)?;
        sol.invariance_defect = verify_invariance(map, &sol, grid)?;
        Ok(sol)
    }

    /// `(u(θ+ω), v(θ+ω))`.
    pub fn forward_parts(&self) -> Result<(FourierSeries, FourierSeries), ConjugacyError> {
        let mult = Multipliers::new(self.forcing.cutoff(), self.omega, 0.0)?;
        let real = self.omega.im == 0.0 && self.forcing.is_real_symmetric();
        Ok((mult.apply(&self.forcing, real, |m| m.u_fwd), mult.apply(&self.forcing, real, |m| m.v_fwd)))
    }

    /// Rotation number of the orbit of `(U(0), V(0))` under the real map.
    pub fn recovered_rotation(&self, map: &MapSpec, steps: usize) -> RotationEstimate {
        let x = self.u.evaluate(ZERO).re;
        let y = self.omega.re + self.v.evaluate(ZERO).re;
        map.rotation_number_along(PhasePoint::new(x, y), steps)
    }
}

/// Sup over `n_check` points of the defect of `T(U(θ), V(θ)) = (U(θ+ω), V(θ+ω))`.
pub fn verify_invariance(map: &MapSpec, sol: &CurveSolution, n_check: usize) -> Result<f64, ConjugacyError> {
    let (u_fwd, v_fwd) = sol.forward_parts()?;
    let u = sol.u.sample(n_check)?;
    let v = sol.v.sample(n_check)?;
    let uf = u_fwd.sample(n_check)?;
    let vf = v_fwd.sample(n_check)?;
    let mut worst: f64 = 0.0;
    for j in 0..n_check {
        let (a1, b1) = map.apply_deviation(j as f64 / n_check as f64, u.values[j], v.values[j]);
        worst = worst.max((a1 - uf.values[j]).norm()).max((b1 - vf.values[j]).norm());
    }
    Ok(worst)
}

fn projected(composed: &Grid, cutoff: usize, real: bool) -> Result<FourierSeries, FourierError> {
    let mut p = composed.project(cutoff)?;
    if real {
        p.symmetrize();
    }
    Ok(p.without_mean())
}

/// Solves `s = P[g ∘ (id + L⁻¹s)]` by Newton on the Galerkin system,
/// with Jacobian `I - P C L⁻¹`, `C` the multiplication by `g'(θ + u)`.
fn newton_step(
    map: &MapSpec,
    sol: &CurveSolution,
    target: &FourierSeries,
    cfg: &SolverConfig,
    mult: &Multipliers,
    real: bool,
) -> Result<Option<FourierSeries>, ConjugacyError> {
    let n = cfg.cutoff as i64;
    let dim = 2 * cfg.cutoff;
    let index = |k: i64| if k < 0 { (k + n) as usize } else { (k + n - 1) as usize };
    let slope = compose_on_grid(map.force_derivative_series(), &sol.u, cfg.grid, DEFAULT_EXPONENT_BUDGET)?
        .project(2 * cfg.cutoff)?;
    let mut jac = DMatrix::<Complex64>::zeros(dim, dim);
    let mut rhs = DVector::<Complex64>::zeros(dim);
    for j in (-n..=n).filter(|&j| j != 0) {
        rhs[index(j)] = target.coeff(j) - sol.forcing.coeff(j);
        for k in (-n..=n).filter(|&k| k != 0) {
            let mut entry = -slope.coeff(j - k) * mult.mode(k).u;
            if j == k {
                entry += ONE;
            }
            jac[(index(j), index(k))] = entry;
        }
    }
    let Some(delta) = jac.lu().solve(&rhs) else {
        return Ok(None);
    };
    if !delta.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return Ok(None);
    }
    let mut next = sol.forcing.map_modes(false, |k, c| if k == 0 { ZERO } else { c + delta[index(k)] });
    if real {
        next.symmetrize();
    }
    Ok(Some(next))
}

const STAGNATION_RATIO: f64 = 0.9;
const STAGNATION_RUN: usize = 10;
const DIVERGENCE_LEVEL: f64 = 1e6;

/// Solves from `start` (a forcing series) or from `s = 0`.
pub fn solve_conjugacy_from(
    map: &MapSpec,
    omega: Complex64,
    cfg: &SolverConfig,
    start: Option<&FourierSeries>,
) -> Result<CurveSolution, ConjugacyError> {
    cfg.validate(map)?;
    let real = omega.im == 0.0;
    let mult = Multipliers::new(cfg.cutoff, omega, cfg.min_divisor_guard)?;
    let mut forcing = match start {
        Some(s) => s.resized(cfg.cutoff).without_mean(),
        None => FourierSeries::zeros(cfg.cutoff),
    };
    if real {
        forcing.symmetrize();
    }
    let mut history = Vec::new();
    let mut stalled = 0;
    let mut scheme = Scheme::Picard;
    for iteration in 0..=cfg.max_iter {
        let (mut sol, composed) = match CurveSolution::assemble(map, omega, forcing.clone(), cfg.grid, 0.0) {
            Ok(x) => x,
            Err(ConjugacyError::Fourier(FourierError::ShiftOverflow { .. })) => {
                return Err(ConjugacyError::NoConvergence {
                    iterations: iteration,
                    residual: history.last().copied().unwrap_or(f64::INFINITY),
                });
            }
            Err(e) => return Err(e),
        };
        let residual = sol.residual_sup;
        if let Some(&prev) = history.last() {
            stalled = if residual > STAGNATION_RATIO * prev { stalled + 1 } else { 0 };
        }
        history.push(residual);
        sol.iterations = iteration;
        sol.scheme = scheme;
        sol.residual_history = history.clone();
        if !residual.is_finite() || residual > DIVERGENCE_LEVEL {
            return Err(ConjugacyError::NoConvergence { iterations: iteration, residual });
        }
        if residual <= cfg.tol_residual {
            sol.invariance_defect = verify_invariance(map, &sol, cfg.grid)?;
            return Ok(sol);
        }
        if stalled >= STAGNATION_RUN {
            sol.invariance_defect = verify_invariance(map, &sol, cfg.grid)?;
            return Err(ConjugacyError::ResidualStagnation { iterations: iteration, residual, last: Box::new(sol) });
        }
        if iteration == cfg.max_iter {
            break;
        }
        let target = projected(&composed, cfg.cutoff, real)?;
        let picard_rising = scheme == Scheme::Picard && history.len() >= 2 && residual > history[history.len() - 2];
        let use_newton = cfg.scheme == Scheme::Newton && (iteration >= cfg.picard_warmup || picard_rising);
        forcing = if use_newton {
            scheme = Scheme::Newton;
            match newton_step(map, &sol, &target, cfg, &mult, real)? {
                Some(next) => damped(map, omega, cfg, &sol.forcing, &next, residual),
                None => return Err(ConjugacyError::NoConvergence { iterations: iteration, residual }),
            }
        } else {
            scheme = Scheme::Picard;
            target
        };
    }
    Err(ConjugacyError::NoConvergence {
        iterations: cfg.max_iter,
        residual: history.last().copied().unwrap_or(f64::INFINITY),
    })
}

const MAX_HALVINGS: i32 = 12;

/// Backtracks along `current → newton` until the residual drops below
/// `residual`; without a decrease the best trial is kept.
fn damped(
    map: &MapSpec,
    omega: Complex64,
    cfg: &SolverConfig,
    current: &FourierSeries,
    newton: &FourierSeries,
    residual: f64,
) -> FourierSeries {
    let step = newton.sub(current);
    let mut best = (f64::INFINITY, newton.clone());
    for h in 0..=MAX_HALVINGS {
        let trial = if h == 0 { newton.clone() } else { current.add(&step.scaled(0.5f64.powi(h))) };
        let r = CurveSolution::assemble(map, omega, trial.clone(), cfg.grid, 0.0)
            .map_or(f64::INFINITY, |(sol, _)| sol.residual_sup);
        if r < residual {
            return trial;
        }
        if r < best.0 {
            best = (r, trial);
        }
    }
    best.1
}

const CONTINUATION_DEPTH: u32 = 6;

/// Solves the conjugacy equation at `ω`, optionally through an `ε`-continuation.
pub fn solve_conjugacy(map: &MapSpec, omega: Complex64, cfg: &SolverConfig) -> Result<CurveSolution, ConjugacyError> {
    let direct = solve_conjugacy_from(map, omega, cfg, None);
    if direct.is_ok() || !cfg.continuation || map.is_integrable() {
        return direct;
    }
    let eps = map.eps_scale();
    for depth in 1..=CONTINUATION_DEPTH {
        let base = map.with_scale(eps / 2f64.powi(depth as i32));
        let Ok(mut sol) = solve_conjugacy_from(&base, omega, cfg, None) else {
            continue;
        };
        for level in (0..depth).rev() {
            let stage = map.with_scale(eps / 2f64.powi(level as i32));
            let warm = sol.forcing.scaled(2.0);
            sol = solve_conjugacy_from(&stage, omega, cfg, Some(&warm))?;
        }
        return Ok(sol);
    }
    direct
}

/// Sup-differences of the curve symmetries in `ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    /// `u(·, -ω)` against `u(·, ω)`.
    pub reflection: f64,
    /// `u(·, ω + 1)` against `u(·, ω)`.
    pub periodicity: f64,
    /// `u(·, conj ω)` against `conj u(conj ·, ω)`.
    pub conjugation: f64,
    /// `v(·, -ω)` against `-v(· + ω, ω)`.
    pub v_relation: f64,
}

impl SymmetryReport {
    pub fn max(&self) -> f64 {
        self.reflection.max(self.periodicity).max(self.conjugation).max(self.v_relation)
    }
}

pub fn symmetry_checks(map: &MapSpec, omega: Complex64, cfg: &SolverConfig) -> Result<SymmetryReport, ConjugacyError> {
    let base = solve_conjugacy(map, omega, cfg)?;
    let neg = solve_conjugacy(map, -omega, cfg)?;
    let plus = solve_conjugacy(map, omega + 1.0, cfg)?;
    let conj = solve_conjugacy(map, omega.conj(), cfg)?;
    let (_, v_fwd) = base.forward_parts()?;
    Ok(SymmetryReport {
        reflection: FourierSeries::max_coeff_diff(&neg.u, &base.u),
        periodicity: FourierSeries::max_coeff_diff(&plus.u, &base.u),
        conjugation: FourierSeries::max_coeff_diff(&conj.u, &base.u.conj_reflect()),
        v_relation: FourierSeries::max_coeff_diff(&neg.v, &v_fwd.scaled(-1.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden_mean;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn golden() -> Complex64 {
        c(golden_mean(), 0.0)
    }

    #[test]
    fn small_divisor_examples() {
        assert_eq!(small_divisor(0, c(0.37, 0.2)), c(0.0, 0.0));
        assert!((small_divisor(1, c(0.5, 0.0)) - c(-4.0, 0.0)).norm() < 1e-15);
        assert!((small_divisor(2, c(0.25, 0.0)) - c(-4.0, 0.0)).norm() < 1e-15);
        let v = small_divisor(1, c(0.0, 1.0));
        assert!((v.re - 2.0 * (TAU.cosh() - 1.0)).abs() < 1e-10 && v.im.abs() < 1e-10);
        assert!((v.re - 533.49).abs() < 0.01);
        for k in -5..=5 {
            let w = c(0.31, -0.4);
            let direct = 2.0 * ((TAU * k as f64 * w).cos() - 1.0);
            assert!((small_divisor(k, w) - direct).norm() < 1e-12 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn mode_multipliers_match_definitions() {
        for &w in &[c(0.3, 0.0), c(0.3, 0.2), c(-0.6, -0.35), c(0.1, 1.5)] {
            for k in [-4i64, -1, 1, 3] {
                let (m, _) = Mode::new(k, w);
                let z = (Complex64::i() * TAU * k as f64 * w).exp();
                let lambda = small_divisor(k, w);
                assert!((m.u * lambda - ONE).norm() < 1e-12);
                // v = u - u(· - ω), u(· + ω), v(· + ω) = u(· + ω) - u
                assert!((m.v - m.u * (ONE - ONE / z)).norm() < 1e-12 * (1.0 + m.v.norm()));
                assert!((m.u_fwd - m.u * z).norm() < 1e-12 * (1.0 + m.u_fwd.norm()));
                assert!((m.v_fwd - m.u * (z - ONE)).norm() < 1e-12 * (1.0 + m.v_fwd.norm()));
            }
        }
    }

    #[test]
    fn multipliers_stay_finite_far_from_the_real_axis() {
        for &y in &[5.0, -5.0, 40.0] {
            for k in [-256i64, -1, 1, 256] {
                let (m, mag) = Mode::new(k, c(0.3, y));
                for x in [m.u, m.v, m.u_fwd, m.v_fwd] {
                    assert!(x.re.is_finite() && x.im.is_finite());
                }
                assert!(mag > 1.0);
            }
        }
    }

    #[test]
    fn l_inverse_single_mode() {
        let f = FourierSeries::from_cos_sin(0.0, &[], &[1.0]);
        let u = apply_l_inverse(&f, golden()).unwrap();
        let s2 = (PI * golden_mean()).sin().powi(2);
        let expected = f.scaled(-1.0 / (4.0 * s2));
        assert!(FourierSeries::max_coeff_diff(&u, &expected) < 1e-15);
        assert!(u.is_real_symmetric());
        let zero = apply_l_inverse(&FourierSeries::zeros(4), golden()).unwrap();
        assert_eq!(zero.l1_norm(), 0.0);
    }

    #[test]
    fn l_inverse_round_trip() {
        let coeffs: Vec<Complex64> =
            (-6i64..=6)
                .map(|k| {
                    if k == 0 {
                        ZERO
                    } else {
                        c((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos()) / (1.0 + (k * k) as f64)
                    }
                })
                .collect();
        let f = FourierSeries::from_coeffs(coeffs).unwrap();
        for &w in &[golden(), c(0.2, 0.3), c(0.41, -1.2)] {
            let back = apply_l(&apply_l_inverse(&f, w).unwrap(), w);
            assert!(FourierSeries::max_coeff_diff(&back, &f) < 1e-13 * f.l1_norm());
        }
    }

    #[test]
    fn l_inverse_rejects_rationals_and_means() {
        let f = FourierSeries::from_cos_sin(0.0, &[0.0, 1.0], &[]);
        assert!(matches!(apply_l_inverse(&f, c(0.5, 0.0)), Err(ConjugacyError::SmallDivisorBreakdown { k: -2, .. })));
        let biased = FourierSeries::from_cos_sin(1.0, &[1.0], &[]);
        assert!(matches!(apply_l_inverse(&biased, golden()), Err(ConjugacyError::Fourier(_))));
    }

    #[test]
    fn integrable_solution_is_zero() {
        let m = MapSpec::integrable();
        for &w in &[golden(), c(0.2, 0.7)] {
            let sol = solve_conjugacy(&m, w, &SolverConfig::default()).unwrap();
            assert_eq!(sol.u.l1_norm(), 0.0);
            assert_eq!(sol.residual_sup, 0.0);
            assert_eq!(verify_invariance(&m, &sol, 256).unwrap(), 0.0);
        }
    }

    #[test]
    fn small_force_matches_first_order() {
        let eps = 1e-4;
        let m = MapSpec::standard(eps);
        let sol = solve_conjugacy(&m, golden(), &SolverConfig::default()).unwrap();
        let s2 = (PI * golden_mean()).sin().powi(2);
        let first = FourierSeries::from_cos_sin(0.0, &[], &[-eps / (4.0 * s2)]);
        let diff = sol.u.sub(&first.resized(sol.u.cutoff()));
        assert!(diff.sample(256).unwrap().sup_norm() < 1e-6);
        assert!(sol.u.mean().norm() == 0.0 && sol.v.mean().norm() == 0.0);
    }

    #[test]
    fn golden_curve_at_moderate_force() {
        let m = MapSpec::standard(0.05);
        let sol = solve_conjugacy(&m, golden(), &SolverConfig::default()).unwrap();
        assert!(sol.residual_sup <= 1e-12);
        assert!(sol.u.is_real_symmetric() && sol.u.symmetry_defect() == 0.0);
        assert!(sol.mean_defect <= 1e-12);
        assert!(sol.invariance_defect <= 10.0 * sol.residual_sup.max(f64::EPSILON));
        assert!(sol.invariance_defect <= 1e-11);
        assert_eq!(sol.scheme, Scheme::Newton);
        let r = sol.recovered_rotation(&m, 10_000_000);
        assert!((r.omega - golden_mean()).abs() < 1e-8, "{r:?}");
        // a coarser truncation is visibly worse
        let coarse = sol.truncated(&m, 3, 512).unwrap();
        assert!(coarse.invariance_defect > 100.0 * sol.invariance_defect.max(1e-16));
    }

    #[test]
    fn newton_tail_is_quadratic() {
        let m = MapSpec::standard(0.1);
        let cfg = SolverConfig { tol_residual: 1e-14, ..SolverConfig::default() };
        let sol = solve_conjugacy(&m, golden(), &cfg).unwrap();
        let h = &sol.residual_history;
        let tail: Vec<f64> = h[cfg.picard_warmup..].iter().copied().filter(|&r| r > 1e-13).collect();
        for pair in tail.windows(2) {
            assert!(pair[1] <= 50.0 * pair[0] * pair[0] + 1e-13, "{h:?}");
        }
    }

    #[test]
    fn picard_alone_converges_for_small_force() {
        let m = MapSpec::standard(0.02);
        let cfg = SolverConfig { scheme: Scheme::Picard, max_iter: 200, ..SolverConfig::default() };
        let sol = solve_conjugacy(&m, golden(), &cfg).unwrap();
        assert_eq!(sol.scheme, Scheme::Picard);
        let newton = solve_conjugacy(&m, golden(), &SolverConfig::default()).unwrap();
        assert!(FourierSeries::max_coeff_diff(&sol.u, &newton.u) < 1e-12);
    }

    #[test]
    fn breakdown_is_reported() {
        let m = MapSpec::standard(0.5);
        let err = solve_conjugacy(&m, golden(), &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, ConjugacyError::NoConvergence { .. } | ConjugacyError::ResidualStagnation { .. }));
    }

    #[test]
    fn complex_frequency_curves() {
        let m = MapSpec::standard(0.05);
        let w = c(golden_mean(), 0.5);
        let sol = solve_conjugacy(&m, w, &SolverConfig::default()).unwrap();
        assert!(sol.residual_sup <= 1e-12);
        assert!(sol.invariance_defect <= 10.0 * sol.residual_sup.max(f64::EPSILON));
        // linear domination once the divisors are large: on the modes of g
        // against g itself, elsewhere against the composed force
        let far = solve_conjugacy(&m, c(0.3, 1.0), &SolverConfig::default()).unwrap();
        let g = m.force_series();
        let composed = FourierSeries::compose_id_plus(g, &far.u, 512).unwrap().resized(64);
        for k in -64i64..=64 {
            if k == 0 {
                continue;
            }
            let source = if g.coeff(k).norm() > 0.0 { g.coeff(k) } else { composed.coeff(k) };
            let bound = (2.0 * source.norm() + far.residual_sup) / small_divisor(k, far.omega).norm();
            assert!(far.u.coeff(k).norm() <= bound, "k = {k}");
        }
    }

    #[test]
    fn symmetries_hold() {
        let m = MapSpec::standard(0.05);
        let cfg = SolverConfig::default();
        let real = symmetry_checks(&m, golden(), &cfg).unwrap();
        assert!(real.max() <= 1e-10, "{real:?}");
        let cplx = symmetry_checks(&m, c(golden_mean(), 0.5), &cfg).unwrap();
        assert!(cplx.max() <= 1e-10, "{cplx:?}");
        let flat = symmetry_checks(&MapSpec::integrable(), c(0.3, 0.2), &cfg).unwrap();
        assert_eq!(flat.max(), 0.0);
    }

    #[test]
    fn continuation_reaches_a_harder_force() {
        let m = MapSpec::standard(0.12);
        let cfg = SolverConfig { continuation: true, ..SolverConfig::default() };
        let sol = solve_conjugacy(&m, golden(), &cfg).unwrap();
        assert!(sol.residual_sup <= 1e-12);
    }

    #[test]
    fn from_u_reproduces_the_solution() {
        let m = MapSpec::standard(0.05);
        let sol = solve_conjugacy(&m, c(0.3819660112501051, 0.1), &SolverConfig::default()).unwrap();
        let again = CurveSolution::from_u(&m, sol.omega, sol.u.clone(), 512).unwrap();
        assert!(FourierSeries::max_coeff_diff(&again.v, &sol.v) < 1e-13);
        assert!(again.residual_sup < 1e-11);
    }

    #[test]
    fn invalid_configs() {
        let m = MapSpec::standard(0.05);
        let bad = SolverConfig { grid: 100, ..SolverConfig::default() };
        assert!(matches!(solve_conjugacy(&m, golden(), &bad), Err(ConjugacyError::InvalidConfig(_))));
        let small = SolverConfig { grid: 256, ..SolverConfig::default() };
        assert!(small.validate(&m).is_err());
    }

    #[test]
    fn newton_is_damped_near_a_resonance() {
        // |λ_64| ≈ 6e-6 here; undamped steps ran off to a spurious stagnation point.
        let m = MapSpec::standard(0.05);
        let sol = solve_conjugacy(&m, c(0.2343689795903714, 0.0), &SolverConfig::default()).unwrap();
        assert!(sol.residual_sup <= 1e-12);
    }
}
