//! `β(ω)` and `β'(ω)` integrated along invariant curves, with the
//! cross-checks against the variational route.
//!
//! For a curve `U = θ + u`, `V = ω + v`,
//! `Φ(ω) = β(ω) - ω²/2 = ∫ ½v² + G(θ + u) dθ` and `β'(ω) = ω + ∫ v ∂_θu dθ`.
//! Both integrals use the analytic (unconjugated) product so that they
//! continue holomorphically in `ω`.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::conjugacy::{solve_conjugacy, ConjugacyError, CurveSolution, SolverConfig};
use crate::diophantine::{DiophantineClass, MembershipCertificate, Verdict};
use crate::fourier::{compose_on_grid, FourierSeries, DEFAULT_EXPONENT_BUDGET};
use crate::twist_map::MapSpec;
use crate::variational::{beta_by_convergents, ConvergentLadder, MinimizeOptions, VariationalError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BetaError {
    #[error("curve residual {residual:e} exceeds the acceptance threshold {threshold:e}")]
    RejectedResidual { residual: f64, threshold: f64 },
    #[error(transparent)]
    Conjugacy(#[from] ConjugacyError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Kam,
    Variational,
    ConvergentExtrapolation,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Kam => "kam",
            Method::Variational => "variational",
            Method::ConvergentExtrapolation => "convergent-extrapolation",
        }
    }
}

/// Parameters a sample was produced with.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Provenance {
    pub m_const: Option<f64>,
    pub tau: Option<f64>,
    pub cutoff: Option<usize>,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaSample {
    pub omega: Complex64,
    pub beta: Complex64,
    pub beta_prime: Complex64,
    /// `beta - ω²/2`, computed directly rather than by subtraction.
    pub phi: Complex64,
    pub method: Method,
    /// Heuristic: residual times `1 + ‖∂_θu‖` for curves, last ladder step otherwise.
    pub error_estimate: f64,
    pub residual_sup: Option<f64>,
    pub verdict: Option<Verdict>,
    pub provenance: Provenance,
}

/// Residual above which a curve is not turned into a sample.
pub const DEFAULT_MAX_RESIDUAL: f64 = 1e-10;

fn quadrature_grid(a: &FourierSeries, b: &FourierSeries) -> usize {
    (4 * (a.cutoff() + b.cutoff()).max(1)).next_power_of_two().max(64)
}

/// `∫ ½v² + G(θ + u)`.
pub fn phi_from_curve(map: &MapSpec, sol: &CurveSolution) -> Result<Complex64, ConjugacyError> {
    let potential = map.potential_series();
    let n = quadrature_grid(potential, &sol.u);
    let averaged = compose_on_grid(potential, &sol.u, n, DEFAULT_EXPONENT_BUDGET)?.mean();
    Ok(real_part_if_real(sol, 0.5 * FourierSeries::product_mean(&sol.v, &sol.v) + averaged))
}

/// `ω + ∫ v ∂_θu`.
pub fn beta_prime_from_curve(sol: &CurveSolution) -> Complex64 {
    real_part_if_real(sol, sol.omega + FourierSeries::product_mean(&sol.v, &sol.u.derivative()))
}

fn real_part_if_real(sol: &CurveSolution, z: Complex64) -> Complex64 {
    if sol.omega.im == 0.0 && sol.u.is_real_symmetric() {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

pub fn beta_from_curve(map: &MapSpec, sol: &CurveSolution) -> Result<BetaSample, BetaError> {
    beta_from_curve_with(map, sol, DEFAULT_MAX_RESIDUAL)
}

pub fn beta_from_curve_with(map: &MapSpec, sol: &CurveSolution, max_residual: f64) -> Result<BetaSample, BetaError> {
    if !(sol.residual_sup <= max_residual) {
        return Err(BetaError::RejectedResidual { residual: sol.residual_sup, threshold: max_residual });
    }
    let phi = phi_from_curve(map, sol)?;
    let w = sol.omega;
    Ok(BetaSample {
        omega: w,
        beta: 0.5 * w * w + phi,
        beta_prime: beta_prime_from_curve(sol),
        phi,
        method: Method::Kam,
        error_estimate: sol.residual_sup * (1.0 + sol.u.derivative().l1_norm()),
        residual_sup: Some(sol.residual_sup),
        verdict: None,
        provenance: Provenance { cutoff: Some(sol.u.cutoff()), eps: map.eps_scale(), ..Provenance::default() },
    })
}

/// Solve and integrate in one step.
pub fn kam_sample(map: &MapSpec, omega: Complex64, cfg: &SolverConfig) -> Result<BetaSample, BetaError> {
    let sol = solve_conjugacy(map, omega, cfg)?;
    beta_from_curve_with(map, &sol, DEFAULT_MAX_RESIDUAL.max(cfg.tol_residual))
}

/// The ladder estimate as a sample; `β'` is the midpoint of the bracketing chords when both exist.
pub fn ladder_sample(map: &MapSpec, ladder: &ConvergentLadder) -> BetaSample {
    let w = ladder.omega;
    let beta_prime = match (ladder.left_chord_slope, ladder.right_chord_slope) {
        (Some(l), Some(r)) => 0.5 * (l + r),
        _ => f64::NAN,
    };
    BetaSample {
        omega: Complex64::new(w, 0.0),
        beta: Complex64::new(ladder.interpolated, 0.0),
        beta_prime: Complex64::new(beta_prime, 0.0),
        phi: Complex64::new(ladder.interpolated - 0.5 * w * w, 0.0),
        method: Method::ConvergentExtrapolation,
        error_estimate: ladder.error_estimate,
        residual_sup: None,
        verdict: None,
        provenance: Provenance { eps: map.eps_scale(), ..Provenance::default() },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSymmetryReport {
    /// `|Φ(ω+1) - Φ(ω)|`.
    pub periodicity: f64,
    /// `|Φ(-ω) - Φ(ω)|`.
    pub evenness: f64,
    /// `|conj Φ(ω) - Φ(conj ω)|`.
    pub conjugation: f64,
    /// `|β(ω+1) - β(ω) - ω - ½|`, real `ω` only.
    pub real_shift: Option<f64>,
}

impl BetaSymmetryReport {
    pub fn max(&self) -> f64 {
        self.periodicity.max(self.evenness).max(self.conjugation).max(self.real_shift.unwrap_or(0.0))
    }
}

pub fn symmetry_suite(map: &MapSpec, omega: Complex64, cfg: &SolverConfig) -> Result<BetaSymmetryReport, BetaError> {
    let at = |w: Complex64| kam_sample(map, w, cfg);
    let base = at(omega)?;
    let plus = at(omega + 1.0)?;
    let neg = at(-omega)?;
    let conj = at(omega.conj())?;
    let real_shift = (omega.im == 0.0).then(|| (plus.beta - base.beta - omega - 0.5).norm());
    Ok(BetaSymmetryReport {
        periodicity: (plus.phi - base.phi).norm(),
        evenness: (neg.phi - base.phi).norm(),
        conjugation: (base.phi.conj() - conj.phi).norm(),
        real_shift,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitProbe {
    pub x: f64,
    pub ys: Vec<f64>,
    pub phis: Vec<Complex64>,
    /// `|Φ(x + i y_{j+1}) - Φ(x + i y_j)|`.
    pub differences: Vec<f64>,
    /// `max |Φ(x' + i y_max) - Φ(x + i y_max)|` over the spread points.
    pub x_spread: f64,
}

impl LimitProbe {
    /// Smallest ratio between consecutive differences.
    pub fn min_decay_ratio(&self) -> f64 {
        self.differences.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min)
    }
}

/// `Φ` along the vertical line `x + iy`, plus its spread over other `x` at the top.
pub fn limit_at_infinity_probe(
    map: &MapSpec,
    x: f64,
    ys: &[f64],
    spread_xs: &[f64],
    cfg: &SolverConfig,
) -> Result<LimitProbe, BetaError> {
    let phis =
        ys.iter().map(|&y| kam_sample(map, Complex64::new(x, y), cfg).map(|s| s.phi)).collect::<Result<Vec<_>, _>>()?;
    let differences = phis.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let mut x_spread: f64 = 0.0;
    if let (Some(&top), Some(&reference)) = (ys.last(), phis.last()) {
        for &x2 in spread_xs {
            let other = kam_sample(map, Complex64::new(x2, top), cfg)?.phi;
            x_spread = x_spread.max((other - reference).norm());
        }
    }
    Ok(LimitProbe { x, ys: ys.to_vec(), phis, differences, x_spread })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub kam: BetaSample,
    pub ladder: ConvergentLadder,
    /// `|β_kam - ladder estimate|`.
    pub delta_beta: f64,
    /// `|β_kam - β(p_k/q_k)|` along the ladder.
    pub raw_gaps: Vec<f64>,
    /// `|β_kam - ladder estimate through convergent k|`.
    pub estimate_gaps: Vec<f64>,
    /// Chord slope below `ω` ≤ `Re β'` ≤ chord slope above `ω`, with slack.
    pub bracketed: Option<bool>,
}

pub const BRACKET_SLACK: f64 = 1e-8;

pub fn cross_validate(
    map: &MapSpec,
    omega: f64,
    q_max: i64,
    cfg: &SolverConfig,
    opts: &MinimizeOptions,
) -> Result<CrossValidation, BetaError> {
    let kam = kam_sample(map, Complex64::new(omega, 0.0), cfg)?;
    let ladder = beta_by_convergents(map, omega, q_max, opts)?;
    let b = kam.beta.re;
    let raw_gaps = ladder.entries.iter().map(|e| (e.beta - b).abs()).collect();
    let estimate_gaps = (0..ladder.entries.len()).map(|k| (ladder.interpolated_at(k) - b).abs()).collect();
    let bracketed = match (ladder.left_chord_slope, ladder.right_chord_slope) {
        (Some(l), Some(r)) => {
            let d = kam.beta_prime.re;
            Some(l - BRACKET_SLACK <= d && d <= r + BRACKET_SLACK)
        }
        _ => None,
    };
    Ok(CrossValidation { delta_beta: (ladder.interpolated - b).abs(), kam, ladder, raw_gaps, estimate_gaps, bracketed })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOptions {
    pub solver: SolverConfig,
    pub diophantine: Option<DiophantineClass>,
    /// Solve even where membership is not certified; the verdict is still reported.
    pub override_diophantine: bool,
    /// Also run the convergent ladder up to this denominator at real points.
    pub variational_q_max: Option<i64>,
    pub minimize: MinimizeOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Converged,
    /// Not in the certified frequency set; not attempted.
    Skipped,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub omega: Complex64,
    pub certificate: Option<MembershipCertificate>,
    pub status: PointStatus,
    pub samples: Vec<BetaSample>,
}

fn sweep_point(map: &MapSpec, index: usize, omega: Complex64, opts: &SweepOptions) -> SweepPoint {
    let certificate = opts.diophantine.as_ref().map(|d| d.certify(omega));
    let verdict = certificate.map(|c| c.verdict);
    let provenance = Provenance {
        m_const: opts.diophantine.as_ref().map(|d| d.m_const()),
        tau: opts.diophantine.as_ref().map(|d| d.tau()),
        cutoff: Some(opts.solver.cutoff),
        eps: map.eps_scale(),
    };
    let mut point = SweepPoint { index, omega, certificate, status: PointStatus::Converged, samples: Vec::new() };
    if certificate.is_some_and(|c| !c.is_member()) && !opts.override_diophantine {
        point.status = PointStatus::Skipped;
        return point;
    }
    match kam_sample(map, omega, &opts.solver) {
        Ok(mut s) => {
            s.verdict = verdict;
            s.provenance = provenance;
            point.samples.push(s);
        }
        Err(e) => {
            point.status = PointStatus::Failed(e.to_string());
            return point;
        }
    }
    if let (Some(q_max), true) = (opts.variational_q_max, omega.im == 0.0) {
        match beta_by_convergents(map, omega.re, q_max, &opts.minimize) {
            Ok(ladder) => {
                let mut s = ladder_sample(map, &ladder);
                s.verdict = verdict;
                s.provenance = Provenance { cutoff: None, ..provenance };
                point.samples.push(s);
            }
            Err(e) => point.status = PointStatus::Failed(e.to_string()),
        }
    }
    point
}

/// Data-parallel over the grid; results come back in grid order.
pub fn sweep(map: &MapSpec, omegas: &[Complex64], opts: &SweepOptions) -> Vec<SweepPoint> {
    omegas.par_iter().enumerate().map(|(i, &w)| sweep_point(map, i, w, opts)).collect()
}
