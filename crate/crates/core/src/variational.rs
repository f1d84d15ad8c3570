//! Minimal periodic configurations of the discrete action and the value of
//! the minimal average action at rational rotation numbers.
//!
//! A `(p, q)` configuration is stored as lift coordinates `x_j`, extended by
//! `x_{j+q} = x_j + p`. Internally the optimizer works with deviations
//! `ξ_j = x_j - j p/q`, which are `q`-periodic, so that
//!
//! ```text
//! (1/q) Σ h(x_j, x_{j+1}) = ½ (p/q)² + (1/q) Σ [½ (ξ_{j+1} - ξ_j)² + G(x_j)]
//! ```
//!
//! keeps the rotation part exact.

use thiserror::Error;

use crate::linalg::CyclicTridiagonal;
use crate::twist_map::MapSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationalError {
    #[error("denominator must be positive")]
    InvalidDenominator,
    #[error("{p}/{q} is not in lowest terms")]
    NotLowestTerms { p: i64, q: i64 },
    #[error("configuration has {got} points, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("minimization of {p}/{q} stopped after {iterations} iterations with gradient {gradient:e}")]
    NoConvergence { p: i64, q: i64, iterations: usize, gradient: f64 },
    #[error("critical point of {p}/{q} has Hessian eigenvalue {eigenvalue:e}")]
    SaddlePoint { p: i64, q: i64, eigenvalue: f64 },
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// A rational `p/q` in lowest terms with `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational {
    pub p: i64,
    pub q: i64,
}

impl Rational {
    pub fn new(p: i64, q: i64) -> Result<Self, VariationalError> {
        if q == 0 {
            return Err(VariationalError::InvalidDenominator);
        }
        let s = q.signum();
        let d = gcd(p, q).max(1);
        Ok(Self { p: s * p / d, q: s * q / d })
    }

    pub fn value(self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Farey sequence of order `n` on `[0, 1]`.
pub fn farey_sequence(n: i64) -> Vec<Rational> {
    let (mut a, mut b, mut c, mut d) = (0, 1, 1, n);
    let mut out = vec![Rational { p: 0, q: 1 }];
    while c <= n {
        let k = (n + b) / d;
        (a, b, c, d) = (c, d, k * c - a, k * d - b);
        out.push(Rational { p: a, q: b });
    }
    out
}

/// Convergents of the continued fraction of `omega`, at most `depth` of them.
///
/// The expansion is exact for the binary value of `omega`, so it stops at the
/// last convergent once `omega` is reproduced.
pub fn continued_fraction(omega: f64, depth: usize) -> Vec<Rational> {
    let (mut num, mut den) = dyadic(omega);
    let (mut p_prev, mut q_prev, mut p, mut q) = (1i128, 0i128, num.div_euclid(den), 1i128);
    let mut out = Vec::new();
    if depth == 0 {
        return out;
    }
    out.push(Rational { p: p as i64, q: 1 });
    if p as f64 == omega {
        return out;
    }
    (num, den) = (den, num.rem_euclid(den));
    while den != 0 && out.len() < depth {
        let a = num / den;
        (p_prev, p) = (p, a * p + p_prev);
        (q_prev, q) = (q, a * q + q_prev);
        if p.abs() > i64::MAX as i128 || q > i64::MAX as i128 {
            break;
        }
        out.push(Rational { p: p as i64, q: q as i64 });
        if (p as f64 / q as f64 - omega).abs() <= 4.0 * f64::EPSILON * omega.abs().max(1.0) {
            break;
        }
        (num, den) = (den, num % den);
    }
    out
}

/// `omega` as an exact ratio `num / 2^k` with `k ≤ 100`.
fn dyadic(omega: f64) -> (i128, i128) {
    const SHIFT: i32 = 100;
    let scaled = (omega * 2f64.powi(SHIFT)).round();
    // exact for |omega| < 2^26; beyond that the fraction part is void anyway
    if scaled.abs() < 1.5e38 {
        let mut num = scaled as i128;
        let mut den = 1i128 << SHIFT;
        while num % 2 == 0 && den > 1 {
            num /= 2;
            den /= 2;
        }
        (num, den)
    } else {
        (omega.round() as i128, 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicConfiguration {
    rotation: Rational,
    x: Vec<f64>,
}

impl PeriodicConfiguration {
    pub fn new(p: i64, q: i64, x: Vec<f64>) -> Result<Self, VariationalError> {
        if q <= 0 {
            return Err(VariationalError::InvalidDenominator);
        }
        if gcd(p, q) != 1 {
            return Err(VariationalError::NotLowestTerms { p, q });
        }
        if x.len() != q as usize {
            return Err(VariationalError::LengthMismatch { got: x.len(), expected: q as usize });
        }
        Ok(Self { rotation: Rational { p, q }, x })
    }

    /// `x_j = x0 + j p/q`.
    pub fn equispaced(p: i64, q: i64, x0: f64) -> Result<Self, VariationalError> {
        let x = (0..q).map(|j| x0 + (j * p) as f64 / q as f64).collect();
        Self::new(p, q, x)
    }

    pub fn p(&self) -> i64 {
        self.rotation.p
    }

    pub fn q(&self) -> i64 {
        self.rotation.q
    }

    pub fn rotation(&self) -> Rational {
        self.rotation
    }

    pub fn points(&self) -> &[f64] {
        &self.x
    }

    /// `x_j` for any integer `j`.
    pub fn at(&self, j: i64) -> f64 {
        let q = self.q();
        self.x[j.rem_euclid(q) as usize] + (j.div_euclid(q) * self.p()) as f64
    }

    /// `y_j = x_j - x_{j-1}`.
    pub fn momentum(&self, j: i64) -> f64 {
        self.at(j) - self.at(j - 1)
    }

    /// Integer translate with `x_0 ∈ [0, 1)`.
    pub fn canonical(&self) -> Self {
        let shift = self.x[0].floor();
        Self { rotation: self.rotation, x: self.x.iter().map(|v| v - shift).collect() }
    }

    /// The same orbit relabelled by one step: `x'_j = x_{j+1}`.
    pub fn index_shifted(&self) -> Self {
        let q = self.q();
        Self { rotation: self.rotation, x: (1..=q).map(|j| self.at(j)).collect() }
    }

    fn deviations(&self) -> Vec<f64> {
        let q = self.q();
        (0..q).map(|j| self.x[j as usize] - (j * self.p()) as f64 / q as f64).collect()
    }

    /// Cyclic order of `x_j mod 1` equals the cyclic order of `j p/q mod 1`.
    pub fn is_birkhoff_ordered(&self) -> bool {
        let q = self.q() as usize;
        if q <= 2 {
            return true;
        }
        let mut by_x: Vec<usize> = (0..q).collect();
        by_x.sort_by(|&a, &b| self.x[a].rem_euclid(1.0).total_cmp(&self.x[b].rem_euclid(1.0)));
        let p = self.p().rem_euclid(q as i64) as usize;
        let mut by_rotation: Vec<usize> = (0..q).collect();
        by_rotation.sort_by_key(|&j| (j * p) % q);
        let start = by_rotation.iter().position(|&j| j == by_x[0]).expect("same index set");
        (0..q).all(|i| by_x[i] == by_rotation[(start + i) % q])
    }
}

/// Landscape of the periodic action in deviation coordinates.
struct Action<'a> {
    map: &'a MapSpec,
    rotation: Rational,
    /// `frac(j p / q)`.
    base: Vec<f64>,
}

impl<'a> Action<'a> {
    fn new(map: &'a MapSpec, rotation: Rational) -> Self {
        let q = rotation.q;
        let base = (0..q).map(|j| (j * rotation.p).rem_euclid(q) as f64 / q as f64).collect();
        Self { map, rotation, base }
    }

    fn q(&self) -> usize {
        self.base.len()
    }

    /// `Σ [½ (ξ_{j+1} - ξ_j)² + G(x_j)]`, the action per period minus `q (p/q)²/2`.
    fn excess(&self, xi: &[f64]) -> f64 {
        let q = self.q();
        (0..q).map(|j| 0.5 * (xi[(j + 1) % q] - xi[j]).powi(2) + self.map.potential(self.base[j] + xi[j])).sum()
    }

    fn gradient(&self, xi: &[f64]) -> Vec<f64> {
        let q = self.q();
        (0..q)
            .map(|j| 2.0 * xi[j] - xi[(j + q - 1) % q] - xi[(j + 1) % q] + self.map.force(self.base[j] + xi[j]))
            .collect()
    }

    fn hessian(&self, xi: &[f64]) -> CyclicTridiagonal {
        let q = self.q();
        let diag = (0..q).map(|j| 2.0 + self.map.force_derivative(self.base[j] + xi[j])).collect();
        CyclicTridiagonal::new(diag, vec![-1.0; q])
    }

    fn config(&self, xi: &[f64]) -> PeriodicConfiguration {
        let Rational { p, q } = self.rotation;
        let x = (0..q).map(|j| (j * p) as f64 / q as f64 + xi[j as usize]).collect();
        PeriodicConfiguration { rotation: self.rotation, x }.canonical()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    /// Stop once `max_j |∂W/∂x_j|` is below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Equispaced phases `x_0 ∈ [0, 1/q)` tried when no initial guess is given.
    pub phases: usize,
    pub warmup_steps: usize,
    /// Most negative Hessian eigenvalue accepted at a minimizer.
    pub saddle_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200, phases: 8, warmup_steps: 20, saddle_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeReport {
    pub config: PeriodicConfiguration,
    pub action_per_period: f64,
    pub beta_value: f64,
    /// `β(p/q) - (p/q)²/2`, accumulated without the rotation part.
    pub phi: f64,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub hessian_min_eigenvalue_estimate: f64,
}

/// `Σ_{j<q} h(x_j, x_{j+1})` with `x_q = x_0 + p`.
pub fn action_per_period(map: &MapSpec, c: &PeriodicConfiguration) -> f64 {
    let omega = c.rotation.value();
    let q = c.q() as f64;
    q * 0.5 * omega * omega + Action::new(map, c.rotation).excess(&c.deviations())
}

/// `x_{j+1} - 2x_j + x_{j-1} - g(x_j)` for `j = 0..q`.
pub fn criticality_residual(map: &MapSpec, c: &PeriodicConfiguration) -> Vec<f64> {
    Action::new(map, c.rotation).gradient(&c.deviations()).into_iter().map(|v| -v).collect()
}

/// Least-action `(p, q)`-periodic configuration.
///
/// Without `init`, the descent is started from equispaced configurations at
/// `opts.phases` phases in `[0, 1/q)` and the smallest action is kept.
pub fn minimize_periodic(
    map: &MapSpec,
    p: i64,
    q: i64,
    init: Option<&PeriodicConfiguration>,
    opts: &MinimizeOptions,
) -> Result<MinimizeReport, VariationalError> {
    let rotation = Rational::new(p, q)?;
    if q <= 0 {
        return Err(VariationalError::InvalidDenominator);
    }
    let action = Action::new(map, rotation);
    let starts: Vec<Vec<f64>> = match init {
        Some(c) => {
            if c.rotation != rotation {
                return Err(VariationalError::NotLowestTerms { p, q });
            }
            vec![c.deviations()]
        }
        None => (0..opts.phases.max(1))
            .map(|i| vec![i as f64 / (opts.phases.max(1) as i64 * rotation.q) as f64; rotation.q as usize])
            .collect(),
    };

    let mut best: Option<MinimizeReport> = None;
    let mut first_err = None;
    for start in starts {
        match descend_with_restarts(&action, start, opts) {
            Ok(report) => {
                if best.as_ref().is_none_or(|b| report.phi < b.phi) {
                    best = Some(report);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one start"))
}

/// `β(p/q)`.
pub fn beta_rational(map: &MapSpec, p: i64, q: i64) -> Result<f64, VariationalError> {
    Ok(minimize_periodic(map, p, q, None, &MinimizeOptions::default())?.beta_value)
}

/// `β(p/q) - (p/q)²/2`.
pub fn phi_rational(map: &MapSpec, r: Rational, opts: &MinimizeOptions) -> Result<f64, VariationalError> {
    Ok(minimize_periodic(map, r.p, r.q, None, opts)?.phi)
}

fn descend_with_restarts(
    action: &Action<'_>,
    start: Vec<f64>,
    opts: &MinimizeOptions,
) -> Result<MinimizeReport, VariationalError> {
    let mut xi = start;
    let mut last = None;
    for attempt in 0..4 {
        match descend(action, xi.clone(), opts) {
            Err(VariationalError::SaddlePoint { p, q, eigenvalue }) => {
                last = Some(VariationalError::SaddlePoint { p, q, eigenvalue });
                let kick = 1e-3 * (attempt + 1) as f64;
                for (j, v) in xi.iter_mut().enumerate() {
                    *v += kick * (1.0 + (j as f64 * 0.7).sin());
                }
            }
            other => return other,
        }
    }
    Err(last.expect("loop ran"))
}

fn descend(action: &Action<'_>, mut xi: Vec<f64>, opts: &MinimizeOptions) -> Result<MinimizeReport, VariationalError> {
    let Rational { p, q } = action.rotation;
    let lipschitz = 4.0 + action.map.force_derivative_series().l1_norm();
    for _ in 0..opts.warmup_steps {
        let g = action.gradient(&xi);
        xi.iter_mut().zip(&g).for_each(|(x, d)| *x -= d / lipschitz);
    }

    let mut iterations = 0;
    let mut grad = action.gradient(&xi);
    let mut gnorm = max_abs(&grad);
    while gnorm > opts.tol {
        if iterations >= opts.max_iter {
            return Err(VariationalError::NoConvergence { p, q, iterations, gradient: gnorm });
        }
        iterations += 1;
        let hess = action.hessian(&xi);
        let lam = hess.min_eigenvalue(1e-10);
        let shift = if lam > 1e-8 { 0.0 } else { (-lam).max(0.0) + gnorm.min(1e-4) };
        let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        let Some(delta) = hess.solve_shifted(shift, &rhs) else {
            return Err(VariationalError::NoConvergence { p, q, iterations, gradient: gnorm });
        };

        if gnorm < 1e-7 && lam > -opts.saddle_tol {
            // quadratic regime: the action change is below its own rounding
            xi.iter_mut().zip(&delta).for_each(|(x, d)| *x += d);
        } else {
            let f0 = action.excess(&xi);
            let slope: f64 = grad.iter().zip(&delta).map(|(g, d)| g * d).sum();
            let mut alpha = 1.0;
            loop {
                let trial: Vec<f64> = xi.iter().zip(&delta).map(|(x, d)| x + alpha * d).collect();
                if action.excess(&trial) <= f0 + 1e-4 * alpha * slope {
                    xi = trial;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-12 {
                    return Err(VariationalError::NoConvergence { p, q, iterations, gradient: gnorm });
                }
            }
        }
        grad = action.gradient(&xi);
        gnorm = max_abs(&grad);
    }

    let lam = action.hessian(&xi).min_eigenvalue(1e-12);
    if lam < -opts.saddle_tol {
        return Err(VariationalError::SaddlePoint { p, q, eigenvalue: lam });
    }
    let omega = action.rotation.value();
    let excess = action.excess(&xi);
    let phi = excess / q as f64;
    Ok(MinimizeReport {
        config: action.config(&xi),
        action_per_period: q as f64 * 0.5 * omega * omega + excess,
        beta_value: 0.5 * omega * omega + phi,
        phi,
        iterations,
        final_gradient_norm: gnorm,
        hessian_min_eigenvalue_estimate: lam,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// One-sided chord slopes of `β` at a rational and their Richardson-extrapolated gap.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerEstimate {
    pub at: Rational,
    /// Neighbour denominators `k q`.
    pub denominators: Vec<i64>,
    pub right_slopes: Vec<f64>,
    pub left_slopes: Vec<f64>,
    /// `right - left` chord slope for each neighbour distance.
    pub raw_gaps: Vec<f64>,
    /// Richardson extrapolation of `raw_gaps` to zero distance, clamped at 0.
    pub gap: f64,
}

/// Estimates `β'(p/q⁺) - β'(p/q⁻)` from chords to `(k p ± 1)/(k q)`.
pub fn one_sided_derivative_gap(
    map: &MapSpec,
    p: i64,
    q: i64,
    multipliers: &[i64],
    opts: &MinimizeOptions,
) -> Result<CornerEstimate, VariationalError> {
    let at = Rational::new(p, q)?;
    let center = minimize_periodic(map, at.p, at.q, None, opts)?.phi;
    let mut est = CornerEstimate {
        at,
        denominators: Vec::new(),
        right_slopes: Vec::new(),
        left_slopes: Vec::new(),
        raw_gaps: Vec::new(),
        gap: 0.0,
    };
    for &k in multipliers {
        let den = k * at.q;
        let h = 1.0 / den as f64;
        let right = Rational::new(k * at.p + 1, den)?;
        let left = Rational::new(k * at.p - 1, den)?;
        let phi_r = phi_rational(map, right, opts)?;
        let phi_l = phi_rational(map, left, opts)?;
        let w = at.value();
        // chord of ½ω² is exact: ω ± h/2
        let s_right = w + 0.5 * h + (phi_r - center) / h;
        let s_left = w - 0.5 * h + (center - phi_l) / h;
        est.denominators.push(den);
        est.right_slopes.push(s_right);
        est.left_slopes.push(s_left);
        est.raw_gaps.push(s_right - s_left);
    }
    est.gap = richardson(&est.raw_gaps, multipliers).max(0.0);
    Ok(est)
}

/// Neville-style extrapolation to `h → 0` of values sampled at `h_i = 1/k_i`,
/// assuming an error expansion in integer powers of `h`.
fn richardson(values: &[f64], multipliers: &[i64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let h: Vec<f64> = multipliers.iter().map(|&k| 1.0 / k as f64).collect();
    let mut table = values.to_vec();
    let n = table.len();
    for level in 1..n {
        for i in (level..n).rev() {
            let (h_far, h_near) = (h[i - level], h[i]);
            table[i] = (h_far * table[i] - h_near * table[i - 1]) / (h_far - h_near);
        }
    }
    table[n - 1]
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderEntry {
    pub rational: Rational,
    pub beta: f64,
    pub phi: f64,
}

/// `β` along the continued-fraction convergents of an irrational frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergentLadder {
    pub omega: f64,
    pub entries: Vec<LadderEntry>,
    /// `β` at the last convergent.
    pub last_value: f64,
    /// `ω²/2` plus the quadratic through `φ = β - ω²/2` at the last three
    /// convergents, evaluated at `ω`.
    pub interpolated: f64,
    /// Last decrement of the sequence; heuristic.
    pub error_estimate: f64,
    /// Chord slope through the two largest-denominator convergents below `ω`.
    pub left_chord_slope: Option<f64>,
    /// Chord slope through the two largest-denominator convergents above `ω`.
    pub right_chord_slope: Option<f64>,
}

impl ConvergentLadder {
    /// `|β(p_k/q_k) - reference|` along the ladder.
    pub fn deviations_from(&self, reference: f64) -> Vec<(Rational, f64)> {
        self.entries.iter().map(|e| (e.rational, (e.beta - reference).abs())).collect()
    }

    /// The ladder estimate using entries up to and including `k`.
    pub fn interpolated_at(&self, k: usize) -> f64 {
        interpolate(&self.entries[..=k], self.omega)
    }
}

/// `ω²/2` plus the Lagrange interpolant of `φ` through the last (up to) three entries.
fn interpolate(entries: &[LadderEntry], omega: f64) -> f64 {
    let tail = &entries[entries.len().saturating_sub(3)..];
    let phi: f64 = tail
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let xi = e.rational.value();
            let weight: f64 = tail
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, o)| (omega - o.rational.value()) / (xi - o.rational.value()))
                .product();
            weight * e.phi
        })
        .sum();
    0.5 * omega * omega + phi
}

fn chord_slope(a: &LadderEntry, b: &LadderEntry) -> f64 {
    let (x, y) = (a.rational.value(), b.rational.value());
    0.5 * (x + y) + (b.phi - a.phi) / (y - x)
}

pub fn beta_by_convergents(
    map: &MapSpec,
    omega: f64,
    q_max: i64,
    opts: &MinimizeOptions,
) -> Result<ConvergentLadder, VariationalError> {
    let convergents: Vec<Rational> = continued_fraction(omega, 64).into_iter().filter(|r| r.q <= q_max).collect();
    let mut entries = Vec::with_capacity(convergents.len());
    for r in convergents {
        let rep = minimize_periodic(map, r.p, r.q, None, opts)?;
        entries.push(LadderEntry { rational: r, beta: rep.beta_value, phi: rep.phi });
    }
    let n = entries.len();
    let last_value = entries.last().map_or(f64::NAN, |e| e.beta);
    let interpolated = if n == 0 { f64::NAN } else { interpolate(&entries, omega) };
    let error_estimate = if n >= 2 { (entries[n - 1].beta - entries[n - 2].beta).abs() } else { f64::INFINITY };
    let side_chord = |below: bool| {
        let side: Vec<&LadderEntry> = entries
            .iter()
            .filter(|e| if below { e.rational.value() < omega } else { e.rational.value() > omega })
            .collect();
        (side.len() >= 2).then(|| chord_slope(side[side.len() - 2], side[side.len() - 1]))
    };
    Ok(ConvergentLadder {
        omega,
        left_chord_slope: side_chord(true),
        right_chord_slope: side_chord(false),
        entries,
        last_value,
        interpolated,
        error_estimate,
    })
}
