//! Acceptance run: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p mather-cli --test acceptance`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mather_core::beta::{
    beta_from_curve, cross_validate, kam_sample, limit_at_infinity_probe, symmetry_suite, BetaError, BRACKET_SLACK,
};
use mather_core::conjugacy::{solve_conjugacy, ConjugacyError, CurveSolution, SolverConfig};
use mather_core::diophantine::{DiophantineClass, MembershipCertificate, Verdict};
use mather_core::twist_map::MapSpec;
use mather_core::variational::{
    farey_sequence, minimize_periodic, one_sided_derivative_gap, phi_rational, MinimizeOptions, Rational,
};
use mather_core::{golden_mean, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 20_240_917;

const INTEGRABLE_TOL: f64 = 1e-12;
const PERTURBATIVE_EPS: f64 = 1e-4;
const PERTURBATIVE_U_TOL: f64 = 1e-6;
const PERTURBATIVE_PHI_TOL: f64 = 1e-10;
const CROSS_EPS: f64 = 0.05;
const CROSS_TOL: f64 = 1e-5;
const CROSS_FROM_Q: i64 = 144;
const CROSS_BUDGET: Duration = Duration::from_secs(300);
const SYMMETRY_TOL: f64 = 1e-9;
const SHIFT_TOL: f64 = 1e-10;
const CONVEXITY_EPS: f64 = 0.1;
const CONVEXITY_ORDER: i64 = 64;
const CONVEXITY_TOL: f64 = 1e-10;
const CORNER_EPS: f64 = 0.3;
const CORNER_SMALL_EPS: f64 = 1e-3;
const CORNER_MIN_GAP: f64 = 1e-3;
const CORNER_MULTIPLIERS: [i64; 4] = [8, 16, 32, 64];
const MEASURE_M_MAX: u64 = 100_000;
const ZETA_3_2: f64 = 2.612_375_348_685_488;
const VERDICT_SAMPLES: usize = 1000;
const LIMIT_EPS: f64 = 0.05;
const LIMIT_DECAY: f64 = 10.0;
const LIMIT_SPREAD_TOL: f64 = 1e-8;
const INVARIANCE_FACTOR: f64 = 10.0;
const INVARIANCE_RESIDUAL: f64 = 1e-12;
const BREAKDOWN_EPS: f64 = 0.5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn silver() -> f64 {
    2f64.sqrt() - 1.0
}

fn class() -> DiophantineClass {
    DiophantineClass::new(0.5, 6.0, MEASURE_M_MAX).unwrap()
}

/// Random frequencies of the Diophantine class: `real` on the axis, `complex` off it.
fn diophantine_frequencies(rng: &mut ChaCha8Rng, real: usize, complex: usize) -> Vec<Complex64> {
    let class = class().with_depth(10_000);
    let mut out = Vec::new();
    while out.len() < real {
        let w = c(rng.random_range(0.0..1.0), 0.0);
        if class.check_amr(w.re).is_member() {
            out.push(w);
        }
    }
    while out.len() < real + complex {
        let w = c(rng.random_range(0.0..1.0), rng.random_range(0.05..0.5));
        if class.check_amc(w).is_member() {
            out.push(w);
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let map = MapSpec::integrable();
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut omegas: Vec<Complex64> = (0..100).map(|_| c(rng.random_range(-2.0..2.0), 0.0)).collect();
    omegas.extend((0..20).map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0))));
    let mut worst: f64 = 0.0;
    for &w in &omegas {
        let sol = solve_conjugacy(&map, w, &cfg).unwrap();
        let s = beta_from_curve(&map, &sol).unwrap();
        worst = worst
            .max((s.beta - 0.5 * w * w).norm())
            .max((s.beta_prime - w).norm())
            .max(s.phi.norm())
            .max(sol.u.l1_norm())
            .max(sol.v.l1_norm());
    }
    outcome(worst <= INTEGRABLE_TOL, format!("120 frequencies, max error {worst:.3e} (tol {INTEGRABLE_TOL:e})"))
}

fn criterion_2() -> Outcome {
    let eps = PERTURBATIVE_EPS;
    let map = MapSpec::standard(eps);
    assert!((map.force(0.25) - eps).abs() < 1e-18, "force is eps sin 2πx");
    let w = golden_mean();
    let s2 = (PI * w).sin().powi(2);
    let sol = solve_conjugacy(&map, c(w, 0.0), &SolverConfig::default()).unwrap();
    let first_order = |t: f64| -eps * (2.0 * PI * t).sin() / (4.0 * s2);
    let n = 256;
    let u_err = (0..n)
        .map(|j| {
            let t = j as f64 / n as f64;
            (sol.u.evaluate(c(t, 0.0)) - first_order(t)).norm()
        })
        .fold(0.0, f64::max);

    // Φ to second order by quadrature of ½(u(θ) - u(θ-ω))² + G(θ + u(θ)) with the
    // first-order u and G(x) = -ε cos(2πx)/(2π), the zero-mean primitive of g.
    let potential = |x: f64| -eps * (2.0 * PI * x).cos() / (2.0 * PI);
    let quad = (0..n)
        .map(|j| {
            let t = j as f64 / n as f64;
            let v = first_order(t) - first_order(t - w);
            0.5 * v * v + potential(t + first_order(t))
        })
        .sum::<f64>()
        / n as f64;
    let closed = -eps * eps / (16.0 * s2);
    let phi = beta_from_curve(&map, &sol).unwrap().phi;
    let phi_err = (phi - closed).norm();
    let pass = u_err <= PERTURBATIVE_U_TOL && phi_err <= PERTURBATIVE_PHI_TOL && (quad - closed).abs() <= 1e-15;
    outcome(
        pass,
        format!(
            "sup|u - u1| = {u_err:.3e} (tol {PERTURBATIVE_U_TOL:e}), |Φ + ε²/(16 sin²πω)| = {phi_err:.3e} \
             (tol {PERTURBATIVE_PHI_TOL:e}), quadrature vs closed form {:.1e}",
            (quad - closed).abs()
        ),
    )
}

fn criterion_3() -> Outcome {
    let map = MapSpec::standard(CROSS_EPS);
    let cfg = SolverConfig::default();
    let opts = MinimizeOptions::default();
    let start = Instant::now();
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, w, q_max) in [("golden", golden_mean(), 377), ("sqrt2-1", silver(), 408)] {
        let cv = cross_validate(&map, w, q_max, &cfg, &opts).unwrap();
        // Convergents sharing a denominator (0/1 and 1/1) are not ordered by q.
        let qs: Vec<_> = cv.ladder.entries.iter().map(|e| e.rational.q).collect();
        let decreasing = (1..qs.len()).filter(|&k| qs[k] > qs[k - 1]).all(|k| cv.raw_gaps[k] < cv.raw_gaps[k - 1]);
        let mut worst_tail: f64 = 0.0;
        let mut table = Vec::new();
        for (k, e) in cv.ladder.entries.iter().enumerate() {
            table.push(format!("{}:{:.2e}/{:.2e}", e.rational, cv.raw_gaps[k], cv.estimate_gaps[k]));
            if e.rational.q >= CROSS_FROM_Q {
                worst_tail = worst_tail.max(cv.estimate_gaps[k]);
            }
        }
        pass &= decreasing && worst_tail <= CROSS_TOL;
        lines.push(format!(
            "{name}: raw gaps decreasing = {decreasing}, ladder estimate gap for q >= {CROSS_FROM_Q} <= {worst_tail:.3e} \
             [p/q: raw/estimate {}]",
            table.join(" ")
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed <= CROSS_BUDGET;
    outcome(pass, format!("{}; {:.1}s (budget {}s)", lines.join("; "), elapsed.as_secs_f64(), CROSS_BUDGET.as_secs()))
}

fn criterion_4() -> Outcome {
    let map = MapSpec::standard(0.05);
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let omegas = diophantine_frequencies(&mut rng, 10, 5);
    let worst = omegas.par_iter().map(|&w| symmetry_suite(&map, w, &cfg).unwrap().max()).reduce(|| 0.0, f64::max);
    let opts = MinimizeOptions::default();
    let rationals = [(0, 1), (1, 2), (1, 3), (2, 5), (3, 8), (5, 13), (4, 7), (8, 21)];
    let shift = rationals
        .par_iter()
        .map(|&(p, q)| {
            let b0 = minimize_periodic(&map, p, q, None, &opts).unwrap().beta_value;
            let b1 = minimize_periodic(&map, p + q, q, None, &opts).unwrap().beta_value;
            (b1 - b0 - p as f64 / q as f64 - 0.5).abs()
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        worst <= SYMMETRY_TOL && shift <= SHIFT_TOL,
        format!(
            "Φ symmetries at 10 real + 5 complex ω: {worst:.3e} (tol {SYMMETRY_TOL:e}); \
             β(ω+1) - β(ω) - ω - 1/2 on 8 rationals: {shift:.3e} (tol {SHIFT_TOL:e})"
        ),
    )
}

/// `β(ω₂) - λβ(ω₁) - (1-λ)β(ω₃)` from `Φ` values, the quadratic part done in closed form.
fn convexity_excess(r: &[Rational], phi: &[f64]) -> f64 {
    let (a, b, c) = (r[0].value(), r[1].value(), r[2].value());
    let lambda = (c - b) / (c - a);
    phi[1] - lambda * phi[0] - (1.0 - lambda) * phi[2] - 0.5 * lambda * (1.0 - lambda) * (c - a).powi(2)
}

fn criterion_5() -> Outcome {
    let map = MapSpec::standard(CONVEXITY_EPS);
    let opts = MinimizeOptions::default();
    let grid = farey_sequence(CONVEXITY_ORDER);
    let phis: Vec<f64> = grid.par_iter().map(|&r| phi_rational(&map, r, &opts).unwrap()).collect();
    let worst = (1..grid.len() - 1)
        .map(|i| convexity_excess(&grid[i - 1..=i + 1], &phis[i - 1..=i + 1]))
        .fold(f64::NEG_INFINITY, f64::max);

    let cfg = SolverConfig::default();
    let cv = cross_validate(&map, golden_mean(), 377, &cfg, &opts).unwrap();
    let d = cv.kam.beta_prime.re;
    let (l, r) = (cv.ladder.left_chord_slope.unwrap(), cv.ladder.right_chord_slope.unwrap());
    let bracketed = l - BRACKET_SLACK <= d && d <= r + BRACKET_SLACK;
    outcome(
        worst <= CONVEXITY_TOL && bracketed,
        format!(
            "{} Farey triples, max excess {worst:.3e} (tol {CONVEXITY_TOL:e}); chords {l:.12} <= β'(golden) = {d:.12} <= {r:.12}",
            grid.len() - 2
        ),
    )
}

fn criterion_6() -> Outcome {
    let opts = MinimizeOptions::default();
    let big = one_sided_derivative_gap(&MapSpec::standard(CORNER_EPS), 0, 1, &CORNER_MULTIPLIERS, &opts).unwrap();
    let small =
        one_sided_derivative_gap(&MapSpec::standard(CORNER_SMALL_EPS), 0, 1, &CORNER_MULTIPLIERS, &opts).unwrap();
    outcome(
        big.gap > CORNER_MIN_GAP && small.gap < big.gap,
        format!(
            "gap at 0/1: ε={CORNER_EPS} -> {:.6e} (> {CORNER_MIN_GAP:e}), ε={CORNER_SMALL_EPS} -> {:.6e}",
            big.gap, small.gap
        ),
    )
}

fn same_verdict(a: &MembershipCertificate, b: &MembershipCertificate, shift: impl Fn(i64, u64) -> i64) -> bool {
    match (a.verdict, b.verdict) {
        (Verdict::Excluded { n, m }, Verdict::Excluded { n: n2, m: m2 }) => m == m2 && shift(n, m) == n2,
        (x, y) => a.is_member() == b.is_member() && x == y,
    }
}

fn criterion_7() -> Outcome {
    let class = class();
    let check = class.measure_bound_check(0.0).unwrap();
    let expected_bound = 2.0 * ZETA_3_2 / 6.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let reals: Vec<f64> = (0..VERDICT_SAMPLES).map(|_| rng.random_range(-3.0..3.0)).collect();
    let complexes: Vec<Complex64> =
        (0..VERDICT_SAMPLES).map(|_| c(rng.random_range(-3.0..3.0), rng.random_range(-0.02..0.02))).collect();
    let real_ok = reals.par_iter().all(|&w| {
        let base = class.check_amr(w);
        same_verdict(&base, &class.check_amr(w + 1.0), |n, m| n + m as i64)
            && same_verdict(&base, &class.check_amr(-w), |n, _| -n)
    });
    let complex_ok = complexes.par_iter().all(|&w| {
        let base = class.check_amc(w);
        same_verdict(&base, &class.check_amc(w + 1.0), |n, m| n + m as i64)
            && same_verdict(&base, &class.check_amc(-w), |n, _| -n)
    });
    let excluded = reals.iter().filter(|&&w| !class.check_amr(w).is_member()).count();
    let pass = check.holds() && (check.bound - expected_bound).abs() <= 1e-12 && real_ok && complex_ok;
    outcome(
        pass,
        format!(
            "excluded length of [0,1] at m_max={MEASURE_M_MAX}: {:.12} < 2ζ(3/2)/6 = {:.12} (tail beyond m_max <= {:.2e}); \
             verdicts invariant under ω+1, -ω: real {real_ok} ({excluded}/{VERDICT_SAMPLES} excluded), complex {complex_ok}",
            check.excluded_length, check.bound, check.tail_bound
        ),
    )
}

fn criterion_8() -> Outcome {
    let map = MapSpec::standard(LIMIT_EPS);
    let cfg = SolverConfig::default();
    let x = 0.3;
    let probe = limit_at_infinity_probe(&map, x, &[1.0, 2.0, 3.0, 4.0, 5.0], &[], &cfg).unwrap();
    let ratio = probe.min_decay_ratio();
    let at_four = |x: f64| kam_sample(&map, c(x, 4.0), &cfg).unwrap().phi;
    let reference = at_four(x);
    let spread = [0.0, 0.1, 0.45, 0.7, 0.95].iter().map(|&x2| (at_four(x2) - reference).norm()).fold(0.0, f64::max);
    let diffs: Vec<String> = probe.differences.iter().map(|d| format!("{d:.3e}")).collect();
    outcome(
        ratio >= LIMIT_DECAY && spread <= LIMIT_SPREAD_TOL,
        format!(
            "|ΔΦ| for y=1..5: [{}], min ratio {ratio:.1} (>= {LIMIT_DECAY}); x-spread at y=4: {spread:.3e} (tol {LIMIT_SPREAD_TOL:e})",
            diffs.join(", ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let map = MapSpec::standard(0.05);
    let cfg = SolverConfig::default();
    let golden = solve_conjugacy(&map, c(golden_mean(), 0.0), &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let mut omegas = diophantine_frequencies(&mut rng, 10, 10);
    omegas.extend([c(silver(), 0.0), c(0.3, 1.0), c(0.3, 3.0), c(0.7, 0.2)]);
    let mut sols: Vec<CurveSolution> = omegas.par_iter().map(|&w| solve_conjugacy(&map, w, &cfg).unwrap()).collect();
    sols.push(golden.clone());
    let worst = sols.iter().map(|s| s.invariance_defect / (INVARIANCE_FACTOR * s.residual_sup)).fold(0.0, f64::max);
    let pass = golden.residual_sup <= INVARIANCE_RESIDUAL && worst <= 1.0;
    outcome(
        pass,
        format!(
            "golden residual {:.3e} (tol {INVARIANCE_RESIDUAL:e}), defect {:.3e}; {} curves, max defect/({INVARIANCE_FACTOR}·residual) = {worst:.3}",
            golden.residual_sup,
            golden.invariance_defect,
            sols.len()
        ),
    )
}

fn criterion_10() -> Outcome {
    let map = MapSpec::standard(BREAKDOWN_EPS);
    let w = c(golden_mean(), 0.0);
    let cfg = SolverConfig::default();
    let solver = solve_conjugacy(&map, w, &cfg);
    let solver_ok =
        matches!(solver, Err(ConjugacyError::NoConvergence { .. }) | Err(ConjugacyError::ResidualStagnation { .. }));
    let sample_ok = matches!(
        kam_sample(&map, w, &cfg),
        Err(BetaError::Conjugacy(ConjugacyError::NoConvergence { .. }))
            | Err(BetaError::Conjugacy(ConjugacyError::ResidualStagnation { .. }))
    );

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("breakdown.toml");
    std::fs::write(&config, format!("[map]\npreset = \"standard\"\neps = {BREAKDOWN_EPS}\n")).unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_mather"))
        .args(["solve-curve", "--config"])
        .arg(&config)
        .args(["--omega", &golden_mean().to_string(), "--out"])
        .arg(&out)
        .output()
        .unwrap();
    let code = status.status.code();
    let no_json = !out.join("curve.json").exists();
    let reported = match &solver {
        Err(e) => e.to_string(),
        Ok(s) => format!("converged with residual {:e}", s.residual_sup),
    };
    outcome(
        solver_ok && sample_ok && code == Some(2) && no_json,
        format!("solver: {reported}; no sample emitted = {sample_ok}; `mather solve-curve` exit {code:?}, curve.json absent = {no_json}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("integrable oracle", criterion_1),
        ("perturbative oracle", criterion_2),
        ("cross-route agreement", criterion_3),
        ("symmetry suite", criterion_4),
        ("convexity and derivative bracketing", criterion_5),
        ("corner at rationals", criterion_6),
        ("Diophantine measure bound", criterion_7),
        ("complex-limit probe", criterion_8),
        ("invariance certification", criterion_9),
        ("breakdown honesty", criterion_10),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            let short: String = msg.chars().take(300).collect();
            outcome(false, format!("panicked: {short}"))
        });
        let tag = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!("[{tag}] criterion {} {name} ({:.1}s): {}", i + 1, start.elapsed().as_secs_f64(), result.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
