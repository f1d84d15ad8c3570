use mather_core::beta::{
    beta_from_curve_with, cross_validate, kam_sample, sweep, symmetry_suite, PointStatus, SweepOptions,
    DEFAULT_MAX_RESIDUAL,
};
use mather_core::conjugacy::{solve_conjugacy, CurveSolution};
use mather_core::diophantine::{DiophantineClass, DiophantineError};
use mather_core::fourier::FourierSeries;
use mather_core::io::{CurveRecord, LinSpace};
use mather_core::twist_map::MapSpec;
use mather_core::variational::{farey_sequence, gcd, phi_rational, MinimizeOptions, Rational};
use mather_core::{golden_mean, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::output::{beta_row, interval_table, num, opt, out_dir, placeholder_row, Table, BETA_HEADER};
use crate::{CliError, Context};

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn real_grid(ctx: &Context) -> Option<Vec<f64>> {
    ctx.window.map(|(a, b)| {
        let count = ctx.cfg.sweep.real.map_or(101, |l| l.count);
        LinSpace { start: a, stop: b, count }.values()
    })
}

pub fn compute_beta(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let map = cfg.map_spec().map_err(config_err)?;
    let solver = cfg.solver_config().map_err(config_err)?;
    let class = cfg.diophantine_class().map_err(config_err)?;
    let omegas: Vec<Complex64> = match (ctx.omega, real_grid(ctx)) {
        (Some(w), _) => vec![w],
        (None, Some(xs)) => xs.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        (None, None) => cfg.sweep.omegas(),
    };
    if omegas.is_empty() {
        return Err(CliError::Config("no frequencies: set [sweep] or pass --omega/--window".into()));
    }
    let opts = SweepOptions {
        solver: solver.clone(),
        diophantine: Some(class.clone()),
        override_diophantine: ctx.override_diophantine,
        variational_q_max: cfg.sweep.variational.then_some(cfg.variational.q_max),
        minimize: cfg.minimize_options().map_err(config_err)?,
    };
    let points = sweep(&map, &omegas, &opts);

    let mut table = Table::new(&BETA_HEADER);
    let (mut converged, mut skipped, mut failed) = (0, 0, 0);
    let provenance = [Some(class.m_const()), Some(class.tau())];
    for p in &points {
        let verdict = p.certificate.map(|c| c.verdict.to_string());
        match &p.status {
            PointStatus::Skipped => {
                skipped += 1;
                table.push(placeholder_row(p.omega, "skipped", verdict, provenance, map.eps_scale()));
                continue;
            }
            PointStatus::Failed(msg) => {
                failed += 1;
                eprintln!("omega = {}: {msg}", p.omega);
                table.push(placeholder_row(p.omega, "failed", verdict, provenance, map.eps_scale()));
            }
            PointStatus::Converged => converged += 1,
        }
        for s in &p.samples {
            table.push(beta_row(s, solver.tol_residual));
        }
    }
    let dir = out_dir(&ctx.out)?;
    let path = dir.join("beta.csv");
    table.write(&path)?;
    println!(
        "{} points: {converged} converged, {skipped} skipped, {failed} failed; {} rows -> {}",
        points.len(),
        table.len(),
        path.display()
    );
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} grid points failed to converge")));
    }
    Ok(())
}

fn curve_grid(sol: &CurveSolution, n: usize) -> Result<Table, CliError> {
    let u = sol.u.sample(n).map_err(|e| CliError::Numerical(e.to_string()))?;
    let v = sol.v.sample(n).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut t = Table::new(&["theta", "U_re", "U_im", "V_re", "V_im"]);
    for j in 0..n {
        let theta = j as f64 / n as f64;
        let (uu, vv) = (u.values[j], v.values[j]);
        t.push(vec![num(theta), num(theta + uu.re), num(uu.im), num(sol.omega.re + vv.re), num(sol.omega.im + vv.im)]);
    }
    Ok(t)
}

pub fn solve_curve(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let omega = ctx.omega.ok_or_else(|| CliError::Config("solve-curve needs --omega".into()))?;
    let map = cfg.map_spec().map_err(config_err)?;
    let solver = cfg.solver_config().map_err(config_err)?;
    let class = cfg.diophantine_class().map_err(config_err)?;
    let cert = class.certify(omega);
    println!("omega = {omega}: {} (margin {:e})", cert.verdict, cert.margin);
    if !cert.is_member() && !ctx.override_diophantine {
        return Err(CliError::Config(format!(
            "omega = {omega} is outside the Diophantine class ({}); pass --override-diophantine to solve anyway",
            cert.verdict
        )));
    }
    let sol = solve_conjugacy(&map, omega, &solver).map_err(|e| CliError::Numerical(e.to_string()))?;
    let sample = beta_from_curve_with(&map, &sol, DEFAULT_MAX_RESIDUAL.max(solver.tol_residual))
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let dir = out_dir(&ctx.out)?;
    let json = CurveRecord::from_solution(&sol).to_json().map_err(|e| CliError::Numerical(e.to_string()))?;
    let json_path = dir.join("curve.json");
    std::fs::write(&json_path, json + "\n").map_err(|e| CliError::io(&json_path, e))?;
    curve_grid(&sol, solver.grid)?.write(&dir.join("curve_grid.csv"))?;
    println!(
        "converged in {} iterations: residual {:e}, invariance defect {:e}",
        sol.iterations, sol.residual_sup, sol.invariance_defect
    );
    println!("beta = {}, beta' = {}, phi = {}", sample.beta, sample.beta_prime, sample.phi);
    Ok(())
}

pub fn check_diophantine(ctx: &Context) -> Result<(), CliError> {
    let class = ctx.cfg.diophantine_class().map_err(config_err)?;
    if ctx.omega.is_none() && ctx.window.is_none() {
        return Err(CliError::Config("check-diophantine needs --omega or --window".into()));
    }
    let dir = out_dir(&ctx.out)?;
    println!("tau = {}, M = {}, m_max = {}", class.tau(), class.m_const(), class.m_max());
    if let Some(w) = ctx.omega {
        let cert = class.certify(w);
        println!("omega = {w}: {} (margin {:e})", cert.verdict, cert.margin);
        let mut t = Table::new(&["omega_re", "omega_im", "verdict", "margin", "tau", "M", "m_max"]);
        t.push(vec![
            num(w.re),
            num(w.im),
            cert.verdict.to_string(),
            num(cert.margin),
            num(class.tau()),
            num(class.m_const()),
            class.m_max().to_string(),
        ]);
        t.write(&dir.join("membership.csv"))?;
    }
    if let Some((a, b)) = ctx.window {
        let intervals = class.excluded_intervals(a, b).map_err(|e| match e {
            DiophantineError::TooManyIntervals(n) => CliError::Config(format!(
                "about {n} balls meet [{a}, {b}] at m_max = {}; narrow --window or lower diophantine.m_max",
                class.m_max()
            )),
            other => config_err(other),
        })?;
        let excluded = class.excluded_length(a, b).map_err(config_err)?;
        let cells = (b.ceil() - a.floor()).max(1.0);
        let bound = cells * class.measure_bound();
        interval_table(&intervals).write(&dir.join("intervals.csv"))?;
        let mut t = Table::new(&["left", "right", "excluded_length", "bound", "tail_bound", "m_max"]);
        t.push(vec![num(a), num(b), num(excluded), num(bound), num(class.tail_bound()), class.m_max().to_string()]);
        t.write(&dir.join("measure.csv"))?;
        println!("[{a}, {b}]: {} excluded intervals, length {excluded:.12} (bound {bound:.12})", intervals.len());
        if !(excluded < bound) {
            return Err(CliError::Certification(format!("excluded length {excluded} exceeds the bound {bound}")));
        }
    }
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    outcome: Result<bool, String>,
}

impl Check {
    fn at_most(name: &'static str, value: f64, threshold: f64) -> Self {
        Self { name, value, threshold, outcome: Ok(value <= threshold) }
    }

    fn failed(name: &'static str, threshold: f64, err: impl std::fmt::Display) -> Self {
        Self { name, value: f64::NAN, threshold, outcome: Err(err.to_string()) }
    }
}

fn random_series(rng: &mut ChaCha8Rng, cutoff: usize) -> FourierSeries {
    let cos: Vec<f64> = (0..cutoff).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sin: Vec<f64> = (0..cutoff).map(|_| rng.random_range(-1.0..1.0)).collect();
    FourierSeries::from_cos_sin(0.0, &cos, &sin)
}

fn fourier_check(rng: &mut ChaCha8Rng, samples: usize) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let f = random_series(rng, 16);
        let back = f.sample(64).and_then(|g| g.project(16));
        let prim = f.primitive_zero_mean();
        match (back, prim) {
            (Ok(back), Ok(prim)) => {
                worst = worst
                    .max(FourierSeries::max_coeff_diff(&back, &f))
                    .max(FourierSeries::max_coeff_diff(&prim.derivative(), &f));
            }
            (Err(e), _) | (_, Err(e)) => return Check::failed("fourier round-trip", 1e-13, e),
        }
    }
    Check::at_most("fourier round-trip", worst, 1e-13)
}

fn h_check(map: &MapSpec, rng: &mut ChaCha8Rng, samples: usize) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..samples.max(1) * 10 {
        let x = rng.random_range(-2.0..2.0);
        let x1 = x + rng.random_range(-1.0..1.0);
        let (d1, d2) = map.h_symmetry_defects(x, x1, rng.random_range(-3..=3));
        worst = worst.max(d1.abs()).max(d2.abs());
    }
    Check::at_most("generating function symmetries", worst, 1e-12)
}

/// Frequencies drawn until they certify, real ones first.
fn diophantine_samples(class: &DiophantineClass, rng: &mut ChaCha8Rng, samples: usize) -> Vec<Complex64> {
    let shallow = class.with_depth(class.m_max().min(2000));
    let mut out = Vec::new();
    while out.len() < samples {
        let w = Complex64::new(rng.random_range(0.05..0.95), 0.0);
        if shallow.check_amr(w.re).is_member() {
            out.push(w);
        }
    }
    while out.len() < 2 * samples {
        let w = Complex64::new(rng.random_range(0.0..1.0), rng.random_range(0.05..0.5));
        if shallow.check_amc(w).is_member() {
            out.push(w);
        }
    }
    out
}

fn convexity_check(map: &MapSpec, order: i64, opts: &MinimizeOptions) -> Check {
    const NAME: &str = "convexity on the Farey grid";
    let grid = farey_sequence(order);
    let phis: Result<Vec<f64>, _> = grid.par_iter().map(|&r| phi_rational(map, r, opts)).collect();
    let phis = match phis {
        Ok(p) => p,
        Err(e) => return Check::failed(NAME, 1e-10, e),
    };
    let worst = (1..grid.len() - 1)
        .map(|i| convexity_excess(&grid[i - 1..=i + 1], &phis[i - 1..=i + 1]))
        .fold(f64::NEG_INFINITY, f64::max);
    Check::at_most(NAME, worst, 1e-10)
}

/// `β(ω₂) - λβ(ω₁) - (1-λ)β(ω₃)` from `Φ` values; the quadratic part is exact.
pub fn convexity_excess(r: &[Rational], phi: &[f64]) -> f64 {
    let (a, b, c) = (r[0].value(), r[1].value(), r[2].value());
    let lambda = (c - b) / (c - a);
    phi[1] - lambda * phi[0] - (1.0 - lambda) * phi[2] - 0.5 * lambda * (1.0 - lambda) * (c - a).powi(2)
}

pub fn validate(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let map = cfg.map_spec().map_err(config_err)?;
    let solver = cfg.solver_config().map_err(config_err)?;
    let class = cfg.diophantine_class().map_err(config_err)?;
    let opts = cfg.minimize_options().map_err(config_err)?;
    let v = &cfg.validate;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = vec![fourier_check(&mut rng, v.samples.max(1)), h_check(&map, &mut rng, v.samples)];

    let omegas = diophantine_samples(&class, &mut rng, v.samples);
    let symmetry: Vec<_> = omegas.par_iter().map(|&w| symmetry_suite(&map, w, &solver)).collect();
    checks.push(match symmetry.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(r) => Check::at_most("beta symmetries", r.iter().map(|s| s.max()).fold(0.0, f64::max), 1e-9),
        Err(e) => Check::failed("beta symmetries", 1e-9, e),
    });

    checks.push(convexity_check(&map, v.farey_order, &opts));

    const BRACKET: &str = "derivative bracketed by convergent chords";
    checks.push(match cross_validate(&map, golden_mean(), cfg.variational.q_max, &solver, &opts) {
        Ok(cv) => {
            let (l, r) = (cv.ladder.left_chord_slope, cv.ladder.right_chord_slope);
            let d = cv.kam.beta_prime.re;
            let excess = match (l, r) {
                (Some(l), Some(r)) => (l - d).max(d - r),
                _ => f64::INFINITY,
            };
            println!("golden: |beta_kam - beta_ladder| = {:e}", cv.delta_beta);
            Check::at_most(BRACKET, excess, mather_core::beta::BRACKET_SLACK)
        }
        Err(e) => Check::failed(BRACKET, mather_core::beta::BRACKET_SLACK, e),
    });

    const INVARIANCE: &str = "invariance of the golden curve";
    let limit = 10.0 * solver.tol_residual;
    checks.push(match solve_conjugacy(&map, Complex64::new(golden_mean(), 0.0), &solver) {
        Ok(sol) => Check::at_most(INVARIANCE, sol.invariance_defect, limit),
        Err(e) => Check::failed(INVARIANCE, limit, e),
    });

    const MEASURE: &str = "excluded measure below the bound";
    let depth = class.with_depth(v.measure_m_max.unwrap_or(class.m_max()));
    checks.push(match depth.measure_bound_check(0.0) {
        Ok(m) => Check { name: MEASURE, value: m.excluded_length, threshold: m.bound, outcome: Ok(m.holds()) },
        Err(e) => Check::failed(MEASURE, depth.measure_bound(), e),
    });

    let mut table = Table::new(&["check", "value", "threshold", "status"]);
    let (mut violated, mut errored) = (0, 0);
    for c in &checks {
        let status = match &c.outcome {
            Ok(true) => "pass".to_string(),
            Ok(false) => {
                violated += 1;
                "FAIL".to_string()
            }
            Err(e) => {
                errored += 1;
                format!("ERROR: {e}")
            }
        };
        println!("{:<44} {:>12.3e} <= {:<10.1e} {status}", c.name, c.value, c.threshold);
        table.push(vec![c.name.into(), num(c.value), num(c.threshold), status]);
    }
    let dir = out_dir(&ctx.out)?;
    table.write(&dir.join("validate.csv"))?;
    if errored > 0 {
        return Err(CliError::Numerical(format!("{errored} checks could not be computed")));
    }
    if violated > 0 {
        return Err(CliError::Certification(format!("{violated} checks violated")));
    }
    Ok(())
}

/// Rationals `p/q` with `q ≤ order` in `[lo, hi]`, ascending.
fn rationals_in(lo: f64, hi: f64, order: i64) -> Vec<Rational> {
    let mut out: Vec<Rational> = (1..=order)
        .flat_map(|q| {
            let (a, b) = ((lo * q as f64).ceil() as i64, (hi * q as f64).floor() as i64);
            (a..=b).filter(move |&p| gcd(p, q) == 1).map(move |p| Rational { p, q })
        })
        .collect();
    out.sort_by(|x, y| (x.p * y.q).cmp(&(y.p * x.q)));
    out
}

pub fn plot_data(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let base = cfg.map_spec().map_err(config_err)?;
    let solver = cfg.solver_config().map_err(config_err)?;
    let opts = cfg.minimize_options().map_err(config_err)?;
    let plot = &cfg.plot;
    if plot.real_count < 2 || plot.corner_order < 1 {
        return Err(CliError::Config("plot.real_count must be at least 2 and plot.corner_order at least 1".into()));
    }
    let dir = out_dir(&ctx.out)?;
    let mut failures = 0usize;

    let n = plot.real_count as i64 - 1;
    let line: Vec<Rational> = (0..=n).map(|j| Rational::new(j, n).expect("n > 0")).collect();
    let corners: Vec<(f64, Rational)> = [0.0, 0.5]
        .into_iter()
        .flat_map(|c| {
            rationals_in(c - plot.corner_width, c + plot.corner_width, plot.corner_order)
                .into_iter()
                .map(move |r| (c, r))
        })
        .collect();
    let mut real = Table::new(&["eps", "omega", "p", "q", "beta", "phi", "method"]);
    let mut zoom = Table::new(&["eps", "center", "omega", "p", "q", "beta", "phi"]);
    let mut curves = Table::new(&["eps", "theta", "U_re", "V_re", "residual_sup"]);
    for &eps in &plot.eps_values {
        let map = base.with_scale(eps);
        let phis: Vec<_> = line.par_iter().map(|&r| phi_rational(&map, r, &opts)).collect();
        for (r, phi) in line.iter().zip(phis) {
            let w = r.value();
            match phi {
                Ok(phi) => real.push(vec![
                    num(eps),
                    num(w),
                    r.p.to_string(),
                    r.q.to_string(),
                    num(0.5 * w * w + phi),
                    num(phi),
                    "variational".into(),
                ]),
                Err(e) => {
                    failures += 1;
                    eprintln!("eps = {eps}, omega = {r}: {e}");
                }
            }
        }
        let phis: Vec<_> = corners.par_iter().map(|&(_, r)| phi_rational(&map, r, &opts)).collect();
        for (&(c, r), phi) in corners.iter().zip(phis) {
            let w = r.value();
            match phi {
                Ok(phi) => zoom.push(vec![
                    num(eps),
                    num(c),
                    num(w),
                    r.p.to_string(),
                    r.q.to_string(),
                    num(0.5 * w * w + phi),
                    num(phi),
                ]),
                Err(e) => {
                    failures += 1;
                    eprintln!("eps = {eps}, omega = {r}: {e}");
                }
            }
        }
        match solve_conjugacy(&map, Complex64::new(golden_mean(), 0.0), &solver) {
            Ok(sol) => {
                let grid = curve_grid(&sol, 128.max((2 * sol.u.cutoff() + 1).next_power_of_two()))?;
                for row in grid.rows() {
                    curves.push(vec![num(eps), row[0].clone(), row[1].clone(), row[3].clone(), num(sol.residual_sup)]);
                }
            }
            Err(e) => {
                failures += 1;
                eprintln!("eps = {eps}, golden curve: {e}");
            }
        }
    }

    let points: Vec<Complex64> =
        plot.lines.iter().flat_map(|&x| plot.imag.values().into_iter().map(move |y| Complex64::new(x, y))).collect();
    let samples: Vec<_> = points.par_iter().map(|&w| kam_sample(&base, w, &solver)).collect();
    let mut lines = Table::new(&[
        "eps",
        "x",
        "y",
        "beta_re",
        "beta_im",
        "beta_prime_re",
        "beta_prime_im",
        "phi_re",
        "phi_im",
        "residual_sup",
        "N",
    ]);
    for (w, s) in points.iter().zip(samples) {
        match s {
            Ok(s) => lines.push(vec![
                num(base.eps_scale()),
                num(w.re),
                num(w.im),
                num(s.beta.re),
                num(s.beta.im),
                num(s.beta_prime.re),
                num(s.beta_prime.im),
                num(s.phi.re),
                num(s.phi.im),
                opt(s.residual_sup),
                solver.cutoff.to_string(),
            ]),
            Err(e) => {
                failures += 1;
                eprintln!("omega = {w}: {e}");
            }
        }
    }

    real.write(&dir.join("beta_real.csv"))?;
    zoom.write(&dir.join("corners.csv"))?;
    curves.write(&dir.join("curves.csv"))?;
    lines.write(&dir.join("phi_lines.csv"))?;
    println!(
        "wrote {} real-line, {} corner, {} curve and {} complex-line rows to {}",
        real.len(),
        zoom.len(),
        curves.len(),
        lines.len(),
        dir.display()
    );
    if failures > 0 {
        return Err(CliError::Numerical(format!("{failures} points failed")));
    }
    Ok(())
}
