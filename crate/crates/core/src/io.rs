//! Run configuration, command-line value parsers and the curve JSON record.
//!
//! Every parser here is total: malformed input is an error value, never a panic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conjugacy::{ConjugacyError, CurveSolution, Scheme, SolverConfig};
use crate::diophantine::{DiophantineClass, DiophantineError};
use crate::fourier::FourierSeries;
use crate::twist_map::{MapError, MapSpec};
use crate::variational::MinimizeOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Parse(String),
    #[error("config field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
    #[error(transparent)]
    Solver(#[from] ConjugacyError),
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { field, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Standard,
    TwoMode,
    Integrable,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub preset: Preset,
    /// Force amplitude; scales `cos`/`sin` for the custom preset.
    pub eps: Option<f64>,
    /// Second-harmonic amplitude of the two-mode preset.
    pub eps2: Option<f64>,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
    #[serde(default = "default_r1")]
    pub r1: f64,
}

fn default_r1() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiophantineSection {
    pub tau: f64,
    #[serde(rename = "M")]
    pub m_const: f64,
    pub m_max: u64,
}

impl Default for DiophantineSection {
    fn default() -> Self {
        Self { tau: 0.5, m_const: 6.0, m_max: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    #[serde(rename = "N")]
    pub cutoff: usize,
    pub grid: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: Scheme,
    pub picard_warmup: usize,
    pub continuation: bool,
    pub min_divisor_guard: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            cutoff: d.cutoff,
            grid: d.grid,
            tol: d.tol_residual,
            max_iter: d.max_iter,
            scheme: d.scheme,
            picard_warmup: d.picard_warmup,
            continuation: d.continuation,
            min_divisor_guard: d.min_divisor_guard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariationalSection {
    pub q_max: i64,
    pub tol: f64,
    pub max_iter: usize,
    pub phases: usize,
}

impl Default for VariationalSection {
    fn default() -> Self {
        let d = MinimizeOptions::default();
        Self { q_max: 233, tol: d.tol, max_iter: d.max_iter, phases: d.phases }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinSpace {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl LinSpace {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n).map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Real parts of the grid.
    pub real: Option<LinSpace>,
    /// Imaginary parts; the grid is the product with `real` when both are given.
    pub imag: Option<LinSpace>,
    /// Extra points `[re, im]`.
    pub points: Vec<[f64; 2]>,
    /// Also run the convergent ladder at real points.
    pub variational: bool,
}

impl SweepSection {
    /// Grid points in a fixed order: the product grid row by row, then the extra points.
    pub fn omegas(&self) -> Vec<Complex64> {
        let re = self.real.map(|l| l.values()).unwrap_or_default();
        let im = self.imag.map(|l| l.values()).unwrap_or_else(|| vec![0.0]);
        let mut out: Vec<Complex64> = im.iter().flat_map(|&y| re.iter().map(move |&x| Complex64::new(x, y))).collect();
        out.extend(self.points.iter().map(|p| Complex64::new(p[0], p[1])));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSection {
    /// Random frequencies per randomized check.
    pub samples: usize,
    /// Largest denominator of the convexity grid.
    pub farey_order: i64,
    /// Depth used for the measure bound check; defaults to the diophantine `m_max`.
    pub measure_m_max: Option<u64>,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self { samples: 10, farey_order: 24, measure_m_max: Some(2000) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlotSection {
    pub eps_values: Vec<f64>,
    /// Points of the real-line `β`/`Φ` curves over `[0, 1]`.
    pub real_count: usize,
    /// Real parts of the vertical lines `x + iy`.
    pub lines: Vec<f64>,
    pub imag: LinSpace,
    /// Half-width of the zooms around 0 and 1/2.
    pub corner_width: f64,
    /// Largest denominator of the rationals inside each zoom.
    pub corner_order: i64,
}

impl Default for PlotSection {
    fn default() -> Self {
        Self {
            eps_values: vec![0.02, 0.05, 0.1],
            real_count: 101,
            lines: vec![0.3, crate::golden_mean()],
            imag: LinSpace { start: 0.05, stop: 2.0, count: 40 },
            corner_width: 0.05,
            corner_order: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapSection,
    #[serde(default)]
    pub diophantine: DiophantineSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub variational: VariationalSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub validate: ValidateSection,
    #[serde(default)]
    pub plot: PlotSection,
    #[serde(default)]
    pub output: OutputSection,
    pub threads: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    /// Parses and checks every derived object, so a returned config is usable as is.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.map_spec()?;
        cfg.diophantine_class()?;
        cfg.solver_config()?.validate(&cfg.map_spec()?)?;
        cfg.minimize_options()?;
        if cfg.threads == Some(0) {
            return Err(field("threads", "must be at least 1"));
        }
        Ok(cfg)
    }

    pub fn map_spec(&self) -> Result<MapSpec, ConfigError> {
        let m = &self.map;
        if !(m.r1.is_finite() && m.r1 > 0.0) {
            return Err(field("map.r1", "must be positive"));
        }
        let finite = |x: f64, name: &'static str| {
            if x.is_finite() {
                Ok(x)
            } else {
                Err(field(name, "must be finite"))
            }
        };
        let base = match m.preset {
            Preset::Standard => FourierSeries::from_cos_sin(0.0, &[], &[1.0]),
            Preset::TwoMode => {
                let e2 =
                    finite(m.eps2.ok_or_else(|| field("map.eps2", "required by the two-mode preset"))?, "map.eps2")?;
                let e1 = finite(m.eps.ok_or_else(|| field("map.eps", "required by the two-mode preset"))?, "map.eps")?;
                return Ok(MapSpec::new(FourierSeries::from_cos_sin(0.0, &[], &[e1, e2]), 1.0, m.r1)?);
            }
            Preset::Integrable => return Ok(MapSpec::new(FourierSeries::zeros(1), 0.0, m.r1)?),
            Preset::Custom => {
                if m.cos.is_empty() && m.sin.is_empty() {
                    return Err(field("map.cos", "the custom preset needs cos or sin coefficients"));
                }
                if m.cos.len().max(m.sin.len()) > 1024 {
                    return Err(field("map.cos", "at most 1024 harmonics"));
                }
                for &x in m.cos.iter().chain(&m.sin) {
                    finite(x, "map.cos")?;
                }
                FourierSeries::from_cos_sin(0.0, &m.cos, &m.sin)
            }
        };
        let eps = match (m.preset, m.eps) {
            (Preset::Standard, None) => return Err(field("map.eps", "required by the standard preset")),
            (_, Some(e)) => finite(e, "map.eps")?,
            (_, None) => 1.0,
        };
        Ok(MapSpec::new(base, eps, m.r1)?)
    }

    pub fn diophantine_class(&self) -> Result<DiophantineClass, ConfigError> {
        let d = &self.diophantine;
        if d.m_max > 100_000_000 {
            return Err(field("diophantine.m_max", "at most 1e8"));
        }
        Ok(DiophantineClass::new(d.tau, d.m_const, d.m_max)?)
    }

    pub fn solver_config(&self) -> Result<SolverConfig, ConfigError> {
        let s = &self.solver;
        if s.cutoff > 1024 {
            return Err(field("solver.N", "at most 1024"));
        }
        if s.grid > 1 << 16 {
            return Err(field("solver.grid", "at most 65536"));
        }
        if s.max_iter > 10_000 {
            return Err(field("solver.max_iter", "at most 10000"));
        }
        Ok(SolverConfig {
            cutoff: s.cutoff,
            grid: s.grid,
            tol_residual: s.tol,
            max_iter: s.max_iter,
            min_divisor_guard: s.min_divisor_guard,
            scheme: s.scheme,
            picard_warmup: s.picard_warmup,
            continuation: s.continuation,
        })
    }

    pub fn minimize_options(&self) -> Result<MinimizeOptions, ConfigError> {
        let v = &self.variational;
        if v.q_max < 1 {
            return Err(field("variational.q_max", "must be at least 1"));
        }
        if !(v.tol > 0.0) {
            return Err(field("variational.tol", "must be positive"));
        }
        if v.phases == 0 {
            return Err(field("variational.phases", "must be at least 1"));
        }
        Ok(MinimizeOptions { tol: v.tol, max_iter: v.max_iter, phases: v.phases, ..MinimizeOptions::default() })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValueError {
    #[error("expected {expected}, got `{input}`")]
    Malformed { expected: &'static str, input: String },
    #[error("`{0}` is not a finite number")]
    NotFinite(String),
    #[error("window [{0}, {1}] must satisfy A < B")]
    EmptyWindow(String, String),
}

fn number(text: &str, expected: &'static str) -> Result<f64, ValueError> {
    let t = text.trim();
    let x: f64 = t.parse().map_err(|_| ValueError::Malformed { expected, input: text.to_string() })?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ValueError::NotFinite(t.to_string()))
    }
}

/// `RE` or `RE,IM`.
pub fn parse_omega(text: &str) -> Result<Complex64, ValueError> {
    const EXPECTED: &str = "RE or RE,IM";
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(Complex64::new(number(re, EXPECTED)?, 0.0)),
        [re, im] => Ok(Complex64::new(number(re, EXPECTED)?, number(im, EXPECTED)?)),
        _ => Err(ValueError::Malformed { expected: EXPECTED, input: text.to_string() }),
    }
}

/// `A,B` with `A < B`.
pub fn parse_window(text: &str) -> Result<(f64, f64), ValueError> {
    const EXPECTED: &str = "A,B";
    let parts: Vec<&str> = text.split(',').collect();
    let [a, b] = parts.as_slice() else {
        return Err(ValueError::Malformed { expected: EXPECTED, input: text.to_string() });
    };
    let (a, b) = (number(a, EXPECTED)?, number(b, EXPECTED)?);
    if a < b {
        Ok((a, b))
    } else {
        Err(ValueError::EmptyWindow(a.to_string(), b.to_string()))
    }
}

/// On-disk form of a [`CurveSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRecord {
    pub omega: [f64; 2],
    #[serde(rename = "N")]
    pub cutoff: usize,
    /// `[re, im]` for `k = -N..=N`.
    pub u_hat: Vec<[f64; 2]>,
    pub residual_sup: f64,
    pub invariance_defect: f64,
    pub mean_defect: f64,
    pub iterations: usize,
    pub scheme: Scheme,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("curve JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("curve JSON: {0}")]
    Invalid(String),
}

impl CurveRecord {
    pub fn from_solution(sol: &CurveSolution) -> Self {
        Self {
            omega: [sol.omega.re, sol.omega.im],
            cutoff: sol.u.cutoff(),
            u_hat: sol.u.coeffs().iter().map(|c| [c.re, c.im]).collect(),
            residual_sup: sol.residual_sup,
            invariance_defect: sol.invariance_defect,
            mean_defect: sol.mean_defect,
            iterations: sol.iterations,
            scheme: sol.scheme,
        }
    }

    pub fn to_json(&self) -> Result<String, RecordError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and checks the record's structural invariants.
    pub fn from_json(text: &str) -> Result<Self, RecordError> {
        let rec: Self = serde_json::from_str(text)?;
        let invalid = |m: &str| Err(RecordError::Invalid(m.to_string()));
        if rec.cutoff > 4096 {
            return invalid("N is larger than 4096");
        }
        if rec.u_hat.len() != 2 * rec.cutoff + 1 {
            return invalid("u_hat must hold 2N+1 coefficients");
        }
        let finite = |x: f64| x.is_finite();
        if !rec.omega.iter().copied().all(finite) || !rec.u_hat.iter().flatten().copied().all(finite) {
            return invalid("non-finite value");
        }
        if rec.u_hat[rec.cutoff] != [0.0, 0.0] {
            return invalid("u must have zero mean");
        }
        Ok(rec)
    }

    pub fn omega(&self) -> Complex64 {
        Complex64::new(self.omega[0], self.omega[1])
    }

    /// The coefficients of `u`, marked real when they are conjugate-symmetric and `ω` is real.
    pub fn u_series(&self) -> FourierSeries {
        let coeffs: Vec<Complex64> = self.u_hat.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        let series = FourierSeries::from_coeffs(coeffs).expect("length checked on parse");
        if self.omega[1] == 0.0 && series.symmetry_defect() == 0.0 {
            FourierSeries::real_from_coeffs(series.coeffs().to_vec()).expect("odd length")
        } else {
            series
        }
    }

    /// Rebuilds the curve for `map`, recomputing every diagnostic.
    pub fn to_solution(&self, map: &MapSpec, grid: usize) -> Result<CurveSolution, ConjugacyError> {
        let mut sol = CurveSolution::from_u(map, self.omega(), self.u_series(), grid)?;
        sol.iterations = self.iterations;
        sol.scheme = self.scheme;
        Ok(sol)
    }
}
