//! Diophantine frequency sets.
//!
//! `A_M` is the set of real `ω` with `|ω - n/m| ≥ 1/(M m^{2+τ})` for every
//! rational `n/m`; its complex thickening contains `ω` whenever
//! `|Im ω| ≥ dist(Re ω, A_M)`. Membership is certified by scanning all
//! denominators up to `m_max`; the scan is exact for exclusions and a
//! finite-depth certificate otherwise.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiophantineError {
    #[error("tau must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("M = {m_const} must exceed 2ζ(1+τ) = {threshold}")]
    ConstantTooSmall { m_const: f64, threshold: f64 },
    #[error("m_max must be at least 1")]
    EmptyDepth,
    #[error("window [{0}, {1}] is empty or not finite")]
    BadWindow(f64, f64),
    #[error("m_max = {0} exceeds the supported depth {1} for measure computations")]
    DepthTooLarge(u64, u64),
    #[error("listing the excluded intervals needs {0} balls; lower m_max or narrow the window")]
    TooManyIntervals(u64),
}

/// Direct summation of `Σ m^{-s}` over `m < terms`, plus an Euler–Maclaurin
/// tail from `terms`. Returns the value and a bound on the truncation error.
pub fn zeta(s: f64, terms: u64) -> (f64, f64) {
    assert!(s > 1.0, "zeta needs s > 1");
    let k = terms.max(2) as f64;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for m in (1..terms.max(2)).rev() {
        neumaier_add(&mut sum, &mut comp, (m as f64).powf(-s));
    }
    let tail = k.powf(1.0 - s) / (s - 1.0) + 0.5 * k.powf(-s) + s * k.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * k.powf(-s - 3.0) / 720.0;
    neumaier_add(&mut sum, &mut comp, tail);
    let remainder = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * k.powf(-s - 5.0) / 30240.0;
    (sum + comp, remainder + 4.0 * f64::EPSILON * (sum + comp))
}

fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// `E(ω) = e^{2πiω}`; `|E(x + iy)| = e^{-2πy}`.
pub fn map_e(omega: Complex64) -> Complex64 {
    (Complex64::i() * TAU * omega).exp()
}

/// Parameters `(τ, M)` of `A_M` and the certification depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineClass {
    tau: f64,
    m_const: f64,
    m_max: u64,
    zeta_value: f64,
    zeta_error: f64,
}

const ZETA_TERMS: u64 = 1_000_000;
const MAX_TREE_DEPTH: u64 = 100_000_000;

impl DiophantineClass {
    pub fn new(tau: f64, m_const: f64, m_max: u64) -> Result<Self, DiophantineError> {
        if !(tau > 0.0) {
            return Err(DiophantineError::NonPositiveTau(tau));
        }
        if m_max == 0 {
            return Err(DiophantineError::EmptyDepth);
        }
        let (zeta_value, zeta_error) = zeta(1.0 + tau, ZETA_TERMS);
        if !(m_const > 2.0 * zeta_value) {
            return Err(DiophantineError::ConstantTooSmall { m_const, threshold: 2.0 * zeta_value });
        }
        Ok(Self { tau, m_const, m_max, zeta_value, zeta_error })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn m_const(&self) -> f64 {
        self.m_const
    }

    pub fn m_max(&self) -> u64 {
        self.m_max
    }

    pub fn zeta_value(&self) -> f64 {
        self.zeta_value
    }

    pub fn zeta_error(&self) -> f64 {
        self.zeta_error
    }

    pub fn with_depth(&self, m_max: u64) -> Self {
        Self { m_max: m_max.max(1), ..self.clone() }
    }

    /// `1/(M m^{2+τ})`.
    pub fn radius(&self, m: u64) -> f64 {
        1.0 / (self.m_const * (m as f64).powf(2.0 + self.tau))
    }

    /// `2ζ(1+τ)/M`, the bound on the excluded measure of any unit window.
    pub fn measure_bound(&self) -> f64 {
        2.0 * self.zeta_value / self.m_const
    }

    /// `(2/M) Σ_{m > m_max} m^{-(1+τ)}`, bounded by the integral from `m_max`.
    pub fn tail_bound(&self) -> f64 {
        2.0 / self.m_const * (self.m_max as f64).powf(-self.tau) / self.tau
    }

    /// Membership of a real frequency, certified up to `m_max`.
    pub fn check_amr(&self, omega: f64) -> MembershipCertificate {
        let mut margin = f64::INFINITY;
        let mut witness = None;
        for m in 1..=self.m_max {
            let mw = m as f64 * omega;
            let n = mw.round();
            let slack = (mw - n).abs() / m as f64 - self.radius(m);
            if slack < 0.0 && witness.is_none() {
                witness = Some((n as i64, m));
            }
            margin = margin.min(slack);
        }
        let verdict = match witness {
            Some((n, m)) => Verdict::Excluded { n, m },
            None => Verdict::CertifiedUpTo(self.m_max),
        };
        MembershipCertificate { verdict, margin }
    }

    /// Closed-form certificate for a quadratic irrational: every rational is
    /// at least `1/((A+2) m²)` away when all partial quotients are `≤ A`,
    /// which dominates the ball radius for all `m` once `A + 2 ≤ M`.
    pub fn check_amr_quadratic(&self, w: &QuadraticIrrational) -> MembershipCertificate {
        let scan = self.check_amr(w.value());
        let bound = w.max_partial_quotient() as f64;
        if bound + 2.0 <= self.m_const && matches!(scan.verdict, Verdict::CertifiedUpTo(_)) {
            MembershipCertificate { verdict: Verdict::CertifiedExact, margin: scan.margin }
        } else {
            scan
        }
    }

    /// All `(n, m)`, `m ≤ m_max`, whose open ball contains `y`.
    fn covering_balls(&self, y: f64) -> Vec<(i64, u64)> {
        (1..=self.m_max)
            .filter_map(|m| {
                let mw = m as f64 * y;
                let n = mw.round();
                ((mw - n).abs() < m as f64 * self.radius(m)).then_some((n as i64, m))
            })
            .collect()
    }

    /// `dist(x, A_M)` through the connected component of the excluded union
    /// that contains `x`, plus the smallest-denominator ball covering `x`.
    pub fn distance_to_set(&self, x: f64) -> (f64, Option<(i64, u64)>) {
        let balls = self.covering_balls(x);
        let Some(&first) = balls.first() else {
            return (0.0, None);
        };
        let ends = |balls: &[(i64, u64)]| {
            balls.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(n, m)| {
                let c = n as f64 / m as f64;
                let r = self.radius(m);
                (lo.min(c - r), hi.max(c + r))
            })
        };
        let (mut lo, mut hi) = ends(&balls);
        loop {
            let next = ends(&self.covering_balls(lo)).0;
            if !(next < lo) {
                break;
            }
            lo = next;
        }
        loop {
            let next = ends(&self.covering_balls(hi)).1;
            if !(next > hi) {
                break;
            }
            hi = next;
        }
        ((x - lo).min(hi - x), Some(first))
    }

    /// Membership of a complex frequency: `|Im ω| ≥ dist(Re ω, A_M)`.
    pub fn check_amc(&self, omega: Complex64) -> MembershipCertificate {
        let (dist, witness) = self.distance_to_set(omega.re);
        let margin = omega.im.abs() - dist;
        let verdict = match witness {
            Some((n, m)) if margin < 0.0 => Verdict::Excluded { n, m },
            _ => Verdict::CertifiedUpTo(self.m_max),
        };
        MembershipCertificate { verdict, margin }
    }

    /// Dispatches on `ω`: the complex test off the real axis, the closed-form
    /// certificate when `ω` is the double nearest to the golden or silver mean,
    /// the finite scan otherwise.
    pub fn certify(&self, omega: Complex64) -> MembershipCertificate {
        if omega.im != 0.0 {
            return self.check_amc(omega);
        }
        for q in [QuadraticIrrational::golden(), QuadraticIrrational::silver()] {
            if (q.value() - omega.re).abs() <= 4.0 * f64::EPSILON * omega.re.abs() {
                return self.check_amr_quadratic(&q);
            }
        }
        self.check_amr(omega.re)
    }

    /// Merged open intervals of the excluded union inside `[a, b]`, built from
    /// every reduced ball; each interval carries its smallest-denominator center.
    pub fn excluded_intervals(&self, a: f64, b: f64) -> Result<Vec<ExcludedInterval>, DiophantineError> {
        check_window(a, b)?;
        let r1 = self.radius(1);
        let estimate: u64 = (1..=self.m_max).map(|m| ((b - a + 2.0 * r1) * m as f64) as u64 + 2).sum();
        if estimate > 20_000_000 {
            return Err(DiophantineError::TooManyIntervals(estimate));
        }
        let mut balls = Vec::new();
        for m in 1..=self.m_max {
            let r = self.radius(m);
            let lo = ((a - r) * m as f64).floor() as i64;
            let hi = ((b + r) * m as f64).ceil() as i64;
            for n in lo..=hi {
                if crate::variational::gcd(n, m as i64) != 1 {
                    continue;
                }
                let c = n as f64 / m as f64;
                let (left, right) = ((c - r).max(a), (c + r).min(b));
                if left < right {
                    balls.push(ExcludedInterval { left, right, n, m });
                }
            }
        }
        balls.sort_by(|x, y| x.left.total_cmp(&y.left).then(x.m.cmp(&y.m)));
        let mut merged: Vec<ExcludedInterval> = Vec::new();
        for ball in balls {
            match merged.last_mut() {
                Some(cur) if ball.left < cur.right => {
                    cur.right = cur.right.max(ball.right);
                    if ball.m < cur.m {
                        cur.n = ball.n;
                        cur.m = ball.m;
                    }
                }
                _ => merged.push(ball),
            }
        }
        Ok(merged)
    }

    /// Lebesgue measure of the excluded union inside `[a, b]`.
    ///
    /// Walks the Stern–Brocot tree cell by cell. Inside a Farey interval
    /// `(L, R)` every descendant ball stays inside `(L, R)`, and balls centred
    /// outside reach in only from the ends, so the already-covered part is
    /// always `(L, cl) ∪ (cr, R)`.
    pub fn excluded_length(&self, a: f64, b: f64) -> Result<f64, DiophantineError> {
        check_window(a, b)?;
        if self.m_max > MAX_TREE_DEPTH {
            return Err(DiophantineError::DepthTooLarge(self.m_max, MAX_TREE_DEPTH));
        }
        let radii: Vec<f64> = (0..=self.m_max).map(|m| if m == 0 { 0.0 } else { self.radius(m) }).collect();
        let r1 = radii[1];
        let mut total = 0.0;
        let mut comp = 0.0;
        let first = a.floor() as i64;
        let last = b.ceil() as i64;
        for cell in first..last {
            let origin = cell as f64;
            let (wa, wb) = ((a - origin).max(0.0), (b - origin).min(1.0));
            if wa >= wb {
                continue;
            }
            neumaier_add(&mut total, &mut comp, clipped(0.0, r1, wa, wb));
            neumaier_add(&mut total, &mut comp, clipped(1.0 - r1, 1.0, wa, wb));
            let walk = TreeWalk { radii: &radii, wa, wb };
            let root = Node { a: 0, b: 1, c: 1, d: 1, cl: r1, cr: 1.0 - r1 };
            neumaier_add(&mut total, &mut comp, walk.measure(root));
        }
        Ok(total + comp)
    }

    /// Excluded measure of `[start, start + 1]` against `2ζ(1+τ)/M`.
    pub fn measure_bound_check(&self, start: f64) -> Result<MeasureCheck, DiophantineError> {
        let excluded_length = self.excluded_length(start, start + 1.0)?;
        Ok(MeasureCheck { excluded_length, bound: self.measure_bound(), tail_bound: self.tail_bound() })
    }
}

fn check_window(a: f64, b: f64) -> Result<(), DiophantineError> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(DiophantineError::BadWindow(a, b));
    }
    Ok(())
}

fn clipped(lo: f64, hi: f64, wa: f64, wb: f64) -> f64 {
    (hi.min(wb) - lo.max(wa)).max(0.0)
}

#[derive(Clone, Copy)]
struct Node {
    a: u32,
    b: u32,
    c: u32,
    d: u32,
    cl: f64,
    cr: f64,
}

struct TreeWalk<'a> {
    radii: &'a [f64],
    wa: f64,
    wb: f64,
}

impl TreeWalk<'_> {
    fn m_max(&self) -> u32 {
        (self.radii.len() - 1) as u32
    }

    fn full_cell(&self) -> bool {
        self.wa <= 0.0 && self.wb >= 1.0
    }

    fn visible(&self, node: &Node) -> bool {
        if node.cl >= node.cr || node.b + node.d > self.m_max() {
            return false;
        }
        if self.full_cell() {
            return true;
        }
        let left_end = node.a as f64 / node.b as f64;
        let right_end = node.c as f64 / node.d as f64;
        right_end > self.wa && left_end < self.wb && node.cr > self.wa && node.cl < self.wb
    }

    /// Adds the mediant's uncovered contribution and returns the children
    /// that still have a mediant within depth and an uncovered gap.
    #[inline]
    fn expand(&self, node: Node, sum: &mut f64, comp: &mut f64) -> [Option<Node>; 2] {
        let (e, f) = (node.a + node.c, node.b + node.d);
        let center = e as f64 / f as f64;
        let r = self.radii[f as usize];
        let lo = node.cl.max(self.wa);
        let hi = node.cr.min(self.wb);
        let piece =
            if center - r >= lo && center + r <= hi { 2.0 * r } else { clipped(center - r, center + r, lo, hi) };
        neumaier_add(sum, comp, piece);
        let left = Node { a: node.a, b: node.b, c: e, d: f, cl: node.cl, cr: node.cr.min(center - r) };
        let right = Node { a: e, b: f, c: node.c, d: node.d, cl: node.cl.max(center + r), cr: node.cr };
        [self.visible(&left).then_some(left), self.visible(&right).then_some(right)]
    }

    fn measure(&self, root: Node) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        let mut frontier: Vec<Node> = self.visible(&root).then_some(root).into_iter().collect();
        while !frontier.is_empty() && frontier.len() < 4096 {
            frontier = frontier.into_iter().flat_map(|node| self.expand(node, &mut sum, &mut comp)).flatten().collect();
        }
        let parts: Vec<(f64, f64)> = frontier
            .par_iter()
            .map(|&node| {
                let (mut s, mut c) = (0.0, 0.0);
                let mut stack = vec![node];
                while let Some(n) = stack.pop() {
                    let [l, r] = self.expand(n, &mut s, &mut c);
                    if let Some(r) = r {
                        stack.push(r);
                    }
                    if let Some(l) = l {
                        stack.push(l);
                    }
                }
                (s, c)
            })
            .collect();
        for (s, c) in parts {
            neumaier_add(&mut sum, &mut comp, s);
            neumaier_add(&mut sum, &mut comp, c);
        }
        sum + comp
    }
}

/// Outcome of a finite membership scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    /// No violating rational with denominator `≤ m_max`.
    CertifiedUpTo(u64),
    /// Closed-form certificate valid for every denominator.
    CertifiedExact,
    /// `|ω - n/m| < 1/(M m^{2+τ})` (smallest such `m`).
    Excluded { n: i64, m: u64 },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::CertifiedUpTo(m) => write!(f, "certified-up-to-{m}"),
            Verdict::CertifiedExact => write!(f, "certified-exact"),
            Verdict::Excluded { n, m } => write!(f, "excluded-{n}/{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipCertificate {
    pub verdict: Verdict,
    /// Real case: `min_m (|ω - n/m| - 1/(M m^{2+τ}))`. Complex case: `|Im ω| - dist(Re ω, A_M)`.
    pub margin: f64,
}

impl MembershipCertificate {
    pub fn is_member(&self) -> bool {
        !matches!(self.verdict, Verdict::Excluded { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcludedInterval {
    pub left: f64,
    pub right: f64,
    pub n: i64,
    pub m: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureCheck {
    pub excluded_length: f64,
    pub bound: f64,
    /// Upper bound on what denominators above `m_max` could still add.
    pub tail_bound: f64,
}

impl MeasureCheck {
    pub fn holds(&self) -> bool {
        self.excluded_length < self.bound
    }
}

/// A quadratic irrational by its eventually periodic continued fraction
/// `[a_0; prefix..., (period...)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticIrrational {
    pub a0: i64,
    pub prefix: Vec<u64>,
    pub period: Vec<u64>,
}

impl QuadraticIrrational {
    /// `(√5 - 1)/2 = [0; 1, 1, ...]`.
    pub fn golden() -> Self {
        Self { a0: 0, prefix: vec![], period: vec![1] }
    }

    /// `√2 - 1 = [0; 2, 2, ...]`.
    pub fn silver() -> Self {
        Self { a0: 0, prefix: vec![], period: vec![2] }
    }

    pub fn max_partial_quotient(&self) -> u64 {
        self.prefix.iter().chain(&self.period).copied().max().unwrap_or(1)
    }

    /// Value from the periodic part's fixed point, `x = [period; x]`.
    pub fn value(&self) -> f64 {
        assert!(!self.period.is_empty(), "period must be nonempty");
        // the tail is a root of c x² + (d - a) x - b = 0 for x = (a x + b)/(c x + d)
        let (mut a, mut b, mut c, mut d) = (1.0f64, 0.0f64, 0.0f64, 1.0f64);
        for &q in &self.period {
            let q = q as f64;
            (a, b, c, d) = (a * q + b, a, c * q + d, c);
        }
        let disc = (d - a).powi(2) + 4.0 * b * c;
        let mut x = ((a - d) + disc.sqrt()) / (2.0 * c);
        for &q in self.prefix.iter().rev() {
            x = q as f64 + 1.0 / x;
        }
        self.a0 as f64 + 1.0 / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden_mean;

    fn class(m_max: u64) -> DiophantineClass {
        DiophantineClass::new(0.5, 6.0, m_max).unwrap()
    }

    #[test]
    fn zeta_three_halves() {
        let (z, err) = zeta(1.5, ZETA_TERMS);
        assert!((z - 2.612_375_348_685_488).abs() < 1e-12);
        assert!(err < 1e-12);
        // a short sum with the same tail formula agrees
        let (short, _) = zeta(1.5, 1000);
        assert!((short - z).abs() < 1e-12);
    }

    #[test]
    fn construction_checks() {
        assert!(matches!(DiophantineClass::new(0.0, 6.0, 10), Err(DiophantineError::NonPositiveTau(_))));
        assert!(matches!(DiophantineClass::new(0.5, 5.0, 10), Err(DiophantineError::ConstantTooSmall { .. })));
        assert!(matches!(DiophantineClass::new(0.5, 6.0, 0), Err(DiophantineError::EmptyDepth)));
    }

    #[test]
    fn rationals_are_excluded() {
        let cert = class(1000).check_amr(0.5);
        assert_eq!(cert.verdict, Verdict::Excluded { n: 1, m: 2 });
        assert!(cert.margin < 0.0);
    }

    #[test]
    fn golden_is_certified() {
        let d = class(100_000);
        let cert = d.check_amr(golden_mean());
        assert_eq!(cert.verdict, Verdict::CertifiedUpTo(100_000));
        assert!(cert.margin > 0.0);
        // brute-force: the margin is attained by some denominator, with positive slack everywhere
        let mut worst = f64::INFINITY;
        for m in 1..=100_000u64 {
            for n in [(golden_mean() * m as f64).floor(), (golden_mean() * m as f64).ceil()] {
                worst = worst.min((golden_mean() - n / m as f64).abs() - d.radius(m));
            }
        }
        assert!((worst - cert.margin).abs() < 1e-15);
        assert_eq!(d.check_amr_quadratic(&QuadraticIrrational::golden()).verdict, Verdict::CertifiedExact);
        assert_eq!(d.check_amr_quadratic(&QuadraticIrrational::silver()).verdict, Verdict::CertifiedExact);
    }

    #[test]
    fn point_near_a_convergent_is_excluded_there() {
        let d = class(100_000);
        let w = 89.0 / 144.0 + 0.5 * d.radius(144);
        let cert = d.check_amr(w);
        assert_eq!(cert.verdict, Verdict::Excluded { n: 89, m: 144 });
        let convergents = crate::variational::continued_fraction(golden_mean(), 40);
        assert!(convergents.iter().any(|r| r.p == 89 && r.q == 144));
        assert!(d.check_amr(89.0 / 144.0 + 2.0 * d.radius(144)).verdict != cert.verdict);
    }

    #[test]
    fn quadratic_values() {
        assert!((QuadraticIrrational::golden().value() - golden_mean()).abs() < 1e-15);
        assert!((QuadraticIrrational::silver().value() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let q = QuadraticIrrational { a0: 1, prefix: vec![3], period: vec![1, 2] };
        // [1; 3, (1, 2)]: tail t = [1; 2, t] solves 2t² - 2t - 1 = 0
        let t = (2.0 + 12f64.sqrt()) / 4.0;
        assert!((q.value() - (1.0 + 1.0 / (3.0 + 1.0 / t))).abs() < 1e-15);
        assert_eq!(q.max_partial_quotient(), 3);
    }

    #[test]
    fn interval_construction_small_depth() {
        let d = class(3);
        let iv = d.excluded_intervals(0.0, 1.0).unwrap();
        let r = |m: u64| 1.0 / (6.0 * (m as f64).powf(2.5));
        let centers: Vec<(i64, u64)> = iv.iter().map(|i| (i.n, i.m)).collect();
        assert_eq!(centers, vec![(0, 1), (1, 3), (1, 2), (2, 3), (1, 1)]);
        assert!((iv[0].right - r(1)).abs() < 1e-16);
        assert!((iv[1].left - (1.0 / 3.0 - r(3))).abs() < 1e-16);
        assert!((iv[2].right - (0.5 + r(2))).abs() < 1e-16);
        assert!((iv[4].left - (1.0 - r(1))).abs() < 1e-16);
    }

    #[test]
    fn tree_walk_matches_interval_union() {
        for &(m_max, a, b) in &[(3, 0.0, 1.0), (40, 0.0, 1.0), (150, -0.3, 1.7), (90, 0.21, 0.47)] {
            let d = class(m_max);
            let union: f64 = d.excluded_intervals(a, b).unwrap().iter().map(|i| i.right - i.left).sum();
            let walked = d.excluded_length(a, b).unwrap();
            assert!((union - walked).abs() < 1e-13, "m_max {m_max}: {union} vs {walked}");
        }
    }

    #[test]
    fn excluded_length_monotone_in_depth_and_below_bound() {
        let mut prev = 0.0;
        for &m_max in &[1u64, 2, 5, 50, 500, 2000] {
            let d = class(m_max);
            let check = d.measure_bound_check(0.0).unwrap();
            assert!(check.excluded_length >= prev);
            assert!(check.holds());
            let doubled = d.with_depth(2 * m_max).measure_bound_check(0.0).unwrap();
            assert!(doubled.excluded_length - check.excluded_length <= check.tail_bound);
            prev = check.excluded_length;
        }
    }

    #[test]
    fn bound_scales_with_inverse_m() {
        let a = class(10);
        let b = DiophantineClass::new(0.5, 12.0, 10).unwrap();
        assert!((a.measure_bound() - 2.0 * b.measure_bound()).abs() < 1e-15);
        assert!((a.measure_bound() - 2.0 * 2.612_375_348_685_488 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn complex_membership() {
        let d = class(1000);
        let g = d.check_amc(Complex64::new(golden_mean(), 0.0));
        assert!(g.is_member());
        let (dist, w) = d.distance_to_set(0.5);
        assert_eq!(w, Some((1, 2)));
        assert!(dist >= d.radius(2) - 1e-15);
        assert!(d.check_amc(Complex64::new(0.5, 0.4)).is_member());
        assert!(!d.check_amc(Complex64::new(0.5, 0.001)).is_member());
        let big_m = DiophantineClass::new(0.5, 600.0, 1000).unwrap();
        assert!(big_m.check_amc(Complex64::new(0.5, 0.001)).is_member());
    }

    #[test]
    fn map_e_identities() {
        assert_eq!(map_e(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        let w = Complex64::new(0.3, 0.2);
        assert!((map_e(w + 1.0) - map_e(w)).norm() < 1e-14);
        assert!((map_e(w).norm() - (-TAU * 0.2).exp()).abs() < 1e-15);
    }
}
