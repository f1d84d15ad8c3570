//! Symmetric cyclic tridiagonal matrices.
//!
//! `off[j]` couples rows `j` and `(j + 1) mod n`. For `n ≥ 3` the matrix is
//! handled as a tridiagonal block bordered by its last row and column, which
//! gives O(n) solves and O(n) inertia counts (Haynsworth).

#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

const PIVOT_FLOOR: f64 = 1e-300;

impl CyclicTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(diag.len(), off.len(), "one coupling per row");
        assert!(!diag.is_empty(), "empty matrix");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Dense form; couplings that land on the same entry add up (n = 1, 2).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut a = vec![vec![0.0; n]; n];
        for j in 0..n {
            a[j][j] += self.diag[j];
            let k = (j + 1) % n;
            a[j][k] += self.off[j];
            a[k][j] += self.off[j];
        }
        a
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for j in 0..n {
            let k = (j + 1) % n;
            y[j] += self.off[j] * x[k];
            y[k] += self.off[j] * x[j];
        }
        y
    }

    /// Solves `(A + shift·I) x = rhs`; `None` if a pivot vanishes.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        match n {
            1 => {
                let a = self.diag[0] + 2.0 * self.off[0] + shift;
                (a != 0.0).then(|| vec![rhs[0] / a])
            }
            2 => {
                let c = self.off[0] + self.off[1];
                let (a, d) = (self.diag[0] + shift, self.diag[1] + shift);
                let det = a * d - c * c;
                (det != 0.0).then(|| vec![(d * rhs[0] - c * rhs[1]) / det, (a * rhs[1] - c * rhs[0]) / det])
            }
            _ => {
                let t = self.leading_block(shift);
                let border = self.border();
                let y = t.solve(&rhs[..n - 1])?;
                let z = t.solve(&border)?;
                let d_last = self.diag[n - 1] + shift;
                let denom = d_last - dot(&border, &z);
                if denom == 0.0 {
                    return None;
                }
                let x_last = (rhs[n - 1] - dot(&border, &y)) / denom;
                let mut x: Vec<f64> = y.iter().zip(&z).map(|(yi, zi)| yi - x_last * zi).collect();
                x.push(x_last);
                Some(x)
            }
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        self.solve_shifted(0.0, rhs)
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.len();
        match n {
            1 => usize::from(self.diag[0] + 2.0 * self.off[0] < sigma),
            2 => {
                let (lo, hi) = self.eigen_2x2();
                usize::from(lo < sigma) + usize::from(hi < sigma)
            }
            _ => {
                let t = self.leading_block(-sigma);
                let border = self.border();
                let (negatives, schur_form) = t.inertia_and_form(&border);
                let schur = self.diag[n - 1] - sigma - schur_form;
                negatives + usize::from(schur < 0.0)
            }
        }
    }

    fn eigen_2x2(&self) -> (f64, f64) {
        let c = self.off[0] + self.off[1];
        let (a, d) = (self.diag[0], self.diag[1]);
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d).powi(2) + c * c).sqrt();
        (mid - rad, mid + rad)
    }

    /// Smallest eigenvalue by bisection on the inertia count.
    pub fn min_eigenvalue(&self, tol: f64) -> f64 {
        let n = self.len();
        if n == 1 {
            return self.diag[0] + 2.0 * self.off[0];
        }
        if n == 2 {
            return self.eigen_2x2().0;
        }
        let (mut lo, mut hi) = self.gershgorin();
        lo -= 1e-12;
        hi += 1e-12;
        for _ in 0..200 {
            if hi - lo <= tol * (1.0 + lo.abs().max(hi.abs())) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..n {
            let r = self.off[j].abs() + self.off[(j + n - 1) % n].abs();
            lo = lo.min(self.diag[j] - r);
            hi = hi.max(self.diag[j] + r);
        }
        (lo, hi)
    }

    fn leading_block(&self, shift: f64) -> Tridiagonal {
        let n = self.len();
        Tridiagonal { diag: self.diag[..n - 1].iter().map(|d| d + shift).collect(), off: self.off[..n - 2].to_vec() }
    }

    fn border(&self) -> Vec<f64> {
        let n = self.len();
        let mut b = vec![0.0; n - 1];
        b[0] += self.off[n - 1];
        b[n - 2] += self.off[n - 2];
        b
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Symmetric tridiagonal; `off[i]` couples `i` and `i + 1`.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    fn pivots(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.diag.len());
        for (i, &d) in self.diag.iter().enumerate() {
            let mut v = if i == 0 { d } else { d - self.off[i - 1].powi(2) / p[i - 1] };
            if v == 0.0 {
                v = -PIVOT_FLOOR;
            }
            p.push(v);
        }
        p
    }

    /// LDLᵀ solve without pivoting.
    fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.diag.len();
        let mut p = Vec::with_capacity(n);
        for (i, &d) in self.diag.iter().enumerate() {
            let v = if i == 0 { d } else { d - self.off[i - 1].powi(2) / p[i - 1] };
            if v == 0.0 || !v.is_finite() {
                return None;
            }
            p.push(v);
        }
        let mut w = rhs.to_vec();
        for i in 1..n {
            w[i] -= self.off[i - 1] / p[i - 1] * w[i - 1];
        }
        let mut x = vec![0.0; n];
        x[n - 1] = w[n - 1] / p[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (w[i] - self.off[i] * x[i + 1]) / p[i];
        }
        Some(x)
    }

    /// Negative pivot count and `bᵀ A⁻¹ b`.
    fn inertia_and_form(&self, b: &[f64]) -> (usize, f64) {
        let p = self.pivots();
        let mut w = b.to_vec();
        for i in 1..w.len() {
            w[i] -= self.off[i - 1] / p[i - 1] * w[i - 1];
        }
        let negatives = p.iter().filter(|&&v| v < 0.0).count();
        let form = w.iter().zip(&p).map(|(wi, pi)| wi * wi / pi).sum();
        (negatives, form)
    }
}
