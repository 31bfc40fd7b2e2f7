//! Lowest eigenpairs of a symmetric tridiagonal matrix by Sturm-sequence
//! bisection plus inverse iteration.

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`
/// (`e.len() == d.len() - 1`).
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiag {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Self {
        assert!(d.len() >= 2 && e.len() == d.len() - 1);
        Self { d, e }
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via the
    /// shifted LDL^T recurrence).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.d[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e2 = self.e[i - 1] * self.e[i - 1];
            let denom = if q.abs() < 1e-300 { 1e-300_f64.copysign(q + 1e-300) } else { q };
            q = self.d[i] - x - e2 / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                + if i < n - 1 { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues, ascending.
    pub fn smallest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let (glo, ghi) = self.gershgorin();
        (0..k).map(|m| self.kth_eigenvalue(m, glo, ghi)).collect()
    }

    /// Bisection for the (0-based) `m`-th eigenvalue.
    fn kth_eigenvalue(&self, m: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..120 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) <= m {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= 1e-14 * hi.abs().max(lo.abs()).max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an eigenvalue estimate, by inverse iteration with a
    /// slightly perturbed shift.  Returns a unit vector (Euclidean norm).
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        let shift = lambda + 1e-11 * lambda.abs().max(1.0);
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.3 * ((i.wrapping_mul(2654435761)) % 97) as f64 / 97.0)
            .collect();
        normalize(&mut v);
        for _ in 0..4 {
            let mut w = self.solve_shifted(shift, &v);
            normalize(&mut w);
            v = w;
        }
        v
    }

    /// Solves `(T - shift I) x = b` by tridiagonal LU with partial pivoting
    /// (one superdiagonal of fill-in).
    fn solve_shifted(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut dd: Vec<f64> = self.d.iter().map(|&v| v - shift).collect();
        let mut du = self.e.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let dl = self.e.clone();
        let mut x = b.to_vec();

        for i in 0..n - 1 {
            if dl[i].abs() <= dd[i].abs() {
                let piv = if dd[i].abs() < 1e-300 { 1e-300 } else { dd[i] };
                let fact = dl[i] / piv;
                dd[i + 1] -= fact * du[i];
                x[i + 1] -= fact * x[i];
            } else {
                let fact = dd[i] / dl[i];
                dd[i] = dl[i];
                let tmp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = tmp - fact * dd[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                x.swap(i, i + 1);
                x[i + 1] -= fact * x[i];
            }
        }
        // back substitution
        let piv = |v: f64| if v.abs() < 1e-300 { 1e-300 } else { v };
        x[n - 1] /= piv(dd[n - 1]);
        if n >= 2 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / piv(dd[n - 2]);
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / piv(dd[i]);
        }
        x
    }
}

fn normalize(v: &mut [f64]) {
    let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Discrete Dirichlet Laplacian on (0, pi): exact eigenvalues
    /// (2 - 2 cos(k pi / (n+1))) / h^2.
    fn laplacian(n: usize) -> (SymTridiag, f64) {
        let h = std::f64::consts::PI / (n + 1) as f64;
        let d = vec![2.0 / (h * h); n];
        let e = vec![-1.0 / (h * h); n - 1];
        (SymTridiag::new(d, e), h)
    }

    #[test]
    fn laplacian_eigenvalues_match_closed_form() {
        let n = 2000;
        let (t, h) = laplacian(n);
        let eig = t.smallest_eigenvalues(4);
        for (k, lam) in eig.iter().enumerate() {
            let kf = (k + 1) as f64;
            let exact = (2.0 - 2.0 * (kf * std::f64::consts::PI / (n + 1) as f64).cos()) / (h * h);
            assert_relative_eq!(*lam, exact, max_relative = 1e-10);
        }
    }

    #[test]
    fn eigenvector_matches_sine_mode() {
        let n = 800;
        let (t, _h) = laplacian(n);
        let lam = t.smallest_eigenvalues(2);
        for (k, &l) in lam.iter().enumerate() {
            let v = t.eigenvector(l);
            // compare against sin((k+1) pi j / (n+1)) up to sign
            let mut dot = 0.0;
            let mut norm = 0.0;
            for (j, &vj) in v.iter().enumerate() {
                let exact =
                    ((k + 1) as f64 * std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).sin();
                dot += vj * exact;
                norm += exact * exact;
            }
            let cos = dot.abs() / norm.sqrt();
            assert!(cos > 1.0 - 1e-10, "mode {k} cosine {cos}");
        }
    }

    #[test]
    fn residual_of_computed_pairs_is_small() {
        let n = 500;
        let (t, _) = laplacian(n);
        let lam = t.smallest_eigenvalues(3);
        for &l in &lam {
            let v = t.eigenvector(l);
            let mut worst: f64 = 0.0;
            for i in 0..n {
                let mut r = (t.d[i] - l) * v[i];
                if i > 0 {
                    r += t.e[i - 1] * v[i - 1];
                }
                if i < n - 1 {
                    r += t.e[i] * v[i + 1];
                }
                worst = worst.max(r.abs());
            }
            assert!(worst < 1e-7 * l.abs(), "residual {worst} for lambda {l}");
        }
    }
}
