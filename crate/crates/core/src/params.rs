//! Parameter validation, derived constants and regime classification.
//!
//! The admissible parameter range is
//!
//! ```text
//!   n >= 3,   a < (n-2)/2,   a <= b < a+1,
//!   p = 2n/(n-2+2(b-a)),     nu > 0,
//!   alpha > 1, beta > 1,     alpha + beta = p.
//! ```
//!
//! Derived quantities used throughout: `lambda = (n-2-2a)/2`,
//! `gamma = lambda^2`, and the quantity `2a+2-bp = lambda*(p-2) > 0`
//! that controls the Picard contraction.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Relative tolerance for the `alpha + beta = p` constraint.
const EXPONENT_SUM_TOL: f64 = 1e-12;

/// Default relative tolerance for detecting the Felli–Schneider boundary.
pub const FS_BOUNDARY_TOL: f64 = 1e-12;

/// Validated scalar parameters of the two-component system, with all
/// derived quantities filled in at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemParams {
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Critical exponent `2n/(n-2+2(b-a))`.
    pub p: f64,
    /// `((n-2-2a)/2)^2`, the constant coefficient of the Emden–Fowler form.
    pub gamma: f64,
    /// `(n-2-2a)/2`, the Emden–Fowler exponent and tail decay rate.
    pub lambda: f64,
}

impl ProblemParams {
    /// Validates the raw scalars and fills the derived fields.
    pub fn new(n: u32, a: f64, b: f64, nu: f64, alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("nu", nu), ("alpha", alpha), ("beta", beta)] {
            if !v.is_finite() {
                return Err(Error::ConstraintViolation(format!("{name} must be finite")));
            }
        }
        if n < 3 {
            return Err(Error::ConstraintViolation(format!(
                "n = {n}: dimensions below 3 are not supported"
            )));
        }
        let nf = f64::from(n);
        if !(a < (nf - 2.0) / 2.0) {
            return Err(Error::ConstraintViolation(format!(
                "a = {a} must satisfy a < (n-2)/2 = {}",
                (nf - 2.0) / 2.0
            )));
        }
        if !(a <= b) {
            return Err(Error::ConstraintViolation(format!("b = {b} < a = {a}")));
        }
        if !(b < a + 1.0) {
            return Err(Error::ConstraintViolation(format!(
                "b = {b} must satisfy b < a + 1 = {}",
                a + 1.0
            )));
        }
        if !(nu > 0.0) {
            return Err(Error::ConstraintViolation(format!("nu = {nu} must be positive")));
        }
        let p = 2.0 * nf / (nf - 2.0 + 2.0 * (b - a));
        if !(p > 2.0 && p <= 2.0 * nf / (nf - 2.0) + 1e-12) {
            return Err(Error::ConstraintViolation(format!(
                "derived p = {p} outside (2, 2n/(n-2)]"
            )));
        }
        if !(alpha > 1.0) {
            return Err(Error::ConstraintViolation(format!("alpha = {alpha} must exceed 1")));
        }
        if !(beta > 1.0) {
            return Err(Error::ConstraintViolation(format!("beta = {beta} must exceed 1")));
        }
        if (alpha + beta - p).abs() > EXPONENT_SUM_TOL * p {
            return Err(Error::ConstraintViolation(format!(
                "alpha + beta = {} must equal p = {p}",
                alpha + beta
            )));
        }
        let lambda = (nf - 2.0 - 2.0 * a) / 2.0;
        let gamma = lambda * lambda;
        // Holds automatically on the admissible range (it equals
        // lambda*(p-2)); checked anyway because the Picard solver and the
        // uniqueness contraction depend on it.
        if !(2.0 * a + 2.0 - b * p > 0.0) {
            return Err(Error::ConstraintViolation(format!(
                "integrability exponent 2a+2-bp = {} must be positive",
                2.0 * a + 2.0 - b * p
            )));
        }
        Ok(Self { n, a, b, nu, alpha, beta, p, gamma, lambda })
    }

    /// `2a + 2 - bp`, the Hölder exponent of the Picard contraction.
    /// Equals `lambda * (p - 2)` on the admissible range.
    pub fn picard_exponent(&self) -> f64 {
        2.0 * self.a + 2.0 - self.b * self.p
    }

    /// Classifies the symmetry regime with the default boundary tolerance.
    pub fn regime(&self) -> Regime {
        self.regime_with_tol(FS_BOUNDARY_TOL)
    }

    /// Classifies the symmetry regime; `tol` is the relative width of the
    /// band around `b_FS(a)` reported as the boundary.
    pub fn regime_with_tol(&self, tol: f64) -> Regime {
        if self.a >= 0.0 {
            return Regime { tag: RegimeTag::Symmetric, b_fs: None };
        }
        let b_fs = felli_schneider(self.n, self.a);
        let scale = b_fs.abs().max(1.0);
        let tag = if (self.b - b_fs).abs() <= tol * scale {
            RegimeTag::FsBoundary
        } else if self.b > b_fs {
            RegimeTag::Symmetric
        } else {
            // Includes the corner b = a < 0, which is grouped with the
            // refused region: no radially symmetric extremal is available.
            RegimeTag::SymmetryBreaking
        };
        Regime { tag, b_fs: Some(b_fs) }
    }

    /// Errors unless radial extremals are available (`a >= 0`, or `a < 0`
    /// with `b >= b_FS(a)` up to the boundary tolerance).
    pub fn require_radial_extremal(&self) -> Result<()> {
        let regime = self.regime();
        match regime.tag {
            RegimeTag::Symmetric | RegimeTag::FsBoundary => Ok(()),
            RegimeTag::SymmetryBreaking => Err(Error::SymmetryBreakingRegime {
                a: self.a,
                b: self.b,
                b_fs: regime.b_fs.unwrap_or(f64::NAN),
            }),
        }
    }
}

/// Symmetry classification of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeTag {
    /// Extremals are radially symmetric (`a >= 0`, or `a < 0, b > b_FS`).
    Symmetric,
    /// Ground states are non-radial (`a < 0, a < b < b_FS`).
    SymmetryBreaking,
    /// On the Felli–Schneider curve within tolerance.
    FsBoundary,
}

/// Regime tag plus the Felli–Schneider threshold when it is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub tag: RegimeTag,
    /// `b_FS(a)`; only populated when `a < 0`.
    pub b_fs: Option<f64>,
}

/// The Felli–Schneider curve
/// `b_FS(a) = n(n-2-2a) / (2 sqrt((n-2-2a)^2 + 4n - 4)) - (n-2-2a)/2`.
///
/// The regime semantics only apply for `a < 0`; the formula itself is
/// defined for any `a < (n-2)/2`.
pub fn felli_schneider(n: u32, a: f64) -> f64 {
    let nf = f64::from(n);
    let big = nf - 2.0 - 2.0 * a;
    nf * big / (2.0 * (big * big + 4.0 * nf - 4.0).sqrt()) - big / 2.0
}

/// Coefficient tables of the k-coupled system
///
/// ```text
///   -div(|x|^{-2a} grad u_i) = sum_j kappa_ij |x|^{-bp} u_i^{alpha_ij - 1} u_j^{beta_ij}
/// ```
///
/// with `kappa_ij > 0`, `alpha_ij, beta_ij > 1` and `alpha_ij + beta_ij = p`.
#[derive(Debug, Clone, Serialize)]
pub struct CouplingSpec {
    /// Scalar parameters shared by all components (`nu, alpha, beta` of the
    /// base are not used by the k-form).
    pub base: ProblemParams,
    pub k: usize,
    pub kappa: Vec<Vec<f64>>,
    pub alpha_ij: Vec<Vec<f64>>,
    pub beta_ij: Vec<Vec<f64>>,
    /// True when `alpha_ij = beta_ji` and `kappa_ij/kappa_ji = alpha_ij/beta_ij`
    /// for all pairs, so the system is the gradient of an energy functional.
    pub variational: bool,
}

impl CouplingSpec {
    pub fn new(
        base: ProblemParams,
        kappa: Vec<Vec<f64>>,
        alpha_ij: Vec<Vec<f64>>,
        beta_ij: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = kappa.len();
        if k < 2 {
            return Err(Error::ConstraintViolation(format!("k = {k} must be at least 2")));
        }
        for (name, table) in [("kappa", &kappa), ("alpha_ij", &alpha_ij), ("beta_ij", &beta_ij)] {
            if table.len() != k || table.iter().any(|row| row.len() != k) {
                return Err(Error::ConstraintViolation(format!("{name} must be a {k}x{k} table")));
            }
        }
        let p = base.p;
        for i in 0..k {
            for j in 0..k {
                if !(kappa[i][j] > 0.0) {
                    return Err(Error::ConstraintViolation(format!(
                        "kappa[{i}][{j}] = {} must be positive",
                        kappa[i][j]
                    )));
                }
                if !(alpha_ij[i][j] > 1.0) || !(beta_ij[i][j] > 1.0) {
                    return Err(Error::ConstraintViolation(format!(
                        "alpha_ij[{i}][{j}] = {}, beta_ij[{i}][{j}] = {} must both exceed 1",
                        alpha_ij[i][j], beta_ij[i][j]
                    )));
                }
                if (alpha_ij[i][j] + beta_ij[i][j] - p).abs() > EXPONENT_SUM_TOL * p {
                    return Err(Error::ConstraintViolation(format!(
                        "alpha_ij[{i}][{j}] + beta_ij[{i}][{j}] = {} must equal p = {p}",
                        alpha_ij[i][j] + beta_ij[i][j]
                    )));
                }
            }
        }
        let mut variational = true;
        for i in 0..k {
            for j in 0..k {
                let sym = (alpha_ij[i][j] - beta_ij[j][i]).abs() <= 1e-12 * p;
                let ratio = (kappa[i][j] / kappa[j][i] - alpha_ij[i][j] / beta_ij[i][j]).abs()
                    <= 1e-12 * (alpha_ij[i][j] / beta_ij[i][j]).abs();
                if !(sym && ratio) {
                    variational = false;
                }
            }
        }
        Ok(Self { base, k, kappa, alpha_ij, beta_ij, variational })
    }

    /// The k = 2 tables equivalent to the two-component system with
    /// coupling `nu`: diagonal `kappa_ii = 1, alpha_ii = beta_ii = p/2`,
    /// off-diagonal `kappa_12 = nu*alpha, kappa_21 = nu*beta`.
    pub fn from_two_system(params: &ProblemParams) -> Self {
        let p = params.p;
        let (al, be, nu) = (params.alpha, params.beta, params.nu);
        let kappa = vec![vec![1.0, nu * al], vec![nu * be, 1.0]];
        let alpha_ij = vec![vec![p / 2.0, al], vec![be, p / 2.0]];
        let beta_ij = vec![vec![p / 2.0, be], vec![al, p / 2.0]];
        Self::new(params.clone(), kappa, alpha_ij, beta_ij)
            .expect("two-system dictionary is always admissible")
    }

    /// Fully symmetric spec: every `kappa_ij = kappa`, all exponents `p/2`.
    pub fn fully_symmetric(base: ProblemParams, k: usize, kappa: f64) -> Result<Self> {
        let p = base.p;
        Self::new(
            base,
            vec![vec![kappa; k]; k],
            vec![vec![p / 2.0; k]; k],
            vec![vec![p / 2.0; k]; k],
        )
    }
}

/// Deserialized form of the JSON parameter object; see [`crate::config`].
#[derive(Debug, Clone, Deserialize)]
pub struct RawParams {
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl RawParams {
    pub fn build(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.n, self.a, self.b, self.nu, self.alpha, self.beta)
    }
}
