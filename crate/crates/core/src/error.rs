use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter or table violates one of the construction invariants.
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    DomainError(String),

    /// A Picard iterate exceeded the blow-up cap before reaching `r_max`.
    #[error("solution component {component} exceeded the blow-up cap {cap:.3e} at r = {r:.6e}")]
    BlowUp { component: usize, r: f64, cap: f64 },

    /// A Picard window failed to contract after the iteration budget.
    #[error("Picard window [{r_lo:.6e}, {r_hi:.6e}] failed to contract after {iters} iterations")]
    NoConvergence { r_lo: f64, r_hi: f64, iters: usize },

    /// Profiles passed to a grid operation do not share a common grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The exponential tail fit of a profile is worse than the tolerance.
    #[error("tail not resolved: fit residual {residual:.3e} exceeds {tol:.3e}")]
    TailNotResolved { residual: f64, tol: f64 },

    /// Initial data passed to the uniqueness experiment are not proportional.
    #[error("initial data are not proportional: {0}")]
    NotProportional(String),

    /// The scalar-reduction scan found no positive synchronization root.
    #[error("no positive synchronization root found in the scan window")]
    NoPositiveRoot,

    /// Radial computation refused: the extremal is not radially symmetric here.
    #[error(
        "b < b_FS(a): symmetry-breaking regime (a = {a}, b = {b}, b_FS = {b_fs}), \
         radial computation refused"
    )]
    SymmetryBreakingRegime { a: f64, b: f64, b_fs: f64 },

    /// A pair handed to the nondegeneracy check does not solve the sync system.
    #[error("(c1, c2) is not a synchronization root: residual {residual:.3e}")]
    NotASyncRoot { residual: f64 },

    /// Richardson extrapolation across two grids disagrees beyond tolerance.
    #[error("grid too coarse: Richardson correction {defect:.3e} exceeds {tol:.3e}")]
    GridTooCoarse { defect: f64, tol: f64 },
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ConstraintViolation(_) | Error::DomainError(_) | Error::NotProportional(_)
        )
    }
}
