//! Numerical toolkit for the Hénon–Sobolev critical system
//!
//! ```text
//!   -div(|x|^{-2a} grad u) = |x|^{-bp} u^{p-1} + nu*alpha |x|^{-bp} u^{alpha-1} v^beta
//!   -div(|x|^{-2a} grad v) = |x|^{-bp} v^{p-1} + nu*beta  |x|^{-bp} u^alpha v^{beta-2} v
//! ```
//!
//! on `R^n` with `p = 2n/(n-2+2(b-a))`, together with its k-coupled
//! generalization.  Everything radial is handled in Emden–Fowler
//! coordinates `t = -ln r`, `phi(t) = r^{(n-2-2a)/2} u(r)`, where the
//! radial operator becomes `-phi'' + gamma*phi` with constant
//! `gamma = ((n-2-2a)/2)^2` and all weights disappear.
//!
//! Modules:
//! * [`params`] — parameter validation, derived constants, Felli–Schneider
//!   regime classification
//! * [`bubble`] — the explicit extremal family, soliton form, Kelvin and
//!   Hardy–Sobolev transforms
//! * [`profile`] — sampled radial profiles with cubic interpolation and
//!   exponential tail models
//! * [`ode`] — Picard integral-equation solver, residuals, asymptotics,
//!   uniqueness experiment, inversion normalization
//! * [`sync`] — algebraic synchronization systems for the coupling constants
//! * [`groundstate`] — coupling function minimization, sharp
//!   Caffarelli–Kohn–Nirenberg constants, ground-state energy
//! * [`spectrum`] — radial-sector eigenvalues of the linearized operator and
//!   nondegeneracy checks
//! * [`verify`] — self-check battery used by the CLI `verify-all` command

pub mod bubble;
pub mod config;
pub mod error;
pub mod groundstate;
pub mod numerics;
pub mod ode;
pub mod params;
pub mod profile;
pub mod spectrum;
pub mod sync;
pub mod verify;

pub use error::Error;
pub use params::{felli_schneider, CouplingSpec, ProblemParams, Regime, RegimeTag};
pub use profile::RadialProfile;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
