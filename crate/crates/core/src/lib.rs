//! Spectral numerics for the nonlinear Schrödinger equation with an external potential,
//! posed on a periodic box.
//!
//! Conventions: `H = Delta - V`, the linear group is `e^{itH}`, and the cubic equation reads
//! `i u_t + Delta u - V u + |u|^2 u = 0` in the focusing case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod groundstate;
pub mod potential;
pub mod randomization;
pub mod picard;
pub mod spacetime;
pub mod stability;
pub mod spectral;

pub use error::{NlsError, Result};
pub use evolution::{EvolveConfig, Nonlinearity, Scheme, Sign, TrajectorySeries};
pub use potential::{AdmissibilityReport, PotentialSpec};
pub use randomization::{RandomSeedPlan, TailReport};
pub use spectral::{make_grid, GridSpec, SpectralField};
pub use rustfft::num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
