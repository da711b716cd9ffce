//! Mixing analysis for the affine recursion `X_{n+1} = A X_n + B_n (mod p)`
//! on `Z_p^k`.
//!
//! * [`algebra`]: exact integer matrices and polynomials, eigenvalues,
//!   regime classification.
//! * [`increments`]: the increment law, its difference sets and support basis.
//! * [`evolution`]: exact evolution of the law of `X_n`, total variation,
//!   Monte Carlo simulation and mixing times.
//! * [`fourier`]: Fourier transforms, upper and lower bounds, certificates.
//! * [`digitlab`]: base-sigma digit expansions and alternation census.
//! * [`sweep`]: mixing-time sweeps over moduli and rate fits.

pub mod algebra;
pub mod digitlab;
mod error;
pub mod evolution;
pub mod fourier;
pub mod increments;
pub mod par;
pub mod sweep;

pub use error::{Error, Result};
