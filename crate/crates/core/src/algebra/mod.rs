//! Exact integer linear algebra and spectral classification.

mod identities;
mod matrix;
mod poly;
mod roots;
mod spectral;

pub use identities::{lemma25_verify, IdentityCheck};
pub use matrix::{det_int, integer_kernel, mat_pow_mod, rank, IntMatrix, ModMatrix};
pub use poly::{char_poly, factor_monic, minimal_poly, root_of_integer_order, Factor, IntPolynomial};
pub use roots::eigenvalues;
pub use spectral::{classify_regime, FactorOrder, Regime, SpectralProfile, DEFAULT_L_MAX, TOL_UNIT};
