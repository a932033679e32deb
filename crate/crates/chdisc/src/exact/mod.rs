//! Exact arithmetic for certification: ℚ, real quadratic extensions ℚ(√d),
//! complexifications thereof, sums over several radicals, and an exact
//! positive-semidefiniteness test with η-mixing searches built on it.
//!
//! The certification pipeline never trusts a floating-point comparison: all
//! accept/reject decisions route through these types, while floats appear
//! only as pre-screens that can skip work, never flip an answer.

mod complex;
mod psd;
mod quad;
mod radical;

pub use complex::ExactComplex;
pub(crate) use psd::float_min_eig;
pub use psd::{ExactMat, binary_search_eta, is_psd_exact};
pub use quad::{
    ExactError, QuadExt, Rational, float_to_rational, rational_from_str, rational_to_string,
    sqrt_rational,
};
pub use radical::RadicalSum;
