//! Exact-rational computational algebra for the KKT ideal.
//!
//! Graded-lex Buchberger with a hard degree cap, multivariate division,
//! homogenization, zero-dimensionality checks, and the degree-bound report.

mod buchberger;
mod rational_poly;
mod snap;

pub use buchberger::{
    buchberger, degree_bound_report, ideal_dimension, is_zero_dimensional, reduce,
    remainder_degree_bound, s_polynomial, GroebnerBasis, MonomialOrder, DEFAULT_DEGREE_CAP,
};
pub use rational_poly::RationalPolynomial;
pub use snap::{best_rational, snap_to_rational, SnapResult, DEFAULT_DENOMINATOR_CAP};
