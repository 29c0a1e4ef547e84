//! Polynomial and symmetric-tensor arithmetic.
//!
//! Real polynomials are sparse exponent-vector maps; symmetric tensors keep
//! one coefficient per index multiset. Complex Hermitian operators on
//! `(C^n)^{⊗d}` are turned into real forms over `2n` variables ordered as
//! all real parts followed by all imaginary parts.

mod hermitian;
mod multi_index;
mod polynomial;
mod symmetric;

pub use hermitian::{
    complex_to_real_block, realify, realify_polynomial, ComplexHermitianOperator, HERMITIAN_TOL,
    REAL_BLOCK_TRACE_FACTOR,
};
pub use multi_index::{monomial_count, monomials_of_degree, MultiIndex};
pub use polynomial::{SparsePolynomial, TermJson};
pub use symmetric::{
    poly_to_tensor, poly_to_tensor_with_degree, symmetrize, tensor_to_poly, RawTensor,
    SymmetricTensor,
};
