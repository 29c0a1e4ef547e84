//! Certified upper bounds for product-symmetric polynomial optimization.
//!
//! The crate builds the KKT-augmented moment/sum-of-squares hierarchy for
//! maximizing a homogeneous form over the unit sphere, solves it with a
//! bundled primal-dual interior-point SDP solver, extracts and verifies
//! sum-of-squares certificates, and cross-checks results against local
//! ascent, ε-net enumeration, and exact Gröbner-basis analysis of the KKT
//! ideal. A bipartite symmetric-extension (DPS) baseline and entanglement
//! witness search are included.

pub mod cli;
pub mod error;
pub mod groebner;
pub mod io;
pub mod kkt;
pub mod oracle;
pub mod relaxation;
pub mod sdp;
pub mod tensor_poly;
pub mod witness;

pub use error::{Error, Result};
