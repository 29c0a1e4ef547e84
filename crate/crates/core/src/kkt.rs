//! Sphere constraint and KKT minors for `max f0(x)` subject to `|x|^2 = 1`.
//!
//! At a stationary point the gradients of `f0` and `f1 = |x|^2 - 1` are
//! parallel, i.e. every 2x2 minor
//! `g_ij = ∂_i f0 · ∂_j f1 - ∂_j f0 · ∂_i f1` vanishes. Only `i < j` is
//! stored since `g_ji = -g_ij` and `g_ii = 0`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::tensor_poly::{
    poly_to_tensor_with_degree, MultiIndex, SparsePolynomial, SymmetricTensor,
};

/// Tolerance on `| |x|^2 - 1 |` accepted by [`kkt_residual`].
pub const SPHERE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct KktSystem {
    num_vars: usize,
    half_degree: u32,
    objective: SparsePolynomial,
    sphere: SparsePolynomial,
    minors: BTreeMap<(usize, usize), SparsePolynomial>,
    gamma: BTreeMap<(usize, usize), SymmetricTensor>,
}

impl KktSystem {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// `d`, half the degree of the objective.
    pub fn half_degree(&self) -> u32 {
        self.half_degree
    }

    pub fn objective(&self) -> &SparsePolynomial {
        &self.objective
    }

    pub fn sphere(&self) -> &SparsePolynomial {
        &self.sphere
    }

    pub fn minors(&self) -> &BTreeMap<(usize, usize), SparsePolynomial> {
        &self.minors
    }

    /// Minor for any ordered pair, using antisymmetry for `i > j`.
    pub fn minor(&self, i: usize, j: usize) -> SparsePolynomial {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.minors[&(i, j)].clone(),
            std::cmp::Ordering::Equal => SparsePolynomial::zero(self.num_vars),
            std::cmp::Ordering::Greater => self.minors[&(j, i)].scale(-1.0),
        }
    }

    pub fn gamma(&self) -> &BTreeMap<(usize, usize), SymmetricTensor> {
        &self.gamma
    }

    /// Generators of the KKT ideal: `f1` followed by the nonzero minors.
    pub fn ideal_generators(&self) -> Vec<SparsePolynomial> {
        std::iter::once(self.sphere.clone())
            .chain(self.minors.values().filter(|g| !g.is_zero()).cloned())
            .collect()
    }
}

/// Builds `f1` and every minor `g_ij` (`i < j`) for a homogeneous objective
/// of even degree `2d >= 2`.
pub fn build_kkt_system(f0: &SparsePolynomial, num_vars: usize) -> Result<KktSystem> {
    if f0.num_vars() != num_vars {
        return Err(Error::DimensionMismatch {
            expected: num_vars,
            found: f0.num_vars(),
        });
    }
    if f0.is_zero() {
        return Err(Error::InvalidArgument(
            "objective is identically zero".into(),
        ));
    }
    let deg = f0.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
    if deg % 2 != 0 {
        return Err(Error::OddDegree(deg));
    }
    if deg == 0 {
        return Err(Error::InvalidArgument(
            "objective must have degree at least 2".into(),
        ));
    }
    let half_degree = deg / 2;

    let mut sphere = SparsePolynomial::norm_squared_power(num_vars, 1);
    sphere.add_term(MultiIndex::zero(num_vars), -1.0);

    // ∇f1 = 2x, so g_ij = 2 (x_j ∂_i f0 - x_i ∂_j f0); no determinant expansion needed.
    let grad = f0.gradient();
    let mut minors = BTreeMap::new();
    let mut gamma = BTreeMap::new();
    for i in 0..num_vars {
        for j in (i + 1)..num_vars {
            let xj = MultiIndex::var(num_vars, j, 1);
            let xi = MultiIndex::var(num_vars, i, 1);
            let g = &grad[i].mul_monomial(&xj, 2.0) - &grad[j].mul_monomial(&xi, 2.0);
            let t = poly_to_tensor_with_degree(&g, half_degree)?;
            minors.insert((i, j), g);
            gamma.insert((i, j), t);
        }
    }
    Ok(KktSystem {
        num_vars,
        half_degree,
        objective: f0.clone(),
        sphere,
        minors,
        gamma,
    })
}

/// `max(|f1(x)|, max_ij |g_ij(x)|)` at a unit vector.
pub fn kkt_residual(sys: &KktSystem, x: &[f64]) -> Result<f64> {
    let f1 = sys.sphere.eval(x)?;
    if f1.abs() > SPHERE_TOL {
        return Err(Error::NotOnSphere(f1));
    }
    let mut worst = f1.abs();
    for g in sys.minors.values() {
        worst = worst.max(g.eval(x)?.abs());
    }
    Ok(worst)
}
