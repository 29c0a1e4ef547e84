#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sephier::sdp::{SdpProblem, Sense, SolverOptions, SparseBlockMatrix};
use sephier::tensor_poly::{
    monomials_of_degree, poly_to_tensor, SparsePolynomial, SymmetricTensor,
};

pub fn tight() -> SolverOptions {
    SolverOptions {
        feas_tol: 1e-9,
        gap_tol: 1e-9,
        ..Default::default()
    }
}

/// Homogeneous form with coefficients uniform in `[-1, 1]` on every monomial.
pub fn random_form(m: usize, deg: u32, seed: u64) -> SparsePolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = SparsePolynomial::zero(m);
    for mono in monomials_of_degree(m, deg) {
        p.add_term(mono, rng.random_range(-1.0..1.0));
    }
    p
}

pub fn random_tensor(m: usize, deg: u32, seed: u64) -> (SparsePolynomial, SymmetricTensor) {
    let p = random_form(m, deg, seed);
    let t = poly_to_tensor(&p).unwrap();
    (p, t)
}

pub fn random_spd(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    &g * g.transpose() / n as f64 + DMatrix::identity(n, n) * 0.5
}

pub fn random_sym(rng: &mut impl Rng, block_sizes: &[usize]) -> SparseBlockMatrix {
    let mut a = SparseBlockMatrix::new();
    for (b, &n) in block_sizes.iter().enumerate() {
        for r in 0..n {
            for c in r..n {
                a.add(b, r, c, rng.sample::<f64, _>(StandardNormal));
            }
        }
    }
    a
}

/// Feasible and bounded by construction: `b = A(X0)` with `X0 ≻ 0`, and
/// `C = A*(y0) + S0` with `S0 ≻ 0`.
pub fn constructed_sdp(seed: u64) -> SdpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nblocks = rng.random_range(1..=3);
    let sizes: Vec<usize> = (0..nblocks).map(|_| rng.random_range(1..=30)).collect();
    let m = rng.random_range(1..=60);
    let x0: Vec<DMatrix<f64>> = sizes.iter().map(|&n| random_spd(&mut rng, n)).collect();
    let s0: Vec<DMatrix<f64>> = sizes.iter().map(|&n| random_spd(&mut rng, n)).collect();
    let mut p = SdpProblem::new(sizes.clone(), Sense::Min);
    let mut y0 = Vec::new();
    for _ in 0..m {
        let a = random_sym(&mut rng, &sizes);
        let b = a.inner(&x0);
        p.add_constraint(a, b);
        y0.push(rng.sample::<f64, _>(StandardNormal));
    }
    let mut c = p.adjoint(&y0);
    for (cb, sb) in c.iter_mut().zip(&s0) {
        *cb += sb;
    }
    for (b, cb) in c.iter().enumerate() {
        for r in 0..sizes[b] {
            for col in r..sizes[b] {
                p.objective.add(b, r, col, cb[(r, col)]);
            }
        }
    }
    p
}
