//! Bipartite symmetric-extension (DPS) relaxation.
//!
//! The extension `ρ̃` lives on `A ⊗ Sym^k(B)` and is embedded into
//! `A ⊗ B^{⊗k}` by the isometry `V`, which makes it invariant under every
//! permutation of the `B` copies by construction. Complex Hermitian
//! variables `H` of side `K` are represented by real PSD blocks `Y` of side
//! `2K` through `H = ½ ((Y11 + Y22) + i (Y21 - Y12))`, under which
//! `Tr(G H) = <½ embed(G), Y>` with `embed(G) = [[Re G, -Im G], [Im G, Re G]]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::moment::max_moment_side;
use crate::error::{Error, Result};
use crate::sdp::{SdpProblem, SdpSolution, Sense, SolverOptions, SolverStatus, SparseBlockMatrix};
use crate::tensor_poly::{
    monomial_count, monomials_of_degree, ComplexHermitianOperator, MultiIndex,
};

#[derive(Clone, Debug)]
pub struct DpsSdp {
    pub problem: SdpProblem,
    pub local_dim: usize,
    pub extensions: usize,
    pub ppt: bool,
    /// `V`: columns are `|a> ⊗ |s>` for symmetric basis states `|s>`.
    pub isometry: DMatrix<Complex64>,
    /// Row of the unit-trace constraint, when present.
    pub trace_row: Option<usize>,
    /// Rows tying the `AB` marginal to a target, with their operators.
    pub marginal_rows: Vec<(usize, DMatrix<Complex64>)>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Isometry `Sym^k(C^n) -> (C^n)^{⊗k}` onto normalized symmetrized states.
pub fn symmetric_isometry(n: usize, k: usize) -> DMatrix<Complex64> {
    let occupations = monomials_of_degree(n, k as u32);
    let index_of = |m: &MultiIndex| occupations.iter().position(|o| o == m).unwrap();
    let rows = n.pow(k as u32);
    let mut w = DMatrix::from_element(rows, occupations.len(), zero());
    for t in 0..rows {
        let digits = to_digits(t, n, k);
        let occ = MultiIndex::from_indices(n, &digits);
        let col = index_of(&occ);
        w[(t, col)] = Complex64::new(1.0 / occ.multinomial().sqrt(), 0.0);
    }
    w
}

fn to_digits(mut idx: usize, n: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    d
}

fn from_digits(d: &[usize], n: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * n + x)
}

fn kron_identity_left(n: usize, w: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (r, c) = w.shape();
    let mut out = DMatrix::from_element(n * r, n * c, zero());
    for a in 0..n {
        out.view_mut((a * r, a * c), (r, c)).copy_from(w);
    }
    out
}

/// Partial transpose of the systems at digit positions `1..=j` of an
/// operator on `n^{len}` with one digit per subsystem.
pub fn partial_transpose(
    op: &DMatrix<Complex64>,
    n: usize,
    len: usize,
    j: usize,
) -> DMatrix<Complex64> {
    let side = op.nrows();
    let mut out = DMatrix::from_element(side, side, zero());
    for p in 0..side {
        let dp = to_digits(p, n, len);
        for q in 0..side {
            let dq = to_digits(q, n, len);
            let (mut sp, mut sq) = (dp.clone(), dq.clone());
            for pos in 1..=j {
                std::mem::swap(&mut sp[pos], &mut sq[pos]);
            }
            out[(from_digits(&sp, n), from_digits(&sq, n))] = op[(p, q)];
        }
    }
    out
}

/// `½ embed(G)` on one real block, as upper-triangle entries.
pub fn hermitian_functional(g: &DMatrix<Complex64>, block: usize) -> SparseBlockMatrix {
    let k = g.nrows();
    let mut a = SparseBlockMatrix::new();
    for i in 0..k {
        for j in i..k {
            let z = g[(i, j)];
            if z.re != 0.0 {
                a.add(block, i, j, 0.5 * z.re);
                a.add(block, k + i, k + j, 0.5 * z.re);
            }
        }
        for j in 0..k {
            // Upper-right block entry (i, k + j) carries -Im G_ij.
            let z = g[(i, j)];
            if z.im != 0.0 {
                a.add(block, i, k + j, -0.5 * z.im);
            }
        }
    }
    a
}

/// `H = ½ ((Y11 + Y22) + i (Y21 - Y12))`.
pub fn complex_from_real_block(y: &DMatrix<f64>) -> DMatrix<Complex64> {
    let k = y.nrows() / 2;
    DMatrix::from_fn(k, k, |i, j| {
        Complex64::new(
            0.5 * (y[(i, j)] + y[(k + i, k + j)]),
            0.5 * (y[(k + i, j)] - y[(i, k + j)]),
        )
    })
}

/// Hermitian basis `{E_pp, E_pq + E_qp, i(E_pq - E_qp)}` of side `d`.
fn hermitian_basis(d: usize) -> Vec<DMatrix<Complex64>> {
    let mut out = Vec::with_capacity(d * d);
    for p in 0..d {
        for q in p..d {
            let mut e = DMatrix::from_element(d, d, zero());
            if p == q {
                e[(p, p)] = Complex64::new(1.0, 0.0);
                out.push(e);
            } else {
                e[(p, q)] = Complex64::new(1.0, 0.0);
                e[(q, p)] = Complex64::new(1.0, 0.0);
                out.push(e.clone());
                e[(p, q)] = Complex64::new(0.0, 1.0);
                e[(q, p)] = Complex64::new(0.0, -1.0);
                out.push(e);
            }
        }
    }
    out
}

impl DpsSdp {
    /// Side of the symmetric extension space `A ⊗ Sym^k(B)`.
    pub fn extension_dim(&self) -> usize {
        self.isometry.ncols()
    }

    /// `V† (op ⊗ 𝟙_{B2..Bk}) V` for an operator on `AB`.
    pub fn lift(&self, op_ab: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = self.local_dim;
        let rest = n.pow(self.extensions as u32 - 1);
        let big = DMatrix::from_fn(n * n * rest, n * n * rest, |p, q| {
            if p % rest == q % rest {
                op_ab[(p / rest, q / rest)]
            } else {
                zero()
            }
        });
        self.isometry.adjoint() * big * &self.isometry
    }

    pub fn extension_state(&self, sol: &SdpSolution) -> DMatrix<Complex64> {
        complex_from_real_block(&sol.x[0])
    }

    /// `Tr_{B2..Bk}(V H V†)`.
    pub fn ab_marginal(&self, h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = self.local_dim;
        let rest = n.pow(self.extensions as u32 - 1);
        let full = &self.isometry * h * self.isometry.adjoint();
        DMatrix::from_fn(n * n, n * n, |p, q| {
            (0..rest).map(|t| full[(p * rest + t, q * rest + t)]).sum()
        })
    }
}

/// Blocks and PPT links shared by the value and witness programs.
fn dps_skeleton(n: usize, k: usize, ppt: bool, sense: Sense) -> Result<DpsSdp> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("DPS needs n >= 1 and k >= 1".into()));
    }
    let limit = max_moment_side();
    let full = (n as u64)
        .checked_pow(k as u32 + 1)
        .ok_or(Error::Overflow("DPS dimension"))?;
    let sym = monomial_count(n, k)?;
    let ext_side = 2 * n as u64 * sym;
    let ppt_side = if ppt { 2 * full } else { 0 };
    let side = ext_side.max(ppt_side);
    if side > limit {
        return Err(Error::SizeOverflow { side, limit });
    }
    let isometry = kron_identity_left(n, &symmetric_isometry(n, k));
    let kdim = isometry.ncols();
    let mut blocks = vec![2 * kdim];
    if ppt {
        blocks.extend(std::iter::repeat_n(2 * full as usize, k));
    }
    let mut problem = SdpProblem::new(blocks, sense);
    if ppt {
        let d = full as usize;
        let basis = hermitian_basis(d);
        let vdag = isometry.adjoint();
        for j in 1..=k {
            for e in &basis {
                let et = partial_transpose(e, n, k + 1, j);
                let lifted = &vdag * et * &isometry;
                let mut a = hermitian_functional(e, j);
                for (b, r, c, v) in hermitian_functional(&lifted, 0).entries() {
                    a.add(b, r, c, -v);
                }
                problem.add_constraint(a, 0.0);
            }
        }
    }
    Ok(DpsSdp {
        problem,
        local_dim: n,
        extensions: k,
        ppt,
        isometry,
        trace_row: None,
        marginal_rows: Vec::new(),
    })
}

fn check_bipartite(m: &ComplexHermitianOperator) -> Result<()> {
    if m.copies() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "bipartite operator expected on n⊗n, got {} copies",
            m.copies()
        )));
    }
    Ok(())
}

/// Maximize `Tr[M ρ_AB]` over `AB` marginals of unit-trace PSD extensions
/// on `A ⊗ Sym^k(B)`, with optional PPT cuts on `{B1..Bj}`, `j = 1..k`.
pub fn build_dps_bipartite(m: &ComplexHermitianOperator, k: usize, ppt: bool) -> Result<DpsSdp> {
    check_bipartite(m)?;
    let mut sdp = dps_skeleton(m.local_dim(), k, ppt, Sense::Max)?;
    let g = sdp.lift(m.entries());
    sdp.problem.objective = hermitian_functional(&g, 0);
    let kdim = sdp.extension_dim();
    let id = DMatrix::<Complex64>::identity(kdim, kdim);
    sdp.trace_row = Some(
        sdp.problem
            .add_constraint(hermitian_functional(&id, 0), 1.0),
    );
    Ok(sdp)
}

/// Minimize `Tr ρ̃` subject to
/// `Tr[E (marginal(V ρ̃ V†) - Tr ρ̃ 𝟙/n²)] = Tr[E (target - 𝟙/n²)]` for a
/// Hermitian basis `{E}` of `AB`.
pub fn build_dps_witness_program(
    target: &ComplexHermitianOperator,
    k: usize,
    ppt: bool,
) -> Result<DpsSdp> {
    check_bipartite(target)?;
    let n = target.local_dim();
    let nn = (n * n) as f64;
    let mut sdp = dps_skeleton(n, k, ppt, Sense::Min)?;
    let kdim = sdp.extension_dim();
    let id = DMatrix::<Complex64>::identity(kdim, kdim);
    sdp.problem.objective = hermitian_functional(&id, 0);
    for e in hermitian_basis(n * n) {
        let tr_e: f64 = (0..n * n).map(|i| e[(i, i)].re).sum();
        let g = sdp.lift(&e) - &id * Complex64::new(tr_e / nn, 0.0);
        let rhs = (target.entries() * &e).trace().re - tr_e / nn;
        let row = sdp.problem.add_constraint(hermitian_functional(&g, 0), rhs);
        sdp.marginal_rows.push((row, e));
    }
    Ok(sdp)
}

#[derive(Clone, Debug)]
pub struct DpsResult {
    pub value: f64,
    pub dual_value: f64,
    pub status: SolverStatus,
    pub rho_ab: DMatrix<Complex64>,
    pub solution: SdpSolution,
}

pub fn solve_dps(
    m: &ComplexHermitianOperator,
    k: usize,
    ppt: bool,
    opts: &SolverOptions,
) -> Result<DpsResult> {
    let sdp = build_dps_bipartite(m, k, ppt)?;
    let sol = crate::sdp::solve(&sdp.problem, opts)?;
    let h = sdp.extension_state(&sol);
    Ok(DpsResult {
        value: sol.primal_objective,
        dual_value: sol.dual_objective,
        status: sol.status,
        rho_ab: sdp.ab_marginal(&h),
        solution: sol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::solve;
    use crate::tensor_poly::complex_to_real_block;

    fn tight() -> SolverOptions {
        SolverOptions {
            feas_tol: 1e-9,
            gap_tol: 1e-9,
            ..Default::default()
        }
    }

    #[test]
    fn isometry_columns_are_orthonormal() {
        for (n, k) in [(2, 1), (2, 3), (3, 2)] {
            let w = symmetric_isometry(n, k);
            let g = w.adjoint() * &w;
            let id = DMatrix::<Complex64>::identity(g.nrows(), g.nrows());
            assert!((g - id).norm() < 1e-12);
        }
    }

    #[test]
    fn functional_matches_complex_trace() {
        let g = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.3, -0.7),
                Complex64::new(0.3, 0.7),
                Complex64::new(-2.0, 0.0),
            ],
        );
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.6, 0.0),
                Complex64::new(0.1, 0.2),
                Complex64::new(0.1, -0.2),
                Complex64::new(0.4, 0.0),
            ],
        );
        let y = complex_to_real_block(&h).unwrap();
        let a = hermitian_functional(&g, 0);
        let want = (&g * &h).trace().re;
        assert!((a.inner(std::slice::from_ref(&y)) - want).abs() < 1e-14);
        assert!((complex_from_real_block(&y) - h).norm() < 1e-15);
    }

    #[test]
    fn partial_transpose_of_max_entangled_has_negative_eigenvalue() {
        let phi = ComplexHermitianOperator::maximally_entangled(2).unwrap();
        let pt = partial_transpose(phi.entries(), 2, 2, 1);
        let y = complex_to_real_block(&pt).unwrap();
        let lam = y.symmetric_eigen().eigenvalues.min();
        assert!((lam + 0.5).abs() < 1e-12);
    }

    #[test]
    fn product_projector_value_is_one() {
        let mut v = vec![Complex64::new(0.0, 0.0); 4];
        v[0] = Complex64::new(1.0, 0.0);
        let p = ComplexHermitianOperator::projector(2, 2, &v).unwrap();
        for ppt in [false, true] {
            let r = solve_dps(&p, 1, ppt, &tight()).unwrap();
            assert_eq!(r.status, SolverStatus::Optimal);
            assert!((r.value - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn witness_program_is_feasible_for_maximally_mixed_state() {
        let mixed = ComplexHermitianOperator::identity(2, 2)
            .unwrap()
            .affine(0.25, 0.0);
        let sdp = build_dps_witness_program(&mixed, 1, true).unwrap();
        let sol = solve(&sdp.problem, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!(sol.primal_objective.abs() < 1e-6);
    }

    #[test]
    fn maximally_entangled_ppt_overlap_is_half() {
        let phi = ComplexHermitianOperator::maximally_entangled(2).unwrap();
        let r = solve_dps(&phi, 1, true, &tight()).unwrap();
        assert_eq!(r.status, SolverStatus::Optimal);
        assert!((r.value - 0.5).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn maximally_entangled_extendable_values() {
        let phi = ComplexHermitianOperator::maximally_entangled(2).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=3 {
            let r = solve_dps(&phi, k, false, &tight()).unwrap();
            assert_eq!(r.status, SolverStatus::Optimal);
            assert!(r.value >= 1.0 / k as f64 - 1e-6 && r.value <= 1.0 + 1e-6);
            assert!(r.value <= prev + 1e-7);
            prev = r.value;
        }
    }

    #[test]
    fn witness_program_values() {
        let phi = ComplexHermitianOperator::maximally_entangled(2).unwrap();
        let sdp = build_dps_witness_program(&phi, 1, true).unwrap();
        let sol = solve(&sdp.problem, &tight()).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!(
            (sol.primal_objective - 3.0).abs() < 1e-6,
            "{}",
            sol.primal_objective
        );
    }
}
