use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::presolve::{presolve, PresolveReport, Presolved};
use super::problem::{block_inner, SdpProblem, Sense};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolverStatus {
    Optimal,
    MaxIterations,
    NumericalFailure,
    PrimalInfeasibleSuspected,
    DualInfeasibleSuspected,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Relative primal and dual feasibility tolerance.
    pub feas_tol: f64,
    /// Relative duality-gap tolerance.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// 0 is silent; 1 prints one line per iteration to stderr.
    pub verbosity: u8,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-7,
            gap_tol: 1e-6,
            max_iter: 200,
            verbosity: 0,
        }
    }
}

/// Residuals measured on the original problem.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Residuals {
    /// `max_i |<A_i, X> - b_i| / (1 + |b_i|)`.
    pub primal: f64,
    /// Largest entry of the dual-equation residual over `1 + max|C|`.
    pub dual: f64,
    /// `|<C, X> - b·y| / (1 + max(|<C, X>|, |b·y|))`.
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: Vec<DMatrix<f64>>,
    /// Multipliers in the problem's own sense: `S = C - Σ y_i A_i` when
    /// minimizing, `S = Σ y_i A_i - C` when maximizing.
    pub y: Vec<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub status: SolverStatus,
    pub iterations: usize,
    pub residuals: Residuals,
    /// Complementarity `<X, S>` after each iteration, original scaling.
    pub gap_trace: Vec<f64>,
    pub presolve: PresolveReport,
}

/// Dense working copy of a presolved problem, always minimizing.
struct Work {
    sizes: Vec<usize>,
    c: Vec<DMatrix<f64>>,
    a: Vec<Vec<(usize, usize, usize, f64)>>,
    b: DVector<f64>,
}

impl Work {
    fn new(p: &SdpProblem) -> Self {
        let mut c = p.objective.to_dense(&p.block_sizes);
        if p.sense == Sense::Max {
            c.iter_mut().for_each(|m| *m *= -1.0);
        }
        Work {
            sizes: p.block_sizes.clone(),
            c,
            a: p.constraints
                .iter()
                .map(|a| a.entries().collect())
                .collect(),
            b: DVector::from_vec(p.rhs.clone()),
        }
    }

    fn zeros(&self) -> Vec<DMatrix<f64>> {
        self.sizes.iter().map(|&s| DMatrix::zeros(s, s)).collect()
    }

    fn identity(&self, scale: f64) -> Vec<DMatrix<f64>> {
        self.sizes
            .iter()
            .map(|&s| DMatrix::identity(s, s) * scale)
            .collect()
    }

    fn inner_a(entries: &[(usize, usize, usize, f64)], x: &[DMatrix<f64>]) -> f64 {
        entries
            .iter()
            .map(|&(b, r, c, v)| {
                if r == c {
                    v * x[b][(r, r)]
                } else {
                    v * (x[b][(r, c)] + x[b][(c, r)])
                }
            })
            .sum()
    }

    fn apply(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|e| Self::inner_a(e, x)))
    }

    fn adjoint(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out = self.zeros();
        for (e, &yi) in self.a.iter().zip(y.iter()) {
            for &(b, r, c, v) in e {
                out[b][(r, c)] += yi * v;
                if r != c {
                    out[b][(c, r)] += yi * v;
                }
            }
        }
        out
    }

    /// `M_ij = Tr(A_i X A_j S^{-1})`.
    fn schur(&self, x: &[DMatrix<f64>], sinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.a.len();
        let mut out = DMatrix::zeros(m, m);
        let mut t: Vec<Option<DMatrix<f64>>> = vec![None; self.sizes.len()];
        for j in 0..m {
            t.iter_mut().for_each(|s| *s = None);
            let mut xa: Vec<Option<DMatrix<f64>>> = vec![None; self.sizes.len()];
            for &(b, r, c, v) in &self.a[j] {
                let n = self.sizes[b];
                let acc = xa[b].get_or_insert_with(|| DMatrix::zeros(n, n));
                // (X A)[:, c] += v X[:, r], and the mirrored entry.
                for k in 0..n {
                    acc[(k, c)] += v * x[b][(k, r)];
                }
                if r != c {
                    for k in 0..n {
                        acc[(k, r)] += v * x[b][(k, c)];
                    }
                }
            }
            for (b, xa_b) in xa.into_iter().enumerate() {
                if let Some(xa_b) = xa_b {
                    t[b] = Some(xa_b * &sinv[b]);
                }
            }
            for i in 0..m {
                let mut sum = 0.0;
                for &(b, r, c, v) in &self.a[i] {
                    if let Some(tb) = &t[b] {
                        sum += if r == c {
                            v * tb[(r, r)]
                        } else {
                            v * (tb[(r, c)] + tb[(c, r)])
                        };
                    }
                }
                out[(i, j)] = sum;
            }
        }
        (&out + out.transpose()) * 0.5
    }
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn max_abs(blocks: &[DMatrix<f64>]) -> f64 {
    blocks.iter().map(|m| m.amax()).fold(0.0, f64::max)
}

fn inverse_spd(blocks: &[DMatrix<f64>]) -> Option<Vec<DMatrix<f64>>> {
    blocks
        .iter()
        .map(|m| m.clone().cholesky().map(|c| sym(c.inverse())))
        .collect()
}

/// Largest `α` with `X + α dX ⪰ 0` (infinite when `dX ⪰ 0`).
fn max_step(x: &[DMatrix<f64>], dx: &[DMatrix<f64>]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        let l = xb.clone().cholesky()?.l();
        let w = l.solve_lower_triangular(db)?;
        let w = l.solve_lower_triangular(&w.transpose())?;
        let lam = sym(w)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(v));
        if lam < 0.0 {
            alpha = alpha.min(-1.0 / lam);
        }
    }
    Some(alpha)
}

type Step = (Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>);

enum Factor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        if let Some(c) = m.clone().cholesky() {
            return Some(Factor::Chol(c));
        }
        let scale = m.diagonal().amax().max(1e-300);
        let mut reg = m.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += 1e-13 * scale;
        }
        if let Some(c) = reg.cholesky() {
            return Some(Factor::Chol(c));
        }
        let lu = m.lu();
        if lu.is_invertible() {
            Some(Factor::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Factor::Chol(c) => Some(c.solve(rhs)),
            Factor::Lu(l) => l.solve(rhs),
        }
    }
}

/// Progress measured in original units.
struct Metrics {
    primal: f64,
    dual: f64,
    gap: f64,
}

impl Metrics {
    fn converged(&self, opts: &SolverOptions) -> bool {
        self.primal <= opts.feas_tol && self.dual <= opts.feas_tol && self.gap <= opts.gap_tol
    }
}

fn metrics(
    w: &Work,
    pre: &Presolved,
    rp: &DVector<f64>,
    rd: &[DMatrix<f64>],
    pobj: f64,
    dobj: f64,
) -> Metrics {
    let sc = pre.objective_scale;
    let primal = rp
        .iter()
        .zip(w.b.iter())
        .zip(&pre.row_scale)
        .map(|((r, b), s)| s * r.abs() / (1.0 + s * b.abs()))
        .fold(0.0, f64::max);
    let dual = sc * max_abs(rd) / (1.0 + sc * max_abs(&w.c));
    let gap = sc * (pobj - dobj).abs() / (1.0 + sc * pobj.abs().max(dobj.abs()));
    Metrics { primal, dual, gap }
}

/// Infeasible-start primal-dual path following with the HKM direction and
/// Mehrotra predictor-corrector steps.
pub fn solve(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let pre = presolve(problem)?;
    let w = Work::new(&pre.problem);
    let n_total: usize = w.sizes.iter().sum();
    let nf = n_total as f64;
    let m = w.a.len();

    let max_b = w.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let xi = 10f64.max(nf.sqrt()).max(nf * (1.0 + max_b) / 2.0);
    let eta = 10f64.max(nf.sqrt());
    let mut x = w.identity(xi);
    let mut s = w.identity(eta);
    let mut y = DVector::zeros(m);

    let mut status = SolverStatus::MaxIterations;
    let mut iterations = 0;
    let mut gap_trace = Vec::new();
    let mut stalled = 0;

    loop {
        let ax = w.apply(&x);
        let rp = &w.b - &ax;
        let aty = w.adjoint(&y);
        let rd: Vec<DMatrix<f64>> = (0..w.sizes.len())
            .map(|b| &w.c[b] - &aty[b] - &s[b])
            .collect();
        let pobj = block_inner(&w.c, &x);
        let dobj = w.b.dot(&y);
        let mu = block_inner(&x, &s) / nf;
        let met = metrics(&w, &pre, &rp, &rd, pobj, dobj);
        if opts.verbosity > 0 {
            eprintln!(
                "iter {iterations:3}  pobj {:+.9e}  dobj {:+.9e}  pinf {:.2e}  dinf {:.2e}  gap {:.2e}  mu {:.2e}",
                pobj * pre.objective_scale,
                dobj * pre.objective_scale,
                met.primal,
                met.dual,
                met.gap,
                mu
            );
        }
        if met.converged(opts) {
            status = SolverStatus::Optimal;
            break;
        }
        let x_norm = max_abs(&x);
        let y_norm = y.amax().max(max_abs(&s));
        if x_norm > 1e12 && met.primal < 1e-3 {
            status = SolverStatus::DualInfeasibleSuspected;
            break;
        }
        if y_norm > 1e12 && met.dual < 1e-3 {
            status = SolverStatus::PrimalInfeasibleSuspected;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let Some(sinv) = inverse_spd(&s) else {
            status = SolverStatus::NumericalFailure;
            break;
        };
        let schur = w.schur(&x, &sinv);
        let Some(fac) = Factor::new(schur.clone()) else {
            status = SolverStatus::NumericalFailure;
            break;
        };
        let x_rd_sinv: Vec<DMatrix<f64>> = (0..w.sizes.len())
            .map(|b| &x[b] * &rd[b] * &sinv[b])
            .collect();

        let direction = |g: &[DMatrix<f64>]| -> Option<Step> {
            let diff: Vec<DMatrix<f64>> =
                (0..w.sizes.len()).map(|b| &g[b] - &x_rd_sinv[b]).collect();
            let rhs = &rp - w.apply(&diff);
            let mut dy = fac.solve(&rhs)?;
            // One round of refinement; the Schur matrix is badly scaled near the end.
            let res = &rhs - &schur * &dy;
            dy += fac.solve(&res)?;
            let atdy = w.adjoint(&dy);
            let ds: Vec<DMatrix<f64>> = (0..w.sizes.len()).map(|b| &rd[b] - &atdy[b]).collect();
            let dx: Vec<DMatrix<f64>> = (0..w.sizes.len())
                .map(|b| sym(&g[b] - &x[b] * &ds[b] * &sinv[b]))
                .collect();
            if dx
                .iter()
                .chain(&ds)
                .any(|d| d.iter().any(|v| !v.is_finite()))
            {
                return None;
            }
            Some((dx, dy, ds))
        };

        // Predictor.
        let g_aff: Vec<DMatrix<f64>> = x.iter().map(|xb| -xb).collect();
        let Some((dxa, _, dsa)) = direction(&g_aff) else {
            status = SolverStatus::NumericalFailure;
            break;
        };
        let (Some(ap), Some(ad)) = (max_step(&x, &dxa), max_step(&s, &dsa)) else {
            status = SolverStatus::NumericalFailure;
            break;
        };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = (0..w.sizes.len())
            .map(|b| (&x[b] + &dxa[b] * ap).dot(&(&s[b] + &dsa[b] * ad)))
            .sum::<f64>()
            / nf;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let g: Vec<DMatrix<f64>> = (0..w.sizes.len())
            .map(|b| sym(&sinv[b] * (sigma * mu) - &x[b] - &dxa[b] * &dsa[b] * &sinv[b]))
            .collect();
        let Some((dx, dy, ds)) = direction(&g) else {
            status = SolverStatus::NumericalFailure;
            break;
        };
        let (Some(ap), Some(ad)) = (max_step(&x, &dx), max_step(&s, &ds)) else {
            status = SolverStatus::NumericalFailure;
            break;
        };
        let ap = (0.98 * ap).min(1.0);
        let ad = (0.98 * ad).min(1.0);
        for b in 0..w.sizes.len() {
            x[b] = sym(&x[b] + &dx[b] * ap);
            s[b] = sym(&s[b] + &ds[b] * ad);
        }
        y += &dy * ad;
        gap_trace.push(block_inner(&x, &s) * pre.objective_scale);

        if ap < 1e-8 && ad < 1e-8 {
            stalled += 1;
            if stalled >= 3 {
                status = SolverStatus::NumericalFailure;
                break;
            }
        } else {
            stalled = 0;
        }
    }

    // Back to the original problem.
    let sc = pre.objective_scale;
    let y_sense: Vec<f64> = match problem.sense {
        Sense::Min => y.iter().copied().collect(),
        Sense::Max => y.iter().map(|v| -v).collect(),
    };
    let y_orig = pre.recover_y(&y_sense);
    let s_orig: Vec<DMatrix<f64>> = s.iter().map(|m| m * sc).collect();
    let residuals = original_residuals(problem, &x, &y_orig, &s_orig);
    let primal_objective = problem.objective.inner(&x);
    let dual_objective: f64 = problem.rhs.iter().zip(&y_orig).map(|(b, y)| b * y).sum();
    if status == SolverStatus::Optimal
        && !(residuals.primal <= opts.feas_tol
            && residuals.dual <= opts.feas_tol
            && residuals.gap <= opts.gap_tol)
    {
        status = SolverStatus::NumericalFailure;
    }
    Ok(SdpSolution {
        x,
        y: y_orig,
        s: s_orig,
        primal_objective,
        dual_objective,
        status,
        iterations,
        residuals,
        gap_trace,
        presolve: pre.report,
    })
}

/// Residuals of `(X, y, S)` against the original, unreduced problem.
pub fn original_residuals(
    problem: &SdpProblem,
    x: &[DMatrix<f64>],
    y: &[f64],
    s: &[DMatrix<f64>],
) -> Residuals {
    let primal = problem
        .constraints
        .iter()
        .zip(&problem.rhs)
        .map(|(a, b)| (a.inner(x) - b).abs() / (1.0 + b.abs()))
        .fold(0.0, f64::max);
    let slack = problem.dual_slack(y);
    let diff: Vec<DMatrix<f64>> = slack.iter().zip(s).map(|(a, b)| a - b).collect();
    let dual = max_abs(&diff) / (1.0 + problem.objective.max_abs());
    let pobj = problem.objective.inner(x);
    let dobj: f64 = problem.rhs.iter().zip(y).map(|(b, y)| b * y).sum();
    let gap = (pobj - dobj).abs() / (1.0 + pobj.abs().max(dobj.abs()));
    Residuals { primal, dual, gap }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::problem::{min_eigenvalue, SparseBlockMatrix};

    fn tight() -> SolverOptions {
        SolverOptions {
            feas_tol: 1e-9,
            gap_tol: 1e-9,
            ..Default::default()
        }
    }

    #[test]
    fn scalar_lp() {
        let mut p = SdpProblem::new(vec![1], Sense::Min);
        p.objective.add(0, 0, 0, 1.0);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 0, 0, 1.0);
        p.add_constraint(a, 1.0);
        let sol = solve(&p, &tight()).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.x[0][(0, 0)] - 1.0).abs() < 1e-7);
        assert!((sol.primal_objective - sol.dual_objective).abs() < 1e-6);
    }

    #[test]
    fn trace_minimization_with_off_diagonal_constraint() {
        let mut p = SdpProblem::new(vec![2], Sense::Min);
        p.objective.add(0, 0, 0, 1.0);
        p.objective.add(0, 1, 1, 1.0);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 0, 1, 1.0);
        p.add_constraint(a, 2.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.primal_objective - 2.0).abs() < 1e-6);
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((sol.x[0][(r, c)] - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn max_sense_largest_eigenvalue() {
        // max <C, X> s.t. Tr X = 1 is the largest eigenvalue of C.
        let mut p = SdpProblem::new(vec![3], Sense::Max);
        let c = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.5], [0.0, 0.5, -1.0]];
        for (r, row) in c.iter().enumerate() {
            for (col, &v) in row.iter().enumerate().skip(r) {
                p.objective.add(0, r, col, v);
            }
        }
        let mut a = SparseBlockMatrix::new();
        for i in 0..3 {
            a.add(0, i, i, 1.0);
        }
        p.add_constraint(a, 1.0);
        let sol = solve(&p, &tight()).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        let cm = DMatrix::from_fn(3, 3, |r, col| c[r][col]);
        let lmax = cm.symmetric_eigen().eigenvalues.max();
        assert!((sol.primal_objective - lmax).abs() < 1e-6);
        assert!((sol.dual_objective - lmax).abs() < 1e-6);
        assert!(min_eigenvalue(&p.dual_slack(&sol.y)) > -1e-7);
    }

    #[test]
    fn duplicate_constraint_gives_identical_solution() {
        let mut p = SdpProblem::new(vec![2], Sense::Min);
        p.objective.add(0, 0, 0, 1.0);
        p.objective.add(0, 1, 1, 2.0);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 0, 0, 1.0);
        a.add(0, 1, 1, 1.0);
        p.add_constraint(a.clone(), 1.0);
        let base = solve(&p, &SolverOptions::default()).unwrap();
        p.add_constraint(a, 1.0);
        let dup = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(dup.status, SolverStatus::Optimal);
        assert_eq!(dup.presolve.dropped_dependent, vec![1]);
        assert_eq!(base.x, dup.x);
        assert_eq!(base.primal_objective, dup.primal_objective);
    }

    #[test]
    fn unbounded_problem_is_flagged() {
        // min -X11 s.t. X22 = 1 has no lower bound.
        let mut p = SdpProblem::new(vec![2], Sense::Min);
        p.objective.add(0, 0, 0, -1.0);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 1, 1, 1.0);
        p.add_constraint(a, 1.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_ne!(sol.status, SolverStatus::Optimal);
    }
}
