use serde::Serialize;

use super::problem::{SdpProblem, SparseBlockMatrix};
use crate::error::{Error, Result};

/// Relative norm below which a constraint counts as a combination of the
/// ones kept before it.
const DEPENDENCE_TOL: f64 = 1e-9;
const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Default, Serialize)]
pub struct PresolveReport {
    pub dropped_zero: Vec<usize>,
    pub dropped_dependent: Vec<usize>,
    pub objective_scale: f64,
}

/// Reduced, scaled problem plus what is needed to map its solution back.
#[derive(Clone, Debug)]
pub struct Presolved {
    pub problem: SdpProblem,
    /// Original index of each kept constraint.
    pub kept: Vec<usize>,
    /// Norm each kept constraint was divided by.
    pub row_scale: Vec<f64>,
    pub objective_scale: f64,
    pub report: PresolveReport,
    original_count: usize,
}

impl Presolved {
    /// Dual multipliers of the original problem; dropped rows get zero.
    pub fn recover_y(&self, y_reduced: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.original_count];
        for (k, &i) in self.kept.iter().enumerate() {
            y[i] = y_reduced[k] * self.objective_scale / self.row_scale[k];
        }
        y
    }
}

/// svec coordinates, so the Euclidean product equals the trace product.
fn svec(a: &SparseBlockMatrix, offsets: &[usize], sizes: &[usize], len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    for (b, r, c, val) in a.entries() {
        // Packed upper triangle, column by column.
        let idx = offsets[b] + c * (c + 1) / 2 + r;
        debug_assert!(c < sizes[b]);
        v[idx] = if r == c {
            val
        } else {
            std::f64::consts::SQRT_2 * val
        };
    }
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Drops zero and linearly dependent constraints, then scales every kept
/// constraint and the objective to unit Frobenius norm.
pub fn presolve(problem: &SdpProblem) -> Result<Presolved> {
    problem.validate()?;
    let sizes = &problem.block_sizes;
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut len = 0;
    for &s in sizes {
        offsets.push(len);
        len += s * (s + 1) / 2;
    }

    let mut report = PresolveReport::default();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut basis_rhs: Vec<f64> = Vec::new();
    let mut kept = Vec::new();
    let mut row_scale = Vec::new();

    for (i, (a, &b)) in problem.constraints.iter().zip(&problem.rhs).enumerate() {
        let norm = a.frobenius_norm();
        if norm == 0.0 {
            if b.abs() > CONSISTENCY_TOL {
                return Err(Error::InconsistentConstraints(format!(
                    "constraint {i} has zero matrix but right-hand side {b}"
                )));
            }
            report.dropped_zero.push(i);
            continue;
        }
        let mut v = svec(a, &offsets, sizes, len);
        v.iter_mut().for_each(|x| *x /= norm);
        let mut rhs = b / norm;
        // Modified Gram-Schmidt, run twice for stability.
        for _ in 0..2 {
            for (q, &qb) in basis.iter().zip(&basis_rhs) {
                let p = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
                rhs -= p * qb;
            }
        }
        let resid = dot(&v, &v).sqrt();
        if resid <= DEPENDENCE_TOL {
            if rhs.abs() > CONSISTENCY_TOL * (1.0 + (b / norm).abs()) {
                return Err(Error::InconsistentConstraints(format!(
                    "constraint {i} is a combination of earlier ones with a different right-hand side (mismatch {:.3e})",
                    rhs * norm
                )));
            }
            report.dropped_dependent.push(i);
            continue;
        }
        v.iter_mut().for_each(|x| *x /= resid);
        basis.push(v);
        basis_rhs.push(rhs / resid);
        kept.push(i);
        row_scale.push(norm);
    }

    let c_norm = problem.objective.frobenius_norm();
    let objective_scale = if c_norm > 0.0 { c_norm } else { 1.0 };
    report.objective_scale = objective_scale;

    let mut reduced = SdpProblem::new(sizes.clone(), problem.sense);
    reduced.objective = problem.objective.clone();
    reduced.objective.scale(1.0 / objective_scale);
    for (&i, &s) in kept.iter().zip(&row_scale) {
        let mut a = problem.constraints[i].clone();
        a.scale(1.0 / s);
        reduced.add_constraint(a, problem.rhs[i] / s);
    }

    Ok(Presolved {
        problem: reduced,
        kept,
        row_scale,
        objective_scale,
        report,
        original_count: problem.num_constraints(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::problem::Sense;

    fn diag(v: &[f64]) -> SparseBlockMatrix {
        let mut a = SparseBlockMatrix::new();
        for (i, &x) in v.iter().enumerate() {
            a.add(0, i, i, x);
        }
        a
    }

    #[test]
    fn duplicate_and_zero_rows_are_dropped() {
        let mut p = SdpProblem::new(vec![2], Sense::Min);
        p.add_constraint(diag(&[1.0, 0.0]), 1.0);
        p.add_constraint(diag(&[2.0, 0.0]), 2.0);
        p.add_constraint(SparseBlockMatrix::new(), 0.0);
        p.add_constraint(diag(&[1.0, 1.0]), 3.0);
        let pre = presolve(&p).unwrap();
        assert_eq!(pre.kept, vec![0, 3]);
        assert_eq!(pre.report.dropped_dependent, vec![1]);
        assert_eq!(pre.report.dropped_zero, vec![2]);
        assert!((pre.problem.rhs[1] - 3.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_row_with_nonzero_rhs_is_inconsistent() {
        let mut p = SdpProblem::new(vec![1], Sense::Min);
        p.add_constraint(SparseBlockMatrix::new(), 1.0);
        assert!(matches!(
            presolve(&p),
            Err(Error::InconsistentConstraints(_))
        ));
    }

    #[test]
    fn contradictory_combination_is_inconsistent() {
        let mut p = SdpProblem::new(vec![2], Sense::Min);
        p.add_constraint(diag(&[1.0, 0.0]), 1.0);
        p.add_constraint(diag(&[0.0, 1.0]), 1.0);
        p.add_constraint(diag(&[1.0, 1.0]), 3.0);
        assert!(matches!(
            presolve(&p),
            Err(Error::InconsistentConstraints(_))
        ));
    }

    #[test]
    fn off_diagonal_weight_matches_trace_product() {
        let mut p = SdpProblem::new(vec![2], Sense::Min);
        let mut off = SparseBlockMatrix::new();
        off.add(0, 0, 1, 1.0);
        p.add_constraint(off.clone(), 1.0);
        let mut twice = off.clone();
        twice.scale(-3.0);
        p.add_constraint(twice, -3.0);
        let pre = presolve(&p).unwrap();
        assert_eq!(pre.kept, vec![0]);
        let y = pre.recover_y(&[2.0]);
        assert_eq!(y.len(), 2);
        assert_eq!(y[1], 0.0);
        assert!((y[0] - 2.0 / 2f64.sqrt()).abs() < 1e-15);
    }
}
