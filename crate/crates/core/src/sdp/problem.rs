use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// Symmetric block-diagonal matrix stored as upper-triangle entries
/// `(block, row, col) -> value` with `row <= col`. An off-diagonal entry
/// stands for both `(row, col)` and `(col, row)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseBlockMatrix {
    entries: BTreeMap<(usize, usize, usize), f64>,
}

impl SparseBlockMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `value` to entry `(row, col)` and, off the diagonal, to its mirror.
    pub fn add(&mut self, block: usize, row: usize, col: usize, value: f64) {
        if value == 0.0 {
            return;
        }
        let key = (block, row.min(col), row.max(col));
        let e = self.entries.entry(key).or_insert(0.0);
        *e += value;
        if *e == 0.0 {
            self.entries.remove(&key);
        }
    }

    pub fn get(&self, block: usize, row: usize, col: usize) -> f64 {
        self.entries
            .get(&(block, row.min(col), row.max(col)))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(b, r, c), &v)| (b, r, c, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.entries.values_mut() {
            *v *= s;
        }
    }

    /// Frobenius norm of the full symmetric matrix.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|(&(_, r, c), &v)| if r == c { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Trace inner product with dense symmetric blocks.
    pub fn inner(&self, x: &[DMatrix<f64>]) -> f64 {
        self.entries()
            .map(|(b, r, c, v)| {
                if r == c {
                    v * x[b][(r, r)]
                } else {
                    v * (x[b][(r, c)] + x[b][(c, r)])
                }
            })
            .sum()
    }

    pub fn to_dense(&self, block_sizes: &[usize]) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> =
            block_sizes.iter().map(|&s| DMatrix::zeros(s, s)).collect();
        for (b, r, c, v) in self.entries() {
            out[b][(r, c)] = v;
            out[b][(c, r)] = v;
        }
        out
    }

    /// `acc += s * self`.
    pub fn add_to_dense(&self, acc: &mut [DMatrix<f64>], s: f64) {
        for (b, r, c, v) in self.entries() {
            acc[b][(r, c)] += s * v;
            if r != c {
                acc[b][(c, r)] += s * v;
            }
        }
    }
}

/// Semidefinite program over block-diagonal symmetric `X`:
/// optimize `<C, X>` subject to `<A_i, X> = b_i` and `X ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub block_sizes: Vec<usize>,
    pub objective: SparseBlockMatrix,
    pub constraints: Vec<SparseBlockMatrix>,
    pub rhs: Vec<f64>,
    pub sense: Sense,
}

impl SdpProblem {
    pub fn new(block_sizes: Vec<usize>, sense: Sense) -> Self {
        SdpProblem {
            block_sizes,
            objective: SparseBlockMatrix::new(),
            constraints: Vec::new(),
            rhs: Vec::new(),
            sense,
        }
    }

    pub fn add_constraint(&mut self, a: SparseBlockMatrix, b: f64) -> usize {
        self.constraints.push(a);
        self.rhs.push(b);
        self.constraints.len() - 1
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn total_side(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(Error::InvalidArgument(
                "block sizes must be positive".into(),
            ));
        }
        if self.rhs.len() != self.constraints.len() {
            return Err(Error::DimensionMismatch {
                expected: self.constraints.len(),
                found: self.rhs.len(),
            });
        }
        let check = |m: &SparseBlockMatrix, what: &str| -> Result<()> {
            for (b, r, c, v) in m.entries() {
                if b >= self.block_sizes.len() || c >= self.block_sizes[b] {
                    return Err(Error::InvalidArgument(format!(
                        "{what}: entry ({b},{r},{c}) outside block structure"
                    )));
                }
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!("{what}: non-finite entry")));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (i, a) in self.constraints.iter().enumerate() {
            check(a, &format!("constraint {i}"))?;
        }
        if self.rhs.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("non-finite right-hand side".into()));
        }
        Ok(())
    }

    /// `A(X)`, the vector of constraint values.
    pub fn apply(&self, x: &[DMatrix<f64>]) -> Vec<f64> {
        self.constraints.iter().map(|a| a.inner(x)).collect()
    }

    /// `Σ y_i A_i` as dense blocks.
    pub fn adjoint(&self, y: &[f64]) -> Vec<DMatrix<f64>> {
        let mut out = self.zero_blocks();
        for (a, &yi) in self.constraints.iter().zip(y) {
            a.add_to_dense(&mut out, yi);
        }
        out
    }

    pub fn zero_blocks(&self) -> Vec<DMatrix<f64>> {
        self.block_sizes
            .iter()
            .map(|&s| DMatrix::zeros(s, s))
            .collect()
    }

    /// Dual slack in the convention of the problem's sense:
    /// `C - Σ y_i A_i` for `Min`, `Σ y_i A_i - C` for `Max`.
    pub fn dual_slack(&self, y: &[f64]) -> Vec<DMatrix<f64>> {
        let mut s = self.adjoint(y);
        match self.sense {
            Sense::Min => {
                for m in s.iter_mut() {
                    *m *= -1.0;
                }
                self.objective.add_to_dense(&mut s, 1.0);
            }
            Sense::Max => self.objective.add_to_dense(&mut s, -1.0),
        }
        s
    }
}

pub(crate) fn block_inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

pub fn min_eigenvalue(blocks: &[DMatrix<f64>]) -> f64 {
    blocks
        .iter()
        .map(|m| {
            m.clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |a, &v| a.min(v))
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_entries_are_symmetric() {
        let mut a = SparseBlockMatrix::new();
        a.add(0, 1, 0, 2.0);
        a.add(0, 0, 1, 1.0);
        assert_eq!(a.get(0, 0, 1), 3.0);
        assert_eq!(a.nnz(), 1);
        let d = a.to_dense(&[2]);
        assert_eq!(d[0], DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 0.0]));
        assert!((a.frobenius_norm() - (18.0f64).sqrt()).abs() < 1e-15);
        assert_eq!(a.inner(&d), 18.0);
        a.add(0, 0, 1, -3.0);
        assert!(a.is_zero());
    }

    #[test]
    fn validation_catches_out_of_range() {
        let mut p = SdpProblem::new(vec![2], Sense::Min);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 0, 2, 1.0);
        p.add_constraint(a, 1.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn dual_slack_conventions() {
        let mut p = SdpProblem::new(vec![1], Sense::Min);
        p.objective.add(0, 0, 0, 3.0);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 0, 0, 1.0);
        p.add_constraint(a, 1.0);
        assert_eq!(p.dual_slack(&[1.0])[0][(0, 0)], 2.0);
        p.sense = Sense::Max;
        assert_eq!(p.dual_slack(&[5.0])[0][(0, 0)], 2.0);
    }
}
