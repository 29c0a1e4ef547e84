//! JSON problem and state files.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor_poly::{
    poly_to_tensor_with_degree, realify, ComplexHermitianOperator, SparsePolynomial,
    SymmetricTensor, TermJson,
};

/// On-disk problem description.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProblemFile {
    /// Operator on `(C^n)^{⊗d}`; entries `[row, col, re, im]`, 0-based.
    ComplexHermitian {
        n: usize,
        d: usize,
        entries: Vec<[f64; 4]>,
    },
    /// The objective form itself, homogeneous of the stated even degree.
    RealPolynomial {
        vars: usize,
        degree: u32,
        terms: Vec<TermJson>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    Complex(ComplexHermitianOperator),
    Real { poly: SparsePolynomial, degree: u32 },
}

impl Problem {
    /// The real symmetric tensor the hierarchy maximizes over the sphere.
    pub fn tensor(&self) -> Result<SymmetricTensor> {
        match self {
            Problem::Complex(op) => Ok(realify(op)),
            Problem::Real { poly, degree } => poly_to_tensor_with_degree(poly, degree / 2),
        }
    }

    pub fn as_operator(&self) -> Option<&ComplexHermitianOperator> {
        match self {
            Problem::Complex(op) => Some(op),
            Problem::Real { .. } => None,
        }
    }
}

fn index_to_usize(v: f64, side: usize, what: &str) -> Result<usize> {
    if v.fract() != 0.0 || v < 0.0 || v >= side as f64 {
        return Err(Error::Parse(format!(
            "{what} index {v} is not in 0..{side}"
        )));
    }
    Ok(v as usize)
}

/// Builds the operator; a missing lower triangle is filled by conjugation.
pub fn operator_from_entries(
    n: usize,
    d: usize,
    entries: &[[f64; 4]],
) -> Result<ComplexHermitianOperator> {
    let side = n
        .checked_pow(d as u32)
        .filter(|_| n > 0 && d > 0)
        .ok_or_else(|| Error::Parse(format!("invalid operator shape n={n}, d={d}")))?;
    let mut m = DMatrix::<Complex64>::zeros(side, side);
    let mut seen = vec![false; side * side];
    for e in entries {
        let r = index_to_usize(e[0], side, "row")?;
        let c = index_to_usize(e[1], side, "column")?;
        if !e[2].is_finite() || !e[3].is_finite() {
            return Err(Error::Parse(format!("non-finite entry at ({r}, {c})")));
        }
        if seen[r * side + c] {
            return Err(Error::Parse(format!("entry ({r}, {c}) given twice")));
        }
        seen[r * side + c] = true;
        m[(r, c)] = Complex64::new(e[2], e[3]);
    }
    for r in 0..side {
        for c in 0..r {
            match (seen[r * side + c], seen[c * side + r]) {
                (false, true) => m[(r, c)] = m[(c, r)].conj(),
                (true, false) => m[(c, r)] = m[(r, c)].conj(),
                _ => {}
            }
        }
    }
    ComplexHermitianOperator::new(n, d, m)
}

/// Upper-triangle nonzero entries `[row, col, re, im]`.
pub fn operator_entries(op: &ComplexHermitianOperator) -> Vec<[f64; 4]> {
    let m = op.entries();
    let mut out = Vec::new();
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            let z = m[(r, c)];
            if z.re != 0.0 || z.im != 0.0 {
                out.push([r as f64, c as f64, z.re, z.im]);
            }
        }
    }
    out
}

pub fn operator_to_file(op: &ComplexHermitianOperator) -> ProblemFile {
    ProblemFile::ComplexHermitian {
        n: op.local_dim(),
        d: op.copies(),
        entries: operator_entries(op),
    }
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<Problem> {
        match self {
            ProblemFile::ComplexHermitian { n, d, entries } => {
                Ok(Problem::Complex(operator_from_entries(n, d, &entries)?))
            }
            ProblemFile::RealPolynomial {
                vars,
                degree,
                terms,
            } => {
                if degree % 2 != 0 {
                    return Err(Error::OddDegree(degree));
                }
                if let Some(t) = terms.iter().find(|t| t.exponents.len() != vars) {
                    return Err(Error::Parse(format!(
                        "term has {} exponents, expected {vars}",
                        t.exponents.len()
                    )));
                }
                let poly = SparsePolynomial::from_json_terms(vars, &terms)?;
                if poly.terms().any(|(m, _)| m.degree() != degree) {
                    return Err(Error::NotHomogeneous);
                }
                Ok(Problem::Real { poly, degree })
            }
        }
    }
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let file: ProblemFile = serde_json::from_str(text)?;
    file.into_problem()
}

pub fn read_problem_file(path: &Path) -> Result<Problem> {
    parse_problem(&std::fs::read_to_string(path)?)
}

/// Density operator file: the complex Hermitian format with unit trace.
pub fn parse_state(text: &str) -> Result<ComplexHermitianOperator> {
    let op = match parse_problem(text)? {
        Problem::Complex(op) => op,
        Problem::Real { .. } => {
            return Err(Error::Parse(
                "a state must use the complex_hermitian format".into(),
            ))
        }
    };
    let tr = op.trace();
    if (tr - 1.0).abs() > 1e-8 {
        return Err(Error::Parse(format!("state trace is {tr}, expected 1")));
    }
    Ok(op)
}

pub fn read_state_file(path: &Path) -> Result<ComplexHermitianOperator> {
    parse_state(&std::fs::read_to_string(path)?)
}
