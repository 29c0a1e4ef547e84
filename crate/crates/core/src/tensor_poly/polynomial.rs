use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::multi_index::MultiIndex;
use crate::error::{Error, Result};

/// Multivariate real polynomial stored as a map from exponent vector to
/// coefficient. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePolynomial {
    num_vars: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

/// One `{"exponents": [...], "coeff": c}` entry of the JSON term format.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

impl SparsePolynomial {
    pub fn zero(num_vars: usize) -> Self {
        SparsePolynomial {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: f64) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(MultiIndex::zero(num_vars), c);
        p
    }

    pub fn monomial(exponents: MultiIndex, c: f64) -> Self {
        let mut p = Self::zero(exponents.num_vars());
        p.add_term(exponents, c);
        p
    }

    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut p = Self::zero(num_vars);
        for (m, c) in terms {
            if m.num_vars() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    found: m.num_vars(),
                });
            }
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient on {m}"
                )));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    /// `(x1^2 + ... + xm^2)^k`.
    pub fn norm_squared_power(num_vars: usize, k: u32) -> Self {
        let mut sq = Self::zero(num_vars);
        for i in 0..num_vars {
            sq.add_term(MultiIndex::var(num_vars, i, 2), 1.0);
        }
        sq.pow(k)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &MultiIndex) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, m: MultiIndex, c: f64) {
        debug_assert_eq!(m.num_vars(), self.num_vars);
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    /// `Some(k)` if every term has total degree `k`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(MultiIndex::degree);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.homogeneous_degree().is_some()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: x.len(),
            });
        }
        Ok(self.terms.iter().map(|(m, c)| c * m.eval(x)).sum())
    }

    /// Formal partial derivative with respect to variable `var` (0-based).
    pub fn partial_derivative(&self, var: usize) -> SparsePolynomial {
        assert!(var < self.num_vars, "variable index out of range");
        let mut out = Self::zero(self.num_vars);
        for (m, c) in &self.terms {
            let e = m.get(var);
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.exponents_mut()[var] = e - 1;
            out.add_term(dm, c * e as f64);
        }
        out
    }

    pub fn gradient(&self) -> Vec<SparsePolynomial> {
        (0..self.num_vars)
            .map(|i| self.partial_derivative(i))
            .collect()
    }

    pub fn scale(&self, s: f64) -> SparsePolynomial {
        let mut out = Self::zero(self.num_vars);
        if s != 0.0 {
            for (m, c) in &self.terms {
                out.add_term(m.clone(), c * s);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> SparsePolynomial {
        let mut acc = Self::constant(self.num_vars, 1.0);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplies by the monomial `x^m` with coefficient `c`.
    pub fn mul_monomial(&self, m: &MultiIndex, c: f64) -> SparsePolynomial {
        let mut out = Self::zero(self.num_vars);
        if c != 0.0 {
            for (t, tc) in &self.terms {
                out.add_term(t.add(m), tc * c);
            }
        }
        out
    }

    /// Removes coefficients with absolute value at most `tol`.
    pub fn prune(&self, tol: f64) -> SparsePolynomial {
        SparsePolynomial {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    /// Maximum absolute coefficient of `self - other`.
    pub fn max_coeff_diff(&self, other: &SparsePolynomial) -> f64 {
        (self - other).max_abs_coeff()
    }

    pub fn to_json_terms(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .rev()
            .map(|(m, c)| TermJson {
                exponents: m.exponents().to_vec(),
                coeff: *c,
            })
            .collect()
    }

    pub fn from_json_terms(num_vars: usize, terms: &[TermJson]) -> Result<Self> {
        Self::from_terms(
            num_vars,
            terms
                .iter()
                .map(|t| (MultiIndex::new(t.exponents.clone()), t.coeff)),
        )
    }
}

impl Add for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn add(self, rhs: Self) -> SparsePolynomial {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Sub for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn sub(self, rhs: Self) -> SparsePolynomial {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -*c);
        }
        out
    }
}

impl Mul for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn mul(self, rhs: Self) -> SparsePolynomial {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = SparsePolynomial::zero(self.num_vars);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out
    }
}

impl Neg for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn neg(self) -> SparsePolynomial {
        self.scale(-1.0)
    }
}
