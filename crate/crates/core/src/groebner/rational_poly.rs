use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::tensor_poly::MultiIndex;

/// Multivariate polynomial with exact rational coefficients, terms ordered
/// by graded lex (the last entry is the leading term).
#[derive(Clone, PartialEq, Eq)]
pub struct RationalPolynomial {
    num_vars: usize,
    terms: BTreeMap<MultiIndex, BigRational>,
}

impl RationalPolynomial {
    pub fn zero(num_vars: usize) -> Self {
        RationalPolynomial {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(m: MultiIndex, c: BigRational) -> Self {
        let mut p = Self::zero(m.num_vars());
        p.add_term(m, c);
        p
    }

    pub fn from_integer_terms(num_vars: usize, terms: &[(Vec<u32>, i64)]) -> Self {
        let mut p = Self::zero(num_vars);
        for (e, c) in terms {
            assert_eq!(e.len(), num_vars);
            p.add_term(
                MultiIndex::new(e.clone()),
                BigRational::from_integer(BigInt::from(*c)),
            );
        }
        p
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &MultiIndex) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, m: MultiIndex, c: BigRational) {
        debug_assert_eq!(m.num_vars(), self.num_vars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn leading_term(&self) -> Option<(&MultiIndex, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_monomial(&self) -> Option<&MultiIndex> {
        self.terms.keys().next_back()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(MultiIndex::degree);
        match degs.next() {
            None => true,
            Some(first) => degs.all(|d| d == first),
        }
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading_term() {
            None => self.clone(),
            Some((_, lc)) => {
                let inv = lc.recip();
                self.scale(&inv)
            }
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero(self.num_vars);
        }
        RationalPolynomial {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    /// `self * c * x^m`.
    pub fn mul_term(&self, m: &MultiIndex, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.num_vars);
        }
        RationalPolynomial {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(t, tc)| (t.add(m), tc * c))
                .collect(),
        }
    }

    /// `self -= c * x^m * g`, in place.
    pub(crate) fn sub_scaled(&mut self, g: &RationalPolynomial, m: &MultiIndex, c: &BigRational) {
        for (t, tc) in &g.terms {
            self.add_term(t.add(m), -(tc * c));
        }
    }

    pub(crate) fn pop_leading(&mut self) -> Option<(MultiIndex, BigRational)> {
        self.terms.pop_last()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out
    }

    pub fn to_f64_terms(&self) -> Vec<(MultiIndex, f64)> {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(m, c)| (m.clone(), c.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// Adds a leading variable `x0` so every term reaches the total degree:
    /// `f~(x0, x) = x0^deg f(x / x0)`.
    pub fn homogenize(&self) -> Self {
        let deg = self.degree().unwrap_or(0);
        RationalPolynomial {
            num_vars: self.num_vars + 1,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.prepend(deg - m.degree()), c.clone()))
                .collect(),
        }
    }

    /// Sets the leading variable `x0` to one and removes it.
    pub fn dehomogenize(&self) -> Result<Self> {
        if !self.is_homogeneous() {
            return Err(Error::NotHomogeneous);
        }
        if self.num_vars == 0 {
            return Err(Error::InvalidArgument("no variable to dehomogenize".into()));
        }
        let mut out = Self::zero(self.num_vars - 1);
        for (m, c) in &self.terms {
            let (_, rest) = m.split_first();
            out.add_term(rest, c.clone());
        }
        Ok(out)
    }

    pub fn max_abs_coeff(&self) -> BigRational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .leading_term()
                .map(|(m, c)| m.degree() == 0 && c.is_one())
                .unwrap_or(false)
    }
}

impl fmt::Debug for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*{m}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn homogenize_sphere() {
        let f = RationalPolynomial::from_integer_terms(
            2,
            &[(vec![2, 0], 1), (vec![0, 2], 1), (vec![0, 0], -1)],
        );
        let h = f.homogenize();
        let want = RationalPolynomial::from_integer_terms(
            3,
            &[(vec![0, 2, 0], 1), (vec![0, 0, 2], 1), (vec![2, 0, 0], -1)],
        );
        assert_eq!(h, want);
        assert_eq!(h.dehomogenize().unwrap(), f);
    }

    #[test]
    fn homogeneous_input_only_gains_a_variable() {
        let f = RationalPolynomial::from_integer_terms(2, &[(vec![1, 1], 3), (vec![0, 2], -2)]);
        let h = f.homogenize();
        assert_eq!(h.num_vars(), 3);
        assert!(h.terms().all(|(m, _)| m.get(0) == 0));
        assert_eq!(h.dehomogenize().unwrap(), f);
    }

    #[test]
    fn dehomogenize_rejects_mixed_degrees() {
        let f = RationalPolynomial::from_integer_terms(2, &[(vec![1, 1], 1), (vec![0, 0], 1)]);
        assert!(matches!(f.dehomogenize(), Err(Error::NotHomogeneous)));
    }

    #[test]
    fn leading_term_is_grlex_max() {
        let f = RationalPolynomial::from_integer_terms(
            2,
            &[(vec![3, 0], 1), (vec![0, 4], 2), (vec![2, 2], 5)],
        );
        assert_eq!(f.leading_monomial().unwrap(), &MultiIndex::new(vec![2, 2]));
        let m = f.monic();
        assert_eq!(m.leading_term().unwrap().1, &BigRational::one());
        assert_eq!(m.coeff(&MultiIndex::new(vec![0, 4])), q(2, 5));
    }
}
