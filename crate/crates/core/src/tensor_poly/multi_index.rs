use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector of a monomial, one entry per variable.
///
/// Ordering is graded lexicographic: total degree first, then the first
/// variable is the most significant. `x1 > x2 > ... > xm` and every
/// monomial of higher degree is larger.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(num_vars: usize) -> Self {
        MultiIndex(vec![0; num_vars])
    }

    /// Exponent vector of the single variable `var` raised to `power`.
    pub fn var(num_vars: usize, var: usize, power: u32) -> Self {
        let mut e = vec![0; num_vars];
        e[var] = power;
        MultiIndex(e)
    }

    /// Monomial of a sorted (or unsorted) index multiset, e.g. `[0, 0, 2]` is `x1^2 x3`.
    pub fn from_indices(num_vars: usize, indices: &[usize]) -> Self {
        let mut e = vec![0; num_vars];
        for &i in indices {
            e[i] += 1;
        }
        MultiIndex(e)
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, var: usize) -> u32 {
        self.0[var]
    }

    /// The multiset of variable indices this monomial represents, sorted.
    pub fn to_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree() as usize);
        for (i, &e) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat_n(i, e as usize));
        }
        out
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.0.len(), other.0.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.0.len(), other.0.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn lcm(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    pub fn is_coprime(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// If the monomial is a pure power `x_i^k` with `k >= 1`, returns `i`.
    pub fn pure_power_var(&self) -> Option<usize> {
        let mut found = None;
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }

    /// Multinomial coefficient `deg! / prod(e_i!)`: the number of distinct
    /// orderings of the index multiset.
    pub fn multinomial(&self) -> f64 {
        // Built as a product of binomials to stay exact for moderate degrees.
        let mut total = 0u32;
        let mut acc = 1.0f64;
        for &e in &self.0 {
            for j in 1..=e {
                total += 1;
                acc = acc * total as f64 / j as f64;
            }
        }
        acc
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }

    /// Prepends an extra variable with exponent `e0` (used for homogenization).
    pub fn prepend(&self, e0: u32) -> MultiIndex {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(e0);
        v.extend_from_slice(&self.0);
        MultiIndex(v)
    }

    /// Splits off the first variable, returning its exponent and the rest.
    pub fn split_first(&self) -> (u32, MultiIndex) {
        (self.0[0], MultiIndex(self.0[1..].to_vec()))
    }

    pub(crate) fn exponents_mut(&mut self) -> &mut [u32] {
        &mut self.0
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// Number of monomials of total degree exactly `degree` in `num_vars`
/// variables, `C(num_vars + degree - 1, degree)`.
pub fn monomial_count(num_vars: usize, degree: usize) -> Result<u64> {
    if num_vars == 0 {
        return Err(Error::InvalidArgument(
            "monomial_count needs at least one variable".into(),
        ));
    }
    let total = (num_vars - 1 + degree) as u128;
    let k = (degree.min(num_vars - 1)) as u128;
    // C(total, k) built incrementally; every partial product is itself a binomial.
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc
            .checked_mul(total - k + i)
            .ok_or(Error::Overflow("monomial_count"))?
            / i;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("monomial_count"))
}

/// All monomials of total degree `degree` in `num_vars` variables, listed in
/// descending graded-lex order (`x1^degree` first).
pub fn monomials_of_degree(num_vars: usize, degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; num_vars];
    fill(&mut out, &mut current, 0, degree);
    out
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut [u32], pos: usize, remaining: u32) {
    let n = current.len();
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_count_small_cases() {
        assert_eq!(monomial_count(2, 2).unwrap(), 3);
        for d in 0..20 {
            assert_eq!(monomial_count(1, d).unwrap(), 1);
        }
        assert_eq!(monomial_count(4, 4).unwrap(), 35);
        assert_eq!(monomial_count(4, 0).unwrap(), 1);
    }

    #[test]
    fn monomial_count_matches_enumeration() {
        for m in 1..6 {
            for d in 0..7 {
                let listed = monomials_of_degree(m, d).len() as u64;
                assert_eq!(
                    monomial_count(m, d as usize).unwrap(),
                    listed,
                    "m={m} d={d}"
                );
            }
        }
    }

    #[test]
    fn monomial_count_reports_overflow() {
        assert!(matches!(monomial_count(200, 200), Err(Error::Overflow(_))));
        assert!(monomial_count(0, 3).is_err());
    }

    #[test]
    fn enumeration_is_descending_grlex() {
        let ms = monomials_of_degree(3, 2);
        assert_eq!(ms[0], MultiIndex::new(vec![2, 0, 0]));
        assert_eq!(ms.last().unwrap(), &MultiIndex::new(vec![0, 0, 2]));
        for w in ms.windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn multinomial_counts_orderings() {
        assert_eq!(MultiIndex::new(vec![1, 1]).multinomial(), 2.0);
        assert_eq!(MultiIndex::new(vec![2, 1, 1]).multinomial(), 12.0);
        assert_eq!(MultiIndex::new(vec![4]).multinomial(), 1.0);
    }

    #[test]
    fn grlex_order() {
        let a = MultiIndex::new(vec![0, 3]);
        let b = MultiIndex::new(vec![2, 0]);
        assert!(a > b);
        assert!(MultiIndex::new(vec![1, 1]) > MultiIndex::new(vec![0, 2]));
    }
}
