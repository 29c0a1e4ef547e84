use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::rational_poly::RationalPolynomial;
use crate::error::{Error, Result};
use crate::tensor_poly::MultiIndex;

/// Default hard cap on S-polynomial degrees.
pub const DEFAULT_DEGREE_CAP: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonomialOrder {
    /// Total degree first, ties broken lexicographically with `x1 > x2 > ...`.
    GradedLex,
}

/// Reduced Gröbner basis: monic elements, no leading monomial divides
/// another element's leading monomial, and every non-leading term is
/// irreducible.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    pub ordering: MonomialOrder,
    pub elements: Vec<RationalPolynomial>,
    pub max_degree: u32,
}

impl GroebnerBasis {
    pub fn num_vars(&self) -> usize {
        self.elements.first().map(|g| g.num_vars()).unwrap_or(0)
    }

    pub fn leading_monomials(&self) -> Vec<MultiIndex> {
        self.elements
            .iter()
            .filter_map(|g| g.leading_monomial().cloned())
            .collect()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.elements.iter().filter_map(|g| g.degree()).collect()
    }

    /// Whether the ideal is the whole ring.
    pub fn is_unit_ideal(&self) -> bool {
        self.elements.iter().any(|g| g.degree() == Some(0))
    }

    /// `f mod G`, the normal form of `f`.
    pub fn normal_form(&self, f: &RationalPolynomial) -> RationalPolynomial {
        normal_form(f, &self.elements)
    }

    pub fn contains(&self, f: &RationalPolynomial) -> bool {
        self.normal_form(f).is_zero()
    }

    /// Checks that every S-polynomial of a basis pair reduces to zero.
    pub fn s_pairs_reduce_to_zero(&self) -> bool {
        let g = &self.elements;
        for i in 0..g.len() {
            for j in (i + 1)..g.len() {
                if !normal_form(&s_polynomial(&g[i], &g[j]), g).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Checks the reducedness invariant.
    pub fn is_reduced(&self) -> bool {
        let lms = self.leading_monomials();
        for (i, g) in self.elements.iter().enumerate() {
            if g.leading_term().map(|(_, c)| !c.is_one()).unwrap_or(true) {
                return false;
            }
            for (j, lm) in lms.iter().enumerate() {
                if i != j && g.terms().any(|(t, _)| lm.divides(t)) {
                    return false;
                }
            }
        }
        true
    }
}

/// S-polynomial `(L/LT(f)) f - (L/LT(g)) g` with `L = lcm(LM(f), LM(g))`.
pub fn s_polynomial(f: &RationalPolynomial, g: &RationalPolynomial) -> RationalPolynomial {
    let (mf, cf) = f.leading_term().expect("nonzero");
    let (mg, cg) = g.leading_term().expect("nonzero");
    let l = mf.lcm(mg);
    let a = f.mul_term(&l.checked_sub(mf).unwrap(), &cf.recip());
    let b = g.mul_term(&l.checked_sub(mg).unwrap(), &cg.recip());
    a.sub(&b)
}

fn normal_form(f: &RationalPolynomial, basis: &[RationalPolynomial]) -> RationalPolynomial {
    let mut p = f.clone();
    let mut rem = RationalPolynomial::zero(f.num_vars());
    while let Some((lm, lc)) = p.pop_leading() {
        let divisor = basis.iter().find(|g| {
            g.leading_monomial()
                .map(|m| m.divides(&lm))
                .unwrap_or(false)
        });
        match divisor {
            Some(g) => {
                let (gm, gc) = g.leading_term().unwrap();
                let shift = lm.checked_sub(gm).unwrap();
                let c = &lc / gc;
                // Leading term already removed; subtract the tail only.
                let mut tail = g.clone();
                tail.pop_leading();
                p.sub_scaled(&tail, &shift, &c);
            }
            None => rem.add_term(lm, lc),
        }
    }
    rem
}

/// Multivariate division `f = Σ a_i g_i + u`. Quotients are returned in
/// basis order; no term of `u` is divisible by any leading monomial.
pub fn reduce(
    f: &RationalPolynomial,
    basis: &GroebnerBasis,
) -> (Vec<RationalPolynomial>, RationalPolynomial) {
    let n = f.num_vars();
    let g = &basis.elements;
    let mut quotients = vec![RationalPolynomial::zero(n); g.len()];
    let mut p = f.clone();
    let mut rem = RationalPolynomial::zero(n);
    while let Some((lm, lc)) = p.pop_leading() {
        let hit = g.iter().position(|gi| {
            gi.leading_monomial()
                .map(|m| m.divides(&lm))
                .unwrap_or(false)
        });
        match hit {
            Some(i) => {
                let (gm, gc) = g[i].leading_term().unwrap();
                let shift = lm.checked_sub(gm).unwrap();
                let c = &lc / gc;
                let mut tail = g[i].clone();
                tail.pop_leading();
                p.sub_scaled(&tail, &shift, &c);
                quotients[i].add_term(shift, c);
            }
            None => rem.add_term(lm, lc),
        }
    }
    (quotients, rem)
}

struct PairQueue {
    pending: BTreeSet<(u32, MultiIndex, usize, usize)>,
    keys: BTreeSet<(usize, usize)>,
}

impl PairQueue {
    fn push(&mut self, i: usize, j: usize, lcm: MultiIndex) {
        let (i, j) = (i.min(j), i.max(j));
        self.keys.insert((i, j));
        self.pending.insert((lcm.degree(), lcm, i, j));
    }

    /// Normal strategy: smallest lcm degree first, then smallest lcm.
    fn pop(&mut self) -> Option<(MultiIndex, usize, usize)> {
        let (_, l, i, j) = self.pending.pop_first()?;
        self.keys.remove(&(i, j));
        Some((l, i, j))
    }

    fn contains(&self, i: usize, j: usize) -> bool {
        self.keys.contains(&(i.min(j), i.max(j)))
    }
}

/// Buchberger's algorithm with the normal selection strategy and both of
/// Buchberger's criteria (coprime leading monomials, chain criterion).
///
/// Fails with [`Error::CapExceeded`] as soon as a pair whose lcm exceeds
/// `degree_cap` would have to be reduced.
pub fn buchberger(generators: &[RationalPolynomial], degree_cap: u32) -> Result<GroebnerBasis> {
    let gens: Vec<RationalPolynomial> = generators
        .iter()
        .filter(|g| !g.is_zero())
        .map(RationalPolynomial::monic)
        .collect();
    if gens.is_empty() {
        return Err(Error::InvalidArgument("no nonzero generators".into()));
    }
    let n = gens[0].num_vars();
    if gens.iter().any(|g| g.num_vars() != n) {
        return Err(Error::InvalidArgument(
            "generators disagree on variable count".into(),
        ));
    }
    if let Some(d) = gens.iter().filter_map(|g| g.degree()).max() {
        if d > degree_cap {
            return Err(Error::CapExceeded {
                degree: d,
                cap: degree_cap,
            });
        }
    }

    let mut basis: Vec<RationalPolynomial> = Vec::new();
    let mut queue = PairQueue {
        pending: BTreeSet::new(),
        keys: BTreeSet::new(),
    };
    let add =
        |basis: &mut Vec<RationalPolynomial>, queue: &mut PairQueue, g: RationalPolynomial| {
            let new_lm = g.leading_monomial().unwrap().clone();
            let k = basis.len();
            for (i, b) in basis.iter().enumerate() {
                let lcm = b.leading_monomial().unwrap().lcm(&new_lm);
                queue.push(i, k, lcm);
            }
            basis.push(g);
        };

    for g in gens {
        let r = normal_form(&g, &basis);
        if !r.is_zero() {
            add(&mut basis, &mut queue, r.monic());
        }
    }

    while let Some((lcm, i, j)) = queue.pop() {
        let lm_i = basis[i].leading_monomial().unwrap();
        let lm_j = basis[j].leading_monomial().unwrap();
        if lm_i.is_coprime(lm_j) {
            continue;
        }
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && basis[k].leading_monomial().unwrap().divides(&lcm)
                && !queue.contains(i, k)
                && !queue.contains(j, k)
        });
        if chain {
            continue;
        }
        if lcm.degree() > degree_cap {
            return Err(Error::CapExceeded {
                degree: lcm.degree(),
                cap: degree_cap,
            });
        }
        let s = s_polynomial(&basis[i], &basis[j]);
        let r = normal_form(&s, &basis);
        if !r.is_zero() {
            add(&mut basis, &mut queue, r.monic());
        }
    }

    Ok(reduce_basis(basis))
}

/// Turns any Gröbner basis into the unique reduced one.
fn reduce_basis(basis: Vec<RationalPolynomial>) -> GroebnerBasis {
    // Drop elements whose leading monomial is divisible by another's.
    let mut minimal: Vec<RationalPolynomial> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let lm = g.leading_monomial().unwrap();
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            let hm = h.leading_monomial().unwrap();
            j != i && hm.divides(lm) && (hm != lm || j < i)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut reduced = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<RationalPolynomial> = minimal
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| g.clone())
            .collect();
        let mut g = minimal[i].clone();
        let (lm, lc) = g.pop_leading().unwrap();
        let mut tail = normal_form(&g, &others);
        tail.add_term(lm, lc);
        reduced.push(tail.monic());
    }
    reduced.sort_by(|a, b| a.leading_monomial().cmp(&b.leading_monomial()));
    let max_degree = reduced.iter().filter_map(|g| g.degree()).max().unwrap_or(0);
    GroebnerBasis {
        ordering: MonomialOrder::GradedLex,
        elements: reduced,
        max_degree,
    }
}

/// True iff every variable has a pure power among the leading monomials
/// (the variety is then a finite point set). The unit ideal counts as
/// zero-dimensional.
pub fn is_zero_dimensional(basis: &GroebnerBasis) -> bool {
    if basis.is_unit_ideal() {
        return true;
    }
    let n = basis.num_vars();
    let mut covered = vec![false; n];
    for lm in basis.leading_monomials() {
        if let Some(v) = lm.pure_power_var() {
            covered[v] = true;
        }
    }
    covered.into_iter().all(|c| c)
}

/// Krull dimension of the ideal, read off the leading-monomial ideal as the
/// largest set of variables no leading monomial is supported on. `None` for
/// the unit ideal.
pub fn ideal_dimension(basis: &GroebnerBasis) -> Option<usize> {
    if basis.is_unit_ideal() {
        return None;
    }
    let n = basis.num_vars();
    assert!(
        n <= 20,
        "dimension search is exponential in the variable count"
    );
    let supports: Vec<u32> = basis
        .leading_monomials()
        .iter()
        .map(|m| {
            m.exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .fold(0u32, |acc, (i, _)| acc | (1 << i))
        })
        .collect();
    (0u32..(1 << n))
        .filter(|set| supports.iter().all(|s| s & !set != 0))
        .map(|set| set.count_ones() as usize)
        .max()
}

/// Degree bound `2 (d^{n-r} / 2 + d)^{2^r}` for a Gröbner basis of an ideal
/// of dimension `r` generated in degree `d` over `n` variables. Exact; the
/// value is rational when `d` is odd.
pub fn degree_bound_report(n: u32, d: u32, r: u32) -> BigRational {
    assert!(n >= 1 && d >= 1, "n and d must be positive");
    assert!(r <= 16, "2^r exponent too large to evaluate");
    let d_q = BigRational::from_integer(BigInt::from(d));
    let power = d_q.pow(n as i32 - r as i32);
    let base = power / BigRational::from_integer(BigInt::from(2)) + &d_q;
    let two = BigRational::from_integer(BigInt::from(2));
    two * num_traits::pow(base, 1usize << r)
}

/// Remainders of division by a zero-dimensional basis of degree `D` have
/// degree at most `n (D - 1)`.
pub fn remainder_degree_bound(num_vars: u32, basis_degree: u32) -> u32 {
    assert!(basis_degree >= 1);
    num_vars * (basis_degree - 1)
}
