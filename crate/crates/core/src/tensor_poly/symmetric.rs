use std::collections::BTreeMap;

use super::multi_index::MultiIndex;
use super::polynomial::SparsePolynomial;
use crate::error::{Error, Result};

/// Fully symmetric real tensor of rank `2 * half_rank` over `num_vars`
/// symbols.
///
/// Storage is canonical: one number per index multiset, keyed by the
/// multiset's exponent vector. It holds the coefficient of the matching
/// monomial in the associated form; every tensor entry whose index tuple is
/// an ordering of the multiset equals that coefficient over the multinomial
/// count, so permutation invariance holds by construction and the map to
/// polynomials is exact in both directions.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTensor {
    num_vars: usize,
    half_rank: u32,
    coeffs: BTreeMap<MultiIndex, f64>,
}

/// Dense coefficient array with `rank` index slots over `num_vars` symbols,
/// stored row-major (the first slot is the slowest index).
#[derive(Clone, Debug, PartialEq)]
pub struct RawTensor {
    pub num_vars: usize,
    pub rank: usize,
    pub data: Vec<f64>,
}

impl RawTensor {
    pub fn zeros(num_vars: usize, rank: usize) -> Self {
        RawTensor {
            num_vars,
            rank,
            data: vec![0.0; num_vars.pow(rank as u32)],
        }
    }

    pub fn flat_index(&self, indices: &[usize]) -> usize {
        indices.iter().fold(0, |acc, &i| acc * self.num_vars + i)
    }

    pub fn get(&self, indices: &[usize]) -> f64 {
        self.data[self.flat_index(indices)]
    }

    pub fn set(&mut self, indices: &[usize], v: f64) {
        let k = self.flat_index(indices);
        self.data[k] = v;
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.rank];
        for slot in (0..self.rank).rev() {
            idx[slot] = flat % self.num_vars;
            flat /= self.num_vars;
        }
        idx
    }
}

impl SymmetricTensor {
    pub fn zero(num_vars: usize, half_rank: u32) -> Self {
        SymmetricTensor {
            num_vars,
            half_rank,
            coeffs: BTreeMap::new(),
        }
    }

    /// The identity tensor `1^{⊗k}`, whose contraction with `x^{⊗2k}` is `|x|^{2k}`.
    pub fn identity_power(num_vars: usize, half_rank: u32) -> Self {
        poly_to_tensor(&SparsePolynomial::norm_squared_power(num_vars, half_rank))
            .expect("norm power is homogeneous of even degree")
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn half_rank(&self) -> u32 {
        self.half_rank
    }

    pub fn rank(&self) -> u32 {
        2 * self.half_rank
    }

    /// Entry at an arbitrary index tuple; the order of `indices` is irrelevant.
    pub fn get(&self, indices: &[usize]) -> f64 {
        assert_eq!(indices.len(), self.rank() as usize);
        let m = MultiIndex::from_indices(self.num_vars, indices);
        self.get_multiset(&m)
    }

    pub fn get_multiset(&self, m: &MultiIndex) -> f64 {
        self.coeffs
            .get(m)
            .map(|c| c / m.multinomial())
            .unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coeffs.iter().map(|(m, c)| (m, c / m.multinomial()))
    }

    /// Contraction `<T, x^{⊗2k}>`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: x.len(),
            });
        }
        Ok(self.coeffs.iter().map(|(m, c)| c * m.eval(x)).sum())
    }

    /// `T ⊗ 1^{⊗r}` followed by symmetrization, as a tensor of half rank `k + r`.
    pub fn times_identity_power(&self, r: u32) -> SymmetricTensor {
        let p = tensor_to_poly(self);
        let q = &p * &SparsePolynomial::norm_squared_power(self.num_vars, r);
        poly_to_tensor(&q).expect("product of even homogeneous forms")
    }

    pub fn scale(&self, s: f64) -> SymmetricTensor {
        SymmetricTensor {
            num_vars: self.num_vars,
            half_rank: self.half_rank,
            coeffs: self
                .coeffs
                .iter()
                .filter(|_| s != 0.0)
                .map(|(m, c)| (m.clone(), c * s))
                .collect(),
        }
    }

    /// Sum of absolute polynomial coefficients, i.e. the l1 norm of the
    /// associated form.
    pub fn poly_l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.abs()).sum()
    }
}

/// Projects a raw rank-`2k` array onto its fully symmetric part: the output
/// coefficient of each multiset is the average of the input over every index
/// ordering of that multiset.
pub fn symmetrize(raw: &RawTensor) -> Result<SymmetricTensor> {
    if !raw.rank.is_multiple_of(2) {
        return Err(Error::RankMismatch(format!("rank {} is odd", raw.rank)));
    }
    if raw.num_vars == 0 || raw.data.len() != raw.num_vars.pow(raw.rank as u32) {
        return Err(Error::RankMismatch(format!(
            "{} entries do not form a rank-{} array over {} symbols",
            raw.data.len(),
            raw.rank,
            raw.num_vars
        )));
    }
    let mut sums: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    for (flat, &v) in raw.data.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let m = MultiIndex::from_indices(raw.num_vars, &raw.unflatten(flat));
        *sums.entry(m).or_insert(0.0) += v;
    }
    let coeffs = sums.into_iter().filter(|(_, s)| *s != 0.0).collect();
    Ok(SymmetricTensor {
        num_vars: raw.num_vars,
        half_rank: (raw.rank / 2) as u32,
        coeffs,
    })
}

/// Homogeneous polynomial of degree `2k` with the same values as `T`.
pub fn tensor_to_poly(t: &SymmetricTensor) -> SparsePolynomial {
    let mut p = SparsePolynomial::zero(t.num_vars);
    for (m, c) in &t.coeffs {
        p.add_term(m.clone(), *c);
    }
    p
}

/// Symmetric tensor of a homogeneous even-degree polynomial. The zero
/// polynomial maps to the zero tensor of half rank 0.
pub fn poly_to_tensor(p: &SparsePolynomial) -> Result<SymmetricTensor> {
    if p.is_zero() {
        return Ok(SymmetricTensor::zero(p.num_vars(), 0));
    }
    let deg = p.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
    if deg % 2 != 0 {
        return Err(Error::OddDegree(deg));
    }
    poly_to_tensor_with_degree(p, deg / 2)
}

/// As [`poly_to_tensor`] but with an explicit half rank, so that the zero
/// polynomial keeps its intended shape.
pub fn poly_to_tensor_with_degree(p: &SparsePolynomial, half_rank: u32) -> Result<SymmetricTensor> {
    let mut coeffs = BTreeMap::new();
    for (m, c) in p.terms() {
        if m.degree() != 2 * half_rank {
            return Err(Error::NotHomogeneous);
        }
        coeffs.insert(m.clone(), c);
    }
    Ok(SymmetricTensor {
        num_vars: p.num_vars(),
        half_rank,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }

    #[test]
    fn symmetrize_rank_two_off_diagonal() {
        let mut raw = RawTensor::zeros(2, 2);
        raw.set(&[0, 1], 1.0);
        let t = symmetrize(&raw).unwrap();
        assert_eq!(t.get(&[0, 1]), 0.5);
        assert_eq!(t.get(&[1, 0]), 0.5);
        assert_eq!(t.get(&[0, 0]), 0.0);
    }

    #[test]
    fn symmetrize_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut raw = RawTensor::zeros(3, 4);
        for v in raw.data.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let t = symmetrize(&raw).unwrap();
        let mut dense = RawTensor::zeros(3, 4);
        for flat in 0..dense.data.len() {
            let idx = dense.unflatten(flat);
            dense.data[flat] = t.get(&idx);
        }
        let t2 = symmetrize(&dense).unwrap();
        for (m, c) in t.entries() {
            assert!((t2.get_multiset(m) - c).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetrize_matches_permutation_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut raw = RawTensor::zeros(3, 4);
        for v in raw.data.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let t = symmetrize(&raw).unwrap();
        let perms = permutations(&[0, 1, 2, 3]);
        assert_eq!(perms.len(), 24);
        for flat in 0..raw.data.len() {
            let idx = raw.unflatten(flat);
            let avg: f64 = perms
                .iter()
                .map(|p| raw.get(&p.iter().map(|&s| idx[s]).collect::<Vec<_>>()))
                .sum::<f64>()
                / 24.0;
            assert!((t.get(&idx) - avg).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetrize_rejects_odd_or_ragged() {
        assert!(matches!(
            symmetrize(&RawTensor::zeros(2, 3)),
            Err(Error::RankMismatch(_))
        ));
        let raw = RawTensor {
            num_vars: 2,
            rank: 2,
            data: vec![0.0; 3],
        };
        assert!(matches!(symmetrize(&raw), Err(Error::RankMismatch(_))));
    }

    #[test]
    fn identity_power_evaluates_to_norm_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 1..4 {
            let t = SymmetricTensor::identity_power(4, d);
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n2: f64 = x.iter().map(|v| v * v).sum();
            let v = t.evaluate(&x).unwrap();
            assert!((v - n2.powi(d as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn product_monomial_roundtrip() {
        let p = SparsePolynomial::monomial(MultiIndex::new(vec![1, 1]), 1.0);
        let t = poly_to_tensor(&p).unwrap();
        assert_eq!(t.get(&[0, 1]), 0.5);
        assert_eq!(tensor_to_poly(&t), p);
    }

    #[test]
    fn identity_roundtrip() {
        let t = SymmetricTensor::identity_power(3, 1);
        let p = tensor_to_poly(&t);
        assert_eq!(p, SparsePolynomial::norm_squared_power(3, 1));
        assert_eq!(t.get(&[1, 1]), 1.0);
        assert_eq!(t.get(&[0, 1]), 0.0);
    }

    #[test]
    fn random_quartic_roundtrips_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let mut p = SparsePolynomial::zero(3);
            for m in crate::tensor_poly::monomials_of_degree(3, 4) {
                p.add_term(m, rng.random_range(-4i32..=4) as f64 * 0.25);
            }
            let t = poly_to_tensor(&p).unwrap();
            assert_eq!(tensor_to_poly(&t), p);
            assert_eq!(poly_to_tensor(&tensor_to_poly(&t)).unwrap(), t);
        }
    }

    #[test]
    fn evaluate_matches_polynomial_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut raw = RawTensor::zeros(3, 4);
        for v in raw.data.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let t = symmetrize(&raw).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            // Brute-force contraction over all 81 index tuples of the raw array.
            let brute: f64 = (0..raw.data.len())
                .map(|f| raw.data[f] * raw.unflatten(f).iter().map(|&i| x[i]).product::<f64>())
                .sum();
            let v = t.evaluate(&x).unwrap();
            assert!((v - brute).abs() <= 1e-12 * (1.0 + brute.abs()));
            let pv = tensor_to_poly(&t).eval(&x).unwrap();
            assert!((v - pv).abs() <= 1e-12 * (1.0 + pv.abs()));
        }
    }

    #[test]
    fn poly_to_tensor_errors() {
        let mut p = SparsePolynomial::monomial(MultiIndex::new(vec![2, 0]), 1.0);
        p.add_term(MultiIndex::new(vec![0, 0]), -1.0);
        assert!(matches!(poly_to_tensor(&p), Err(Error::NotHomogeneous)));
        let odd = SparsePolynomial::monomial(MultiIndex::new(vec![2, 1]), 1.0);
        assert!(matches!(poly_to_tensor(&odd), Err(Error::OddDegree(3))));
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let t = SymmetricTensor::identity_power(2, 1);
        assert!(matches!(
            t.evaluate(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
