use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::multi_index::MultiIndex;
use super::polynomial::SparsePolynomial;
use super::symmetric::{poly_to_tensor_with_degree, SymmetricTensor};
use crate::error::{Error, Result};

/// Absolute tolerance on `|H_ij - conj(H_ji)|`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Hermitian operator on `(C^n)^{⊗d}`.
///
/// Row and column indices encode `(i_1, ..., i_d)` in base `n`, big-endian
/// and 0-based: index `i_1 * n^{d-1} + ... + i_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexHermitianOperator {
    local_dim: usize,
    copies: usize,
    entries: DMatrix<Complex64>,
}

impl ComplexHermitianOperator {
    pub fn new(local_dim: usize, copies: usize, entries: DMatrix<Complex64>) -> Result<Self> {
        let side = checked_side(local_dim, copies)?;
        if entries.nrows() != side || entries.ncols() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                found: entries.nrows().max(entries.ncols()),
            });
        }
        check_hermitian(&entries)?;
        Ok(ComplexHermitianOperator {
            local_dim,
            copies,
            entries,
        })
    }

    pub fn identity(local_dim: usize, copies: usize) -> Result<Self> {
        let side = checked_side(local_dim, copies)?;
        Self::new(local_dim, copies, DMatrix::identity(side, side))
    }

    /// Projector `|v><v|` onto a (not necessarily normalized) vector.
    pub fn projector(local_dim: usize, copies: usize, v: &[Complex64]) -> Result<Self> {
        let side = checked_side(local_dim, copies)?;
        if v.len() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                found: v.len(),
            });
        }
        let m = DMatrix::from_fn(side, side, |i, j| v[i] * v[j].conj());
        Self::new(local_dim, copies, m)
    }

    /// Projector onto `(1/sqrt(n)) sum_i |ii>` on `C^n ⊗ C^n`.
    pub fn maximally_entangled(n: usize) -> Result<Self> {
        let mut v = vec![Complex64::new(0.0, 0.0); n * n];
        let amp = 1.0 / (n as f64).sqrt();
        for i in 0..n {
            v[i * n + i] = Complex64::new(amp, 0.0);
        }
        Self::projector(n, 2, &v)
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn side(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr[self * other]`.
    pub fn inner(&self, other: &ComplexHermitianOperator) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.side() {
            for j in 0..self.side() {
                acc += (self.entries[(i, j)] * other.entries[(j, i)]).re;
            }
        }
        acc
    }

    /// `a * self + b * 1`.
    pub fn affine(&self, a: f64, b: f64) -> ComplexHermitianOperator {
        let side = self.side();
        let mut e = self.entries.map(|z| z * a);
        for i in 0..side {
            e[(i, i)] += Complex64::new(b, 0.0);
        }
        ComplexHermitianOperator {
            local_dim: self.local_dim,
            copies: self.copies,
            entries: e,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let real = complex_to_real_block(&self.entries).expect("already Hermitian");
        real.symmetric_eigenvalues().min()
    }

    /// `<a|^{⊗d} M |a>^{⊗d}` by direct complex arithmetic.
    pub fn expectation_product(&self, a: &[Complex64]) -> f64 {
        assert_eq!(a.len(), self.local_dim);
        let side = self.side();
        let mut v = vec![Complex64::new(1.0, 0.0); side];
        for (idx, slot) in v.iter_mut().enumerate() {
            let mut rest = idx;
            for _ in 0..self.copies {
                *slot *= a[rest % self.local_dim];
                rest /= self.local_dim;
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..side {
            for j in 0..side {
                acc += v[i].conj() * self.entries[(i, j)] * v[j];
            }
        }
        acc.re
    }
}

fn checked_side(local_dim: usize, copies: usize) -> Result<usize> {
    if local_dim == 0 || copies == 0 {
        return Err(Error::InvalidArgument(
            "local dimension and copy count must be positive".into(),
        ));
    }
    local_dim
        .checked_pow(copies as u32)
        .ok_or(Error::Overflow("operator side"))
}

fn check_hermitian(m: &DMatrix<Complex64>) -> Result<()> {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if worst > HERMITIAN_TOL {
        return Err(Error::NotHermitian(worst));
    }
    Ok(())
}

type ComplexPoly = BTreeMap<MultiIndex, Complex64>;

fn cpoly_mul(a: &ComplexPoly, b: &ComplexPoly) -> ComplexPoly {
    let mut out = ComplexPoly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            *out.entry(ma.add(mb)).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
        }
    }
    out
}

/// Products `prod_k a_{i_k}` (or their conjugates) for every index tuple, as
/// complex polynomials in `x = (Re a, Im a)`.
fn product_polys(n: usize, d: usize, conjugate: bool) -> Vec<ComplexPoly> {
    let m = 2 * n;
    let sign = if conjugate { -1.0 } else { 1.0 };
    let linear: Vec<ComplexPoly> = (0..n)
        .map(|j| {
            let mut p = ComplexPoly::new();
            p.insert(MultiIndex::var(m, j, 1), Complex64::new(1.0, 0.0));
            p.insert(MultiIndex::var(m, n + j, 1), Complex64::new(0.0, sign));
            p
        })
        .collect();
    let side = n.pow(d as u32);
    (0..side)
        .map(|idx| {
            let mut digits = vec![0; d];
            let mut rest = idx;
            for slot in (0..d).rev() {
                digits[slot] = rest % n;
                rest /= n;
            }
            let mut acc = ComplexPoly::new();
            acc.insert(MultiIndex::zero(m), Complex64::new(1.0, 0.0));
            for &j in &digits {
                acc = cpoly_mul(&acc, &linear[j]);
            }
            acc
        })
        .collect()
}

/// Real form `f(x) = <a|^{⊗d} M |a>^{⊗d}` over `2n` real variables with
/// `x = (Re a_1, ..., Re a_n, Im a_1, ..., Im a_n)`.
pub fn realify_polynomial(op: &ComplexHermitianOperator) -> SparsePolynomial {
    let n = op.local_dim;
    let d = op.copies;
    let bras = product_polys(n, d, true);
    let kets = product_polys(n, d, false);
    let mut acc = ComplexPoly::new();
    for (i, bra) in bras.iter().enumerate() {
        for (j, ket) in kets.iter().enumerate() {
            let mij = op.entries[(i, j)];
            if mij.norm() == 0.0 {
                continue;
            }
            for (mb, cb) in bra {
                for (mk, ck) in ket {
                    *acc.entry(mb.add(mk)).or_insert(Complex64::new(0.0, 0.0)) += mij * cb * ck;
                }
            }
        }
    }
    let scale = op.entries.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let mut p = SparsePolynomial::zero(2 * n);
    for (m, c) in acc {
        // Imaginary parts cancel for Hermitian input; drop float dust.
        if c.re.abs() > 1e-14 * scale {
            p.add_term(m, c.re);
        }
    }
    p
}

/// Realified symmetric tensor `M~` of rank `2d` over `2n` variables.
pub fn realify(op: &ComplexHermitianOperator) -> SymmetricTensor {
    poly_to_tensor_with_degree(&realify_polynomial(op), op.copies as u32)
        .expect("realified form is homogeneous of degree 2d")
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]`.
///
/// Each eigenvalue of `H` appears twice in the output, so traces double.
pub fn complex_to_real_block(h: &DMatrix<Complex64>) -> Result<DMatrix<f64>> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    check_hermitian(h)?;
    let n = h.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(n + i, n + j)] = z.re;
            out[(i, n + j)] = -z.im;
            out[(n + i, j)] = z.im;
        }
    }
    Ok(out)
}

/// Trace factor of [`complex_to_real_block`].
pub const REAL_BLOCK_TRACE_FACTOR: f64 = 2.0;
