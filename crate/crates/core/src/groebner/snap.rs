use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::rational_poly::RationalPolynomial;
use crate::error::{Error, Result};
use crate::tensor_poly::SparsePolynomial;

pub const DEFAULT_DENOMINATOR_CAP: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct SnapResult {
    pub polynomial: RationalPolynomial,
    /// Largest `|c - snapped(c)|` over all coefficients.
    pub max_distance: f64,
}

/// Closest rational to `x` with denominator at most `cap`, found among the
/// convergents and semiconvergents of the continued fraction of `x`.
pub fn best_rational(x: f64, cap: u64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "non-finite coefficient {x}"
        )));
    }
    if cap == 0 {
        return Err(Error::InvalidArgument(
            "denominator cap must be positive".into(),
        ));
    }
    let exact = BigRational::from_float(x).expect("finite float");
    if exact.denom() <= &BigInt::from(cap) {
        return Ok(exact);
    }
    let cap = BigInt::from(cap);
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::from(1));
    let (mut p1, mut q1) = (BigInt::from(1), BigInt::zero());
    let mut rest = exact.clone();
    loop {
        let a = rest.floor().to_integer();
        let q2 = &a * &q1 + &q0;
        if q2 > cap {
            // Largest admissible semiconvergent, compared against the last convergent.
            let t = (&cap - &q0).div_floor(&q1);
            let semi = BigRational::new(&t * &p1 + &p0, &t * &q1 + &q0);
            let conv = BigRational::new(p1, q1);
            let ds = (&semi - &exact).abs();
            let dc = (&conv - &exact).abs();
            return Ok(if ds < dc { semi } else { conv });
        }
        let p2 = &a * &p1 + &p0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = &rest - BigRational::from_integer(a);
        if frac.is_zero() {
            return Ok(BigRational::new(p1, q1));
        }
        rest = frac.recip();
    }
}

/// Replaces every float coefficient by its best rational approximation with
/// denominator at most `denominator_cap`.
pub fn snap_to_rational(p: &SparsePolynomial, denominator_cap: u64) -> Result<SnapResult> {
    let mut out = RationalPolynomial::zero(p.num_vars());
    let mut max_distance = 0.0f64;
    for (m, c) in p.terms() {
        let r = best_rational(c, denominator_cap)?;
        let back = r.to_f64().unwrap_or(f64::NAN);
        max_distance = max_distance.max((back - c).abs());
        out.add_term(m.clone(), r);
    }
    Ok(SnapResult {
        polynomial: out,
        max_distance,
    })
}
