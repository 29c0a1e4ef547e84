use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::moment::MomentSdp;
use crate::error::{Error, Result};
use crate::kkt::build_kkt_system;
use crate::sdp::{min_eigenvalue, SdpSolution};
use crate::tensor_poly::{tensor_to_poly, MultiIndex, SparsePolynomial, SymmetricTensor, TermJson};

/// Eigenvalue floor accepted on the Gram matrix.
pub const GRAM_EIGEN_FLOOR: f64 = -1e-8;

/// Largest PSD deficit of the recovered Gram matrix that extraction will
/// repair, relative to `1 + max|Q|`.
const MAX_REPAIR: f64 = 1e-4;

/// `ν ‖x‖^{2(d+r)} - f0 ‖x‖^{2r} - Σ χ_ij g_ij = mᵀ Q m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SosCertificate {
    pub nu: f64,
    pub monomials: Vec<MultiIndex>,
    pub gram: DMatrix<f64>,
    pub chi: BTreeMap<(usize, usize), SparsePolynomial>,
}

impl SosCertificate {
    pub fn min_gram_eigenvalue(&self) -> f64 {
        min_eigenvalue(std::slice::from_ref(&self.gram))
    }

    /// The sum of squares `mᵀ Q m` as a polynomial.
    pub fn sos_polynomial(&self) -> SparsePolynomial {
        let num_vars = self.monomials.first().map(|m| m.num_vars()).unwrap_or(0);
        let mut p = SparsePolynomial::zero(num_vars);
        let n = self.monomials.len();
        for i in 0..n {
            for j in i..n {
                let q = self.gram[(i, j)] + if i == j { 0.0 } else { self.gram[(j, i)] };
                if q != 0.0 {
                    p.add_term(self.monomials[i].add(&self.monomials[j]), q);
                }
            }
        }
        p
    }

    pub fn to_json(&self) -> CertificateJson {
        let n = self.monomials.len();
        let mut lower = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                lower.push(self.gram[(i, j)]);
            }
        }
        CertificateJson {
            format: 1,
            nu: self.nu,
            monomials: self
                .monomials
                .iter()
                .map(|m| m.exponents().to_vec())
                .collect(),
            q_lower_triangle: lower,
            chi: self
                .chi
                .iter()
                .map(|(&(i, j), p)| ChiJson {
                    i,
                    j,
                    terms: p.to_json_terms(),
                })
                .collect(),
        }
    }

    pub fn from_json(c: &CertificateJson) -> Result<Self> {
        let n = c.monomials.len();
        if c.q_lower_triangle.len() != n * (n + 1) / 2 {
            return Err(Error::ShapeMismatch(format!(
                "{} monomials need {} lower-triangle entries, found {}",
                n,
                n * (n + 1) / 2,
                c.q_lower_triangle.len()
            )));
        }
        let num_vars = c.monomials.first().map(|m| m.len()).unwrap_or(0);
        if c.monomials.iter().any(|m| m.len() != num_vars) {
            return Err(Error::ShapeMismatch(
                "monomials disagree on variable count".into(),
            ));
        }
        let mut gram = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in 0..=i {
                gram[(i, j)] = c.q_lower_triangle[k];
                gram[(j, i)] = c.q_lower_triangle[k];
                k += 1;
            }
        }
        let mut chi = BTreeMap::new();
        for e in &c.chi {
            let p = SparsePolynomial::from_json_terms(num_vars, &e.terms)?;
            chi.insert((e.i, e.j), p);
        }
        Ok(SosCertificate {
            nu: c.nu,
            monomials: c.monomials.iter().cloned().map(MultiIndex::new).collect(),
            gram,
            chi,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChiJson {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateJson {
    #[serde(default = "format_one")]
    pub format: u32,
    pub nu: f64,
    pub monomials: Vec<Vec<u32>>,
    #[serde(rename = "Q_lower_triangle")]
    pub q_lower_triangle: Vec<f64>,
    pub chi: Vec<ChiJson>,
}

fn format_one() -> u32 {
    1
}

/// Reads `(ν, Q, χ)` off a dual solution of a moment SDP.
///
/// `Q` is recomputed as `Σ y_i A_i - C` from the multipliers, so the
/// polynomial identity holds up to rounding whatever the solver's dual
/// residual. Should `Q` come out slightly indefinite, `δ = -λ_min(Q)` is
/// added to `ν` and `δ·diag(multinomial(a))` to `Q`; this keeps the
/// identity exact because that diagonal matrix also represents
/// `‖x‖^{2(d+r)}`.
pub fn extract_certificate(sdp: &MomentSdp, sol: &SdpSolution) -> Result<SosCertificate> {
    let y = &sol.y;
    if y.len() != sdp.problem.num_constraints() {
        return Err(Error::ShapeMismatch(
            "dual vector does not match the problem".into(),
        ));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::DualInfeasible("non-finite dual multipliers".into()));
    }
    let mut gram = sdp.problem.dual_slack(y).remove(0);
    let mut nu = y[sdp.normalization_row];

    let lam = min_eigenvalue(std::slice::from_ref(&gram));
    if lam < 0.0 {
        let scale = 1.0 + gram.amax();
        if -lam > MAX_REPAIR * scale {
            return Err(Error::DualInfeasible(format!(
                "Gram matrix has eigenvalue {lam:.3e}; dual solution is not feasible"
            )));
        }
        // Slightly more than the deficit so rounding cannot leave it negative.
        let delta = -lam * (1.0 + 1e-6) + f64::EPSILON * scale;
        for (i, b) in sdp.basis.iter().enumerate() {
            gram[(i, i)] += delta * b.multinomial();
        }
        nu += delta;
    }

    let m = sdp.config.num_vars;
    let mut chi: BTreeMap<(usize, usize), SparsePolynomial> = BTreeMap::new();
    if let Some(sys) = &sdp.kkt {
        for &pair in sys.minors().keys() {
            chi.insert(pair, SparsePolynomial::zero(m));
        }
    }
    for row in &sdp.kkt_rows {
        let c = chi.get_mut(&row.pair).expect("minor registered");
        c.add_term(row.alpha.clone(), -y[row.row]);
    }
    Ok(SosCertificate {
        nu,
        monomials: sdp.basis.clone(),
        gram,
        chi,
    })
}

/// Expands both sides of the certificate identity and returns the largest
/// absolute coefficient of their difference.
pub fn verify_certificate(tensor: &SymmetricTensor, cert: &SosCertificate) -> Result<f64> {
    let m = tensor.num_vars();
    let d = tensor.half_rank();
    let n = cert.monomials.len();
    if n == 0 {
        return Err(Error::ShapeMismatch("certificate has no monomials".into()));
    }
    if cert.gram.nrows() != n || cert.gram.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "Gram matrix is {}x{}, expected {n}x{n}",
            cert.gram.nrows(),
            cert.gram.ncols()
        )));
    }
    let dd = cert.monomials[0].degree();
    if cert
        .monomials
        .iter()
        .any(|b| b.num_vars() != m || b.degree() != dd)
    {
        return Err(Error::ShapeMismatch(
            "monomials must share the tensor's variable count and one degree".into(),
        ));
    }
    if dd < d {
        return Err(Error::ShapeMismatch(format!(
            "monomial degree {dd} is below the objective half degree {d}"
        )));
    }
    let r = dd - d;
    if !cert.nu.is_finite() || cert.gram.iter().any(|v| !v.is_finite()) {
        return Err(Error::ShapeMismatch("non-finite certificate data".into()));
    }

    let f0 = tensor_to_poly(tensor);
    let mut lhs = SparsePolynomial::norm_squared_power(m, dd).scale(cert.nu);
    lhs = &lhs - &(&f0 * &SparsePolynomial::norm_squared_power(m, r));

    let nonzero_chi = cert.chi.values().any(|c| !c.is_zero());
    if nonzero_chi {
        if d == 0 {
            return Err(Error::ShapeMismatch(
                "constant objectives have no KKT minors".into(),
            ));
        }
        let sys = build_kkt_system(&f0, m)?;
        for (&(i, j), c) in &cert.chi {
            if i >= j || j >= m {
                return Err(Error::ShapeMismatch(format!(
                    "invalid minor index ({i}, {j})"
                )));
            }
            if c.num_vars() != m || c.terms().any(|(t, _)| t.degree() != 2 * r) {
                return Err(Error::ShapeMismatch(format!(
                    "chi_({i},{j}) must be homogeneous of degree {}",
                    2 * r
                )));
            }
            lhs = &lhs - &(c * &sys.minor(i, j));
        }
    }
    let diff = &lhs - &cert.sos_polynomial();
    Ok(diff.max_abs_coeff())
}
