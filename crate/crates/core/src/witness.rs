//! Entanglement witnesses: from certified bounds, from the DPS witness
//! program, and validated against a model set by a relaxation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relaxation::{build_dps_witness_program, solve_dps, solve_hierarchy, HierarchyConfig};
use crate::sdp::{solve, SolverOptions, SolverStatus};
use crate::tensor_poly::{realify, ComplexHermitianOperator};

/// Values below this count as a detection.
pub const DETECTION_THRESHOLD: f64 = -1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FromBound,
    FromSearch,
}

/// Set of states a witness is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSet {
    /// Level-`k` symmetric extensions on `n ⊗ n`, optionally with PPT cuts.
    Bipartite { k: usize, ppt: bool },
    /// Level-`r` moment relaxation of symmetric product states.
    ProdSym { level: u32, kkt: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub z: ComplexHermitianOperator,
    pub provenance: Provenance,
    pub model: Option<ModelSet>,
    /// Certified lower bound on `min Tr[Z ρ']` over the model set.
    pub margin: Option<f64>,
}

impl Witness {
    pub fn is_valid(&self) -> bool {
        self.margin.is_some_and(|m| m >= DETECTION_THRESHOLD)
    }

    /// `Tr[Z ρ]`.
    pub fn expectation(&self, rho: &ComplexHermitianOperator) -> f64 {
        self.z.inner(rho)
    }
}

/// `Z = ν𝟙 - M`, valid with margin 0 whenever `ν` bounds `M` on the model set.
pub fn witness_from_bound(m: &ComplexHermitianOperator, nu: f64) -> Witness {
    Witness {
        z: m.affine(-1.0, nu),
        provenance: Provenance::FromBound,
        model: None,
        margin: Some(0.0),
    }
}

fn check_state(rho: &ComplexHermitianOperator) -> Result<()> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "state has trace {tr}, expected 1"
        )));
    }
    let lam = rho.min_eigenvalue();
    if lam < -1e-8 {
        return Err(Error::InvalidArgument(format!(
            "state is not positive semidefinite (eigenvalue {lam:.3e})"
        )));
    }
    Ok(())
}

/// Searches the level-`k` DPS witness cone for `Z` with `Tr Z = n²`
/// minimizing `Tr[Z ρ]`. Returns the witness and the detection value
/// `Tr[Z ρ]`; a value below `DETECTION_THRESHOLD` certifies that `ρ` lies
/// outside the relaxed set.
pub fn dps_witness_search(
    target: &ComplexHermitianOperator,
    k: usize,
    ppt: bool,
    opts: &SolverOptions,
) -> Result<(Witness, f64)> {
    check_state(target)?;
    let sdp = build_dps_witness_program(target, k, ppt)?;
    let sol = solve(&sdp.problem, opts)?;
    if sol.status != SolverStatus::Optimal {
        return Err(Error::SolverFailure(format!("{:?}", sol.status)));
    }
    let dim = target.side();
    let mut w0 = DMatrix::<Complex64>::zeros(dim, dim);
    for (row, e) in &sdp.marginal_rows {
        w0 += e * Complex64::new(sol.y[*row], 0.0);
    }
    let tr_w0: f64 = (0..dim).map(|i| w0[(i, i)].re).sum();
    let shift = 1.0 + tr_w0 / (dim as f64);
    let mut z = -w0;
    for i in 0..dim {
        z[(i, i)] += Complex64::new(shift, 0.0);
    }
    let z = ComplexHermitianOperator::new(target.local_dim(), target.copies(), z)?;
    let value = 1.0 - sol.primal_objective;
    Ok((
        Witness {
            z,
            provenance: Provenance::FromSearch,
            model: Some(ModelSet::Bipartite { k, ppt }),
            margin: None,
        },
        value,
    ))
}

/// Lower bound on `min Tr[Z ρ']` over the model set, computed as minus
/// the relaxation's upper bound for `-Z`.
pub fn validate_witness(
    z: &ComplexHermitianOperator,
    model: &ModelSet,
    opts: &SolverOptions,
) -> Result<f64> {
    let neg = z.affine(-1.0, 0.0);
    match *model {
        ModelSet::Bipartite { k, ppt } => {
            let r = solve_dps(&neg, k, ppt, opts)?;
            if r.status != SolverStatus::Optimal {
                return Err(Error::SolverFailure(format!("{:?}", r.status)));
            }
            Ok(-r.value.max(r.dual_value))
        }
        ModelSet::ProdSym { level, kkt } => {
            let t = realify(&neg);
            let cfg = HierarchyConfig::new(t.num_vars(), t.half_rank(), level, kkt);
            let r = solve_hierarchy(&t, &cfg, opts)?;
            if r.status() != SolverStatus::Optimal {
                return Err(Error::SolverFailure(format!("{:?}", r.status())));
            }
            Ok(-r.upper_bound())
        }
    }
}

/// Fills in the witness margin for `model`.
pub fn validate(w: &mut Witness, model: ModelSet, opts: &SolverOptions) -> Result<f64> {
    let margin = validate_witness(&w.z, &model, opts)?;
    w.model = Some(model);
    w.margin = Some(margin);
    Ok(margin)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> SolverOptions {
        SolverOptions {
            feas_tol: 1e-9,
            gap_tol: 1e-9,
            ..Default::default()
        }
    }

    fn ket00() -> ComplexHermitianOperator {
        let mut v = vec![Complex64::new(0.0, 0.0); 4];
        v[0] = Complex64::new(1.0, 0.0);
        ComplexHermitianOperator::projector(2, 2, &v).unwrap()
    }

    #[test]
    fn from_bound_examples() {
        let zero = ComplexHermitianOperator::identity(2, 2)
            .unwrap()
            .affine(0.0, 0.0);
        let w = witness_from_bound(&zero, 0.0);
        assert_eq!(w.z.entries().norm(), 0.0);
        assert_eq!(w.margin, Some(0.0));
        let w = witness_from_bound(&ket00(), 1.0);
        assert!(w.z.min_eigenvalue() >= -1e-15);
        let phi = ComplexHermitianOperator::maximally_entangled(2).unwrap();
        let w = witness_from_bound(&phi, 0.5);
        assert!((w.expectation(&phi) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_margins() {
        let id = ComplexHermitianOperator::identity(2, 2).unwrap();
        for model in [
            ModelSet::Bipartite { k: 1, ppt: true },
            ModelSet::ProdSym {
                level: 0,
                kkt: false,
            },
        ] {
            let m = validate_witness(&id, &model, &tight()).unwrap();
            assert!((m - 1.0).abs() < 1e-6, "{model:?}: {m}");
            let m = validate_witness(&id.affine(-1.0, 0.0), &model, &tight()).unwrap();
            assert!((m + 1.0).abs() < 1e-6, "{model:?}: {m}");
        }
    }

    #[test]
    fn search_detects_maximally_entangled_state() {
        let phi = ComplexHermitianOperator::maximally_entangled(2).unwrap();
        let (mut w, value) = dps_witness_search(&phi, 1, true, &tight()).unwrap();
        assert!((value + 2.0).abs() < 1e-6, "{value}");
        assert!((w.z.trace() - 4.0).abs() < 1e-9);
        assert!((w.expectation(&phi) - value).abs() < 1e-6);
        let margin = validate(&mut w, ModelSet::Bipartite { k: 1, ppt: true }, &tight()).unwrap();
        assert!(margin >= -1e-5, "{margin}");
        assert!(w.is_valid());
    }

    #[test]
    fn search_does_not_detect_separable_states() {
        let mixed = ComplexHermitianOperator::identity(2, 2)
            .unwrap()
            .affine(0.25, 0.0);
        for rho in [mixed, ket00()] {
            let (_, value) = dps_witness_search(&rho, 1, true, &tight()).unwrap();
            assert!(value >= DETECTION_THRESHOLD, "{value}");
        }
    }

    #[test]
    fn search_rejects_non_states() {
        let id = ComplexHermitianOperator::identity(2, 2).unwrap();
        assert!(matches!(
            dps_witness_search(&id, 1, true, &tight()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
