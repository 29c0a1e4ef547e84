//! Moment/SOS hierarchy assembly, certificates, and the DPS baseline.

mod certificate;
mod dps;
mod moment;

pub use certificate::{
    extract_certificate, verify_certificate, CertificateJson, ChiJson, SosCertificate,
    GRAM_EIGEN_FLOOR,
};
pub use dps::{
    build_dps_bipartite, build_dps_witness_program, complex_from_real_block, hermitian_functional,
    partial_transpose, solve_dps, symmetric_isometry, DpsResult, DpsSdp,
};
pub use moment::{
    build_moment_sdp, build_moment_sdp_with_limit, max_moment_side, HierarchyConfig, KktRow,
    MomentSdp, MomentSolution, DEFAULT_MAX_MOMENT_SIDE, MAX_SIDE_ENV,
};

use crate::error::Result;
use crate::sdp::{solve, SdpSolution, SolverOptions, SolverStatus};
use crate::tensor_poly::SymmetricTensor;

#[derive(Clone, Debug)]
pub struct HierarchyResult {
    pub sdp: MomentSdp,
    pub solution: SdpSolution,
    pub moment: MomentSolution,
    /// Present whenever the dual could be turned into a certificate.
    pub certificate: Option<SosCertificate>,
}

impl HierarchyResult {
    pub fn status(&self) -> SolverStatus {
        self.solution.status
    }

    /// Certified bound `ν` when a certificate exists, else the primal value.
    pub fn upper_bound(&self) -> f64 {
        self.certificate
            .as_ref()
            .map(|c| c.nu)
            .unwrap_or(self.solution.primal_objective)
    }
}

/// Builds and solves the level-`r` moment SDP and extracts its certificate.
pub fn solve_hierarchy(
    tensor: &SymmetricTensor,
    cfg: &HierarchyConfig,
    opts: &SolverOptions,
) -> Result<HierarchyResult> {
    let sdp = build_moment_sdp(tensor, cfg)?;
    let solution = solve(&sdp.problem, opts)?;
    let certificate = extract_certificate(&sdp, &solution).ok();
    Ok(HierarchyResult {
        moment: MomentSolution::from_solution(&solution),
        sdp,
        solution,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kkt::{build_kkt_system, kkt_residual};
    use crate::sdp::SolverOptions;
    use crate::tensor_poly::{monomials_of_degree, poly_to_tensor, MultiIndex, SparsePolynomial};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tight() -> SolverOptions {
        SolverOptions {
            feas_tol: 1e-9,
            gap_tol: 1e-9,
            ..Default::default()
        }
    }

    fn random_form(m: usize, deg: u32, seed: u64) -> SparsePolynomial {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = SparsePolynomial::zero(m);
        for mono in monomials_of_degree(m, deg) {
            p.add_term(mono, rng.random_range(-1.0..1.0));
        }
        p
    }

    #[test]
    fn quadratic_certificate_is_diag_0_1() {
        let f0 = SparsePolynomial::monomial(MultiIndex::new(vec![2, 0]), 1.0);
        let t = poly_to_tensor(&f0).unwrap();
        let res = solve_hierarchy(&t, &HierarchyConfig::new(2, 1, 0, false), &tight()).unwrap();
        let cert = res.certificate.unwrap();
        assert!((cert.nu - 1.0).abs() < 1e-6);
        assert!(cert.gram[(0, 0)].abs() < 1e-6);
        assert!(cert.gram[(0, 1)].abs() < 1e-6);
        assert!((cert.gram[(1, 1)] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sphere_power_is_one_at_every_level() {
        for r in 0..3 {
            let t = SymmetricTensor::identity_power(2, 2);
            let res = solve_hierarchy(&t, &HierarchyConfig::new(2, 2, r, true), &tight()).unwrap();
            assert_eq!(res.status(), SolverStatus::Optimal);
            assert!((res.solution.primal_objective - 1.0).abs() < 1e-6);
            let cert = res.certificate.unwrap();
            assert!((cert.nu - 1.0).abs() < 1e-6);
            assert!(cert.gram.amax() < 1e-6);
        }
    }

    #[test]
    fn x1sq_x2sq_levels_tighten_to_quarter() {
        let f0 = SparsePolynomial::monomial(MultiIndex::new(vec![2, 2]), 1.0);
        let t = poly_to_tensor(&f0).unwrap();
        let mut prev = f64::INFINITY;
        for r in 0..=3 {
            let res = solve_hierarchy(&t, &HierarchyConfig::new(2, 2, r, true), &tight()).unwrap();
            let v = res.solution.primal_objective;
            assert!(v >= 0.25 - 1e-7);
            assert!(v <= prev + 1e-7);
            prev = v;
        }
        assert!((prev - 0.25).abs() < 1e-4, "{prev}");
    }

    #[test]
    fn random_certificates_verify() {
        for seed in 0..10 {
            let f0 = random_form(2, 4, seed);
            let t = poly_to_tensor(&f0).unwrap();
            let res = solve_hierarchy(&t, &HierarchyConfig::new(2, 2, 1, true), &tight()).unwrap();
            assert_eq!(res.status(), SolverStatus::Optimal);
            let cert = res.certificate.expect("certificate");
            assert!(cert.min_gram_eigenvalue() >= GRAM_EIGEN_FLOOR);
            let resid = verify_certificate(&t, &cert).unwrap();
            assert!(
                resid <= 1e-6 * (1.0 + f0.max_abs_coeff()),
                "seed {seed}: {resid}"
            );
            assert!((cert.nu - res.solution.primal_objective).abs() <= 1e-6);
        }
    }

    #[test]
    fn rank_one_moment_of_stationary_point_satisfies_kkt_rows() {
        let f0 = SparsePolynomial::monomial(MultiIndex::new(vec![2, 2]), 1.0);
        let t = poly_to_tensor(&f0).unwrap();
        let sdp = build_moment_sdp(&t, &HierarchyConfig::new(2, 2, 1, true)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = [s, -s];
        let sys = build_kkt_system(&f0, 2).unwrap();
        assert!(kkt_residual(&sys, &x).unwrap() <= 1e-12);
        let rho = vec![sdp.rank_one_moment(&x)];
        for row in &sdp.kkt_rows {
            assert!(sdp.problem.constraints[row.row].inner(&rho).abs() <= 1e-6);
        }
        assert!((sdp.problem.constraints[sdp.normalization_row].inner(&rho) - 1.0).abs() < 1e-12);
    }
}
