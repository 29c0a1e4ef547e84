use std::collections::BTreeMap;
use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kkt::{build_kkt_system, KktSystem};
use crate::sdp::{Residuals, SdpProblem, SdpSolution, Sense, SolverStatus, SparseBlockMatrix};
use crate::tensor_poly::{
    monomial_count, monomials_of_degree, tensor_to_poly, MultiIndex, SparsePolynomial,
    SymmetricTensor,
};

pub const DEFAULT_MAX_MOMENT_SIDE: u64 = 3000;
pub const MAX_SIDE_ENV: &str = "SEPHIER_MAX_MOMENT_SIDE";

/// Moment-matrix side limit, from `SEPHIER_MAX_MOMENT_SIDE` when set.
pub fn max_moment_side() -> u64 {
    std::env::var(MAX_SIDE_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_MOMENT_SIDE)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    pub num_vars: usize,
    /// `d`: the objective has degree `2d`.
    pub half_degree: u32,
    /// `r`: multiplier degree `2r`.
    pub level: u32,
    pub kkt_enabled: bool,
    /// Only meaningful for the bipartite baseline.
    pub ppt_enabled: bool,
}

impl HierarchyConfig {
    pub fn new(num_vars: usize, half_degree: u32, level: u32, kkt_enabled: bool) -> Self {
        HierarchyConfig {
            num_vars,
            half_degree,
            level,
            kkt_enabled,
            ppt_enabled: false,
        }
    }

    /// `d + r`, the degree of the monomials indexing the moment matrix.
    pub fn moment_degree(&self) -> u32 {
        self.half_degree + self.level
    }

    pub fn moment_side(&self) -> Result<u64> {
        monomial_count(self.num_vars, self.moment_degree() as usize)
    }
}

#[derive(Clone, Debug)]
pub struct KktRow {
    pub alpha: MultiIndex,
    pub pair: (usize, usize),
    pub row: usize,
}

/// Level-`r` moment SDP in monomial coordinates.
///
/// The matrix variable `ρ` is indexed by the degree-`(d+r)` monomials; entry
/// `(a, b)` stands for the moment of `x^{a+b}`. Equalities tie together all
/// entries sharing a moment, and a polynomial `p` of degree `2(d+r)` enters
/// through `L(p)`, which spreads each coefficient evenly over the entries of
/// its moment so that `mᵀ L(p) m = p`.
#[derive(Clone, Debug)]
pub struct MomentSdp {
    pub config: HierarchyConfig,
    pub problem: SdpProblem,
    pub basis: Vec<MultiIndex>,
    pub objective: SparsePolynomial,
    pub kkt: Option<KktSystem>,
    pub normalization_row: usize,
    pub hankel_rows: Range<usize>,
    pub kkt_rows: Vec<KktRow>,
    classes: BTreeMap<MultiIndex, Vec<(usize, usize)>>,
}

impl MomentSdp {
    pub fn side(&self) -> usize {
        self.basis.len()
    }

    /// `L(p)` for a homogeneous `p` of degree `2(d+r)`.
    pub fn l_form(&self, p: &SparsePolynomial) -> Result<SparseBlockMatrix> {
        let mut a = SparseBlockMatrix::new();
        for (gamma, c) in p.terms() {
            let cells = self.classes.get(gamma).ok_or_else(|| {
                Error::ShapeMismatch(format!(
                    "monomial {gamma} is not a moment of this relaxation"
                ))
            })?;
            let ordered: usize = cells.iter().map(|&(i, j)| if i == j { 1 } else { 2 }).sum();
            let v = c / ordered as f64;
            for &(i, j) in cells {
                a.add(0, i, j, v);
            }
        }
        Ok(a)
    }

    /// Monomial vector `m(x)` in basis order.
    pub fn monomial_vector(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| b.eval(x)).collect()
    }

    /// Moment matrix `m(x) m(x)ᵀ` of the point mass at `x`.
    pub fn rank_one_moment(&self, x: &[f64]) -> DMatrix<f64> {
        let v = nalgebra::DVector::from_vec(self.monomial_vector(x));
        &v * v.transpose()
    }
}

pub fn build_moment_sdp(tensor: &SymmetricTensor, cfg: &HierarchyConfig) -> Result<MomentSdp> {
    build_moment_sdp_with_limit(tensor, cfg, max_moment_side())
}

/// Maximizes `<L(f0 ‖x‖^{2r}), ρ>` subject to `<L(‖x‖^{2(d+r)}), ρ> = 1`,
/// moment consistency, and, with KKT enabled, `<L(x^α g_ij), ρ> = 0` for
/// every degree-`2r` monomial `α` and every nonzero minor.
pub fn build_moment_sdp_with_limit(
    tensor: &SymmetricTensor,
    cfg: &HierarchyConfig,
    side_limit: u64,
) -> Result<MomentSdp> {
    if tensor.num_vars() != cfg.num_vars || tensor.half_rank() != cfg.half_degree {
        return Err(Error::ShapeMismatch(format!(
            "tensor has {} variables and half rank {}, config expects {} and {}",
            tensor.num_vars(),
            tensor.half_rank(),
            cfg.num_vars,
            cfg.half_degree
        )));
    }
    let side = cfg.moment_side()?;
    if side > side_limit {
        return Err(Error::SizeOverflow {
            side,
            limit: side_limit,
        });
    }
    let m = cfg.num_vars;
    let dd = cfg.moment_degree();
    let basis = monomials_of_degree(m, dd);
    let n = basis.len();

    let mut classes: BTreeMap<MultiIndex, Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            classes
                .entry(basis[i].add(&basis[j]))
                .or_default()
                .push((i, j));
        }
    }

    let objective = tensor_to_poly(tensor);
    let kkt = if cfg.kkt_enabled && cfg.half_degree > 0 && !objective.is_zero() {
        Some(build_kkt_system(&objective, m)?)
    } else {
        None
    };

    let mut sdp = MomentSdp {
        config: *cfg,
        problem: SdpProblem::new(vec![n], Sense::Max),
        basis,
        objective: objective.clone(),
        kkt: None,
        normalization_row: 0,
        hankel_rows: 0..0,
        kkt_rows: Vec::new(),
        classes,
    };

    let sphere_r = SparsePolynomial::norm_squared_power(m, cfg.level);
    sdp.problem.objective = sdp.l_form(&(&objective * &sphere_r))?;

    let norm = sdp.l_form(&SparsePolynomial::norm_squared_power(m, dd))?;
    sdp.normalization_row = sdp.problem.add_constraint(norm, 1.0);

    let start = sdp.problem.num_constraints();
    let mut hankel = Vec::new();
    for cells in sdp.classes.values() {
        let (ri, rj) = cells[0];
        for &(i, j) in &cells[1..] {
            let mut a = SparseBlockMatrix::new();
            a.add(0, ri, rj, if ri == rj { 1.0 } else { 0.5 });
            a.add(0, i, j, if i == j { -1.0 } else { -0.5 });
            hankel.push(a);
        }
    }
    for a in hankel {
        sdp.problem.add_constraint(a, 0.0);
    }
    sdp.hankel_rows = start..sdp.problem.num_constraints();

    if let Some(sys) = &kkt {
        let alphas = monomials_of_degree(m, 2 * cfg.level);
        let mut rows = Vec::new();
        for (&pair, g) in sys.minors() {
            if g.is_zero() {
                continue;
            }
            for alpha in &alphas {
                let a = sdp.l_form(&g.mul_monomial(alpha, 1.0))?;
                rows.push((alpha.clone(), pair, a));
            }
        }
        for (alpha, pair, a) in rows {
            let row = sdp.problem.add_constraint(a, 0.0);
            sdp.kkt_rows.push(KktRow { alpha, pair, row });
        }
    }
    sdp.kkt = kkt;
    Ok(sdp)
}

#[derive(Clone, Debug)]
pub struct MomentSolution {
    pub rho: DMatrix<f64>,
    pub objective: f64,
    pub residuals: Residuals,
    pub status: SolverStatus,
}

impl MomentSolution {
    pub fn from_solution(sol: &SdpSolution) -> Self {
        MomentSolution {
            rho: sol.x[0].clone(),
            objective: sol.primal_objective,
            residuals: sol.residuals,
            status: sol.status,
        }
    }
}
