//! Independent lower bounds on the sphere maximum of a form.
//!
//! Random starts come from ChaCha8 seeded with the user seed, one stream per
//! restart index (`set_stream(i)`), so serial and parallel runs agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kkt::{build_kkt_system, kkt_residual};
use crate::tensor_poly::{tensor_to_poly, SparsePolynomial, SymmetricTensor};

/// Largest number of grid points `net_enumerate` will visit.
pub const MAX_NET_POINTS: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMethod {
    Ascent,
    Net,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_value: f64,
    pub best_point: Vec<f64>,
    pub kkt_residual: f64,
    pub restarts: usize,
    pub method: OracleMethod,
    /// Only for the net method.
    pub certified_upper: Option<f64>,
    /// False if the best ascent run stopped on the iteration cap.
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct AscentOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            grad_tol: 1e-9,
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AscentOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Polynomial with its gradient, flattened for repeated evaluation.
struct Objective {
    f: Vec<(Vec<u32>, f64)>,
    grad: Vec<Vec<(Vec<u32>, f64)>>,
    half_degree: u32,
    l1: f64,
}

fn flatten(p: &SparsePolynomial) -> Vec<(Vec<u32>, f64)> {
    p.terms()
        .map(|(m, c)| (m.exponents().to_vec(), c))
        .collect()
}

fn eval_flat(terms: &[(Vec<u32>, f64)], x: &[f64]) -> f64 {
    terms
        .iter()
        .map(|(e, c)| {
            e.iter().zip(x).fold(
                *c,
                |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.powi(k as i32) },
            )
        })
        .sum()
}

impl Objective {
    fn new(t: &SymmetricTensor) -> Self {
        let p = tensor_to_poly(t);
        Objective {
            f: flatten(&p),
            grad: p.gradient().iter().map(flatten).collect(),
            half_degree: t.half_rank(),
            l1: p.l1_norm(),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        eval_flat(&self.f, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| eval_flat(g, x)).collect()
    }

    /// `2d · Σ|coefficients|`, a Lipschitz constant on the unit ball.
    fn lipschitz(&self) -> f64 {
        2.0 * self.half_degree as f64 * self.l1
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

fn check_point(t: &SymmetricTensor, x0: &[f64]) -> Result<()> {
    if x0.len() != t.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: t.num_vars(),
            found: x0.len(),
        });
    }
    let dev = x0.iter().map(|v| v * v).sum::<f64>() - 1.0;
    if !dev.is_finite() || dev.abs() > 1e-8 {
        return Err(Error::NotOnSphere(dev));
    }
    Ok(())
}

/// Projected gradient ascent with backtracking; each accepted step moves
/// along the Euclidean gradient and renormalizes.
pub fn local_ascend(
    t: &SymmetricTensor,
    x0: &[f64],
    opts: &AscentOptions,
) -> Result<AscentOutcome> {
    check_point(t, x0)?;
    let obj = Objective::new(t);
    Ok(ascend(&obj, x0, opts))
}

fn ascend(obj: &Objective, x0: &[f64], opts: &AscentOptions) -> AscentOutcome {
    let mut x = x0.to_vec();
    normalize(&mut x);
    let mut fx = obj.value(&x);
    let lip = obj.lipschitz();
    let alpha0 = if lip > 0.0 { 1.0 / lip } else { 1.0 };
    let mut alpha = alpha0;
    let mut trial = vec![0.0; x.len()];
    for it in 0..opts.max_iter {
        let g = obj.gradient(&x);
        let radial: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        let tang2: f64 = g
            .iter()
            .zip(&x)
            .map(|(gi, xi)| (gi - radial * xi).powi(2))
            .sum();
        if tang2.sqrt() <= opts.grad_tol {
            return AscentOutcome {
                point: x,
                value: fx,
                iterations: it,
                converged: true,
            };
        }
        // Allow the step to regrow after earlier backtracking.
        alpha = (alpha * 2.0).min(alpha0 * 1e3);
        let mut accepted = false;
        while alpha > alpha0 * 1e-20 {
            for ((ti, xi), gi) in trial.iter_mut().zip(&x).zip(&g) {
                *ti = xi + alpha * gi;
            }
            normalize(&mut trial);
            let ft = obj.value(&trial);
            if ft >= fx + 1e-4 * alpha * tang2 {
                std::mem::swap(&mut x, &mut trial);
                fx = ft;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No ascent possible at working precision.
            return AscentOutcome {
                point: x,
                value: fx,
                iterations: it,
                converged: tang2.sqrt() <= opts.grad_tol.max(1e-7),
            };
        }
    }
    AscentOutcome {
        point: x,
        value: fx,
        iterations: opts.max_iter,
        converged: false,
    }
}

/// `max(|f1|, max |g_ij|)` at `x`; forms of degree zero have no minors.
pub fn stationarity_residual(t: &SymmetricTensor, x: &[f64]) -> Result<f64> {
    let f0 = tensor_to_poly(t);
    if t.half_rank() == 0 || f0.is_zero() {
        let f1 = x.iter().map(|v| v * v).sum::<f64>() - 1.0;
        return Ok(f1.abs());
    }
    let sys = build_kkt_system(&f0, t.num_vars())?;
    kkt_residual(&sys, x)
}

/// Uniform point on the sphere for restart `index`.
pub fn random_start(num_vars: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    loop {
        let mut x: Vec<f64> = (0..num_vars)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        if x.iter().any(|v| *v != 0.0) {
            normalize(&mut x);
            return x;
        }
    }
}

/// Best local ascent over `restarts` seeded random starts.
pub fn multistart(t: &SymmetricTensor, restarts: usize, seed: u64) -> Result<OracleResult> {
    multistart_with(t, restarts, seed, &AscentOptions::default())
}

pub fn multistart_with(
    t: &SymmetricTensor,
    restarts: usize,
    seed: u64,
    opts: &AscentOptions,
) -> Result<OracleResult> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    if t.num_vars() == 0 {
        return Err(Error::InvalidArgument("no variables".into()));
    }
    let obj = Objective::new(t);
    let m = t.num_vars();
    let runs: Vec<AscentOutcome> = (0..restarts as u64)
        .into_par_iter()
        .map(|i| ascend(&obj, &random_start(m, seed, i), opts))
        .collect();
    // First index wins ties, so the result does not depend on scheduling.
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best].value {
            best = i;
        }
    }
    let run = &runs[best];
    Ok(OracleResult {
        best_value: t.evaluate(&run.point)?,
        kkt_residual: stationarity_residual(t, &run.point)?,
        best_point: run.point.clone(),
        restarts,
        method: OracleMethod::Ascent,
        certified_upper: None,
        converged: run.converged,
    })
}

/// Point of `S^{m-1}` with hyperspherical angles `phi`.
fn spherical_point(phi: &[f64], out: &mut [f64]) {
    let mut s = 1.0;
    let last = out.len() - 1;
    for (i, &p) in phi.iter().enumerate() {
        out[i] = s * p.cos();
        s *= p.sin();
    }
    out[last] = s;
}

/// Maximum over an angular grid that is a `δ`-net of the sphere.
///
/// Moving one hyperspherical angle by `h` moves the point by at most `h`,
/// so a spacing of `2δ/(m-1)` puts every point within `δ` of the grid and
/// `lower + L·δ` bounds the true maximum.
pub fn net_enumerate(t: &SymmetricTensor, delta: f64) -> Result<OracleResult> {
    let m = t.num_vars();
    if m > 4 {
        return Err(Error::TooManyVariables(m));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("no variables".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "net resolution must be positive, got {delta}"
        )));
    }
    let obj = Objective::new(t);
    let best_point = if m == 1 {
        let (a, b) = (obj.value(&[1.0]), obj.value(&[-1.0]));
        if b > a {
            vec![-1.0]
        } else {
            vec![1.0]
        }
    } else {
        let h = 2.0 * delta / (m - 1) as f64;
        let pi = std::f64::consts::PI;
        // Angles 0..m-2 span [0, π]; the last spans [0, 2π).
        let mut counts: Vec<u64> = vec![(pi / h).ceil() as u64 + 1; m - 2];
        counts.push((2.0 * pi / h).ceil() as u64);
        let total = counts.iter().try_fold(1u64, |acc, &c| acc.checked_mul(c));
        match total {
            Some(n) if n <= MAX_NET_POINTS => {}
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "net resolution {delta} needs more than {MAX_NET_POINTS} grid points"
                )))
            }
        }
        let angle = |axis: usize, i: u64| {
            let span = if axis + 1 == counts.len() {
                2.0 * pi
            } else {
                pi
            };
            let c = counts[axis];
            if axis + 1 == counts.len() {
                span * i as f64 / c as f64
            } else {
                (span * i as f64 / (c - 1) as f64).min(pi)
            }
        };
        let inner: u64 = counts[1..].iter().product();
        let best = (0..counts[0])
            .into_par_iter()
            .map(|i0| {
                let mut phi = vec![0.0; m - 1];
                let mut x = vec![0.0; m];
                let mut best = (f64::NEG_INFINITY, vec![0.0; m]);
                phi[0] = angle(0, i0);
                for flat in 0..inner {
                    let mut rest = flat;
                    for axis in (1..m - 1).rev() {
                        phi[axis] = angle(axis, rest % counts[axis]);
                        rest /= counts[axis];
                    }
                    spherical_point(&phi, &mut x);
                    let v = obj.value(&x);
                    if v > best.0 {
                        best = (v, x.clone());
                    }
                }
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((f64::NEG_INFINITY, Vec::new()), |a, b| {
                if b.0 > a.0 {
                    b
                } else {
                    a
                }
            });
        best.1
    };
    let value = t.evaluate(&best_point)?;
    Ok(OracleResult {
        best_value: value,
        kkt_residual: stationarity_residual(t, &best_point).unwrap_or(f64::NAN),
        best_point,
        restarts: 0,
        method: OracleMethod::Net,
        certified_upper: Some(value + obj.lipschitz() * delta),
        converged: true,
    })
}
