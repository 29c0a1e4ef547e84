//! Command-line front end. Every command prints one JSON document.
//!
//! Exit codes: 0 success, 1 input error, 2 numerical non-convergence or a
//! rejected certificate, 64 usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::groebner::{
    buchberger, degree_bound_report, ideal_dimension, is_zero_dimensional, remainder_degree_bound,
    snap_to_rational, DEFAULT_DEGREE_CAP, DEFAULT_DENOMINATOR_CAP,
};
use crate::io::{operator_entries, parse_problem, parse_state, Problem};
use crate::kkt::build_kkt_system;
use crate::oracle::{multistart, net_enumerate};
use crate::relaxation::{
    build_moment_sdp, extract_certificate, solve_dps, verify_certificate, CertificateJson,
    HierarchyConfig, SosCertificate, GRAM_EIGEN_FLOOR,
};
use crate::sdp::{solve, Residuals, SolverOptions, SolverStatus};
use crate::tensor_poly::tensor_to_poly;
use crate::witness::{dps_witness_search, validate_witness, ModelSet, DETECTION_THRESHOLD};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const REPORT_FORMAT: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "sephier",
    version,
    about = "Certified bounds for product-symmetric polynomial optimization"
)]
pub struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the level-r hierarchy, extract a certificate, and run the oracle.
    Bound(BoundArgs),
    /// Verify a certificate file against a problem.
    Certify(CertifyArgs),
    /// Bipartite symmetric-extension bound on an operator over n⊗n.
    Dps(DpsArgs),
    /// Search for a witness detecting a state, then validate it.
    Witness(WitnessArgs),
    /// Multistart ascent and optional net bracket.
    Oracle(OracleArgs),
    /// Gröbner-basis analysis of the KKT ideal.
    Groebner(GroebnerArgs),
    /// KKT system utilities.
    Kkt {
        #[command(subcommand)]
        command: KktCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum KktCommand {
    /// Print the sphere constraint and the KKT minors.
    Dump { problem: PathBuf },
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub level: u32,
    /// Add the KKT constraints (default).
    #[arg(long, overrides_with = "no_kkt")]
    pub kkt: bool,
    #[arg(long, overrides_with = "kkt")]
    pub no_kkt: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    /// Relative duality-gap tolerance; feasibility uses a tenth of it.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Certificate path; defaults to `<problem stem>.level<r>.cert.json`
    /// beside the problem.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
    /// Leave wall-clock timings out of the report.
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub problem: PathBuf,
    pub certificate: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct DpsArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long)]
    pub ppt: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    pub state: PathBuf,
    /// Number of symmetric extensions in the search cone.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub level: u64,
    #[arg(long)]
    pub ppt: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Net resolution δ; adds a certified bracket (at most 4 variables).
    #[arg(long)]
    pub net: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GroebnerArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
    pub cap: u32,
    /// Largest denominator used when snapping float coefficients.
    #[arg(long, default_value_t = DEFAULT_DENOMINATOR_CAP)]
    pub denominator_cap: u64,
}

fn solver_options(tol: f64) -> Result<SolverOptions> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(SolverOptions {
        gap_tol: tol,
        feas_tol: tol * 0.1,
        ..Default::default()
    })
}

struct Input {
    text: String,
    digest: String,
}

fn read_input(path: &Path) -> Result<Input> {
    let bytes = std::fs::read(path)?;
    let digest = format!("sha256:{}", hex::encode(Sha256::digest(&bytes)));
    let text = String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(Input { text, digest })
}

fn status_name(s: SolverStatus) -> String {
    format!("{s:?}")
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

#[derive(Debug, Serialize)]
pub struct BoundConfig {
    pub level: u32,
    pub kkt: bool,
    pub seed: u64,
    pub restarts: u64,
    pub tol: f64,
    pub num_vars: usize,
    pub half_degree: u32,
    pub moment_side: u64,
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub build_ms: f64,
    pub solve_ms: f64,
    pub certificate_ms: f64,
    pub oracle_ms: f64,
}

/// Report of `bound`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub format: u32,
    pub command: &'static str,
    pub input_digest: String,
    pub config: BoundConfig,
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub gap: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub certificate: Option<String>,
    pub certificate_residual: Option<f64>,
    pub certificate_min_eigenvalue: Option<f64>,
    pub residuals: Residuals,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    pub status: String,
}

fn default_certificate_path(problem: &Path, level: u32) -> PathBuf {
    let stem = problem
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into());
    problem.with_file_name(format!("{stem}.level{level}.cert.json"))
}

fn cmd_bound(a: &BoundArgs) -> Result<(Value, i32)> {
    let opts = solver_options(a.tol)?;
    let input = read_input(&a.problem)?;
    let tensor = parse_problem(&input.text)?.tensor()?;
    let kkt = !a.no_kkt;
    let cfg = HierarchyConfig::new(tensor.num_vars(), tensor.half_rank(), a.level, kkt);

    let t = Instant::now();
    let sdp = build_moment_sdp(&tensor, &cfg)?;
    let build_ms = ms(t);
    let t = Instant::now();
    let sol = solve(&sdp.problem, &opts)?;
    let solve_ms = ms(t);

    let t = Instant::now();
    let mut status = status_name(sol.status);
    let mut cert_path = None;
    let mut cert_residual = None;
    let mut cert_eig = None;
    let mut upper = sol.primal_objective;
    let mut ok = sol.status == SolverStatus::Optimal;
    if ok {
        match extract_certificate(&sdp, &sol) {
            Ok(cert) => {
                let resid = verify_certificate(&tensor, &cert)?;
                let path = a
                    .certificate
                    .clone()
                    .unwrap_or_else(|| default_certificate_path(&a.problem, a.level));
                std::fs::write(&path, serde_json::to_string_pretty(&cert.to_json())?)?;
                cert_path = Some(path.display().to_string());
                cert_residual = Some(resid);
                cert_eig = Some(cert.min_gram_eigenvalue());
                upper = cert.nu;
            }
            Err(e) => {
                ok = false;
                status = format!("CertificateFailed: {e}");
            }
        }
    }
    let certificate_ms = ms(t);

    let t = Instant::now();
    let oracle = multistart(&tensor, a.restarts as usize, a.seed)?;
    let oracle_ms = ms(t);

    let report = RunReport {
        format: REPORT_FORMAT,
        command: "bound",
        input_digest: input.digest,
        config: BoundConfig {
            level: a.level,
            kkt,
            seed: a.seed,
            restarts: a.restarts,
            tol: a.tol,
            num_vars: cfg.num_vars,
            half_degree: cfg.half_degree,
            moment_side: sdp.side() as u64,
        },
        upper_bound: upper,
        lower_bound: oracle.best_value,
        gap: upper - oracle.best_value,
        primal_objective: sol.primal_objective,
        dual_objective: sol.dual_objective,
        certificate: cert_path,
        certificate_residual: cert_residual,
        certificate_min_eigenvalue: cert_eig,
        residuals: sol.residuals,
        iterations: sol.iterations,
        timings: (!a.no_timings).then_some(Timings {
            build_ms,
            solve_ms,
            certificate_ms,
            oracle_ms,
        }),
        status,
    };
    Ok((
        serde_json::to_value(report)?,
        if ok { EXIT_OK } else { EXIT_NUMERICAL },
    ))
}

fn cmd_certify(a: &CertifyArgs) -> Result<(Value, i32)> {
    let input = read_input(&a.problem)?;
    let tensor = parse_problem(&input.text)?.tensor()?;
    let cj: CertificateJson = serde_json::from_str(&std::fs::read_to_string(&a.certificate)?)?;
    let cert = SosCertificate::from_json(&cj)?;
    let residual = verify_certificate(&tensor, &cert)?;
    let eig = cert.min_gram_eigenvalue();
    let valid = residual <= a.tol && eig >= GRAM_EIGEN_FLOOR;
    let report = json!({
        "format": REPORT_FORMAT,
        "command": "certify",
        "input_digest": input.digest,
        "nu": cert.nu,
        "residual": residual,
        "tol": a.tol,
        "min_gram_eigenvalue": eig,
        "eigenvalue_floor": GRAM_EIGEN_FLOOR,
        "valid": valid,
    });
    Ok((report, if valid { EXIT_OK } else { EXIT_NUMERICAL }))
}

fn cmd_dps(a: &DpsArgs) -> Result<(Value, i32)> {
    let opts = solver_options(a.tol)?;
    let input = read_input(&a.problem)?;
    let op = match parse_problem(&input.text)? {
        Problem::Complex(op) => op,
        Problem::Real { .. } => {
            return Err(Error::InvalidArgument(
                "dps needs a complex_hermitian operator".into(),
            ))
        }
    };
    let r = solve_dps(&op, a.k as usize, a.ppt, &opts)?;
    let ok = r.status == SolverStatus::Optimal;
    let report = json!({
        "format": REPORT_FORMAT,
        "command": "dps",
        "input_digest": input.digest,
        "config": { "k": a.k, "ppt": a.ppt, "tol": a.tol },
        "value": r.value,
        "dual_value": r.dual_value,
        "residuals": r.solution.residuals,
        "iterations": r.solution.iterations,
        "status": status_name(r.status),
    });
    Ok((report, if ok { EXIT_OK } else { EXIT_NUMERICAL }))
}

fn cmd_witness(a: &WitnessArgs) -> Result<(Value, i32)> {
    let opts = solver_options(a.tol)?;
    let input = read_input(&a.state)?;
    let rho = parse_state(&input.text)?;
    let k = a.level as usize;
    let (w, value) = dps_witness_search(&rho, k, a.ppt, &opts)?;
    let model = ModelSet::Bipartite { k, ppt: a.ppt };
    let margin = validate_witness(&w.z, &model, &opts)?;
    let report = json!({
        "format": REPORT_FORMAT,
        "command": "witness",
        "input_digest": input.digest,
        "config": { "level": a.level, "ppt": a.ppt, "tol": a.tol },
        "detected": value < DETECTION_THRESHOLD,
        "value": value,
        "Z": {
            "type": "complex_hermitian",
            "n": w.z.local_dim(),
            "d": w.z.copies(),
            "entries": operator_entries(&w.z),
        },
        "validated_margin": margin,
        "model": model,
    });
    Ok((report, EXIT_OK))
}

fn cmd_oracle(a: &OracleArgs) -> Result<(Value, i32)> {
    let input = read_input(&a.problem)?;
    let tensor = parse_problem(&input.text)?.tensor()?;
    let r = multistart(&tensor, a.restarts as usize, a.seed)?;
    let mut report = json!({
        "format": REPORT_FORMAT,
        "command": "oracle",
        "input_digest": input.digest,
        "config": { "restarts": a.restarts, "seed": a.seed, "net": a.net },
        "value": r.best_value,
        "point": r.best_point,
        "kkt_residual": r.kkt_residual,
        "converged": r.converged,
    });
    if let Some(delta) = a.net {
        let n = net_enumerate(&tensor, delta)?;
        report["bracket"] = json!([n.best_value, n.certified_upper]);
    }
    Ok((report, EXIT_OK))
}

fn cmd_groebner(a: &GroebnerArgs) -> Result<(Value, i32)> {
    let input = read_input(&a.problem)?;
    let f0 = tensor_to_poly(&parse_problem(&input.text)?.tensor()?);
    if f0.is_zero() || f0.degree() == Some(0) {
        return Err(Error::InvalidArgument(
            "the KKT ideal needs a form of degree at least 2".into(),
        ));
    }
    let sys = build_kkt_system(&f0, f0.num_vars())?;
    let mut gens = Vec::new();
    let mut snap = 0.0f64;
    for g in sys.ideal_generators() {
        let s = snap_to_rational(&g, a.denominator_cap)?;
        snap = snap.max(s.max_distance);
        if !s.polynomial.is_zero() {
            gens.push(s.polynomial);
        }
    }
    let m = f0.num_vars();
    let gen_degree = gens.iter().filter_map(|g| g.degree()).max().unwrap_or(0);
    let mut report = json!({
        "format": REPORT_FORMAT,
        "command": "groebner",
        "input_digest": input.digest,
        "config": { "cap": a.cap, "denominator_cap": a.denominator_cap },
        "num_vars": m,
        "generators": gens.len(),
        "generator_degree": gen_degree,
        "snap_distance": snap,
    });
    match buchberger(&gens, a.cap) {
        Ok(basis) => {
            let dim = ideal_dimension(&basis);
            let bound = degree_bound_report(m as u32, gen_degree, dim.unwrap_or(0) as u32);
            report["status"] = json!("complete");
            report["zero_dimensional"] = json!(is_zero_dimensional(&basis));
            report["unit_ideal"] = json!(basis.is_unit_ideal());
            report["dimension"] = json!(dim);
            report["basis_size"] = json!(basis.elements.len());
            report["max_degree"] = json!(basis.max_degree);
            report["leading_monomials"] = json!(basis
                .leading_monomials()
                .iter()
                .map(|l| l.exponents().to_vec())
                .collect::<Vec<_>>());
            report["degree_bound"] = json!(bound.to_string());
            report["remainder_degree_bound"] =
                json!(remainder_degree_bound(m as u32, basis.max_degree));
            Ok((report, EXIT_OK))
        }
        Err(Error::CapExceeded { degree, cap }) => {
            report["status"] = json!("cap_exceeded");
            report["offending_degree"] = json!(degree);
            report["cap"] = json!(cap);
            Ok((report, EXIT_NUMERICAL))
        }
        Err(e) => Err(e),
    }
}

fn cmd_kkt_dump(problem: &Path) -> Result<(Value, i32)> {
    let input = read_input(problem)?;
    let f0 = tensor_to_poly(&parse_problem(&input.text)?.tensor()?);
    let sys = build_kkt_system(&f0, f0.num_vars())?;
    let minors: Vec<Value> = sys
        .minors()
        .iter()
        .map(|(&(i, j), g)| json!({ "i": i, "j": j, "terms": g.to_json_terms() }))
        .collect();
    let report = json!({
        "format": REPORT_FORMAT,
        "command": "kkt dump",
        "input_digest": input.digest,
        "num_vars": sys.num_vars(),
        "half_degree": sys.half_degree(),
        "objective": f0.to_json_terms(),
        "sphere": sys.sphere().to_json_terms(),
        "minors": minors,
    });
    Ok((report, EXIT_OK))
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NumericalFailure(_)
        | Error::SolverFailure(_)
        | Error::DualInfeasible(_)
        | Error::InconsistentConstraints(_)
        | Error::CapExceeded { .. } => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

pub fn execute(cli: &Cli) -> Result<(Value, i32)> {
    match &cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Dps(a) => cmd_dps(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Groebner(a) => cmd_groebner(a),
        Command::Kkt {
            command: KktCommand::Dump { problem },
        } => cmd_kkt_dump(problem),
    }
}

/// Parses `args`, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok((report, code)) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            let written = match &cli.output {
                Some(p) => std::fs::write(p, format!("{text}\n")),
                None => writeln!(out, "{text}"),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_INPUT;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
