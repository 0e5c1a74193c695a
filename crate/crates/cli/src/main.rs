//! torsionlab: command-line front end over the workbench library.
//!
//! Exit codes: 0 all checks pass, 1 invariant/assumption violation, 2 parse
//! failure, 3 numerical non-convergence.

mod canonical;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use torsionlab::cylinder::{
    cylinder_trace, zeta0_mellin_oracle, zeta0_plus_k, BoundarySide, CutoffFunction, CylinderError,
};
use torsionlab::graded::{eigenvalue_multiset, signature_operator, GradedChainComplex};
use torsionlab::models;
use torsionlab::schema::{
    BoundaryModelDto, BoundarySpectrumDto, ComplexDto, TwistedSpecDto, REPORT_SCHEMA,
};
use torsionlab::symbols::{Covector, ProjectionSide, SymbolSpace};
use torsionlab::twisted::{
    build_twisted_complex, cohomology_report, long_exact_sequence_balanced,
    long_exact_sequence_defect, middle_dim_check,
};
use torsionlab::zeta_eta::{
    logdet_identity_check, torsion_report, window_decomposition_check, ZetaEtaError,
};

#[derive(Parser)]
#[command(
    name = "torsionlab",
    about = "Finite-scale workbench for refined analytic torsion: graded determinants, eta invariants, determinant lines and boundary projections",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Agmon angle in (-pi/2, 0); chosen automatically when omitted
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Spectral window radius; chosen automatically when omitted
    #[arg(long)]
    lambda: Option<f64>,
    /// Trivial-connection eta input of the normalization exponent
    #[arg(long, default_value_t = 0.0)]
    eta_trivial: f64,
    /// Rank of the flat bundle in the normalization exponent
    #[arg(long, default_value_t = 1)]
    rank_e: usize,
    /// Seed for randomized sweeps
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the invariants of a schema file (complex, boundary model,
    /// boundary spectrum or twisted complex)
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Refined torsion pipeline: rho, rho_an and the reassembly residual
    Torsion {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Log-determinant identity and window-decomposition residuals
    Identity {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Cylinder zeta values against the Mellin-limit oracle
    Cylinder {
        #[arg(long)]
        input: PathBuf,
        /// Interior degree for the trace-sample export
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Write cylinder trace samples as CSV rows t,re,im
        #[arg(long)]
        trace_csv: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Principal-symbol well-posedness sweep for both boundary projections
    Wellposed {
        /// Boundary dimension m-1
        #[arg(long, default_value_t = 2)]
        base_dim: usize,
        /// Flat bundle rank
        #[arg(long, default_value_t = 1)]
        bundle_rank: usize,
        /// Number of random unit covectors
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Twisted cohomology of a pair (M, Y) and the middle-dimension identity
    Cohomology {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

const EXIT_OK: u8 = 0;
const EXIT_INVARIANT: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_PARSE,
            message: msg.into(),
        }
    }
    fn invariant(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVARIANT,
            message: msg.into(),
        }
    }
    fn numerical(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            message: msg.into(),
        }
    }
}

fn classify_zeta_err(e: ZetaEtaError) -> Failure {
    match e {
        ZetaEtaError::NotInvertible | ZetaEtaError::NotHermitian(_) => {
            Failure::invariant(e.to_string())
        }
        ZetaEtaError::Graded(g) => Failure::invariant(g.to_string()),
        ZetaEtaError::DetLine(d) => Failure::invariant(d.to_string()),
        ZetaEtaError::Linalg(l) => Failure::numerical(l.to_string()),
        ZetaEtaError::Boundary(b) => Failure::invariant(b.to_string()),
    }
}

fn classify_cylinder_err(e: CylinderError) -> Failure {
    match e {
        CylinderError::QuadratureFailure => Failure::numerical(e.to_string()),
        CylinderError::Linalg(_) => Failure::numerical(e.to_string()),
        _ => Failure::invariant(e.to_string()),
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("cannot parse {}: {e}", path.display())))
}

fn parse_as<T: serde::de::DeserializeOwned>(value: &Value, what: &str) -> Result<T, Failure> {
    serde_json::from_value(value.clone())
        .map_err(|e| Failure::parse(format!("malformed {what}: {e}")))
}

fn complex_pair(z: C64) -> Value {
    json!([z.re, z.im])
}

fn check_entry(name: &str, residual: f64, tolerance: f64) -> (Value, bool) {
    let pass = residual.abs() <= tolerance;
    (
        json!({
            "name": name,
            "residual": residual,
            "tolerance": tolerance,
            "pass": pass,
        }),
        pass,
    )
}

fn job_echo(command: &str, input: Option<&Path>, common: &CommonArgs, extras: Value) -> Value {
    let mut job = json!({
        "command": command,
        "eta_trivial": common.eta_trivial,
        "rank_e": common.rank_e,
        "seed": common.seed,
    });
    if let Some(p) = input {
        job["input"] = json!(p.display().to_string());
    }
    if let Some(t) = common.theta {
        job["theta"] = json!(t);
    }
    if let Some(l) = common.lambda {
        job["lambda"] = json!(l);
    }
    if let Value::Object(extra) = extras {
        for (k, v) in extra {
            job[k] = v;
        }
    }
    job
}

fn emit(report: Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = canonical::to_canonical_string(&report);
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::invariant(format!("cannot write {}: {e}", path.display()))),
    }
}

fn validate_theta(theta: f64) -> Result<(), Failure> {
    if theta > -std::f64::consts::FRAC_PI_2 && theta < 0.0 {
        Ok(())
    } else {
        Err(Failure::parse(format!(
            "theta must lie in (-pi/2, 0), got {theta}"
        )))
    }
}

fn pick_angles(cx: &GradedChainComplex, common: &CommonArgs) -> Result<(f64, f64), Failure> {
    let sig = signature_operator(cx).map_err(|e| Failure::invariant(e.to_string()))?;
    let theta = match common.theta {
        Some(t) => {
            validate_theta(t)?;
            t
        }
        None => {
            let spec =
                eigenvalue_multiset(&sig.b_even).map_err(|e| Failure::numerical(e.to_string()))?;
            models::admissible_theta(&spec, -0.8)
        }
    };
    let lambda = match common.lambda {
        Some(l) => {
            if l < 0.0 {
                return Err(Failure::parse(format!("lambda must be >= 0, got {l}")));
            }
            l
        }
        None => models::admissible_window(&sig, 0.5),
    };
    Ok((theta, lambda))
}

fn run_validate(input: &Path, common: &CommonArgs) -> Result<(Value, bool), Failure> {
    let raw = read_json(input)?;
    let schema = raw
        .get("schema")
        .and_then(|s| s.as_str())
        .ok_or_else(|| Failure::parse("missing schema tag"))?
        .to_string();
    let mut violations: Vec<String> = Vec::new();
    match schema.as_str() {
        torsionlab::schema::COMPLEX_SCHEMA => {
            let dto: ComplexDto = parse_as(&raw, "complex")?;
            let cx = dto.to_complex().map_err(|e| Failure::parse(e.to_string()))?;
            violations.extend(cx.validate().violations);
        }
        torsionlab::schema::BOUNDARY_MODEL_SCHEMA => {
            let dto: BoundaryModelDto = parse_as(&raw, "boundary model")?;
            let model = dto.to_model().map_err(|e| Failure::parse(e.to_string()))?;
            violations.extend(model.validate());
        }
        torsionlab::schema::BOUNDARY_SPECTRUM_SCHEMA => {
            let dto: BoundarySpectrumDto = parse_as(&raw, "boundary spectrum")?;
            if let Err(e) = dto.to_model() {
                violations.push(e.to_string());
            }
        }
        torsionlab::schema::TWISTED_SCHEMA => {
            let dto: TwistedSpecDto = parse_as(&raw, "twisted complex")?;
            let spec = dto.to_spec().map_err(|e| Failure::parse(e.to_string()))?;
            if let Err(e) = spec.validate() {
                violations.push(e.to_string());
            } else if let Err(e) = build_twisted_complex(&spec) {
                violations.push(e.to_string());
            }
        }
        other => return Err(Failure::parse(format!("unknown schema tag {other:?}"))),
    }
    let pass = violations.is_empty();
    let report = json!({
        "schema": REPORT_SCHEMA,
        "job": job_echo("validate", Some(input), common, json!({})),
        "checks": [{
            "name": "invariants",
            "violations": violations,
            "residual": violations.len() as f64,
            "tolerance": 0.0,
            "pass": pass,
        }],
        "payload": { "input_schema": schema },
    });
    Ok((report, pass))
}

fn load_complex(input: &Path) -> Result<GradedChainComplex, Failure> {
    let raw = read_json(input)?;
    let dto: ComplexDto = parse_as(&raw, "complex")?;
    let cx = dto.to_complex().map_err(|e| Failure::parse(e.to_string()))?;
    let rep = cx.validate();
    if !rep.ok() {
        return Err(Failure::invariant(rep.violations.join("; ")));
    }
    Ok(cx)
}

fn run_torsion(input: &Path, common: &CommonArgs) -> Result<(Value, bool), Failure> {
    let cx = load_complex(input)?;
    let (theta, lambda) = pick_angles(&cx, common)?;
    let report = torsion_report(&cx, lambda, theta, 1e-9, common.eta_trivial, common.rank_e)
        .map_err(classify_zeta_err)?;
    let mut checks = Vec::new();
    let mut all_pass = true;
    let (c, p) = check_entry("window_reassembly", report.window_residual, 1e-8);
    checks.push(c);
    all_pass &= p;
    if let Some(rs) = report.ray_singer_norm {
        let (c, p) = check_entry("ray_singer_norm_minus_one", rs - 1.0, 1e-8);
        checks.push(c);
        all_pass &= p;
    }
    let payload = json!({
        "theta": theta,
        "lambda": lambda,
        "log_det_gr_out": complex_pair(report.log_det_gr_out),
        "rho_window": complex_pair(report.rho_window),
        "rho": complex_pair(report.rho),
        "rho_an": complex_pair(report.rho_an),
        "eta_even": report.eta_even,
        "eta_out": report.eta_out,
        "xi_lambda": complex_pair(report.xi_lambda),
        "window_nonzero_dims": report.window_nonzero_dims,
        "kernel_dims": report.kernel_dims,
        "betti": report.betti,
        "ray_singer_norm": report.ray_singer_norm,
        "eta_trivial": report.eta_trivial,
        "rank_e": report.rank_e,
    });
    let out = json!({
        "schema": REPORT_SCHEMA,
        "job": job_echo("torsion", Some(input), common, json!({})),
        "checks": checks,
        "payload": payload,
    });
    Ok((out, all_pass))
}

fn run_identity(input: &Path, common: &CommonArgs) -> Result<(Value, bool), Failure> {
    let cx = load_complex(input)?;
    let (theta, lambda) = pick_angles(&cx, common)?;
    let identity = logdet_identity_check(&cx, theta).map_err(classify_zeta_err)?;
    let window = window_decomposition_check(&cx, lambda, theta, 1e-9, None).map_err(classify_zeta_err)?;
    let mut checks = Vec::new();
    let mut all_pass = true;
    for (name, residual, tol) in [
        ("logdet_identity_mod_2pi_i", identity.residual, 1e-8),
        ("window_reassembly", window.relative_residual, 1e-8),
    ] {
        let (c, p) = check_entry(name, residual, tol);
        checks.push(c);
        all_pass &= p;
    }
    let payload = json!({
        "theta": theta,
        "lambda": lambda,
        "lhs": complex_pair(identity.lhs),
        "rhs": complex_pair(identity.rhs),
        "eta_even": identity.eta,
        "xi_lambda": complex_pair(window.xi_lambda),
        "eta_out": window.eta_out,
        "counting_correction": window.correction,
    });
    let out = json!({
        "schema": REPORT_SCHEMA,
        "job": job_echo("identity", Some(input), common, json!({})),
        "checks": checks,
        "payload": payload,
    });
    Ok((out, all_pass))
}

fn run_cylinder(
    input: &Path,
    degree: usize,
    trace_csv: Option<&Path>,
    common: &CommonArgs,
) -> Result<(Value, bool), Failure> {
    let raw = read_json(input)?;
    let dto: BoundarySpectrumDto = parse_as(&raw, "boundary spectrum")?;
    let model = dto.to_model().map_err(|e| Failure::parse(e.to_string()))?;
    let psi1 = CutoffFunction::psi1();
    let m = model.interior_m();
    let mut checks = Vec::new();
    let mut all_pass = true;
    let mut zeta_rows = Vec::new();
    for q in 0..=m {
        let closed = zeta0_plus_k(q, &model, BoundarySide::MinusL0);
        let plus = zeta0_plus_k(q, &model, BoundarySide::PlusL1);
        let oracle = zeta0_mellin_oracle(q, &model, BoundarySide::MinusL0, &psi1)
            .map_err(classify_cylinder_err)?;
        let (c, p) = check_entry(&format!("mellin_oracle_degree_{q}"), closed - oracle, 1e-6);
        checks.push(c);
        all_pass &= p;
        let (c2, p2) = check_entry(&format!("plus_side_negation_degree_{q}"), plus + closed, 0.0);
        checks.push(c2);
        all_pass &= p2;
        zeta_rows.push(json!({
            "degree": q,
            "zeta0_plus_k_minus_l0": closed,
            "zeta0_plus_k_plus_l1": plus,
            "mellin_oracle": oracle,
        }));
    }
    if let Some(csv_path) = trace_csv {
        if degree > m {
            return Err(Failure::parse(format!(
                "degree {degree} exceeds the interior dimension {m}"
            )));
        }
        let mut csv = String::from("t,re,im\n");
        for i in 0..33 {
            let t = 1e-4 * 10f64.powf(i as f64 / 8.0);
            let v = cylinder_trace(degree, t, &model, &psi1).map_err(classify_cylinder_err)?;
            let mut t_s = String::new();
            canonical::write_float(t, &mut t_s);
            let mut re_s = String::new();
            canonical::write_float(v.re, &mut re_s);
            let mut im_s = String::new();
            canonical::write_float(v.im, &mut im_s);
            csv.push_str(&format!("{t_s},{re_s},{im_s}\n"));
        }
        std::fs::write(csv_path, csv).map_err(|e| {
            Failure::invariant(format!("cannot write {}: {e}", csv_path.display()))
        })?;
    }
    let out = json!({
        "schema": REPORT_SCHEMA,
        "job": job_echo("cylinder", Some(input), common, json!({"degree": degree})),
        "checks": checks,
        "payload": { "zeta0": zeta_rows },
    });
    Ok((out, all_pass))
}

fn run_wellposed(
    base_dim: usize,
    bundle_rank: usize,
    count: usize,
    common: &CommonArgs,
) -> Result<(Value, bool), Failure> {
    if base_dim < 1 || bundle_rank < 1 {
        return Err(Failure::parse(
            "base dimension and bundle rank must be positive",
        ));
    }
    let space = SymbolSpace::new(base_dim, bundle_rank);
    let failures = torsionlab::symbols::wellposedness_sweep(space, count, common.seed);
    let sample = space.wellposedness_check(&Covector::axis(base_dim, 0), ProjectionSide::Minus);
    let sample_plus = space.wellposedness_check(&Covector::axis(base_dim, 0), ProjectionSide::Plus);
    let pass = failures == 0;
    let out = json!({
        "schema": REPORT_SCHEMA,
        "job": job_echo(
            "wellposed",
            None,
            common,
            json!({"base_dim": base_dim, "bundle_rank": bundle_rank, "count": count}),
        ),
        "checks": [{
            "name": "wellposedness_sweep",
            "failures": failures,
            "count": count,
            "residual": failures as f64,
            "tolerance": 0.0,
            "pass": pass,
        }],
        "payload": {
            "fiber_dim": space.fiber_dim(),
            "cauchy_dim": space.fiber_dim() / 2,
            "axis_sample": {
                "minus": {
                    "wellposed": sample.wellposed,
                    "rank_on_cauchy": sample.rank_on_cauchy,
                    "rank_projection": sample.rank_p,
                },
                "plus": {
                    "wellposed": sample_plus.wellposed,
                    "rank_on_cauchy": sample_plus.rank_on_cauchy,
                    "rank_projection": sample_plus.rank_p,
                },
            },
        },
    });
    Ok((out, pass))
}

fn run_cohomology(input: &Path, common: &CommonArgs) -> Result<(Value, bool), Failure> {
    let raw = read_json(input)?;
    let dto: TwistedSpecDto = parse_as(&raw, "twisted complex")?;
    let spec = dto.to_spec().map_err(|e| Failure::parse(e.to_string()))?;
    let rep = cohomology_report(&spec).map_err(|e| Failure::invariant(e.to_string()))?;
    let middle_ok = middle_dim_check(&rep);
    let les_ok = long_exact_sequence_balanced(&rep);
    let pass = middle_ok && les_ok;
    let out = json!({
        "schema": REPORT_SCHEMA,
        "job": job_echo("cohomology", Some(input), common, json!({})),
        "checks": [
            {"name": "middle_dimension", "pass": middle_ok,
             "residual": (rep.boundary[rep.middle_degree] as f64) - 2.0 * rep.rank_j as f64,
             "tolerance": 0.0,
             "boundary_middle": rep.boundary[rep.middle_degree], "rank_j": rep.rank_j},
            {"name": "long_exact_sequence", "pass": les_ok,
             "residual": long_exact_sequence_defect(&rep) as f64, "tolerance": 0.0},
        ],
        "payload": {
            "absolute": rep.absolute,
            "relative": rep.relative,
            "boundary": rep.boundary,
            "rank_j": rep.rank_j,
            "middle_degree": rep.middle_degree,
        },
    });
    Ok((out, pass))
}

fn dispatch(cli: Cli) -> Result<(Value, bool, Option<PathBuf>), Failure> {
    match cli.command {
        Command::Validate { input, common } => {
            let (report, pass) = run_validate(&input, &common)?;
            Ok((report, pass, common.out))
        }
        Command::Torsion { input, common } => {
            let (report, pass) = run_torsion(&input, &common)?;
            Ok((report, pass, common.out))
        }
        Command::Identity { input, common } => {
            let (report, pass) = run_identity(&input, &common)?;
            Ok((report, pass, common.out))
        }
        Command::Cylinder {
            input,
            degree,
            trace_csv,
            common,
        } => {
            let (report, pass) = run_cylinder(&input, degree, trace_csv.as_deref(), &common)?;
            Ok((report, pass, common.out))
        }
        Command::Wellposed {
            base_dim,
            bundle_rank,
            count,
            common,
        } => {
            let (report, pass) = run_wellposed(base_dim, bundle_rank, count, &common)?;
            Ok((report, pass, common.out))
        }
        Command::Cohomology { input, common } => {
            let (report, pass) = run_cohomology(&input, &common)?;
            Ok((report, pass, common.out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok((report, pass, out)) => {
            if let Err(f) = emit(report, out.as_deref()) {
                eprintln!("error: {}", f.message);
                return ExitCode::from(f.code);
            }
            if pass {
                ExitCode::from(EXIT_OK)
            } else {
                ExitCode::from(EXIT_INVARIANT)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
