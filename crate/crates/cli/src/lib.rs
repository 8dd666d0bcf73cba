//! Command-line front end: `solve`, `simulate`, `verify`, `classify`,
//! `distance` and `self-test`.
//!
//! Exit codes: 0 success, 2 usage or malformed input, 3 empty solver result,
//! 4 singular configuration, 5 residual or self-test failure.

use clap::{Parser, Subcommand, ValueEnum};
use mobius_nbody::dynamics::{integrate, DynamicsError, IntegratorOptions, Trajectory};
use mobius_nbody::equilibria::{
    euler3_solve, residual, square4_solve, two_body_solve, EquilibriaError, FGAnalysis, SignDiagnostic, SolutionBranch,
};
use mobius_nbody::geometry::{cot_geodesic, detect_singular, geodesic_distance, ExtendedPoint};
use mobius_nbody::mobius::{classify_flow, exp_subgroup, iwasawa_decompose, FlowClass, Iwasawa};
use mobius_nbody::report::{read_trajectory_csv, write_trajectory_csv, ProblemDocument, ReportError, SolutionReport};
use mobius_nbody::dynamics::{angular_momentum, energy, validate_gradient};
use mobius_nbody::{Complex64, KillingKind, Mat2C, SpaceForm, SystemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use std::f64::consts::PI;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EMPTY: i32 = 3;
pub const EXIT_SINGULAR: i32 = 4;
pub const EXIT_RESIDUAL: i32 = 5;

/// Largest residual `verify` accepts.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "mobius-nbody", version, about = "Möbius solutions of the curved n-body problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Problem {
    TwoBody,
    Euler3,
    Square4,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a special configuration and print its branches as JSON.
    Solve {
        #[arg(value_enum)]
        problem: Problem,
        /// Common mass (outer mass for euler3).
        #[arg(long)]
        mass: f64,
        /// Mass of the central body (euler3 only; defaults to --mass).
        #[arg(long)]
        central_mass: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Integrate a problem document and write the trajectory as CSV.
    Simulate {
        /// Problem document (JSON), or `-` for standard input.
        input: String,
        #[arg(long, default_value_t = PI)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-12)]
        atol: f64,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Field used to fill in missing velocities.
        #[arg(long, value_parser = parse_kind)]
        field: Option<KillingKind>,
        /// Entry to use when the input is an array of documents.
        #[arg(long, default_value_t = 0)]
        branch: usize,
    },
    /// Evaluate the residual system of a field on one or more documents.
    Verify {
        /// Problem document(s) or a CSV trajectory, or `-` for standard input.
        input: String,
        #[arg(long, value_parser = parse_kind)]
        field: Option<KillingKind>,
        /// Radius for CSV input.
        #[arg(long)]
        radius: Option<f64>,
        /// Comma-separated masses for CSV input.
        #[arg(long, value_delimiter = ',')]
        masses: Option<Vec<f64>>,
    },
    /// Iwasawa factors and conjugacy class of an SL(2,ℂ) matrix given as
    /// `re(a) im(a) re(b) im(b) re(c) im(c) re(d) im(d)`.
    Classify {
        #[arg(num_args = 8, allow_negative_numbers = true, required = true)]
        entries: Vec<f64>,
    },
    /// Geodesic distance between two points given as `re im re im`; `inf`
    /// denotes the north pole.
    Distance {
        #[arg(num_args = 4, allow_negative_numbers = true, required = true)]
        coords: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Seeded numerical self-checks; the seed is read from NBODY_SEED.
    SelfTest {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

fn parse_kind(s: &str) -> Result<KillingKind, String> {
    KillingKind::from_tag(s).ok_or_else(|| {
        let tags: Vec<&str> = KillingKind::ALL.iter().map(|k| k.tag()).collect();
        format!("unknown field {s:?}; expected one of {}", tags.join(", "))
    })
}

/// A failed command: exit code plus message for standard error.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Dynamics(d) => d.into(),
            ReportError::Equilibria(q) => q.into(),
            other => Failure::usage(other.to_string()),
        }
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        let code = match e {
            DynamicsError::Singular(_) | DynamicsError::SingularityApproached { .. } => EXIT_SINGULAR,
            DynamicsError::StepSizeUnderflow { .. } => EXIT_SINGULAR,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<EquilibriaError> for Failure {
    fn from(e: EquilibriaError) -> Self {
        match e {
            EquilibriaError::Singular(p) => Failure {
                code: EXIT_SINGULAR,
                message: p.to_string(),
            },
            EquilibriaError::Dynamics(d) => d.into(),
            other => Failure::usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve {
            problem,
            mass,
            central_mass,
            radius,
        } => cmd_solve(problem, mass, central_mass.unwrap_or(mass), radius, out, err),
        Command::Simulate {
            input,
            t_end,
            rtol,
            atol,
            out: path,
            field,
            branch,
        } => cmd_simulate(&input, t_end, rtol, atol, path, field, branch, stdin, out),
        Command::Verify {
            input,
            field,
            radius,
            masses,
        } => cmd_verify(&input, field, radius, masses, stdin, out),
        Command::Classify { entries } => cmd_classify(&entries, out),
        Command::Distance { coords, radius } => cmd_distance(&coords, radius, out),
        Command::SelfTest { samples } => cmd_self_test(samples, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::usage(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn form(radius: f64) -> Result<SpaceForm, Failure> {
    SpaceForm::new(radius).map_err(|e| Failure::usage(e.to_string()))
}

fn cmd_solve(problem: Problem, mass: f64, central: f64, radius: f64, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let form = form(radius)?;
    if !(mass > 0.0 && central > 0.0 && mass.is_finite() && central.is_finite()) {
        return Err(Failure::usage("masses must be positive"));
    }
    let (branches, analysis): (Vec<SolutionBranch>, Option<FGAnalysis>) = match problem {
        Problem::TwoBody => (two_body_solve(mass, &form)?, None),
        Problem::Euler3 => {
            let (a, b) = euler3_solve(mass, central, &form)?;
            (b, Some(a))
        }
        Problem::Square4 => {
            let (a, b) = square4_solve(mass, &form)?;
            (b, Some(a))
        }
    };
    let reports = branches
        .iter()
        .map(SolutionReport::from_branch)
        .collect::<Result<Vec<_>, _>>()?;
    print_json(out, &reports)?;
    if reports.is_empty() {
        let detail = match analysis {
            Some(a) => format!(
                "; largest admissible mass parameter is {:.12} (curves touch at alpha = {:.12})",
                a.mass_threshold, a.alpha_tangent
            ),
            None => format!("; solutions need mass <= 2R^3 = {:.12}", 2.0 * radius.powi(3)),
        };
        writeln!(err, "no solution branches{detail}")?;
        return Ok(EXIT_EMPTY);
    }
    Ok(EXIT_OK)
}

fn read_input(input: &str, stdin: &mut dyn Read) -> Result<String, Failure> {
    if input == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(input).map_err(|e| Failure::usage(format!("{input}: {e}")))
    }
}

/// A single document or an array of them.
fn parse_documents(text: &str) -> Result<Vec<ProblemDocument>, Failure> {
    let value: Value = serde_json::from_str(text).map_err(|e| Failure::usage(format!("malformed JSON: {e}")))?;
    let docs = match value {
        Value::Array(items) => items,
        other => vec![other],
    };
    docs.into_iter()
        .map(|v| serde_json::from_value(v).map_err(|e| Failure::usage(format!("malformed document: {e}"))))
        .collect()
}

#[derive(Serialize)]
struct SimulationSummary {
    samples: usize,
    accepted_steps: usize,
    rejected_steps: usize,
    t_end: f64,
    energy_drift: f64,
    momentum_drift: f64,
    /// `max_k |z_k(t_end) − z_k(0)|`.
    return_deviation: f64,
    /// `max_k |z_k(t_end) − f_{t_end}(z_k(0))|` for the document's field.
    #[serde(skip_serializing_if = "Option::is_none")]
    flow_deviation: Option<f64>,
}

fn summarize(traj: &Trajectory, config: &SystemConfig, field: Option<KillingKind>) -> Result<SimulationSummary, Failure> {
    let first = traj.first();
    let last = traj.last();
    let e0 = energy(first, config)?;
    let j0 = angular_momentum(first, config)?;
    let mut de: f64 = 0.0;
    let mut dj: f64 = 0.0;
    for s in &traj.samples {
        de = de.max((energy(s, config)? - e0).abs() / e0.abs().max(1.0));
        dj = dj.max((angular_momentum(s, config)? - j0).abs() / j0.abs().max(1.0));
    }
    let pairs = || first.positions.iter().zip(&last.positions);
    let return_deviation = pairs().map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let flow_deviation = field.map(|kind| {
        let g = exp_subgroup(kind, last.t);
        pairs()
            .map(|(a, b)| g.apply_finite(*a).map_or(f64::INFINITY, |w| (w - b).norm()))
            .fold(0.0, f64::max)
    });
    Ok(SimulationSummary {
        samples: traj.samples.len(),
        accepted_steps: traj.meta.accepted_steps,
        rejected_steps: traj.meta.rejected_steps,
        t_end: last.t,
        energy_drift: de,
        momentum_drift: dj,
        return_deviation,
        flow_deviation,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    input: &str,
    t_end: f64,
    rtol: f64,
    atol: f64,
    path: Option<PathBuf>,
    field: Option<KillingKind>,
    branch: usize,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
) -> CmdResult {
    if !(rtol > 0.0 && atol >= 0.0) {
        return Err(Failure::usage("tolerances must be positive"));
    }
    let docs = parse_documents(&read_input(input, stdin)?)?;
    let doc = docs
        .get(branch)
        .ok_or_else(|| Failure::usage(format!("no document at index {branch} ({} given)", docs.len())))?;
    let config = doc.config()?;
    let state = doc.state(field);
    let opts = IntegratorOptions {
        rel_tol: rtol,
        abs_tol: atol,
        ..IntegratorOptions::default()
    };
    let traj = integrate(&state, &config, t_end, &opts)?;
    let summary = summarize(&traj, &config, field.or(doc.field))?;
    match path {
        Some(p) => {
            let file = fs::File::create(&p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
            write_trajectory_csv(&traj, &config, std::io::BufWriter::new(file))?;
            print_json(out, &summary)?;
        }
        None => {
            write_trajectory_csv(&traj, &config, &mut *out)?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    field: KillingKind,
    per_body: Vec<f64>,
    per_body_residuals: Vec<[f64; 2]>,
    max_abs: f64,
    max_scaled: f64,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    sign: Option<SignDiagnostic>,
}

fn verify_one(kind: KillingKind, positions: &[Complex64], config: &SystemConfig, t: Option<f64>) -> Result<VerifyEntry, Failure> {
    let rep = residual(kind, positions, config)?;
    Ok(VerifyEntry {
        t,
        field: kind,
        per_body: rep.per_body.iter().map(|r| r.norm()).collect(),
        per_body_residuals: rep.per_body.iter().map(|r| [r.re, r.im]).collect(),
        max_abs: rep.max_abs,
        max_scaled: rep.max_scaled,
        passed: rep.max_abs <= VERIFY_TOL,
        sign: rep.sign,
    })
}

fn cmd_verify(
    input: &str,
    field: Option<KillingKind>,
    radius: Option<f64>,
    masses: Option<Vec<f64>>,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
) -> CmdResult {
    let text = read_input(input, stdin)?;
    let entries = if input.ends_with(".csv") || text.starts_with("t,") {
        let kind = field.ok_or_else(|| Failure::usage("--field is required for CSV input"))?;
        let masses = masses.ok_or_else(|| Failure::usage("--masses is required for CSV input"))?;
        let config = SystemConfig::new(form(radius.unwrap_or(1.0))?, masses)?;
        read_trajectory_csv(text.as_bytes())?
            .iter()
            .map(|row| verify_one(kind, &row.state.positions, &config, Some(row.state.t)))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        let docs = parse_documents(&text)?;
        if docs.is_empty() {
            return Err(Failure::usage("no documents to verify"));
        }
        docs.iter()
            .map(|doc| {
                let kind = field
                    .or(doc.field)
                    .ok_or_else(|| Failure::usage("no field given (use --field or a \"field\" entry)"))?;
                verify_one(kind, &doc.positions(), &doc.config()?, None)
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    let all_passed = entries.iter().all(|e| e.passed);
    if entries.len() == 1 {
        print_json(out, &entries[0])?;
    } else {
        print_json(out, &entries)?;
    }
    Ok(if all_passed { EXIT_OK } else { EXIT_RESIDUAL })
}

#[derive(Serialize)]
struct Classification {
    matrix: Mat2C,
    trace: Complex64,
    class: FlowClass,
    iwasawa: Iwasawa,
    boost: f64,
    shear: Complex64,
    reconstruction_error: f64,
}

fn cmd_classify(entries: &[f64], out: &mut dyn Write) -> CmdResult {
    let parts: [f64; 8] = entries
        .try_into()
        .map_err(|_| Failure::usage(format!("expected 8 reals, got {}", entries.len())))?;
    let a = Mat2C::from_parts(parts);
    let iw = iwasawa_decompose(&a).map_err(|e| Failure::usage(e.to_string()))?;
    print_json(
        out,
        &Classification {
            matrix: a,
            trace: a.trace(),
            class: classify_flow(&a, 1e-12),
            iwasawa: iw,
            boost: iw.boost(),
            shear: iw.shear(),
            reconstruction_error: iw.product().distance(&a),
        },
    )?;
    Ok(EXIT_OK)
}

fn point(re: f64, im: f64) -> ExtendedPoint {
    if re.is_infinite() || im.is_infinite() {
        ExtendedPoint::Infinity
    } else {
        ExtendedPoint::Finite(Complex64::new(re, im))
    }
}

fn cmd_distance(coords: &[f64], radius: f64, out: &mut dyn Write) -> CmdResult {
    let form = form(radius)?;
    if coords.iter().any(|c| c.is_nan()) {
        return Err(Failure::usage("coordinates must be numbers"));
    }
    let d = geodesic_distance(point(coords[0], coords[1]), point(coords[2], coords[3]), &form);
    print_json(out, &serde_json::json!({ "R": radius, "distance": d }))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    samples: usize,
    max_error: f64,
    tolerance: f64,
    passed: bool,
}

impl Check {
    fn new(name: &'static str, samples: usize, max_error: f64, tolerance: f64) -> Self {
        Check {
            name,
            samples,
            max_error,
            tolerance,
            passed: max_error <= tolerance,
        }
    }
}

/// Reads the seed from `NBODY_SEED` (decimal), defaulting to 0.
pub fn seed_from_env() -> Result<u64, String> {
    match std::env::var("NBODY_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| format!("NBODY_SEED must be an unsigned integer, got {s:?}")),
        Err(_) => Ok(0),
    }
}

fn random_point(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

fn cmd_self_test(samples: usize, out: &mut dyn Write) -> CmdResult {
    let seed = seed_from_env().map_err(Failure::usage)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let form = SpaceForm::unit();
    let mut cot_err: f64 = 0.0;
    let mut grad_err: f64 = 0.0;
    let mut iwasawa_err: f64 = 0.0;
    let config = SystemConfig::new(form, vec![1.0, 2.0, 0.5]).map_err(|e| Failure::usage(e.to_string()))?;
    let mut cot_n = 0;
    let mut grad_n = 0;
    while cot_n < samples || grad_n < samples {
        let z: Vec<Complex64> = (0..3).map(|_| random_point(&mut rng, 2.0)).collect();
        if !detect_singular(&z, &form, 0.05).is_regular() {
            continue;
        }
        if cot_n < samples {
            let d = geodesic_distance(z[0], z[1], &form);
            let kernel = cot_geodesic(z[0], z[1], &form).map_err(|e| Failure::usage(e.to_string()))?;
            let expected = 1.0 / d.tan();
            cot_err = cot_err.max((kernel - expected).abs() / expected.abs().max(1.0));
            cot_n += 1;
        }
        if grad_n < samples {
            grad_err = grad_err.max(validate_gradient(&z, &config, 1e-6).map_err(|e| Failure::usage(e.to_string()))?);
            grad_n += 1;
        }
    }
    for _ in 0..samples {
        let a = random_point(&mut rng, 1.0) + 1.5;
        let b = random_point(&mut rng, 1.0);
        let c = random_point(&mut rng, 1.0);
        let m = Mat2C::new(a, b, c, (Complex64::new(1.0, 0.0) + b * c) / a);
        let iw = iwasawa_decompose(&m).map_err(|e| Failure::usage(e.to_string()))?;
        iwasawa_err = iwasawa_err.max(iw.product().distance(&m) / m.max_norm().max(1.0));
    }
    let checks = [
        Check::new("cotangent_kernel", samples, cot_err, 1e-10),
        Check::new("gradient", samples, grad_err, 1e-6),
        Check::new("iwasawa_round_trip", samples, iwasawa_err, 1e-12),
    ];
    let passed = checks.iter().all(|c| c.passed);
    print_json(out, &serde_json::json!({ "seed": seed, "passed": passed, "checks": checks }))?;
    Ok(if passed { EXIT_OK } else { EXIT_RESIDUAL })
}
