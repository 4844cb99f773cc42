//! The `selfdual` command-line tool. Every run prints one JSON report to
//! stdout; the exit code is 0 (ok), 2 (input error), 3 (mathematical
//! violation) or 1 (internal error).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::curvature::{weyl, CurvTensor};
use crate::duality::{self, classify, DualityReport};
use crate::error::{Error, Result};
use crate::io::{component_records, read_tensor, write_tensor, ComponentRecord};
use crate::lintensor::random_orthonormal;
use crate::metriclab::{chart_by_name, classify_point, conformal_check, ConformalFactor, DEFAULT_STEP};
use crate::osserman::{osserman_exact, osserman_sampled, ExactDecision, SampledDecision, DEFAULT_SAMPLES};
use crate::quaternion::{recover, standard_structure, synthesize, Phi2Table, QuaternionDecomposition};
use crate::verify::{run_battery, BatteryConfig};

pub const REPORT_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20_240_101;

#[derive(Debug, Parser)]
#[command(name = "selfdual", version, about = "Curvature algebra in dimension four")]
pub struct Cli {
    /// Include wall-clock time in the report (breaks byte-stability).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Duality class and conformal Osserman decisions for a tensor file.
    Classify(ClassifyArgs),
    /// Write `Σ λᵢ R_{Φᵢ}` for a seeded oriented frame.
    Synth(SynthArgs),
    /// Recover a quaternion structure and coefficients from a tensor file.
    Recover(RecoverArgs),
    /// Finite-difference curvature of a built-in metric at a point.
    Metric(MetricArgs),
    /// Run the seeded equivalence battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Tensor file (JSON).
    pub file: PathBuf,
    #[arg(long, default_value_t = duality::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Coefficients `λ1,λ2,λ3`; a nonzero sum is projected out.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub lambda: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also write the tensor file here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Tensor file (JSON).
    pub file: PathBuf,
    #[arg(long, default_value_t = duality::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// One of euclidean, sphere, hyperbolic, fubini-study, product-spheres, generic.
    #[arg(long)]
    pub chart: String,
    /// Chart parameter `KEY=VALUE`; repeatable.
    #[arg(long = "param")]
    pub params: Vec<String>,
    /// Coordinates `x1,x2,x3,x4`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub point: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    /// Conformal factor: zero, sin, const:C, quad:C or lin:C1,C2,C3,C4.
    #[arg(long)]
    pub alpha: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    /// Build the battery's quaternion triples from the uncorrected `Φ₂` table.
    #[arg(long, hide = true)]
    pub negative_control: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Violation,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub format_version: u32,
    pub command: String,
    /// SHA-256 over the normalized arguments and the bytes of any input file.
    pub inputs_digest: String,
    pub status: Status,
    pub results: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    #[serde(skip)]
    pub exit_code: i32,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn error_kind(e: &Error) -> (&'static str, i32) {
    match e {
        Error::Parse { .. } => ("parse", 2),
        Error::SymmetryViolation { .. } => ("symmetry_violation", 2),
        Error::ConflictingComponent { .. } => ("conflicting_component", 2),
        Error::BadParameters(_) => ("bad_parameters", 2),
        Error::UnknownChart(_) => ("unknown_chart", 2),
        Error::OutOfDomain { .. } => ("out_of_domain", 2),
        Error::Io(_) => ("io", 2),
        Error::NotHalfFlat => ("not_half_flat", 3),
        Error::SingularMetric { .. } => ("singular_metric", 1),
        _ => ("internal", 1),
    }
}

struct Outcome {
    status: Status,
    results: Value,
    notes: Vec<String>,
}

fn ok_or_violation(ok: bool) -> Status {
    if ok {
        Status::Ok
    } else {
        Status::Violation
    }
}

/// Builds the inputs digest from `(name, value)` pairs plus file contents.
struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new(command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        Inputs { hasher }
    }

    fn arg(&mut self, name: &str, value: impl std::fmt::Display) {
        self.hasher.update(format!("\n{name}={value}").as_bytes());
    }

    fn file(&mut self, name: &str, path: &std::path::Path) {
        match std::fs::read(path) {
            Ok(bytes) => {
                self.arg(name, format!("{} bytes", bytes.len()));
                self.hasher.update(&bytes);
            }
            Err(_) => self.arg(name, "<unreadable>"),
        }
    }

    fn finish(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

#[derive(Serialize)]
struct Decisions {
    exact: ExactDecision,
    sampled: SampledDecision,
}

#[derive(Serialize)]
struct ClassifyResults {
    duality: DualityReport,
    osserman: Decisions,
    conformally_osserman: Decisions,
    biconditional_holds: bool,
    deciders_agree: bool,
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<(Value, bool)> {
    let r = read_tensor(&args.file)?;
    classify_tensor(&r, args.tol)
}

fn classify_tensor(r: &CurvTensor, tol: f64) -> Result<(Value, bool)> {
    let duality = classify(r, tol)?;
    let decisions = |use_weyl| -> Result<Decisions> {
        Ok(Decisions {
            exact: osserman_exact(r, use_weyl, tol)?,
            sampled: osserman_sampled(r, use_weyl, DEFAULT_SAMPLES, tol)?,
        })
    };
    let osserman = decisions(false)?;
    let conformally_osserman = decisions(true)?;
    let half_flat = duality.class.is_half_flat();
    let deciders_agree = osserman.exact.osserman == osserman.sampled.osserman
        && conformally_osserman.exact.osserman == conformally_osserman.sampled.osserman;
    let biconditional_holds = conformally_osserman.exact.osserman == half_flat
        && conformally_osserman.sampled.osserman == half_flat;
    let ok = biconditional_holds && deciders_agree;
    let res = ClassifyResults {
        duality,
        osserman,
        conformally_osserman,
        biconditional_holds,
        deciders_agree,
    };
    Ok((to_value(&res), ok))
}

#[derive(Serialize)]
struct SynthResults {
    lambdas: [f64; 3],
    requested_lambdas: [f64; 3],
    seed: u64,
    frame: [[f64; 4]; 4],
    predicted_eigenvalues: [f64; 3],
    components: Vec<ComponentRecord>,
    out: Option<String>,
}

fn rows(m: &crate::lintensor::Mat4) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

/// `λ` with its mean removed when the entries do not already sum to zero.
pub fn normalize_lambdas(l: [f64; 3]) -> ([f64; 3], Option<String>) {
    let sum: f64 = l.iter().sum();
    let scale = 1.0 + l.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if sum.abs() <= 1e-12 * scale {
        return (l, None);
    }
    let mean = sum / 3.0;
    let out = l.map(|v| v - mean);
    let note = format!(
        "lambda {:?} sums to {sum}; subtracted the mean {mean} to get {:?}",
        l, out
    );
    (out, Some(note))
}

fn cmd_synth(args: &SynthArgs) -> Result<Outcome> {
    let requested: [f64; 3] = args
        .lambda
        .as_slice()
        .try_into()
        .map_err(|_| Error::BadParameters("--lambda needs three values".into()))?;
    if requested.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadParameters("lambda values must be finite".into()));
    }
    let (lambdas, note) = normalize_lambdas(requested);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let basis = random_orthonormal(&mut rng, 1);
    let s = synthesize(&standard_structure(&basis)?, lambdas);
    let mut predicted = lambdas.map(|l| -6.0 * l);
    predicted.sort_by(f64::total_cmp);
    if let Some(path) = &args.out {
        let desc = format!("synthesized, lambda = {lambdas:?}, seed {}", args.seed);
        write_tensor(path, &s, Some(desc))?;
    }
    let res = SynthResults {
        lambdas,
        requested_lambdas: requested,
        seed: args.seed,
        frame: rows(basis.matrix()),
        predicted_eigenvalues: predicted,
        components: component_records(&s),
        out: args.out.as_ref().map(|p| p.display().to_string()),
    };
    Ok(Outcome {
        status: Status::Ok,
        results: to_value(&res),
        notes: note.into_iter().collect(),
    })
}

#[derive(Serialize)]
struct DecompositionView {
    class: duality::DualityClass,
    structure: [[[f64; 4]; 4]; 3],
    lambdas: [f64; 3],
    residual: f64,
    orientation_flipped: bool,
}

impl DecompositionView {
    fn new(class: duality::DualityClass, d: &QuaternionDecomposition) -> Self {
        let m = d.structure.matrices();
        DecompositionView {
            class,
            structure: [rows(&m[0]), rows(&m[1]), rows(&m[2])],
            lambdas: d.lambdas,
            residual: d.residual,
            orientation_flipped: d.orientation_flipped,
        }
    }
}

fn cmd_recover(args: &RecoverArgs) -> Result<Outcome> {
    let r = read_tensor(&args.file)?;
    let w = weyl(&r);
    let mut notes = Vec::new();
    if w.ricci_norm() > 1e-12 * (1.0 + r.norm()) {
        notes.push(format!(
            "input has a Ricci part of norm {}; recovering its Weyl part",
            w.ricci_norm()
        ));
    }
    let class = classify(&r, args.tol)?.class;
    let d = recover(&w, args.tol)?;
    let ok = d.residual <= 1e-8 * (1.0 + w.norm());
    if !ok {
        notes.push(format!("reconstruction residual {} exceeds 1e-8(1+|W|)", d.residual));
    }
    Ok(Outcome {
        status: ok_or_violation(ok),
        results: to_value(&DecompositionView::new(class, &d)),
        notes,
    })
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for p in raw {
        let bad = |m: &str| Error::Parse {
            context: format!("--param {p}"),
            message: m.into(),
        };
        let (k, v) = p.split_once('=').ok_or_else(|| bad("expected KEY=VALUE"))?;
        let v: f64 = v.trim().parse().map_err(|e: std::num::ParseFloatError| bad(&e.to_string()))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn cmd_metric(args: &MetricArgs) -> Result<Outcome> {
    let params = parse_params(&args.params)?;
    let chart = chart_by_name(&args.chart, &params)?;
    let p: [f64; 4] = args
        .point
        .as_slice()
        .try_into()
        .map_err(|_| Error::BadParameters("--point needs four values".into()))?;
    let alpha = args.alpha.as_deref().map(ConformalFactor::parse).transpose()?;
    let report = classify_point(&chart, &p, args.step)?;
    let mut ok = report.consistent;
    let mut notes = Vec::new();
    if !report.deciders_agree {
        notes.push("sampled and exact Osserman deciders disagree".into());
    }
    let comparison = match alpha {
        Some(a) => {
            let c = conformal_check(&chart, a, &p, args.step)?;
            ok &= c.labels_agree && c.spectra_scale;
            Some(c)
        }
        None => None,
    };
    Ok(Outcome {
        status: ok_or_violation(ok),
        results: json!({
            "chart": chart.name(),
            "point_report": to_value(&report),
            "conformal_check": comparison.as_ref().map(to_value),
        }),
        notes,
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<Outcome> {
    let table = if args.negative_control {
        Phi2Table::Uncorrected
    } else {
        Phi2Table::Corrected
    };
    let rep = run_battery(&BatteryConfig {
        seed: args.seed,
        count: args.count,
        table,
    })?;
    let mut notes = Vec::new();
    if args.negative_control {
        notes.push("negative control: quaternion triples use the uncorrected Phi2 table".into());
    }
    Ok(Outcome {
        status: ok_or_violation(rep.passed()),
        results: to_value(&rep),
        notes,
    })
}

fn digest(cli: &Cli) -> (String, String) {
    let (name, mut inputs) = match &cli.command {
        Command::Classify(a) => {
            let mut i = Inputs::new("classify");
            i.arg("tol", a.tol);
            i.file("file", &a.file);
            ("classify", i)
        }
        Command::Synth(a) => {
            let mut i = Inputs::new("synth");
            i.arg("lambda", join(&a.lambda));
            i.arg("seed", a.seed);
            ("synth", i)
        }
        Command::Recover(a) => {
            let mut i = Inputs::new("recover");
            i.arg("tol", a.tol);
            i.file("file", &a.file);
            ("recover", i)
        }
        Command::Metric(a) => {
            let mut i = Inputs::new("metric");
            i.arg("chart", &a.chart);
            let mut params = a.params.clone();
            params.sort();
            i.arg("params", params.join(";"));
            i.arg("point", join(&a.point));
            i.arg("step", a.step);
            i.arg("alpha", a.alpha.as_deref().unwrap_or("-"));
            ("metric", i)
        }
        Command::Verify(a) => {
            let mut i = Inputs::new("verify");
            i.arg("seed", a.seed);
            i.arg("count", a.count);
            i.arg("negative_control", a.negative_control);
            ("verify", i)
        }
    };
    inputs.arg("report_version", REPORT_VERSION);
    (name.to_string(), inputs.finish())
}

/// Runs one parsed invocation and returns its report.
pub fn run(cli: &Cli) -> RunReport {
    let start = Instant::now();
    let (command, inputs_digest) = digest(cli);
    let outcome = match &cli.command {
        Command::Classify(a) => cmd_classify(a).map(|(results, ok)| Outcome {
            status: ok_or_violation(ok),
            results,
            notes: Vec::new(),
        }),
        Command::Synth(a) => cmd_synth(a),
        Command::Recover(a) => cmd_recover(a),
        Command::Metric(a) => cmd_metric(a),
        Command::Verify(a) => cmd_verify(a),
    };
    let wall_time = cli.timing.then(|| start.elapsed().as_secs_f64());
    match outcome {
        Ok(o) => RunReport {
            format_version: REPORT_VERSION,
            command,
            inputs_digest,
            exit_code: match o.status {
                Status::Ok => 0,
                Status::Violation => 3,
                Status::Error => 1,
            },
            status: o.status,
            results: o.results,
            notes: o.notes,
            error: None,
            wall_time,
        },
        Err(e) => error_report(command, inputs_digest, &e, wall_time),
    }
}

fn error_report(command: String, inputs_digest: String, e: &Error, wall_time: Option<f64>) -> RunReport {
    let (kind, exit_code) = error_kind(e);
    RunReport {
        format_version: REPORT_VERSION,
        command,
        inputs_digest,
        status: Status::Error,
        results: Value::Null,
        notes: Vec::new(),
        error: Some(ErrorInfo {
            kind: kind.into(),
            message: e.to_string(),
        }),
        wall_time,
        exit_code,
    }
}

/// Report for arguments that did not parse.
pub fn usage_error(message: &str) -> RunReport {
    let e = Error::Parse {
        context: "command line".into(),
        message: message.trim().to_string(),
    };
    error_report("usage".into(), String::new(), &e, None)
}
