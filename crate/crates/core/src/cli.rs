//! Command-line front end: reads a JSON problem file, runs one solver and
//! writes exactly one JSON document to stdout. Summaries go to the log.
//!
//! Exit codes: 0, 1, 2 carry the verdict of the command; 3 precondition
//! failed, 4 hypothesis violated, 5 empty ball intersection, 6 undetermined
//! inner inclusion check, 64 bad usage, 65 bad problem file, 70 solver abort.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::application::{bound_max_distance, AppConfig, ConvexRegion};
use crate::convexfn::ConvexFn;
use crate::error::Error;
use crate::farthest::{solve_farthest, BisectionConfig};
use crate::feasibility::{check_feasibility, ConstraintSet, FeasibilityVerdict};
use crate::geometry::{Ball, Halfspace, Vector};
use crate::inclusion::{check_inclusion, BallIntersection, InclusionVerdict, OuterBall};
use crate::minimize::SolverConfig;

pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;
pub const EXIT_EMPTY_INTERSECTION: i32 = 5;
pub const EXIT_INNER_UNDETERMINED: i32 = 6;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_BAD_FILE: i32 = 65;
pub const EXIT_SOLVER: i32 = 70;

#[derive(Debug, Parser)]
#[command(
    name = "hullscope",
    version,
    about = "Convex feasibility, ball-intersection inclusion and farthest-point bounds"
)]
pub struct Cli {
    /// Absolute tolerance of the inner solvers.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Seed for every randomized component.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Iteration limit per subgradient run.
    #[arg(long, global = true, default_value_t = 50_000)]
    pub max_iters: usize,
    /// Indentation of the JSON report; 0 prints it on one line.
    #[arg(long, global = true, default_value_t = 2)]
    pub json_indent: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the constraint list has a common point.
    Feas(FeasArgs),
    /// Decide whether the ball intersection lies inside the outer ball.
    Inclusion(InclusionArgs),
    /// Farthest distance from the outer center over the ball intersection.
    Farthest(FarthestArgs),
    /// Sandwich bound on the farthest distance over the region.
    Appbound(AppboundArgs),
}

#[derive(Debug, Args)]
pub struct FeasArgs {
    pub file: PathBuf,
    /// Start point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct InclusionArgs {
    pub file: PathBuf,
    /// Outer radius, overriding the file.
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FarthestArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct AppboundArgs {
    pub file: PathBuf,
    /// Covering distance, overriding the file.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Sampled points per hypothesis spot-check.
    #[arg(long, default_value_t = 1_000)]
    pub samples: usize,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Feas(_) => "feas",
            Command::Inclusion(_) => "inclusion",
            Command::Farthest(_) => "farthest",
            Command::Appbound(_) => "appbound",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    Halfspace { a: Vec<f64>, b: f64 },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallIntersectionSpec {
    pub centers: Vec<Vec<f64>>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuterSpec {
    pub center: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

/// Version 1 problem file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<ConstraintSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_intersection: Option<BallIntersectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<OuterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<ConstraintSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

/// Failure with its exit code and JSON payload.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub details: Value,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            kind: "usage",
            message: message.into(),
            details: Value::Null,
        }
    }

    fn bad_file(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_BAD_FILE,
            kind: "bad_file",
            message: message.into(),
            details: Value::Null,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (code, kind, details) = match e {
            Error::PreconditionFailed { margin } => (
                EXIT_PRECONDITION,
                "precondition_failed",
                json!({ "margin": margin }),
            ),
            Error::HypothesisViolated {
                hypothesis,
                counterexample,
                distance,
            } => (
                EXIT_HYPOTHESIS,
                "hypothesis_violated",
                json!({ "hypothesis": hypothesis, "counterexample": counterexample, "distance": distance }),
            ),
            Error::EmptyIntersection { g_tilde_min } => (
                EXIT_EMPTY_INTERSECTION,
                "empty_intersection",
                json!({ "g_tilde_min": g_tilde_min }),
            ),
            Error::InnerUndetermined(_) => {
                (EXIT_INNER_UNDETERMINED, "inner_undetermined", Value::Null)
            }
            Error::DimensionMismatch { .. } | Error::InvalidInput(_) => {
                (EXIT_BAD_FILE, "bad_file", Value::Null)
            }
            _ => (EXIT_SOLVER, "solver_abort", Value::Null),
        };
        Failure {
            code,
            kind,
            message,
            details,
        }
    }
}

fn vector(coords: &[f64], n: usize, what: &str) -> Result<Vector, Failure> {
    if coords.len() != n {
        return Err(Failure::bad_file(format!(
            "{what} has {} coordinates, expected {n}",
            coords.len()
        )));
    }
    Vector::new(coords.to_vec()).map_err(|e| Failure::bad_file(format!("{what}: {e}")))
}

fn positive(x: f64, what: &str) -> Result<f64, Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::bad_file(format!(
            "{what} must be positive, got {x}"
        )))
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let p: ProblemFile = serde_json::from_str(text)
            .map_err(|e| Failure::bad_file(format!("invalid problem file: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    /// Version, lengths and radii of every field present.
    pub fn validate(&self) -> Result<(), Failure> {
        if self.version != 1 {
            return Err(Failure::bad_file(format!(
                "unsupported version {}",
                self.version
            )));
        }
        if self.dimension == 0 {
            return Err(Failure::bad_file("dimension must be positive"));
        }
        for list in [&self.constraints, &self.region].into_iter().flatten() {
            self.pieces(list)?;
        }
        if self.ball_intersection.is_some() {
            self.ball_intersection()?;
        }
        if let Some(o) = &self.outer {
            vector(&o.center, self.dimension, "outer center")?;
            if let Some(r) = o.radius {
                positive(r, "outer radius")?;
            }
        }
        if let Some(d) = self.delta {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Failure::bad_file(format!(
                    "delta must be non-negative, got {d}"
                )));
            }
        }
        Ok(())
    }

    fn pieces(&self, list: &[ConstraintSpec]) -> Result<(Vec<Halfspace>, Vec<Ball>), Failure> {
        if list.is_empty() {
            return Err(Failure::bad_file("constraint lists must not be empty"));
        }
        let n = self.dimension;
        let (mut hs, mut bs) = (Vec::new(), Vec::new());
        for (i, c) in list.iter().enumerate() {
            match c {
                ConstraintSpec::Halfspace { a, b } => {
                    let a = vector(a, n, &format!("constraint {i} normal"))?;
                    hs.push(
                        Halfspace::new(a, *b)
                            .map_err(|e| Failure::bad_file(format!("constraint {i}: {e}")))?,
                    );
                }
                ConstraintSpec::Ball { center, radius } => {
                    let center = vector(center, n, &format!("constraint {i} center"))?;
                    bs.push(
                        Ball::new(
                            center,
                            positive(*radius, &format!("constraint {i} radius"))?,
                        )
                        .map_err(Failure::from)?,
                    );
                }
            }
        }
        Ok((hs, bs))
    }

    fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T, Failure> {
        field
            .as_ref()
            .ok_or_else(|| Failure::bad_file(format!("problem file lacks `{name}`")))
    }

    pub fn constraint_set(&self) -> Result<ConstraintSet, Failure> {
        let (hs, bs) = self.pieces(Self::require(&self.constraints, "constraints")?)?;
        let fns = hs
            .iter()
            .map(ConvexFn::halfspace)
            .chain(bs.iter().map(ConvexFn::ball))
            .collect();
        Ok(ConstraintSet::new(fns)?)
    }

    pub fn ball_intersection(&self) -> Result<BallIntersection, Failure> {
        let spec = Self::require(&self.ball_intersection, "ball_intersection")?;
        let centers = spec
            .centers
            .iter()
            .enumerate()
            .map(|(k, c)| vector(c, self.dimension, &format!("ball_intersection center {k}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BallIntersection::new(
            centers,
            positive(spec.radius, "ball_intersection radius")?,
        )?)
    }

    pub fn outer_center(&self) -> Result<Vector, Failure> {
        vector(
            &Self::require(&self.outer, "outer")?.center,
            self.dimension,
            "outer center",
        )
    }

    pub fn region(&self) -> Result<ConvexRegion, Failure> {
        let (hs, bs) = self.pieces(Self::require(&self.region, "region")?)?;
        Ok(ConvexRegion::new(hs, bs)?)
    }
}

/// Result of one invocation: exit code and the stdout document.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

fn render(doc: &Value, indent: usize) -> String {
    if indent == 0 {
        return serde_json::to_string(doc).expect("JSON values always serialize");
    }
    let pad = vec![b' '; indent];
    let fmt = serde_json::ser::PrettyFormatter::with_indent(&pad);
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    doc.serialize(&mut ser)
        .expect("JSON values always serialize");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

fn failure_doc(command: &str, f: &Failure) -> Value {
    let mut err = json!({ "kind": f.kind, "message": f.message });
    if let Value::Object(extra) = &f.details {
        err.as_object_mut()
            .expect("object literal")
            .extend(extra.clone());
    }
    json!({ "command": command, "exit_code": f.code, "error": err })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome {
                    code: 0,
                    stdout: e.to_string(),
                };
            }
            eprint!("{e}");
            let f = Failure::usage(e.kind().to_string());
            return Outcome {
                code: f.code,
                stdout: render(&failure_doc("", &f), 0),
            };
        }
    };
    let command = cli.command.name();
    let (code, doc) = match execute(&cli) {
        Ok((code, report)) => (
            code,
            json!({ "command": command, "exit_code": code, "report": report }),
        ),
        Err(f) => {
            warn!("{command}: {}", f.message);
            (f.code, failure_doc(command, &f))
        }
    };
    Outcome {
        code,
        stdout: render(&doc, cli.json_indent),
    }
}

fn solver_config(cli: &Cli) -> Result<SolverConfig, Failure> {
    let cfg = SolverConfig {
        max_iters: cli.max_iters,
        tol: cli.tol,
        ..SolverConfig::default()
    };
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

fn load(path: &PathBuf) -> Result<ProblemFile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::bad_file(format!("{}: {e}", path.display())))?;
    ProblemFile::parse(&text)
}

fn to_value<T: Serialize>(report: &T) -> Value {
    serde_json::to_value(report).expect("reports always serialize")
}

fn execute(cli: &Cli) -> Result<(i32, Value), Failure> {
    let cfg = solver_config(cli)?;
    match &cli.command {
        Command::Feas(args) => {
            let problem = load(&args.file)?;
            let cs = problem.constraint_set()?;
            let x0 = match &args.x0 {
                Some(x) if x.len() != cs.dim() => {
                    return Err(Failure::usage(format!(
                        "--x0 has {} coordinates, expected {}",
                        x.len(),
                        cs.dim()
                    )))
                }
                Some(x) => Vector::new(x.clone()).map_err(|e| Failure::usage(e.to_string()))?,
                None => cs.default_start(),
            };
            let report = check_feasibility(&cs, &x0, &cfg)?;
            info!(
                "feas: {:?}, merit minimum {:e} after {} iterations",
                report.verdict, report.g_tilde_min, report.iters
            );
            let code = match report.verdict {
                FeasibilityVerdict::Feasible => 0,
                FeasibilityVerdict::Infeasible => 1,
                FeasibilityVerdict::Undetermined => 2,
            };
            Ok((code, to_value(&report)))
        }
        Command::Inclusion(args) => {
            let problem = load(&args.file)?;
            let bi = problem.ball_intersection()?;
            let center = problem.outer_center()?;
            let radius = args
                .r
                .or(problem.outer.as_ref().and_then(|o| o.radius))
                .ok_or_else(|| {
                    Failure::usage("outer radius missing: pass --r or set outer.radius")
                })?;
            let ob = OuterBall::new(center, radius).map_err(|e| Failure::usage(e.to_string()))?;
            let report = check_inclusion(&bi, &ob, &cfg)?;
            info!(
                "inclusion at r = {radius}: {:?}, membership gap {:e}",
                report.verdict, report.membership_gap
            );
            let code = match report.verdict {
                InclusionVerdict::NonemptyDifference => 0,
                InclusionVerdict::Included => 1,
                InclusionVerdict::Undetermined => 2,
            };
            Ok((code, to_value(&report)))
        }
        Command::Farthest(args) => {
            let problem = load(&args.file)?;
            let bi = problem.ball_intersection()?;
            let center = problem.outer_center()?;
            let bcfg = bisection_config(args.eps, cfg)?;
            let report = solve_farthest(&bi, &center, &bcfg)?;
            info!(
                "farthest: r* = {} in {} steps",
                report.r_star, report.bisection_steps
            );
            Ok((0, to_value(&report)))
        }
        Command::Appbound(args) => {
            let problem = load(&args.file)?;
            let region = problem.region()?;
            let bi = problem.ball_intersection()?;
            let center = problem.outer_center()?;
            let delta = args
                .delta
                .or(problem.delta)
                .ok_or_else(|| Failure::usage("delta missing: pass --delta or set delta"))?;
            if !(delta >= 0.0 && delta.is_finite()) {
                return Err(Failure::usage(format!(
                    "--delta must be non-negative, got {delta}"
                )));
            }
            if args.samples == 0 {
                return Err(Failure::usage("--samples must be positive"));
            }
            let acfg = AppConfig {
                bisection: bisection_config(args.eps, cfg)?,
                samples: args.samples,
                seed: cli.seed,
            };
            let report = bound_max_distance(&region, &bi, &center, delta, &acfg)?;
            info!(
                "appbound: V_c = {}, |x_hat - c| = {}, sandwich {}",
                report.v_c,
                report.dist_x_hat,
                if report.sandwich_holds {
                    "holds"
                } else {
                    "fails"
                }
            );
            Ok((if report.sandwich_holds { 0 } else { 2 }, to_value(&report)))
        }
    }
}

fn bisection_config(eps: f64, inner: SolverConfig) -> Result<BisectionConfig, Failure> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Failure::usage(format!("--eps must be positive, got {eps}")));
    }
    Ok(BisectionConfig { eps, inner })
}
