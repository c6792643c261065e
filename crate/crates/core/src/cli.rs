//! Command line front end. Every subcommand writes one JSON report
//! (`"schema": "v1"`) holding the resolved configuration, the snowflake
//! factor applied to the structure, and the result fields. Estimator
//! subcommands can emit CSV tables instead.
//!
//! Exit status: 0 on success, 2 on invalid input, 3 when `classify` is
//! inconclusive, 1 on I/O failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::GeomError;
use crate::heintze::{
    dm_closed_form, euclid_cygan_monitored, level_metric, normalize_for_tree, tent_distance,
    unit_height, visual_distance, ExpandingStructure, HoroPoint,
};
use crate::madic::{ball_of, madic_distance, tree_distance, MAdicPoint};
use crate::maps::{
    check_uniform, estimate_bilipschitz, estimate_measure_distortion, estimate_qs_modulus,
    holder_norm_estimate, verify_coordinate_form, verify_decomposition, BoundaryMap,
    BoundarySpace, Direction, Sampler, Window,
};
use crate::mille::{
    boundary_case, boundary_visual, dmax_formula, fit_distortion, horoball_distortion,
    mille_distance, BoundaryPoint, MillePoint,
};
use crate::qiclass::{qi_equivalent_with, Equivalence, Tolerances};

pub const SCHEMA: &str = "v1";

#[derive(Parser, Debug)]
#[command(name = "millefeuille", version, about = "Metric geometry of millefeuille spaces and their boundaries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Distances in Q_m, the tree, G_phi and the millefeuille space.
    Dist(DistArgs),
    /// Visual boundary distance of G_phi.
    Visual(VisualArgs),
    /// Boundary distance on R^n x Q_m against the max-metric formula.
    Boundary(BoundaryArgs),
    /// Quasi-isometry verdict for two millefeuille spaces.
    Classify(ClassifyArgs),
    /// Sampling estimators for a boundary map.
    Estimate(EstimateArgs),
    /// Structural checks of a boundary map.
    Verify(VerifyArgs),
    /// Measure distortion of a map, or the doubled-horoball experiment.
    Distort(DistortArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct Output {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistMode {
    Madic,
    Tree,
    Level,
    Tent,
    Mille,
}

#[derive(Args, Debug, Serialize)]
pub struct DistArgs {
    #[arg(long, value_enum)]
    pub mode: DistMode,
    /// m-adic point, e.g. "2:{0:1}".
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    /// Vectors as comma separated reals, optionally in brackets.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    /// Height of the level set (level mode).
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tb: Option<f64>,
    /// Structure JSON (file path or inline).
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Base `a > 1` of the m-adic metric `a^{t0}`; defaults to m.
    #[arg(long)]
    pub metric_base: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct VisualArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    /// Also evaluate the Euclid–Cygan expression at this (negative) cutoff.
    #[arg(long, allow_hyphen_values = true)]
    pub cutoff: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundaryArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub m: u32,
    /// Boundary point JSON, e.g. '{"x":[1.0],"xi":"2:{0:1}"}'.
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub mp: u64,
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub spec2: String,
    /// Relative tolerance for a clean match.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct SamplingArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scale window inner:outer.
    #[arg(long, default_value = "0.01:100")]
    pub window: Window,
    #[arg(long, default_value_t = 2000)]
    pub count: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Bilipschitz,
    Qs,
    Uniform,
    Holder,
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateArgs {
    #[arg(long, value_enum)]
    pub estimator: Estimator,
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub m: u32,
    /// Map JSON (file path or inline); a JSON array for `uniform`.
    #[arg(long)]
    pub map: String,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Ratio grid for the quasisymmetry modulus.
    #[arg(long, default_value = "0.5,1,2")]
    pub ratios: String,
    #[arg(long, default_value_t = 0.05)]
    pub bin_width: f64,
    /// Hölder exponent.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Output coordinate whose displacement is measured (holder).
    #[arg(long, default_value_t = 0)]
    pub coord: usize,
    /// Varied argument for holder: a coordinate index or "tree".
    #[arg(long, default_value = "tree")]
    pub along: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Decomposition,
    CoordinateForm,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub map: String,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Relative tolerance of the coordinate-form comparisons.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortMode {
    Measure,
    Horoball,
}

#[derive(Args, Debug, Serialize)]
pub struct DistortArgs {
    #[arg(long, value_enum)]
    pub mode: DistortMode,
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    /// Map JSON (measure mode).
    #[arg(long)]
    pub map: Option<String>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Hit-or-miss samples per box (measure mode).
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Gluing height (horoball mode).
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub cap: i64,
    /// Range of ln(level distance) (horoball mode), as from:to.
    #[arg(long, default_value = "2:10")]
    pub log_range: String,
    #[arg(long, default_value_t = 17)]
    pub steps: usize,
    #[command(flatten)]
    pub output: Output,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Dist(_) => "dist",
            Command::Visual(_) => "visual",
            Command::Boundary(_) => "boundary",
            Command::Classify(_) => "classify",
            Command::Estimate(_) => "estimate",
            Command::Verify(_) => "verify",
            Command::Distort(_) => "distort",
        }
    }

    fn output(&self) -> &Output {
        match self {
            Command::Dist(a) => &a.output,
            Command::Visual(a) => &a.output,
            Command::Boundary(a) => &a.output,
            Command::Classify(a) => &a.output,
            Command::Estimate(a) => &a.output,
            Command::Verify(a) => &a.output,
            Command::Distort(a) => &a.output,
        }
    }

    fn config(&self) -> Value {
        let v = match self {
            Command::Dist(a) => serde_json::to_value(a),
            Command::Visual(a) => serde_json::to_value(a),
            Command::Boundary(a) => serde_json::to_value(a),
            Command::Classify(a) => serde_json::to_value(a),
            Command::Estimate(a) => serde_json::to_value(a),
            Command::Verify(a) => serde_json::to_value(a),
            Command::Distort(a) => serde_json::to_value(a),
        };
        v.unwrap_or(Value::Null)
    }
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Io(String),
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = std::result::Result<Report, Failure>;

struct Report {
    result: Map<String, Value>,
    snowflake_factor: Option<f64>,
    csv: Option<String>,
    inconclusive: bool,
}

impl Report {
    fn new(result: Value) -> Self {
        let result = match result {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("result".into(), other);
                m
            }
        };
        Self {
            result,
            snowflake_factor: None,
            csv: None,
            inconclusive: false,
        }
    }

    fn snowflake(mut self, factor: f64) -> Self {
        self.snowflake_factor = Some(factor);
        self
    }

    fn csv(mut self, table: String) -> Self {
        self.csv = Some(table);
        self
    }
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> std::result::Result<&'a T, Failure> {
    v.as_ref()
        .ok_or_else(|| Failure::Invalid(format!("missing --{flag}")))
}

/// Reads a JSON argument given inline or as a file path.
fn json_arg(arg: &str) -> std::result::Result<String, Failure> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::Invalid(format!("cannot read {arg}: {e}")))
    }
}

fn structure(arg: &str) -> std::result::Result<ExpandingStructure, Failure> {
    Ok(serde_json::from_str(&json_arg(arg)?)?)
}

fn vector(arg: &str) -> std::result::Result<Vec<f64>, Failure> {
    let inner = arg.trim().trim_start_matches('[').trim_end_matches(']');
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Invalid(format!("bad number {s:?} in {arg:?}")))
        })
        .collect()
}

fn madic(arg: &str) -> std::result::Result<MAdicPoint, Failure> {
    Ok(arg.parse()?)
}

fn seed(s: &SamplingArgs) -> std::result::Result<u64, Failure> {
    s.seed
        .ok_or_else(|| Failure::Invalid("missing --seed (required for sampling)".into()))
}

fn sampler(s: &SamplingArgs) -> std::result::Result<Sampler, Failure> {
    Ok(Sampler::new(seed(s)?, s.window, s.count))
}

fn integer_height(v: f64, flag: &str) -> std::result::Result<i64, Failure> {
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(Failure::Invalid(format!("--{flag} must be an integer height, got {v}")));
    }
    Ok(v as i64)
}

fn run_dist(a: &DistArgs) -> Outcome {
    match a.mode {
        DistMode::Madic => {
            let x = madic(need(&a.a, "a")?)?;
            let y = madic(need(&a.b, "b")?)?;
            let base = a.metric_base.unwrap_or(x.base() as f64);
            let d = madic_distance(&x, &y, base)?;
            Ok(Report::new(json!({
                "distance": d.value(),
                "agreement_height": d.exponent,
            })))
        }
        DistMode::Tree => {
            let x = madic(need(&a.a, "a")?)?;
            let y = madic(need(&a.b, "b")?)?;
            let u = ball_of(&x, integer_height(*need(&a.ta, "ta")?, "ta")?);
            let v = ball_of(&y, integer_height(*need(&a.tb, "tb")?, "tb")?);
            Ok(Report::new(json!({ "distance": tree_distance(&u, &v)? as f64 })))
        }
        DistMode::Level => {
            let e = structure(need(&a.spec, "spec")?)?;
            let d = level_metric(&e, *need(&a.t, "t")?, &vector(need(&a.x, "x")?)?, &vector(need(&a.y, "y")?)?)?;
            Ok(Report::new(json!({ "distance": d })).snowflake(1.0))
        }
        DistMode::Tent => {
            let e = structure(need(&a.spec, "spec")?)?;
            let p = HoroPoint::new(vector(need(&a.x, "x")?)?, *need(&a.ta, "ta")?);
            let q = HoroPoint::new(vector(need(&a.y, "y")?)?, *need(&a.tb, "tb")?);
            Ok(Report::new(json!({ "distance": tent_distance(&e, &p, &q)? })).snowflake(1.0))
        }
        DistMode::Mille => {
            let e = structure(need(&a.spec, "spec")?)?;
            let m = *need(&a.m, "m")?;
            let p = MillePoint::new(vector(need(&a.x, "x")?)?, madic(need(&a.a, "a")?)?, *need(&a.ta, "ta")?);
            let q = MillePoint::new(vector(need(&a.y, "y")?)?, madic(need(&a.b, "b")?)?, *need(&a.tb, "tb")?);
            Ok(Report::new(json!({ "distance": mille_distance(&e, m, &p, &q)? })).snowflake(1.0))
        }
    }
}

fn run_visual(a: &VisualArgs) -> Outcome {
    let e = structure(&a.spec)?;
    let x = vector(&a.x)?;
    let y = vector(&a.y)?;
    let distance = visual_distance(&e, &x, &y)?;
    let height = if distance == 0.0 {
        None
    } else {
        Some(unit_height(&e, &x, &y)?)
    };
    let dm = if e.is_diagonal() {
        Some(dm_closed_form(&e, &x, &y)?)
    } else {
        None
    };
    let mut result = json!({
        "distance": distance,
        "unit_height": height,
        "epsilon": e.epsilon(),
        "dm_closed_form": dm,
    });
    if let Some(t) = a.cutoff {
        result["euclid_cygan"] = serde_json::to_value(euclid_cygan_monitored(&e, &x, &y, t)?)?;
    }
    Ok(Report::new(result).snowflake(1.0))
}

fn boundary_point(arg: &str) -> std::result::Result<BoundaryPoint, Failure> {
    Ok(serde_json::from_str(&json_arg(arg)?)?)
}

fn run_boundary(a: &BoundaryArgs) -> Outcome {
    let raw = structure(&a.spec)?;
    let (e, factor) = normalize_for_tree(&raw, a.m)?;
    let p = boundary_point(&a.a)?;
    let q = boundary_point(&a.b)?;
    let distance = boundary_visual(&e, a.m, &p, &q)?;
    let dmax = if e.is_diagonal() {
        Some(dmax_formula(&e, a.m, &p, &q)?)
    } else {
        None
    };
    let ratio = dmax.and_then(|d| (d > 0.0).then(|| distance / d));
    Ok(Report::new(json!({
        "distance": distance,
        "dmax_formula": dmax,
        "ratio": ratio,
        "case": boundary_case(&p, &q),
    }))
    .snowflake(factor))
}

fn run_classify(a: &ClassifyArgs) -> Outcome {
    let e = structure(&a.spec)?;
    let ep = structure(&a.spec2)?;
    let mut tol = Tolerances::default();
    if let Some(t) = a.tol {
        if !(t > 0.0 && t < tol.inconclusive) {
            return Err(Failure::Invalid(format!(
                "--tol must lie in (0, {}), got {t}",
                tol.inconclusive
            )));
        }
        tol.matched = t;
    }
    let verdict = qi_equivalent_with(&e, a.m, &ep, a.mp, tol);
    let inconclusive = verdict.equivalent == Equivalence::Inconclusive;
    let mut report = Report::new(serde_json::to_value(&verdict)?);
    report.inconclusive = inconclusive;
    Ok(report)
}

fn space(spec: &str, m: u32) -> std::result::Result<BoundarySpace, Failure> {
    Ok(BoundarySpace::new(structure(spec)?, m)?)
}

fn map(arg: &str) -> std::result::Result<BoundaryMap, Failure> {
    Ok(serde_json::from_str(&json_arg(arg)?)?)
}

fn csv_table(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{header}");
    for r in rows {
        let _ = writeln!(s, "{r}");
    }
    s
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn run_estimate(a: &EstimateArgs) -> Outcome {
    let sp = space(&a.spec, a.m)?;
    let smp = sampler(&a.sampling)?;
    match a.estimator {
        Estimator::Bilipschitz => {
            let f = map(&a.map)?;
            let est = estimate_bilipschitz(&sp, &f, &smp)?;
            let table = csv_table(
                "outer,pairs,a_low,b_high",
                est.curve
                    .iter()
                    .map(|c| format!("{},{},{},{}", c.outer, c.pairs, c.a_low, c.b_high)),
            );
            let mut v = serde_json::to_value(&est)?;
            v["ratio"] = json!(est.ratio());
            Ok(Report::new(v).csv(table))
        }
        Estimator::Qs => {
            let f = map(&a.map)?;
            let grid = vector(&a.ratios)?;
            let qs = estimate_qs_modulus(&sp, &f, &smp, &grid, a.bin_width)?;
            let table = csv_table(
                "t,lo,hi,count,eta",
                qs.bins
                    .iter()
                    .map(|b| format!("{},{},{},{},{}", b.t, b.lo, b.hi, b.count, opt(b.eta))),
            );
            Ok(Report::new(serde_json::to_value(&qs)?).csv(table))
        }
        Estimator::Uniform => {
            let family: Vec<BoundaryMap> = serde_json::from_str(&json_arg(&a.map)?)?;
            let rep = check_uniform(&sp, &family, &smp)?;
            let table = csv_table(
                "kind,s,k,a_low,b_high",
                rep.members
                    .iter()
                    .map(|m| format!("{},{},{},{},{}", m.kind, m.s, m.k, m.a_low, m.b_high)),
            );
            Ok(Report::new(serde_json::to_value(&rep)?).csv(table))
        }
        Estimator::Holder => {
            let f = map(&a.map)?;
            let along = if a.along == "tree" {
                Direction::Tree
            } else {
                Direction::Coord(a.along.parse().map_err(|_| {
                    Failure::Invalid(format!("--along must be a coordinate index or \"tree\", got {:?}", a.along))
                })?)
            };
            let norm = holder_norm_estimate(&sp, &f, a.coord, along, a.beta, &smp)?;
            let declared = f.declared_holder_bound(&sp, a.coord, along, a.beta);
            Ok(Report::new(json!({ "holder_norm": norm, "declared_bound": declared })))
        }
    }
}

fn run_verify(a: &VerifyArgs) -> Outcome {
    let sp = space(&a.spec, a.m)?;
    let smp = sampler(&a.sampling)?;
    let f = map(&a.map)?;
    match a.check {
        Check::Decomposition => {
            let rep = verify_decomposition(&sp, &f, &smp)?;
            Ok(Report::new(serde_json::to_value(&rep)?))
        }
        Check::CoordinateForm => {
            if !(a.tol > 0.0) {
                return Err(Failure::Invalid(format!("--tol must be positive, got {}", a.tol)));
            }
            let rep = verify_coordinate_form(&sp, &f, &smp, a.tol)?;
            let mut v = serde_json::to_value(&rep)?;
            v["passed"] = json!(rep.passed());
            Ok(Report::new(v))
        }
    }
}

fn run_distort(a: &DistortArgs) -> Outcome {
    match a.mode {
        DistortMode::Measure => {
            let sp = space(&a.spec, a.m)?;
            let smp = sampler(&a.sampling)?;
            let f = map(need(&a.map, "map")?)?;
            let rep = estimate_measure_distortion(&sp, &f, &smp, a.samples)?;
            let table = csv_table(
                "box,measure,image_measure,factor,hits,samples",
                rep.boxes.iter().enumerate().map(|(i, b)| {
                    format!("{i},{},{},{},{},{}", b.measure, b.image_measure, b.factor, b.hits, b.samples)
                }),
            );
            Ok(Report::new(serde_json::to_value(&rep)?).csv(table))
        }
        DistortMode::Horoball => {
            let e = structure(&a.spec)?;
            let (from, to) = a
                .log_range
                .split_once(':')
                .and_then(|(x, y)| Some((x.trim().parse::<f64>().ok()?, y.trim().parse::<f64>().ok()?)))
                .ok_or_else(|| Failure::Invalid(format!("--log-range must be from:to, got {:?}", a.log_range)))?;
            if a.steps < 2 || !(to > from) {
                return Err(Failure::Invalid("horoball mode needs steps >= 2 and from < to".into()));
            }
            let levels: Vec<f64> = (0..a.steps)
                .map(|k| (from + (to - from) * k as f64 / (a.steps - 1) as f64).exp())
                .collect();
            let samples = horoball_distortion(&e, a.m, a.cap, &levels)?;
            let fit = fit_distortion(e.alpha1(), &samples)?;
            let table = csv_table(
                "level_distance,constrained,ambient,ratio",
                samples
                    .iter()
                    .map(|s| format!("{},{},{},{}", s.level_distance, s.constrained, s.ambient, s.ratio)),
            );
            Ok(Report::new(json!({ "samples": samples, "fit": fit }))
                .snowflake(1.0)
                .csv(table))
        }
    }
}

fn execute(cmd: &Command) -> Outcome {
    match cmd {
        Command::Dist(a) => run_dist(a),
        Command::Visual(a) => run_visual(a),
        Command::Boundary(a) => run_boundary(a),
        Command::Classify(a) => run_classify(a),
        Command::Estimate(a) => run_estimate(a).map(|r| r.snowflake(1.0)),
        Command::Verify(a) => run_verify(a).map(|r| r.snowflake(1.0)),
        Command::Distort(a) => run_distort(a).map(|r| r.snowflake(1.0)),
    }
}

fn render(cmd: &Command, report: Report) -> std::result::Result<String, Failure> {
    match cmd.output().format {
        Format::Csv => report.csv.ok_or_else(|| {
            Failure::Invalid(format!("csv output is not available for {}", cmd.name()))
        }),
        Format::Json => {
            let mut top = Map::new();
            top.insert("schema".into(), json!(SCHEMA));
            top.insert("command".into(), json!(cmd.name()));
            top.insert("config".into(), cmd.config());
            top.insert("snowflake_factor".into(), json!(report.snowflake_factor));
            for (k, v) in report.result {
                top.insert(k, v);
            }
            Ok(serde_json::to_string(&Value::Object(top))? + "\n")
        }
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// writes the report to `out` or to the `--out` file. Returns the exit
/// status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let cmd = &cli.command;
    let result = execute(cmd).and_then(|r| {
        let inconclusive = r.inconclusive;
        Ok((render(cmd, r)?, inconclusive))
    });
    let (text, inconclusive) = match result {
        Ok(v) => v,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return 1;
        }
    };
    let written = match &cmd.output().out {
        Some(path) => std::fs::write(path, &text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    };
    if let Err(Failure::Io(msg) | Failure::Invalid(msg)) = written {
        let _ = writeln!(err, "error: {msg}");
        return 1;
    }
    if inconclusive {
        3
    } else {
        0
    }
}
