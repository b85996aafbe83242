//! Subcommand definitions and their implementations.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use meanzero_core::extremal::{certify_equality, extremal, Extremal};
use meanzero_core::functional::{
    corollary1_bound, corollary2_bound, kouba_bound, lemma1_monotonicity_check, perfetti_bound, proposition1_bound,
    theorem1_bound, thong_bound,
};
use meanzero_core::sampling::{campaign, CampaignOptions, SamplerConfig, Scheme, RNG_ALGORITHM};
use meanzero_core::search::{extremal_pattern, search_max, Strategy};
use meanzero_core::{Bounds, MonotoneWeight};

use crate::error::{CliError, CliResult};
use crate::report::{
    to_json, BoundsReport, CampaignRecord, CheckRecord, LemmaRecord, LpRecord, Real, SamplerRecord, SearchRecord,
    VerificationReport, SCHEMA_VERSION, TOOL, VERSION,
};
use crate::weight_spec::WeightSpec;

/// Largest gap deficit tolerated before a search result counts as a
/// counterexample to the bound.
pub const SEARCH_GAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "meanzero",
    version,
    about = "Sharp weighted bounds for bounded zero-mean functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the weighted bound and the classical comparison bounds.
    Bounds(BoundsArgs),
    /// Dump an extremal function and its primitive as CSV.
    Extremal(ExtremalArgs),
    /// Run a randomized verification campaign plus equality certificates.
    Verify(VerifyArgs),
    /// Maximize the weighted integral over step functions on a uniform grid.
    Search(SearchArgs),
    /// Check that t -> K(phi, t) is nondecreasing on a grid.
    Lemma(LemmaArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct BoxArgs {
    /// Lower bound m (< 0).
    #[arg(long = "m", allow_negative_numbers = true, default_value_t = -1.0)]
    pub lower: f64,
    /// Upper bound M (> 0).
    #[arg(long = "M", allow_negative_numbers = true, default_value_t = 2.0)]
    pub upper: f64,
}

impl BoxArgs {
    fn bounds(&self) -> CliResult<Bounds> {
        Ok(Bounds::new(self.lower, self.upper)?)
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub bounds: BoxArgs,
    /// Weight: pow:<p>, log:<eps> or table:<path>.
    #[arg(long, default_value = "pow:2")]
    pub phi: WeightSpec,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    F0,
    F1,
}

impl From<Which> for Extremal {
    fn from(w: Which) -> Self {
        match w {
            Which::F0 => Extremal::F0,
            Which::F1 => Extremal::F1,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExtremalArgs {
    #[command(flatten)]
    pub bounds: BoxArgs,
    #[arg(long, value_enum, default_value_t = Which::F0)]
    pub which: Which,
    /// Number of uniform grid intervals; breakpoints are always included.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    UniformProject,
    VertexJitter,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::UniformProject => Scheme::UniformProject,
            SchemeArg::VertexJitter => Scheme::VertexJitter,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub bounds: BoxArgs,
    /// Weight to check; repeat for several weights.
    #[arg(long, default_value = "pow:2")]
    pub phi: Vec<WeightSpec>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 64)]
    pub cells: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SchemeArg::VertexJitter)]
    pub scheme: SchemeArg,
    /// Evaluate samples on the current thread only.
    #[arg(long)]
    pub serial: bool,
    /// Also run f0 and f1 through the campaign checks.
    #[arg(long)]
    pub include_extremals: bool,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Record wall-clock time in the report (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Vertex,
    Local,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub bounds: BoxArgs,
    #[arg(long, default_value = "pow:2")]
    pub phi: WeightSpec,
    #[arg(long, default_value_t = 12)]
    pub cells: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Vertex)]
    pub strategy: StrategyArg,
    /// Restarts for local search.
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long, default_value = "pow:2")]
    pub phi: WeightSpec,
    /// Right end T of the checked interval (0, T].
    #[arg(long = "T", default_value_t = 1.0)]
    pub domain: f64,
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[arg(long)]
    pub json: bool,
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    let text = match &cli.command {
        Command::Bounds(a) => cmd_bounds(a),
        Command::Extremal(a) => cmd_extremal(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Search(a) => cmd_search(a),
        Command::Lemma(a) => cmd_lemma(a),
    };
    let (text, outcome) = match text {
        Ok(t) => (t, Ok(())),
        Err(Failure { output, error }) => (output, Err(error)),
    };
    stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush())
        .map_err(|e| CliError::Io(format!("cannot write to standard output: {e}")))?;
    outcome
}

/// An error together with whatever output was produced before it.
struct Failure {
    output: String,
    error: CliError,
}

impl From<CliError> for Failure {
    fn from(error: CliError) -> Self {
        Failure {
            output: String::new(),
            error,
        }
    }
}

impl From<meanzero_core::Error> for Failure {
    fn from(e: meanzero_core::Error) -> Self {
        CliError::from(e).into()
    }
}

type Outcome = Result<String, Failure>;

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Weights for `bounds` live on `[0, h*]`, the range of every admissible
/// primitive; table weights keep their own domain.
fn weight_for(spec: &WeightSpec, bounds: &Bounds) -> CliResult<MonotoneWeight> {
    spec.build(bounds.peak())
}

pub fn bounds_report(args: &BoundsArgs) -> CliResult<BoundsReport> {
    let b = args.bounds.bounds()?;
    let w = weight_for(&args.phi, &b)?;
    let corollary1 = match args.phi.exponent() {
        Some(p) => {
            let bound = corollary1_bound(&b, p)?;
            Some(LpRecord {
                p: Real(p),
                bound: Real(bound),
                coefficient: Real(bound / b.peak()),
            })
        }
        None => None,
    };
    Ok(BoundsReport {
        schema: SCHEMA_VERSION,
        tool: TOOL.into(),
        version: VERSION.into(),
        command: "bounds".into(),
        bounds: (&b).into(),
        weight: args.phi.to_string(),
        theorem1: Real(theorem1_bound(&b, &w)?),
        corollary1,
        corollary2: Real(corollary2_bound(&b)),
        proposition1: Real(proposition1_bound(&b)),
        perfetti: Real(perfetti_bound(&b)),
        thong: Real(thong_bound(&b)),
        kouba: Real(kouba_bound(&b)),
    })
}

fn cmd_bounds(args: &BoundsArgs) -> Outcome {
    let r = bounds_report(args)?;
    if args.json {
        return Ok(to_json(&r));
    }
    let mut s = String::new();
    let mut line = |k: &str, v: f64| writeln!(s, "{k:<14} {v:?}").expect("write to string");
    line("m", r.bounds.m.0);
    line("M", r.bounds.upper.0);
    line("peak", r.bounds.peak.0);
    line("crossover0", r.bounds.crossover0.0);
    line("crossover1", r.bounds.crossover1.0);
    line("theorem1", r.theorem1.0);
    if let Some(c) = &r.corollary1 {
        line("corollary1", c.bound.0);
        line("coefficient", c.coefficient.0);
    }
    line("corollary2", r.corollary2.0);
    line("proposition1", r.proposition1.0);
    line("perfetti", r.perfetti.0);
    line("thong", r.thong.0);
    line("kouba", r.kouba.0);
    Ok(format!("weight         {}\n{s}", r.weight))
}

/// CSV `x,f,J` on the uniform grid merged with the exact breakpoints.
/// Numbers use the shortest representation that parses back exactly.
pub fn extremal_csv(bounds: &Bounds, which: Extremal, grid: usize) -> CliResult<String> {
    if grid == 0 {
        return Err(CliError::Config("grid must be >= 1".into()));
    }
    let f = extremal(bounds, which);
    let j = f.primitive();
    let mut xs: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
    xs.extend_from_slice(f.breakpoints());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut out = String::from("x,f,J\n");
    for x in xs {
        writeln!(out, "{x:?},{:?},{:?}", f.eval(x), j.eval(x)).expect("write to string");
    }
    Ok(out)
}

fn cmd_extremal(args: &ExtremalArgs) -> Outcome {
    let b = args.bounds.bounds()?;
    let csv = extremal_csv(&b, args.which.into(), args.grid)?;
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}

/// Runs the campaign and the equality certificates for every weight.
pub fn verification_report(args: &VerifyArgs) -> CliResult<VerificationReport> {
    let started = Instant::now();
    let b = args.bounds.bounds()?;
    if args.phi.is_empty() {
        return Err(CliError::Config("at least one --phi is required".into()));
    }
    let weights = args
        .phi
        .iter()
        .map(|s| weight_for(s, &b))
        .collect::<CliResult<Vec<_>>>()?;
    let cfg = SamplerConfig::new(args.cells, args.seed, args.scheme.into())?;

    let mut checks = Vec::new();
    for (spec, w) in args.phi.iter().zip(&weights) {
        let cert = certify_equality(&b, w)?;
        checks.extend(CheckRecord::from_certificate(&spec.to_string(), &cert));
    }
    let opts = CampaignOptions {
        include_extremals: args.include_extremals,
        parallel: !args.serial,
    };
    let report = campaign(&b, &weights, args.samples, &cfg, opts)?;
    let passed = report.violations == 0 && checks.iter().all(|c| c.pass);

    Ok(VerificationReport {
        schema: SCHEMA_VERSION,
        tool: TOOL.into(),
        version: VERSION.into(),
        command: "verify".into(),
        bounds: (&b).into(),
        weights: args.phi.iter().map(ToString::to_string).collect(),
        sampler: SamplerRecord::new(&cfg, RNG_ALGORITHM),
        checks,
        campaign: CampaignRecord::from(&report),
        passed,
        timing_ms: args.timing.then(|| started.elapsed().as_millis() as u64),
    })
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let r = verification_report(args)?;
    let json = to_json(&r);
    let output = match &args.report {
        Some(path) => {
            write_file(path, &json)?;
            format!(
                "{} samples, {} violations, min slack {:?}: {}\n",
                r.campaign.samples,
                r.campaign.violations,
                r.campaign.min_slack.0,
                if r.passed { "PASS" } else { "FAIL" }
            )
        }
        None => json,
    };
    if r.passed {
        return Ok(output);
    }
    let failed: Vec<&str> = r
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .chain(
            r.campaign
                .checks
                .iter()
                .filter(|c| c.violations > 0)
                .map(|c| c.name.as_str()),
        )
        .collect();
    Err(Failure {
        output,
        error: CliError::Violation(format!("failed checks: {}", failed.join(", "))),
    })
}

pub fn search_record(args: &SearchArgs) -> CliResult<SearchRecord> {
    let b = args.bounds.bounds()?;
    let w = weight_for(&args.phi, &b)?;
    let (strategy, name) = match args.strategy {
        StrategyArg::Vertex => (Strategy::VertexEnum, "vertex"),
        StrategyArg::Local => (
            Strategy::LocalSearch {
                restarts: args.restarts,
                seed: args.seed,
            },
            "local",
        ),
    };
    let r = search_max(&b, &w, args.cells, strategy)?;
    let pattern = extremal_pattern(r.best.values(), &b);
    Ok(SearchRecord::new(&b, &args.phi.to_string(), name, &r, pattern))
}

fn cmd_search(args: &SearchArgs) -> Outcome {
    let r = search_record(args)?;
    let output = serde_json::to_string(&r).expect("report types serialize") + "\n";
    if r.gap.0 < -SEARCH_GAP_TOLERANCE {
        return Err(Failure {
            output,
            error: CliError::Violation(format!("search value exceeds the bound by {}", -r.gap.0)),
        });
    }
    Ok(output)
}

pub fn lemma_record(args: &LemmaArgs) -> CliResult<LemmaRecord> {
    let w = args.phi.build(args.domain)?;
    let r = lemma1_monotonicity_check(&w, args.domain, args.grid)?;
    Ok(LemmaRecord {
        schema: SCHEMA_VERSION,
        command: "lemma".into(),
        weight: args.phi.to_string(),
        domain: Real(r.domain),
        grid: r.grid,
        violations: r.violations,
        max_violation: Real(r.max_violation),
        flat_steps: r.flat_steps,
        constant_plateau: r.constant_plateau,
        samples: r.samples.iter().map(|&(t, k)| (Real(t), Real(k))).collect(),
    })
}

fn cmd_lemma(args: &LemmaArgs) -> Outcome {
    let r = lemma_record(args)?;
    let output = if args.json {
        to_json(&r)
    } else {
        format!(
            "weight {} on (0, {:?}]: {} grid points, {} violations (max {:?}), {} flat steps{}\n",
            r.weight,
            r.domain.0,
            r.grid,
            r.violations,
            r.max_violation.0,
            r.flat_steps,
            if r.constant_plateau { ", constant plateau" } else { "" }
        )
    };
    if r.violations > 0 {
        return Err(Failure {
            output,
            error: CliError::Violation(format!("K is not monotone: {} violations", r.violations)),
        });
    }
    Ok(output)
}
