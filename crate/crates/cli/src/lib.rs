//! Batch front end for region scans, secrecy-capacity search, coding
//! simulations and the binary example.
//!
//! Every output carries a `config` echo of the job that produced it. The
//! echo never includes output paths, so rerunning a job (see `rerun`)
//! reproduces the same bytes wherever they are written.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use secbc::channels::{
    binary_example_model, binary_secrecy_capacity_oracle, parse_model_config, ChannelModel,
    SideInfoMode,
};
use secbc::codec::{build_codebook, calibrate_eps, CodeParams};
use secbc::regions::{
    eval_bounds, extend_to_full_joint, region_scan, secrecy_capacity, AuxiliaryJoint, BoundSet,
    CapacityEstimate, FrontierPoint, Theorem, Variant,
};
use secbc::simharness::{run_trials_with_codebook, SimConfig, SimReport, CSV_HEADER, DEFAULT_ENUMERATION_CAP};
use secbc::Exec;

/// Environment variable setting the worker count. Results do not depend on it.
pub const THREADS_ENV: &str = "SECBC_THREADS";

/// Prefix of the config echo line in CSV and plot outputs.
pub const ECHO_PREFIX: &str = "# config: ";

pub const REGION_HEADER: &str = "theorem,r0,r1,re,clamped,seed,candidate_index";

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, inputs or model files (exit 2).
    Config(String),
    /// Failure writing outputs (exit 1).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<secbc::Error> for CliError {
    fn from(e: secbc::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Where the channel model comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSource {
    BinaryExample { p: f64, q: f64 },
    File { path: PathBuf },
}

impl ModelSource {
    pub fn load(&self) -> CliResult<ChannelModel> {
        match self {
            ModelSource::BinaryExample { p, q } => Ok(binary_example_model(*p, *q)?),
            ModelSource::File { path } => {
                let text = fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read model file {}: {e}", path.display())))?;
                Ok(parse_model_config(&text)?)
            }
        }
    }
}

/// A fully specified job, excluding output paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum JobConfig {
    Region {
        model: ModelSource,
        theorem: Theorem,
        budget: usize,
        seed: u64,
    },
    Capacity {
        model: ModelSource,
        variant: Variant,
        budget: usize,
        seed: u64,
    },
    Simulate {
        model: ModelSource,
        scheme: SideInfoMode,
        n: usize,
        blocks: usize,
        trials: usize,
        seed: u64,
        /// Fraction of the bound caps used as code rates.
        rate_fraction: f64,
        gamma: f64,
        gamma1: f64,
        /// Fixed typicality tolerance; `None` calibrates it per codebook.
        eps: Option<f64>,
        calibration_samples: usize,
        /// Auxiliary distribution file; `None` uses the binary-example
        /// optimum for the preset and a search otherwise.
        aux: Option<PathBuf>,
        /// Search budget when the auxiliary comes from a search.
        budget: usize,
        enumeration_cap: u64,
    },
    Example {
        p: f64,
        q: f64,
        /// Optional search cross-check: `(budget, seed)`.
        search: Option<(usize, u64)>,
    },
}

impl JobConfig {
    /// Single-line JSON echo.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    pub fn from_echo(json: &str) -> CliResult<Self> {
        serde_json::from_str(json).map_err(|e| config_err(format!("unreadable config echo: {e}")))
    }

    /// Find the config echo in a file written by any job.
    pub fn from_output(text: &str) -> CliResult<Self> {
        if let Some(line) = text.lines().find_map(|l| l.strip_prefix(ECHO_PREFIX)) {
            return Self::from_echo(line);
        }
        let v: serde_json::Value = serde_json::from_str(text)
            .map_err(|_| config_err("no config echo found in input"))?;
        let cfg = v.get("config").ok_or_else(|| config_err("no config echo found in input"))?;
        serde_json::from_value(cfg.clone()).map_err(|e| config_err(format!("unreadable config echo: {e}")))
    }
}

/// Output destinations of a job.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    /// Main output; stdout when absent.
    pub out: Option<PathBuf>,
    /// Region: JSON sidecar with the auxiliary distributions.
    pub json: Option<PathBuf>,
    /// Simulate: one-row CSV summary.
    pub csv: Option<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(name = "secbc", version, about = "Secrecy regions and coding simulations for broadcast channels with side information")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Built-in model (only `binary_example`).
    #[arg(long, conflicts_with = "model")]
    preset: Option<String>,
    /// Crossover probability of channel 1 (preset).
    #[arg(long)]
    p: Option<f64>,
    /// Crossover probability of channel 2 (preset).
    #[arg(long)]
    q: Option<f64>,
    /// Flat key-value model file.
    #[arg(long)]
    model: Option<PathBuf>,
}

impl ModelArgs {
    fn source(&self) -> CliResult<ModelSource> {
        match (&self.preset, &self.model) {
            (Some(name), None) => {
                if name != "binary_example" {
                    return Err(config_err(format!("unknown preset {name:?}")));
                }
                let (p, q) = self
                    .p
                    .zip(self.q)
                    .ok_or_else(|| config_err("preset binary_example needs --p and --q"))?;
                Ok(ModelSource::BinaryExample { p, q })
            }
            (None, Some(path)) => {
                if self.p.is_some() || self.q.is_some() {
                    return Err(config_err("--p/--q only apply to --preset"));
                }
                Ok(ModelSource::File { path: path.clone() })
            }
            _ => Err(config_err("give exactly one of --preset or --model")),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Estimate the maximal points of a capacity-equivocation region.
    Region {
        #[command(flatten)]
        model: ModelArgs,
        /// T1 .. T7.
        #[arg(long)]
        theorem: String,
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        seed: u64,
        /// CSV output (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON sidecar including the auxiliary distributions.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Estimate a secrecy capacity by auxiliary search.
    Capacity {
        #[command(flatten)]
        model: ModelArgs,
        /// n, c, nf or cf.
        #[arg(long)]
        variant: String,
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        seed: u64,
        /// JSON output with the maximising auxiliary.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo error rates and exact equivocation of a coding scheme.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// n, c, nf or cf.
        #[arg(long)]
        scheme: String,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.8)]
        rate_fraction: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma1: f64,
        /// Typicality tolerance; calibrated per codebook when absent.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 4000)]
        calibration_samples: usize,
        /// Auxiliary distribution as JSON.
        #[arg(long)]
        aux: Option<PathBuf>,
        /// Search budget when no auxiliary is given for a non-preset model.
        #[arg(long, default_value_t = 20000)]
        budget: usize,
        /// Exact-equivocation state limit; 0 skips it.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP as u64)]
        enumeration_cap: u64,
        /// JSON report (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// One-row CSV summary.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Closed-form secrecy capacity of the binary example.
    Example {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// Also run the search with this budget (needs --seed).
        #[arg(long, requires = "seed")]
        budget: Option<usize>,
        #[arg(long, requires = "budget")]
        seed: Option<u64>,
    },
    /// Gnuplot columns `r1 re` of the region frontier, one block per R0 level.
    Plotdata {
        /// Region CSV.
        #[arg(long)]
        input: PathBuf,
        /// R0 levels (comma separated); each block is the frontier of the
        /// region slice at that common rate.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        r0: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun the job echoed in an output file.
    Rerun {
        /// Any file written by region, capacity, simulate or example.
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_theorem(s: &str) -> CliResult<Theorem> {
    Theorem::parse(s).ok_or_else(|| config_err(format!("unknown theorem {s:?} (expected T1..T7)")))
}

fn parse_variant(s: &str) -> CliResult<Variant> {
    Variant::parse(s).ok_or_else(|| config_err(format!("unknown variant {s:?} (expected n, c, nf, cf)")))
}

fn parse_scheme(s: &str) -> CliResult<SideInfoMode> {
    SideInfoMode::from_tag(s).ok_or_else(|| config_err(format!("unknown scheme {s:?} (expected n, c, nf, cf)")))
}

/// Parsed job. Plotdata is a pure transform and has no job config.
enum Invocation {
    Job(JobConfig, Outputs),
    Plot { input: PathBuf, levels: Vec<f64>, out: Option<PathBuf> },
}

fn interpret(cmd: Cmd) -> CliResult<Invocation> {
    let job = match cmd {
        Cmd::Region { model, theorem, budget, seed, out, json } => Invocation::Job(
            JobConfig::Region { model: model.source()?, theorem: parse_theorem(&theorem)?, budget, seed },
            Outputs { out, json, csv: None },
        ),
        Cmd::Capacity { model, variant, budget, seed, out } => Invocation::Job(
            JobConfig::Capacity { model: model.source()?, variant: parse_variant(&variant)?, budget, seed },
            Outputs { out, ..Outputs::default() },
        ),
        Cmd::Simulate {
            model,
            scheme,
            n,
            blocks,
            trials,
            seed,
            rate_fraction,
            gamma,
            gamma1,
            eps,
            calibration_samples,
            aux,
            budget,
            enumeration_cap,
            out,
            csv,
        } => Invocation::Job(
            JobConfig::Simulate {
                model: model.source()?,
                scheme: parse_scheme(&scheme)?,
                n,
                blocks,
                trials,
                seed,
                rate_fraction,
                gamma,
                gamma1,
                eps,
                calibration_samples,
                aux,
                budget,
                enumeration_cap,
            },
            Outputs { out, csv, json: None },
        ),
        Cmd::Example { p, q, budget, seed } => Invocation::Job(
            JobConfig::Example { p, q, search: budget.zip(seed) },
            Outputs::default(),
        ),
        Cmd::Plotdata { input, r0, out } => Invocation::Plot { input, levels: r0, out },
        Cmd::Rerun { from, out, json, csv } => {
            let text = fs::read_to_string(&from)
                .map_err(|e| config_err(format!("cannot read {}: {e}", from.display())))?;
            Invocation::Job(JobConfig::from_output(&text)?, Outputs { out, json, csv })
        }
    };
    Ok(job)
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write stdout: {e}"))),
    }
}

#[derive(Serialize)]
struct RegionSidecar<'a> {
    config: &'a JobConfig,
    frontier: &'a [FrontierPoint],
}

#[derive(Serialize)]
struct CapacityOutput<'a> {
    config: &'a JobConfig,
    estimate: &'a CapacityEstimate,
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    config: &'a JobConfig,
    /// Tolerance actually used by the decoders.
    eps: f64,
    eps_calibrated: bool,
    bounds: BoundSet,
    report: &'a SimReport,
}

/// Render the region CSV (config echo, header, one row per frontier point).
pub fn region_csv(job: &JobConfig, seed: u64, frontier: &[FrontierPoint]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(REGION_HEADER.split(','))
        .map_err(|e| CliError::Io(e.to_string()))?;
    for p in frontier {
        w.write_record([
            p.bounds.theorem.name().to_string(),
            p.triple.r0.to_string(),
            p.triple.r1.to_string(),
            p.triple.re.to_string(),
            p.bounds.clamped.to_string(),
            seed.to_string(),
            p.candidate_index.to_string(),
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(format!("{ECHO_PREFIX}{}\n{}", job.echo(), String::from_utf8(body).expect("ascii")))
}

fn fmt_value(x: f64) -> String {
    // avoid printing "-0" for a clamped zero
    if x == 0.0 {
        "0".into()
    } else {
        x.to_string()
    }
}

fn execute(job: &JobConfig, outs: &Outputs) -> CliResult<()> {
    match job {
        JobConfig::Region { model, theorem, budget, seed } => {
            let m = model.load()?;
            let frontier = region_scan(&m, *theorem, *budget, *seed)?;
            write_output(outs.out.as_deref(), &region_csv(job, *seed, &frontier)?)?;
            if let Some(p) = &outs.json {
                let side = RegionSidecar { config: job, frontier: &frontier };
                let text = serde_json::to_string_pretty(&side).expect("frontier serialises") + "\n";
                write_output(Some(p), &text)?;
            }
            Ok(())
        }
        JobConfig::Capacity { model, variant, budget, seed } => {
            let m = model.load()?;
            let est = secrecy_capacity(&m, *variant, *budget, *seed)?;
            write_output(None, &format!("capacity {}\n", fmt_value(est.value)))?;
            if let Some(p) = &outs.out {
                let o = CapacityOutput { config: job, estimate: &est };
                write_output(Some(p), &(serde_json::to_string_pretty(&o).expect("serialises") + "\n"))?;
            }
            Ok(())
        }
        JobConfig::Example { p, q, search } => {
            let oracle = binary_secrecy_capacity_oracle(*p, *q)?;
            let mut text = format!("capacity {}\n", fmt_value(oracle));
            if let Some((budget, seed)) = search {
                let m = binary_example_model(*p, *q)?;
                let est = secrecy_capacity(&m, Variant::Cf, *budget, *seed)?;
                text += &format!("search {}\n", fmt_value(est.value));
            }
            write_output(outs.out.as_deref(), &text)
        }
        JobConfig::Simulate { .. } => simulate(job, outs),
    }
}

fn simulate(job: &JobConfig, outs: &Outputs) -> CliResult<()> {
    let JobConfig::Simulate {
        model,
        scheme,
        n,
        blocks,
        trials,
        seed,
        rate_fraction,
        gamma,
        gamma1,
        eps,
        calibration_samples,
        aux,
        budget,
        enumeration_cap,
    } = job
    else {
        unreachable!("simulate job")
    };
    if !(0.0..=1.0).contains(rate_fraction) {
        return Err(config_err(format!("rate fraction {rate_fraction} outside [0,1]")));
    }
    let m = model.load()?;
    let variant = Variant::parse(scheme.tag()).expect("every scheme has a variant");
    let aux = match (aux, model) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read auxiliary file {}: {e}", path.display())))?;
            serde_json::from_str::<AuxiliaryJoint>(&text)
                .map_err(|e| config_err(format!("unreadable auxiliary file: {e}")))?
        }
        (None, ModelSource::BinaryExample { .. }) => AuxiliaryJoint::binary_example_optimum(),
        (None, ModelSource::File { .. }) => secrecy_capacity(&m, variant, *budget, *seed)?.aux,
    }
    .with_mode(*scheme)?;
    let bounds = eval_bounds(variant.theorem(), &extend_to_full_joint(&aux, &m)?)?;
    let mut params = CodeParams {
        n_block: *n,
        r0: rate_fraction * bounds.r0_cap,
        r1: rate_fraction * bounds.r1_cap,
        gamma: *gamma,
        gamma1: *gamma1,
        eps_typ: eps.unwrap_or(1.0),
        seed: *seed,
    };
    let cb = build_codebook(&m, &aux, &params, *scheme)?;
    if eps.is_none() {
        params.eps_typ = calibrate_eps(&cb, &m, &aux, *calibration_samples, *seed)?;
    }
    let cfg = SimConfig {
        scheme: *scheme,
        params,
        trials: *trials,
        blocks: *blocks,
        seed: *seed,
        enumeration_cap: *enumeration_cap as u128,
    };
    let report = run_trials_with_codebook(&m, &aux, &cb, &cfg, Exec::default())?;
    let o = SimulateOutput { config: job, eps: params.eps_typ, eps_calibrated: eps.is_none(), bounds, report: &report };
    write_output(outs.out.as_deref(), &(serde_json::to_string_pretty(&o).expect("serialises") + "\n"))?;
    if let Some(p) = &outs.csv {
        let text = format!("{ECHO_PREFIX}{}\n{CSV_HEADER}\n{}\n", job.echo(), report.csv_row());
        write_output(Some(p), &text)?;
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct RegionRow {
    #[allow(dead_code)]
    theorem: String,
    r0: f64,
    r1: f64,
    re: f64,
}

/// Frontier of `(r1, re)` over points with `r0 >= level`, sorted by `r1`.
fn slice_frontier(rows: &[RegionRow], level: f64) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.r0 >= level).map(|r| (r.r1, r.re)).collect();
    // descending r1, then descending re: a point survives if its re beats
    // every point with larger r1
    pts.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut front = Vec::new();
    let mut best_re = f64::NEG_INFINITY;
    for (r1, re) in pts {
        if re > best_re {
            front.push((r1, re));
            best_re = re;
        }
    }
    front.reverse();
    front
}

/// Gnuplot blocks for a region CSV. Empty when the frontier is empty.
pub fn plotdata(csv_text: &str, levels: &[f64]) -> CliResult<String> {
    let echo = csv_text.lines().find_map(|l| l.strip_prefix(ECHO_PREFIX));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv_text.as_bytes());
    let header = rdr.headers().map_err(|e| config_err(format!("malformed region CSV: {e}")))?;
    if !header.is_empty() && header.iter().collect::<Vec<_>>().join(",") != REGION_HEADER {
        return Err(config_err(format!("unexpected region CSV header {:?}", header)));
    }
    let rows = rdr
        .deserialize()
        .collect::<Result<Vec<RegionRow>, _>>()
        .map_err(|e| config_err(format!("malformed region CSV: {e}")))?;
    if rows.iter().any(|r| ![r.r0, r.r1, r.re].iter().all(|x| x.is_finite())) {
        return Err(config_err("malformed region CSV: non-finite rate"));
    }
    let mut blocks = Vec::new();
    for &level in levels {
        let front = slice_frontier(&rows, level);
        if front.is_empty() {
            continue;
        }
        let mut b = format!("# r0 = {level}\n# r1 re\n");
        for (r1, re) in front {
            b += &format!("{r1} {re}\n");
        }
        blocks.push(b);
    }
    if blocks.is_empty() {
        return Ok(String::new());
    }
    let head = echo.map(|e| format!("{ECHO_PREFIX}{e}\n")).unwrap_or_default();
    Ok(head + &blocks.join("\n\n"))
}

fn dispatch(inv: Invocation) -> CliResult<()> {
    match inv {
        Invocation::Job(job, outs) => execute(&job, &outs),
        Invocation::Plot { input, levels, out } => {
            let text = fs::read_to_string(&input)
                .map_err(|e| config_err(format!("cannot read {}: {e}", input.display())))?;
            write_output(out.as_deref(), &plotdata(&text, &levels)?)
        }
    }
}

fn thread_count() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(config_err(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

#[cfg(feature = "parallel")]
fn with_threads(threads: Option<usize>, f: impl FnOnce() -> CliResult<()> + Send) -> CliResult<()> {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| config_err(format!("cannot start {n} workers: {e}")))?
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads(_threads: Option<usize>, f: impl FnOnce() -> CliResult<()> + Send) -> CliResult<()> {
    f()
}

/// Parse arguments (including the program name) and run the job.
pub fn try_run<I, T>(argv: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| config_err(e.to_string()))?;
    let threads = thread_count()?;
    let inv = interpret(cli.cmd)?;
    with_threads(threads, move || dispatch(inv))
}

/// Run and map the outcome to a process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    // help and version are successful exits
    if let Err(e) = Cli::try_parse_from(&argv) {
        if !e.use_stderr() {
            let _ = e.print();
            return 0;
        }
    }
    match try_run(argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("secbc: {e}");
            e.exit_code()
        }
    }
}
