//! `walkdet`: graph generation, chain analysis, exponent bounds, Monte Carlo
//! estimates and likelihood-ratio detection from the command line.
//!
//! Exit codes: 0 success, 2 usage or unreadable input, 3 domain or
//! convergence failure, 4 data that do not match the chain.

mod source;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use source::{generate, ChainArgs};
use walkdet::bounds::{write_bounds_csv, PhysicsBound};
use walkdet::detector::{
    estimate_roc, log_likelihood_ratio, neyman_pearson, simulate_h0, simulate_h1, write_roc_csv, Decision,
    Observations,
};
use walkdet::graphs::{DEFAULT_RGG_RADIUS, DEFAULT_WS_K, DEFAULT_WS_P};
use walkdet::io::{read_states, write_edge_list, write_states};
use walkdet::ldp::entropy_curve;
use walkdet::montecarlo::{sweep, write_sweep_csv};
use walkdet::spectral::{entropy_rate, path_count_rate, rho_extremes};
use walkdet::Error;

#[derive(Parser, Debug)]
#[command(name = "walkdet", version, about = "Detect a random walk on a graph hidden in Gaussian noise")]
struct Cli {
    /// Worker threads for Monte Carlo runs (default: all cores)
    #[arg(long, global = true, env = "WALKDET_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a benchmark graph as an edge list
    GenGraph(GenGraphArgs),
    /// Entropy rate, path growth rate, slope range and threshold of a chain (JSON)
    Analyze(AnalyzeArgs),
    /// Error-exponent bounds over a grid of signal amplitudes
    Bounds(BoundsArgs),
    /// Monte Carlo error-exponent estimates, or one simulated data set
    Simulate(SimulateArgs),
    /// Likelihood-ratio test on an observation file (JSON)
    Detect(DetectArgs),
    /// Empirical ROC of the likelihood-ratio test
    Roc(RocArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GraphKind {
    Cycle,
    Grid,
    Rgg,
    Ws,
}

#[derive(Args, Debug)]
struct GenGraphArgs {
    kind: GraphKind,
    /// Node count (cycle, rgg, ws)
    #[arg(long)]
    n: Option<usize>,
    /// Grid width
    #[arg(long)]
    w: Option<usize>,
    /// Grid height
    #[arg(long)]
    h: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_RGG_RADIUS)]
    radius: f64,
    /// Ring degree (ws)
    #[arg(long, default_value_t = DEFAULT_WS_K)]
    k: usize,
    /// Rewiring probability (ws)
    #[arg(long, default_value_t = DEFAULT_WS_P)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add a self-loop at every node
    #[arg(long)]
    self_loops: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Also write the entropy density s(rho) as CSV
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct BetaGrid {
    /// Explicit amplitudes, comma separated
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["beta_min", "beta_step"])]
    betas: Vec<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    beta_min: f64,
    #[arg(long, default_value_t = 0.05)]
    beta_step: f64,
}

impl BetaGrid {
    fn values(&self) -> Result<Vec<f64>, CliError> {
        let grid = if !self.betas.is_empty() {
            self.betas.clone()
        } else {
            let max = self
                .beta_max
                .ok_or_else(|| CliError::usage("give --betas or --beta-max".into()))?;
            if !(self.beta_step > 0.0) || max < self.beta_min {
                return Err(CliError::usage("need --beta-step > 0 and --beta-max >= --beta-min".into()));
            }
            let count = ((max - self.beta_min) / self.beta_step + 1e-9).floor() as usize;
            // rounded to 12 decimals so that 0.05·3 prints as 0.15
            (0..=count)
                .map(|k| ((self.beta_min + k as f64 * self.beta_step) * 1e12).round() / 1e12)
                .collect()
        };
        if grid.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
            return Err(CliError::usage("amplitudes must be finite and nonnegative".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::usage("amplitudes must be strictly ascending".into()));
        }
        Ok(grid)
    }
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[command(flatten)]
    grid: BetaGrid,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Hypothesis {
    H0,
    H1,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[command(flatten)]
    grid: BetaGrid,
    /// Horizon N
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write one observation matrix here instead of estimating exponents
    /// (uses the first amplitude; H1 also writes FILE.truth)
    #[arg(long)]
    observations: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "h1")]
    hypothesis: Hypothesis,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Observation CSV: one row per state, one column per time step
    #[arg(long)]
    data: PathBuf,
    /// Optional truth file (one 1-indexed state per line), checked against the data
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    beta: f64,
    /// Threshold on the normalized log-likelihood ratio
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    tau: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RocArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    pub fn usage(msg: String) -> Self {
        Self { code: 2, msg }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Parse { .. } | Error::InvalidArgument(_) => 2,
            Error::DimensionMismatch { .. } | Error::StateOutOfRange { .. } => 4,
            _ => 3,
        };
        Self { code, msg: e.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::usage(e.to_string())
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", path.display())))
}

/// Runs `f` on the output file, or on stdout.
fn with_output(path: &Option<PathBuf>, f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut buf = Vec::new();
            f(&mut buf)?;
            let mut w = io::stdout().lock();
            match w.write_all(&buf).and_then(|()| w.flush()) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

/// Pretty JSON with keys in sorted order, so that parsing and re-serializing
/// the output reproduces it byte for byte.
fn write_json(w: &mut dyn Write, value: &impl Serialize) -> Result<(), CliError> {
    let v = serde_json::to_value(value)?;
    serde_json::to_writer_pretty(&mut *w, &v)?;
    writeln!(w)?;
    Ok(())
}

fn gen_graph(a: &GenGraphArgs) -> Result<(), CliError> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| CliError::usage(format!("{flag} is required")));
    let spec = match a.kind {
        GraphKind::Cycle => format!("cycle:{}", need(a.n, "--n")?),
        GraphKind::Grid => format!("grid:{}x{}", need(a.w, "--w")?, need(a.h, "--h")?),
        GraphKind::Rgg => format!("rgg:{}:{}", need(a.n, "--n")?, a.radius),
        GraphKind::Ws => format!("ws:{}:{}:{}", need(a.n, "--n")?, a.k, a.p),
    };
    let mut g = generate(&spec, a.seed)?;
    if a.self_loops {
        g = g.with_self_loops();
    }
    with_output(&a.output, |w| Ok(write_edge_list(w, &g)?))?;
    eprintln!("{} nodes, {} edge records", g.num_nodes(), g.num_edge_records());
    Ok(())
}

#[derive(Serialize)]
struct Report {
    states: usize,
    entropy_rate: f64,
    log_lambda0: f64,
    rho_min: f64,
    rho_max: f64,
    threshold_beta: f64,
    regular_degree: Option<usize>,
    reversible: bool,
    laziness: Option<f64>,
}

fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let loaded = a.chain.load()?;
    let c = &loaded.chain;
    let h = entropy_rate(c);
    let range = rho_extremes(c);
    let report = Report {
        states: c.num_states(),
        entropy_rate: h,
        log_lambda0: path_count_rate(c)?,
        rho_min: range.rho_min,
        rho_max: range.rho_max,
        threshold_beta: (2.0 * h).sqrt(),
        regular_degree: c.uniform_regular_degree(),
        reversible: c.is_reversible(),
        laziness: loaded.laziness,
    };
    if let Some(path) = &a.curve {
        let mut w = create(path)?;
        entropy_curve(c)?.write_csv(&mut w)?;
        w.flush()?;
    }
    with_output(&a.output, |w| write_json(w, &report))
}

fn bounds(a: &BoundsArgs) -> Result<(), CliError> {
    let loaded = a.chain.load()?;
    let grid = a.grid.values()?;
    let pb = PhysicsBound::new(&loaded.chain)?;
    let rows = grid.iter().map(|&b| pb.all_bounds(b)).collect::<walkdet::Result<Vec<_>>>()?;
    if let Some(r) = rows.iter().find(|r| r.asymptotic) {
        eprintln!(
            "warning: beta >= {} exceeds the parametric range; physics_lb uses the high-SNR asymptote",
            r.beta
        );
    }
    with_output(&a.output, |w| match a.format {
        Format::Csv => Ok(write_bounds_csv(w, &rows)?),
        Format::Json => write_json(w, &rows),
    })
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let loaded = a.chain.load()?;
    let c = &loaded.chain;
    let grid = a.grid.values()?;
    if let Some(path) = &a.observations {
        let obs = match a.hypothesis {
            Hypothesis::H0 => simulate_h0(c.num_states(), a.n, a.seed),
            Hypothesis::H1 => simulate_h1(c, grid[0], a.n, a.seed),
        };
        let mut w = create(path)?;
        obs.write_csv(&mut w)?;
        w.flush()?;
        if let Some(truth) = &obs.truth {
            let mut tp = path.clone().into_os_string();
            tp.push(".truth");
            let mut w = create(&PathBuf::from(tp))?;
            write_states(&mut w, truth)?;
            w.flush()?;
        }
        return Ok(());
    }
    let rows = sweep(c, &grid, a.n, a.trials, a.seed)?;
    with_output(&a.output, |w| match a.format {
        Format::Csv => Ok(write_sweep_csv(w, &rows)?),
        Format::Json => write_json(w, &rows),
    })
}

#[derive(Serialize)]
struct Detection {
    ell: f64,
    log_l: f64,
    n: usize,
    tau: f64,
    decision: Decision,
}

fn detect(a: &DetectArgs) -> Result<(), CliError> {
    let loaded = a.chain.load()?;
    let file = File::open(&a.data)
        .map_err(|e| CliError::usage(format!("cannot open {}: {e}", a.data.display())))?;
    let mut obs = Observations::read_csv(BufReader::new(file))?;
    if let Some(path) = &a.truth {
        let file = File::open(path).map_err(|e| CliError::usage(format!("cannot open {}: {e}", path.display())))?;
        obs = obs.with_truth(read_states(BufReader::new(file))?)?;
    }
    let r = log_likelihood_ratio(&loaded.chain, a.beta, &obs)?;
    let out = Detection {
        ell: r.ell,
        log_l: r.log_l,
        n: r.n,
        tau: a.tau,
        decision: neyman_pearson(&r, a.tau),
    };
    with_output(&a.output, |w| write_json(w, &out))
}

fn roc(a: &RocArgs) -> Result<(), CliError> {
    let loaded = a.chain.load()?;
    let points = estimate_roc(&loaded.chain, a.beta, a.n, a.trials, a.seed)?;
    with_output(&a.output, |w| match a.format {
        Format::Csv => Ok(write_roc_csv(w, &points)?),
        Format::Json => write_json(w, &points),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    match &cli.command {
        Command::GenGraph(a) => gen_graph(a),
        Command::Analyze(a) => analyze(a),
        Command::Bounds(a) => bounds(a),
        Command::Simulate(a) => simulate(a),
        Command::Detect(a) => detect(a),
        Command::Roc(a) => roc(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
