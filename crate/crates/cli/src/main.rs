//! `epsdd`: batch front end for the epsilon-drawdown pipeline.
//!
//! Exit codes: 0 on success, 1 when an analysis step fails, 2 for usage,
//! configuration and file-system problems.

mod config;
mod data;
mod output;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "epsdd", version, about = "Epsilon-drawdown detection, tail fits and Dragon-King tests")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct GlobalArgs {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Contracts processed concurrently.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Bar width in seconds.
    #[arg(long, global = true)]
    dt: Option<u32>,
    #[arg(long, global = true)]
    eps0: Option<f64>,
    /// Significance threshold of the outlier tests.
    #[arg(long, global = true)]
    p0: Option<f64>,
}

#[derive(Args, Clone, Default)]
pub struct SampleArgs {
    /// Analyze a single-column CSV sample instead of detected events.
    #[arg(long)]
    pub sample: Option<PathBuf>,
    /// Column to read from the sample file (default: the first).
    #[arg(long)]
    pub column: Option<String>,
    /// Fixed tail lower bound for the outlier tests on a sample.
    #[arg(long)]
    pub x_m: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Clean tick files and write per-contract reports.
    Clean,
    /// Build bars, detect events and summarize them.
    Detect,
    /// Fit Pareto tails to event characteristics or a sample.
    Fit(SampleArgs),
    /// Run the modified and original DK tests.
    Dk(SampleArgs),
    /// Run the U-test on the pooled tail or a sample.
    Utest {
        #[command(flatten)]
        sample: SampleArgs,
        /// Number of top ranks to test; chosen automatically when absent.
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Tail dependence between event characteristics or a paired sample.
    Taildep {
        /// CSV with columns `x` and `y`.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Reshuffled-returns null model.
    Nullsim,
    /// Emit a synthetic sample with its manifest.
    Synth(SynthArgs),
    /// Every stage in order: clean, detect, fit, dk, utest, taildep, nullsim.
    RunAll,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SynthKind {
    Pareto,
    Exponential,
    Weibull,
    Spliced,
}

#[derive(Args, Clone)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub kind: SynthKind,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x_m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 0.9)]
    pub shape: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 10.0)]
    pub splice: f64,
    /// Outliers added as multiples of the largest value on the
    /// exponential scale, e.g. `2,2.2`.
    #[arg(long, value_delimiter = ',')]
    pub inject: Vec<f64>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Analysis(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Analysis(_) => 1,
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;

pub trait Classify<T> {
    fn usage(self) -> Outcome<T>;
    fn analysis(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Outcome<T> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
    fn analysis(self) -> Outcome<T> {
        self.map_err(|e| Failure::Analysis(e.into()))
    }
}

fn load_config(g: &GlobalArgs, needs_config: bool) -> Outcome<RunConfig> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path).usage()?,
        None if needs_config => {
            return Err(Failure::Usage(anyhow::anyhow!("this command needs --config <path>")));
        }
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        out: g.out.clone(),
        seed: g.seed,
        workers: g.workers,
        dt: g.dt,
        eps0: g.eps0,
        p0: g.p0,
    });
    cfg.validate().usage()?;
    if let Some(missing) = cfg.missing_input() {
        return Err(Failure::Usage(anyhow::anyhow!("input file not found: {}", missing.display())));
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Outcome<()> {
    let needs_config = match &cli.command {
        Command::Fit(s) | Command::Dk(s) => s.sample.is_none(),
        Command::Utest { sample, .. } => sample.sample.is_none(),
        Command::Taildep { pairs } => pairs.is_none(),
        Command::Synth(_) => false,
        _ => true,
    };
    let cfg = load_config(&cli.global, needs_config)?;
    let ctx = stages::Context::new(cfg)?;
    match cli.command {
        Command::Clean => ctx.clean(),
        Command::Detect => ctx.detect(),
        Command::Fit(s) => ctx.fit(&s),
        Command::Dk(s) => ctx.dk(&s),
        Command::Utest { sample, rank } => ctx.utest(&sample, rank),
        Command::Taildep { pairs } => ctx.taildep(pairs.as_deref()),
        Command::Nullsim => ctx.nullsim(),
        Command::Synth(args) => ctx.synth(&args),
        Command::RunAll => ctx.run_all(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(e) | Failure::Analysis(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}
