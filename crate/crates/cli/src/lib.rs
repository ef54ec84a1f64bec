//! Library side of the `immunolearn` command-line tool: configuration,
//! subcommands and output rendering, kept free of process concerns so the
//! binary is a thin shell.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use clap::{Args, Parser, Subcommand};

pub use config::{ModelKind, OutputFormat, RunConfig};
pub use error::CliError;
pub use output::Output;

#[derive(Debug, Parser)]
#[command(name = "immunolearn", version, about = "Simulate and analyse the immune-learning Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run replicate trajectories from the all-zero start.
    Simulate(CommonArgs),
    /// Draw exact samples of the matrix chain's invariant law.
    SampleSteady(CommonArgs),
    /// Evaluate the closed forms for the configured parameters.
    Analyze(CommonArgs),
    /// Cross-check closed forms and sampler against the dense oracle.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Restrict every grid to its smallest sizes.
        #[arg(long)]
        small: bool,
    },
    /// Emit the tables behind the count-versus-time and transition-time plots.
    FigureData(CommonArgs),
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Simulate(c) | Command::SampleSteady(c) | Command::Analyze(c) | Command::FigureData(c) => c,
            Command::Verify { common, .. } => common,
        }
    }
}

/// Flags shared by every subcommand. Each overrides the matching key of
/// `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat TOML (or JSON) file with any of the keys below.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Rows (receptor clones).
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Columns (antigens).
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Reset rate of the chain.
    #[arg(long)]
    pub p: Option<f64>,
    /// Discrete-model deletion probability.
    #[arg(long)]
    pub pd: Option<f64>,
    /// Discrete-model per-entry mutation probability.
    #[arg(long)]
    pub pm: Option<f64>,
    #[arg(long = "lambda-m")]
    pub lambda_m: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; stdout when absent.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads (does not change results).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Time-grid points for figure-data.
    #[arg(long = "grid-points")]
    pub grid_points: Option<usize>,
}

impl CommonArgs {
    fn as_config(&self) -> RunConfig {
        RunConfig {
            model: self.model,
            m: self.m,
            n: self.n,
            p: self.p,
            pd: self.pd,
            pm: self.pm,
            lambda_m: self.lambda_m,
            alpha: self.alpha,
            replicates: self.replicates,
            horizon: self.horizon,
            seed: self.seed,
            format: self.format,
            out: self.out.clone(),
            threads: self.threads,
            grid_points: self.grid_points,
        }
    }

    /// The config file (if any) overridden by the flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        Ok(base.overlay(&self.as_config()))
    }
}

/// Runs `command` with `cfg` on a pool of `cfg.threads` workers (all cores
/// when unset).
pub fn run(command: &Command, cfg: &RunConfig) -> Result<Output, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| match command {
        Command::Simulate(_) => commands::simulate(cfg),
        Command::SampleSteady(_) => commands::sample_steady(cfg),
        Command::Analyze(_) => commands::analyze(cfg),
        Command::Verify { small, .. } => commands::verify(cfg, *small),
        Command::FigureData(_) => commands::figure_data(cfg),
    })
}

/// Parses, runs and writes; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = cli.command.common().resolve().and_then(|cfg| {
        let out = run(&cli.command, &cfg)?;
        out.emit(cfg.out.as_deref(), cfg.format())?;
        if out.oracle_failures.is_empty() {
            Ok(())
        } else {
            Err(CliError::OracleMismatch(out.oracle_failures.join("; ")))
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("immunolearn: {e}");
            e.exit_code()
        }
    }
}
