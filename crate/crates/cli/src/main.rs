//! `gluing`: build recursive Laakso-expander graphs and run their analyses.

mod commands;
mod spec;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use spec::Common;

const GROWTH_COLUMNS: &str = "\
CSV columns (one row per depth k):
  seed, version      echo of --seed and the tool version
  base               base graph name
  k, n               composition depth and vertex count of G~^k
  mu2, degree        spectral gap and degree of the base graph
  lambda_lo/hi       doubling constant bracket (NA when n is too large)
  c2_lo, c2_hi       bracket on the least Euclidean distortion
  c2_lo_certified    lower bound certified by a dual solution
  c2_lo_status       'certified' or 'stall-detected'
  cp_p<P>_UB         distortion of the best map found into l_P; an upper bound only
  predicted          sqrt(mu2 k / degree) log_degree m";

#[derive(Debug, Parser)]
#[command(name = "gluing", version, about = "Recursive Laakso-expander graphs and their embedding geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Analysis {
    Spectral,
    Doubling,
    Poincare,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the base graph, its stretched and tailed versions and the k-th power.
    ///
    /// With `--out PREFIX` the files PREFIX.base.graph, PREFIX.base.action,
    /// PREFIX.stretched.{graph,layers}, PREFIX.tailed.{graph,layers,action} and
    /// PREFIX.k<K>.graph are written. The base graph file uses s = 0 and t = n - 1.
    /// Vertex and edge counts are printed as CSV.
    Build {
        #[command(flatten)]
        common: Common,
    },
    /// Run one analysis on a graph file and print a CSV report.
    Analyze {
        which: Analysis,
        graph: PathBuf,
        /// Point file for `poincare`.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Tailed base graph G~; `doubling` then checks the covering bounds of G~^k.
        #[arg(long)]
        tailed: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Bracket the least Euclidean distortion of a graph metric.
    ///
    /// Reads GRAPH, or builds G~^k from `--base` and `--k`. `--out` receives the
    /// realizing point configuration.
    C2 {
        graph: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Search for a low-distortion map into l_p for each `--p`.
    ///
    /// `--out` receives the points; with several exponents each file gets a
    /// `.p<P>` suffix.
    Optimize {
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Symmetrization facts and the stretch-increase witness on G~, printed as JSON.
    ///
    /// Uses `--points` if given, otherwise an optimized map of G~ for each `--p`.
    Witness {
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 1500)]
        iters: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Distortion growth along G~^k for k = 0..=K.
    ///
    /// Writes PREFIX.csv and PREFIX.json with `--out PREFIX`, otherwise prints the CSV.
    /// Exits with status 2 if any checked invariant fails.
    #[command(after_help = GROWTH_COLUMNS)]
    Growth {
        #[command(flatten)]
        common: Common,
    },
}

/// Error carrying a process exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub const USAGE: u8 = 1;
    pub const INVARIANT: u8 = 2;
    pub const RESOURCE: u8 = 3;

    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: Self::USAGE, msg: msg.into() }
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Self { code: Self::INVARIANT, msg: msg.into() }
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Self { code: Self::RESOURCE, msg: msg.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<gluing::Error> for Failure {
    fn from(e: gluing::Error) -> Self {
        let code = match e {
            gluing::Error::TooLarge { .. } => Self::RESOURCE,
            gluing::Error::InvariantViolation(_) => Self::INVARIANT,
            _ => Self::USAGE,
        };
        Self { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(Failure::USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Build { common } => common.resolve().and_then(|s| commands::build(&s)),
        Command::Analyze { which, graph, points, tailed, common } => common.resolve().and_then(|s| match which {
            Analysis::Spectral => commands::spectral(graph, &s),
            Analysis::Doubling => commands::doubling(graph, tailed.as_deref(), &s),
            Analysis::Poincare => commands::poincare(graph, points.as_deref(), &s),
        }),
        Command::C2 { graph, common } => common.resolve().and_then(|s| commands::c2(graph.as_deref(), &s)),
        Command::Optimize { graph, dim, iters, restarts, common } => common
            .resolve()
            .and_then(|s| commands::optimize(graph.as_deref(), *dim, *iters, *restarts, &s)),
        Command::Witness { points, dim, iters, common } => {
            common.resolve().and_then(|s| commands::witness(points.as_deref(), *dim, *iters, &s))
        }
        Command::Growth { common } => common.resolve().and_then(|s| commands::growth(&s)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
