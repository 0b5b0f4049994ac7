//! `minkowski`: command-line front end for minkowski-core.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

#[derive(Parser)]
#[command(name = "minkowski", version, about = "Packing, component and Minkowski-measure reports for fractal models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Model file (JSON)
    #[arg(long)]
    pub model: PathBuf,

    /// Largest number of cylinders any single step may enumerate
    #[arg(long, default_value_t = 5_000_000)]
    pub depth_budget: u64,

    /// CSV output path; the table goes to stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct Schedule {
    /// Base b of the schedule delta_k = b^-k; defaults to the model's natural base
    #[arg(long)]
    pub delta_base: Option<f64>,

    /// Exponent range `k_min..k_max`, inclusive
    #[arg(long, value_parser = parse_range)]
    pub delta_range: Option<(i32, i32)>,
}

fn parse_range(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("expected k_min..k_max, got `{s}`"))?;
    let a: i32 = a.trim().parse().map_err(|e| format!("k_min: {e}"))?;
    let b: i32 = b.trim().parse().map_err(|e| format!("k_max: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

#[derive(Subcommand)]
enum Command {
    /// Exponent sequence and box dimension
    Dim {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: Schedule,
        /// Also fit log N_delta against -log delta over the schedule
        #[arg(long)]
        fit: bool,
    },
    /// Greedy packing counts
    Pack {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: Schedule,
        /// Explicit radii, instead of a schedule
        #[arg(long, value_delimiter = ',')]
        delta: Vec<f64>,
        /// Rank of the sampled cloud; chosen per delta when omitted
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Epsilon-components
    Components {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilon: Vec<f64>,
        /// Rank at which components are resolved; chosen per epsilon when omitted
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Ratio report over epsilon-components
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: Schedule,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilon: Vec<f64>,
    },
    /// Ratio report over rank-k cylinder partitions
    Criterion {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: Schedule,
        #[arg(long, value_delimiter = ',', required = true)]
        ranks: Vec<usize>,
    },
    /// Ratio reports on a model and its image under a bi-Lipschitz map
    Transport {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: Schedule,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilon: Vec<f64>,
        /// Coordinate scaling factors (Euclidean models)
        #[arg(long, value_delimiter = ',', conflicts_with = "permutation")]
        scale: Vec<f64>,
        /// Digit permutation (symbolic models)
        #[arg(long, value_delimiter = ',')]
        permutation: Vec<usize>,
    },
    /// Histogram of local dimensions of rank-k cylinders
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rank: usize,
    },
    /// Largest observed mu(B(x, 2r)) / mu(B(x, r))
    Doubling {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: Schedule,
        /// Rank of the cells approximating balls; chosen from the smallest radius when omitted
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 256)]
        centers: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Dim { common, schedule, fit } => commands::dim(&common, &schedule, fit),
        Command::Pack {
            common,
            schedule,
            delta,
            depth,
        } => commands::pack(&common, &schedule, &delta, depth),
        Command::Components { common, epsilon, depth } => commands::components(&common, &epsilon, depth),
        Command::Verify {
            common,
            schedule,
            epsilon,
        } => commands::verify(&common, &schedule, &epsilon),
        Command::Criterion {
            common,
            schedule,
            ranks,
        } => commands::criterion(&common, &schedule, &ranks),
        Command::Transport {
            common,
            schedule,
            epsilon,
            scale,
            permutation,
        } => commands::transport(&common, &schedule, &epsilon, &scale, &permutation),
        Command::Spectrum { common, rank } => commands::spectrum(&common, rank),
        Command::Doubling {
            common,
            schedule,
            depth,
            centers,
        } => commands::doubling(&common, &schedule, depth, centers),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
