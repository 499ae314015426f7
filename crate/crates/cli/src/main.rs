//! `karc`: enumerate, trace, build, query, verify and plot the region of
//! stochastic-matrix eigenvalues.

mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

#[derive(Parser)]
#[command(name = "karc", version, about = "Boundary arcs of the stochastic eigenvalue region")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// The order, given either positionally or with `--n`.
#[derive(Args)]
struct Order {
    #[arg(value_name = "N")]
    n: Option<u64>,
    #[arg(long = "n", value_name = "N", conflicts_with = "n")]
    n_flag: Option<u64>,
}

impl Order {
    fn get(&self) -> Result<u64, CliError> {
        self.n
            .or(self.n_flag)
            .ok_or_else(|| CliError::Usage("missing order N".into()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the Farey sequence of order N
    Farey {
        #[command(flatten)]
        order: Order,
    },
    /// Classify the upper-half Farey pairs: "p/q r/s TYPE q s d"
    Classify {
        #[command(flatten)]
        order: Order,
    },
    /// Construct the upper-half arcs and write .dat/.meta files
    Arcs {
        #[command(flatten)]
        order: Order,
        /// Only this pair, written a/b,c/d
        #[arg(long)]
        pair: Option<String>,
        /// Sample budget per written arc
        #[arg(long, default_value_t = karc_core::io::DEFAULT_SAMPLE_BUDGET)]
        samples: usize,
        #[arg(long, default_value = "karc-out")]
        out: PathBuf,
    },
    /// Build the closed region boundary and write its descriptor
    Region {
        #[command(flatten)]
        order: Order,
        #[arg(long, default_value_t = karc_core::io::DEFAULT_SAMPLE_BUDGET)]
        samples: usize,
        #[arg(long, default_value = "karc-out")]
        out: PathBuf,
    },
    /// Locate a point z (written a+bi) relative to the region
    Check {
        /// N, or Z when --n is given
        #[arg(value_name = "N", allow_hyphen_values = true)]
        first: String,
        /// The point, written a+bi
        #[arg(value_name = "Z", allow_hyphen_values = true)]
        second: Option<String>,
        #[arg(long = "n", value_name = "N")]
        n_flag: Option<u64>,
        /// Boundary tolerance
        #[arg(long, default_value_t = karc_core::region_builder::RegionConfig::default().weld_tol)]
        tol: f64,
        /// Scale factors for the extremality probe, comma separated
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<f64>,
    },
    /// Run the containment, realization, power/trace and invariant suites
    Verify {
        #[command(flatten)]
        order: Order,
        #[arg(long, default_value_t = commands::DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Containment tolerance
        #[arg(long, default_value_t = commands::CLOUD_TOL)]
        tol: f64,
        /// Where offending matrices and arcs are dumped
        #[arg(long, default_value = "karc-out")]
        out: PathBuf,
    },
    /// Draw the boundary as SVG and/or write the arc data bundle
    Plot {
        #[command(flatten)]
        order: Order,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        dat: Option<PathBuf>,
        /// Draw the lower half too
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = karc_core::io::DEFAULT_SAMPLE_BUDGET)]
        samples: usize,
    },
    /// Eigenvalues and digraph flags of a matrix file
    Spectrum {
        file: PathBuf,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut out = std::io::stdout().lock();
    let out = &mut out;
    match cli.command {
        Command::Farey { order } => commands::farey(out, order.get()?),
        Command::Classify { order } => commands::classify(out, order.get()?),
        Command::Arcs {
            order,
            pair,
            samples,
            out: dir,
        } => commands::arcs(out, order.get()?, pair.as_deref(), samples, &dir),
        Command::Region {
            order,
            samples,
            out: dir,
        } => commands::region(out, order.get()?, samples, &dir),
        Command::Check {
            first,
            second,
            n_flag,
            tol,
            gamma,
        } => {
            let (n, z) = match (second, n_flag) {
                (None, Some(n)) => (n, first),
                (Some(z), None) => (
                    first
                        .parse()
                        .map_err(|_| CliError::Usage(format!("bad order {first:?}")))?,
                    z,
                ),
                (None, None) => return Err(CliError::Usage("missing point Z".into())),
                (Some(_), Some(_)) => {
                    return Err(CliError::Usage("give N either positionally or with --n".into()))
                }
            };
            commands::check(out, n, &z, tol, &gamma)
        }
        Command::Verify {
            order,
            trials,
            seed,
            tol,
            out: dir,
        } => commands::verify(out, order.get()?, trials, seed, tol, &dir),
        Command::Plot {
            order,
            svg,
            dat,
            full,
            samples,
        } => commands::plot(out, order.get()?, svg.as_deref(), dat.as_deref(), full, samples),
        Command::Spectrum { file } => commands::spectrum(out, &file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("karc: {e}");
            ExitCode::from(e.code())
        }
    }
}
