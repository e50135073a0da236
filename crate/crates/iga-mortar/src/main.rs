use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iga_mortar::commands::{
    cmd_converge, cmd_infsup, cmd_solve, ConvergeConfig, InfsupConfig, InfsupReport, SolveConfig,
};
use iga_mortar::{CliError, Result};
use iga_mortar_core::assembly::ManufacturedSolution;
use iga_mortar_core::infsup::{DegreeIndexing, RandomMeshSpec};
use iga_mortar_core::spaces::{MultiplierMode, VertexMode};

#[derive(Parser)]
#[command(
    name = "iga-mortar",
    version,
    about = "Isogeometric mortar solver for the biharmonic equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once and report the relative errors.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Uniform refinement levels.
        #[arg(long, default_value_t = 2)]
        levels: usize,
        /// Field samples per element edge in the exported grids.
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
    /// Solve on a range of levels and report observed rates.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Inclusive level range, e.g. `1..5`.
        #[arg(long, default_value = "1..4", value_parser = parse_range)]
        levels: RangeInclusive<usize>,
        /// Add the expected orders to the rate table.
        #[arg(long)]
        reference_slopes: bool,
    },
    /// Corner eigenvalue studies of the multiplier pairing.
    Infsup {
        /// Inclusive range of plotted degrees, e.g. `2..9`.
        #[arg(long, default_value = "2..9", value_parser = parse_range)]
        degrees: RangeInclusive<usize>,
        /// `primal` (plotted p pairs spaces of degree p−1) or `space`.
        #[arg(long, default_value = "primal")]
        indexing: String,
        /// Run the perturbed-mesh study instead of the sweep.
        #[arg(long)]
        random: bool,
        /// Plotted degree of the perturbed-mesh study.
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Elements of the unperturbed uniform mesh.
        #[arg(long, default_value_t = 16)]
        elements: usize,
        #[arg(long, default_value_t = 22)]
        bins: usize,
        #[arg(long, default_value_t = 0.55)]
        hist_min: f64,
        #[arg(long, default_value_t = 0.66)]
        hist_max: f64,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Built-in name (square2, square4, square12, quartercircle3) or a JSON file.
    #[arg(long, default_value = "square2")]
    geometry: String,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// `c2` or `c0`.
    #[arg(long, default_value = "c2")]
    vertex_mode: String,
    /// `merged`, `unmerged` or `none`.
    #[arg(long, default_value = "merged")]
    multiplier: String,
    /// `coscos`, `bubble`, `zero` or `x<a>y<b>`.
    #[arg(long, default_value = "coscos")]
    exact: String,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> std::result::Result<RangeInclusive<usize>, String> {
    let bad = || format!("expected `a..b` or a single number, got `{s}`");
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

fn named<T>(what: &str, s: &str, parse: impl Fn(&str) -> Option<T>) -> Result<T> {
    parse(s).ok_or_else(|| CliError::Config(format!("unknown {what} `{s}`")))
}

impl Common {
    fn config(&self, levels: usize, samples: usize) -> Result<SolveConfig> {
        Ok(SolveConfig {
            geometry: self.geometry.clone(),
            degree: self.degree,
            levels,
            vertex_mode: named("vertex mode", &self.vertex_mode, VertexMode::from_name)?,
            multiplier_mode: named("multiplier mode", &self.multiplier, MultiplierMode::from_name)?,
            exact: named("exact solution", &self.exact, ManufacturedSolution::from_name)?,
            samples_per_element: samples,
        })
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            common,
            levels,
            samples,
        } => {
            let report = cmd_solve(&common.config(levels, samples)?, common.out.as_deref())?;
            print!("{}", report.csv());
        }
        Command::Converge {
            common,
            levels,
            reference_slopes,
        } => {
            let cfg = ConvergeConfig {
                solve: common.config(*levels.start(), 0)?,
                first_level: *levels.start(),
                last_level: *levels.end(),
                reference_slopes,
            };
            let report = cmd_converge(&cfg, common.out.as_deref())?;
            print!("{}", report.csv());
            print!("{}", report.rates_csv());
        }
        Command::Infsup {
            degrees,
            indexing,
            random,
            degree,
            trials,
            seed,
            elements,
            bins,
            hist_min,
            hist_max,
            out,
        } => {
            let cfg = InfsupConfig {
                degrees: degrees.collect(),
                indexing: named("degree indexing", &indexing, DegreeIndexing::from_name)?,
                random,
                degree,
                mesh: RandomMeshSpec {
                    elements,
                    seed,
                    trials,
                    ..RandomMeshSpec::default()
                },
                bins,
                range: (hist_min, hist_max),
                threads: None,
            };
            let report = cmd_infsup(&cfg, out.as_deref())?;
            print!("{}", report.csv());
            if let InfsupReport::Random { study, .. } = &report {
                eprintln!(
                    "mu_min: min {:.5} max {:.5} mean {:.5}",
                    study.min, study.max, study.mean
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.exit_code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
