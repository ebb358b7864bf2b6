use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use complexdim_cli::commands::{self, Settings};
use complexdim_cli::output::emit;
use complexdim_cli::spec::load;
use complexdim_cli::CliError;

/// Complex dimensions, zeta functions and box-counting reports for
/// self-similar sets and fractal strings.
#[derive(Parser)]
#[command(name = "complexdim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Spec file, or a builtin name (cantor, golden, sierpinski, f1, interval, fat-cantor-string)
    spec: String,
    /// Write artifacts into this directory instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted chance of snapping a box-counting jump to a wrong exact value
    #[arg(long, default_value_t = 1e-2)]
    tolerance: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Moran root, lattice verdict and complex dimensions
    Dims {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20.0)]
        tmax: f64,
    },
    /// Bracketed box-counting profile on a geometric grid up to --xmax
    Boxcount {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 32.0)]
        xmax: f64,
        #[arg(long, default_value_t = 48)]
        points: usize,
    },
    /// Zeta function: closed form when L dies out, periodic form otherwise
    Zeta {
        #[command(flatten)]
        common: Common,
        /// Extent of the certified box-counting profile
        #[arg(long, default_value_t = 16.5)]
        xmax: f64,
    },
    /// Measurability verdict, content and principal complex dimensions
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16.5)]
        xmax: f64,
        #[arg(long, default_value_t = 30.0)]
        tmax: f64,
    },
    /// Lattice approximants M = 1..=M with root-matching distances
    Approximate {
        #[command(flatten)]
        common: Common,
        #[arg(long = "M", default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 15.0)]
        tmax: f64,
    },
    /// Explicit counting formula at x against the direct count
    Explicit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: f64,
        /// Pole families |k| ≤ terms (lattice) or 2·terms + 1 poles (nonlattice)
        #[arg(long, default_value_t = 200)]
        terms: usize,
        #[arg(long, default_value_t = 16.5)]
        xmax: f64,
        /// Search height for nonlattice poles
        #[arg(long, default_value_t = 50.0)]
        tmax: f64,
    },
}

fn init_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("COMPLEXDIM_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::parse(format!("COMPLEXDIM_THREADS={text:?} is not a positive integer"), None))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::other(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let mut s = Settings::default();
    let (common, artifacts) = match cli.command {
        Command::Dims { common, tmax } => {
            s.t_max = tmax;
            s.tolerance = common.tolerance;
            let spec = load(&common.spec)?;
            let a = commands::dims(&spec, &s)?;
            (common, a)
        }
        Command::Boxcount {
            common,
            depth,
            xmax,
            points,
        } => {
            s.depth = depth;
            s.x_max = xmax;
            s.points = points;
            s.tolerance = common.tolerance;
            let spec = load(&common.spec)?;
            let a = commands::boxcount(&spec, &s)?;
            (common, a)
        }
        Command::Zeta { common, xmax } => {
            s.x_max = xmax;
            s.tolerance = common.tolerance;
            let spec = load(&common.spec)?;
            let a = commands::zeta(&spec, &s)?;
            (common, a)
        }
        Command::Report { common, xmax, tmax } => {
            s.x_max = xmax;
            s.t_max = tmax;
            s.tolerance = common.tolerance;
            let spec = load(&common.spec)?;
            let a = commands::report(&spec, &s)?;
            (common, a)
        }
        Command::Approximate { common, m, tmax } => {
            s.m = m;
            s.t_max = tmax;
            s.tolerance = common.tolerance;
            let spec = load(&common.spec)?;
            let a = commands::approximate(&spec, &s)?;
            (common, a)
        }
        Command::Explicit {
            common,
            x,
            terms,
            xmax,
            tmax,
        } => {
            s.terms = terms;
            s.x_max = xmax;
            s.t_max = tmax;
            s.tolerance = common.tolerance;
            let spec = load(&common.spec)?;
            let a = commands::explicit(&spec, x, &s)?;
            (common, a)
        }
    };
    match emit(common.out.as_deref(), &artifacts, &mut std::io::stdout().lock()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", CliError::parse(e.to_string().trim().to_string(), None).to_json());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
