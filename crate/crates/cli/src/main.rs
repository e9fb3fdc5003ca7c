//! `formc`: compile form files to artifact bundles, inspect them, benchmark
//! the evaluation modes and run the demo problems.

mod bench;
mod compile;
mod demo;
mod inspect;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use formc::ExecPolicy;

#[derive(Parser)]
#[command(name = "formc", version, about = "Finite element form compiler")]
struct Cli {
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Bundle,
    Latex,
    ScheduleDump,
}

#[derive(Subcommand)]
enum Command {
    /// Compile the forms of a form file to artifact bundles.
    Compile {
        form_file: PathBuf,
        /// Build, verify and store an evaluation schedule.
        #[arg(long)]
        optimize: bool,
        /// Neither read nor write the artifact cache.
        #[arg(long)]
        no_cache: bool,
        /// Cache directory (default: $FORMC_CACHE_DIR or the user cache root).
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Outputs to write; may be repeated or comma separated.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "bundle")]
        emit: Vec<Emit>,
        /// Output directory (default: next to the form file).
        #[arg(long, short)]
        out_dir: Option<PathBuf>,
    },
    /// Print dimensions, ranks, MAP certificates and geometry formulas.
    Inspect { artifact: PathBuf },
    /// Evaluate element tensors on a synthetic mesh in several modes.
    Bench {
        artifact: PathBuf,
        /// `square:N`, `cube:N` or a mesh file.
        #[arg(long)]
        mesh: Option<String>,
        #[arg(long, value_enum, value_delimiter = ',')]
        modes: Vec<bench::BenchMode>,
        #[arg(long, default_value_t = 3)]
        repeat: usize,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Solve one of the demo problems.
    Demo {
        #[arg(value_enum)]
        problem: demo::Problem,
        /// Subdivisions per unit length of the coarsest mesh.
        #[arg(long, default_value_t = 4)]
        resolution: usize,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Uniform refinements for the Poisson convergence study.
        #[arg(long, default_value_t = 3)]
        refinements: usize,
        #[arg(long, default_value = "tensor")]
        mode: String,
        /// Write the (finest) solution vector here.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Failure classes mapped to exit codes 1, 2 and 3.
#[derive(Debug)]
pub enum CliError {
    User(String),
    Verification(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::User(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::User(m) | CliError::Verification(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<formc::Error> for CliError {
    fn from(e: formc::Error) -> Self {
        use formc::Error as E;
        let m = e.to_string();
        match e {
            E::ScheduleVerification(_) | E::CgNotConverged { .. } | E::SymmetryAssertion(_) => CliError::Verification(m),
            E::DegenerateNodeSet(_) | E::DependentConstraints { .. } => CliError::Internal(m),
            _ => CliError::User(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::User(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn run(cli: Cli) -> CliResult<()> {
    let policy = if cli.sequential {
        ExecPolicy::Sequential
    } else {
        ExecPolicy::Parallel
    };
    match cli.command {
        Command::Compile {
            form_file,
            optimize,
            no_cache,
            cache_dir,
            emit,
            out_dir,
        } => compile::run(&compile::CompileArgs {
            form_file,
            optimize,
            no_cache,
            cache_dir,
            emit,
            out_dir,
            policy,
        }),
        Command::Inspect { artifact } => inspect::run(&artifact),
        Command::Bench {
            artifact,
            mesh,
            modes,
            repeat,
            json,
        } => bench::run(&artifact, mesh.as_deref(), &modes, repeat, json, policy),
        Command::Demo {
            problem,
            resolution,
            degree,
            refinements,
            mode,
            output,
        } => demo::run(problem, resolution, degree, refinements, &mode, output.as_deref(), policy),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
        Err(_) => ExitCode::from(3),
    }
}
