use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cr_hartogs::runner::{run, Command, ExperimentConfig};

/// Splitting, CR Hartogs tests, Szegő alternation and Bochner–Martinelli checks on
/// ellipsoid-type domains in C².
///
/// Exit codes: 0 success, 2 invalid input, 3 numerical failure.
#[derive(Parser)]
#[command(name = "crh", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the JSON report and CSV series.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Split a boundary polynomial into slice-holomorphic parts.
    Decompose,
    /// Classify `f` by per-slice Hardy and weak CR tests.
    CrhTest,
    /// Alternate the projections onto V1 and V2 and compare with the Szegő projection.
    SzegoIterate,
    /// Compare kernel and averaged Bochner–Martinelli evaluation.
    BmCheck,
    /// Certify the ellipsoid (and perturbation) conditions.
    Admissibility,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Decompose => Command::Decompose,
            Cmd::CrhTest => Command::CrhTest,
            Cmd::SzegoIterate => Command::SzegoIterate,
            Cmd::BmCheck => Command::BmCheck,
            Cmd::Admissibility => Command::Admissibility,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("crh: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> cr_hartogs::Result<Vec<PathBuf>> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| cr_hartogs::Error::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(cr_hartogs::Error::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| cr_hartogs::Error::Config(e.to_string()))?;
    }
    run(cli.command.into(), &cfg, &cli.out)
}
