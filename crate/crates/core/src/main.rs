use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dirichlet_svi::harness::{parse_config, run, ExperimentConfig, HarnessError, PRESET_HELP};

/// Monte Carlo laboratory for stochastic nonlinear diffusion on graph Dirichlet spaces.
#[derive(Parser, Debug)]
#[command(name = "svi-lab", version)]
struct Cli {
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `run.paths`.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Artifact directory.
    #[arg(long, global = true, env = "SVI_LAB_OUT_DIR", default_value = "svi-lab-out")]
    out_dir: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Runs the experiment and writes artifacts; exit 0 iff every report passes.
    Run { config: PathBuf },
    /// Parses and validates a config, printing its canonical form.
    Validate { config: PathBuf },
    /// Lists the named space presets.
    Presets,
}

const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn load(path: &PathBuf, cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    let mut config = parse_config(&text).map_err(HarnessError::Config)?;
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if let Some(paths) = cli.paths {
        if paths == 0 {
            return Err(HarnessError::Setup("--paths must be positive".into()));
        }
        config.run.paths = paths;
    }
    Ok(config)
}

fn execute(cli: &Cli) -> Result<bool, HarnessError> {
    match &cli.command {
        Command::Presets => {
            for (name, help) in PRESET_HELP {
                println!("{name:<16} {help}");
            }
            Ok(true)
        }
        Command::Validate { config } => {
            let c = load(config, cli)?;
            print!("{}", dirichlet_svi::harness::serialize(&c));
            Ok(true)
        }
        Command::Run { config } => {
            let c = load(config, cli)?;
            let outcome = run(&c, &cli.out_dir)?;
            for r in &outcome.reports {
                println!("{}", r.summary());
            }
            println!("artifacts written to {}", cli.out_dir.display());
            Ok(outcome.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
