use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use skybridge::scenario::{self, ScenarioError, OUTPUT_ENV};

#[derive(Parser)]
#[command(name = "skybridge", version, about = "Aircraft LEO coverage and in-cabin propagation simulator")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its outputs.
    Run {
        config: PathBuf,
        /// Override a config value, e.g. `--set constellation.max_satellites=10`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory (default: $SKYBRIDGE_OUT/<scenario>, else out/<scenario>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a run directory and write plot-ready tables.
    Report { dir: PathBuf },
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { config, set, out } => {
            let loaded = scenario::load(&config, &set)?;
            let env_root = std::env::var_os(OUTPUT_ENV);
            let dir = scenario::resolve_output_dir(out.as_deref(), &loaded, env_root.as_deref());
            let outcome = scenario::run(&loaded, &dir)?;
            println!("{}", outcome.headline);
            println!("wrote {} files to {}", outcome.files.len(), outcome.output_dir.display());
        }
        Command::Report { dir } => {
            let summary = scenario::report(&dir)?;
            println!("{}", summary.text);
            println!("wrote {} to {}", summary.files.join(", "), dir.display());
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<ScenarioError>() {
        Some(e) => e.exit_code() as u8,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let result = pool
        .context("cannot start worker threads")
        .and_then(|pool| pool.install(|| execute(cli)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
