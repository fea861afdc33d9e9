use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use liouv_sym::experiment::{exit_code, load_config, run};

#[derive(Parser)]
#[command(name = "liouv-sym", version, about = "Steady states, spectra and trajectories of boundary-driven XXZ chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random seed (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Lift the chain-length caps of the exact solvers.
        #[arg(long)]
        allow_large: bool,
    },
    /// Parse and check a config file without running it.
    Validate { config: PathBuf },
}

fn threads_from_env() -> Result<(), String> {
    let Ok(v) = std::env::var("LIOUVSYM_THREADS") else {
        return Ok(());
    };
    let k: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| format!("LIOUVSYM_THREADS = {v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = threads_from_env() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Validate { config } => match load_config(&config, None, None).and_then(|c| c.validate().map(|_| c)) {
            Ok(cfg) => {
                print!("{}", cfg.header());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Run {
            config,
            out,
            seed,
            allow_large,
        } => {
            let outcome = load_config(&config, out.as_deref(), seed).and_then(|cfg| run(&cfg, allow_large));
            let code = exit_code(&outcome);
            match &outcome {
                Ok(o) => {
                    for f in &o.files {
                        println!("{}", f.display());
                    }
                    if o.flagged {
                        eprintln!("warning: some results did not converge; see summary.json");
                    }
                }
                Err(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(code as u8)
        }
    }
}
