use std::path::PathBuf;
use std::process::ExitCode;

use besov_wave_lab::lab::{listing, run_file, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "besov-wave-lab", version, about = "Spectral experiments for the damped wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Run even if the parameter conditions fail.
        #[arg(long)]
        override_admissibility: bool,
        /// Worker threads (0 = all cores).
        #[arg(long, env = "BWL_JOBS")]
        jobs: Option<usize>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the available experiments.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", listing());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            override_admissibility,
            jobs,
            out,
            seed,
        } => {
            if let Some(k) = jobs.filter(|&k| k > 0) {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
                    eprintln!("warning: could not size the thread pool: {e}");
                }
            }
            let opts = RunOptions {
                override_admissibility,
                seed,
                out,
            };
            match run_file(&config, &opts) {
                Ok(outcome) => {
                    for v in &outcome.report.verdicts {
                        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
                    }
                    println!("wrote {} files to {}", outcome.files.len(), outcome.out_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{}", e.to_json());
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
