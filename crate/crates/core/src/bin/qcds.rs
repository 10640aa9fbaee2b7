use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use quanto_cds::cli::{exit_code, run, RunConfig, Task};
use quanto_cds::Error;

/// Batch pricing of quanto CDS spreads from a JSON config.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// price, sweep, benchmark or mc-check; overrides the config.
    #[arg(long)]
    task: Option<String>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Monte Carlo seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &Args) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(task) = &args.task {
        cfg.task = task.parse::<Task>()?;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    if args.threads.is_some() {
        cfg.solver.threads = args.threads;
    }
    if let Some(seed) = args.seed {
        cfg.mc.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).and_then(|cfg| run(&cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qcds: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
