//! Runs a JSON configuration from `configs/` the way `qcds --config` does.
//!
//! `cargo run --release --example run_config -- configs/gamma_z_sweep.json`

use quanto_cds::cli::{run, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/price_default.json".into());
    let cfg = RunConfig::load(path.as_ref())?;
    for file in run(&cfg)? {
        println!("{}", file.display());
        let text = std::fs::read_to_string(&file)?;
        for line in text.lines().take(12) {
            println!("  {line}");
        }
    }
    Ok(())
}
