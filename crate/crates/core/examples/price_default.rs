//! Prices the quanto CDS at the default parameters and prints the report.

use quanto_cds::model::ModelParams;
use quanto_cds::pricing::{quanto_basis, CdsSchedule, EngineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ModelParams::default();
    let (report, _) = quanto_basis(&p, &CdsSchedule::default(), &EngineConfig::default())?;
    println!("s    = {:8.3} bps", report.s_bps);
    println!("s_d  = {:8.3} bps", report.s_d_bps);
    println!("ds   = {:8.3} bps", report.delta_s_bps);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
