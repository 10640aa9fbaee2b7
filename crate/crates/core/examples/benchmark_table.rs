//! Domestic spreads from the 4D engine and the 1D Crank-Nicolson benchmark,
//! with and without log-hazard dynamics, next to the credit triangle.

use std::time::Instant;

use quanto_cds::model::ModelParams;
use quanto_cds::oracles::{cn_domestic_spread, credit_triangle, CnConfig};
use quanto_cds::pricing::{domestic_spread_4d, CdsSchedule, EngineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schedule = CdsSchedule::default();
    let cfg = EngineConfig::default();
    println!("{:<22} {:>10} {:>10} {:>10}", "case", "4D", "1D CN", "triangle");
    for (name, p) in [
        ("defaults", ModelParams::default()),
        ("kappa_y = sigma_y = 0", ModelParams { kappa_y: 0.0, sigma_y: 0.0, ..Default::default() }),
    ] {
        let start = Instant::now();
        let s4 = domestic_spread_4d(&p, &schedule, &cfg)? * 1e4;
        let s1 = cn_domestic_spread(&p, &schedule, &CnConfig::default())? * 1e4;
        let tri = credit_triangle(p.y0.exp(), p.recovery0) * 1e4;
        println!(
            "{name:<22} {s4:>10.3} {s1:>10.3} {tri:>10.3}   ({:.1}s)",
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
