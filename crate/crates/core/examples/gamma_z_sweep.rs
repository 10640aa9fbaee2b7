//! Quanto basis across FX jump sizes against the line `(1 + γ_z) s_d`.

use quanto_cds::model::ModelParams;
use quanto_cds::pricing::{domestic_spread_4d, par_spread, CdsSchedule, Engine, EngineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schedule = CdsSchedule::default();
    let cfg = EngineConfig::default();
    let s_d = domestic_spread_4d(&ModelParams::default(), &schedule, &cfg)? * 1e4;
    println!("s_d = {s_d:.3} bps");
    println!("{:>8} {:>10} {:>10} {:>10}", "gamma_z", "s", "line", "ds");
    for gz in [-0.8, -0.6, -0.4, -0.2, -0.1, 0.0] {
        let p = ModelParams { gamma_z: gz, ..Default::default() };
        let s = par_spread(&Engine::new(&p, &cfg)?.leg_terms(&schedule)?)? * 1e4;
        println!("{gz:>8.2} {s:>10.3} {:>10.3} {:>10.3}", (1.0 + gz) * s_d, s - s_d);
    }
    Ok(())
}
