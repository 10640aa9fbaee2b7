//! Compares the PDE spread with a Monte Carlo estimate of the same contract.

use quanto_cds::model::{Factor, ModelParams};
use quanto_cds::oracles::{mc_spread, McConfig};
use quanto_cds::pricing::{par_spread, CdsSchedule, Engine, EngineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schedule = CdsSchedule::default();
    let mut stressed = ModelParams {
        sigma_recovery: 0.3,
        kappa_recovery: 0.5,
        ..Default::default()
    };
    stressed.rho.set(Factor::Fx, Factor::Recovery, 0.8);
    let cases = [
        ("defaults", ModelParams::default()),
        ("gamma_z = -0.5", ModelParams { gamma_z: -0.5, ..Default::default() }),
        ("sigma_R, rho_zR, kappa_R", stressed),
    ];
    println!("{:<26} {:>10} {:>10} {:>8} {:>8}", "case", "PDE", "MC", "SE", "z-score");
    for (name, p) in cases {
        let pde = par_spread(&Engine::new(&p, &EngineConfig::default())?.leg_terms(&schedule)?)? * 1e4;
        let mc = mc_spread(&p, &schedule, &McConfig::default())?;
        let (m, se) = (mc.spread.mean * 1e4, mc.spread.std_error * 1e4);
        println!("{name:<26} {pde:>10.3} {m:>10.3} {se:>8.3} {:>8.2}", (pde - m) / se);
    }
    Ok(())
}
