//! Which boundaries of the truncated domain take the PDE itself and which
//! take a vanishing normal second derivative.

use quanto_cds::model::{beta_stationary_params, boundary_regimes, ModelParams};

fn main() {
    let cases = [
        ("defaults", ModelParams::default()),
        ("kappa_R=0.5, sigma_R=0.5", ModelParams { kappa_recovery: 0.5, sigma_recovery: 0.5, ..Default::default() }),
        ("kappa_R=2, sigma_R=0.3", ModelParams { kappa_recovery: 2.0, sigma_recovery: 0.3, ..Default::default() }),
        ("sigma_rhat=0.2", ModelParams { sigma_rhat: 0.2, ..Default::default() }),
    ];
    for (name, p) in cases {
        println!("{name}");
        for r in boundary_regimes(&p).iter() {
            println!("  {:<16} {:?}", format!("{:?}", r.boundary), r.kind);
        }
        match beta_stationary_params(&p) {
            Ok((a, b)) => println!("  stationary recovery law: Beta({a:.3}, {b:.3})"),
            Err(e) => println!("  {e}"),
        }
    }
}
