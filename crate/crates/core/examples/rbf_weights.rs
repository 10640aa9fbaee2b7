//! Gaussian RBF-FD stencil weights and their second-order convergence.

use quanto_cds::rbffd::{rbf_fd_weights, DerivativeOrder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x0 = 0.5;
    println!("{:>10} {:>12} {:>12}", "h", "err d1 sin", "err d2 x^4");
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..3 {
        let h = 1.0 / 9.0 / f64::from(1 << k);
        let nodes = [x0 - h, x0, x0 + h];
        let apply = |w: &[f64], f: fn(f64) -> f64| nodes.iter().zip(w).map(|(&x, w)| w * f(x)).sum::<f64>();
        let d1 = rbf_fd_weights(&nodes, x0, 2.0 * h, DerivativeOrder::First)?;
        let d2 = rbf_fd_weights(&nodes, x0, 2.0 * h, DerivativeOrder::Second)?;
        let e1 = (apply(&d1, f64::sin) - x0.cos()).abs();
        let e2 = (apply(&d2, |x| x.powi(4)) - 12.0 * x0 * x0).abs();
        print!("{h:>10.5} {e1:>12.3e} {e2:>12.3e}");
        if let Some((p1, p2)) = prev {
            print!("   order {:.2} {:.2}", (p1 / e1).log2(), (p2 / e2).log2());
        }
        println!();
        prev = Some((e1, e2));
        if k == 0 {
            println!("  d2 weights at h = 1/9: {d2:?}");
        }
    }
    Ok(())
}
