//! Acceptance criteria 1-7. Each criterion prints one PASS/FAIL line; the
//! process exits nonzero when any criterion fails.

use std::time::Instant;

use quanto_cds::cli::{benchmark, sweep, RunConfig, SweepBlock, Task};
use quanto_cds::grid::{build_grid, GridConfig, ScalarField};
use quanto_cds::model::{boundary_regimes, Boundary, BoundaryKind, Factor, ModelParams};
use quanto_cds::oracles::{mc_spread, CnConfig, McConfig};
use quanto_cds::pde::{jump_shift, rk4_integrate, TimeGridConfig};
use quanto_cds::pricing::{par_spread, quanto_basis, CdsSchedule, Engine, EngineConfig, GKind, LegTerms};
use quanto_cds::rbffd::{rbf_fd_weights, DerivativeOrder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String, all: &mut bool) -> String {
    *all &= pass;
    format!("{}{}", if pass { "" } else { "!" }, detail)
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

/// Shared results of the default-parameter pricing.
struct Baseline {
    s_bps: f64,
    s_d_bps: f64,
    terms: LegTerms,
}

fn criterion1() -> Outcome {
    let rows = benchmark(&ModelParams::default(), &CdsSchedule::default(), &EngineConfig::default(), &CnConfig::default())
        .expect("benchmark");
    let detail = rows
        .iter()
        .map(|r| {
            format!(
                "{}{}/{} {:.2} (target {:.2} +/- {:.2})",
                if r.pass { "" } else { "!" },
                r.case,
                r.method,
                r.spread_bps,
                r.target_bps,
                r.tolerance_bps
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { pass: rows.iter().all(|r| r.pass), detail }
}

fn criterion2() -> (Outcome, Baseline) {
    let p = ModelParams { gamma_z: 0.0, gamma_rhat: 0.0, ..Default::default() };
    let start = Instant::now();
    let (report, terms) = quanto_basis(&p, &CdsSchedule::default(), &EngineConfig::default()).expect("quanto basis");
    let secs = start.elapsed().as_secs_f64();
    let mut pass = true;
    let detail = [
        check(within(report.s_bps, 93.22, 2.0), format!("s {:.2} (target 93.22 +/- 2)", report.s_bps), &mut pass),
        check(
            within(report.delta_s_bps, -9.46, 2.0),
            format!("delta_s {:.2} (target -9.46 +/- 2)", report.delta_s_bps),
            &mut pass,
        ),
        check(secs <= 1800.0, format!("runtime {secs:.1}s (limit 1800s)"), &mut pass),
    ]
    .join("; ");
    let base = Baseline { s_bps: report.s_bps, s_d_bps: report.s_d_bps, terms };
    (Outcome { pass, detail }, base)
}

fn foreign_spread_bps(p: &ModelParams) -> f64 {
    let terms = Engine::new(p, &EngineConfig::default()).unwrap().leg_terms(&CdsSchedule::default()).unwrap();
    par_spread(&terms).unwrap() * 1e4
}

/// Returns the outcome and Δs at γ_z = -0.8.
fn criterion3(base: &Baseline) -> (Outcome, f64) {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut delta_08 = f64::NAN;
    for gz in [-0.8, -0.1] {
        let s = foreign_spread_bps(&ModelParams { gamma_z: gz, ..Default::default() });
        let line = (1.0 + gz) * base.s_d_bps;
        if gz == -0.8 {
            delta_08 = s - base.s_d_bps;
        }
        parts.push(check(
            (s - line).abs() <= 5.0,
            format!("gamma_z {gz}: s {s:.2} vs (1+gamma_z)s_d {line:.2} (limit 5)"),
            &mut pass,
        ));
    }
    (Outcome { pass, detail: parts.join("; ") }, delta_08)
}

fn sweep_deltas(param: &str, values: &[f64]) -> Vec<f64> {
    let cfg = RunConfig {
        task: Task::Sweep,
        sweep: Some(SweepBlock { param: param.into(), values: values.to_vec(), by: None }),
        ..Default::default()
    };
    sweep(&cfg).expect("sweep").iter().map(|r| r.delta_s_bps).collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ")
}

fn criterion4(delta_08: f64) -> Outcome {
    let mut pass = true;
    let gr = sweep_deltas("gamma_rhat", &[0.0, 1.0, 2.0, 3.0, 4.0]);
    let kr = sweep_deltas("kappa_R", &[0.0, 0.25, 0.5, 0.75, 1.0]);
    let increasing = gr.windows(2).all(|w| w[1] - w[0] >= -0.5);
    let decreasing = kr.windows(2).all(|w| w[1] - w[0] <= 0.5);
    let impact = gr[4] - gr[0];
    let detail = [
        check(increasing, format!("delta_s increasing in gamma_rhat [{}]", fmt_list(&gr)), &mut pass),
        check(decreasing, format!("delta_s decreasing in kappa_R [{}]", fmt_list(&kr)), &mut pass),
        check(
            within(delta_08, -80.0, 15.0),
            format!("delta_s(gamma_z=-0.8) {delta_08:.2} (target -80 +/- 15)"),
            &mut pass,
        ),
        check(
            (2.5..=10.0).contains(&impact),
            format!("gamma_rhat impact {impact:.2} (order +5: [2.5, 10])"),
            &mut pass,
        ),
    ]
    .join("; ");
    Outcome { pass, detail }
}

fn criterion5(base: &Baseline) -> Outcome {
    let d = ModelParams::default();
    let rho = d.rho.with(Factor::Fx, Factor::Recovery, 0.8);
    let cases = [
        ("defaults", d, Some(base.s_bps)),
        ("gamma_z=-0.5", ModelParams { gamma_z: -0.5, ..d }, None),
        ("sigma_R=0.3,rho_zR=0.8,kappa_R=0.5", ModelParams { sigma_recovery: 0.3, kappa_recovery: 0.5, rho, ..d }, None),
    ];
    let mc = McConfig { paths: 100_000, step: 1.0 / 48.0, ..Default::default() };
    let mut pass = true;
    let parts: Vec<String> = cases
        .iter()
        .map(|(name, p, known)| {
            let pde = known.unwrap_or_else(|| foreign_spread_bps(p));
            let est = mc_spread(p, &CdsSchedule::default(), &mc).expect("mc").spread;
            let (mean, se) = (est.mean * 1e4, est.std_error * 1e4);
            let z = (pde - mean) / se;
            check(z.abs() <= 3.0, format!("{name}: pde {pde:.2} mc {mean:.2} se {se:.2} z {z:.2}"), &mut pass)
        })
        .collect();
    Outcome { pass, detail: parts.join("; ") }
}

fn observed_order(f: fn(f64) -> f64, order: DerivativeOrder, exact: f64) -> f64 {
    let x0 = 0.5;
    let pts: Vec<(f64, f64)> = (0..3)
        .map(|k| {
            let h = 1.0 / 9.0 / f64::from(1 << k);
            let nodes = [x0 - h, x0, x0 + h];
            let w = rbf_fd_weights(&nodes, x0, 2.0 * h, order).unwrap();
            let est: f64 = nodes.iter().zip(&w).map(|(&x, w)| w * f(x)).sum();
            (h.ln(), (est - exact).abs().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion6() -> Outcome {
    let mut pass = true;
    let slopes = [
        ("d1 sin", observed_order(f64::sin, DerivativeOrder::First, 0.5f64.cos())),
        ("d1 exp", observed_order(f64::exp, DerivativeOrder::First, 0.5f64.exp())),
        ("d2 ln_1p", observed_order(f64::ln_1p, DerivativeOrder::Second, -1.0 / 2.25)),
        ("d2 x^4", observed_order(|x| x.powi(4), DerivativeOrder::Second, 3.0)),
    ];
    let mut parts: Vec<String> = slopes
        .iter()
        .map(|(name, s)| check(within(*s, 2.0, 0.3), format!("{name} slope {s:.3}"), &mut pass))
        .collect();

    let err = |dt: f64| {
        let rhs = |x: &[f64], o: &mut [f64]| {
            o[0] = -0.5 * x[0] + x[1];
            o[1] = -x[0] - 0.5 * x[1];
        };
        let (x, _) = rk4_integrate(rhs, vec![1.0, 0.0], 2.0, &TimeGridConfig { dt }).unwrap();
        let e = (-1.0f64).exp();
        ((x[0] - e * 2f64.cos()).powi(2) + (x[1] + e * 2f64.sin()).powi(2)).sqrt()
    };
    let ratio = err(0.1) / err(0.05);
    parts.push(check(within(ratio, 16.0, 3.2), format!("rk4 error ratio {ratio:.2}"), &mut pass));

    let grid = build_grid(&GridConfig::default(), &ModelParams::default()).unwrap();
    let c = [0.3, -1.2, 0.7, 2.1, -0.4];
    let affine = |x: [f64; 4]| c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[2] + c[4] * x[3];
    let field = ScalarField::from_fn(&grid, affine);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let worst = (0..2000)
        .map(|_| {
            let x = [
                rng.random_range(-0.2..1.2),
                rng.random_range(-0.2..1.2),
                rng.random_range(-7.0..1.0),
                rng.random_range(-0.5..5.0),
            ];
            (grid.interpolate(&field, x) - affine(x)).abs()
        })
        .fold(0.0, f64::max);
    parts.push(check(worst <= 1e-12, format!("affine interpolation error {worst:.1e}"), &mut pass));
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion7(base: &Baseline) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let d = ModelParams::default();

    let regimes = boundary_regimes(&d);
    let degenerate = [Boundary::RecoveryZero, Boundary::RecoveryOne, Boundary::ForeignRateZero]
        .iter()
        .all(|&b| regimes.kind(b) == BoundaryKind::DegeneratePde);
    parts.push(check(degenerate, "R=0, R=1, rhat=0 degenerate".into(), &mut pass));

    let grid = build_grid(&GridConfig::default(), &d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = ScalarField::new(&grid, (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let shifted = jump_shift(&grid, &u, &d);
    let identity = shifted.values().iter().zip(u.values()).all(|(a, b)| (a - b).abs() <= 1e-15);
    parts.push(check(identity, "jump_shift identity at zero jumps".into(), &mut pass));

    let p = ModelParams { gamma_z: -0.5, gamma_rhat: 1.0, ..d };
    let engine = Engine::new(&p, &EngineConfig::default()).unwrap();
    let g = engine.solve_g(GKind::Recovered, 2.5).unwrap();
    let gbar = engine.solve_g(GKind::Protection, 2.5).unwrap();
    let gt = engine.solve_g(GKind::Notional, 2.5).unwrap();
    let rel = (gt - (g + gbar)).abs() / gt.abs();
    parts.push(check(rel <= 1e-8, format!("g~ = g + g- relative {rel:.1e}"), &mut pass));

    let s = foreign_spread_bps(&ModelParams { gamma_z: -1.0, ..d });
    parts.push(check(s.abs() <= 1e-12, format!("s(gamma_z=-1) {s:.1e} bps"), &mut pass));

    let s0 = par_spread(&base.terms).unwrap();
    let worst = [1e-6, 0.37, 3.7, 1e6]
        .iter()
        .map(|&k| (par_spread(&base.terms.scaled(k)).unwrap() - s0).abs() / s0)
        .fold(0.0, f64::max);
    parts.push(check(worst <= 1e-12, format!("par_spread scale invariance {worst:.1e}"), &mut pass));

    let mc = McConfig { paths: 2_000, step: 1.0 / 12.0, ..Default::default() };
    let sched = CdsSchedule { maturity: 1.0, coupons: 12, nq: 1 };
    let a = mc_spread(&d, &sched, &mc).unwrap();
    let b = mc_spread(&d, &sched, &mc).unwrap();
    let c = mc_spread(&d, &sched, &McConfig { seed: mc.seed + 1, ..mc }).unwrap();
    let repro = a == b && a.spread.mean != c.spread.mean;
    parts.push(check(repro, "mc seed reproducibility".into(), &mut pass));
    Outcome { pass, detail: parts.join("; ") }
}

fn report(n: usize, title: &str, outcome: &Outcome, secs: f64) -> bool {
    println!(
        "criterion {n} {}: {title} [{secs:.1}s] {}",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.detail
    );
    outcome.pass
}

fn main() {
    let mut results = Vec::new();
    let timed = |f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        (o, t.elapsed().as_secs_f64())
    };

    let (o, t) = timed(&mut criterion1);
    results.push(report(1, "domestic benchmark reproduction", &o, t));

    let t0 = Instant::now();
    let (o, base) = criterion2();
    results.push(report(2, "no-jump quanto point", &o, t0.elapsed().as_secs_f64()));

    let t0 = Instant::now();
    let (o, delta_08) = criterion3(&base);
    results.push(report(3, "Brigo-line endpoints", &o, t0.elapsed().as_secs_f64()));

    let (o, t) = timed(&mut || criterion4(delta_08));
    results.push(report(4, "sweep signs and magnitudes", &o, t));

    let (o, t) = timed(&mut || criterion5(&base));
    results.push(report(5, "PDE vs Monte Carlo", &o, t));

    let t67 = Instant::now();
    let (o, t) = timed(&mut criterion6);
    results.push(report(6, "numerical order", &o, t));

    let (o, t) = timed(&mut || criterion7(&base));
    results.push(report(7, "invariant suite", &o, t));
    let desk = t67.elapsed().as_secs_f64();
    println!("criteria 6-7 runtime {desk:.1}s (limit 900s)");

    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() || desk > 900.0 {
        std::process::exit(1);
    }
}
