//! Batch tasks behind the `qcds` binary.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{with_param, RunConfig, Task};
use super::output::{
    sig10, write_csv, BENCHMARK_SCHEMA, LEG_TERMS_SCHEMA, MC_CHECK_SCHEMA, SWEEP_SCHEMA,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::oracles::{cn_domestic_spread, credit_triangle, mc_spread, CnConfig, McConfig};
use crate::pricing::{
    domestic_spread_4d, par_spread, quanto_basis, CdsSchedule, Engine, EngineConfig, LegTerms,
};

/// Published domestic spreads (bps) the benchmark task compares against.
pub const PUBLISHED_4D: f64 = 102.68;
pub const PUBLISHED_1D: f64 = 102.8;
pub const PUBLISHED_FLAT_4D: f64 = 91.73;
pub const PUBLISHED_FLAT_1D: f64 = 94.5;
pub const PUBLISHED_TRIANGLE: f64 = 92.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub case: String,
    pub method: String,
    pub spread_bps: f64,
    pub target_bps: f64,
    pub tolerance_bps: f64,
    pub pass: bool,
}

impl BenchmarkRow {
    fn new(case: &str, method: &str, spread_bps: f64, target_bps: f64, tolerance_bps: f64) -> Self {
        BenchmarkRow {
            case: case.into(),
            method: method.into(),
            spread_bps,
            target_bps,
            tolerance_bps,
            pass: (spread_bps - target_bps).abs() <= tolerance_bps,
        }
    }
}

/// Domestic spreads of `p` and of its constant-hazard variant by the 4D
/// engine and the 1D benchmark, against the published values and the
/// credit triangle.
pub fn benchmark(p: &ModelParams, schedule: &CdsSchedule, engine: &EngineConfig, cn: &CnConfig) -> Result<Vec<BenchmarkRow>> {
    let flat = ModelParams { kappa_y: 0.0, sigma_y: 0.0, ..*p };
    let cn = CnConfig { dt: engine.time.dt, ..*cn };
    let bps = |x: f64| x * 1e4;
    let s4 = bps(domestic_spread_4d(p, schedule, engine)?);
    let s1 = bps(cn_domestic_spread(p, schedule, &cn)?);
    let f4 = bps(domestic_spread_4d(&flat, schedule, engine)?);
    let f1 = bps(cn_domestic_spread(&flat, schedule, &cn)?);
    let tri = bps(credit_triangle(p.y0.exp(), p.recovery0));
    Ok(vec![
        BenchmarkRow::new("reference", "4d", s4, PUBLISHED_4D, 1.5),
        BenchmarkRow::new("reference", "1d-cn", s1, PUBLISHED_1D, 1.0),
        BenchmarkRow::new("flat-hazard", "4d", f4, PUBLISHED_FLAT_4D, 1.5),
        BenchmarkRow::new("flat-hazard", "1d-cn", f1, PUBLISHED_FLAT_1D, 1.0),
        BenchmarkRow::new("flat-hazard", "credit-triangle", tri, PUBLISHED_TRIANGLE, 0.05),
        BenchmarkRow::new("flat-hazard", "4d-vs-triangle", f4, tri, 0.03 * tri),
        BenchmarkRow::new("flat-hazard", "1d-cn-vs-triangle", f1, tri, 0.03 * tri),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub values: Vec<f64>,
    pub s_bps: f64,
    pub s_d_bps: f64,
    pub delta_s_bps: f64,
    /// `(1 + γ_z) s_d`
    pub reference_bps: f64,
}

/// Points of the sweep in row order: the first parameter varies slowest.
pub fn sweep_points(cfg: &RunConfig) -> Result<Vec<(Vec<f64>, ModelParams)>> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::Config("no sweep block".into()))?;
    let mut points = Vec::new();
    for &a in &sweep.values {
        let pa = with_param(&cfg.model, &sweep.param, a)?;
        match &sweep.by {
            None => points.push((vec![a], pa)),
            Some(by) => {
                for &b in &by.values {
                    points.push((vec![a, b], with_param(&pa, &by.param, b)?));
                }
            }
        }
    }
    Ok(points)
}

/// Quanto basis at every sweep point. Domestic spreads are shared between
/// points whose domestic reduction coincides.
pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let schedule = cfg.schedule();
    let engine = cfg.engine();
    let mut domestic: Vec<(ModelParams, f64)> = Vec::new();
    let mut rows = Vec::new();
    for (values, p) in sweep_points(cfg)? {
        let key = p.domestic();
        let s_d = match domestic.iter().find(|(k, _)| *k == key) {
            Some(&(_, s)) => s,
            None => {
                let s = domestic_spread_4d(&p, &schedule, &engine)?;
                domestic.push((key, s));
                s
            }
        };
        let s = par_spread(&Engine::new(&p, &engine)?.leg_terms(&schedule)?)?;
        rows.push(SweepRow {
            values,
            s_bps: s * 1e4,
            s_d_bps: s_d * 1e4,
            delta_s_bps: (s - s_d) * 1e4,
            reference_bps: (1.0 + p.gamma_z) * s_d * 1e4,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McCheckRow {
    pub quantity: String,
    pub pde: f64,
    pub mc: f64,
    pub std_error: f64,
    pub z_score: f64,
    pub pass: bool,
}

/// PDE legs and spread against Monte Carlo estimates of the same contract.
pub fn mc_check(p: &ModelParams, schedule: &CdsSchedule, engine: &EngineConfig, mc: &McConfig) -> Result<Vec<McCheckRow>> {
    let terms = Engine::new(p, engine)?.leg_terms(schedule)?;
    let s = par_spread(&terms)?;
    let est = mc_spread(p, schedule, mc)?;
    let row = |q: &str, pde: f64, mean: f64, se: f64| {
        let z = if se > 0.0 { (pde - mean) / se } else if pde == mean { 0.0 } else { f64::INFINITY };
        McCheckRow { quantity: q.into(), pde, mc: mean, std_error: se, z_score: z, pass: z.abs() <= 3.0 }
    };
    Ok(vec![
        row("spread_bps", s * 1e4, est.spread.mean * 1e4, est.spread.std_error * 1e4),
        row("protection", terms.protection(), est.protection.mean, est.protection.std_error),
        row("premium_annuity", terms.premium_annuity(), est.premium_annuity.mean, est.premium_annuity.std_error),
        row("accrued_annuity", terms.accrued_annuity(), est.accrued_annuity.mean, est.accrued_annuity.std_error),
    ])
}

fn leg_rows(terms: &LegTerms) -> Vec<Vec<String>> {
    (0..terms.len())
        .map(|i| {
            vec![
                (i + 1).to_string(),
                sig10(terms.period_start[i]),
                sig10(terms.a[i]),
                sig10(terms.b[i]),
                sig10(terms.c[i]),
                sig10(terms.d[i]),
            ]
        })
        .collect()
}

const LEG_HEADER: [&str; 6] = ["i", "t_i", "A_i", "B_i", "C_i", "D_i"];

/// Runs the configured task and returns the files written.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    match cfg.solver.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| run_task(cfg)),
        None => run_task(cfg),
    }
}

fn run_task(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir: &Path = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    let schedule = cfg.schedule();
    let engine = cfg.engine();
    let mut files = Vec::new();
    match cfg.task {
        Task::Price => {
            let (report, terms) = quanto_basis(&cfg.model, &schedule, &engine)?;
            let json = dir.join("report.json");
            std::fs::write(&json, serde_json::to_string_pretty(&report).expect("report serializes"))?;
            let csv = dir.join("leg_terms.csv");
            write_csv(&csv, LEG_TERMS_SCHEMA, &LEG_HEADER, &leg_rows(&terms))?;
            files.extend([json, csv]);
        }
        Task::Sweep => {
            let block = cfg.sweep.as_ref().expect("validated");
            let rows = sweep(cfg)?;
            let mut header = vec![block.param.as_str()];
            if let Some(by) = &block.by {
                header.push(by.param.as_str());
            }
            header.extend(["s_bps", "s_d_bps", "delta_s_bps", "reference_bps"]);
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut v: Vec<String> = r.values.iter().map(|x| sig10(*x)).collect();
                    v.extend([r.s_bps, r.s_d_bps, r.delta_s_bps, r.reference_bps].map(sig10));
                    v
                })
                .collect();
            let csv = dir.join("sweep.csv");
            write_csv(&csv, SWEEP_SCHEMA, &header, &body)?;
            files.push(csv);
        }
        Task::Benchmark => {
            let rows = benchmark(&cfg.model, &schedule, &engine, &cfg.benchmark)?;
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.case.clone(),
                        r.method.clone(),
                        sig10(r.spread_bps),
                        sig10(r.target_bps),
                        sig10(r.tolerance_bps),
                        r.pass.to_string(),
                    ]
                })
                .collect();
            let csv = dir.join("benchmark.csv");
            write_csv(
                &csv,
                BENCHMARK_SCHEMA,
                &["case", "method", "spread_bps", "target_bps", "tolerance_bps", "pass"],
                &body,
            )?;
            files.push(csv);
        }
        Task::McCheck => {
            let rows = mc_check(&cfg.model, &schedule, &engine, &cfg.mc)?;
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.quantity.clone(),
                        sig10(r.pde),
                        sig10(r.mc),
                        sig10(r.std_error),
                        sig10(r.z_score),
                        r.pass.to_string(),
                    ]
                })
                .collect();
            let csv = dir.join("mc_check.csv");
            write_csv(&csv, MC_CHECK_SCHEMA, &["quantity", "pde", "mc", "std_error", "z_score", "pass"], &body)?;
            files.push(csv);
        }
    }
    Ok(files)
}

/// Process exit code for a failed run: 2 for configuration problems,
/// 1 for everything that went wrong while solving.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidParams(_)
        | Error::DegenerateRecovery(_)
        | Error::InvalidGrid(_)
        | Error::InvalidSchedule(_)
        | Error::InvalidTimeGrid(_)
        | Error::InvalidMcConfig(_) => 2,
        _ => 1,
    }
}
