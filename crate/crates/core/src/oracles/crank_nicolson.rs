//! Domestic CDS on the log-hazard alone, by Crank-Nicolson finite differences.
//!
//! With a constant recovery and no FX, the state reduces to `y`. The same
//! two-step pair of equations is solved on a fine uniform `y` grid with
//! second-order central differences and one-sided first derivatives at the
//! two ends, where the second derivative is dropped.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::model::ModelParams;
use crate::pde::TimeGridConfig;
use crate::pricing::{par_spread, CdsSchedule, LegTerms};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CnConfig {
    pub nodes: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub dt: f64,
}

impl Default for CnConfig {
    fn default() -> Self {
        CnConfig { nodes: 241, y_min: -6.0, y_max: 0.0, dt: 0.05 }
    }
}

/// Row `i` of a matrix with three consecutive nonzeros starting at `start`.
#[derive(Debug, Clone, Copy)]
struct Row {
    start: usize,
    w: [f64; 3],
}

/// `½σ_y² ∂²_y + κ_y(θ_y - y) ∂_y - c(y)` on the grid, as banded rows.
fn operator(axis: &Axis, p: &ModelParams, kill: impl Fn(f64) -> f64) -> Vec<Row> {
    let n = axis.nodes;
    let dy = axis.spacing();
    let diff = 0.5 * p.sigma_y * p.sigma_y / (dy * dy);
    (0..n)
        .map(|i| {
            let y = axis.coord(i);
            let mu = p.kappa_y * (p.theta_y - y) / (2.0 * dy);
            let c = kill(y);
            if i == 0 {
                Row { start: 0, w: [-3.0 * mu - c, 4.0 * mu, -mu] }
            } else if i == n - 1 {
                Row { start: n - 3, w: [mu, -4.0 * mu, 3.0 * mu - c] }
            } else {
                Row { start: i - 1, w: [diff - mu, -2.0 * diff - c, diff + mu] }
            }
        })
        .collect()
}

fn apply(rows: &[Row], x: &[f64], scale: f64, out: &mut [f64]) {
    for (i, r) in rows.iter().enumerate() {
        let ax: f64 = (0..3).map(|k| r.w[k] * x[r.start + k]).sum();
        out[i] = x[i] + scale * ax;
    }
}

/// Factorized `I - scale·A` for a banded `A`.
struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// Elimination factors folding the corner entries into rows 0 and n-1.
    first: f64,
    last: f64,
}

impl Tridiagonal {
    fn new(rows: &[Row], scale: f64) -> Self {
        let n = rows.len();
        let mut full: Vec<[f64; 3]> = rows.iter().map(|r| r.w.map(|w| -scale * w)).collect();
        for (i, r) in rows.iter().enumerate() {
            full[i][i - r.start] += 1.0;
        }
        // row 0 spans columns 0..3 and row 1 spans 0..3: remove column 2 of row 0
        let first = if full[0][2] == 0.0 { 0.0 } else { full[0][2] / full[1][2] };
        for k in 0..3 {
            full[0][k] -= first * full[1][k];
        }
        // row n-1 spans n-3..n and row n-2 spans n-3..n: remove column n-3
        let last = if full[n - 1][0] == 0.0 { 0.0 } else { full[n - 1][0] / full[n - 2][0] };
        for k in 0..3 {
            full[n - 1][k] -= last * full[n - 2][k];
        }
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        diag[0] = full[0][0];
        upper[0] = full[0][1];
        for i in 1..n - 1 {
            lower[i] = full[i][0];
            diag[i] = full[i][1];
            upper[i] = full[i][2];
        }
        lower[n - 1] = full[n - 1][1];
        diag[n - 1] = full[n - 1][2];
        // forward elimination of the Thomas algorithm
        for i in 1..n {
            let f = lower[i] / diag[i - 1];
            lower[i] = f;
            diag[i] -= f * upper[i - 1];
        }
        Tridiagonal { lower, diag, upper, first, last }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        b[0] -= self.first * b[1];
        b[n - 1] -= self.last * b[n - 2];
        for i in 1..n {
            b[i] -= self.lower[i] * b[i - 1];
        }
        b[n - 1] /= self.diag[n - 1];
        for i in (0..n - 1).rev() {
            b[i] = (b[i] - self.upper[i] * b[i + 1]) / self.diag[i];
        }
    }
}

/// Solver for one parameter set on a fixed `y` grid.
pub struct CnSolver {
    axis: Axis,
    a1: Vec<Row>,
    a2: Vec<Row>,
    lambda: Vec<f64>,
    y0: f64,
    time: TimeGridConfig,
}

impl CnSolver {
    pub fn new(p: &ModelParams, cfg: &CnConfig) -> Result<Self> {
        if cfg.nodes < 4 {
            return Err(Error::InvalidGrid(format!("{} y nodes, need at least 4", cfg.nodes)));
        }
        let axis = Axis::new(cfg.y_min, cfg.y_max, cfg.nodes)?;
        let r = p.r_dom;
        Ok(CnSolver {
            a1: operator(&axis, p, |_| r),
            a2: operator(&axis, p, |y| r + ModelParams::hazard(y)),
            lambda: axis.coords().iter().map(|&y| ModelParams::hazard(y)).collect(),
            axis,
            y0: p.y0,
            time: TimeGridConfig { dt: cfg.dt },
        })
    }

    /// Marches the post-default `u` and pre-default `v` from `nu` to 0 and
    /// returns `v`.
    pub fn march(&self, terminal_u: f64, terminal_v: f64, nu: f64) -> Result<Vec<f64>> {
        let n = self.axis.nodes;
        let (steps, h) = self.time.steps_for(nu)?;
        let mut u = vec![terminal_u; n];
        let mut v = vec![terminal_v; n];
        if steps == 0 {
            return Ok(v);
        }
        let m1 = Tridiagonal::new(&self.a1, 0.5 * h);
        let m2 = Tridiagonal::new(&self.a2, 0.5 * h);
        let coupled = terminal_u != 0.0;
        let mut u_next = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for step in 1..=steps {
            if coupled {
                apply(&self.a1, &u, 0.5 * h, &mut u_next);
                m1.solve(&mut u_next);
            }
            apply(&self.a2, &v, 0.5 * h, &mut rhs);
            if coupled {
                for i in 0..n {
                    rhs[i] += 0.5 * h * self.lambda[i] * (u[i] + u_next[i]);
                }
                std::mem::swap(&mut u, &mut u_next);
            }
            m2.solve(&mut rhs);
            std::mem::swap(&mut v, &mut rhs);
            if !v.iter().all(|x| x.is_finite()) {
                return Err(Error::Stability { step, steps, dt: h });
            }
        }
        Ok(v)
    }

    /// Linear interpolation of a nodal vector at the initial log-hazard.
    pub fn at_initial_state(&self, v: &[f64]) -> f64 {
        let (i, t) = self.axis.locate(self.y0);
        (1.0 - t) * v[i] + t * v[i + 1]
    }

    pub fn leg_terms(&self, recovery: f64, schedule: &CdsSchedule) -> Result<LegTerms> {
        schedule.validate()?;
        let tasks: Vec<(usize, f64)> = (0..schedule.coupons)
            .flat_map(|i| schedule.quadrature_nodes(i).into_iter().map(move |nu| (i, nu)))
            .collect();
        let solved: Vec<[f64; 3]> = tasks
            .par_iter()
            .map(|&(_, nu)| {
                let at = |v: Vec<f64>| self.at_initial_state(&v);
                Ok([
                    at(self.march(0.0, 1.0, nu)?),
                    at(self.march((1.0 - recovery) / nu, 0.0, nu)?),
                    at(self.march(1.0 / nu, 0.0, nu)?),
                ])
            })
            .collect::<Result<_>>()?;
        let m = schedule.coupons;
        let h = schedule.quadrature_step();
        let mut terms = LegTerms {
            period_start: (0..m).map(|i| schedule.period_start(i)).collect(),
            a: vec![0.0; m],
            b: vec![0.0; m],
            c: vec![0.0; m],
            d: vec![0.0; m],
            w_at_coupon: vec![0.0; m],
        };
        for (&(i, nu), &[w, gbar, gtilde]) in tasks.iter().zip(&solved) {
            let t = terms.period_start[i];
            terms.a[i] += h * w;
            terms.b[i] += h * gbar;
            terms.c[i] += h * nu * gtilde;
            terms.d[i] += h * t * gtilde;
            terms.w_at_coupon[i] = w;
        }
        Ok(terms)
    }
}

/// Domestic par spread of a constant-recovery contract on the `y` grid.
pub fn cn_domestic_spread(p: &ModelParams, schedule: &CdsSchedule, cfg: &CnConfig) -> Result<f64> {
    if p.kappa_recovery != 0.0 || p.sigma_recovery != 0.0 {
        return Err(Error::InvalidParams(
            "the one-dimensional benchmark needs a constant recovery (kappa_R = sigma_R = 0)".into(),
        ));
    }
    let solver = CnSolver::new(p, cfg)?;
    par_spread(&solver.leg_terms(p.recovery0, schedule)?)
}
