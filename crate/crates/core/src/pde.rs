//! Backward pricing equations and their explicit RK4 time march.
//!
//! In backward time `τ = T - t` the post-default value `u` and the pre-default
//! value `v` satisfy
//!
//! ```text
//! du/dτ = (L - r) u
//! dv/dτ = (L - r - λ - λ γ_z z ∂_z) v + λ û,     û = u(X⁺)
//! ```
//!
//! where `X⁺` is the state after the jumps at default. `û` depends linearly
//! on `u` through a fixed interpolation matrix, so both equations are marched
//! as one linear system; every RK4 stage advances `u` first and feeds the
//! re-interpolated stage value into `v`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid4D, ScalarField, DIM};
use crate::model::ModelParams;
use crate::rbffd::{assemble_l, AxisOperators, OperatorKind, SpatialOperator};
use crate::sparse::SparseMatrix;

const Z: usize = 3;
const RHAT: usize = 1;
const Y: usize = 2;

/// Time step of the RK4 march.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridConfig {
    pub dt: f64,
}

impl Default for TimeGridConfig {
    fn default() -> Self {
        TimeGridConfig { dt: 0.05 }
    }
}

impl TimeGridConfig {
    /// Number of steps and the effective step for a march over `horizon`
    /// years. The step is shrunk so the steps land exactly on the horizon.
    pub fn steps_for(&self, horizon: f64) -> Result<(usize, f64)> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidTimeGrid(format!("dt = {} must be positive", self.dt)));
        }
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidTimeGrid(format!("horizon = {horizon} must be >= 0")));
        }
        if horizon == 0.0 {
            return Ok((0, 0.0));
        }
        let n = ((horizon / self.dt) - 1e-9).ceil().max(1.0) as usize;
        Ok((n, horizon / n as f64))
    }
}

/// `L - r` for the post-default value.
pub fn assemble_pde1_rhs(grid: &Grid4D, ops: &[AxisOperators; DIM], p: &ModelParams) -> SpatialOperator {
    let l = assemble_l(grid, ops, p);
    let n = grid.len();
    SpatialOperator {
        matrix: l.matrix.linear_combination(1.0, &SparseMatrix::identity(n), -p.r_dom),
        kind: OperatorKind::PostDefault,
        ..l
    }
}

/// `λ = e^y` at every node.
pub fn hazard_field(grid: &Grid4D) -> ScalarField {
    ScalarField::from_fn(grid, |x| ModelParams::hazard(x[Y]))
}

/// `L - (r + λ) - λ γ_z z ∂_z` for the pre-default value, and its source `λ û`.
pub fn assemble_pde2_rhs(
    grid: &Grid4D,
    ops: &[AxisOperators; DIM],
    p: &ModelParams,
    u_hat: &ScalarField,
) -> (SpatialOperator, ScalarField) {
    let op = assemble_pde2_operator(grid, ops, p);
    let lambda = hazard_field(grid);
    let source = lambda.values().iter().zip(u_hat.values()).map(|(l, u)| l * u).collect();
    (op, ScalarField::from_vec(source))
}

pub(crate) fn assemble_pde2_operator(
    grid: &Grid4D,
    ops: &[AxisOperators; DIM],
    p: &ModelParams,
) -> SpatialOperator {
    let l = assemble_l(grid, ops, p);
    let n = grid.len();
    let lambda = hazard_field(grid);
    let kill: Vec<f64> = lambda.values().iter().map(|l| -(p.r_dom + l)).collect();
    let mut matrix = l.matrix.linear_combination(1.0, &SparseMatrix::diagonal(&kill), 1.0);
    if p.gamma_z != 0.0 {
        let coef: Vec<f64> = (0..n)
            .map(|i| -lambda.values()[i] * p.gamma_z * grid.point(i)[Z])
            .collect();
        let dz = ops[Z].d1.lift(grid, Z).scale_rows(&coef);
        matrix = matrix.linear_combination(1.0, &dz, 1.0);
    }
    SpatialOperator { matrix, kind: OperatorKind::PreDefault, ..l }
}

/// Interpolation matrix `J` with `(J f)(X) = f(R, r̂(1+γ_r̂), y, z(1+γ_z))`.
pub fn jump_matrix(grid: &Grid4D, gamma_rhat: f64, gamma_z: f64) -> SparseMatrix {
    let n = grid.len();
    let mut t = Vec::with_capacity(n * 16);
    for node in 0..n {
        let mut x = grid.point(node);
        x[RHAT] *= 1.0 + gamma_rhat;
        x[Z] *= 1.0 + gamma_z;
        for (j, w) in grid.interpolation_weights(x) {
            if w != 0.0 {
                t.push((node, j, w));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, t)
}

/// `û(X) = u(X⁺)`, re-interpolated onto the grid nodes.
pub fn jump_shift(grid: &Grid4D, u: &ScalarField, p: &ModelParams) -> ScalarField {
    if p.gamma_rhat == 0.0 && p.gamma_z == 0.0 {
        return u.clone();
    }
    let values = jump_matrix(grid, p.gamma_rhat, p.gamma_z).mul_vec(u.values());
    ScalarField::new(grid, values).expect("same grid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    /// Post-default value `u`.
    Pde1,
    /// Pre-default value `v`.
    Pde2,
}

/// How the pre-default equation sees the post-default value.
#[derive(Debug, Clone, Copy)]
pub enum Coupling<'a> {
    None,
    /// Fixed source field added to the right-hand side.
    Source(&'a ScalarField),
    /// `u` is marched alongside: `du/dτ = A₁ u`, and `v` receives `S u`
    /// with `S = diag(λ) J`.
    Joint {
        pde1: &'a SparseMatrix,
        terminal_u: &'a ScalarField,
        transfer: &'a SparseMatrix,
    },
}

/// One backward march from maturity to the valuation date.
#[derive(Debug, Clone, Copy)]
pub struct PdeProblem<'a> {
    pub equation: Equation,
    pub maturity: f64,
    pub terminal: &'a ScalarField,
    pub operator: &'a SparseMatrix,
    pub coupling: Coupling<'a>,
}

/// Result of a march: the pre- and post-default fields at `t = 0`.
#[derive(Debug, Clone)]
pub struct MarchResult {
    pub value: ScalarField,
    pub post_default: Option<ScalarField>,
    pub steps: usize,
}

/// Classical RK4 for `dx/dτ = f(x)` over `horizon`. Reports a stability
/// error at the first step producing a non-finite value.
pub fn rk4_integrate<F>(f: F, x0: Vec<f64>, horizon: f64, cfg: &TimeGridConfig) -> Result<(Vec<f64>, usize)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let (steps, h) = cfg.steps_for(horizon)?;
    let n = x0.len();
    let mut x = x0;
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut stage = vec![0.0; n];
    for step in 1..=steps {
        f(&x, &mut k[0]);
        for i in 0..n {
            stage[i] = x[i] + 0.5 * h * k[0][i];
        }
        f(&stage, &mut k[1]);
        for i in 0..n {
            stage[i] = x[i] + 0.5 * h * k[1][i];
        }
        f(&stage, &mut k[2]);
        for i in 0..n {
            stage[i] = x[i] + h * k[2][i];
        }
        f(&stage, &mut k[3]);
        let mut finite = true;
        for i in 0..n {
            x[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
            finite &= x[i].is_finite();
        }
        if !finite {
            return Err(Error::Stability { step, steps, dt: h });
        }
    }
    Ok((x, steps))
}

/// Marches `problem` back to `t = 0`.
pub fn rk4_march(grid: &Grid4D, problem: &PdeProblem<'_>, cfg: &TimeGridConfig) -> Result<MarchResult> {
    let n = grid.len();
    let a = problem.operator;
    match problem.coupling {
        Coupling::None => {
            let (x, steps) = rk4_integrate(|x, out| a.mul_vec_into(x, out), problem.terminal.values().to_vec(), problem.maturity, cfg)?;
            Ok(MarchResult { value: ScalarField::new(grid, x)?, post_default: None, steps })
        }
        Coupling::Source(src) => {
            let s = src.values();
            let (x, steps) = rk4_integrate(
                |x, out| {
                    a.mul_vec_into(x, out);
                    for (o, si) in out.iter_mut().zip(s) {
                        *o += si;
                    }
                },
                problem.terminal.values().to_vec(),
                problem.maturity,
                cfg,
            )?;
            Ok(MarchResult { value: ScalarField::new(grid, x)?, post_default: None, steps })
        }
        Coupling::Joint { pde1, terminal_u, transfer } => {
            let mut x0 = terminal_u.values().to_vec();
            x0.extend_from_slice(problem.terminal.values());
            let (x, steps) = rk4_integrate(
                |x, out| {
                    let (u, v) = x.split_at(n);
                    let (du, dv) = out.split_at_mut(n);
                    pde1.mul_vec_into(u, du);
                    a.mul_vec_into(v, dv);
                    for (r, d) in dv.iter_mut().enumerate() {
                        *d += transfer.row(r).map(|(c, w)| w * u[c]).sum::<f64>();
                    }
                },
                x0,
                problem.maturity,
                cfg,
            )?;
            let (u, v) = x.split_at(n);
            Ok(MarchResult {
                value: ScalarField::new(grid, v.to_vec())?,
                post_default: Some(ScalarField::new(grid, u.to_vec())?),
                steps,
            })
        }
    }
}
