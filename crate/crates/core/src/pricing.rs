//! CDS legs and par spreads from the backward solves.
//!
//! For a maturity `ν` the engine marches three families back to `t = 0`:
//!
//! * `w(ν)`: pre-default value of receiving `Z_ν` at `ν` (coupon leg),
//! * `ḡ(ν)`: density of the protection payment `(1 - R_τ) Z_τ` at `τ = ν`,
//! * `g̃(ν)`: density of the FX-converted unit payment at default, used for
//!   accrued premium; `g(ν)` is the recovered part with `g̃ = g + ḡ`.
//!
//! The legs are right-endpoint Riemann sums of these over each coupon
//! period, and the par spread is `Σ B / Σ (A + C - D)`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_grid, Grid4D, GridConfig, ScalarField, DIM};
use crate::model::ModelParams;
use crate::oracles::crank_nicolson::{cn_domestic_spread, CnConfig};
use crate::pde::{
    assemble_pde1_rhs, assemble_pde2_operator, hazard_field, jump_matrix, rk4_march, Coupling,
    Equation, PdeProblem, TimeGridConfig,
};
use crate::rbffd::{build_axis_operators, AxisOperators, ShapeRule, SpatialOperator};
use crate::sparse::SparseMatrix;

/// Premium schedule of a CDS starting today.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CdsSchedule {
    /// Maturity in years.
    pub maturity: f64,
    /// Number of coupon payments `m`.
    pub coupons: usize,
    /// Quadrature points per coupon period.
    pub nq: usize,
}

impl Default for CdsSchedule {
    fn default() -> Self {
        CdsSchedule { maturity: 5.0, coupons: 120, nq: 1 }
    }
}

impl CdsSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.maturity > 0.0) || !self.maturity.is_finite() {
            return Err(Error::InvalidSchedule(format!("maturity = {} must be positive", self.maturity)));
        }
        if self.coupons == 0 {
            return Err(Error::InvalidSchedule("need at least one coupon".into()));
        }
        if self.nq == 0 {
            return Err(Error::InvalidSchedule("nq must be at least 1".into()));
        }
        Ok(())
    }

    pub fn coupon_interval(&self) -> f64 {
        self.maturity / self.coupons as f64
    }

    pub fn quadrature_step(&self) -> f64 {
        self.coupon_interval() / self.nq as f64
    }

    /// Start of coupon period `i` (0-based), `t_i = i Δt_c`.
    pub fn period_start(&self, i: usize) -> f64 {
        i as f64 * self.coupon_interval()
    }

    /// Coupon dates `t_1, …, t_m`.
    pub fn coupon_dates(&self) -> Vec<f64> {
        (1..=self.coupons).map(|i| self.period_start(i)).collect()
    }

    /// Quadrature nodes `ν_k = t_i + k h`, `k = 1..N_q`, of period `i`.
    pub fn quadrature_nodes(&self, i: usize) -> Vec<f64> {
        let t = self.period_start(i);
        let h = self.quadrature_step();
        (1..=self.nq)
            .map(|k| if k == self.nq { self.period_start(i + 1) } else { t + k as f64 * h })
            .collect()
    }
}

/// The default-time densities solved for in the two-step procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GKind {
    /// `g`: terminal `R z (1+γ_z) / T`.
    Recovered,
    /// `ḡ`: terminal `(1-R) z (1+γ_z) / T`, the protection payment.
    Protection,
    /// `g̃`: terminal `z (1+γ_z) / T`, the converted unit notional.
    Notional,
}

/// Terminal data of PDE1 for `kind` at maturity `t`; zero at `t = 0`.
pub fn terminal_condition(kind: GKind, grid: &Grid4D, p: &ModelParams, t: f64) -> ScalarField {
    if t == 0.0 {
        return ScalarField::zeros(grid);
    }
    let scale = (1.0 + p.gamma_z) / t;
    ScalarField::from_fn(grid, |x| {
        let (r, z) = (x[0], x[3]);
        let k = match kind {
            GKind::Recovered => r,
            GKind::Protection => 1.0 - r,
            GKind::Notional => 1.0,
        };
        k * z * scale
    })
}

/// Numerical settings of the 4D engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub grid: GridConfig,
    pub time: TimeGridConfig,
    pub shape: ShapeRule,
}

/// Assembled operators for one parameter set, evaluated at a fixed state.
#[derive(Debug, Clone)]
pub struct Engine {
    params: ModelParams,
    grid: Grid4D,
    ops: [AxisOperators; DIM],
    pde1: SpatialOperator,
    pde2: SpatialOperator,
    transfer: SparseMatrix,
    state: [f64; DIM],
    time: TimeGridConfig,
}

impl Engine {
    /// Engine for the foreign-traded contract at the parameters' initial state.
    pub fn new(p: &ModelParams, cfg: &EngineConfig) -> Result<Self> {
        Self::at_state(p, cfg, p.initial_state())
    }

    /// Engine for the domestic-traded contract.
    pub fn domestic(p: &ModelParams, cfg: &EngineConfig) -> Result<Self> {
        Self::at_state(&p.domestic(), cfg, p.domestic_state())
    }

    pub fn at_state(p: &ModelParams, cfg: &EngineConfig, state: [f64; DIM]) -> Result<Self> {
        p.validate()?;
        cfg.time.steps_for(1.0)?;
        let grid = build_grid(&cfg.grid, p)?;
        let ops = build_axis_operators(&grid, cfg.shape)?;
        let pde1 = assemble_pde1_rhs(&grid, &ops, p);
        let pde2 = assemble_pde2_operator(&grid, &ops, p);
        // The terminal data already carry the FX jump factor (1 + γ_z), and the
        // post-default value is linear in z, so û only moves the foreign rate.
        let transfer = jump_matrix(&grid, p.gamma_rhat, 0.0).scale_rows(hazard_field(&grid).values());
        Ok(Engine { params: *p, grid, ops, pde1, pde2, transfer, state, time: cfg.time })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid4D {
        &self.grid
    }

    pub fn axis_operators(&self) -> &[AxisOperators; DIM] {
        &self.ops
    }

    pub fn state(&self) -> [f64; DIM] {
        self.state
    }

    pub fn time(&self) -> TimeGridConfig {
        self.time
    }

    pub fn pde1(&self) -> &SpatialOperator {
        &self.pde1
    }

    pub fn pde2(&self) -> &SpatialOperator {
        &self.pde2
    }

    /// Field value at the engine's state by multilinear interpolation.
    pub fn value_at_state(&self, field: &ScalarField) -> f64 {
        self.grid.interpolate(field, self.state)
    }

    /// Where the valuation state sits relative to the grid.
    pub fn state_location(&self) -> StateLocation {
        let mut on_node = true;
        for (a, &x) in self.grid.axes().iter().zip(&self.state) {
            if x < a.lower || x > a.upper {
                return StateLocation::Extrapolated;
            }
            let (_, t) = a.locate(x);
            on_node &= t == 0.0 || t == 1.0;
        }
        if on_node {
            StateLocation::Node
        } else {
            StateLocation::Interpolated
        }
    }

    /// Pre-default value of receiving `Z_ν` at `ν` if no default occurred.
    /// The post-default equation is identically zero, so only PDE2 is marched.
    pub fn solve_w(&self, nu: f64) -> Result<(ScalarField, f64)> {
        let terminal = ScalarField::coordinate(&self.grid, 3);
        let problem = PdeProblem {
            equation: Equation::Pde2,
            maturity: nu,
            terminal: &terminal,
            operator: &self.pde2.matrix,
            coupling: Coupling::None,
        };
        let field = rk4_march(&self.grid, &problem, &self.time)?.value;
        let value = self.value_at_state(&field);
        Ok((field, value))
    }

    /// `kind` density at default time `ν`: PDE1 from its terminal data,
    /// then PDE2 from zero with the jump-shifted coupling.
    pub fn solve_g_field(&self, kind: GKind, nu: f64) -> Result<ScalarField> {
        if nu == 0.0 {
            return Ok(ScalarField::zeros(&self.grid));
        }
        let terminal_u = terminal_condition(kind, &self.grid, &self.params, nu);
        let zero = ScalarField::zeros(&self.grid);
        let problem = PdeProblem {
            equation: Equation::Pde2,
            maturity: nu,
            terminal: &zero,
            operator: &self.pde2.matrix,
            coupling: Coupling::Joint {
                pde1: &self.pde1.matrix,
                terminal_u: &terminal_u,
                transfer: &self.transfer,
            },
        };
        Ok(rk4_march(&self.grid, &problem, &self.time)?.value)
    }

    pub fn solve_g(&self, kind: GKind, nu: f64) -> Result<f64> {
        Ok(self.value_at_state(&self.solve_g_field(kind, nu)?))
    }

    /// All quadrature terms of the schedule, solved in parallel.
    pub fn leg_terms(&self, schedule: &CdsSchedule) -> Result<LegTerms> {
        schedule.validate()?;
        let tasks: Vec<(usize, f64)> = (0..schedule.coupons)
            .flat_map(|i| schedule.quadrature_nodes(i).into_iter().map(move |nu| (i, nu)))
            .collect();
        let solved: Vec<[f64; 3]> = tasks
            .par_iter()
            .map(|&(_, nu)| {
                Ok([
                    self.solve_w(nu)?.1,
                    self.solve_g(GKind::Protection, nu)?,
                    self.solve_g(GKind::Notional, nu)?,
                ])
            })
            .collect::<Result<_>>()?;

        let h = schedule.quadrature_step();
        let m = schedule.coupons;
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

/// Position of the valuation state relative to the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateLocation {
    Node,
    Interpolated,
    Extrapolated,
}

/// Per-period quadrature terms, in domestic currency per unit notional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegTerms {
    pub period_start: Vec<f64>,
    /// `A_i = h Σ w(ν_k)`
    pub a: Vec<f64>,
    /// `B_i = h Σ ḡ(ν_k)`
    pub b: Vec<f64>,
    /// `C_i = h Σ ν_k g̃(ν_k)`
    pub c: Vec<f64>,
    /// `D_i = h t_i Σ g̃(ν_k)`
    pub d: Vec<f64>,
    /// `w(t_{i+1})`, for the discrete coupon sum `Δt_c Σ w(t_i)`.
    pub w_at_coupon: Vec<f64>,
}

impl LegTerms {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn scaled(&self, k: f64) -> LegTerms {
        let s = |v: &[f64]| v.iter().map(|x| k * x).collect();
        LegTerms {
            period_start: self.period_start.clone(),
            a: s(&self.a),
            b: s(&self.b),
            c: s(&self.c),
            d: s(&self.d),
            w_at_coupon: s(&self.w_at_coupon),
        }
    }

    /// Coupon leg per unit spread, `Σ A_i`.
    pub fn premium_annuity(&self) -> f64 {
        self.a.iter().sum()
    }

    /// Accrued premium per unit spread, `Σ (C_i - D_i)`.
    pub fn accrued_annuity(&self) -> f64 {
        self.c.iter().zip(&self.d).map(|(c, d)| c - d).sum()
    }

    /// Protection leg, `Σ B_i`.
    pub fn protection(&self) -> f64 {
        self.b.iter().sum()
    }

    /// Coupon leg per unit spread in the discrete form `Δt_c Σ w(t_i)`.
    pub fn discrete_premium_annuity(&self, schedule: &CdsSchedule) -> f64 {
        schedule.coupon_interval() * self.w_at_coupon.iter().sum::<f64>()
    }
}

/// `s = Σ B / Σ (A + C - D)`, as a decimal.
pub fn par_spread(terms: &LegTerms) -> Result<f64> {
    let denom = terms.premium_annuity() + terms.accrued_annuity();
    if !(denom > 0.0) {
        return Err(Error::DegenerateAnnuity(denom));
    }
    Ok(terms.protection() / denom)
}

/// Domestic par spread. With a constant recovery this is the 1D
/// Crank-Nicolson benchmark in `y`; otherwise the 4D engine on the
/// domestic reduction of `p`.
pub fn domestic_spread(p: &ModelParams, schedule: &CdsSchedule, cfg: &EngineConfig) -> Result<f64> {
    if p.kappa_recovery == 0.0 && p.sigma_recovery == 0.0 {
        let cn = CnConfig { y_min: cfg.grid.y_min, dt: cfg.time.dt, ..CnConfig::default() };
        cn_domestic_spread(p, schedule, &cn)
    } else {
        domestic_spread_4d(p, schedule, cfg)
    }
}

/// Domestic par spread from the 4D engine.
pub fn domestic_spread_4d(p: &ModelParams, schedule: &CdsSchedule, cfg: &EngineConfig) -> Result<f64> {
    par_spread(&Engine::domestic(p, cfg)?.leg_terms(schedule)?)
}

/// Leg values of one contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegValues {
    /// `L_c / s`
    pub premium_annuity: f64,
    /// `L_a / s`
    pub accrued_annuity: f64,
    /// `L_p`
    pub protection: f64,
}

impl From<&LegTerms> for LegValues {
    fn from(t: &LegTerms) -> Self {
        LegValues {
            premium_annuity: t.premium_annuity(),
            accrued_annuity: t.accrued_annuity(),
            protection: t.protection(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMetadata {
    pub nodes: [usize; DIM],
    pub dt: f64,
    pub nq: usize,
    pub shape: ShapeRule,
    pub state_location: StateLocation,
    pub runtime_seconds: f64,
}

/// Foreign and domestic spreads and the quanto basis between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadReport {
    pub s: f64,
    pub s_bps: f64,
    pub s_d: f64,
    pub s_d_bps: f64,
    pub delta_s_bps: f64,
    /// `(1 + γ_z) s_d` in bps.
    pub reference_bps: f64,
    pub legs: LegValues,
    pub domestic_legs: LegValues,
    pub metadata: SolverMetadata,
}

/// Prices the foreign- and domestic-traded contracts on the same grid and
/// numerics and reports `Δs = s - s_d`.
pub fn quanto_basis(p: &ModelParams, schedule: &CdsSchedule, cfg: &EngineConfig) -> Result<(SpreadReport, LegTerms)> {
    let start = Instant::now();
    let foreign = Engine::new(p, cfg)?;
    let terms = foreign.leg_terms(schedule)?;
    let s = par_spread(&terms)?;
    let domestic_terms = Engine::domestic(p, cfg)?.leg_terms(schedule)?;
    let s_d = par_spread(&domestic_terms)?;
    let report = SpreadReport {
        s,
        s_bps: s * 1e4,
        s_d,
        s_d_bps: s_d * 1e4,
        delta_s_bps: (s - s_d) * 1e4,
        reference_bps: (1.0 + p.gamma_z) * s_d * 1e4,
        legs: LegValues::from(&terms),
        domestic_legs: LegValues::from(&domestic_terms),
        metadata: SolverMetadata {
            nodes: cfg.grid.nodes,
            dt: cfg.time.dt,
            nq: schedule.nq,
            shape: cfg.shape,
            state_location: foreign.state_location(),
            runtime_seconds: start.elapsed().as_secs_f64(),
        },
    };
    Ok((report, terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short() -> CdsSchedule {
        CdsSchedule { maturity: 1.0, coupons: 12, nq: 1 }
    }

    #[test]
    fn schedule_nodes() {
        let s = CdsSchedule::default();
        assert!((s.coupon_interval() - 5.0 / 120.0).abs() < 1e-15);
        assert_eq!(s.coupon_dates().len(), 120);
        assert_eq!(*s.coupon_dates().last().unwrap(), 5.0);
        let s4 = CdsSchedule { nq: 4, ..s };
        let nodes = s4.quadrature_nodes(3);
        assert_eq!(nodes.len(), 4);
        assert_eq!(nodes[3], s4.period_start(4));
        assert!(CdsSchedule { coupons: 0, ..s }.validate().is_err());
        assert!(CdsSchedule { nq: 0, ..s }.validate().is_err());
        assert!(CdsSchedule { maturity: -1.0, ..s }.validate().is_err());
    }

    #[test]
    fn terminal_examples() {
        let p = ModelParams::default();
        let g = build_grid(&GridConfig::default(), &p).unwrap();
        let gbar = terminal_condition(GKind::Protection, &g, &p, 5.0);
        let at = g.interpolate(&gbar, [0.45, 0.03, -4.089, 1.15]);
        assert!((at - 0.55 * 1.15 / 5.0).abs() < 1e-12);
        assert!((at - 0.1265).abs() < 1e-12);
        let gr = terminal_condition(GKind::Recovered, &g, &p, 5.0);
        let gt = terminal_condition(GKind::Notional, &g, &p, 5.0);
        for i in 0..g.len() {
            assert!((gt.values()[i] - gr.values()[i] - gbar.values()[i]).abs() < 1e-15);
        }
        assert!(terminal_condition(GKind::Notional, &g, &p, 0.0).values().iter().all(|v| *v == 0.0));

        let pj = ModelParams { gamma_z: -1.0, ..p };
        let gbar = terminal_condition(GKind::Protection, &g, &pj, 5.0);
        let gt = terminal_condition(GKind::Notional, &g, &pj, 5.0);
        assert!(gbar.values().iter().chain(gt.values()).all(|v| *v == 0.0));
    }

    #[test]
    fn par_spread_algebra() {
        let t = LegTerms {
            period_start: vec![0.0, 0.5],
            a: vec![0.5, 0.45],
            b: vec![0.003, 0.004],
            c: vec![0.01, 0.012],
            d: vec![0.004, 0.005],
            w_at_coupon: vec![0.9, 0.8],
        };
        let s = par_spread(&t).unwrap();
        assert!((s - 0.007 / (0.95 + 0.013)).abs() < 1e-15);
        let k = 3.7;
        assert!((par_spread(&t.scaled(k)).unwrap() - s).abs() < 1e-15);
        let zero_b = LegTerms { b: vec![0.0, 0.0], ..t.clone() };
        assert_eq!(par_spread(&zero_b).unwrap(), 0.0);
        let bad = LegTerms { a: vec![0.0, 0.0], c: vec![0.0, 0.0], ..t };
        assert!(matches!(par_spread(&bad), Err(Error::DegenerateAnnuity(_))));
    }

    #[test]
    fn w_zero_hazard_limit() {
        // no diffusion, no mean reversion, hazard e^{-40}: w = z e^{-r̂ T}
        let p = ModelParams {
            sigma_recovery: 0.0,
            sigma_rhat: 0.0,
            sigma_y: 0.0,
            sigma_z: 0.0,
            kappa_rhat: 0.0,
            kappa_y: 0.0,
            y0: -40.0,
            ..Default::default()
        };
        let cfg = EngineConfig {
            grid: GridConfig { y_min: -40.0, ..Default::default() },
            ..Default::default()
        };
        let engine = Engine::at_state(&p, &cfg, [0.45, 1.0 / 9.0, -40.0, 1.0]).unwrap();
        let (_, w) = engine.solve_w(2.0).unwrap();
        let expected = (-2.0f64 / 9.0).exp();
        // Gaussian stencils differentiate z to O((εh)²), about 1e-4 here
        assert!((w - expected).abs() < 5e-4 * expected, "{w} vs {expected}");
    }

    #[test]
    fn superposition_and_limits() {
        let p = ModelParams { gamma_z: -0.2, gamma_rhat: 0.5, ..Default::default() };
        let engine = Engine::new(&p, &EngineConfig::default()).unwrap();
        for nu in [0.25, 1.0] {
            let g = engine.solve_g(GKind::Recovered, nu).unwrap();
            let gbar = engine.solve_g(GKind::Protection, nu).unwrap();
            let gt = engine.solve_g(GKind::Notional, nu).unwrap();
            assert!((gt - g - gbar).abs() <= 1e-8 * gt.abs(), "{gt} vs {}", g + gbar);
            assert!(gbar > 0.0);
        }
        assert_eq!(engine.solve_g(GKind::Protection, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn accrual_nonnegative_and_w_bounded() {
        let p = ModelParams::default();
        let engine = Engine::new(&p, &EngineConfig::default()).unwrap();
        let terms = engine.leg_terms(&short()).unwrap();
        for i in 0..terms.len() {
            assert!(terms.c[i] - terms.d[i] >= 0.0);
            assert!(terms.b[i] >= 0.0);
            assert!(terms.w_at_coupon[i] > 0.0 && terms.w_at_coupon[i] <= p.z0 * 1.02);
        }
        let s = par_spread(&terms).unwrap();
        assert!(s > 0.0 && s < 0.03, "{s}");
        // one quadrature point per period: A_i = Δt_c w(t_{i+1})
        let diff = terms.premium_annuity() - terms.discrete_premium_annuity(&short());
        assert!(diff.abs() < 1e-14);
    }

    #[test]
    fn total_devaluation_gives_zero_spread() {
        let p = ModelParams { gamma_z: -1.0, ..Default::default() };
        let engine = Engine::new(&p, &EngineConfig::default()).unwrap();
        let terms = engine.leg_terms(&short()).unwrap();
        assert!(terms.b.iter().chain(&terms.c).chain(&terms.d).all(|v| *v == 0.0));
        assert_eq!(par_spread(&terms).unwrap(), 0.0);
    }
}
