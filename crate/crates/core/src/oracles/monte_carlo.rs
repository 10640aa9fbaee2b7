//! Monte Carlo pricing of the quanto CDS straight from the contract
//! definitions.
//!
//! Paths of `(R, r̂, y, Z)` are simulated with a correlated Euler scheme.
//! Default arrives when the integrated intensity crosses an independent
//! unit-exponential draw; at that instant the FX rate and the foreign rate
//! jump and the path stops. Each path carries its own counter-based random
//! stream, so results do not depend on the thread count.

use nalgebra::{Matrix4, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Factor, ModelParams};
use crate::pricing::CdsSchedule;

const RECOVERY_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub paths: usize,
    /// Euler step in years.
    pub step: f64,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { paths: 100_000, step: 1.0 / 48.0, seed: 20_240_601, antithetic: false }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths < 2 {
            return Err(Error::InvalidMcConfig(format!("paths = {} must be at least 2", self.paths)));
        }
        if self.antithetic && !self.paths.is_multiple_of(2) {
            return Err(Error::InvalidMcConfig("antithetic sampling needs an even path count".into()));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidMcConfig(format!("step = {} must be positive", self.step)));
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: usize,
    pub seed: u64,
}

/// Spread and legs of one contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    /// Par spread, decimal.
    pub spread: McEstimate,
    pub protection: McEstimate,
    /// Coupon leg per unit spread.
    pub premium_annuity: McEstimate,
    /// Accrued premium per unit spread.
    pub accrued_annuity: McEstimate,
    /// `E[e^{-rT} Z_T 1{τ > T}]`
    pub survival_fx: McEstimate,
}

/// `B` with `B Bᵀ = ρ`, from the symmetric eigen-decomposition.
pub fn correlation_factor(p: &ModelParams) -> Result<Matrix4<f64>> {
    p.rho.validate().map_err(|e| Error::Factorization(e.to_string()))?;
    let eig = SymmetricEigen::new(p.rho.to_matrix());
    if eig.eigenvalues.iter().any(|l| *l < -1e-10) {
        return Err(Error::Factorization("correlation matrix is not positive semidefinite".into()));
    }
    let sqrt = Matrix4::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    Ok(eig.eigenvectors * sqrt)
}

#[derive(Debug, Clone, Copy)]
struct State {
    recovery: f64,
    rhat: f64,
    y: f64,
    z: f64,
}

/// Per-path discounted cashflows.
#[derive(Debug, Clone, Copy, Default)]
struct PathValue {
    protection: f64,
    premium: f64,
    accrued: f64,
    survival_fx: f64,
}

struct Simulator<'a> {
    p: &'a ModelParams,
    factor: Matrix4<f64>,
    schedule: CdsSchedule,
    step: f64,
}

impl Simulator<'_> {
    /// Correlated shocks in correlation-matrix order `(R, r̂, Z, y)`.
    fn shocks(&self, rng: &mut ChaCha8Rng, sign: f64) -> [f64; 4] {
        let n = nalgebra::Vector4::from_fn(|_, _| sign * rng.sample::<f64, _>(StandardNormal));
        let c = self.factor * n;
        [c[0], c[1], c[2], c[3]]
    }

    fn advance(&self, s: &State, dt: f64, dw: [f64; 4]) -> State {
        let p = self.p;
        let sq = dt.sqrt();
        let lambda = s.y.exp();
        let rhat_pos = s.rhat.max(0.0);
        let r = s.recovery;
        let recovery = r
            + p.kappa_recovery * (p.theta_recovery - r) * dt
            + p.sigma_recovery * (r * (1.0 - r)).max(0.0).sqrt() * sq * dw[Factor::Recovery as usize];
        let rhat = s.rhat
            + p.kappa_rhat * (p.theta_rhat - rhat_pos) * dt
            + p.sigma_rhat * rhat_pos.sqrt() * sq * dw[Factor::ForeignRate as usize];
        let y = s.y + p.kappa_y * (p.theta_y - s.y) * dt + p.sigma_y * sq * dw[Factor::LogHazard as usize];
        let drift = p.r_dom - rhat_pos - lambda * p.gamma_z - 0.5 * p.sigma_z * p.sigma_z;
        let z = s.z * (drift * dt + p.sigma_z * sq * dw[Factor::Fx as usize]).exp();
        State {
            recovery: recovery.clamp(RECOVERY_FLOOR, 1.0 - RECOVERY_FLOOR),
            rhat,
            y,
            z,
        }
    }

    fn path(&self, rng: &mut ChaCha8Rng, sign: f64, threshold: f64) -> PathValue {
        let p = self.p;
        let horizon = self.schedule.maturity;
        let dtc = self.schedule.coupon_interval();
        let steps = (horizon / self.step - 1e-9).ceil() as usize;
        let dt = horizon / steps as f64;
        let mut s = State {
            recovery: p.recovery0,
            rhat: p.rhat0,
            y: p.y0,
            z: p.z0,
        };
        let mut hazard = 0.0;
        let mut out = PathValue::default();
        let mut next_coupon = 1;
        for k in 0..steps {
            let t = k as f64 * dt;
            let increment = s.y.exp() * dt;
            if hazard + increment >= threshold {
                let tau = t + dt * (threshold - hazard) / increment;
                let z_tau = s.z * (1.0 + p.gamma_z);
                let disc = (-p.r_dom * tau).exp();
                out.protection = (1.0 - s.recovery) * z_tau * disc;
                let last_coupon = ((tau / dtc - 1e-12).floor()).max(0.0) * dtc;
                out.accrued = (tau - last_coupon) * z_tau * disc;
                return out;
            }
            hazard += increment;
            let dw = self.shocks(rng, sign);
            s = self.advance(&s, dt, dw);
            let t_next = (k + 1) as f64 * dt;
            while next_coupon <= self.schedule.coupons {
                let tc = next_coupon as f64 * dtc;
                if tc > t_next + 1e-12 {
                    break;
                }
                // coupon dates fall on step boundaries when the step divides Δt_c
                out.premium += dtc * s.z * (-p.r_dom * tc).exp();
                next_coupon += 1;
            }
        }
        out.survival_fx = s.z * (-p.r_dom * horizon).exp();
        out
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Simulated spread and legs of the foreign-traded contract.
pub fn mc_spread(p: &ModelParams, schedule: &CdsSchedule, cfg: &McConfig) -> Result<McReport> {
    p.validate()?;
    schedule.validate()?;
    cfg.validate()?;
    let sim = Simulator {
        p,
        factor: correlation_factor(p)?,
        schedule: *schedule,
        step: cfg.step,
    };
    let groups = if cfg.antithetic { cfg.paths / 2 } else { cfg.paths };
    let values: Vec<PathValue> = (0..groups as u64)
        .into_par_iter()
        .map(|g| {
            let mut rng = rng_for(cfg.seed, g);
            let threshold: f64 = rng.sample(Exp1);
            if cfg.antithetic {
                let mut twin = rng.clone();
                let a = sim.path(&mut rng, 1.0, threshold);
                let b = sim.path(&mut twin, -1.0, threshold);
                PathValue {
                    protection: 0.5 * (a.protection + b.protection),
                    premium: 0.5 * (a.premium + b.premium),
                    accrued: 0.5 * (a.accrued + b.accrued),
                    survival_fx: 0.5 * (a.survival_fx + b.survival_fx),
                }
            } else {
                sim.path(&mut rng, 1.0, threshold)
            }
        })
        .collect();

    let est = |f: &dyn Fn(&PathValue) -> f64| {
        let xs: Vec<f64> = values.iter().map(f).collect();
        let (mean, std_error) = mean_se(&xs);
        McEstimate { mean, std_error, paths: cfg.paths, seed: cfg.seed }
    };
    let protection = est(&|v| v.protection);
    let premium = est(&|v| v.premium);
    let accrued = est(&|v| v.accrued);
    let survival_fx = est(&|v| v.survival_fx);

    let annuity = premium.mean + accrued.mean;
    if !(annuity > 0.0) {
        return Err(Error::DegenerateAnnuity(annuity));
    }
    let s = protection.mean / annuity;
    // delta method for the ratio of means
    let resid: Vec<f64> = values
        .iter()
        .map(|v| v.protection - s * (v.premium + v.accrued))
        .collect();
    let (_, resid_se) = mean_se(&resid);
    Ok(McReport {
        spread: McEstimate { mean: s, std_error: resid_se / annuity, paths: cfg.paths, seed: cfg.seed },
        protection,
        premium_annuity: premium,
        accrued_annuity: accrued,
        survival_fx,
    })
}

/// `E[Z_t e^{∫₀ᵗ r̂} e^{-r t}]`, simulated through default, which equals `z0`
/// when the FX drift is correctly compensated for the jump.
pub fn fx_martingale(p: &ModelParams, horizon: f64, cfg: &McConfig) -> Result<McEstimate> {
    p.validate()?;
    cfg.validate()?;
    let factor = correlation_factor(p)?;
    let sim = Simulator {
        p,
        factor,
        schedule: CdsSchedule { maturity: horizon, coupons: 1, nq: 1 },
        step: cfg.step,
    };
    let steps = (horizon / cfg.step - 1e-9).ceil() as usize;
    let dt = horizon / steps as f64;
    let samples: Vec<f64> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(cfg.seed, i);
            let threshold: f64 = rng.sample(Exp1);
            let mut s = State { recovery: p.recovery0, rhat: p.rhat0, y: p.y0, z: p.z0 };
            let mut hazard = 0.0;
            let mut carry = 0.0;
            let mut defaulted = false;
            for _ in 0..steps {
                let lambda = s.y.exp();
                let before = s;
                let dw = sim.shocks(&mut rng, 1.0);
                let mut next = sim.advance(&s, dt, dw);
                if defaulted {
                    // no compensator after default
                    next.z *= (lambda * p.gamma_z * dt).exp();
                } else if hazard + lambda * dt >= threshold {
                    defaulted = true;
                    next.z *= 1.0 + p.gamma_z;
                    next.rhat *= 1.0 + p.gamma_rhat;
                }
                hazard += lambda * dt;
                carry += before.rhat.max(0.0) * dt;
                s = next;
            }
            s.z * (carry - p.r_dom * horizon).exp()
        })
        .collect();
    let (mean, std_error) = mean_se(&samples);
    Ok(McEstimate { mean, std_error, paths: cfg.paths, seed: cfg.seed })
}
