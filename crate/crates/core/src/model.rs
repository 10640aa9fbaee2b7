//! Model parameters of the four-factor quanto CDS model.
//!
//! State variables are the recovery rate `R`, the foreign short rate `r̂`
//! (CIR), the log-intensity `y` (OU, hazard `λ = e^y`) and the FX rate `z`
//! (domestic currency per unit of foreign currency). The domestic short rate
//! is a deterministic constant. At the default time `z` and `r̂` jump by the
//! proportional amplitudes `gamma_z` and `gamma_rhat`.

use nalgebra::{Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stochastic factors in the order used by the correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    Recovery = 0,
    ForeignRate = 1,
    Fx = 2,
    LogHazard = 3,
}

/// 4×4 instantaneous correlation matrix over `(R, r̂, z, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Correlation(pub [[f64; 4]; 4]);

impl Default for Correlation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Correlation {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Correlation(m)
    }

    pub fn get(&self, a: Factor, b: Factor) -> f64 {
        self.0[a as usize][b as usize]
    }

    /// Sets `ρ_ab` and `ρ_ba`.
    pub fn set(&mut self, a: Factor, b: Factor, value: f64) {
        self.0[a as usize][b as usize] = value;
        self.0[b as usize][a as usize] = value;
    }

    pub fn with(mut self, a: Factor, b: Factor, value: f64) -> Self {
        self.set(a, b, value);
        self
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.0[i][j])
    }

    /// Smallest eigenvalue of the symmetric matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.to_matrix())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..4 {
            if self.0[i][i] != 1.0 {
                return Err(Error::InvalidParams(format!(
                    "rho diagonal entry {i} is {} (must be 1)",
                    self.0[i][i]
                )));
            }
            for j in 0..4 {
                let v = self.0[i][j];
                if !v.is_finite() || v.abs() > 1.0 {
                    return Err(Error::InvalidParams(format!(
                        "rho[{i}][{j}] = {v} outside [-1, 1]"
                    )));
                }
                if v != self.0[j][i] {
                    return Err(Error::InvalidParams(format!(
                        "rho not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -PSD_TOLERANCE {
            return Err(Error::InvalidParams(format!(
                "rho not PSD (smallest eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(())
    }
}

const PSD_TOLERANCE: f64 = 1e-10;

/// All SDE coefficients of the model. Units are annualized; time is in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    #[serde(rename = "R0")]
    pub recovery0: f64,
    #[serde(rename = "kappa_R")]
    pub kappa_recovery: f64,
    #[serde(rename = "theta_R")]
    pub theta_recovery: f64,
    #[serde(rename = "sigma_R")]
    pub sigma_recovery: f64,

    pub rhat0: f64,
    pub kappa_rhat: f64,
    pub theta_rhat: f64,
    pub sigma_rhat: f64,

    pub y0: f64,
    pub kappa_y: f64,
    pub theta_y: f64,
    pub sigma_y: f64,

    pub z0: f64,
    pub sigma_z: f64,

    /// Deterministic domestic short rate.
    pub r_dom: f64,

    pub gamma_z: f64,
    pub gamma_rhat: f64,

    pub rho: Correlation,
}

impl Default for ModelParams {
    /// The reference parameter set: constant recovery, no jumps, no correlation.
    fn default() -> Self {
        ModelParams {
            recovery0: 0.45,
            kappa_recovery: 0.0,
            theta_recovery: 0.1,
            sigma_recovery: 0.0,
            rhat0: 0.03,
            kappa_rhat: 0.08,
            theta_rhat: 0.1,
            sigma_rhat: 0.08,
            y0: -4.089,
            kappa_y: 0.0001,
            theta_y: -210.0,
            sigma_y: 0.4,
            z0: 1.15,
            sigma_z: 0.1,
            r_dom: 0.02,
            gamma_z: 0.0,
            gamma_rhat: 0.0,
            rho: Correlation::identity(),
        }
    }
}

impl ModelParams {
    /// Checks every domain restriction and returns the parameters unchanged.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("R0", self.recovery0),
            ("kappa_R", self.kappa_recovery),
            ("theta_R", self.theta_recovery),
            ("sigma_R", self.sigma_recovery),
            ("rhat0", self.rhat0),
            ("kappa_rhat", self.kappa_rhat),
            ("theta_rhat", self.theta_rhat),
            ("sigma_rhat", self.sigma_rhat),
            ("y0", self.y0),
            ("kappa_y", self.kappa_y),
            ("theta_y", self.theta_y),
            ("sigma_y", self.sigma_y),
            ("z0", self.z0),
            ("sigma_z", self.sigma_z),
            ("r_dom", self.r_dom),
            ("gamma_z", self.gamma_z),
            ("gamma_rhat", self.gamma_rhat),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} is not finite ({v})")));
        }
        let nonneg = [
            ("sigma_R", self.sigma_recovery),
            ("sigma_rhat", self.sigma_rhat),
            ("sigma_y", self.sigma_y),
            ("sigma_z", self.sigma_z),
            ("kappa_R", self.kappa_recovery),
            ("kappa_rhat", self.kappa_rhat),
            ("rhat0", self.rhat0),
        ];
        if let Some((name, v)) = nonneg.iter().find(|(_, v)| *v < 0.0) {
            return Err(Error::InvalidParams(format!("{name} is negative ({v})")));
        }
        for (name, v) in [("R0", self.recovery0), ("theta_R", self.theta_recovery)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.z0 <= 0.0 {
            return Err(Error::InvalidParams(format!("z0 = {} is not positive", self.z0)));
        }
        if self.gamma_z < -1.0 {
            return Err(Error::InvalidParams(format!(
                "gamma_z below -1 ({})",
                self.gamma_z
            )));
        }
        if self.gamma_rhat < -1.0 {
            return Err(Error::InvalidParams(format!(
                "gamma_rhat below -1 ({})",
                self.gamma_rhat
            )));
        }
        self.rho.validate()
    }

    /// Default intensity at log-hazard `y`.
    #[inline]
    pub fn hazard(y: f64) -> f64 {
        y.exp()
    }

    /// Initial state `(R, r̂, y, z)` in grid axis order.
    pub fn initial_state(&self) -> [f64; 4] {
        [self.recovery0, self.rhat0, self.y0, self.z0]
    }

    /// The domestic-contract reduction of these parameters: no FX or foreign
    /// rate dynamics, no jumps, and no correlations involving `z` or `r̂`.
    /// Evaluate it at `z = 1`, `r̂ = r_dom` (see [`Self::domestic_state`]).
    pub fn domestic(&self) -> Self {
        let mut rho = Correlation::identity();
        rho.set(
            Factor::Recovery,
            Factor::LogHazard,
            self.rho.get(Factor::Recovery, Factor::LogHazard),
        );
        ModelParams {
            rhat0: self.r_dom,
            kappa_rhat: 0.0,
            sigma_rhat: 0.0,
            z0: 1.0,
            sigma_z: 0.0,
            gamma_z: 0.0,
            gamma_rhat: 0.0,
            rho,
            ..*self
        }
    }

    pub fn domestic_state(&self) -> [f64; 4] {
        [self.recovery0, self.r_dom, self.y0, 1.0]
    }
}

/// Boundaries of the truncated computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    RecoveryZero,
    RecoveryOne,
    ForeignRateZero,
    ForeignRateMax,
    LogHazardMin,
    LogHazardMax,
    FxZero,
    FxMax,
}

impl Boundary {
    pub const ALL: [Boundary; 8] = [
        Boundary::RecoveryZero,
        Boundary::RecoveryOne,
        Boundary::ForeignRateZero,
        Boundary::ForeignRateMax,
        Boundary::LogHazardMin,
        Boundary::LogHazardMax,
        Boundary::FxZero,
        Boundary::FxMax,
    ];

    /// Grid axis (`R, r̂, y, z` = 0..4) and side (`false` = lower).
    pub fn axis_side(self) -> (usize, bool) {
        match self {
            Boundary::RecoveryZero => (0, false),
            Boundary::RecoveryOne => (0, true),
            Boundary::ForeignRateZero => (1, false),
            Boundary::ForeignRateMax => (1, true),
            Boundary::LogHazardMin => (2, false),
            Boundary::LogHazardMax => (2, true),
            Boundary::FxZero => (3, false),
            Boundary::FxMax => (3, true),
        }
    }

    pub fn from_axis_side(axis: usize, upper: bool) -> Boundary {
        Boundary::ALL[2 * axis + usize::from(upper)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// Outflow-dominated degenerate boundary: no condition is imposed, the PDE
    /// row is used with its boundary-evaluated coefficients.
    DegeneratePde,
    /// The second derivative normal to the boundary is set to zero.
    VanishingSecondDerivative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryRegime {
    pub boundary: Boundary,
    pub kind: BoundaryKind,
}

/// Regime for each of the eight boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryRegimes([BoundaryRegime; 8]);

impl BoundaryRegimes {
    pub fn kind(&self, boundary: Boundary) -> BoundaryKind {
        self.0[boundary as usize].kind
    }

    pub fn at(&self, axis: usize, upper: bool) -> BoundaryKind {
        self.kind(Boundary::from_axis_side(axis, upper))
    }

    pub fn iter(&self) -> impl Iterator<Item = &BoundaryRegime> {
        self.0.iter()
    }
}

/// Classifies each boundary by the inflow tests on the recovery and the
/// foreign-rate directions. Equality counts as degenerate.
pub fn boundary_regimes(p: &ModelParams) -> BoundaryRegimes {
    let half_var_r = 0.5 * p.sigma_recovery * p.sigma_recovery;
    let recovery_zero = p.kappa_recovery * p.theta_recovery - half_var_r >= 0.0;
    let recovery_one = p.kappa_recovery * (p.theta_recovery - 1.0) + half_var_r <= 0.0;
    let rate_zero = p.kappa_rhat * p.theta_rhat - 0.5 * p.sigma_rhat * p.sigma_rhat >= 0.0;

    let kind = |degenerate: bool| {
        if degenerate {
            BoundaryKind::DegeneratePde
        } else {
            BoundaryKind::VanishingSecondDerivative
        }
    };
    let regimes = Boundary::ALL.map(|boundary| BoundaryRegime {
        boundary,
        kind: match boundary {
            Boundary::RecoveryZero => kind(recovery_zero),
            Boundary::RecoveryOne => kind(recovery_one),
            Boundary::ForeignRateZero => kind(rate_zero),
            _ => BoundaryKind::VanishingSecondDerivative,
        },
    });
    BoundaryRegimes(regimes)
}

/// Shape parameters `(alpha, beta)` of the stationary Beta law of the recovery.
pub fn beta_stationary_params(p: &ModelParams) -> Result<(f64, f64)> {
    if p.sigma_recovery == 0.0 || p.kappa_recovery == 0.0 {
        return Err(Error::DegenerateRecovery(format!(
            "kappa_R = {}, sigma_R = {}: recovery has no stationary Beta law",
            p.kappa_recovery, p.sigma_recovery
        )));
    }
    if !(p.theta_recovery > 0.0 && p.theta_recovery < 1.0) {
        return Err(Error::DegenerateRecovery(format!(
            "theta_R = {} must lie strictly inside (0, 1)",
            p.theta_recovery
        )));
    }
    let var = p.sigma_recovery * p.sigma_recovery;
    Ok((
        p.kappa_recovery * p.theta_recovery / var,
        p.kappa_recovery * (1.0 - p.theta_recovery) / var,
    ))
}
