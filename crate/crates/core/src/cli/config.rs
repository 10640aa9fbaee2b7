//! JSON run configuration. Every block is optional and defaults to the
//! calibration of the reference study; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridConfig;
use crate::model::{Factor, ModelParams};
use crate::oracles::{CnConfig, McConfig};
use crate::pde::TimeGridConfig;
use crate::pricing::{CdsSchedule, EngineConfig};
use crate::rbffd::ShapeRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    #[default]
    Price,
    Sweep,
    Benchmark,
    McCheck,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown task `{s}` (price, sweep, benchmark, mc-check)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub dt: f64,
    pub nq: usize,
    /// Worker threads; all available cores when absent.
    pub threads: Option<usize>,
    pub shape: ShapeRule,
}

impl Default for SolverBlock {
    fn default() -> Self {
        SolverBlock { dt: 0.05, nq: 1, threads: None, shape: ShapeRule::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleBlock {
    pub maturity: f64,
    pub coupons: usize,
}

impl Default for ScheduleBlock {
    fn default() -> Self {
        ScheduleBlock { maturity: 5.0, coupons: 120 }
    }
}

/// One swept parameter: a model field name as spelled in the `model` block
/// (for example `gamma_z`, `kappa_R`) or a correlation `rho_<a>_<b>` with
/// factors `R`, `rhat`, `z`, `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub param: String,
    pub values: Vec<f64>,
    /// Optional second parameter; the sweep runs over the Cartesian product.
    #[serde(default)]
    pub by: Option<SweepAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: PathBuf,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelParams,
    pub grid: GridConfig,
    pub solver: SolverBlock,
    pub schedule: ScheduleBlock,
    pub task: Task,
    pub sweep: Option<SweepBlock>,
    pub mc: McConfig,
    pub benchmark: CnConfig,
    pub output: OutputBlock,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.grid.validate()?;
        self.schedule().validate()?;
        self.engine().time.steps_for(1.0)?;
        if self.solver.threads == Some(0) {
            return Err(Error::Config("solver.threads must be at least 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            for axis in std::iter::once((&sweep.param, &sweep.values))
                .chain(sweep.by.as_ref().map(|b| (&b.param, &b.values)))
            {
                if axis.1.is_empty() {
                    return Err(Error::Config(format!("sweep over `{}` has no values", axis.0)));
                }
                with_param(&self.model, axis.0, axis.1[0])?;
            }
        }
        if self.task == Task::Sweep && self.sweep.is_none() {
            return Err(Error::Config("task `sweep` needs a `sweep` block".into()));
        }
        Ok(())
    }

    pub fn schedule(&self) -> CdsSchedule {
        CdsSchedule {
            maturity: self.schedule.maturity,
            coupons: self.schedule.coupons,
            nq: self.solver.nq,
        }
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            grid: self.grid,
            time: TimeGridConfig { dt: self.solver.dt },
            shape: self.solver.shape,
        }
    }
}

fn factor(name: &str) -> Option<Factor> {
    match name {
        "R" => Some(Factor::Recovery),
        "rhat" => Some(Factor::ForeignRate),
        "z" => Some(Factor::Fx),
        "y" => Some(Factor::LogHazard),
        _ => None,
    }
}

/// Returns `p` with the named parameter set to `value`, validated.
pub fn with_param(p: &ModelParams, name: &str, value: f64) -> Result<ModelParams> {
    if let Some(pair) = name.strip_prefix("rho_") {
        let (a, b) = pair
            .split_once('_')
            .and_then(|(a, b)| Some((factor(a)?, factor(b)?)))
            .filter(|(a, b)| a != b)
            .ok_or_else(|| Error::Config(format!("unknown correlation `{name}` (use rho_<a>_<b> with R, rhat, z, y)")))?;
        let mut q = *p;
        q.rho.set(a, b, value);
        return q.validated();
    }
    let mut json = serde_json::to_value(p).map_err(|e| Error::Config(e.to_string()))?;
    let obj = json.as_object_mut().expect("model serializes to an object");
    match obj.get_mut(name) {
        Some(slot) if slot.is_number() => *slot = serde_json::json!(value),
        _ => return Err(Error::Config(format!("unknown sweep parameter `{name}`"))),
    }
    let q: ModelParams = serde_json::from_value(json).map_err(|e| Error::Config(e.to_string()))?;
    q.validated()
}
