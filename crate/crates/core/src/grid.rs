//! Tensor-product grid over `(R, r̂, y, z)` and fields living on it.
//!
//! Nodes are flattened with axis order `R, r̂, y, z` and the last axis
//! varying fastest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const DIM: usize = 4;
pub const AXIS_NAMES: [&str; DIM] = ["R", "rhat", "y", "z"];

/// Truncation of the computational domain and node counts per axis.
///
/// The recovery axis is always `[0, 1]`, `r̂` and `z` start at zero and `y`
/// ends at zero; only the far bounds are configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub rhat_max: f64,
    pub y_min: f64,
    pub z_max: f64,
    /// Node counts `[n_R, n_rhat, n_y, n_z]`.
    pub nodes: [usize; DIM],
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            rhat_max: 1.0,
            y_min: -6.0,
            z_max: 4.0,
            nodes: [10, 10, 10, 10],
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.nodes.iter().find(|&&n| n < 4) {
            return Err(Error::InvalidGrid(format!(
                "node count {n} below the minimum of 4"
            )));
        }
        if !(self.rhat_max > 0.0) {
            return Err(Error::InvalidGrid(format!("rhat_max = {} must be > 0", self.rhat_max)));
        }
        if !(self.y_min < 0.0) {
            return Err(Error::InvalidGrid(format!("y_min = {} must be < 0", self.y_min)));
        }
        if !(self.z_max > 0.0) {
            return Err(Error::InvalidGrid(format!("z_max = {} must be > 0", self.z_max)));
        }
        Ok(())
    }
}

/// Uniform 1D axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub nodes: usize,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, nodes: usize) -> Result<Self> {
        if !(upper > lower) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "bounds [{lower}, {upper}] are not strictly increasing"
            )));
        }
        if nodes < 2 {
            return Err(Error::InvalidGrid(format!("axis needs at least 2 nodes, got {nodes}")));
        }
        Ok(Axis { lower, upper, nodes })
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / (self.nodes - 1) as f64
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.nodes {
            self.upper
        } else {
            self.lower + self.length() * i as f64 / (self.nodes - 1) as f64
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.coord(i)).collect()
    }

    /// Cell index `i` and local coordinate `t` with `x = x_i + t h`.
    ///
    /// Outside the axis the boundary cell is used and `t` leaves `[0, 1]`,
    /// which turns interpolation into linear extrapolation.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.spacing();
        let s = (x - self.lower) / h;
        let i = (s.floor().max(0.0) as usize).min(self.nodes - 2);
        let mut t = (x - self.coord(i)) / h;
        const SNAP: f64 = 1e-12;
        if t.abs() < SNAP {
            t = 0.0;
        } else if (t - 1.0).abs() < SNAP {
            t = 1.0;
        }
        (i, t)
    }
}

/// Uniform tensor grid over `(R, r̂, y, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid4D {
    axes: [Axis; DIM],
    strides: [usize; DIM],
}

impl Grid4D {
    pub fn from_axes(axes: [Axis; DIM]) -> Self {
        let mut strides = [1; DIM];
        for a in (0..DIM - 1).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].nodes;
        }
        Grid4D { axes, strides }
    }

    pub fn axes(&self) -> &[Axis; DIM] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn stride(&self, a: usize) -> usize {
        self.strides[a]
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.strides[0] * self.axes[0].nodes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn flatten(&self, idx: [usize; DIM]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    #[inline]
    pub fn unflatten(&self, mut flat: usize) -> [usize; DIM] {
        let mut idx = [0; DIM];
        for a in 0..DIM {
            idx[a] = flat / self.strides[a];
            flat %= self.strides[a];
        }
        idx
    }

    pub fn point(&self, flat: usize) -> [f64; DIM] {
        let idx = self.unflatten(flat);
        std::array::from_fn(|a| self.axes[a].coord(idx[a]))
    }

    /// The 16 `(node, weight)` pairs of multilinear interpolation at `x`.
    pub fn interpolation_weights(&self, x: [f64; DIM]) -> [(usize, f64); 16] {
        let cells: [(usize, f64); DIM] = std::array::from_fn(|a| self.axes[a].locate(x[a]));
        std::array::from_fn(|corner| {
            let mut flat = 0;
            let mut w = 1.0;
            for (a, &(i, t)) in cells.iter().enumerate() {
                let hi = (corner >> (DIM - 1 - a)) & 1 == 1;
                flat += (i + usize::from(hi)) * self.strides[a];
                w *= if hi { t } else { 1.0 - t };
            }
            (flat, w)
        })
    }

    /// Multilinear interpolation inside the hull, multilinear extrapolation
    /// from the nearest boundary cell outside.
    pub fn interpolate(&self, field: &ScalarField, x: [f64; DIM]) -> f64 {
        debug_assert_eq!(field.len(), self.len());
        self.interpolation_weights(x)
            .iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|&(i, w)| w * field.values[i])
            .sum()
    }
}

/// Builds the grid, stretching the `r̂` axis by `1 + γ_r̂` for upward rate
/// jumps and shrinking the `z` axis by `1 + γ_z` for devaluation jumps.
pub fn build_grid(cfg: &GridConfig, p: &ModelParams) -> Result<Grid4D> {
    cfg.validate()?;
    let rhat_max = if p.gamma_rhat > 0.0 {
        cfg.rhat_max * (1.0 + p.gamma_rhat)
    } else {
        cfg.rhat_max
    };
    // at γ_z = -1 every shifted point is z = 0, already inside the domain
    let z_max = if p.gamma_z < 0.0 && p.gamma_z > -1.0 {
        cfg.z_max * (1.0 + p.gamma_z)
    } else {
        cfg.z_max
    };
    let [n_r, n_rhat, n_y, n_z] = cfg.nodes;
    Ok(Grid4D::from_axes([
        Axis::new(0.0, 1.0, n_r)?,
        Axis::new(0.0, rhat_max, n_rhat)?,
        Axis::new(cfg.y_min, 0.0, n_y)?,
        Axis::new(0.0, z_max, n_z)?,
    ]))
}

/// Nodal values on a [`Grid4D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Grid4D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { values })
    }

    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        ScalarField { values }
    }

    pub fn zeros(grid: &Grid4D) -> Self {
        ScalarField { values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: &Grid4D, f: impl Fn([f64; DIM]) -> f64) -> Self {
        ScalarField {
            values: (0..grid.len()).map(|i| f(grid.point(i))).collect(),
        }
    }

    /// The field equal to coordinate `axis` at every node.
    pub fn coordinate(grid: &Grid4D, axis: usize) -> Self {
        Self::from_fn(grid, |x| x[axis])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Self {
        ScalarField { values: self.values.iter().map(|v| v * c).collect() }
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Self {
        ScalarField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }
}
