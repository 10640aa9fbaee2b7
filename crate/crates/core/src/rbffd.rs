//! Gaussian RBF-FD differentiation weights and the assembled diffusion operator.
//!
//! Each axis gets 3-point stencils (centered in the interior, one-sided at the
//! two ends) whose weights make the derivative exact on the Gaussian basis
//! `φ(r) = exp(-ε² r²)` centered at the stencil nodes. The 4D operator is a
//! sum of nodal coefficients times tensor-lifted axis stencils; mixed
//! derivatives are products of the two lifted first-derivative stencils.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Grid4D, DIM};
use crate::model::{boundary_regimes, BoundaryKind, BoundaryRegimes, Factor, ModelParams};
use crate::sparse::SparseMatrix;

/// Collocation matrices with a larger 2-norm condition number are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First = 1,
    Second = 2,
}

/// How the Gaussian shape parameter is chosen per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeRule {
    /// `ε = c·h` measured in axis coordinates rescaled to unit length.
    UnitScaled(f64),
    /// `ε = c·h` in the axis's own coordinates.
    Physical(f64),
    /// Constant `ε` in the axis's own coordinates.
    Fixed(f64),
}

impl Default for ShapeRule {
    fn default() -> Self {
        ShapeRule::UnitScaled(2.0)
    }
}

impl ShapeRule {
    /// Shape parameter in physical units of `axis`.
    pub fn epsilon(&self, axis: &Axis) -> f64 {
        let h = axis.spacing();
        match *self {
            ShapeRule::UnitScaled(c) => {
                let len = axis.length();
                c * (h / len) / len
            }
            ShapeRule::Physical(c) => c * h,
            ShapeRule::Fixed(eps) => eps,
        }
    }
}

#[inline]
fn gaussian(eps: f64, d: f64) -> f64 {
    (-eps * eps * d * d).exp()
}

/// Derivative of `x ↦ φ(x - xj)` at `x`, with `d = x - xj`.
#[inline]
fn gaussian_derivative(eps: f64, d: f64, order: DerivativeOrder) -> f64 {
    let e2 = eps * eps;
    let phi = gaussian(eps, d);
    match order {
        DerivativeOrder::First => -2.0 * e2 * d * phi,
        DerivativeOrder::Second => (4.0 * e2 * e2 * d * d - 2.0 * e2) * phi,
    }
}

/// Weights `w` with `Σ w_i φ_j(x_i) = φ_j^{(order)}(center)` for every basis
/// function `φ_j` centered at a stencil node.
pub fn rbf_fd_weights(
    nodes: &[f64],
    center: f64,
    epsilon: f64,
    order: DerivativeOrder,
) -> Result<Vec<f64>> {
    let n = nodes.len();
    if n < 3 {
        return Err(Error::InvalidStencil(format!("need at least 3 nodes, got {n}")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidStencil(format!("epsilon = {epsilon} must be positive")));
    }
    for i in 0..n {
        for j in 0..i {
            if nodes[i] == nodes[j] {
                return Err(Error::InvalidStencil(format!("duplicate node {}", nodes[i])));
            }
        }
    }
    let a = DMatrix::from_fn(n, n, |i, j| gaussian(epsilon, nodes[i] - nodes[j]));
    let sv = a.singular_values();
    let condition = sv.max() / sv.min();
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::ShapeParameter { condition, threshold: CONDITION_LIMIT });
    }
    let singular = Error::ShapeParameter { condition, threshold: CONDITION_LIMIT };

    let scale = nodes.iter().map(|x| (x - center).abs()).fold(0.0, f64::max);
    let flatness = 2.0 * epsilon * epsilon * scale * scale;
    if n == 3 && flatness < 1.0 {
        return flat_weights(nodes, center, epsilon, order).ok_or(singular);
    }
    let b = DVector::from_fn(n, |i, _| gaussian_derivative(epsilon, center - nodes[i], order));
    let w = a.lu().solve(&b).ok_or(singular)?;
    Ok(w.iter().copied().collect())
}

/// Same weights as the direct collocation solve, computed in a basis that
/// stays well conditioned as `ε·h → 0`.
///
/// With offsets `ξ = (x - center)/s` and `a = 2ε²s²`, each Gaussian factors as
/// `exp(-aξ²/2) exp(-aξ_j²/2) Σ_k a^k ξ^k ξ_j^k / k!`. Powers `k ≥ 3` restricted
/// to the three nodes are folded back onto `1, ξ, ξ²`, which leaves a 3×3
/// system that is a small perturbation of the identity.
fn flat_weights(nodes: &[f64], center: f64, epsilon: f64, order: DerivativeOrder) -> Option<Vec<f64>> {
    let s = nodes.iter().map(|x| (x - center).abs()).fold(0.0, f64::max);
    let a = 2.0 * epsilon * epsilon * s * s;
    let xi: Vec<f64> = nodes.iter().map(|x| (x - center) / s).collect();

    let v3 = DMatrix::from_fn(3, 3, |i, k| xi[i].powi(k as i32));
    let v3_lu = v3.clone().lu();

    let mut c = vec![1.0];
    while c.len() < 3 || *c.last().unwrap() > 1e-20 * c[2] {
        let k = c.len();
        c.push(c[k - 1] * a / k as f64);
        if k > 200 {
            break;
        }
    }
    let extra = c.len() - 3;
    let vr = DMatrix::from_fn(3, extra, |i, k| xi[i].powi(k as i32 + 3));
    let m = v3_lu.solve(&vr)?;

    // K̃ = I + C3⁻¹ M Cr Mᵀ
    let mut k_tilde = DMatrix::identity(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            let sum: f64 = (0..extra).map(|k| m[(i, k)] * c[k + 3] * m[(j, k)]).sum();
            k_tilde[(i, j)] += sum / c[i];
        }
    }

    let rhs = match order {
        DerivativeOrder::First => DVector::from_column_slice(&[0.0, 1.0 / s, 0.0]),
        DerivativeOrder::Second => DVector::from_column_slice(&[-a / (s * s), 0.0, 2.0 / (s * s)]),
    };
    let u = k_tilde.lu().solve(&rhs)?;
    let y = v3.transpose().lu().solve(&u)?;
    Some(
        (0..3)
            .map(|i| y[i] * (0.5 * a * xi[i] * xi[i]).exp())
            .collect(),
    )
}

/// One row of an axis differentiation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilWeights {
    pub center: usize,
    pub neighbors: [usize; 3],
    pub weights: [f64; 3],
}

/// Banded `n × n` differentiation matrix of one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilMatrix {
    pub rows: Vec<StencilWeights>,
}

impl StencilMatrix {
    pub fn build(axis: &Axis, epsilon: f64, order: DerivativeOrder) -> Result<Self> {
        let n = axis.nodes;
        if n < 3 {
            return Err(Error::InvalidStencil(format!("axis has {n} nodes, need 3")));
        }
        let x = axis.coords();
        let rows = (0..n)
            .map(|i| {
                let start = i.saturating_sub(1).min(n - 3);
                let neighbors = [start, start + 1, start + 2];
                let w = rbf_fd_weights(&x[start..start + 3], x[i], epsilon, order)?;
                Ok(StencilWeights { center: i, neighbors, weights: [w[0], w[1], w[2]] })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StencilMatrix { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.neighbors.iter().zip(&row.weights).map(|(&j, w)| w * f[j]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.rows.len();
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; n];
                for (&j, &w) in row.neighbors.iter().zip(&row.weights) {
                    dense[j] += w;
                }
                dense
            })
            .collect()
    }

    /// `I ⊗ … ⊗ D ⊗ … ⊗ I` on `grid`, with `D` acting along `axis`.
    pub fn lift(&self, grid: &Grid4D, axis: usize) -> SparseMatrix {
        let stride = grid.stride(axis);
        let mut t = Vec::with_capacity(grid.len() * 3);
        for node in 0..grid.len() {
            let i = grid.unflatten(node)[axis];
            let base = node - i * stride;
            let row = &self.rows[i];
            for (&j, &w) in row.neighbors.iter().zip(&row.weights) {
                t.push((node, base + j * stride, w));
            }
        }
        SparseMatrix::from_triplets(grid.len(), grid.len(), t)
    }
}

/// First- and second-derivative matrices of one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisOperators {
    pub epsilon: f64,
    pub d1: StencilMatrix,
    pub d2: StencilMatrix,
}

pub fn build_axis_operators(grid: &Grid4D, rule: ShapeRule) -> Result<[AxisOperators; DIM]> {
    let ops: Vec<AxisOperators> = grid
        .axes()
        .iter()
        .map(|axis| {
            let epsilon = rule.epsilon(axis);
            Ok(AxisOperators {
                epsilon,
                d1: StencilMatrix::build(axis, epsilon, DerivativeOrder::First)?,
                d2: StencilMatrix::build(axis, epsilon, DerivativeOrder::Second)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ops.try_into().expect("four axes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// The diffusion-convection operator of the model.
    Diffusion,
    /// Post-default equation: diffusion minus domestic discounting.
    PostDefault,
    /// Pre-default equation: adds default killing and the FX compensator.
    PreDefault,
}

/// Discretized spatial operator on a [`Grid4D`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialOperator {
    pub matrix: SparseMatrix,
    pub kind: OperatorKind,
    pub regimes: BoundaryRegimes,
    /// Coefficients do not depend on time, so one assembly serves every maturity.
    pub time_independent: bool,
}

/// Correlation factor of each grid axis.
const AXIS_FACTOR: [Factor; DIM] = [
    Factor::Recovery,
    Factor::ForeignRate,
    Factor::LogHazard,
    Factor::Fx,
];

/// Diffusion amplitude of each state variable at `x` (the `b` in `b dW`).
pub fn volatilities(p: &ModelParams, x: [f64; DIM]) -> [f64; DIM] {
    let [r, rhat, _y, z] = x;
    [
        p.sigma_recovery * (r * (1.0 - r)).max(0.0).sqrt(),
        p.sigma_rhat * rhat.max(0.0).sqrt(),
        p.sigma_y,
        p.sigma_z * z,
    ]
}

/// Drift of each state variable at `x` before any jump.
pub fn drifts(p: &ModelParams, x: [f64; DIM]) -> [f64; DIM] {
    let [r, rhat, y, z] = x;
    [
        p.kappa_recovery * (p.theta_recovery - r),
        p.kappa_rhat * (p.theta_rhat - rhat),
        p.kappa_y * (p.theta_y - y),
        (p.r_dom - rhat) * z,
    ]
}

/// Assembles the diffusion operator with all fourteen terms: four pure second
/// derivatives, six mixed derivatives and four convection terms.
///
/// At a boundary node the second derivative normal to that boundary is
/// dropped when the regime is vanishing-second-derivative, and kept with the
/// boundary-evaluated coefficient and a one-sided stencil when the boundary
/// is degenerate.
pub fn assemble_l(grid: &Grid4D, ops: &[AxisOperators; DIM], p: &ModelParams) -> SpatialOperator {
    let regimes = boundary_regimes(p);
    let n = grid.len();
    let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(n * 16);

    for node in 0..n {
        let idx = grid.unflatten(node);
        let x = grid.point(node);
        let vol = volatilities(p, x);
        let mu = drifts(p, x);

        for a in 0..DIM {
            let stride = grid.stride(a);
            let base = node - idx[a] * stride;

            let c2 = 0.5 * vol[a] * vol[a];
            let at_edge = idx[a] == 0 || idx[a] + 1 == grid.axis(a).nodes;
            let keep_d2 = !at_edge
                || regimes.at(a, idx[a] != 0) == BoundaryKind::DegeneratePde;
            if c2 != 0.0 && keep_d2 {
                let row = &ops[a].d2.rows[idx[a]];
                for (&j, &w) in row.neighbors.iter().zip(&row.weights) {
                    t.push((node, base + j * stride, c2 * w));
                }
            }

            if mu[a] != 0.0 {
                let row = &ops[a].d1.rows[idx[a]];
                for (&j, &w) in row.neighbors.iter().zip(&row.weights) {
                    t.push((node, base + j * stride, mu[a] * w));
                }
            }

            for b in a + 1..DIM {
                let c = p.rho.get(AXIS_FACTOR[a], AXIS_FACTOR[b]) * vol[a] * vol[b];
                if c == 0.0 {
                    continue;
                }
                let sb = grid.stride(b);
                let base_ab = base - idx[b] * sb;
                let ra = &ops[a].d1.rows[idx[a]];
                let rb = &ops[b].d1.rows[idx[b]];
                for (&ja, &wa) in ra.neighbors.iter().zip(&ra.weights) {
                    for (&jb, &wb) in rb.neighbors.iter().zip(&rb.weights) {
                        t.push((node, base_ab + ja * stride + jb * sb, c * wa * wb));
                    }
                }
            }
        }
    }

    SpatialOperator {
        matrix: SparseMatrix::from_triplets(n, n, t),
        kind: OperatorKind::Diffusion,
        regimes,
        time_independent: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridConfig, ScalarField};

    const ORDERS: [DerivativeOrder; 2] = [DerivativeOrder::First, DerivativeOrder::Second];

    #[test]
    fn exact_on_gaussian_basis() {
        for &h in &[0.05, 1.0 / 9.0, 0.4] {
            for &eps in &[0.3, 1.0, 2.0 * h] {
                for stencil in [[-h, 0.0, h], [0.0, h, 2.0 * h], [-2.0 * h, -h, 0.0]] {
                    for order in ORDERS {
                        let Ok(w) = rbf_fd_weights(&stencil, 0.0, eps, order) else { continue };
                        for &xj in &stencil {
                            let applied: f64 = stencil
                                .iter()
                                .zip(&w)
                                .map(|(&xi, wi)| wi * gaussian(eps, xi - xj))
                                .sum();
                            let exact = gaussian_derivative(eps, -xj, order);
                            let scale = 1.0 + exact.abs();
                            assert!((applied - exact).abs() < 1e-10 * scale / (h * h), "{applied} vs {exact}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn centered_first_derivative_is_antisymmetric() {
        let h = 0.1;
        let w = rbf_fd_weights(&[-h, 0.0, h], 0.0, 0.7, DerivativeOrder::First).unwrap();
        let scale = w[2].abs();
        assert!(w[1].abs() < 1e-9 * scale, "{w:?}");
        assert!((w[0] + w[2]).abs() < 1e-9 * scale, "{w:?}");
    }

    fn observed_order(f: fn(f64) -> f64, order: DerivativeOrder, exact: f64) -> f64 {
        let x0 = 0.5;
        let mut pts = Vec::new();
        for k in 0..3 {
            let h = 1.0 / 9.0 / f64::from(1 << k);
            let nodes = [x0 - h, x0, x0 + h];
            let w = rbf_fd_weights(&nodes, x0, 2.0 * h, order).unwrap();
            let est: f64 = nodes.iter().zip(&w).map(|(&x, w)| w * f(x)).sum();
            pts.push((h.ln(), (est - exact).abs().ln()));
        }
        let n = pts.len() as f64;
        let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn second_order_convergence() {
        let d1 = observed_order(f64::sin, DerivativeOrder::First, 0.5f64.cos());
        assert!((d1 - 2.0).abs() < 0.3, "first derivative slope {d1}");
        let d2 = observed_order(f64::ln_1p, DerivativeOrder::Second, -1.0 / 2.25);
        assert!((d2 - 2.0).abs() < 0.3, "second derivative slope {d2}");
        let d2 = observed_order(|x| x.powi(4), DerivativeOrder::Second, 3.0);
        assert!((d2 - 2.0).abs() < 0.3, "second derivative slope {d2}");
    }

    #[test]
    fn flat_limit_recovers_finite_differences() {
        let h = 0.1;
        let w = rbf_fd_weights(&[-h, 0.0, h], 0.0, 0.02, DerivativeOrder::Second).unwrap();
        for (a, b) in w.iter().zip([1.0, -2.0, 1.0]) {
            assert!((a * h * h - b).abs() < 1e-4);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(rbf_fd_weights(&[0.0, 1.0], 0.0, 1.0, DerivativeOrder::First).is_err());
        assert!(rbf_fd_weights(&[0.0, 1.0, 1.0], 0.0, 1.0, DerivativeOrder::First).is_err());
        assert!(rbf_fd_weights(&[0.0, 1.0, 2.0], 0.0, -1.0, DerivativeOrder::First).is_err());
        let err = rbf_fd_weights(&[0.0, 1e-4, 2e-4], 0.0, 1e-3, DerivativeOrder::Second).unwrap_err();
        assert!(matches!(err, Error::ShapeParameter { .. }), "{err}");
    }

    #[test]
    fn unit_scaled_rule_matches_physical_on_unit_axis() {
        let axis = Axis::new(0.0, 1.0, 10).unwrap();
        let a = ShapeRule::UnitScaled(2.0).epsilon(&axis);
        let b = ShapeRule::Physical(2.0).epsilon(&axis);
        assert!((a - b).abs() < 1e-15 && (a - 2.0 / 9.0).abs() < 1e-15);
        let y = Axis::new(-6.0, 0.0, 10).unwrap();
        // same dimensionless product epsilon*h on every axis
        let eh = ShapeRule::UnitScaled(2.0).epsilon(&y) * y.spacing();
        assert!((eh - a / 9.0).abs() < 1e-15);
    }

    fn default_grid() -> Grid4D {
        build_grid(&GridConfig::default(), &ModelParams::default()).unwrap()
    }

    #[test]
    fn axis_stencil_structure() {
        let axis = Axis::new(0.0, 1.0, 10).unwrap();
        let eps = 2.0 * axis.spacing();
        let d2 = StencilMatrix::build(&axis, eps, DerivativeOrder::Second).unwrap();
        assert_eq!(d2.len(), 10);
        for row in d2.to_dense() {
            assert_eq!(row.iter().filter(|v| **v != 0.0).count(), 3);
        }
        // applying D2 to basis samples reproduces collocated second derivatives
        let x = axis.coords();
        for row in &d2.rows {
            for &j in &row.neighbors {
                let samples: Vec<f64> = x.iter().map(|&xi| gaussian(eps, xi - x[j])).collect();
                let got = d2.apply(&samples)[row.center];
                let exact = gaussian_derivative(eps, x[row.center] - x[j], DerivativeOrder::Second);
                assert!((got - exact).abs() < 1e-10 * (1.0 + exact.abs()) * 81.0);
            }
        }
    }

    #[test]
    fn lifted_mixed_derivative_of_product() {
        let g = default_grid();
        let ops = build_axis_operators(&g, ShapeRule::default()).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0] * x[3]);
        let dz = ops[3].d1.lift(&g, 3).mul_vec(f.values());
        let drz = ops[0].d1.lift(&g, 0).mul_vec(&dz);
        for node in 0..g.len() {
            let idx = g.unflatten(node);
            if (1..9).contains(&idx[0]) && (1..9).contains(&idx[3]) {
                assert!((drz[node] - 1.0).abs() < 1e-2, "{}", drz[node]);
            }
        }
    }

    #[test]
    fn vanishing_coefficients_give_zero_operator() {
        let p = ModelParams {
            sigma_recovery: 0.0,
            sigma_rhat: 0.0,
            sigma_y: 0.0,
            sigma_z: 0.0,
            kappa_recovery: 0.0,
            kappa_rhat: 0.0,
            kappa_y: 0.0,
            r_dom: 0.0,
            ..Default::default()
        };
        // r̂ axis collapsed onto r̂ = 0 values only matters through (r - r̂) z;
        // put the whole r̂ axis at tiny values and check the z-convection only.
        let g = default_grid();
        let ops = build_axis_operators(&g, ShapeRule::default()).unwrap();
        let l = assemble_l(&g, &ops, &p);
        for node in 0..g.len() {
            let [_, rhat, _, z] = g.point(node);
            if rhat == 0.0 || z == 0.0 {
                assert_eq!(l.matrix.row_nnz(node), 0);
            }
        }
    }

    #[test]
    fn recovery_boundary_has_no_r_diffusion() {
        let p = ModelParams {
            sigma_recovery: 0.3,
            kappa_recovery: 0.5,
            theta_recovery: 0.4,
            ..Default::default()
        };
        let g = default_grid();
        let ops = build_axis_operators(&g, ShapeRule::default()).unwrap();
        let with = assemble_l(&g, &ops, &p).matrix;
        let without = assemble_l(&g, &ops, &ModelParams { sigma_recovery: 0.0, ..p }).matrix;
        let diff = with.linear_combination(1.0, &without, -1.0);
        for node in 0..g.len() {
            let i = g.unflatten(node)[0];
            if i == 0 || i == 9 {
                assert!(diff.row(node).all(|(_, v)| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn z_field_sees_only_fx_convection() {
        let p = ModelParams::default();
        let g = default_grid();
        let ops = build_axis_operators(&g, ShapeRule::default()).unwrap();
        let l = assemble_l(&g, &ops, &p);
        let f = ScalarField::coordinate(&g, 3);
        let lf = l.matrix.mul_vec(f.values());
        // Only z-derivatives see a non-constant field; other axes contribute
        // through stencil row sums, which vanish up to O((εh)²).
        let d1_z = ops[3].d1.apply(&g.axis(3).coords());
        let d2_z = ops[3].d2.apply(&g.axis(3).coords());
        for node in 0..g.len() {
            let idx = g.unflatten(node);
            if idx.iter().zip(g.axes()).any(|(&i, a)| i == 0 || i + 1 == a.nodes) {
                continue;
            }
            let [_, rhat, _, z] = g.point(node);
            let expected = (p.r_dom - rhat) * z * d1_z[idx[3]]
                + 0.5 * p.sigma_z * p.sigma_z * z * z * d2_z[idx[3]];
            assert!((lf[node] - expected).abs() < 1e-6, "{} vs {}", lf[node], expected);
            // and the stencil is first-order exact on linear data to O((εh)²)
            assert!((lf[node] - (p.r_dom - rhat) * z).abs() < 1e-3 * (1.0 + z * z));
        }
    }

    #[test]
    fn operator_linear_in_variance() {
        let g = default_grid();
        let ops = build_axis_operators(&g, ShapeRule::default()).unwrap();
        let p = ModelParams::default();
        let l0 = assemble_l(&g, &ops, &ModelParams { sigma_y: 0.0, ..p }).matrix;
        let l1 = assemble_l(&g, &ops, &p).matrix;
        let l2 = assemble_l(&g, &ops, &ModelParams { sigma_y: p.sigma_y * 2f64.sqrt(), ..p }).matrix;
        let block1 = l1.linear_combination(1.0, &l0, -1.0);
        let block2 = l2.linear_combination(1.0, &l0, -1.0);
        let doubled = block1.linear_combination(2.0, &block2, -1.0);
        assert!(doubled.max_abs_diff(&SparseMatrix::from_triplets(g.len(), g.len(), vec![])) < 1e-12);
    }

    #[test]
    fn vanishing_regime_rows_annihilate_affine_normal_data() {
        // diffusion only in y; y-boundaries are vanishing-second-derivative
        let p = ModelParams {
            sigma_recovery: 0.0,
            sigma_rhat: 0.0,
            sigma_z: 0.0,
            kappa_rhat: 0.0,
            kappa_y: 0.0,
            r_dom: 0.0,
            rhat0: 0.0,
            ..Default::default()
        };
        let g = build_grid(&GridConfig { rhat_max: 1.0, ..Default::default() }, &p).unwrap();
        let ops = build_axis_operators(&g, ShapeRule::default()).unwrap();
        let l = assemble_l(&g, &ops, &p);
        let f = ScalarField::from_fn(&g, |x| 2.0 - 0.7 * x[2]);
        let lf = l.matrix.mul_vec(f.values());
        for node in 0..g.len() {
            let [_, rhat, _, z] = g.point(node);
            let iy = g.unflatten(node)[2];
            if (iy == 0 || iy == 9) && (rhat == 0.0 || z == 0.0) {
                assert_eq!(lf[node], 0.0);
            }
        }
    }

    #[test]
    fn row_sparsity_bounded() {
        let mut p = ModelParams {
            kappa_recovery: 0.5,
            sigma_recovery: 0.3,
            ..Default::default()
        };
        p.rho.set(Factor::Fx, Factor::Recovery, 0.5);
        p.rho.set(Factor::LogHazard, Factor::Recovery, -0.5);
        let g = default_grid();
        let ops = build_axis_operators(&g, ShapeRule::default()).unwrap();
        let l = assemble_l(&g, &ops, &p);
        // center + 2 per axis + 4 off-axis corners per mixed pair
        let bound = 1 + 2 * DIM + 4 * 6;
        for node in 0..g.len() {
            assert!(l.matrix.row_nnz(node) <= bound + 8);
        }
    }
}
