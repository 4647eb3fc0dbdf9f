//! Graded radial meshes with cell-exact weights for σ_N r^(N-1) dr.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;
use crate::special::{green_unchecked, Dim};

/// Cells 1..=REFINED_CELLS are split geometrically; later cells use a two-point rule.
const REFINED_CELLS: usize = 128;
const ORIGIN_RULE: usize = 6;
const CELL_RULE: usize = 4;
const OUTER_RULE: usize = 2;
/// Edge ratio bound for subintervals of refined cells.
const SUB_RATIO: f64 = 1.5;
/// Default parameter of the singular shape used inside cells.
pub const SHAPE_LAMBDA: f64 = 1.0;

fn default_shape() -> f64 {
    SHAPE_LAMBDA
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: Dim,
    pub r_min: f64,
    #[serde(rename = "R")]
    pub r_max: f64,
    pub n: usize,
    pub grading: f64,
    /// Sub-cell values are u(r_i) + c·(G_μ(r) − G_μ(r_i)) with μ = shape_lambda; best when μ
    /// matches the decay scale of the fields on the grid.
    #[serde(default = "default_shape")]
    pub shape_lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    spec: GridSpec,
    edges: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// r_{i+1} - r_i; the last entry is R - r_{n-1}.
    spacing: Vec<f64>,
    sub: SubCellRule,
}

/// Flattened per-cell quadrature. Points of cell i live in `start[i]..start[i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubCellRule {
    pub start: Vec<usize>,
    pub cell: Vec<usize>,
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    /// G(r_k) - G(r_i) at the shape reference parameter.
    pub shape: Vec<f64>,
}

pub fn build_grid(dim: Dim, r_min: f64, r_max: f64, n: usize, grading: f64) -> Result<RadialGrid> {
    RadialGrid::new(GridSpec { dim, r_min, r_max, n, grading, shape_lambda: SHAPE_LAMBDA })
}

pub fn build_grid_with_shape(dim: Dim, r_min: f64, r_max: f64, n: usize, grading: f64, shape_lambda: f64) -> Result<RadialGrid> {
    RadialGrid::new(GridSpec { dim, r_min, r_max, n, grading, shape_lambda })
}

fn shell_volume(dim: Dim, a: f64, b: f64) -> f64 {
    // σ (b^N - a^N)/N factored to keep b - a exact
    let d = b - a;
    match dim {
        Dim::Two => dim.sphere_area() * d * (a + b) / 2.0,
        Dim::Three => dim.sphere_area() * d * (a * a + a * b + b * b) / 3.0,
    }
}

impl RadialGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let GridSpec { dim, r_min, r_max, n, grading, shape_lambda } = spec;
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("need 0 < r_min < R, got r_min={r_min}, R={r_max}")));
        }
        if n < 16 {
            return Err(Error::InvalidArgument(format!("need n >= 16, got {n}")));
        }
        if !(grading >= 1.0 && grading.is_finite()) {
            return Err(Error::InvalidArgument(format!("grading must be >= 1, got {grading}")));
        }
        if !(shape_lambda > 0.0 && shape_lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("shape parameter must be positive, got {shape_lambda}")));
        }
        let len = r_max - r_min;
        let nf = n as f64;
        let map = |t: f64| r_min + len * t.powf(grading);
        let mut edges: Vec<f64> = (0..=n).map(|j| map(j as f64 / nf)).collect();
        edges[n] = r_max;
        let nodes: Vec<f64> = (0..n).map(|i| map((i as f64 + 0.5) / nf)).collect();
        let weights: Vec<f64> = (0..n).map(|i| shell_volume(dim, edges[i], edges[i + 1])).collect();
        let spacing: Vec<f64> = (0..n).map(|i| if i + 1 < n { nodes[i + 1] } else { r_max } - nodes[i]).collect();
        if nodes.windows(2).any(|w| w[1] <= w[0]) || weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidArgument("grid resolution underflows; nodes not strictly increasing".into()));
        }
        let sub = SubCellRule::build(dim, shape_lambda, &edges, &nodes, &weights);
        Ok(RadialGrid { spec, edges, nodes, weights, spacing, sub })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }
    pub fn dim(&self) -> Dim {
        self.spec.dim
    }
    pub fn len(&self) -> usize {
        self.spec.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn r_min(&self) -> f64 {
        self.spec.r_min
    }
    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }
    pub fn shape_lambda(&self) -> f64 {
        self.spec.shape_lambda
    }
    pub fn grading(&self) -> f64 {
        self.spec.grading
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Coefficients s_i of the discrete Dirichlet form Σ s_i |f_{i+1} − f_i|², f = 0 at R.
    /// The two-point flux through the cell edge between nodes i and i+1 is exact for
    /// f ∈ span{1, r^a}; a = 1 gives the plain difference quotient.
    pub fn stiffness_weights(&self, exponent: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let a = exponent;
        let sigma = self.spec.dim.sphere_area();
        let nm1 = self.spec.dim.as_f64() - 1.0;
        (0..n)
            .map(|i| {
                let (x, y) = (self.nodes[i], self.nodes[i] + self.spacing[i]);
                let e = self.edges[i + 1];
                let drho = if a == 1.0 { y - x } else { y.powf(a) - x.powf(a) };
                sigma * e.powf(nm1) * a * e.powf(a - 1.0) / drho
            })
            .collect()
    }
    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }
    pub fn sub_rule(&self) -> &SubCellRule {
        &self.sub
    }

    pub fn volume(&self) -> f64 {
        shell_volume(self.spec.dim, self.spec.r_min, self.spec.r_max)
    }

    /// Quadrature of a smooth radial function at the nodes.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&r, &w)| w * f(r)).sum()
    }

    /// Quadrature through the sub-cell rule; suited to integrands singular at the origin.
    pub fn integrate_fine(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.sub.r.iter().zip(&self.sub.w).map(|(&r, &w)| w * f(r)).sum()
    }

    /// Index of the first node with r >= x.
    pub fn first_node_at_or_above(&self, x: f64) -> usize {
        self.nodes.partition_point(|&r| r < x)
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        std::ptr::eq(self, other) || self.spec == other.spec
    }
}

impl SubCellRule {
    fn build(dim: Dim, shape_lambda: f64, edges: &[f64], nodes: &[f64], weights: &[f64]) -> Self {
        let n = nodes.len();
        let origin = GaussRule::new(ORIGIN_RULE);
        let cellrule = GaussRule::new(CELL_RULE);
        let outer = GaussRule::new(OUTER_RULE);
        let sigma = dim.sphere_area();
        let radial = |r: f64| match dim {
            Dim::Two => sigma * r,
            Dim::Three => sigma * r * r,
        };
        let mut start = Vec::with_capacity(n + 1);
        let mut cell = Vec::new();
        let mut r = Vec::new();
        let mut w = Vec::new();
        let mut shape = Vec::new();
        for i in 0..n {
            start.push(r.len());
            let (a, b) = (edges[i], edges[i + 1]);
            let g_node = green_unchecked(dim, shape_lambda, nodes[i]);
            let mut push = |x: f64, wt: f64, r: &mut Vec<f64>, w: &mut Vec<f64>| {
                cell.push(i);
                r.push(x);
                w.push(wt);
                shape.push(green_unchecked(dim, shape_lambda, x) - g_node);
            };
            if i == 0 {
                let mut hi = b;
                let mut pieces = Vec::new();
                while hi > a {
                    let lo = (0.5 * hi).max(a);
                    if hi / a <= 2.0 {
                        pieces.push((a, hi));
                        break;
                    }
                    pieces.push((lo, hi));
                    hi = lo;
                }
                pieces.reverse();
                for (lo, hi) in pieces {
                    for (x, gw) in origin.mapped(lo, hi) {
                        push(x, gw * radial(x), &mut r, &mut w);
                    }
                }
            } else if i <= REFINED_CELLS {
                let m = ((b / a).ln() / SUB_RATIO.ln()).ceil().max(1.0) as usize;
                let q = (b / a).powf(1.0 / m as f64);
                let mut lo = a;
                for j in 0..m {
                    let hi = if j + 1 == m { b } else { lo * q };
                    for (x, gw) in cellrule.mapped(lo, hi) {
                        push(x, gw * radial(x), &mut r, &mut w);
                    }
                    lo = hi;
                }
            } else {
                for (x, gw) in outer.mapped(a, b) {
                    push(x, gw * radial(x), &mut r, &mut w);
                }
            }
            // Make the cell sum exactly equal to the exact cell weight.
            let s = start[i];
            let total: f64 = w[s..].iter().sum();
            let scale = weights[i] / total;
            for wk in &mut w[s..] {
                *wk *= scale;
            }
        }
        start.push(r.len());
        SubCellRule { start, cell, r, w, shape }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn cell_range(&self, i: usize) -> std::ops::Range<usize> {
        self.start[i]..self.start[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert!(build_grid(Dim::Three, 0.0, 1.0, 100, 1.0).is_err());
        assert!(build_grid(Dim::Three, 1.0, 1.0, 100, 1.0).is_err());
        assert!(build_grid(Dim::Three, 0.1, 1.0, 8, 1.0).is_err());
        assert!(build_grid(Dim::Three, 0.1, 1.0, 100, 0.5).is_err());
    }

    #[test]
    fn sub_rule_partitions_cells() {
        let g = build_grid(Dim::Two, 1e-20, 50.0, 256, 2.0).unwrap();
        let s = g.sub_rule();
        assert_eq!(s.start.len(), 257);
        for i in 0..256 {
            let range = s.cell_range(i);
            assert!(!range.is_empty());
            let sum: f64 = s.w[range.clone()].iter().sum();
            assert!((sum - g.weights()[i]).abs() <= 1e-14 * g.weights()[i]);
            for k in range {
                assert!(s.r[k] >= g.edges()[i] && s.r[k] <= g.edges()[i + 1]);
            }
        }
    }
}
