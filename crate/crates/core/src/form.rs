//! Discrete quadratic form, bilinear form, action and gradients.
//!
//! Every field is rebased to the reference parameter λ* of the discretization before
//! evaluation, so values do not depend on the λ a field happens to carry.

use serde::Serialize;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{green_nodes, green_sub, radial_gradient_norm_sq_with, DecomposedField, C64};
use crate::grid::RadialGrid;
use crate::linalg::BorderedTridiag;
use crate::special::{green_unchecked, k_coefficient, Dim, InteractionParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormEvaluation {
    #[serde(rename = "q")]
    pub q_value: f64,
    pub action: f64,
    pub mass: f64,
    #[serde(rename = "lp1")]
    pub lp1_term: f64,
    #[serde(rename = "lambda")]
    pub lambda_used: f64,
}

/// Split of a discrete gradient into regular samples and the singular component.
#[derive(Debug, Clone, PartialEq)]
pub struct Cogradient {
    pub regular: Vec<C64>,
    pub singular: C64,
}

/// (|u|²)^e with the common exponents special-cased.
#[inline]
pub(crate) fn pow_half(a2: f64, e: f64) -> f64 {
    if e == 0.25 {
        a2.sqrt().sqrt()
    } else if e == 0.5 {
        a2.sqrt()
    } else if e == 1.0 {
        a2
    } else if e == 1.25 {
        a2 * a2.sqrt().sqrt()
    } else if e == 1.5 {
        a2 * a2.sqrt()
    } else if e == 2.0 {
        a2 * a2
    } else if a2 == 0.0 {
        0.0
    } else {
        a2.powf(e)
    }
}

/// Exponent a of the flux coordinate r^a. In three dimensions the regular part of a
/// standing wave carries an r^(2−p) cusp at the origin.
pub fn flux_exponent(params: &InteractionParams) -> f64 {
    match params.dim() {
        Dim::Two => 1.0,
        Dim::Three => 2.0 - params.p(),
    }
}

#[derive(Debug, Clone)]
pub struct Discretization {
    params: InteractionParams,
    grid: Arc<RadialGrid>,
    lambda: f64,
    g_nodes: Vec<f64>,
    g_sub: Vec<f64>,
    moments: Vec<f64>,
    stiffness: BorderedTridiag,
    mass_matrix: BorderedTridiag,
}

impl Discretization {
    pub fn new(params: InteractionParams, grid: Arc<RadialGrid>) -> Result<Self> {
        let lambda = params.canonical_lambda();
        Self::with_lambda(params, grid, lambda)
    }

    pub fn with_lambda(params: InteractionParams, grid: Arc<RadialGrid>, lambda: f64) -> Result<Self> {
        if grid.dim() != params.dim() {
            return Err(Error::GridMismatch("grid dimension differs from the interaction dimension".into()));
        }
        let kc = k_coefficient(&params, lambda)?;
        let n = grid.len();
        let g_nodes = green_nodes(&grid, lambda);
        let g_sub = green_sub(&grid, &g_nodes);
        let sub = grid.sub_rule();
        let mut moments = vec![0.0; n];
        let mut gg = 0.0;
        for k in 0..sub.len() {
            moments[sub.cell[k]] += sub.w[k] * g_sub[k];
            gg += sub.w[k] * g_sub[k] * g_sub[k];
        }
        let sw = grid.stiffness_weights(flux_exponent(&params));
        let mut stiffness = BorderedTridiag::zeros(n);
        for i in 0..n {
            let s = sw[i];
            stiffness.diag[i] += s;
            if i + 1 < n {
                stiffness.diag[i + 1] += s;
                stiffness.off[i] = C64::new(-s, 0.0);
            }
            stiffness.border[i] = C64::new(-lambda * moments[i], 0.0);
        }
        stiffness.corner = C64::new(kc - 2.0 * lambda * gg, 0.0);
        let mut mass_matrix = BorderedTridiag::zeros(n);
        for i in 0..n {
            mass_matrix.diag[i] = C64::new(grid.weights()[i], 0.0);
            mass_matrix.border[i] = C64::new(moments[i], 0.0);
        }
        mass_matrix.corner = C64::new(gg, 0.0);
        Ok(Discretization { params, grid, lambda, g_nodes, g_sub, moments, stiffness, mass_matrix })
    }

    pub fn params(&self) -> &InteractionParams {
        &self.params
    }
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn len(&self) -> usize {
        self.grid.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn stiffness(&self) -> &BorderedTridiag {
        &self.stiffness
    }
    pub fn mass_matrix(&self) -> &BorderedTridiag {
        &self.mass_matrix
    }
    pub fn green_at_nodes(&self) -> &[f64] {
        &self.g_nodes
    }
    pub fn green_moments(&self) -> &[f64] {
        &self.moments
    }

    /// Packs a field as x = (f_0..f_{n-1}, c) at the reference λ.
    pub fn to_state(&self, field: &DecomposedField) -> Result<Vec<C64>> {
        if !self.grid.same_as(field.grid()) {
            return Err(Error::GridMismatch("field grid differs from the discretization grid".into()));
        }
        let f = field.rebase(self.lambda)?;
        let mut x = f.regular().to_vec();
        x.push(f.singular_coeff());
        Ok(x)
    }

    pub fn to_field(&self, x: &[C64]) -> Result<DecomposedField> {
        let n = self.len();
        DecomposedField::new(self.grid.clone(), x[..n].to_vec(), x[n], self.lambda)
    }

    pub fn sub_values(&self, x: &[C64]) -> Vec<C64> {
        let c = x[self.len()];
        self.grid.sub_rule().cell.iter().zip(&self.g_sub).map(|(&i, &g)| x[i] + c * g).collect()
    }

    pub fn node_values(&self, x: &[C64]) -> Vec<C64> {
        let c = x[self.len()];
        x[..self.len()].iter().zip(&self.g_nodes).map(|(&f, &g)| f + c * g).collect()
    }

    pub fn quadratic_state(&self, x: &[C64]) -> f64 {
        self.stiffness.sesquilinear(x, x).re
    }

    pub fn mass_state(&self, x: &[C64]) -> f64 {
        let w = &self.grid.sub_rule().w;
        self.sub_values(x).iter().zip(w).map(|(u, &wk)| wk * u.norm_sqr()).sum()
    }

    /// Σ w |u|^(p+1).
    pub fn lp1_state(&self, x: &[C64]) -> f64 {
        let e = 0.5 * (self.params.p() + 1.0);
        let w = &self.grid.sub_rule().w;
        self.sub_values(x).iter().zip(w).map(|(u, &wk)| wk * pow_half(u.norm_sqr(), e)).sum()
    }

    /// Gradient of Σ w|u|^(p+1)/(p+1) in (Re, Im) coordinates, packed as complex numbers.
    pub fn nonlinear_gradient_state(&self, x: &[C64]) -> Vec<C64> {
        let n = self.len();
        let e = 0.5 * (self.params.p() - 1.0);
        let sub = self.grid.sub_rule();
        let u = self.sub_values(x);
        let mut g = vec![C64::new(0.0, 0.0); n + 1];
        let mut gc = C64::new(0.0, 0.0);
        for k in 0..u.len() {
            let t = u[k] * (sub.w[k] * pow_half(u[k].norm_sqr(), e));
            g[sub.cell[k]] += t;
            gc += t * self.g_sub[k];
        }
        g[n] = gc;
        g
    }

    /// Real symmetric approximation of the nonlinear Hessian, weight p|u|^(p-1).
    pub fn nonlinear_hessian_state(&self, x: &[C64]) -> BorderedTridiag {
        let n = self.len();
        let p = self.params.p();
        let sub = self.grid.sub_rule();
        let u = self.sub_values(x);
        let mut h = BorderedTridiag::zeros(n);
        let mut corner = 0.0;
        for k in 0..u.len() {
            let s = sub.w[k] * p * pow_half(u[k].norm_sqr(), 0.5 * (p - 1.0));
            let i = sub.cell[k];
            h.diag[i].re += s;
            h.border[i].re += s * self.g_sub[k];
            corner += s * self.g_sub[k] * self.g_sub[k];
        }
        h.corner = C64::new(corner, 0.0);
        h
    }

    pub fn action_state(&self, x: &[C64], omega: f64) -> FormEvaluation {
        let q = self.quadratic_state(x);
        let mass = self.mass_state(x);
        let lp1 = self.lp1_state(x);
        let action = 0.5 * q + lp1 / (self.params.p() + 1.0) + 0.5 * omega * mass;
        FormEvaluation { q_value: q, action, mass, lp1_term: lp1, lambda_used: self.lambda }
    }

    /// Gradient of the action in (Re, Im) coordinates of x.
    pub fn gradient_state(&self, x: &[C64], omega: f64, nonlinear: bool) -> Vec<C64> {
        let kx = self.stiffness.apply(x);
        let mx = self.mass_matrix.apply(x);
        let mut g: Vec<C64> = kx.iter().zip(&mx).map(|(&a, &b)| a + b * omega).collect();
        if nonlinear {
            for (gi, ni) in g.iter_mut().zip(self.nonlinear_gradient_state(x)) {
                *gi += ni;
            }
        }
        g
    }

    /// Quadrature-weighted dual norm of a packed gradient.
    pub fn dual_norm(&self, g: &[C64]) -> f64 {
        let n = self.len();
        let w = self.grid.weights();
        let s: f64 = (0..n).map(|i| g[i].norm_sqr() / w[i]).sum();
        (s + g[n].norm_sqr()).sqrt()
    }

    pub fn quadratic_form(&self, field: &DecomposedField) -> Result<f64> {
        Ok(self.quadratic_state(&self.to_state(field)?))
    }

    /// a(u, v): linear in u, conjugate-linear in v.
    pub fn bilinear_form(&self, u: &DecomposedField, v: &DecomposedField) -> Result<C64> {
        let x = self.to_state(u)?;
        let y = self.to_state(v)?;
        Ok(self.stiffness.sesquilinear(&y, &x))
    }

    pub fn action(&self, field: &DecomposedField, omega: f64) -> Result<FormEvaluation> {
        Ok(self.action_state(&self.to_state(field)?, omega))
    }

    pub fn action_gradient(&self, field: &DecomposedField, omega: f64) -> Result<Cogradient> {
        self.action_gradient_with(field, omega, true)
    }

    /// Cogradient with respect to the field's own coordinates (f at its λ, c).
    pub fn action_gradient_with(&self, field: &DecomposedField, omega: f64, nonlinear: bool) -> Result<Cogradient> {
        let x = self.to_state(field)?;
        let g = self.gradient_state(&x, omega, nonlinear);
        let n = self.len();
        let mut singular = g[n];
        if field.lambda() != self.lambda {
            let dim = self.params.dim();
            for (i, &r) in self.grid.nodes().iter().enumerate() {
                let d = green_unchecked(dim, field.lambda(), r) - self.g_nodes[i];
                singular += g[i] * d;
            }
        }
        let w = self.grid.weights();
        let regular = (0..n).map(|i| g[i] / w[i]).collect();
        Ok(Cogradient { regular, singular })
    }

    pub fn euler_lagrange_residual(&self, field: &DecomposedField, omega: f64) -> Result<f64> {
        self.euler_lagrange_residual_with(field, omega, true)
    }

    pub fn euler_lagrange_residual_with(&self, field: &DecomposedField, omega: f64, nonlinear: bool) -> Result<f64> {
        let cg = self.action_gradient_with(field, omega, nonlinear)?;
        let w = self.grid.weights();
        let s: f64 = cg.regular.iter().zip(w).map(|(g, &wi)| wi * g.norm_sqr()).sum();
        Ok((s + cg.singular.norm_sqr()).sqrt())
    }

    /// ‖∇f‖ at the reference λ.
    pub fn gradient_norm(&self, x: &[C64]) -> f64 {
        radial_gradient_norm_sq_with(&self.grid, &x[..self.len()], flux_exponent(&self.params)).sqrt()
    }

    /// Stiffness weights and forward differences of a packed state, Dirichlet-closed at R.
    pub fn gradient_parts(&self, x: &[C64]) -> (Vec<f64>, Vec<C64>) {
        let n = self.len();
        let d = (0..n).map(|i| if i + 1 < n { x[i + 1] - x[i] } else { -x[i] }).collect();
        (self.grid.stiffness_weights(flux_exponent(&self.params)), d)
    }

    /// Σ w |u − z v|^(p+1) for sub-point values u, v.
    pub fn lp1_offset(&self, u: &[C64], v: &[C64], z: C64) -> f64 {
        let e = 0.5 * (self.params.p() + 1.0);
        let w = &self.grid.sub_rule().w;
        u.iter().zip(v).zip(w).map(|((&a, &b), &wk)| wk * pow_half((a - z * b).norm_sqr(), e)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::special::Dim;

    #[test]
    fn pieces_sum_to_action() {
        let params = InteractionParams::unit_bound_state(Dim::Three, 1.5).unwrap();
        let grid = Arc::new(build_grid(Dim::Three, 1e-20, 30.0, 200, 2.0).unwrap());
        let d = Discretization::new(params, grid.clone()).unwrap();
        let f = DecomposedField::from_regular_fn(grid, 2.0, |r| C64::new((-r).exp(), 0.1)).unwrap();
        let e = d.action(&f, 0.3).unwrap();
        assert_eq!(e.action, 0.5 * e.q_value + e.lp1_term / 2.5 + 0.15 * e.mass);
    }

    #[test]
    fn mass_matrix_matches_quadrature() {
        let params = InteractionParams::unit_bound_state(Dim::Two, 3.0).unwrap();
        let grid = Arc::new(build_grid(Dim::Two, 1e-20, 30.0, 200, 2.0).unwrap());
        let d = Discretization::new(params, grid).unwrap();
        let x: Vec<C64> = (0..=200).map(|i| C64::new((i as f64 * 0.1).cos(), (i as f64).sin() * 0.01)).collect();
        let a = d.mass_state(&x);
        let b = d.mass_matrix().sesquilinear(&x, &x).re;
        assert!((a - b).abs() < 1e-12 * a);
    }
}
