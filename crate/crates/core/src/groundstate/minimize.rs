//! Direct minimization of the discrete action.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::C64;
use crate::form::Discretization;
use crate::grid::RadialGrid;
use crate::linalg::BorderedFactor;
use crate::optim::{dot, Lbfgs};
use crate::origin::boundary_value;
use crate::special::{chi_alpha_coefficient, green_unchecked, InteractionParams};

use super::decay::fit_tail_exponent_default;
use super::{gauge_fix_state, Method, SolveResult};

#[derive(Debug, Clone)]
pub struct MinimizeOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub memory: usize,
    /// Rebuild the preconditioner every this many iterations.
    pub refresh: usize,
    pub armijo: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { tol: 1e-8, max_iter: 2000, memory: 8, refresh: 5, armijo: 1e-4 }
    }
}

/// Amplitude t with S_ω(t·χ_α) < 0 in the small-amplitude expansion.
pub fn initial_amplitude(params: &InteractionParams, omega: f64, chi_lp1: f64) -> f64 {
    let p = params.p();
    0.5 * ((p + 1.0) * (params.omega_alpha() - omega) / (2.0 * chi_lp1)).powf(1.0 / (p - 1.0))
}

/// Packed state of t·χ_α at the discretization's reference λ.
pub fn chi_state(disc: &Discretization, t: f64) -> Vec<C64> {
    let params = disc.params();
    let w = params.omega_alpha();
    let c = t * chi_alpha_coefficient(params);
    let dim = params.dim();
    let mut x: Vec<C64> = disc
        .grid()
        .nodes()
        .iter()
        .zip(disc.green_at_nodes())
        .map(|(&r, &g)| C64::new(c * (green_unchecked(dim, w, r) - g), 0.0))
        .collect();
    x.push(C64::new(c, 0.0));
    x
}

fn preconditioner(disc: &Discretization, x: &[C64], omega: f64) -> BorderedFactor {
    let base = disc.stiffness().lin_comb(C64::new(1.0, 0.0), disc.mass_matrix(), C64::new(omega, 0.0));
    let h = base.lin_comb(C64::new(1.0, 0.0), &disc.nonlinear_hessian_state(x), C64::new(1.0, 0.0));
    let mut f = h.factor();
    let mut shift = 1e-3 * disc.params().omega_alpha();
    while !f.is_positive_definite() && shift < 1e8 {
        f = h.lin_comb(C64::new(1.0, 0.0), disc.mass_matrix(), C64::new(shift, 0.0)).factor();
        shift *= 4.0;
    }
    f
}

pub fn minimize_action(params: &InteractionParams, omega: f64, grid: Arc<RadialGrid>, opts: &MinimizeOptions) -> Result<SolveResult> {
    super::check_omega(params, omega)?;
    let disc = Discretization::new(*params, grid)?;
    let t0 = {
        let unit = chi_state(&disc, 1.0);
        initial_amplitude(params, omega, disc.lp1_state(&unit))
    };
    let mut x = chi_state(&disc, t0);
    let mut s = disc.action_state(&x, omega).action;
    if !(s < 0.0) {
        return Err(Error::NoDescent(format!(
            "S(t·χ_α) = {s:e} is not negative; omega too close to omega_alpha or grid too coarse"
        )));
    }
    let mut g = disc.gradient_state(&x, omega, true);
    let mut mem = Lbfgs::new(opts.memory);
    let mut pre = preconditioner(&disc, &x, omega);
    let mut iters = 0;
    let mut residual = disc.dual_norm(&g);
    let mut stalls = 0;
    while residual > opts.tol {
        if iters >= opts.max_iter {
            return Err(Error::NotConverged(format!("residual {residual:e} after {iters} iterations")));
        }
        if iters > 0 && iters % opts.refresh == 0 {
            pre = preconditioner(&disc, &x, omega);
            mem.reset();
        }
        let h0 = |q: &[C64]| pre.solve(q);
        let mut d = mem.direction(&g, h0);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            mem.reset();
            d = pre.solve(&g).iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        // below this predicted decrease the action cannot resolve progress; use the residual
        let flat = slope.abs() < 1e-11 * (1.0 + s.abs());
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<C64> = x.iter().zip(&d).map(|(a, b)| C64::new(a.re + step * b.re, 0.0)).collect();
            let sn = disc.action_state(&xn, omega).action;
            let ok = if flat {
                disc.dual_norm(&disc.gradient_state(&xn, omega, true)) < residual
            } else {
                sn <= s + opts.armijo * step * slope
            };
            if ok {
                accepted = Some((xn, sn));
                break;
            }
            step *= 0.5;
        }
        iters += 1;
        let Some((xn, sn)) = accepted else {
            // rounding floor of the action; retry from a fresh preconditioner once
            stalls += 1;
            if stalls > 3 {
                return Err(Error::NotConverged(format!("line search failed at residual {residual:e}")));
            }
            pre = preconditioner(&disc, &x, omega);
            mem.reset();
            continue;
        };
        let gn = disc.gradient_state(&xn, omega, true);
        let sv: Vec<C64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<C64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        mem.push(sv, yv);
        x = xn;
        s = sn;
        g = gn;
        residual = disc.dual_norm(&g);
    }
    gauge_fix_state(&mut x);
    let profile = disc.to_field(&x)?;
    let eval = disc.action_state(&x, omega);
    let residual = disc.dual_norm(&disc.gradient_state(&x, omega, true));
    let (_, boundary_defect) = boundary_value(params, omega, &profile);
    let tail_exponent = if omega == 0.0 { fit_tail_exponent_default(&profile).ok().map(|f| f.exponent) } else { None };
    Ok(SolveResult {
        omega,
        d_omega: eval.action,
        residual,
        method: Method::Minimize,
        iterations: iters,
        boundary_defect,
        tail_exponent,
        profile,
    })
}
