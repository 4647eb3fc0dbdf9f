//! Standing-wave profiles: direct minimization, shooting, decay analysis.

pub mod decay;
pub mod minimize;
pub mod shoot;
pub mod veron;

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{DecomposedField, C64};
use crate::grid::{build_grid_with_shape, RadialGrid};
use crate::special::InteractionParams;

pub use decay::{
    comparison_sandwich_check, decay_analysis, decay_grid, decay_radius, fit_log_slope, fit_tail_exponent, l2_threshold_experiment, sandwich_check_profile, L2Threshold,
    DecayReport, L2Verdict, SandwichReport, TailFit,
};
pub use minimize::{minimize_action, MinimizeOptions};
pub use shoot::{shoot_continuum, shoot_profile, OuterCondition, ShootOptions, ShotProfile};
pub use veron::{veron_exact_residual, Veron};

/// Lower cut of default grids; the sub-cell rule integrates down to it.
pub const DEFAULT_R_MIN: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Minimize,
    Shoot,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub profile: DecomposedField,
    pub omega: f64,
    pub d_omega: f64,
    pub residual: f64,
    pub method: Method,
    pub iterations: usize,
    pub boundary_defect: f64,
    pub tail_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub omega: f64,
    pub d_omega: f64,
    pub residual: f64,
    pub boundary_defect: f64,
    pub tail_exponent: Option<f64>,
    pub method: Method,
    pub iterations: usize,
}

impl SolveResult {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            omega: self.omega,
            d_omega: self.d_omega,
            residual: self.residual,
            boundary_defect: self.boundary_defect,
            tail_exponent: self.tail_exponent,
            method: self.method,
            iterations: self.iterations,
        }
    }

    pub fn singular_coeff(&self) -> C64 {
        self.profile.singular_coeff()
    }

    /// Largest nodal value (attained at the innermost node).
    pub fn sup_value(&self) -> f64 {
        self.profile.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_positive_decreasing(&self) -> bool {
        is_positive_decreasing(&self.profile)
    }
}

pub fn is_positive_decreasing(field: &DecomposedField) -> bool {
    let u = field.values();
    u.iter().all(|v| v.re > 0.0 && v.im.abs() <= 1e-12 * v.re) && u.windows(2).all(|w| w[1].re < w[0].re)
}

pub(crate) fn check_omega(params: &InteractionParams, omega: f64) -> Result<()> {
    let w = params.omega_alpha();
    if !(omega >= 0.0 && omega < w) {
        return Err(Error::Domain(format!("omega = {omega} must lie in [0, omega_alpha) = [0, {w})")));
    }
    Ok(())
}

/// Default mesh in units where ω_α = 1 sets the length scale; the sub-cell shape uses G_{ω_α}.
pub fn default_grid(params: &InteractionParams, omega: f64) -> Result<Arc<RadialGrid>> {
    default_grid_with(params, omega, 4096)
}

pub fn default_grid_with(params: &InteractionParams, omega: f64, n: usize) -> Result<Arc<RadialGrid>> {
    let wa = params.omega_alpha();
    let len = 1.0 / wa.sqrt();
    let (r_max, grading) = if omega > 0.0 {
        ((40.0 / (omega / wa).max(0.05).sqrt()).max(200.0) * len, 2.0)
    } else {
        (400.0 * len, 2.5)
    };
    Ok(Arc::new(build_grid_with_shape(params.dim(), DEFAULT_R_MIN, r_max, n, grading, wa)?))
}

/// Rotates a packed state so that c is real and positive. Since α + β(λ) > 0 for λ > ω_α,
/// this also makes the regular part's origin value f(0) = (α+β(λ))c positive.
pub fn gauge_fix_state(x: &mut [C64]) {
    let c = *x.last().unwrap();
    let a = c.norm();
    if a == 0.0 {
        return;
    }
    let phase = (c / a).conj();
    for v in x.iter_mut() {
        *v *= phase;
    }
    // exact, so that a second application is the identity
    *x.last_mut().unwrap() = C64::new(a, 0.0);
}

pub fn gauge_fix(field: &DecomposedField) -> DecomposedField {
    let c = field.singular_coeff();
    let a = c.norm();
    if a == 0.0 {
        return field.clone();
    }
    let (grid, regular, _, lambda) = field.scale((c / a).conj()).into_parts();
    DecomposedField::new(grid, regular, C64::new(a, 0.0), lambda).expect("rotation keeps samples finite")
}

/// max(|c₁ − c₂|/|c₂|, ‖f₁ − f₂‖∞/‖f₂‖∞) with both regular parts at the same λ.
pub fn profile_distance(a: &DecomposedField, b: &DecomposedField) -> Result<f64> {
    if !a.grid().same_as(b.grid()) {
        return Err(Error::GridMismatch("profiles live on different grids".into()));
    }
    let b = b.rebase(a.lambda())?;
    let dc = (a.singular_coeff() - b.singular_coeff()).norm() / b.singular_coeff().norm();
    let num = a.regular().iter().zip(b.regular()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let den = b.regular().iter().map(|y| y.norm()).fold(0.0, f64::max);
    Ok(dc.max(num / den))
}

/// Both solvers on one grid. Shooting uses φ(R) = 0 so that it solves the same truncated
/// problem as the minimizer.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub minimize: SolveResult,
    pub shoot: SolveResult,
    /// Relative sup-norm distance of the two profiles, see [`profile_distance`].
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossReport {
    pub omega: f64,
    pub distance: f64,
    pub tolerance: f64,
    pub minimize: SolveSummary,
    pub shoot: SolveSummary,
    pub both_positive_decreasing: bool,
    pub passed: bool,
}

pub const CROSS_TOLERANCE: f64 = 1e-3;
pub const DEFECT_TOLERANCE: f64 = 1e-6;

impl CrossValidation {
    pub fn report(&self) -> CrossReport {
        let both = self.minimize.is_positive_decreasing() && self.shoot.is_positive_decreasing();
        CrossReport {
            omega: self.minimize.omega,
            distance: self.distance,
            tolerance: CROSS_TOLERANCE,
            minimize: self.minimize.summary(),
            shoot: self.shoot.summary(),
            both_positive_decreasing: both,
            passed: self.distance <= CROSS_TOLERANCE && both,
        }
    }
}

pub fn cross_validate(
    params: &InteractionParams,
    omega: f64,
    grid: Arc<RadialGrid>,
    mopts: &MinimizeOptions,
    sopts: &ShootOptions,
) -> Result<CrossValidation> {
    let minimize = minimize_action(params, omega, grid.clone(), mopts)?;
    let sopts = ShootOptions { outer: OuterCondition::Dirichlet { radius: grid.r_max() }, ..sopts.clone() };
    let shoot = shoot_profile(params, omega, grid, &sopts)?;
    let distance = profile_distance(&minimize.profile, &shoot.profile)?;
    Ok(CrossValidation { minimize, shoot, distance })
}
