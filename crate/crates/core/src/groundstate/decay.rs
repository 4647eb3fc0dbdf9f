//! Zero-frequency tail analysis.

use serde::Serialize;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::DecomposedField;
use crate::grid::{build_grid_with_shape, RadialGrid};
use crate::special::{Dim, InteractionParams};

use super::shoot::{shoot_continuum, shoot_profile, OuterCondition, ShootOptions};
use super::veron::Veron;

pub const MIN_FIT_NODES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of log φ from the fitted line.
    pub residual: f64,
    pub nodes: usize,
}

/// Least-squares slope of log u against log r.
pub fn fit_log_slope(r: &[f64], u: &[f64]) -> Result<TailFit> {
    if r.len() < MIN_FIT_NODES {
        return Err(Error::WindowTooSmall { found: r.len(), needed: MIN_FIT_NODES });
    }
    if u.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("tail fit needs positive samples".into()));
    }
    let n = r.len() as f64;
    let x: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = u.iter().map(|v| v.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(TailFit { exponent: slope, intercept, residual: (ss / n).sqrt(), nodes: r.len() })
}

/// Fits log|u| over the grid nodes inside `window`, which must lie in [R/4, 0.9R].
pub fn fit_tail_exponent(profile: &DecomposedField, window: (f64, f64)) -> Result<TailFit> {
    let rr = profile.grid().r_max();
    let (a, b) = window;
    if !(a >= 0.25 * rr * (1.0 - 1e-12) && b <= 0.9 * rr * (1.0 + 1e-12) && a < b) {
        return Err(Error::InvalidArgument(format!("fit window [{a}, {b}] must lie inside [R/4, 0.9R] with R = {rr}")));
    }
    let u = profile.values();
    let mut rs = Vec::new();
    let mut us = Vec::new();
    for (i, &r) in profile.grid().nodes().iter().enumerate() {
        if r >= a && r <= b {
            rs.push(r);
            us.push(u[i].norm());
        }
    }
    fit_log_slope(&rs, &us)
}

pub fn fit_tail_exponent_default(profile: &DecomposedField) -> Result<TailFit> {
    let rr = profile.grid().r_max();
    fit_tail_exponent(profile, (0.25 * rr, 0.9 * rr))
}

/// True iff u ≥ v − 1e−10 at every sample.
pub fn comparison_sandwich_check(u: &[f64], v: &[f64]) -> bool {
    u.len() == v.len() && u.iter().zip(v).all(|(a, b)| *a >= b - 1e-10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    /// Algebraic solution above ε·φ₀.
    pub upper: bool,
    pub upper_epsilon: f64,
    /// φ₀ above ε·(algebraic solution).
    pub lower: bool,
    pub lower_epsilon: f64,
}

/// Both comparison orders on samples r ≥ 1 of a zero-frequency profile.
pub fn sandwich_check_profile(p: f64, dim: Dim, r: &[f64], phi0: &[f64]) -> Result<SandwichReport> {
    let v = Veron::new(dim, p)?;
    let idx: Vec<usize> = (0..r.len()).filter(|&i| r[i] >= 1.0).collect();
    if idx.is_empty() {
        return Err(Error::InvalidArgument("no samples in [1, R]".into()));
    }
    let rs: Vec<f64> = idx.iter().map(|&i| r[i]).collect();
    let phi: Vec<f64> = idx.iter().map(|&i| phi0[i]).collect();
    let alg: Vec<f64> = rs.iter().map(|&x| v.value(x)).collect();
    let upper_epsilon = (alg[0] / phi[0]).min(1.0);
    let scaled: Vec<f64> = phi.iter().map(|x| upper_epsilon * x).collect();
    let upper = comparison_sandwich_check(&alg, &scaled);
    let lower_epsilon = (phi[0] / alg[0]).min(1.0);
    let scaled: Vec<f64> = alg.iter().map(|x| lower_epsilon * x).collect();
    let lower = comparison_sandwich_check(&phi, &scaled);
    Ok(SandwichReport { upper, upper_epsilon, lower, lower_epsilon })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum L2Verdict {
    Convergent,
    LogDivergent,
    PowerDivergent,
}

impl L2Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            L2Verdict::Convergent => "convergent",
            L2Verdict::LogDivergent => "log-divergent",
            L2Verdict::PowerDivergent => "power-divergent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L2Threshold {
    pub radii: Vec<f64>,
    pub mass: Vec<f64>,
    pub increments: Vec<f64>,
    /// d log(dM/d log R) / d log R from the two outermost increments.
    pub growth_exponent: f64,
    pub verdict: L2Verdict,
}

/// Truncated L² mass of the zero-frequency profile over balls of the given radii.
pub fn l2_threshold_experiment(params: &InteractionParams, r_list: &[f64]) -> Result<L2Threshold> {
    if r_list.len() < 3 || r_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("need at least three increasing radii".into()));
    }
    let opts = ShootOptions { outer: OuterCondition::Decaying, profile_radius: *r_list.last().unwrap(), ..Default::default() };
    let shot = shoot_continuum(params, 0.0, &opts)?;
    let mass: Vec<f64> = r_list.iter().map(|&r| shot.mass_within(r)).collect();
    let increments: Vec<f64> = mass.windows(2).map(|w| w[1] - w[0]).collect();
    let k = increments.len();
    let dens = |j: usize| increments[j] / (r_list[j + 1] / r_list[j]).ln();
    let mid = |j: usize| (r_list[j] * r_list[j + 1]).sqrt();
    let growth_exponent = (dens(k - 1) / dens(k - 2)).ln() / (mid(k - 1) / mid(k - 2)).ln();
    let verdict = if growth_exponent < -0.15 {
        L2Verdict::Convergent
    } else if growth_exponent <= 0.15 {
        L2Verdict::LogDivergent
    } else {
        L2Verdict::PowerDivergent
    };
    Ok(L2Threshold { radii: r_list.to_vec(), mass, increments, growth_exponent, verdict })
}

/// Outer radius for tail fits, in units of 1/√ω_α. The 3D correction to the algebraic
/// tail decays only like r^(−0.77) at p = 1.5, so 3D needs a longer domain.
pub fn decay_radius(params: &InteractionParams) -> f64 {
    let len = 1.0 / params.omega_alpha().sqrt();
    match params.dim() {
        Dim::Two => 400.0 * len,
        Dim::Three => 2000.0 * len,
    }
}

pub fn decay_grid(params: &InteractionParams) -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(build_grid_with_shape(params.dim(), super::DEFAULT_R_MIN, decay_radius(params), 4096, 2.5, params.omega_alpha())?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub dim: u32,
    pub p: f64,
    pub predicted_exponent: f64,
    pub fit: TailFit,
    pub relative_error: f64,
    pub sandwich: SandwichReport,
    /// Present in 2D only.
    pub l2: Option<L2Threshold>,
}

impl DecayReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.relative_error <= tol && self.sandwich.upper && self.sandwich.lower
    }
}

/// Zero-frequency decay analysis on the decaying shooting branch.
pub fn decay_analysis(params: &InteractionParams) -> Result<(DecomposedField, DecayReport)> {
    let grid = decay_grid(params)?;
    let res = shoot_profile(params, 0.0, grid.clone(), &ShootOptions::default())?;
    let fit = fit_tail_exponent_default(&res.profile)?;
    let predicted = -2.0 / (params.p() - 1.0);
    let phi: Vec<f64> = res.profile.values().iter().map(|v| v.re).collect();
    let sandwich = sandwich_check_profile(params.p(), params.dim(), grid.nodes(), &phi)?;
    let l2 = match params.dim() {
        Dim::Two => {
            let r0 = 50.0 / params.omega_alpha().sqrt();
            let radii: Vec<f64> = (0..5).map(|k| r0 * 2f64.powi(k)).collect();
            Some(l2_threshold_experiment(params, &radii)?)
        }
        Dim::Three => None,
    };
    let report = DecayReport {
        dim: params.dim().as_u32(),
        p: params.p(),
        predicted_exponent: predicted,
        relative_error: ((fit.exponent - predicted) / predicted).abs(),
        fit,
        sandwich,
        l2,
    };
    Ok((res.profile, report))
}
