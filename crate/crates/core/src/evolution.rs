//! Crank–Nicolson time integration of i∂ₜu = −Δ_α u + |u|^(p−1)u and orbital diagnostics.
//!
//! The scheme advances the packed unknowns x = (f, c) of the discretization:
//! (M + i·dt/2·K) x⁺ = (M − i·dt/2·K) x − i·dt·N((x + x⁺)/2),
//! with the midpoint nonlinearity resolved by fixed-point iteration. The origin condition
//! f(0) = (α+β(λ))c is the natural boundary condition of the form and is monitored, not imposed.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{DecomposedField, C64};
use crate::form::Discretization;
use crate::grid::RadialGrid;
use crate::groundstate::{minimize_action, MinimizeOptions};
use crate::linalg::{BorderedFactor, BorderedTridiag};
use crate::origin::boundary_value;
use crate::special::{Dim, InteractionParams};

pub const MAX_FIXED_POINT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "H1_alpha")]
    H1Alpha,
    X0,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::H1Alpha => "H1_alpha",
            Metric::X0 => "X0",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H1_alpha" | "h1_alpha" | "H1" | "h1" => Ok(Metric::H1Alpha),
            "X0" | "x0" => Ok(Metric::X0),
            _ => Err(Error::InvalidArgument(format!("unknown metric {s:?}; expected H1_alpha or X0"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Reference λ of the decomposition; None selects 1 + ω_α.
    pub lambda: Option<f64>,
    pub solver_tol: f64,
    pub metric: Metric,
    pub delta: f64,
    /// Strength of the absorbing ramp on the outer 10% of nodes.
    pub sponge: f64,
    /// Record diagnostics every this many steps.
    pub record_every: usize,
    /// Drop the nonlinearity.
    pub linear_only: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 1e-3,
            t_final: 30.0,
            lambda: None,
            solver_tol: 1e-13,
            metric: Metric::H1Alpha,
            delta: 0.0,
            sponge: 0.0,
            record_every: 10,
            linear_only: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be finite and nonzero, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_final must be nonnegative, got {}", self.t_final)));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::InvalidArgument("solver tolerance must be positive".into()));
        }
        if !(self.delta >= 0.0) || !(self.sponge >= 0.0) || self.record_every == 0 {
            return Err(Error::InvalidArgument("delta and sponge must be nonnegative, record_every positive".into()));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0) {
                return Err(Error::InvalidArgument(format!("lambda must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

/// Time-stepper bound to one discretization and step size.
#[derive(Debug, Clone)]
pub struct Evolver {
    disc: Discretization,
    dt: f64,
    tol: f64,
    linear_only: bool,
    lhs: BorderedFactor,
    rhs: BorderedTridiag,
}

impl Evolver {
    pub fn new(params: &InteractionParams, grid: Arc<RadialGrid>, cfg: &EvolutionConfig) -> Result<Self> {
        cfg.validate()?;
        let disc = match cfg.lambda {
            Some(l) => Discretization::with_lambda(*params, grid, l)?,
            None => Discretization::new(*params, grid)?,
        };
        Ok(Self::from_discretization(disc, cfg))
    }

    pub fn from_discretization(disc: Discretization, cfg: &EvolutionConfig) -> Self {
        let dt = cfg.dt;
        let mut damped = disc.mass_matrix().clone();
        if cfg.sponge > 0.0 {
            let nodes = disc.grid().nodes();
            let w = disc.grid().weights();
            let r_max = disc.grid().r_max();
            let start = 0.9 * r_max;
            for (i, &r) in nodes.iter().enumerate() {
                if r > start {
                    let s = (r - start) / (r_max - start);
                    damped.diag[i] += C64::new(0.5 * dt.abs() * cfg.sponge * w[i] * s * s, 0.0);
                }
            }
        }
        // damped = M + dt/2·Γ; lhs = damped + i·dt/2·K; rhs = 2M − damped − i·dt/2·K
        let k = disc.stiffness();
        let half = C64::new(0.0, 0.5 * dt);
        let lhs = damped.lin_comb(C64::new(1.0, 0.0), k, half).factor();
        let m2 = disc.mass_matrix().lin_comb(C64::new(2.0, 0.0), &damped, C64::new(-1.0, 0.0));
        let rhs = m2.lin_comb(C64::new(1.0, 0.0), k, -half);
        Evolver { disc, dt, tol: cfg.solver_tol, linear_only: cfg.linear_only, lhs, rhs }
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn mass_norm(&self, x: &[C64]) -> f64 {
        self.disc.mass_matrix().sesquilinear(x, x).re.max(0.0).sqrt()
    }

    /// One step; returns the new state and the number of fixed-point iterations.
    pub fn step_state(&self, x: &[C64]) -> Result<(Vec<C64>, usize)> {
        self.step_state_from(x, x.to_vec())
    }

    /// One step starting the fixed-point iteration from `guess`.
    pub fn step_state_from(&self, x: &[C64], guess: Vec<C64>) -> Result<(Vec<C64>, usize)> {
        let base = self.rhs.apply(x);
        if self.linear_only {
            return Ok((self.lhs.solve(&base), 0));
        }
        let scale = C64::new(0.0, -self.dt);
        let mut next = guess;
        for it in 1..=MAX_FIXED_POINT {
            let mid: Vec<C64> = x.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect();
            let nl = self.disc.nonlinear_gradient_state(&mid);
            let b: Vec<C64> = base.iter().zip(&nl).map(|(&a, &v)| a + scale * v).collect();
            let cand = self.lhs.solve(&b);
            let diff: Vec<C64> = cand.iter().zip(&next).map(|(a, b)| a - b).collect();
            let change = self.mass_norm(&diff);
            let size = self.mass_norm(&cand);
            next = cand;
            if change <= self.tol * size || size == 0.0 {
                return Ok((next, it));
            }
        }
        Err(Error::NonlinearDivergence(MAX_FIXED_POINT))
    }

    pub fn step(&self, field: &DecomposedField) -> Result<DecomposedField> {
        let x = self.disc.to_state(field)?;
        let (y, _) = self.step_state(&x)?;
        self.disc.to_field(&y)
    }

    pub fn mass(&self, x: &[C64]) -> f64 {
        self.disc.mass_state(x)
    }

    /// ½Q(u) + ‖u‖^(p+1)_(p+1)/(p+1).
    pub fn energy(&self, x: &[C64]) -> f64 {
        let q = self.disc.quadratic_state(x);
        if self.linear_only {
            0.5 * q
        } else {
            0.5 * q + self.disc.lp1_state(x) / (self.disc.params().p() + 1.0)
        }
    }
}

/// One Crank–Nicolson step of `state` under `config`.
pub fn step(params: &InteractionParams, state: &DecomposedField, config: &EvolutionConfig) -> Result<DecomposedField> {
    let cfg = EvolutionConfig { lambda: Some(config.lambda.unwrap_or(state.lambda())), ..config.clone() };
    Evolver::new(params, state.grid().clone(), &cfg)?.step(state)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub orbital_distance: Vec<f64>,
    pub c: Vec<C64>,
    /// Relative origin-condition defect at each record.
    pub constraint_defect: Vec<f64>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t,mass,energy,orbital_distance,c_re,c_im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,mass,energy,orbital_distance,c_re,c_im\n");
        for i in 0..self.len() {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.times[i], self.mass[i], self.energy[i], self.orbital_distance[i], self.c[i].re, self.c[i].im
            ));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub mass_drift: f64,
    pub energy_drift: f64,
}

fn max_relative_drift(v: &[f64]) -> f64 {
    let Some(&v0) = v.first() else { return 0.0 };
    let worst = v.iter().map(|x| (x - v0).abs()).fold(0.0, f64::max);
    if worst == 0.0 {
        0.0
    } else if v0 == 0.0 {
        worst
    } else {
        worst / v0.abs()
    }
}

/// Largest relative deviation of mass and energy from their initial values.
pub fn conserve_report(trace: &EvolutionTrace) -> Drift {
    Drift { mass_drift: max_relative_drift(&trace.mass), energy_drift: max_relative_drift(&trace.energy) }
}

/// Phase orbit {e^{iθ}φ} measured in a chosen metric.
#[derive(Debug, Clone)]
pub struct Orbit {
    disc: Discretization,
    phi: Vec<C64>,
    metric: Metric,
    hilbert: BorderedTridiag,
}

impl Orbit {
    pub fn new(disc: &Discretization, phi: &DecomposedField, omega: f64, metric: Metric) -> Result<Self> {
        let params = disc.params();
        if metric == Metric::H1Alpha && omega == 0.0 && params.dim() == Dim::Two && params.p() >= 3.0 {
            return Err(Error::MetricMismatch(format!(
                "the zero-mass profile for dim 2, p = {} is not square integrable; use X0",
                params.p()
            )));
        }
        let lam = 1.0 + params.omega_alpha();
        let hilbert = disc.stiffness().lin_comb(C64::new(1.0, 0.0), disc.mass_matrix(), C64::new(lam, 0.0));
        Ok(Orbit { disc: disc.clone(), phi: disc.to_state(phi)?, metric, hilbert })
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Metric norm of a packed state.
    pub fn norm(&self, x: &[C64]) -> f64 {
        match self.metric {
            Metric::H1Alpha => self.hilbert.sesquilinear(x, x).re.max(0.0).sqrt(),
            Metric::X0 => {
                let p1 = self.disc.params().p() + 1.0;
                self.disc.gradient_norm(x) + x[self.disc.len()].norm() + self.disc.lp1_state(x).powf(1.0 / p1)
            }
        }
    }

    fn offset(&self, x: &[C64], theta: f64) -> Vec<C64> {
        let z = C64::from_polar(1.0, theta);
        x.iter().zip(&self.phi).map(|(a, b)| a - z * b).collect()
    }

    /// inf over θ of ‖x − e^{iθ}φ‖.
    pub fn distance(&self, x: &[C64]) -> f64 {
        match self.metric {
            Metric::H1Alpha => {
                let pairing = self.hilbert.sesquilinear(&self.phi, x);
                let theta = if pairing.norm() > 0.0 { pairing.arg() } else { 0.0 };
                self.norm(&self.offset(x, theta))
            }
            Metric::X0 => {
                let n = self.disc.len();
                let p1 = self.disc.params().p() + 1.0;
                let (sw, dx) = self.disc.gradient_parts(x);
                let (_, dp) = self.disc.gradient_parts(&self.phi);
                let (sx, sp) = (self.disc.sub_values(x), self.disc.sub_values(&self.phi));
                let (cx, cp) = (x[n], self.phi[n]);
                let f = |t: f64| {
                    let z = C64::from_polar(1.0, t);
                    let grad = sw.iter().zip(&dx).zip(&dp).map(|((&w, &a), &b)| w * (a - z * b).norm_sqr()).sum::<f64>().sqrt();
                    grad + (cx - z * cp).norm() + self.disc.lp1_offset(&sx, &sp, z).powf(1.0 / p1)
                };
                let m = 64;
                let h = 2.0 * PI / m as f64;
                let best = (0..m).map(|j| j as f64 * h).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
                // the distance is V-shaped at an exact orbit point, so resolve θ well below 1e−8
                golden_section(f, best - h, best + h, 1e-13)
            }
        }
    }

    pub fn distance_field(&self, u: &DecomposedField) -> Result<f64> {
        Ok(self.distance(&self.disc.to_state(u)?))
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

/// inf over θ of the metric distance between u and e^{iθ}φ.
pub fn orbital_distance(
    params: &InteractionParams,
    u: &DecomposedField,
    phi: &DecomposedField,
    omega: f64,
    metric: Metric,
) -> Result<f64> {
    if !u.grid().same_as(phi.grid()) {
        return Err(Error::GridMismatch("u and phi live on different grids".into()));
    }
    let disc = Discretization::with_lambda(*params, phi.grid().clone(), phi.lambda())?;
    Orbit::new(&disc, phi, omega, metric)?.distance_field(u)
}

/// Reference orbit and rotation rate used for diagnostics during a run.
pub struct Reference<'a> {
    pub phi: &'a DecomposedField,
    pub omega: f64,
}

/// Evolves `init` to `cfg.t_final`, recording diagnostics every `cfg.record_every` steps.
pub fn evolve(
    params: &InteractionParams,
    init: &DecomposedField,
    reference: Option<Reference<'_>>,
    cfg: &EvolutionConfig,
) -> Result<(DecomposedField, EvolutionTrace)> {
    let cfg = EvolutionConfig { lambda: Some(cfg.lambda.unwrap_or(init.lambda())), ..cfg.clone() };
    let ev = Evolver::new(params, init.grid().clone(), &cfg)?;
    let disc = ev.discretization();
    let orbit = match &reference {
        Some(r) => Some(Orbit::new(disc, r.phi, r.omega, cfg.metric)?),
        None => None,
    };
    let omega_ref = reference.as_ref().map(|r| r.omega).unwrap_or(0.0);
    let steps = (cfg.t_final / cfg.dt.abs()).round() as usize;
    let mut x = disc.to_state(init)?;
    let mut trace = EvolutionTrace::default();
    let record = |t: f64, x: &[C64], trace: &mut EvolutionTrace| -> Result<()> {
        trace.times.push(t);
        trace.mass.push(ev.mass(x));
        trace.energy.push(ev.energy(x));
        trace.orbital_distance.push(orbit.as_ref().map(|o| o.distance(x)).unwrap_or(0.0));
        let c = x[disc.len()];
        trace.c.push(c);
        let defect = if c.norm() > 0.0 { boundary_value(params, omega_ref, &disc.to_field(x)?).1 } else { 0.0 };
        trace.constraint_defect.push(defect);
        Ok(())
    };
    record(0.0, &x, &mut trace)?;
    let mut prev: Option<Vec<C64>> = None;
    for k in 1..=steps {
        // linear extrapolation from the last two states seeds the fixed point
        let guess = match &prev {
            Some(p) => x.iter().zip(p).map(|(a, b)| 2.0 * a - b).collect(),
            None => x.clone(),
        };
        let next = ev.step_state_from(&x, guess)?.0;
        prev = Some(std::mem::replace(&mut x, next));
        if k % cfg.record_every == 0 || k == steps {
            record(k as f64 * cfg.dt, &x, &mut trace)?;
        }
    }
    Ok((disc.to_field(&x)?, trace))
}

/// Smooth real bump supported away from the origin, normalized to unit metric norm.
pub fn perturbation_bump(orbit: &Orbit) -> Result<Vec<C64>> {
    let disc = &orbit.disc;
    let scale = 1.0 / disc.params().omega_alpha().sqrt();
    let mut x: Vec<C64> = disc
        .grid()
        .nodes()
        .iter()
        .map(|&r| {
            let s = (r - 2.0 * scale) / scale;
            C64::new((-s * s).exp(), 0.0)
        })
        .collect();
    x.push(C64::new(0.0, 0.0));
    let n = orbit.norm(&x);
    if !(n > 0.0) {
        return Err(Error::InvalidArgument("perturbation bump vanishes on this grid".into()));
    }
    Ok(x.into_iter().map(|v| v / n).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub delta: f64,
    /// sup over the run of the orbital distance.
    pub sup_distance: f64,
    pub ratio: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityTable {
    pub omega: f64,
    pub metric: Metric,
    pub rows: Vec<StabilityRow>,
    /// D shrinks along with δ.
    pub monotone: bool,
    pub max_ratio: f64,
    /// Set for zero-mass runs whose profile is not square integrable.
    pub domain_truncated: bool,
}

impl StabilityTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,sup_distance,ratio,mass_drift,energy_drift\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.delta, r.sup_distance, r.ratio, r.mass_drift, r.energy_drift
            ));
        }
        s
    }
}

/// Perturbs the standing wave by δ·bump for each δ and records the largest orbital distance.
pub fn stability_experiment(
    params: &InteractionParams,
    omega: f64,
    grid: Arc<RadialGrid>,
    deltas: &[f64],
    cfg: &EvolutionConfig,
) -> Result<StabilityTable> {
    use rayon::prelude::*;
    let ground = minimize_action(params, omega, grid, &MinimizeOptions::default())?;
    let phi = match cfg.lambda {
        Some(l) => ground.profile.rebase(l)?,
        None => ground.profile.clone(),
    };
    let disc = Discretization::with_lambda(*params, phi.grid().clone(), phi.lambda())?;
    let orbit = Orbit::new(&disc, &phi, omega, cfg.metric)?;
    let bump = perturbation_bump(&orbit)?;
    let base = disc.to_state(&phi)?;
    let rows: Vec<StabilityRow> = deltas
        .par_iter()
        .map(|&delta| -> Result<StabilityRow> {
            let x0: Vec<C64> = base.iter().zip(&bump).map(|(a, b)| a + delta * b).collect();
            let init = disc.to_field(&x0)?;
            let (_, trace) = evolve(params, &init, Some(Reference { phi: &phi, omega }), cfg)?;
            let sup = trace.orbital_distance.iter().cloned().fold(0.0, f64::max);
            let drift = conserve_report(&trace);
            Ok(StabilityRow {
                delta,
                sup_distance: sup,
                ratio: if delta > 0.0 { sup / delta } else { 0.0 },
                mass_drift: drift.mass_drift,
                energy_drift: drift.energy_drift,
            })
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<&StabilityRow> = rows.iter().collect();
    order.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    let monotone = order.windows(2).all(|w| w[0].sup_distance <= w[1].sup_distance);
    let max_ratio = rows.iter().filter(|r| r.delta > 0.0).map(|r| r.ratio).fold(0.0, f64::max);
    let domain_truncated = omega == 0.0 && params.dim() == Dim::Two && params.p() >= 3.0;
    Ok(StabilityTable { omega, metric: cfg.metric, rows, monotone, max_ratio, domain_truncated })
}
