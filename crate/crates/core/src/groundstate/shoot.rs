//! Radial ODE shooting on the singular strength A.
//!
//! A is bracketed and bisected by classifying forward shots (crossing zero versus turning
//! up), then polished by a two-sided match: the forward shot from the origin meets an
//! inward shot from a one-parameter far-field family at a matching radius.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{DecomposedField, C64};
use crate::form::Discretization;
use crate::grid::RadialGrid;
use crate::ode::{integrate, OdeOptions, State, Termination, Trajectory};
use crate::origin::{boundary_value, profile_minus_green, singular_profile, start_deviation, start_values};
use crate::special::{bessel_k01_scaled, green_unchecked, Dim, InteractionParams};

use super::decay::fit_tail_exponent_default;
use super::veron::Veron;
use super::{Method, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OuterCondition {
    /// The solution decaying at infinity.
    Decaying,
    /// φ(R) = 0.
    Dirichlet { radius: f64 },
}

#[derive(Debug, Clone)]
pub struct ShootOptions {
    pub r0: f64,
    pub rtol: f64,
    pub outer: OuterCondition,
    pub amplitude_min: f64,
    pub bisection_tol: f64,
    pub match_radius: Option<f64>,
    /// Radius the profile must cover; the far-field family starts well beyond it.
    pub profile_radius: f64,
    pub max_newton: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            r0: 1e-6,
            rtol: 1e-10,
            outer: OuterCondition::Decaying,
            amplitude_min: 1e-8,
            bisection_tol: 1e-12,
            match_radius: None,
            profile_radius: 200.0,
            max_newton: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    CrossesZero,
    TurnsUp,
}

const HUGE: f64 = 1e100;

/// A converged continuum profile, evaluable at any radius.
#[derive(Debug, Clone)]
pub struct ShotProfile {
    pub params: InteractionParams,
    pub omega: f64,
    pub amplitude: f64,
    pub outer: OuterCondition,
    pub r0: f64,
    pub match_radius: f64,
    pub far_radius: f64,
    pub far_param: f64,
    pub residual: f64,
    pub iterations: usize,
    forward: Trajectory,
    backward: Trajectory,
    origin_mass: f64,
}

struct Shooter {
    params: InteractionParams,
    omega: f64,
    opts: ShootOptions,
    ode: OdeOptions,
}

impl Shooter {
    fn rhs(&self) -> impl Fn(f64, &State) -> State + '_ {
        let n1 = self.params.dim().as_f64() - 1.0;
        let pm1 = self.params.p() - 1.0;
        let sigma = self.params.dim().sphere_area();
        let omega = self.omega;
        move |r: f64, y: &State| {
            let phi = y[0];
            let nl = phi.abs().powf(pm1) * phi;
            [y[1], omega * phi + nl - n1 / r * y[1], sigma * r.powf(n1) * phi * phi]
        }
    }

    /// Right-hand side for the deviation w = φ − A·s(r) from the harmonic singular profile.
    fn rhs_dev(&self, a: f64) -> impl Fn(f64, &State) -> State + '_ {
        let dim = self.params.dim();
        let alpha = self.params.alpha();
        let n1 = dim.as_f64() - 1.0;
        let pm1 = self.params.p() - 1.0;
        let sigma = dim.sphere_area();
        let omega = self.omega;
        move |r: f64, y: &State| {
            let phi = a * singular_profile(dim, alpha, r).0 + y[0];
            let nl = phi.abs().powf(pm1) * phi;
            [y[1], omega * phi + nl - n1 / r * y[1], sigma * r.powf(n1) * phi * phi]
        }
    }

    fn phi_of(&self, a: f64, r: f64, y: &State) -> (f64, f64) {
        let (s, ds) = singular_profile(self.params.dim(), self.params.alpha(), r);
        (a * s + y[0], a * ds + y[1])
    }

    fn start(&self, a: f64) -> State {
        let (w, dw) = start_deviation(&self.params, self.omega, a, self.opts.r0);
        [w, dw, 0.0]
    }

    /// Log-derivative of the decaying comparison solution at r.
    fn decaying_log_slope(&self, r: f64) -> f64 {
        if self.omega > 0.0 {
            let k = self.omega.sqrt();
            match self.params.dim() {
                Dim::Three => -k - 1.0 / r,
                Dim::Two => {
                    let (k0, k1) = bessel_k01_scaled(k * r).unwrap();
                    -k * k1 / k0
                }
            }
        } else {
            -self.params.zero_mass_exponent() / r
        }
    }

    fn classify(&self, a: f64) -> Shot {
        let horizon = if self.omega > 0.0 { 60.0 / self.omega.sqrt() + 60.0 } else { 1e8 };
        let (traj, _) = integrate(self.rhs_dev(a), self.opts.r0, self.start(a), horizon, &self.ode, |r, y| {
            let (phi, dphi) = self.phi_of(a, r, y);
            phi <= 0.0 || dphi >= 0.0 || phi.abs() > HUGE
        });
        let (r, y) = traj.last();
        let (phi, dphi) = self.phi_of(a, r, &y);
        if phi <= 0.0 {
            Shot::CrossesZero
        } else if dphi >= 0.0 || phi > HUGE {
            Shot::TurnsUp
        } else if dphi / phi < self.decaying_log_slope(r) {
            Shot::CrossesZero
        } else {
            Shot::TurnsUp
        }
    }

    fn bisect(&self) -> Result<(f64, usize)> {
        let mut lo = self.opts.amplitude_min;
        if self.classify(lo) != Shot::CrossesZero {
            return Err(Error::Bracket(format!("A = {lo} does not cross zero; is omega below omega_alpha?")));
        }
        let mut hi = 1.0f64.max(10.0 * lo);
        let mut grown = 0;
        while self.classify(hi) != Shot::TurnsUp {
            lo = hi;
            hi *= 4.0;
            grown += 1;
            if grown > 60 {
                return Err(Error::Bracket("no overshooting amplitude found".into()));
            }
        }
        let mut iters = 0;
        while hi - lo > self.opts.bisection_tol * hi && iters < 200 {
            let mid = (lo * hi).sqrt();
            let mid = if mid <= lo || mid >= hi { 0.5 * (lo + hi) } else { mid };
            match self.classify(mid) {
                Shot::CrossesZero => lo = mid,
                Shot::TurnsUp => hi = mid,
            }
            iters += 1;
        }
        Ok((0.5 * (lo + hi), iters + grown))
    }

    /// Forward shot in the deviation variable.
    fn forward(&self, a: f64, r_m: f64) -> Option<Trajectory> {
        let (traj, term) = integrate(self.rhs_dev(a), self.opts.r0, self.start(a), r_m, &self.ode, |r, y| {
            let phi = self.phi_of(a, r, y).0;
            phi <= 0.0 || phi.abs() > HUGE
        });
        let (r, y) = traj.last();
        if term == Termination::Reached && self.phi_of(a, r, &y).0 > 0.0 {
            Some(traj)
        } else {
            None
        }
    }

    fn far_radius(&self) -> f64 {
        match self.opts.outer {
            OuterCondition::Dirichlet { radius } => radius,
            OuterCondition::Decaying => {
                if self.omega > 0.0 {
                    // beyond this the profile sits below ~1e-250 of its core value
                    self.opts.profile_radius.min(550.0 / self.omega.sqrt()).max(self.opts.profile_radius.min(50.0))
                } else {
                    (1e3 * self.opts.profile_radius).max(1e6)
                }
            }
        }
    }

    fn far_data(&self, t: f64, r_far: f64, r_m: f64) -> State {
        match self.opts.outer {
            OuterCondition::Dirichlet { .. } => [0.0, -t.exp(), 0.0],
            OuterCondition::Decaying => {
                if self.omega > 0.0 {
                    let v = t.exp();
                    [v, v * self.decaying_log_slope(r_far), 0.0]
                } else {
                    let v = Veron::new(self.params.dim(), self.params.p()).unwrap();
                    let (mm, _) = v.mode_exponents();
                    let b = t * r_m.powf(-mm);
                    let mode = b * r_far.powf(mm);
                    [v.value(r_far) + mode, v.slope(r_far) + mm * mode / r_far, 0.0]
                }
            }
        }
    }

    /// Inward shot; Err(false) if it dives through zero, Err(true) if it blows up.
    fn backward(&self, t: f64, r_far: f64, r_m: f64) -> std::result::Result<Trajectory, bool> {
        let y0 = self.far_data(t, r_far, r_m);
        let (traj, term) = integrate(self.rhs(), r_far, y0, r_m, &self.ode, |_, y| y[0] <= 0.0 || y[0].abs() > HUGE);
        let (_, y) = traj.last();
        match term {
            Termination::Reached if y[0] > 0.0 => Ok(traj),
            // stopping short while still positive means a blow-up
            _ if y[0] > 0.0 || !y[0].is_finite() => Err(true),
            _ => Err(false),
        }
    }

    fn linear_param(&self) -> bool {
        matches!(self.opts.outer, OuterCondition::Decaying) && self.omega == 0.0
    }

    /// Far-family parameter whose inward shot hits the target value at r_m.
    fn match_value(&self, target: f64, r_far: f64, r_m: f64) -> Result<f64> {
        let eval = |t: f64| -> f64 {
            match self.backward(t, r_far, r_m) {
                Ok(tr) => tr.last().1[0] - target,
                Err(true) => f64::INFINITY,
                Err(false) => f64::NEG_INFINITY,
            }
        };
        let (mut lo, mut hi, step) = if self.linear_param() {
            (-target, target, 2.0)
        } else {
            let k = self.omega.sqrt();
            let guess = match self.opts.outer {
                OuterCondition::Dirichlet { radius } => target.ln() - k * (radius - r_m) + (k + 1.0 / radius).ln(),
                OuterCondition::Decaying => target.ln() - k * (r_far - r_m),
            };
            (guess - 3.0, guess + 3.0, 0.0)
        };
        let grow = |lo: &mut f64, hi: &mut f64| {
            if step > 0.0 {
                *lo *= step;
                *hi *= step;
            } else {
                *lo -= 3.0;
                *hi += 3.0;
            }
        };
        let mut tries = 0;
        while !(eval(lo) < 0.0 && eval(hi) > 0.0) {
            grow(&mut lo, &mut hi);
            tries += 1;
            if tries > 200 {
                return Err(Error::Bracket("far-field family does not bracket the matching value".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eval(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * (hi.abs() + lo.abs()) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn mismatch(&self, la: f64, t: f64, r_far: f64, r_m: f64) -> Option<([f64; 2], Trajectory, Trajectory)> {
        let fw = self.forward(la.exp(), r_m)?;
        let bw = self.backward(t, r_far, r_m).ok()?;
        let (r, y) = fw.last();
        let (p0, p1) = self.phi_of(la.exp(), r, &y);
        let a = [p0, p1];
        let (_, b) = bw.last();
        Some(([(a[0] - b[0]) / a[0].abs(), (a[1] - b[1]) / a[1].abs()], fw, bw))
    }

    fn solve(&self) -> Result<ShotProfile> {
        let (a_bis, bis_iters) = self.bisect()?;
        let wa = self.params.omega_alpha();
        let r_far = self.far_radius();
        let r_m = self.opts.match_radius.unwrap_or(3.0 / wa.sqrt()).min(0.25 * r_far);
        let fw = self
            .forward(a_bis, r_m)
            .ok_or_else(|| Error::NotConverged("bisected shot does not reach the matching radius".into()))?;
        let target = {
            let (r, y) = fw.last();
            self.phi_of(a_bis, r, &y).0
        };
        let mut t = self.match_value(target, r_far, r_m)?;
        let mut la = a_bis.ln();
        let (mut f, mut fwd, mut bwd) = self
            .mismatch(la, t, r_far, r_m)
            .ok_or_else(|| Error::NotConverged("initial two-sided shot failed".into()))?;
        let norm = |v: &[f64; 2]| v[0].hypot(v[1]);
        let mut iters = 0;
        for _ in 0..self.opts.max_newton {
            if norm(&f) < 1e-13 {
                break;
            }
            iters += 1;
            let ha = 1e-7;
            let ht = if self.linear_param() { 1e-7 * t.abs().max(target) } else { 1e-7 };
            let fa = self.mismatch(la + ha, t, r_far, r_m).map(|m| m.0);
            let ft = self.mismatch(la, t + ht, r_far, r_m).map(|m| m.0);
            let (Some(fa), Some(ft)) = (fa, ft) else { break };
            let j = [[(fa[0] - f[0]) / ha, (ft[0] - f[0]) / ht], [(fa[1] - f[1]) / ha, (ft[1] - f[1]) / ht]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let da = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
            let dt = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;
            let mut s = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                if let Some((fn_, fw2, bw2)) = self.mismatch(la + s * da, t + s * dt, r_far, r_m) {
                    if norm(&fn_) < norm(&f) {
                        la += s * da;
                        t += s * dt;
                        f = fn_;
                        fwd = fw2;
                        bwd = bw2;
                        improved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !improved {
                break;
            }
        }
        let a = la.exp();
        let r0 = self.opts.r0;
        Ok(ShotProfile {
            params: self.params,
            omega: self.omega,
            amplitude: a,
            outer: self.opts.outer,
            r0,
            match_radius: r_m,
            far_radius: r_far,
            far_param: t,
            residual: norm(&f),
            iterations: bis_iters + iters,
            forward: fwd,
            backward: bwd,
            origin_mass: origin_mass(&self.params, a, r0),
        })
    }
}

/// ∫₀^r0 σ t^(N−1) (A s(t))² dt for the leading singular profile.
fn origin_mass(params: &InteractionParams, a: f64, r0: f64) -> f64 {
    match params.dim() {
        Dim::Three => {
            let (b, c) = (a / (4.0 * PI), a * params.alpha());
            4.0 * PI * (b * b * r0 + b * c * r0 * r0 + c * c * r0.powi(3) / 3.0)
        }
        Dim::Two => {
            let (c, b) = (a * params.alpha(), a / (2.0 * PI));
            let l = r0.ln();
            let r2 = r0 * r0;
            2.0 * PI * (c * c * r2 / 2.0 - 2.0 * c * b * (r2 * l / 2.0 - r2 / 4.0) + b * b * (r2 * l * l / 2.0 - r2 * l / 2.0 + r2 / 4.0))
        }
    }
}

impl ShotProfile {
    /// (φ(r), φ'(r)).
    pub fn eval(&self, r: f64) -> (f64, f64) {
        if r <= self.r0 {
            return start_values(&self.params, self.omega, self.amplitude, r);
        }
        if r <= self.match_radius {
            let y = self.forward.eval(r);
            let (s, ds) = singular_profile(self.params.dim(), self.params.alpha(), r);
            return (self.amplitude * s + y[0], self.amplitude * ds + y[1]);
        }
        if r <= self.far_radius {
            let y = self.backward.eval(r);
            return (y[0], y[1]);
        }
        let y = self.backward.y[0];
        match self.outer {
            OuterCondition::Dirichlet { .. } => (0.0, 0.0),
            OuterCondition::Decaying if self.omega > 0.0 => {
                let k = self.omega.sqrt();
                let rf = self.far_radius;
                let (ratio, slope) = match self.params.dim() {
                    Dim::Three => ((rf / r) * (-k * (r - rf)).exp(), -k - 1.0 / r),
                    Dim::Two => {
                        let (a0, a1) = bessel_k01_scaled(k * r).unwrap();
                        let (b0, _) = bessel_k01_scaled(k * rf).unwrap();
                        (a0 / b0 * (-k * (r - rf)).exp(), -k * a1 / a0)
                    }
                };
                (y[0] * ratio, y[0] * ratio * slope)
            }
            OuterCondition::Decaying => {
                let v = Veron::new(self.params.dim(), self.params.p()).unwrap();
                let (mm, _) = v.mode_exponents();
                let b = self.far_param * self.match_radius.powf(-mm);
                let mode = b * r.powf(mm);
                (v.value(r) + mode, v.slope(r) + mm * mode / r)
            }
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// ∫ over the ball of radius r of φ², within the integrated range.
    pub fn mass_within(&self, r: f64) -> f64 {
        if r <= self.r0 {
            return origin_mass(&self.params, self.amplitude, r);
        }
        if r <= self.match_radius {
            return self.origin_mass + self.forward.eval(r)[2];
        }
        let at_match = self.origin_mass + self.forward.last().1[2];
        let base = self.backward.last().1[2];
        let rr = r.min(self.far_radius);
        at_match + self.backward.eval(rr)[2] - base
    }

    /// Samples the profile on a grid as u = f + A·G_λ.
    pub fn to_field(&self, grid: Arc<RadialGrid>, lambda: f64) -> Result<DecomposedField> {
        let dim = self.params.dim();
        let a = self.amplitude;
        let regular = grid
            .nodes()
            .iter()
            .map(|&r| {
                let smg = a * profile_minus_green(dim, self.params.alpha(), lambda, r);
                let f = if r <= self.r0 {
                    smg + start_deviation(&self.params, self.omega, a, r).0
                } else if r <= self.match_radius {
                    smg + self.forward.eval(r)[0]
                } else {
                    self.value(r) - a * green_unchecked(dim, lambda, r)
                };
                C64::new(f, 0.0)
            })
            .collect();
        DecomposedField::new(grid, regular, C64::new(a, 0.0), lambda)
    }
}

pub fn shoot_continuum(params: &InteractionParams, omega: f64, opts: &ShootOptions) -> Result<ShotProfile> {
    super::check_omega(params, omega)?;
    let ode = OdeOptions { rtol: opts.rtol, ..Default::default() };
    Shooter { params: *params, omega, opts: opts.clone(), ode }.solve()
}

/// Shooting solve sampled onto `grid`.
pub fn shoot_profile(params: &InteractionParams, omega: f64, grid: Arc<RadialGrid>, opts: &ShootOptions) -> Result<SolveResult> {
    let mut opts = opts.clone();
    opts.profile_radius = opts.profile_radius.max(grid.r_max());
    let shot = shoot_continuum(params, omega, &opts)?;
    let disc = Discretization::new(*params, grid.clone())?;
    let profile = shot.to_field(grid, disc.lambda())?;
    let eval = disc.action(&profile, omega)?;
    let (_, boundary_defect) = boundary_value(params, omega, &profile);
    let tail_exponent = if omega == 0.0 { fit_tail_exponent_default(&profile).ok().map(|f| f.exponent) } else { None };
    Ok(SolveResult {
        omega,
        d_omega: eval.action,
        residual: shot.residual,
        method: Method::Shoot,
        iterations: shot.iterations,
        boundary_defect,
        tail_exponent,
        profile,
    })
}
