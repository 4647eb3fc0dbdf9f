//! Adaptive Dormand–Prince 5(4) integration for small first-order systems.

pub const DIM: usize = 3;
pub type State = [f64; DIM];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Components excluded from step-size control.
    pub controlled: [bool; DIM],
    pub max_steps: usize,
    pub initial_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-300, controlled: [true, true, false], max_steps: 2_000_000, initial_step: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Reached,
    Stopped,
    StepLimit,
    StepUnderflow,
}

/// Accepted steps with derivatives, for cubic Hermite dense output.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub r: Vec<f64>,
    pub y: Vec<State>,
    pub dy: Vec<State>,
}

impl Trajectory {
    pub fn last(&self) -> (f64, State) {
        (*self.r.last().unwrap(), *self.y.last().unwrap())
    }

    pub fn start(&self) -> f64 {
        self.r[0]
    }

    pub fn end(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn covers(&self, x: f64) -> bool {
        let (a, b) = (self.start(), self.end());
        x >= a.min(b) && x <= a.max(b)
    }

    pub fn eval(&self, x: f64) -> State {
        let n = self.r.len();
        if n == 1 {
            return self.y[0];
        }
        let ascending = self.r[n - 1] > self.r[0];
        // index j with x between r[j] and r[j+1]
        let j = if ascending {
            self.r.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2)
        } else {
            self.r.partition_point(|&v| v >= x).saturating_sub(1).min(n - 2)
        };
        let (x0, x1) = (self.r[j], self.r[j + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let mut out = [0.0; DIM];
        for k in 0..DIM {
            out[k] = h00 * self.y[j][k] + h10 * h * self.dy[j][k] + h01 * self.y[j + 1][k] + h11 * h * self.dy[j + 1][k];
        }
        out
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for k in 0..DIM {
        let mut s = 0.0;
        for (c, v) in terms {
            s += c * v[k];
        }
        out[k] += h * s;
    }
    out
}

/// Integrates from `r_start` to `r_end` (either direction). `stop` is checked after every
/// accepted step; integration ends at the first step where it returns true.
pub fn integrate<F, S>(f: F, r_start: f64, y0: State, r_end: f64, opts: &OdeOptions, mut stop: S) -> (Trajectory, Termination)
where
    F: Fn(f64, &State) -> State,
    S: FnMut(f64, &State) -> bool,
{
    let dir = if r_end >= r_start { 1.0 } else { -1.0 };
    let span = (r_end - r_start).abs();
    let mut r = r_start;
    let mut y = y0;
    let mut k1 = f(r, &y);
    let mut traj = Trajectory { r: vec![r], y: vec![y], dy: vec![k1] };
    if span == 0.0 {
        return (traj, Termination::Reached);
    }
    let mut h = if opts.initial_step > 0.0 { opts.initial_step } else { 1e-3 * r_start.abs().max(span * 1e-6) };
    h = h.min(span);
    let mut prev_err: f64 = 1e-4;
    for _ in 0..opts.max_steps {
        let remaining = (r_end - r) * dir;
        if remaining <= 0.0 {
            return (traj, Termination::Reached);
        }
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        let hd = hs * dir;
        let k2 = f(r + C2 * hd, &axpy(&y, hd, &[(A21, &k1)]));
        let k3 = f(r + C3 * hd, &axpy(&y, hd, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(r + C4 * hd, &axpy(&y, hd, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(r + C5 * hd, &axpy(&y, hd, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(r + hd, &axpy(&y, hd, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let ynew = axpy(&y, hd, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let r_new = if last { r_end } else { r + hd };
        let k7 = f(r_new, &ynew);
        let mut err: f64 = 0.0;
        let mut cnt = 0.0;
        let mut finite = true;
        for k in 0..DIM {
            if !ynew[k].is_finite() {
                finite = false;
            }
            if !opts.controlled[k] {
                continue;
            }
            let e = hd * (E1 * k1[k] + E3 * k3[k] + E4 * k4[k] + E5 * k5[k] + E6 * k6[k] + E7 * k7[k]);
            let sc = opts.atol + opts.rtol * y[k].abs().max(ynew[k].abs());
            err += (e / sc).powi(2);
            cnt += 1.0;
        }
        let err = if finite { (err / cnt).sqrt() } else { f64::INFINITY };
        if err <= 1.0 {
            r = r_new;
            y = ynew;
            k1 = k7;
            traj.r.push(r);
            traj.y.push(y);
            traj.dy.push(k1);
            if stop(r, &y) {
                return (traj, Termination::Stopped);
            }
            // PI step control
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0)).clamp(0.2, 5.0) };
            prev_err = err.max(1e-4);
            if !last {
                h = hs * fac;
            }
        } else {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h = hs * fac;
        }
        if h <= 1e-15 * r.abs().max(1e-300) {
            return (traj, Termination::StepUnderflow);
        }
    }
    (traj, Termination::StepLimit)
}
