//! Modified Bessel functions of the second kind, orders 0 and 1, real argument.

use crate::error::{domain, Result};
use crate::special::EULER_GAMMA;

/// Beyond this argument e^(-x) drops below 1e-300 and the kernels are flushed to zero.
pub const UNDERFLOW_ARG: f64 = 690.775_527_898_213_7;

const SERIES_LIMIT: f64 = 2.0;

pub fn bessel_k0(x: f64) -> Result<f64> {
    check(x)?;
    if x > UNDERFLOW_ARG {
        return Ok(0.0);
    }
    if x <= SERIES_LIMIT {
        Ok(k0_series(x))
    } else {
        let (k0, _) = steed_scaled(x);
        Ok(k0 * (-x).exp())
    }
}

pub fn bessel_k1(x: f64) -> Result<f64> {
    check(x)?;
    if x > UNDERFLOW_ARG {
        return Ok(0.0);
    }
    if x <= SERIES_LIMIT {
        Ok(k1_series(x))
    } else {
        let (_, k1) = steed_scaled(x);
        Ok(k1 * (-x).exp())
    }
}

/// e^x K0(x) and e^x K1(x); finite for every x > 0.
pub fn bessel_k01_scaled(x: f64) -> Result<(f64, f64)> {
    check(x)?;
    if x <= SERIES_LIMIT {
        let e = x.exp();
        Ok((k0_series(x) * e, k1_series(x) * e))
    } else {
        Ok(steed_scaled(x))
    }
}

fn check(x: f64) -> Result<()> {
    if !(x > 0.0) {
        return domain(format!("Bessel K needs x > 0, got {x}"));
    }
    Ok(())
}

fn k0_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let lead = (0.5 * x).ln() + EULER_GAMMA;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut tail = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= y / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += term * harmonic;
        if term < 1e-18 * i0 {
            break;
        }
    }
    -lead * i0 + tail
}

fn k1_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();
    // term_k = y^k / (k! (k+1)!)
    let mut term = 1.0;
    let mut psi_sum = -2.0 * EULER_GAMMA + 1.0;
    let mut harmonic = 0.0;
    let mut i1 = 1.0;
    let mut tail = psi_sum;
    for k in 1..60 {
        let kf = k as f64;
        term *= y / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        psi_sum = -2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (kf + 1.0);
        i1 += term;
        tail += term * psi_sum;
        if term < 1e-18 * i1 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    1.0 / x + i1 * log_half - 0.25 * x * tail
}

// Steed's continued fraction (Temme's CF2 form) for order zero.
fn steed_scaled(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}
