//! Behaviour of standing waves near the interaction point.
//!
//! Near the origin a solution with singular strength A behaves like
//! A·s(r) with s(r) = 1/(4πr) + α (N=3) or s(r) = α − ln r/(2π) (N=2). The next
//! correction is one Picard step on φ'' + (N−1)/r·φ' = g(φ):
//! φ₁(r) = ∫₀^r t^(N−1) g(t) K(t,r) dt with K = 1/t − 1/r (N=3) or ln(r/t) (N=2).

use crate::field::{DecomposedField, C64};
use crate::quadrature::GaussRule;
use crate::special::{beta_unchecked, green_unchecked, Dim, InteractionParams};
use std::f64::consts::PI;

/// Leading profile s(r) and its derivative for unit strength.
pub fn singular_profile(dim: Dim, alpha: f64, r: f64) -> (f64, f64) {
    match dim {
        Dim::Three => (1.0 / (4.0 * PI * r) + alpha, -1.0 / (4.0 * PI * r * r)),
        Dim::Two => (alpha - r.ln() / (2.0 * PI), -1.0 / (2.0 * PI * r)),
    }
}

/// Linear (ω-proportional) and nonlinear parts of the first Picard correction for unit strength.
/// For strength A the correction is A·ω·lin + A|A|^(p−1)·nl.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardTerms {
    pub lin: f64,
    pub lin_slope: f64,
    pub nl: f64,
    pub nl_slope: f64,
}

pub fn picard_terms(params: &InteractionParams, r: f64) -> PicardTerms {
    let dim = params.dim();
    let alpha = params.alpha();
    let p = params.p();
    let n = dim.as_f64();
    let rule = GaussRule::new(12);
    let mut out = PicardTerms { lin: 0.0, lin_slope: 0.0, nl: 0.0, nl_slope: 0.0 };
    // substitute t = r e^(−y); dt = t dy
    let mut a = 0.0;
    let mut b = 0.5;
    while a < 512.0 {
        for (y, w) in rule.mapped(a, b) {
            let t = r * (-y).exp();
            let (s, _) = singular_profile(dim, alpha, t);
            let tn = t.powf(n);
            // t^N |s|^(p−1) s, arranged to avoid 0·∞ for tiny t
            let tn_nl = match dim {
                Dim::Three => {
                    let ts = t * s;
                    t.powf(n - p) * ts.abs().powf(p) * ts.signum()
                }
                Dim::Two => tn * s.abs().powf(p - 1.0) * s,
            };
            let kern = match dim {
                Dim::Three => 1.0 / t - 1.0 / r,
                Dim::Two => y,
            };
            out.lin += w * tn * s * kern;
            out.nl += w * tn_nl * kern;
            out.lin_slope += w * tn * s;
            out.nl_slope += w * tn_nl;
        }
        a = b;
        b *= 2.0;
    }
    if dim == Dim::Three {
        // analytic remainder of the leading power beyond y = 512
        let q = 2.0 - p;
        let lead = (4.0 * PI).powf(-p) * r.powf(q) * (-q * 512.0).exp();
        out.nl += lead / q;
        out.nl_slope += lead / q;
    }
    let scale = r.powf(1.0 - n);
    out.lin_slope *= scale;
    out.nl_slope *= scale;
    out
}

/// φ(r), φ'(r) for a real strength A from the origin expansion plus one Picard correction.
pub fn start_values(params: &InteractionParams, omega: f64, amplitude: f64, r: f64) -> (f64, f64) {
    let (s, ds) = singular_profile(params.dim(), params.alpha(), r);
    let (w, dw) = start_deviation(params, omega, amplitude, r);
    (amplitude * s + w, amplitude * ds + dw)
}

/// s(r) − G_λ(r), evaluated without cancellation.
pub fn profile_minus_green(dim: Dim, alpha: f64, lambda: f64, r: f64) -> f64 {
    let k = lambda.sqrt();
    match dim {
        Dim::Three => alpha - (-k * r).exp_m1() / (4.0 * PI * r),
        // logarithms of size ~ |ln r| cancel only mildly
        Dim::Two => alpha - r.ln() / (2.0 * PI) - green_unchecked(dim, lambda, r),
    }
}

/// Deviation φ − A·s(r) and its derivative from the Picard correction.
pub fn start_deviation(params: &InteractionParams, omega: f64, amplitude: f64, r: f64) -> (f64, f64) {
    let t = picard_terms(params, r);
    let nl = amplitude * amplitude.abs().powf(params.p() - 1.0);
    (amplitude * omega * t.lin + nl * t.nl, amplitude * omega * t.lin_slope + nl * t.nl_slope)
}

/// Regular part at the origin extrapolated from the first three nodes, after removing the
/// known singular corrections; returns (f(0), |f(0) − (α+β(λ))c| / |c|).
pub fn boundary_value(params: &InteractionParams, omega: f64, field: &DecomposedField) -> (C64, f64) {
    let grid = field.grid();
    let dim = params.dim();
    let lambda = field.lambda();
    let c = field.singular_coeff();
    let f = field.regular();
    let nl_scale = c * c.norm().powf(params.p() - 1.0);
    let mut h = [C64::new(0.0, 0.0); 3];
    let mut x = [0.0; 3];
    for j in 0..3 {
        let r = grid.nodes()[j];
        let t = picard_terms(params, r);
        x[j] = r;
        h[j] = f[j] - c * (omega * t.lin) - nl_scale * t.nl;
    }
    // Lagrange extrapolation to r = 0
    let mut f0 = C64::new(0.0, 0.0);
    for j in 0..3 {
        let mut l = 1.0;
        for k in 0..3 {
            if k != j {
                l *= x[k] / (x[k] - x[j]);
            }
        }
        f0 += h[j] * l;
    }
    let want = c * (params.alpha() + beta_unchecked(dim, lambda));
    let defect = if c.norm() > 0.0 { (f0 - want).norm() / c.norm() } else { f0.norm() };
    (f0, defect)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dimensional_series() {
        // closed-form first correction for N = 3
        let params = InteractionParams::new(Dim::Three, -0.1, 1.5).unwrap();
        let (a, p, al) = (1.0, 1.5, -0.1);
        for &r in &[1e-6, 1e-4, 1e-2] {
            let t = picard_terms(&params, r);
            let lin = r / (8.0 * PI) + al * r * r / 6.0;
            assert!((t.lin - lin).abs() < 1e-12 * lin.abs());
            // nonlinear part agrees with the two leading powers
            let k1 = (a / (4.0 * PI)).powf(p) / ((2.0 - p) * (3.0 - p));
            let k2 = (a / (4.0 * PI)).powf(p) * p * 4.0 * PI * al / ((3.0 - p) * (4.0 - p));
            let two = k1 * r.powf(2.0 - p) + k2 * r.powf(3.0 - p);
            assert!((t.nl - two).abs() < 1e-2 * r.powf(4.0 - p) + 1e-13 * two.abs(), "r={r} {} {}", t.nl, two);
        }
    }
}
