//! Algebraic solutions of the zero-frequency radial equation.

use crate::error::{domain, Result};
use crate::special::Dim;

/// l r^(−k) with k = 2/(p−1) solves u'' + (N−1)/r u' = u^p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Veron {
    pub dim: Dim,
    pub p: f64,
    pub k: f64,
    pub l: f64,
}

impl Veron {
    pub fn new(dim: Dim, p: f64) -> Result<Self> {
        let n = dim.as_f64();
        let upper = if dim == Dim::Two { f64::INFINITY } else { n / (n - 2.0) };
        if !(p > 1.0 && p < upper) {
            return domain(format!("Véron solution needs 1 < p < N/(N−2), got p = {p}"));
        }
        let k = 2.0 / (p - 1.0);
        let l = (k * (k + 2.0 - n)).powf(1.0 / (p - 1.0));
        Ok(Veron { dim, p, k, l })
    }

    pub fn value(&self, r: f64) -> f64 {
        self.l * r.powf(-self.k)
    }

    pub fn slope(&self, r: f64) -> f64 {
        -self.k * self.l * r.powf(-self.k - 1.0)
    }

    /// Exponents m of the linearized modes r^m about the algebraic solution, (m−, m+).
    pub fn mode_exponents(&self) -> (f64, f64) {
        let n = self.dim.as_f64();
        let b = n - 2.0;
        let c = self.p * self.l.powf(self.p - 1.0);
        let d = (b * b + 4.0 * c).sqrt();
        ((-b - d) / 2.0, (-b + d) / 2.0)
    }
}

/// max |u'' + (N−1)/r u' − u^p| / u^p of the algebraic solution over the samples.
pub fn veron_exact_residual(dim: Dim, p: f64, r_samples: &[f64]) -> Result<f64> {
    let v = Veron::new(dim, p)?;
    let n = dim.as_f64();
    let mut worst: f64 = 0.0;
    for &r in r_samples {
        if !(r > 0.0) {
            return domain("samples must be positive");
        }
        let u = v.value(r);
        let d1 = v.slope(r);
        let d2 = v.k * (v.k + 1.0) * v.l * r.powf(-v.k - 2.0);
        let up = u.powf(p);
        worst = worst.max(((d2 + (n - 1.0) / r * d1) - up).abs() / up);
    }
    Ok(worst)
}
