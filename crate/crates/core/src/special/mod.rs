//! Spectral constants, Green kernels and their pairwise integrals.

mod bessel;

pub use bessel::{bessel_k0, bessel_k01_scaled, bessel_k1, UNDERFLOW_ARG};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn as_u32(self) -> u32 {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_u32() as f64
    }

    /// Surface area of the unit sphere in R^N.
    pub fn sphere_area(self) -> f64 {
        match self {
            Dim::Two => 2.0 * PI,
            Dim::Three => 4.0 * PI,
        }
    }
}

impl TryFrom<u32> for Dim {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        match n {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(Error::InvalidArgument(format!("dim must be 2 or 3, got {n}"))),
        }
    }
}

impl From<Dim> for u32 {
    fn from(d: Dim) -> u32 {
        d.as_u32()
    }
}

/// Dimension, interaction strength and nonlinearity exponent. Construction validates admissibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct InteractionParams {
    dim: Dim,
    alpha: f64,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    dim: u32,
    alpha: f64,
    p: f64,
}

impl TryFrom<RawParams> for InteractionParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        InteractionParams::new(Dim::try_from(r.dim)?, r.alpha, r.p)
    }
}

impl From<InteractionParams> for RawParams {
    fn from(p: InteractionParams) -> Self {
        RawParams { dim: p.dim.as_u32(), alpha: p.alpha, p: p.p }
    }
}

impl InteractionParams {
    pub fn new(dim: Dim, alpha: f64, p: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument("alpha must be finite".into()));
        }
        if !p.is_finite() {
            return Err(Error::InvalidArgument("p must be finite".into()));
        }
        match dim {
            Dim::Two => {
                if p <= 1.0 {
                    return Err(Error::InvalidArgument(format!("p must exceed 1 for dim 2, got {p}")));
                }
            }
            Dim::Three => {
                if alpha >= 0.0 {
                    return Err(Error::InvalidArgument("alpha must be negative for dim 3".into()));
                }
                if !(p > 1.0 && p < 2.0) {
                    return Err(Error::InvalidArgument(format!("p must lie in (1, 2) for dim 3, got {p}")));
                }
            }
        }
        let params = InteractionParams { dim, alpha, p };
        let w = params.omega_alpha();
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!("omega_alpha = {w} is not a positive finite number")));
        }
        Ok(params)
    }

    /// Interaction strength for which the bound state sits at energy -1.
    pub fn unit_bound_state(dim: Dim, p: f64) -> Result<Self> {
        let alpha = match dim {
            Dim::Two => -(EULER_GAMMA + 0.5f64.ln()) / (2.0 * PI),
            Dim::Three => -1.0 / (4.0 * PI),
        };
        Self::new(dim, alpha, p)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.dim, self.alpha, p)
    }

    /// The negative eigenvalue of the point-interaction Laplacian.
    pub fn e_alpha(&self) -> f64 {
        match self.dim {
            Dim::Two => -4.0 * (-4.0 * PI * self.alpha - 2.0 * EULER_GAMMA).exp(),
            Dim::Three => {
                let s = 4.0 * PI * self.alpha;
                -(s * s)
            }
        }
    }

    pub fn omega_alpha(&self) -> f64 {
        -self.e_alpha()
    }

    /// Default reference parameter 1 + ω_α for decompositions and norms.
    pub fn canonical_lambda(&self) -> f64 {
        1.0 + self.omega_alpha()
    }

    /// Decay exponent 2/(p-1) of zero-frequency profiles.
    pub fn zero_mass_exponent(&self) -> f64 {
        2.0 / (self.p - 1.0)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!("lambda must be positive and finite, got {lambda}"));
    }
    Ok(())
}

pub fn beta(params: &InteractionParams, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(beta_unchecked(params.dim, lambda))
}

pub(crate) fn beta_unchecked(dim: Dim, lambda: f64) -> f64 {
    match dim {
        Dim::Two => (EULER_GAMMA + (0.5 * lambda.sqrt()).ln()) / (2.0 * PI),
        Dim::Three => lambda.sqrt() / (4.0 * PI),
    }
}

pub fn e_alpha(params: &InteractionParams) -> f64 {
    params.e_alpha()
}

pub fn omega_alpha(params: &InteractionParams) -> f64 {
    params.omega_alpha()
}

pub fn green_value(params: &InteractionParams, lambda: f64, r: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(r > 0.0) {
        return domain(format!("r must be positive, got {r}"));
    }
    Ok(green_unchecked(params.dim, lambda, r))
}

pub(crate) fn green_unchecked(dim: Dim, lambda: f64, r: f64) -> f64 {
    let x = lambda.sqrt() * r;
    match dim {
        Dim::Two => bessel_k0(x).unwrap_or(0.0) / (2.0 * PI),
        Dim::Three => {
            if x > UNDERFLOW_ARG {
                0.0
            } else {
                (-x).exp() / (4.0 * PI * r)
            }
        }
    }
}

pub fn green_l2_norm_sq(params: &InteractionParams, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(green_norm_sq_unchecked(params.dim, lambda))
}

pub(crate) fn green_norm_sq_unchecked(dim: Dim, lambda: f64) -> f64 {
    match dim {
        Dim::Two => 1.0 / (4.0 * PI * lambda),
        Dim::Three => 1.0 / (8.0 * PI * lambda.sqrt()),
    }
}

pub fn green_inner(params: &InteractionParams, lambda: f64, mu: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_lambda(mu)?;
    // Canonical argument order makes the pairing symmetric bit for bit.
    let (a, b) = if lambda <= mu { (lambda, mu) } else { (mu, lambda) };
    Ok(match params.dim {
        Dim::Two => {
            if a == b {
                1.0 / (4.0 * PI * a)
            } else {
                let t = (b - a) / a;
                // ln(b/a) / (2 (b - a)) / (2π) with ln1p for nearby arguments
                t.ln_1p() / (t * a) / (4.0 * PI)
            }
        }
        Dim::Three => 1.0 / (4.0 * PI * (a.sqrt() + b.sqrt())),
    })
}

/// k(λ) = α + β(λ) + λ‖G_λ‖², from closed forms.
pub fn k_coefficient(params: &InteractionParams, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(params.alpha + beta_unchecked(params.dim, lambda) + lambda * green_norm_sq_unchecked(params.dim, lambda))
}

pub fn chi_alpha_value(params: &InteractionParams, r: f64) -> Result<f64> {
    let w = params.omega_alpha();
    Ok(green_value(params, w, r)? / green_norm_sq_unchecked(params.dim, w).sqrt())
}

/// Coefficient c with χ_α = c·G_{ω_α}.
pub fn chi_alpha_coefficient(params: &InteractionParams) -> f64 {
    1.0 / green_norm_sq_unchecked(params.dim, params.omega_alpha()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> InteractionParams {
        InteractionParams::new(Dim::Three, -1.0 / (4.0 * PI), 1.5).unwrap()
    }

    #[test]
    fn admissibility() {
        assert!(InteractionParams::new(Dim::Three, 0.1, 1.5).is_err());
        assert!(InteractionParams::new(Dim::Three, -0.1, 2.0).is_err());
        assert!(InteractionParams::new(Dim::Two, 3.0, 1.0).is_err());
        assert!(InteractionParams::new(Dim::Two, 3.0, 7.0).is_ok());
        assert!(Dim::try_from(4).is_err());
    }

    #[test]
    fn unit_bound_state_has_unit_frequency() {
        for d in [Dim::Two, Dim::Three] {
            let p = InteractionParams::unit_bound_state(d, 1.5).unwrap();
            assert!((p.omega_alpha() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn green_closed_forms() {
        let p = p3();
        let g = green_value(&p, 1.0, 1.0).unwrap();
        assert!((g - (-1.0f64).exp() / (4.0 * PI)).abs() < 1e-16);
        assert!(green_value(&p, 1.0, 0.0).is_err());
        assert!(green_value(&p, -1.0, 1.0).is_err());
        assert_eq!(green_unchecked(Dim::Three, 1.0, 800.0), 0.0);
    }

    #[test]
    fn serde_validates() {
        let ok: InteractionParams = serde_json::from_str(r#"{"dim":3,"alpha":-0.1,"p":1.5}"#).unwrap();
        assert_eq!(ok.dim(), Dim::Three);
        assert!(serde_json::from_str::<InteractionParams>(r#"{"dim":3,"alpha":0.1,"p":1.5}"#).is_err());
    }
}
