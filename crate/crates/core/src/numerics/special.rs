//! The ρ-family of coverage integrals.
//!
//! With k = α/2, every Rayleigh-faded PPP interference term reduces to
//! ∫ du / (1 + u^k) over some tail [b, ∞).

use std::f64::consts::PI;

use super::quadrature::{integrate_semi_infinite, QuadratureConfig};
use crate::error::NumericsError;

/// (2π/α) csc(2π/α) = ∫₀^∞ du/(1+u^(α/2)).
pub fn rho_const(alpha: f64) -> f64 {
    let x = 2.0 * PI / alpha;
    x / x.sin()
}

/// ∫_b^∞ du / (1 + u^(α/2)).
pub fn rho_tail(b: f64, alpha: f64, cfg: &QuadratureConfig) -> Result<f64, NumericsError> {
    let k = 0.5 * alpha;
    if b <= 0.0 {
        return Ok(rho_const(alpha));
    }
    if b > 1.0 {
        // u = b v puts the decay scale at v ~ 1.
        return integrate_semi_infinite(|v| b / (1.0 + (b * v).powf(k)), 1.0, cfg);
    }
    integrate_semi_infinite(|u| 1.0 / (1.0 + u.powf(k)), b, cfg)
}

/// ρ₀(x) = x^(2/α) ρ.
pub fn rho_full(x: f64, alpha: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    x.powf(2.0 / alpha) * rho_const(alpha)
}

/// x^(2/α) ∫_{x^(-2/α)}^∞ du/(1+u^(α/2)): the coverage integral with the
/// nearest interferer excluded.
pub fn rho_excl(x: f64, alpha: f64, cfg: &QuadratureConfig) -> Result<f64, NumericsError> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let scale = x.powf(2.0 / alpha);
    Ok(scale * rho_tail(1.0 / scale, alpha, cfg)?)
}

/// acos with its argument clamped to [-1, 1].
pub fn safe_acos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}
