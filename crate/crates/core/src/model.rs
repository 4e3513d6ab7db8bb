//! Domain types and boundary-unit conversions.
//!
//! Everything past this module works in SI units: meters, watts, points per
//! square meter and linear power ratios. dBm, dB and per-km² values exist only
//! at the configuration boundary.

use serde::{Deserialize, Serialize};

use crate::error::ParamError;

/// Fixed received-signal power used when a measured interference level is
/// displayed as an SIR at the transmitter.
pub const DEFAULT_SIGNAL_DBM: f64 = 10.0;

pub fn dbm_to_watts(x: f64) -> f64 {
    10f64.powf((x - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn per_km2_to_per_m2(x: f64) -> f64 {
    x * 1e-6
}

pub fn per_m2_to_per_km2(x: f64) -> f64 {
    x * 1e6
}

pub fn db_to_linear(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Physical parameters of the two-tier network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Primary TX density [1/m²].
    pub lambda1: f64,
    /// Secondary TX density [1/m²].
    pub lambda2: f64,
    /// Primary transmit power [W].
    pub p1: f64,
    /// Secondary transmit power [W].
    pub p2: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Secondary TX-RX pair distance [m].
    pub d: f64,
    /// Primary outage budget.
    pub tau: f64,
    /// Primary decoding SIR threshold (linear).
    pub gamma: f64,
}

impl NetworkParams {
    /// Returns `self` unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self, ParamError> {
        let fields = [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("p1", self.p1),
            ("p2", self.p2),
            ("alpha", self.alpha),
            ("d", self.d),
            ("tau", self.tau),
            ("gamma", self.gamma),
        ];
        for (field, value) in fields {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { field, value });
            }
        }
        if self.alpha <= 2.0 {
            return Err(ParamError::Alpha(self.alpha));
        }
        if self.lambda1 <= 0.0 {
            return Err(ParamError::Lambda1(self.lambda1));
        }
        if self.lambda2 < 0.0 {
            return Err(ParamError::Lambda2(self.lambda2));
        }
        if self.p1 <= 0.0 {
            return Err(ParamError::P1(self.p1));
        }
        if self.p2 <= 0.0 {
            return Err(ParamError::P2(self.p2));
        }
        if self.d < 0.0 {
            return Err(ParamError::Distance(self.d));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(ParamError::Tau(self.tau));
        }
        if self.gamma <= 0.0 {
            return Err(ParamError::Gamma(self.gamma));
        }
        Ok(self)
    }

    pub fn with_lambda2(self, lambda2: f64) -> Self {
        Self { lambda2, ..self }
    }

    pub fn with_d(self, d: f64) -> Self {
        Self { d, ..self }
    }

    pub fn with_p2(self, p2: f64) -> Self {
        Self { p2, ..self }
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    /// Secondary received signal power at the paired RX, ignoring fading.
    pub fn secondary_signal(&self) -> f64 {
        self.p2 * self.d.powf(-self.alpha)
    }
}

/// The two SIR thresholds of the access policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    /// Access threshold (linear).
    pub theta: f64,
    /// Decoding target (linear).
    pub beta: f64,
}

impl Policy {
    pub fn new(theta: f64, beta: f64) -> Result<Self, ParamError> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(ParamError::Theta(theta));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(ParamError::Beta(beta));
        }
        Ok(Self { theta, beta })
    }

    pub fn from_db(theta_db: f64, beta_db: f64) -> Result<Self, ParamError> {
        Self::new(db_to_linear(theta_db), db_to_linear(beta_db))
    }
}

/// Parameter sets of the reference scenarios.
///
/// Protection defaults (gamma = -10 dB, tau = 0.1) are shared by all presets:
/// at gamma = 0 dB a purely primary network with alpha = 4 already has outage
/// 1 - 1/(1 + pi/4) ~ 0.44, so no budget below that is attainable.
pub mod presets {
    use super::*;

    pub const DEFAULT_TAU: f64 = 0.1;
    pub const DEFAULT_GAMMA_DB: f64 = -10.0;

    fn base(lambda1_km2: f64, lambda2_km2: f64, p1_dbm: f64, p2_dbm: f64, alpha: f64, d: f64) -> NetworkParams {
        NetworkParams {
            lambda1: per_km2_to_per_m2(lambda1_km2),
            lambda2: per_km2_to_per_m2(lambda2_km2),
            p1: dbm_to_watts(p1_dbm),
            p2: dbm_to_watts(p2_dbm),
            alpha,
            d,
            tau: DEFAULT_TAU,
            gamma: db_to_linear(DEFAULT_GAMMA_DB),
        }
    }

    /// Indoor testbed geometry: 7000 TX/km², 11.3/5 dBm, alpha = 3.
    /// The companion empty-ball radius is [`FIG7_R_I`].
    pub fn fig7(d: f64) -> NetworkParams {
        base(7e3, 0.0, 11.3, 5.0, 3.0, d)
    }

    pub const FIG7_R_I: f64 = 3.6;
    pub const FIG7_DISTANCES: [f64; 2] = [1.2, 2.0];

    /// Sparse macro primaries used for the SIR-map illustration.
    pub fn fig5() -> NetworkParams {
        base(10.0, 200.0, 43.0, 23.0, 4.0, 2.0)
    }

    /// 500/200 TX/km², 43/23 dBm, alpha = 4, d = 2 m.
    pub fn fig8() -> NetworkParams {
        base(500.0, 200.0, 43.0, 23.0, 4.0, 2.0)
    }

    pub fn fig9(lambda2_km2: f64) -> NetworkParams {
        fig8().with_lambda2(per_km2_to_per_m2(lambda2_km2))
    }

    pub fn fig10() -> NetworkParams {
        fig8()
    }

    /// Strong-primary regime (P1 λ1 ≫ P2 λ2) for the asymptotic target solver.
    pub fn strong_primary() -> NetworkParams {
        base(500.0, 1.0, 43.0, 0.0, 4.0, 2.0)
    }
}
