//! Monte Carlo estimates with 95% confidence intervals.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Largest distance from `mean` to either interval end.
    pub half_width_95: f64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    /// Wilson score interval for `successes` out of `trials` Bernoulli draws.
    pub fn wilson(successes: u64, trials: u64) -> Self {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
        let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
        Self { mean: p, half_width_95: (hi - p).max(p - lo), trials, ci_low: lo, ci_high: hi }
    }

    /// Normal-approximation interval from a sample sum and sum of squares.
    pub fn from_moments(sum: f64, sum_sq: f64, trials: u64) -> Self {
        assert!(trials > 0);
        let n = trials as f64;
        let mean = sum / n;
        let var = if trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { f64::INFINITY };
        let half = Z95 * (var / n).sqrt();
        Self { mean, half_width_95: half, trials, ci_low: mean - half, ci_high: mean + half }
    }

    /// Multiply mean and interval by a positive constant.
    pub fn scaled(self, k: f64) -> Self {
        Self {
            mean: self.mean * k,
            half_width_95: self.half_width_95 * k,
            trials: self.trials,
            ci_low: self.ci_low * k,
            ci_high: self.ci_high * k,
        }
    }

    /// True if the two 95% intervals share no point.
    pub fn disjoint(&self, other: &Estimate) -> bool {
        self.ci_high < other.ci_low || other.ci_high < self.ci_low
    }
}
