//! Access probability of a secondary link given the interference its TX
//! measured, under the empty-ball model.
//!
//! Throughout, `s = P1 θ d^α / P2` and `L = s^(1/α)` is the radius at which a
//! primary interferer alone would sit exactly at the threshold. Radial
//! integrals run in `u = y / L`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SapError};
use crate::model::NetworkParams;
use crate::numerics::{find_root, integrate, rho_const, rho_tail, safe_acos, QuadratureConfig, RootConfig};

/// Campbell mean of the primary interference seen from the centre of an empty
/// ball of radius `r` with one primary on its boundary.
pub fn mean_interference(r: f64, params: &NetworkParams) -> f64 {
    let a = params.alpha;
    params.p1 * r.powf(-a) + 2.0 * PI * params.lambda1 * params.p1 * r.powf(2.0 - a) / (a - 2.0)
}

/// Radius of the empty ball inferred from a measured interference level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmptyBall {
    pub radius: f64,
    pub measured_interference: f64,
}

/// Inverts [`mean_interference`]. The map is strictly decreasing in `r`, so
/// the root is unique; it is bracketed from `(P1/I)^(1/α)` upward and solved
/// in `ln r`.
pub fn empty_ball_radius(i: f64, params: &NetworkParams) -> Result<EmptyBall> {
    if !(i > 0.0) || !i.is_finite() {
        return Err(SapError::NonPositiveInterference(i));
    }
    let ln_i = i.ln();
    let h = |x: f64| mean_interference(x.exp(), params).ln() - ln_i;
    let lo = (params.p1 / i).ln() / params.alpha;
    if params.lambda1 == 0.0 {
        return Ok(EmptyBall { radius: lo.exp(), measured_interference: i });
    }
    let mut hi = lo + std::f64::consts::LN_2;
    while h(hi) > 0.0 {
        hi += std::f64::consts::LN_2;
    }
    let cfg = RootConfig { x_tol: 1e-14, max_iters: 200 };
    let x = find_root(h, lo, hi, &cfg)?;
    Ok(EmptyBall { radius: x.exp(), measured_interference: i })
}

/// Closed-form empty-ball radius for α = 4.
pub fn empty_ball_radius_alpha4(i: f64, lambda1: f64, p1: f64) -> f64 {
    let a = PI * lambda1 * p1;
    ((a + (a * a + 4.0 * p1 * i).sqrt()) / (2.0 * i)).sqrt()
}

/// Density per unit ring radius of primaries at distance `y` from the RX,
/// given no primaries within `r_i` of the TX (RX at distance `d`).
pub fn ring_intensity(y: f64, r_i: f64, d: f64, lambda1: f64) -> f64 {
    if y > r_i + d {
        2.0 * PI * lambda1 * y
    } else if y <= (r_i - d).max(0.0) {
        0.0
    } else if y <= d - r_i {
        2.0 * PI * lambda1 * y
    } else {
        2.0 * safe_acos((r_i * r_i - d * d - y * y) / (2.0 * d * y)) * lambda1 * y
    }
}

/// Which expression serves as the conditional access probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum AccessModel {
    #[default]
    Exact,
    LowerBound,
}

impl AccessModel {
    pub fn eval(self, r_i: f64, theta: f64, params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
        match self {
            AccessModel::Exact => access_prob_exact(r_i, theta, params, cfg),
            AccessModel::LowerBound => access_prob_lb(r_i, theta, params, cfg),
        }
    }
}

/// `s = P1 θ d^α / P2`.
fn threshold_scale(theta: f64, params: &NetworkParams) -> f64 {
    params.p1 * theta * params.d.powf(params.alpha) / params.p2
}

fn pow_alpha(x: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        let x2 = x * x;
        x2 * x2
    } else if alpha == 3.0 {
        x * x * x
    } else {
        x.powf(alpha)
    }
}

/// E over the nearest primary's angle, uniform on the empty-ball boundary.
pub fn angular_factor(r_i: f64, theta: f64, params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
    let s = threshold_scale(theta, params);
    if s == 0.0 {
        return Ok(1.0);
    }
    let (d, a) = (params.d, params.alpha);
    let half_a = 0.5 * a;
    let f = |t: f64| {
        let x2 = r_i * r_i - 2.0 * d * r_i * t.cos() + d * d;
        let xa = if a == 4.0 { x2 * x2 } else { x2.max(0.0).powf(half_a) };
        xa / (xa + s)
    };
    Ok(integrate(f, 0.0, PI, cfg)? / PI)
}

/// ∫ u / (1 + u^α) du over [lo, hi].
fn ring_integral(lo: f64, hi: f64, alpha: f64, cfg: &QuadratureConfig) -> Result<f64> {
    // v = u² turns this into ½∫ dv / (1 + v^(α/2)).
    let k = 0.5 * alpha;
    let v = integrate(|v: f64| 1.0 / (1.0 + v.powf(k)), lo * lo, hi * hi, cfg)?;
    Ok(0.5 * v)
}

/// The Laplace exponent of the primaries outside the empty ball, at the RX.
pub fn exact_exponent(r_i: f64, theta: f64, params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
    let s = threshold_scale(theta, params);
    if s == 0.0 {
        return Ok(0.0);
    }
    let (d, a) = (params.d, params.alpha);
    let l = s.powf(1.0 / a);
    let outer = (r_i + d) / l;
    let gap = (r_i - d).abs() / l;

    let tail = PI * rho_tail(outer * outer, a, cfg)?;
    let arc = |u: f64| {
        let y = l * u;
        let c = (r_i * r_i - d * d - y * y) / (2.0 * d * y);
        2.0 * safe_acos(c) * u / (1.0 + pow_alpha(u, a))
    };
    let mid = integrate(arc, gap, outer, cfg)?;
    let inner = if d > r_i { 2.0 * PI * ring_integral(0.0, gap, a, cfg)? } else { 0.0 };
    Ok(params.lambda1 * l * l * (tail + mid + inner))
}

/// Conditional access probability under the empty-ball assumption.
///
/// `d = 0` is short-circuited to 1: with the RX on top of its TX the signal
/// term is unbounded and every finite threshold is met.
pub fn access_prob_exact(r_i: f64, theta: f64, params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
    if theta == 0.0 || params.d == 0.0 {
        return Ok(1.0);
    }
    let a = angular_factor(r_i, theta, params, cfg)?;
    let e = exact_exponent(r_i, theta, params, cfg)?;
    Ok((a * (-e).exp()).clamp(0.0, 1.0))
}

/// Exponent of the closed-form lower bound.
pub fn lb_exponent(r_i: f64, theta: f64, params: &NetworkParams) -> f64 {
    let s = threshold_scale(theta, params);
    if s == 0.0 {
        return 0.0;
    }
    let (d, a) = (params.d, params.alpha);
    let rho = rho_const(a);
    let l = s.powf(1.0 / a);
    if d > r_i {
        return PI * params.lambda1 * l * l * rho;
    }
    // ρ((R-d)^α + L^α)^(2/α) - (R-d)², factored to avoid overflow.
    let g = r_i - d;
    let (big, small) = if g >= l { (g, l) } else { (l, g) };
    let ratio = if big > 0.0 { small / big } else { 0.0 };
    let norm = (1.0 + pow_alpha(ratio, a)).powf(2.0 / a);
    PI * params.lambda1 * (rho * big * big * norm - g * g)
}

/// Closed-form lower bound on [`access_prob_exact`]. Shares its angular factor.
pub fn access_prob_lb(r_i: f64, theta: f64, params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
    if theta == 0.0 || params.d == 0.0 {
        return Ok(1.0);
    }
    let a = angular_factor(r_i, theta, params, cfg)?;
    Ok((a * (-lb_exponent(r_i, theta, params)).exp()).clamp(0.0, 1.0))
}

/// The intermediate bound obtained by shrinking the empty ball to one of
/// radius `(R_I - d)+` centred on the RX, before the closed-form relaxation.
pub fn access_prob_modified_ball(r_i: f64, theta: f64, params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
    if theta == 0.0 || params.d == 0.0 {
        return Ok(1.0);
    }
    let s = threshold_scale(theta, params);
    let l = s.powf(1.0 / params.alpha);
    let b = (r_i - params.d).max(0.0) / l;
    let e = PI * params.lambda1 * l * l * rho_tail(b * b, params.alpha, cfg)?;
    let a = angular_factor(r_i, theta, params, cfg)?;
    Ok((a * (-e).exp()).clamp(0.0, 1.0))
}

/// How to read the small-interference asymptote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SmallIForm {
    /// Tail limit `(P2 R² / (P1 θ d^α))^(2/α)` and nearest term `θ (d/R)²`.
    #[default]
    AsPrinted,
    /// Tail limit `(P2 R^α / (P1 θ d^α))^(2/α)` and nearest term `θ (d/R)^α`,
    /// the forms that are dimensionless for every α.
    DimensionallyConsistent,
}

/// Access probability for `R_I ≫ d`, i.e. coverage evaluated at the TX.
pub fn access_prob_small_i(
    r_i: f64,
    theta: f64,
    params: &NetworkParams,
    form: SmallIForm,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if theta == 0.0 || params.d == 0.0 {
        return Ok(1.0);
    }
    let (p1, p2, a, d) = (params.p1, params.p2, params.alpha, params.d);
    let s = threshold_scale(theta, params);
    let (lower, near) = match form {
        SmallIForm::AsPrinted => ((p2 * r_i * r_i / (p1 * theta * d.powf(a))).powf(2.0 / a), (d / r_i).powi(2)),
        SmallIForm::DimensionallyConsistent => ((r_i * r_i) / s.powf(2.0 / a), (d / r_i).powf(a)),
    };
    let e = PI * params.lambda1 * s.powf(2.0 / a) * rho_tail(lower, a, cfg)?;
    Ok(p2 * (-e).exp() / (p2 + p1 * theta * near))
}

/// Access probability for `R_I ≪ d`; independent of the measurement.
pub fn access_prob_large_i(theta: f64, params: &NetworkParams) -> f64 {
    if theta == 0.0 {
        return 1.0;
    }
    let s = threshold_scale(theta, params);
    let e = PI * params.lambda1 * s.powf(2.0 / params.alpha) * rho_const(params.alpha);
    params.p2 * (-e).exp() / (params.p2 + params.p1 * theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;
    use proptest::prelude::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn unit(lambda1: f64, alpha: f64) -> NetworkParams {
        NetworkParams { lambda1, p1: 1.0, alpha, ..presets::fig8() }
    }

    #[test]
    fn mean_interference_pure_path_loss() {
        let p = NetworkParams { lambda1: 0.0, ..unit(1.0, 4.0) };
        assert_eq!(mean_interference(1.0, &p), 1.0);
        assert_eq!(mean_interference(2.0, &p), 1.0 / 16.0);
    }

    #[test]
    fn radius_without_other_primaries() {
        let p = NetworkParams { lambda1: 0.0, ..unit(1.0, 4.0) };
        assert_eq!(empty_ball_radius(1.0, &p).unwrap().radius, 1.0);
        let r = empty_ball_radius(1e-3, &p).unwrap().radius;
        assert!((r - 1e3f64.powf(0.25)).abs() < 1e-12 * r);
    }

    #[test]
    fn radius_rejects_nonpositive() {
        let p = presets::fig8();
        assert!(matches!(empty_ball_radius(0.0, &p), Err(SapError::NonPositiveInterference(_))));
        assert!(empty_ball_radius(-1.0, &p).is_err());
    }

    #[test]
    fn radius_matches_alpha4_closed_form() {
        let p = presets::fig8();
        for r in [0.3, 2.0, 10.0, 50.0, 300.0] {
            let i = mean_interference(r, &p);
            let root = empty_ball_radius(i, &p).unwrap().radius;
            let closed = empty_ball_radius_alpha4(i, p.lambda1, p.p1);
            assert!((root - closed).abs() < 1e-9 * closed);
            assert!((root - r).abs() < 1e-9 * r);
        }
    }

    #[test]
    fn radius_round_trip_fig7() {
        let p = presets::fig7(2.0);
        for r in [0.5, 3.6, 10.0, 100.0] {
            let ball = empty_ball_radius(mean_interference(r, &p), &p).unwrap();
            assert!((ball.radius - r).abs() < 1e-9 * r, "r = {r}");
        }
    }

    #[test]
    fn ring_intensity_cases() {
        let (r, d, l1) = (5.0, 2.0, 1e-3);
        assert_eq!(ring_intensity(10.0, r, d, l1), 2.0 * PI * l1 * 10.0);
        assert_eq!(ring_intensity((r - d) / 2.0, r, d, l1), 0.0);
        let y = r + d;
        assert!((ring_intensity(y, r, d, l1) - 2.0 * PI * l1 * y).abs() < 1e-12);
        // ball smaller than the pair distance: small rings are entirely free
        assert_eq!(ring_intensity(0.5, 1.0, 2.0, l1), 2.0 * PI * l1 * 0.5);
        // partial arc lies strictly between 0 and the full ring
        let v = ring_intensity(4.0, r, d, l1);
        assert!(v > 0.0 && v < 2.0 * PI * l1 * 4.0);
    }

    #[test]
    fn exponent_matches_direct_ring_integral() {
        // E = ∫ ring_intensity(y) s y^-α / (1 + s y^-α) dy, integrated in y directly.
        let p = presets::fig7(2.0);
        for (r_i, theta) in [(3.6, 1.0), (1.0, 0.3), (6.0, 10.0)] {
            let s = threshold_scale(theta, &p);
            let f = |y: f64| {
                let t = s * y.powf(-p.alpha);
                ring_intensity(y, r_i, p.d, p.lambda1) * t / (1.0 + t)
            };
            let near = integrate(f, 0.0, r_i + p.d, &cfg()).unwrap();
            let far = crate::numerics::integrate_semi_infinite(f, r_i + p.d, &cfg()).unwrap();
            let e = exact_exponent(r_i, theta, &p, &cfg()).unwrap();
            assert!((e - (near + far)).abs() < 1e-7 * e.max(1e-6), "{r_i} {theta}");
        }
    }

    #[test]
    fn zero_threshold_gives_one() {
        let p = presets::fig7(2.0);
        assert_eq!(access_prob_exact(3.6, 0.0, &p, &cfg()).unwrap(), 1.0);
        assert_eq!(access_prob_lb(3.6, 0.0, &p, &cfg()).unwrap(), 1.0);
        assert_eq!(access_prob_small_i(3.6, 0.0, &p, SmallIForm::AsPrinted, &cfg()).unwrap(), 1.0);
        assert_eq!(access_prob_large_i(0.0, &p), 1.0);
    }

    #[test]
    fn zero_distance_bound_is_tight() {
        let p = presets::fig7(0.0);
        let e = access_prob_exact(3.6, 1.0, &p, &cfg()).unwrap();
        let l = access_prob_lb(3.6, 1.0, &p, &cfg()).unwrap();
        assert_eq!(e, l);
    }

    #[test]
    fn lb_continuous_at_ball_edge() {
        let p = presets::fig8();
        let below = lb_exponent(p.d * (1.0 - 1e-9), 1.0, &p);
        let above = lb_exponent(p.d * (1.0 + 1e-9), 1.0, &p);
        let at = lb_exponent(p.d, 1.0, &p);
        assert!((below - at).abs() < 1e-6 * at);
        assert!((above - at).abs() < 1e-6 * at);
    }

    #[test]
    fn large_i_without_primaries() {
        let p = NetworkParams { lambda1: 1e-300, ..presets::fig8() };
        let v = access_prob_large_i(2.0, &p);
        assert!((v - p.p2 / (p.p2 + 2.0 * p.p1)).abs() < 1e-12);
    }

    #[test]
    fn asymptotes() {
        let p = presets::fig8();
        let exact = access_prob_exact(p.d / 100.0, 1.0, &p, &cfg()).unwrap();
        assert!((exact - access_prob_large_i(1.0, &p)).abs() <= 0.01);
        let r = 100.0 * p.d;
        let exact = access_prob_exact(r, 1.0, &p, &cfg()).unwrap();
        assert!((1.0 - exact).abs() <= 0.01);
        let consistent = access_prob_small_i(r, 1.0, &p, SmallIForm::DimensionallyConsistent, &cfg()).unwrap();
        assert!((exact - consistent).abs() <= 0.01);
        // as printed the nearest term is off by (R/d)^(α-2); it still tends to 1
        let far = access_prob_small_i(1e6 * p.d, 1.0, &p, SmallIForm::AsPrinted, &cfg()).unwrap();
        assert!(far > 0.9999 && far <= 1.0);
    }

    #[test]
    fn modified_ball_sits_between() {
        let p = presets::fig8();
        for r_i in [0.5, 2.0, 3.0, 10.0] {
            for theta in [0.1, 1.0, 10.0] {
                let e = access_prob_exact(r_i, theta, &p, &cfg()).unwrap();
                let m = access_prob_modified_ball(r_i, theta, &p, &cfg()).unwrap();
                let l = access_prob_lb(r_i, theta, &p, &cfg()).unwrap();
                assert!(l <= m + 1e-9 && m <= e + 1e-9, "{r_i} {theta}: {l} {m} {e}");
            }
        }
    }

    #[test]
    fn radius_monotone_in_network_parameters() {
        let base = presets::fig7(2.0);
        let i = 1e-9;
        let r = |p: &NetworkParams| empty_ball_radius(i, p).unwrap().radius;
        let mut prev = 0.0;
        for l1 in [1e-4, 1e-3, 7e-3, 3e-2] {
            let v = r(&NetworkParams { lambda1: l1, ..base });
            assert!(v >= prev);
            prev = v;
        }
        prev = 0.0;
        for p1 in [1e-3, 1e-2, 1e-1, 1.0] {
            let v = r(&NetworkParams { p1, ..base });
            assert!(v >= prev);
            prev = v;
        }
        prev = f64::INFINITY;
        for k in 0..=14 {
            let alpha = 2.5 + 0.25 * k as f64;
            let v = r(&NetworkParams { alpha, ..base });
            assert!(v <= prev, "alpha {alpha}");
            prev = v;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn probabilities_in_unit_interval_and_ordered(
            r_i in 0.05f64..50.0, theta_db in -20.0f64..30.0, d in 0.1f64..5.0
        ) {
            let p = presets::fig8().with_d(d);
            let theta = 10f64.powf(theta_db / 10.0);
            let e = access_prob_exact(r_i, theta, &p, &cfg()).unwrap();
            let l = access_prob_lb(r_i, theta, &p, &cfg()).unwrap();
            prop_assert!((0.0..=1.0).contains(&e));
            prop_assert!((0.0..=1.0).contains(&l));
            prop_assert!(l <= e + 1e-6);
        }

        #[test]
        fn nonincreasing_in_theta(r_i in 0.1f64..20.0, theta_db in -20.0f64..25.0) {
            let p = presets::fig7(2.0);
            let t0 = 10f64.powf(theta_db / 10.0);
            let t1 = t0 * 1.5;
            let e0 = access_prob_exact(r_i, t0, &p, &cfg()).unwrap();
            let e1 = access_prob_exact(r_i, t1, &p, &cfg()).unwrap();
            prop_assert!(e1 <= e0 + 1e-9);
            let l0 = access_prob_lb(r_i, t0, &p, &cfg()).unwrap();
            let l1 = access_prob_lb(r_i, t1, &p, &cfg()).unwrap();
            prop_assert!(l1 <= l0 + 1e-9);
        }

        #[test]
        fn nonincreasing_in_measurement(log_i in -14.0f64..-4.0) {
            let p = presets::fig7(2.0);
            let i0 = 10f64.powf(log_i);
            let r0 = empty_ball_radius(i0, &p).unwrap().radius;
            let r1 = empty_ball_radius(i0 * 2.0, &p).unwrap().radius;
            prop_assert!(r1 < r0);
            let e0 = access_prob_exact(r0, 1.0, &p, &cfg()).unwrap();
            let e1 = access_prob_exact(r1, 1.0, &p, &cfg()).unwrap();
            prop_assert!(e1 <= e0 + 1e-9);
        }
    }
}
