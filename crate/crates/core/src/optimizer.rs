//! Network-level averages and the joint (θ, β) search for maximum secondary
//! area spectral efficiency under primary protection.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{access_prob_lb, AccessModel};
use crate::error::{Result, SapError};
use crate::model::{db_to_linear, linear_to_db, NetworkParams};
use crate::numerics::quadrature::{gauss_legendre, integrate};
use crate::numerics::{
    find_root, log_space, rho_const, rho_excl, rho_full, scan_bracket, QuadratureConfig, RootConfig,
};

/// Largest access threshold considered when searching for θ̄.
pub const THETA_MAX: f64 = 1e6;

/// How the density of active secondaries enters the secondary-interference
/// exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ThinningVariant {
    /// `λ2 φ̂2^(2/α)`.
    AsPrinted,
    /// `λ2 φ̂2`, as for an independently thinned PPP.
    #[default]
    Linear,
}

impl ThinningVariant {
    pub fn exponent(self, alpha: f64) -> f64 {
        match self {
            ThinningVariant::AsPrinted => 2.0 / alpha,
            ThinningVariant::Linear => 1.0,
        }
    }
}

/// Which closed form of the primary outage to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OutageReading {
    /// ρ-terms evaluated at θ, secondary term weighted by `P1^(2/α)`.
    Printed,
    /// ρ-terms evaluated at γ, secondary term weighted by `(P2/P1)^(2/α)`.
    #[default]
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct AnalysisOptions {
    pub access: AccessModel,
    pub thinning: ThinningVariant,
    pub outage: OutageReading,
    pub quad: QuadratureConfig,
}

/// Radius of the nearest primary for a given CDF level `w`.
fn radius_at(w: f64, lambda1: f64) -> f64 {
    (-(-w).ln_1p() / (PI * lambda1)).sqrt()
}

/// ∫ g(r) f_r(r) dr with f_r the nearest-primary distance density, computed
/// on the CDF scale w ∈ [0, 1] with a break at r = d.
fn radial_average<G: Fn(f64) -> f64>(g: G, params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
    let l1 = params.lambda1;
    let h = |w: f64| if w >= 1.0 { g(f64::INFINITY) } else { g(radius_at(w, l1)) };
    let w_d = -(-PI * l1 * params.d * params.d).exp_m1();
    let mut total = 0.0;
    for (a, b) in [(0.0, w_d), (w_d, 1.0)] {
        total += integrate(&h, a, b, cfg)?;
    }
    Ok(total)
}

fn access(model: AccessModel, r: f64, theta: f64, params: &NetworkParams, cfg: &QuadratureConfig) -> f64 {
    if r.is_infinite() {
        return 1.0;
    }
    model.eval(r, theta, params, cfg).unwrap_or_else(|e| match e {
        SapError::Numerics(crate::error::NumericsError::ToleranceNotMet { value, .. }) => value,
        _ => f64::NAN,
    })
}

/// Mean access probability over the nearest-primary distance distribution.
pub fn avg_access_prob(theta: f64, params: &NetworkParams, opts: &AnalysisOptions) -> Result<f64> {
    if theta == 0.0 {
        return Ok(1.0);
    }
    let v = radial_average(|r| access(opts.access, r, theta, params, &opts.quad), params, &opts.quad)?;
    Ok(v.clamp(0.0, 1.0))
}

/// `exp(-π λ2 φ̂2^e d² ρ0(β))`: the cost of other active secondaries.
pub fn secondary_factor(phi_hat: f64, beta: f64, params: &NetworkParams, variant: ThinningVariant) -> f64 {
    let density = params.lambda2 * phi_hat.powf(variant.exponent(params.alpha));
    (-PI * density * params.d * params.d * rho_full(beta, params.alpha)).exp()
}

/// Probability that an active link decodes at target β, given its TX
/// inferred empty-ball radius `r_i`.
pub fn tx_success_prob(r_i: f64, beta: f64, theta: f64, params: &NetworkParams, opts: &AnalysisOptions) -> Result<f64> {
    let ps = opts.access.eval(r_i, beta, params, &opts.quad)?;
    if params.lambda2 == 0.0 {
        return Ok(ps);
    }
    let phi = avg_access_prob(theta, params, opts)?;
    Ok(ps * secondary_factor(phi, beta, params, opts.thinning))
}

/// Outage of the typical primary link for a given mean access probability.
pub fn primary_outage_given_phi(
    phi_hat: f64,
    theta: f64,
    params: &NetworkParams,
    reading: OutageReading,
) -> Result<f64> {
    let a = 2.0 / params.alpha;
    let cfg = QuadratureConfig::default();
    let v = match reading {
        OutageReading::Printed => {
            let own = params.lambda1 * params.p2.powf(a);
            let sec = params.lambda2 * phi_hat * rho_full(theta, params.alpha) * params.p1.powf(a);
            1.0 - own / (sec + own * (rho_excl(theta, params.alpha, &cfg)? + 1.0))
        }
        OutageReading::Corrected => {
            let g = params.gamma;
            let own = params.lambda1 * params.p1.powf(a);
            let sec = params.lambda2 * phi_hat * params.p2.powf(a) * rho_full(g, params.alpha);
            1.0 - own / (own * (1.0 + rho_excl(g, params.alpha, &cfg)?) + sec)
        }
    };
    Ok(v)
}

/// P[SIR1 ≤ γ] of the typical primary link when secondaries use threshold θ.
pub fn primary_outage(theta: f64, params: &NetworkParams, opts: &AnalysisOptions) -> Result<f64> {
    let phi = if params.lambda2 == 0.0 { 1.0 } else { avg_access_prob(theta, params, opts)? };
    primary_outage_given_phi(phi, theta, params, opts.outage)
}

/// Residual of the printed threshold equation,
/// `λ2 φ̂2(θ) P1^(2/α) ρ0(θ)(1-τ) - λ1 P2^(2/α)(τ + ρ(θ)τ - ρ(θ))`.
pub fn printed_threshold_residual(theta: f64, params: &NetworkParams, opts: &AnalysisOptions) -> Result<f64> {
    let a = 2.0 / params.alpha;
    let tau = params.tau;
    let phi = avg_access_prob(theta, params, opts)?;
    let rho = rho_excl(theta, params.alpha, &opts.quad)?;
    Ok(params.lambda2 * phi * params.p1.powf(a) * rho_full(theta, params.alpha) * (1.0 - tau)
        - params.lambda1 * params.p2.powf(a) * (tau + rho * tau - rho))
}

/// θ̄: the smallest θ that keeps the primary outage within τ.
pub fn min_access_threshold(params: &NetworkParams, opts: &AnalysisOptions) -> Result<f64> {
    let tau = params.tau;
    let excess = |theta: f64| primary_outage(theta, params, opts).map(|o| o - tau);
    if excess(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let top = excess(THETA_MAX)?;
    if top > 0.0 {
        return Err(SapError::InfeasibleProtection { outage: top + tau, tau, theta_max: THETA_MAX });
    }
    let g = |x: f64| excess(x.exp()).unwrap_or(f64::NAN);
    let grid = log_space(1e-6, THETA_MAX, 49);
    let lns: Vec<f64> = grid.iter().map(|t| t.ln()).collect();
    if g(lns[0]) <= 0.0 {
        // Binding below 1e-6: solve on the linear scale.
        let lin = |t: f64| excess(t).unwrap_or(f64::NAN);
        return Ok(find_root(lin, 0.0, grid[0], &RootConfig { x_tol: 1e-14, max_iters: 200 })?);
    }
    let (lo, hi) =
        scan_bracket(g, &lns).ok_or(SapError::InfeasibleProtection { outage: top + tau, tau, theta_max: THETA_MAX })?;
    let x = find_root(g, lo, hi, &RootConfig::default())?;
    Ok(x.exp())
}

/// Area spectral efficiency [nat/s/Hz/m²] of the secondary network.
pub fn ase(theta: f64, beta: f64, params: &NetworkParams, opts: &AnalysisOptions) -> Result<f64> {
    if params.lambda2 == 0.0 {
        return Ok(0.0);
    }
    let phi = avg_access_prob(theta, params, opts)?;
    let joint = radial_average(
        |r| access(opts.access, r, theta, params, &opts.quad) * access(opts.access, r, beta, params, &opts.quad),
        params,
        &opts.quad,
    )?;
    Ok(params.lambda2 * beta.ln_1p() * secondary_factor(phi, beta, params, opts.thinning) * joint)
}

const PANEL_NODES: usize = 8;
const V_MAX: f64 = 40.0;

/// ASE evaluator for many (θ, β) pairs sharing one fixed radial rule.
///
/// Integrates in `v = π λ1 r²` (weight `e^-v`) with composite Gauss-Legendre
/// panels that halve in width towards v = 0 and break at the pair distance.
/// Access columns are cached per threshold.
pub struct AseSurface {
    params: NetworkParams,
    opts: AnalysisOptions,
    radii: Vec<f64>,
    weights: Vec<f64>,
    columns: HashMap<u64, Vec<f64>>,
}

impl AseSurface {
    pub fn new(params: NetworkParams, opts: AnalysisOptions) -> Self {
        let v_d = PI * params.lambda1 * params.d * params.d;
        let mut cuts = vec![0.0, V_MAX];
        let mut g = V_MAX;
        while g > 1e-9 {
            g *= 0.5;
            cuts.push(g);
        }
        if v_d > 0.0 && v_d < V_MAX {
            cuts.push(v_d);
            // keep the panels adjacent to the break short
            cuts.push(v_d * 0.5);
            cuts.push(v_d * 1.5);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let (x, w) = gauss_legendre(PANEL_NODES);
        let mut radii = Vec::new();
        let mut weights = Vec::new();
        for pair in cuts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (xi, wi) in x.iter().zip(&w) {
                let v = mid + half * xi;
                radii.push((v / (PI * params.lambda1)).sqrt());
                weights.push(half * wi * (-v).exp());
            }
        }
        Self { params, opts, radii, weights, columns: HashMap::new() }
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    /// Compute and cache access columns for all `thetas` (in parallel).
    pub fn prefetch(&mut self, thetas: &[f64]) {
        let missing: Vec<f64> = {
            let mut m: Vec<f64> = thetas.iter().copied().filter(|t| !self.columns.contains_key(&t.to_bits())).collect();
            m.sort_by(f64::total_cmp);
            m.dedup();
            m
        };
        let (params, opts, radii) = (&self.params, &self.opts, &self.radii);
        let cols: Vec<(u64, Vec<f64>)> = missing
            .par_iter()
            .map(|&t| (t.to_bits(), radii.iter().map(|&r| access(opts.access, r, t, params, &opts.quad)).collect()))
            .collect();
        self.columns.extend(cols);
    }

    fn column(&mut self, theta: f64) -> &[f64] {
        if !self.columns.contains_key(&theta.to_bits()) {
            self.prefetch(&[theta]);
        }
        &self.columns[&theta.to_bits()]
    }

    pub fn phi_hat(&mut self, theta: f64) -> f64 {
        if theta == 0.0 {
            return 1.0;
        }
        let w = self.weights.clone();
        let col = self.column(theta);
        col.iter().zip(&w).map(|(p, w)| p * w).sum::<f64>().clamp(0.0, 1.0)
    }

    /// `∫ P_s(r, θ) P_s(r, β) f_r(r) dr`.
    pub fn joint(&mut self, theta: f64, beta: f64) -> f64 {
        self.prefetch(&[theta, beta]);
        let a = &self.columns[&theta.to_bits()];
        let b = &self.columns[&beta.to_bits()];
        let tb = theta.to_bits();
        a.iter().zip(b).zip(&self.weights).map(|((x, y), w)| if tb == 0 { y * w } else { x * y * w }).sum()
    }

    pub fn ase(&mut self, theta: f64, beta: f64) -> f64 {
        if self.params.lambda2 == 0.0 {
            return 0.0;
        }
        let phi = self.phi_hat(theta);
        let joint = self.joint(theta, beta);
        let p = self.params;
        p.lambda2 * beta.ln_1p() * secondary_factor(phi, beta, &p, self.opts.thinning) * joint
    }
}

/// The default design grid, −20 to 30 dB in 0.5 dB steps.
pub fn default_grid_db() -> Vec<f64> {
    (0..=100).map(|k| -20.0 + 0.5 * k as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Also try θ = θ̄ itself, not only grid points above it.
    pub include_boundary: bool,
    /// Golden-section pass in each coordinate around the grid optimum.
    pub refine: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { include_boundary: false, refine: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub theta_star: f64,
    pub beta_star: f64,
    /// [nat/s/Hz/m²]
    pub ase: f64,
    pub theta_bar: f64,
    /// Mean access probability at θ*.
    pub phi_hat: f64,
    /// Density of concurrently active secondaries, λ2 φ̂2(θ*).
    pub lambda2_star: f64,
    /// Grid argmax before refinement.
    pub grid_theta: f64,
    pub grid_beta: f64,
}

/// A full evaluated (θ, β) surface, row-major in θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub thetas: Vec<f64>,
    pub betas: Vec<f64>,
    pub ase: Vec<f64>,
}

/// Maximise ASE over the grids subject to θ ≥ θ̄.
pub fn optimize(
    params: &NetworkParams,
    opts: &AnalysisOptions,
    theta_grid_db: &[f64],
    beta_grid_db: &[f64],
    oo: &OptimizeOptions,
) -> Result<Optimum> {
    optimize_with_surface(params, opts, theta_grid_db, beta_grid_db, oo).map(|(o, _)| o)
}

/// [`optimize`], also returning the evaluated grid.
pub fn optimize_with_surface(
    params: &NetworkParams,
    opts: &AnalysisOptions,
    theta_grid_db: &[f64],
    beta_grid_db: &[f64],
    oo: &OptimizeOptions,
) -> Result<(Optimum, SurfaceGrid)> {
    if theta_grid_db.is_empty() || beta_grid_db.is_empty() {
        return Err(SapError::InvalidInput("empty design grid".into()));
    }
    let theta_bar = min_access_threshold(params, opts)?;
    let mut thetas: Vec<f64> = theta_grid_db.iter().map(|&x| db_to_linear(x)).filter(|&t| t >= theta_bar).collect();
    if oo.include_boundary || thetas.is_empty() {
        thetas.insert(0, theta_bar);
        thetas.dedup();
    }
    let betas: Vec<f64> = beta_grid_db.iter().map(|&x| db_to_linear(x)).collect();

    let mut surf = AseSurface::new(*params, *opts);
    let all: Vec<f64> = thetas.iter().chain(&betas).copied().collect();
    surf.prefetch(&all);

    let mut values = Vec::with_capacity(thetas.len() * betas.len());
    let (mut bi, mut bj, mut best) = (0, 0, f64::NEG_INFINITY);
    for (i, &t) in thetas.iter().enumerate() {
        for (j, &b) in betas.iter().enumerate() {
            let v = surf.ase(t, b);
            values.push(v);
            if v > best {
                (bi, bj, best) = (i, j, v);
            }
        }
    }
    let grid = SurfaceGrid { thetas: thetas.clone(), betas: betas.clone(), ase: values };
    let (grid_theta, grid_beta) = (thetas[bi], betas[bj]);
    let (mut theta, mut beta) = (grid_theta, grid_beta);

    if oo.refine {
        let span = |xs: &[f64], k: usize| {
            let lo = if k > 0 { xs[k - 1] } else { xs[k] };
            let hi = if k + 1 < xs.len() { xs[k + 1] } else { xs[k] };
            (lo, hi)
        };
        let (tlo, thi) = span(&thetas, bi);
        let tlo = tlo.max(theta_bar);
        if thi > tlo && tlo > 0.0 {
            let t = golden_max_db(|t| surf.ase(t, beta), tlo, thi);
            if surf.ase(t, beta) > best {
                best = surf.ase(t, beta);
                theta = t;
            }
        }
        let (blo, bhi) = span(&betas, bj);
        if bhi > blo {
            let b = golden_max_db(|b| surf.ase(theta, b), blo, bhi);
            if surf.ase(theta, b) > best {
                best = surf.ase(theta, b);
                beta = b;
            }
        }
    }
    let phi = surf.phi_hat(theta);
    let opt = Optimum {
        theta_star: theta,
        beta_star: beta,
        ase: best.max(0.0),
        theta_bar,
        phi_hat: phi,
        lambda2_star: params.lambda2 * phi,
        grid_theta,
        grid_beta,
    };
    Ok((opt, grid))
}

/// Golden-section maximum of `f` on `[lo, hi]`, searched on the dB scale.
fn golden_max_db<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (linear_to_db(lo), linear_to_db(hi));
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(db_to_linear(c));
    let mut fd = f(db_to_linear(d));
    while b - a > 1e-3 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(db_to_linear(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(db_to_linear(d));
        }
    }
    db_to_linear(0.5 * (a + b))
}

/// Quadrature settings for [`d_function`]: the finite difference in β needs
/// access values far below its step size in error.
pub fn d_function_quad() -> QuadratureConfig {
    QuadratureConfig::tight()
}

/// Central-difference ∂/∂β of the lower-bound access probability.
pub fn lb_beta_derivative(r_i: f64, beta: f64, params: &NetworkParams, h_rel: f64) -> Result<f64> {
    let cfg = d_function_quad();
    let h = (h_rel * beta).max(1e-6_f64.min(h_rel * beta * 10.0)).max(f64::MIN_POSITIVE);
    let up = access_prob_lb(r_i, beta + h, params, &cfg)?;
    let dn = access_prob_lb(r_i, beta - h, params, &cfg)?;
    Ok((up - dn) / (2.0 * h))
}

/// Step of the finite difference used by [`d_function`].
pub fn d_function_step(beta: f64) -> f64 {
    (1e-6 * beta).max(1e-6)
}

/// Stationarity function in β at θ = θ̄ for the lower-bound access model
/// with linear thinning. Its root maximises ASE(θ̄, ·).
pub fn d_function(beta: f64, theta_bar: f64, params: &NetworkParams) -> Result<f64> {
    d_function_with_step(beta, theta_bar, params, d_function_step(beta))
}

pub fn d_function_with_step(beta: f64, theta_bar: f64, params: &NetworkParams, h: f64) -> Result<f64> {
    let cfg = d_function_quad();
    let lb_opts = AnalysisOptions { access: AccessModel::LowerBound, quad: cfg, ..Default::default() };
    let phi = if theta_bar == 0.0 { 1.0 } else { avg_access_prob(theta_bar, params, &lb_opts)? };
    let a = params.alpha;
    let c0 = PI * params.lambda2 * phi * params.d * params.d * rho_const(a);
    let coef = -2.0 * c0 * beta.powf((2.0 - a) / a) / a + 1.0 / ((1.0 + beta) * beta.ln_1p());
    let outer = QuadratureConfig { rel_tol: 1e-9, abs_tol: 1e-11, max_depth: 40 };
    let lb = |r: f64, t: f64| {
        if r.is_infinite() {
            1.0
        } else {
            access(AccessModel::LowerBound, r, t, params, &cfg)
        }
    };
    let d = radial_average(
        |r| {
            if r.is_infinite() {
                return coef;
            }
            let deriv = (lb(r, beta + h) - lb(r, beta - h)) / (2.0 * h);
            lb(r, theta_bar) * (lb(r, beta) * coef + deriv)
        },
        params,
        &outer,
    );
    match d {
        Err(SapError::Numerics(crate::error::NumericsError::ToleranceNotMet { value, .. })) => Ok(value),
        other => other,
    }
}

/// θ̄ and the root of the stationarity function, valid when primaries
/// dominate (P1 λ1 ≫ P2 λ2).
pub fn solve_beta_asymptotic(params: &NetworkParams, opts: &AnalysisOptions) -> Result<(f64, f64)> {
    let theta_bar = min_access_threshold(params, opts)?;
    let lns: Vec<f64> = log_space(0.01, 100.0, 41).iter().map(|b| b.ln()).collect();
    let g = |x: f64| d_function(x.exp(), theta_bar, params).unwrap_or(f64::NAN);
    let vals: Vec<f64> = lns.iter().map(|&x| g(x)).collect();
    let k =
        vals.windows(2).position(|w| w[0] > 0.0 && w[1] <= 0.0).ok_or(crate::error::NumericsError::NoSignChange {
            lo: 0.01,
            hi: 100.0,
            f_lo: vals[0],
            f_hi: vals[vals.len() - 1],
        })?;
    let x = find_root(g, lns[k], lns[k + 1], &RootConfig::default().with_x_tol(1e-9))?;
    Ok((theta_bar, x.exp()))
}
