//! Monte Carlo experiments.
//!
//! Every trial or snapshot `k` draws from `substream(seed, k)`, and all counts
//! are reduced in fixed-size chunks folded in index order, so results do not
//! depend on the number of worker threads.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ppp::{
    apply_error_db, exp1, measure_interference, path_gain, sample_ppp, substream, torus_dist2, Point, SensingMode,
};
use super::stats::Estimate;
use super::thread_pool;
use crate::analytic::{empty_ball_radius, empty_ball_radius_alpha4, AccessModel};
use crate::error::{Result, SapError};
use crate::model::{NetworkParams, Policy};
use crate::numerics::{integrate_semi_infinite, QuadratureConfig};

const CHUNK: u64 = 256;

/// Run `f` over `0..n` in parallel chunks and fold the chunk results in order.
fn chunked<T, F, G>(n: u64, init: impl Fn() -> T + Sync, f: F, merge: G) -> T
where
    T: Send,
    F: Fn(&mut T, u64) + Sync,
    G: Fn(&mut T, T),
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<T> = thread_pool().install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                for k in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    f(&mut acc, k);
                }
                acc
            })
            .collect()
    });
    let mut total = init();
    for p in parts {
        merge(&mut total, p);
    }
    total
}

/// How trials are conditioned on the measured interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conditioning {
    /// Nearest primary placed on a circle of radius `r_i`, the rest a PPP
    /// outside that ball.
    EmptyBall,
    /// Unconditioned PPPs, keeping trials whose inferred radius falls within
    /// ±2% of `r_i`.
    PppConditional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessExperiment {
    pub params: NetworkParams,
    pub thetas: Vec<f64>,
    pub r_i: f64,
    pub trials: u64,
    pub seed: u64,
    pub mode: Conditioning,
    /// Empty-ball mode: diameter of the disk of primaries around the TX.
    /// Conditional mode: side of the toroidal square.
    pub window_side: f64,
    pub sensing: SensingMode,
}

/// Minimum number of trials in the conditioning bin.
pub const MIN_BIN_TRIALS: u64 = 1000;
/// Relative half-width of the conditioning bin.
pub const BIN_TOLERANCE: f64 = 0.02;

/// Frequency of `{P2 h0 d^-α / I_rx > θ}` for each θ, as Wilson estimates.
pub fn run_access_prob_experiment(exp: &AccessExperiment) -> Result<Vec<Estimate>> {
    if !(exp.r_i > 0.0) {
        return Err(SapError::InvalidInput(format!("r_i must be positive, got {}", exp.r_i)));
    }
    if exp.trials == 0 {
        return Err(SapError::InvalidInput("trials must be at least 1".into()));
    }
    exp.params.validate()?;
    let nt = exp.thetas.len();
    let (counts, kept) = match exp.mode {
        Conditioning::EmptyBall => {
            let counts = chunked(
                exp.trials,
                || vec![0u64; nt],
                |acc, k| {
                    let sir = empty_ball_trial(exp, k);
                    tally(acc, &exp.thetas, sir);
                },
                add_counts,
            );
            (counts, exp.trials)
        }
        Conditioning::PppConditional => {
            let (counts, kept) = chunked(
                exp.trials,
                || (vec![0u64; nt], 0u64),
                |acc, k| {
                    if let Some(sir) = conditional_trial(exp, k) {
                        tally(&mut acc.0, &exp.thetas, sir);
                        acc.1 += 1;
                    }
                },
                |a, b| {
                    add_counts(&mut a.0, b.0);
                    a.1 += b.1;
                },
            );
            if kept < MIN_BIN_TRIALS {
                return Err(SapError::InsufficientBinOccupancy { occupied: kept, required: MIN_BIN_TRIALS });
            }
            (counts, kept)
        }
    };
    Ok(counts.iter().map(|&c| Estimate::wilson(c, kept)).collect())
}

fn tally(acc: &mut [u64], thetas: &[f64], sir: f64) {
    for (c, &t) in acc.iter_mut().zip(thetas) {
        if t == 0.0 || sir > t {
            *c += 1;
        }
    }
}

fn add_counts(a: &mut Vec<u64>, b: Vec<u64>) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// SIR at the RX for one empty-ball trial. TX at the origin, RX at (d, 0).
fn empty_ball_trial(exp: &AccessExperiment, k: u64) -> f64 {
    let p = &exp.params;
    let mut rng = substream(exp.seed, k);
    let rx = [p.d, 0.0];
    let r_i = exp.r_i;
    let r_max2 = (0.5 * exp.window_side).powi(2);
    let at = |r: f64, phi: f64| [r * phi.cos(), r * phi.sin()];

    // Draws that do not depend on the window come first, so runs that differ
    // only in window size share them.
    let h0 = exp1(&mut rng);
    let phi0 = rng.random::<f64>() * 2.0 * PI;
    let nearest = at(r_i, phi0);
    let mut i_rx = exp1(&mut rng) * path_gain(dist2(nearest, rx), p.alpha);
    // Remaining primaries in order of distance: r² grows by Exp(1)/(π λ1).
    let mut r2 = r_i * r_i;
    loop {
        r2 += exp1(&mut rng) / (PI * p.lambda1);
        if r2 > r_max2 {
            break;
        }
        let x = at(r2.sqrt(), rng.random::<f64>() * 2.0 * PI);
        i_rx += exp1(&mut rng) * path_gain(dist2(x, rx), p.alpha);
    }
    p.p2 * h0 * p.d.powf(-p.alpha) / (p.p1 * i_rx)
}

fn dist2(a: Point, b: Point) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

fn conditional_trial(exp: &AccessExperiment, k: u64) -> Option<f64> {
    let p = &exp.params;
    let side = exp.window_side;
    let mut rng = substream(exp.seed, k);
    let prim = sample_ppp(p.lambda1, side, &mut rng);
    let tx = [0.5 * side, 0.5 * side];
    let i = measure_interference(tx, &prim, p.p1, p.alpha, side, exp.sensing, &mut rng);
    let r = inferred_radius(p, i);
    if (r / exp.r_i - 1.0).abs() > BIN_TOLERANCE {
        return None;
    }
    let psi = rng.random::<f64>() * 2.0 * PI;
    let rx = [tx[0] + p.d * psi.cos(), tx[1] + p.d * psi.sin()];
    let i_rx = measure_interference(rx, &prim, p.p1, p.alpha, side, SensingMode::Faded, &mut rng);
    let h0 = exp1(&mut rng);
    Some(p.p2 * h0 * p.d.powf(-p.alpha) / i_rx)
}

/// Access rule of a secondary TX.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    /// Bernoulli access with the exact conditional access probability.
    SapExact,
    /// Bernoulli access with its closed-form lower bound.
    SapLowerBound,
    /// Access iff the SIR predicted from the TX's own measurement exceeds θ.
    TxThreshold,
    /// Access iff the SIR from primary interference at the RX exceeds θ.
    RxThreshold,
    AlwaysOn,
}

impl Protocol {
    pub const ALL: [Protocol; 5] =
        [Protocol::SapExact, Protocol::SapLowerBound, Protocol::TxThreshold, Protocol::RxThreshold, Protocol::AlwaysOn];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::SapExact => "sap_exact",
            Protocol::SapLowerBound => "sap_lb",
            Protocol::TxThreshold => "tx_threshold",
            Protocol::RxThreshold => "rx_threshold",
            Protocol::AlwaysOn => "always_on",
        }
    }
}

/// A fully seeded simulation of one protocol and policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: NetworkParams,
    pub protocol: Protocol,
    pub policy: Policy,
    /// Side of the toroidal square [m].
    pub window_side: f64,
    /// Number of secondary links to simulate.
    pub trials: u64,
    pub master_seed: u64,
    pub error_sigma_db: f64,
    pub sensing_mode: SensingMode,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        check_window(&self.params, self.window_side)?;
        if self.trials == 0 {
            return Err(SapError::InvalidInput("trials must be at least 1".into()));
        }
        if !(self.error_sigma_db >= 0.0) {
            return Err(SapError::InvalidInput(format!(
                "error_sigma_db must be non-negative, got {}",
                self.error_sigma_db
            )));
        }
        Ok(())
    }
}

/// Smallest window side that keeps edge effects negligible.
pub fn min_window_side(params: &NetworkParams) -> f64 {
    20.0 * params.d.max(0.5 / params.lambda1.sqrt())
}

fn check_window(params: &NetworkParams, side: f64) -> Result<()> {
    let need = min_window_side(params);
    if !(side > 0.0) || side < need {
        return Err(SapError::InvalidInput(format!("window_side must be at least {need:.1} m, got {side}")));
    }
    Ok(())
}

/// Tabulated access probability over `ln r` for one threshold.
#[derive(Debug, Clone)]
pub struct AccessTable {
    ln_lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl AccessTable {
    pub const POINTS: usize = 1000;
    pub const R_MIN: f64 = 1e-3;
    pub const R_MAX: f64 = 1e4;

    pub fn build(theta: f64, params: &NetworkParams, model: AccessModel, cfg: &QuadratureConfig) -> Result<Self> {
        let ln_lo = Self::R_MIN.ln();
        let step = (Self::R_MAX.ln() - ln_lo) / (Self::POINTS - 1) as f64;
        let values: Result<Vec<f64>> = (0..Self::POINTS)
            .into_par_iter()
            .map(|k| {
                let r = (ln_lo + step * k as f64).exp();
                match model.eval(r, theta, params, cfg) {
                    Err(SapError::Numerics(crate::error::NumericsError::ToleranceNotMet { value, .. })) => Ok(value),
                    other => other,
                }
            })
            .collect();
        Ok(Self { ln_lo, step, values: values? })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if !(r > 0.0) {
            return self.values[0];
        }
        let x = (r.ln() - self.ln_lo) / self.step;
        if x <= 0.0 {
            return self.values[0];
        }
        let last = self.values.len() - 1;
        if x >= last as f64 {
            return self.values[last];
        }
        let k = x.floor() as usize;
        let f = x - k as f64;
        self.values[k] * (1.0 - f) + self.values[k + 1] * f
    }
}

/// Everything random in one snapshot, drawn up front in a fixed order so
/// every protocol and threshold sees the same realisation.
struct Snapshot {
    n: usize,
    /// Sensed primary interference at each TX.
    sensed: Vec<f64>,
    /// Standard normal driving each TX's measurement error.
    err_z: Vec<f64>,
    /// Access uniforms.
    u: Vec<f64>,
    /// Primary interference at each RX in the data phase.
    prim_rx: Vec<f64>,
    /// Faded signal power at each RX.
    signal: Vec<f64>,
    /// `gain[i * n + j]`: faded power from TX j at RX i (zero on the diagonal).
    gain: Vec<f64>,
}

fn draw_snapshot(p: &NetworkParams, side: f64, sensing: SensingMode, seed: u64, k: u64) -> Snapshot {
    let mut rng = substream(seed, k);
    let prim = sample_ppp(p.lambda1, side, &mut rng);
    let txs = sample_ppp(p.lambda2, side, &mut rng);
    let n = txs.len();
    let rxs: Vec<Point> = txs
        .iter()
        .map(|t| {
            let psi = rng.random::<f64>() * 2.0 * PI;
            [(t[0] + p.d * psi.cos()).rem_euclid(side), (t[1] + p.d * psi.sin()).rem_euclid(side)]
        })
        .collect();
    let sensed = txs.iter().map(|&t| measure_interference(t, &prim, p.p1, p.alpha, side, sensing, &mut rng)).collect();
    let err_z = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let u = (0..n).map(|_| rng.random::<f64>()).collect();
    let prim_rx = rxs
        .iter()
        .map(|&r| measure_interference(r, &prim, p.p1, p.alpha, side, SensingMode::Faded, &mut rng))
        .collect();
    let sd = p.p2 * p.d.powf(-p.alpha);
    let signal = (0..n).map(|_| sd * exp1(&mut rng)).collect();
    let mut gain = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                gain[i * n + j] = p.p2 * exp1(&mut rng) * path_gain(torus_dist2(txs[j], rxs[i], side), p.alpha);
            }
        }
    }
    Snapshot { n, sensed, err_z, u, prim_rx, signal, gain }
}

/// A set of protocols, thresholds and targets simulated on common snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AseSweep {
    pub params: NetworkParams,
    pub protocols: Vec<Protocol>,
    pub thetas: Vec<f64>,
    pub betas: Vec<f64>,
    pub window_side: f64,
    /// Target number of links; snapshots = ceil(trials / (λ2 W²)).
    pub trials: u64,
    pub seed: u64,
    pub error_sigma_db: f64,
    pub sensing: SensingMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AseCell {
    pub protocol: Protocol,
    pub theta: f64,
    pub beta: f64,
    /// λ2 · P[access and success] · ln(1+β) [nat/s/Hz/m²].
    pub ase: Estimate,
    /// Fraction of links granted access.
    pub access: Estimate,
    /// Fraction of links that accessed and decoded.
    pub success: Estimate,
    /// Mean linear SIR over accessing links.
    pub mean_sir: f64,
    /// Mean SIR in dB over accessing links.
    pub mean_sir_db: f64,
}

#[derive(Clone)]
struct SweepCounts {
    links: u64,
    accessed: Vec<u64>,
    succeeded: Vec<u64>,
    sir_sum: Vec<f64>,
    sir_db_sum: Vec<f64>,
}

impl SweepCounts {
    fn new(cells: usize, nb: usize) -> Self {
        Self {
            links: 0,
            accessed: vec![0; cells],
            succeeded: vec![0; cells * nb],
            sir_sum: vec![0.0; cells],
            sir_db_sum: vec![0.0; cells],
        }
    }

    fn merge(&mut self, o: SweepCounts) {
        self.links += o.links;
        for (a, b) in self.accessed.iter_mut().zip(o.accessed) {
            *a += b;
        }
        for (a, b) in self.succeeded.iter_mut().zip(o.succeeded) {
            *a += b;
        }
        for (a, b) in self.sir_sum.iter_mut().zip(o.sir_sum) {
            *a += b;
        }
        for (a, b) in self.sir_db_sum.iter_mut().zip(o.sir_db_sum) {
            *a += b;
        }
    }
}

/// Number of snapshots needed for about `trials` links.
pub fn snapshots_for(trials: u64, lambda2: f64, side: f64) -> u64 {
    let per = lambda2 * side * side;
    if per <= 0.0 {
        return trials.max(1);
    }
    ((trials as f64 / per).ceil() as u64).max(1)
}

fn build_tables(
    protocols: &[Protocol],
    thetas: &[f64],
    params: &NetworkParams,
) -> Result<Vec<Vec<Option<AccessTable>>>> {
    let cfg = QuadratureConfig::default();
    protocols
        .iter()
        .map(|proto| {
            thetas
                .iter()
                .map(|&t| match proto {
                    Protocol::SapExact => AccessTable::build(t, params, AccessModel::Exact, &cfg).map(Some),
                    Protocol::SapLowerBound => AccessTable::build(t, params, AccessModel::LowerBound, &cfg).map(Some),
                    _ => Ok(None),
                })
                .collect()
        })
        .collect()
}

/// Which links of a snapshot transmit under `proto` at threshold `theta`.
fn access_set(
    proto: Protocol,
    theta: f64,
    table: Option<&AccessTable>,
    snap: &Snapshot,
    measured: &[f64],
    radii: &[f64],
    own_signal: f64,
    out: &mut [bool],
) {
    for i in 0..snap.n {
        out[i] = match proto {
            Protocol::AlwaysOn => true,
            Protocol::TxThreshold => theta == 0.0 || own_signal / measured[i] > theta,
            Protocol::RxThreshold => theta == 0.0 || own_signal / snap.prim_rx[i] > theta,
            Protocol::SapExact | Protocol::SapLowerBound => {
                theta == 0.0 || snap.u[i] < table.expect("table built for SaP").eval(radii[i])
            }
        };
    }
}

/// Empty-ball radius a TX infers from its reading; infinite when nothing
/// was sensed.
fn inferred_radius(p: &NetworkParams, i: f64) -> f64 {
    if !(i > 0.0) {
        return f64::INFINITY;
    }
    if p.alpha == 4.0 {
        return empty_ball_radius_alpha4(i, p.lambda1, p.p1);
    }
    empty_ball_radius(i, p).map(|b| b.radius).unwrap_or(f64::INFINITY)
}

fn inferred_radii(p: &NetworkParams, measured: &[f64]) -> Vec<f64> {
    measured.iter().map(|&i| inferred_radius(p, i)).collect()
}

/// Simulate every (protocol, θ, β) combination of `sweep` on common snapshots.
/// Cells are ordered by protocol, then θ, then β.
pub fn run_ase_sweep(sweep: &AseSweep) -> Result<Vec<AseCell>> {
    let p = sweep.params.validate()?;
    check_window(&p, sweep.window_side)?;
    if sweep.trials == 0 {
        return Err(SapError::InvalidInput("trials must be at least 1".into()));
    }
    if sweep.thetas.is_empty() || sweep.betas.is_empty() || sweep.protocols.is_empty() {
        return Err(SapError::InvalidInput("empty sweep".into()));
    }
    let tables = thread_pool().install(|| build_tables(&sweep.protocols, &sweep.thetas, &p))?;
    let (np, nt, nb) = (sweep.protocols.len(), sweep.thetas.len(), sweep.betas.len());
    let snaps = snapshots_for(sweep.trials, p.lambda2, sweep.window_side);
    let own_signal = p.p2 * p.d.powf(-p.alpha);

    let counts = chunked(
        snaps,
        || SweepCounts::new(np * nt, nb),
        |acc, k| {
            let snap = draw_snapshot(&p, sweep.window_side, sweep.sensing, sweep.seed, k);
            let n = snap.n;
            acc.links += n as u64;
            let measured: Vec<f64> = snap
                .sensed
                .iter()
                .zip(&snap.err_z)
                .map(|(&i, &z)| apply_error_db(i, sweep.error_sigma_db * z))
                .collect();
            let radii = inferred_radii(&p, &measured);
            let mut active = vec![false; n];
            for (a, &proto) in sweep.protocols.iter().enumerate() {
                for (b, &theta) in sweep.thetas.iter().enumerate() {
                    access_set(proto, theta, tables[a][b].as_ref(), &snap, &measured, &radii, own_signal, &mut active);
                    let cell = a * nt + b;
                    for i in 0..n {
                        if !active[i] {
                            continue;
                        }
                        let row = &snap.gain[i * n..(i + 1) * n];
                        let sec: f64 = row.iter().zip(&active).filter(|(_, &on)| on).map(|(g, _)| g).sum();
                        let sir = snap.signal[i] / (snap.prim_rx[i] + sec);
                        acc.accessed[cell] += 1;
                        acc.sir_sum[cell] += sir;
                        acc.sir_db_sum[cell] += 10.0 * sir.log10();
                        for (c, &beta) in sweep.betas.iter().enumerate() {
                            if sir > beta {
                                acc.succeeded[cell * nb + c] += 1;
                            }
                        }
                    }
                }
            }
        },
        SweepCounts::merge,
    );

    if counts.links == 0 {
        return Err(SapError::InvalidInput("no secondary links were sampled".into()));
    }
    let mut out = Vec::with_capacity(np * nt * nb);
    for (a, &proto) in sweep.protocols.iter().enumerate() {
        for (b, &theta) in sweep.thetas.iter().enumerate() {
            let cell = a * nt + b;
            let acc = counts.accessed[cell];
            let access = Estimate::wilson(acc, counts.links);
            let (mean_sir, mean_sir_db) = if acc > 0 {
                (counts.sir_sum[cell] / acc as f64, counts.sir_db_sum[cell] / acc as f64)
            } else {
                (f64::NAN, f64::NAN)
            };
            for (c, &beta) in sweep.betas.iter().enumerate() {
                let success = Estimate::wilson(counts.succeeded[cell * nb + c], counts.links);
                out.push(AseCell {
                    protocol: proto,
                    theta,
                    beta,
                    ase: success.scaled(p.lambda2 * beta.ln_1p()),
                    access,
                    success,
                    mean_sir,
                    mean_sir_db,
                });
            }
        }
    }
    Ok(out)
}

/// ASE of a single scenario.
pub fn run_ase_experiment(s: &Scenario) -> Result<AseCell> {
    s.validate()?;
    let sweep = AseSweep {
        params: s.params,
        protocols: vec![s.protocol],
        thetas: vec![s.policy.theta],
        betas: vec![s.policy.beta],
        window_side: s.window_side,
        trials: s.trials,
        seed: s.master_seed,
        error_sigma_db: s.error_sigma_db,
        sensing: s.sensing_mode,
    };
    Ok(run_ase_sweep(&sweep)?[0])
}

/// Per-link outcome of one simulated secondary link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Interference the TX measured, after any measurement error [W].
    pub measured_i: f64,
    pub r_i: f64,
    pub access_granted: bool,
    /// SIR at the RX, counting only transmitting secondaries.
    pub sir_rx: f64,
    pub success: bool,
}

/// Per-link records of the first `max_snapshots` snapshots of a scenario.
pub fn trial_records(s: &Scenario, max_snapshots: u64) -> Result<Vec<TrialRecord>> {
    s.validate()?;
    let p = s.params;
    let tables = build_tables(&[s.protocol], &[s.policy.theta], &p)?;
    let own_signal = p.p2 * p.d.powf(-p.alpha);
    let snaps = snapshots_for(s.trials, p.lambda2, s.window_side).min(max_snapshots);
    let mut out = Vec::new();
    for k in 0..snaps {
        let snap = draw_snapshot(&p, s.window_side, s.sensing_mode, s.master_seed, k);
        let measured: Vec<f64> =
            snap.sensed.iter().zip(&snap.err_z).map(|(&i, &z)| apply_error_db(i, s.error_sigma_db * z)).collect();
        let radii = inferred_radii(&p, &measured);
        let mut active = vec![false; snap.n];
        access_set(
            s.protocol,
            s.policy.theta,
            tables[0][0].as_ref(),
            &snap,
            &measured,
            &radii,
            own_signal,
            &mut active,
        );
        for i in 0..snap.n {
            let row = &snap.gain[i * snap.n..(i + 1) * snap.n];
            let sec: f64 = row.iter().zip(&active).filter(|(_, &on)| on).map(|(g, _)| g).sum();
            let sir = snap.signal[i] / (snap.prim_rx[i] + sec);
            out.push(TrialRecord {
                measured_i: measured[i],
                r_i: radii[i],
                access_granted: active[i],
                sir_rx: sir,
                success: active[i] && sir > s.policy.beta,
            });
        }
    }
    Ok(out)
}

/// Outage `P[SIR1 ≤ γ]` of a primary user at the window centre served by
/// its nearest primary TX, with secondaries accessing by `s.protocol` at
/// threshold `theta`. One trial per snapshot.
pub fn run_primary_outage_experiment(s: &Scenario, theta: f64) -> Result<Estimate> {
    s.validate()?;
    if !(theta >= 0.0) {
        return Err(crate::error::ParamError::Theta(theta).into());
    }
    let p = s.params;
    let side = s.window_side;
    let tables = thread_pool().install(|| build_tables(&[s.protocol], &[theta], &p))?;
    let table = tables[0][0].as_ref();
    let own_signal = p.p2 * p.d.powf(-p.alpha);
    let centre = [0.5 * side, 0.5 * side];
    let outages = chunked(
        s.trials,
        || 0u64,
        |acc, k| {
            let mut rng = substream(s.master_seed, k);
            let prim = sample_ppp(p.lambda1, side, &mut rng);
            let txs = sample_ppp(p.lambda2, side, &mut rng);
            let serving = prim
                .iter()
                .enumerate()
                .map(|(j, &x)| (j, torus_dist2(centre, x, side)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((serving, _)) = serving else {
                *acc += 1;
                return;
            };
            let mut signal = 0.0;
            let mut interference = 0.0;
            for (j, &x) in prim.iter().enumerate() {
                let g = p.p1 * exp1(&mut rng) * path_gain(torus_dist2(centre, x, side), p.alpha);
                if j == serving {
                    signal = g;
                } else {
                    interference += g;
                }
            }
            for &t in &txs {
                let sensed = measure_interference(t, &prim, p.p1, p.alpha, side, s.sensing_mode, &mut rng);
                let z: f64 = StandardNormal.sample(&mut rng);
                let u: f64 = rng.random();
                let h = exp1(&mut rng);
                let measured = apply_error_db(sensed, s.error_sigma_db * z);
                let on = match s.protocol {
                    Protocol::AlwaysOn => true,
                    Protocol::TxThreshold => theta == 0.0 || own_signal / measured > theta,
                    Protocol::RxThreshold => {
                        let psi = rng.random::<f64>() * 2.0 * PI;
                        let rx = [(t[0] + p.d * psi.cos()).rem_euclid(side), (t[1] + p.d * psi.sin()).rem_euclid(side)];
                        let i_rx = measure_interference(rx, &prim, p.p1, p.alpha, side, SensingMode::Faded, &mut rng);
                        theta == 0.0 || own_signal / i_rx > theta
                    }
                    Protocol::SapExact | Protocol::SapLowerBound => {
                        theta == 0.0 || u < table.expect("table built for SaP").eval(inferred_radius(&p, measured))
                    }
                };
                if on {
                    interference += p.p2 * h * path_gain(torus_dist2(centre, t, side), p.alpha);
                }
            }
            if signal <= p.gamma * interference {
                *acc += 1;
            }
        },
        |a, b| *a += b,
    );
    Ok(Estimate::wilson(outages, s.trials))
}

/// One candidate location of the SIR map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirMapPoint {
    pub x: f64,
    pub y: f64,
    /// Fixed reference signal over the interference sensed at the TX [dB].
    pub sensed_sir_db: f64,
    /// Mean over RX positions on the pair circle of the same reference
    /// signal over the interference there [dB].
    pub rx_sir_db: f64,
    /// Mean RX SIR predicted from the sensed interference, `∫ P_s(θ) dθ`
    /// rescaled to the reference signal [dB].
    pub predicted_sir_db: f64,
    /// Access probability predicted from the sensed interference at θ.
    pub predicted_access: f64,
    /// Fraction of RX positions on the circle whose SIR exceeds θ.
    pub rx_coverage: f64,
}

/// Sense at a `grid × grid` lattice of TX locations in one primary
/// realisation (fading-free) and compare the TX reading with the RX circle.
pub fn sir_map(
    params: &NetworkParams,
    side: f64,
    grid: usize,
    theta: f64,
    signal_w: f64,
    seed: u64,
) -> Result<Vec<SirMapPoint>> {
    let p = params.validate()?;
    let mut rng = substream(seed, 0);
    let prim = sample_ppp(p.lambda1, side, &mut rng);
    let cfg = QuadratureConfig::default();
    let mut out = Vec::with_capacity(grid * grid);
    const ANGLES: usize = 64;
    for a in 0..grid {
        for b in 0..grid {
            let x = side * (a as f64 + 0.5) / grid as f64;
            let y = side * (b as f64 + 0.5) / grid as f64;
            let i = measure_interference([x, y], &prim, p.p1, p.alpha, side, SensingMode::Mean, &mut rng);
            let r = empty_ball_radius(i, &p)?.radius;
            let predicted = AccessModel::Exact.eval(r, theta, &p, &cfg)?;
            let mean_sir = integrate_semi_infinite(
                |t| AccessModel::Exact.eval(r, t, &p, &cfg).unwrap_or(f64::NAN),
                0.0,
                &cfg.with_rel_tol(1e-6),
            )? * signal_w
                / p.secondary_signal();
            let mut sir_sum = 0.0;
            let mut covered = 0;
            let own = p.p2 * p.d.powf(-p.alpha);
            for k in 0..ANGLES {
                let psi = 2.0 * PI * k as f64 / ANGLES as f64;
                let rx = [(x + p.d * psi.cos()).rem_euclid(side), (y + p.d * psi.sin()).rem_euclid(side)];
                let irx = measure_interference(rx, &prim, p.p1, p.alpha, side, SensingMode::Mean, &mut rng);
                sir_sum += 10.0 * (signal_w / irx).log10();
                if own / irx > theta {
                    covered += 1;
                }
            }
            out.push(SirMapPoint {
                x,
                y,
                sensed_sir_db: 10.0 * (signal_w / i).log10(),
                rx_sir_db: sir_sum / ANGLES as f64,
                predicted_sir_db: 10.0 * mean_sir.log10(),
                predicted_access: predicted,
                rx_coverage: covered as f64 / ANGLES as f64,
            });
        }
    }
    Ok(out)
}
