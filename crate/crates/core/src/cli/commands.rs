//! The `analyze`, `optimize` and `simulate` commands.

use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, VariantArg};
use super::output::{estimate_cells, Cell, OutDir};
use super::CliError;
use crate::analytic::{
    access_prob_exact, access_prob_large_i, access_prob_lb, access_prob_small_i, empty_ball_radius, mean_interference,
    AccessModel,
};
use crate::model::{db_to_linear, dbm_to_watts, linear_to_db, per_m2_to_per_km2, watts_to_dbm, NetworkParams, Policy};
use crate::numerics::QuadratureConfig;
use crate::optimizer::{
    optimize, optimize_with_surface, primary_outage, AseSurface, OptimizeOptions, Optimum, OutageReading,
};
use crate::simulator::{
    run_access_prob_experiment, run_ase_sweep, run_primary_outage_experiment, AccessExperiment, AseSweep, Protocol,
    Scenario,
};

/// ASE is reported per km².
pub const ASE_KM2: f64 = 1e6;

const ROW_HEADER: [&str; 11] = [
    "experiment",
    "variant",
    "theta_db",
    "beta_db",
    "sigma_db",
    "estimand",
    "value",
    "ci_low",
    "ci_high",
    "trials",
    "seed",
];

const CURVE_HEADER: [&str; 6] = ["theta_db", "i_dbm", "ps_exact", "ps_lb", "ps_small_i", "ps_large_i"];

fn curve_row(theta: f64, r_i: f64, i: f64, p: &NetworkParams, cfg: &ExperimentConfig) -> Result<Vec<Cell>, CliError> {
    let q = QuadratureConfig::default();
    Ok(vec![
        linear_to_db(theta).into(),
        watts_to_dbm(i).into(),
        access_prob_exact(r_i, theta, p, &q)?.into(),
        access_prob_lb(r_i, theta, p, &q)?.into(),
        access_prob_small_i(r_i, theta, p, cfg.small_i(), &q)?.into(),
        access_prob_large_i(theta, p).into(),
    ])
}

/// Access-probability curves over θ at `r_i_m` and over I at `analyze_theta_db`.
pub fn analyze(cfg: &ExperimentConfig, out: &mut OutDir) -> Result<(), CliError> {
    let p = cfg.validate()?;
    let i0 = mean_interference(cfg.r_i_m, &p);

    let mut f = out.csv("access_vs_theta.csv", &CURVE_HEADER)?;
    for &t in &cfg.theta_db {
        f.row(curve_row(db_to_linear(t), cfg.r_i_m, i0, &p, cfg)?)?;
    }
    f.finish()?;

    let levels: Vec<f64> = if cfg.i_dbm.is_empty() {
        let c = watts_to_dbm(i0);
        (-10..=10).map(|k| c + 2.0 * k as f64).collect()
    } else {
        cfg.i_dbm.clone()
    };
    let theta = db_to_linear(cfg.analyze_theta_db);
    let mut f = out.csv("access_vs_i.csv", &CURVE_HEADER)?;
    for &l in &levels {
        let i = dbm_to_watts(l);
        let r = empty_ball_radius(i, &p)?.radius;
        f.row(curve_row(theta, r, i, &p, cfg)?)?;
    }
    f.finish()
}

/// [`Optimum`] in boundary units.
#[derive(Debug, Clone, Serialize)]
pub struct OptimumReport {
    pub variant: VariantArg,
    pub theta_star_db: f64,
    pub beta_star_db: f64,
    pub theta_bar_db: f64,
    pub ase_nat_s_hz_km2: f64,
    pub phi_hat: f64,
    pub lambda2_star_km2: f64,
    pub grid_theta_db: f64,
    pub grid_beta_db: f64,
}

impl OptimumReport {
    pub fn new(o: &Optimum, variant: VariantArg) -> Self {
        Self {
            variant,
            theta_star_db: linear_to_db(o.theta_star),
            beta_star_db: linear_to_db(o.beta_star),
            theta_bar_db: linear_to_db(o.theta_bar),
            ase_nat_s_hz_km2: o.ase * ASE_KM2,
            phi_hat: o.phi_hat,
            lambda2_star_km2: per_m2_to_per_km2(o.lambda2_star),
            grid_theta_db: linear_to_db(o.grid_theta),
            grid_beta_db: linear_to_db(o.grid_beta),
        }
    }
}

fn variant_name(v: VariantArg) -> &'static str {
    match v {
        VariantArg::Linear => "linear",
        VariantArg::Printed => "printed",
    }
}

/// Optimum, full ASE surface and optional density sweep per thinning variant.
pub fn optimize_cmd(cfg: &ExperimentConfig, out: &mut OutDir) -> Result<(), CliError> {
    let p = cfg.validate()?;
    let variants = if cfg.both_variants { vec![VariantArg::Linear, VariantArg::Printed] } else { vec![cfg.variant] };
    let oo = OptimizeOptions { include_boundary: cfg.include_boundary, refine: cfg.refine };
    for v in variants {
        let suffix = if cfg.both_variants { format!("_{}", variant_name(v)) } else { String::new() };
        let opts = cfg.analysis(v);
        let (opt, grid) = optimize_with_surface(&p, &opts, &cfg.design_theta_db, &cfg.design_beta_db, &oo)?;
        out.json(&format!("optimum{suffix}.json"), &OptimumReport::new(&opt, v))?;

        let mut f = out.csv(&format!("surface{suffix}.csv"), &["theta_db", "beta_db", "ase_km2"])?;
        for (i, &t) in grid.thetas.iter().enumerate() {
            for (j, &b) in grid.betas.iter().enumerate() {
                let a = grid.ase[i * grid.betas.len() + j];
                f.row(vec![linear_to_db(t).into(), linear_to_db(b).into(), (a * ASE_KM2).into()])?;
            }
        }
        f.finish()?;

        if !cfg.lambda2_sweep_km2.is_empty() {
            let mut f = out.csv(
                &format!("sweep{suffix}.csv"),
                &[
                    "lambda2_km2",
                    "theta_star_db",
                    "beta_star_db",
                    "theta_bar_db",
                    "ase_km2",
                    "phi_hat",
                    "lambda2_star_km2",
                ],
            )?;
            for &l in &cfg.lambda2_sweep_km2 {
                let q = p.with_lambda2(crate::model::per_km2_to_per_m2(l));
                let o = optimize(&q, &opts, &cfg.design_theta_db, &cfg.design_beta_db, &oo)?;
                let r = OptimumReport::new(&o, v);
                f.row(vec![
                    l.into(),
                    r.theta_star_db.into(),
                    r.beta_star_db.into(),
                    r.theta_bar_db.into(),
                    r.ase_nat_s_hz_km2.into(),
                    r.phi_hat.into(),
                    r.lambda2_star_km2.into(),
                ])?;
            }
            f.finish()?;
        }
    }
    Ok(())
}

fn analytic_row(
    experiment: &str,
    variant: &str,
    theta: f64,
    beta: Cell,
    sigma: Cell,
    estimand: &str,
    value: f64,
    seed: u64,
) -> Vec<Cell> {
    vec![
        experiment.into(),
        variant.into(),
        linear_to_db(theta).into(),
        beta,
        sigma,
        estimand.into(),
        value.into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        seed.into(),
    ]
}

/// Monte Carlo estimates in the long row format, with analytic companions.
pub fn simulate(cfg: &ExperimentConfig, out: &mut OutDir) -> Result<(), CliError> {
    let p = cfg.validate()?;
    let thetas: Vec<f64> = cfg.theta_db.iter().map(|&x| db_to_linear(x)).collect();
    let betas: Vec<f64> = cfg.beta_db.iter().map(|&x| db_to_linear(x)).collect();
    let protocols = cfg.protocols()?;
    let mut f = out.csv("simulate.csv", &ROW_HEADER)?;
    match cfg.experiment {
        ExperimentKind::Ase => {
            for &sigma in &cfg.sigma_db {
                let sweep = AseSweep {
                    params: p,
                    protocols: protocols.clone(),
                    thetas: thetas.clone(),
                    betas: betas.clone(),
                    window_side: cfg.window_m,
                    trials: cfg.trials,
                    seed: cfg.seed,
                    error_sigma_db: sigma,
                    sensing: cfg.sensing.into(),
                };
                for c in run_ase_sweep(&sweep)? {
                    let lead = |est: &str| -> Vec<Cell> {
                        vec![
                            "ase".into(),
                            c.protocol.name().into(),
                            linear_to_db(c.theta).into(),
                            linear_to_db(c.beta).into(),
                            sigma.into(),
                            est.into(),
                        ]
                    };
                    for (name, e, k) in
                        [("ase_km2", c.ase, ASE_KM2), ("access", c.access, 1.0), ("success", c.success, 1.0)]
                    {
                        let mut row = lead(name);
                        row.extend(estimate_cells(&e, k));
                        row.push(cfg.seed.into());
                        f.row(row)?;
                    }
                    for (name, v) in [("mean_sir", c.mean_sir), ("mean_sir_db", c.mean_sir_db)] {
                        let mut row = lead(name);
                        row.extend([v.into(), Cell::Empty, Cell::Empty, c.access.trials.into(), cfg.seed.into()]);
                        f.row(row)?;
                    }
                }
            }
            for &proto in &protocols {
                let model = match proto {
                    Protocol::SapExact => AccessModel::Exact,
                    Protocol::SapLowerBound => AccessModel::LowerBound,
                    _ => continue,
                };
                let mut surf = AseSurface::new(
                    p,
                    crate::optimizer::AnalysisOptions { access: model, ..cfg.analysis(cfg.variant) },
                );
                let all: Vec<f64> = thetas.iter().chain(&betas).copied().collect();
                surf.prefetch(&all);
                for &t in &thetas {
                    for &b in &betas {
                        let v = surf.ase(t, b) * ASE_KM2;
                        f.row(analytic_row(
                            "ase",
                            &format!("{}_analytic", proto.name()),
                            t,
                            linear_to_db(b).into(),
                            Cell::Empty,
                            "ase_km2",
                            v,
                            cfg.seed,
                        ))?;
                    }
                }
            }
        }
        ExperimentKind::Access => {
            let exp = AccessExperiment {
                params: p,
                thetas: thetas.clone(),
                r_i: cfg.r_i_m,
                trials: cfg.trials,
                seed: cfg.seed,
                mode: cfg.conditioning(),
                window_side: cfg.window_m,
                sensing: cfg.sensing.into(),
            };
            let label = match cfg.conditioning {
                super::config::ConditioningArg::EmptyBall => "empty_ball",
                super::config::ConditioningArg::PppConditional => "ppp_conditional",
            };
            let q = QuadratureConfig::default();
            for (&t, e) in thetas.iter().zip(run_access_prob_experiment(&exp)?) {
                let mut row: Vec<Cell> =
                    vec!["access".into(), label.into(), linear_to_db(t).into(), Cell::Empty, Cell::Empty, "ps".into()];
                row.extend(estimate_cells(&e, 1.0));
                row.push(cfg.seed.into());
                f.row(row)?;
                f.row(analytic_row(
                    "access",
                    "exact_analytic",
                    t,
                    Cell::Empty,
                    Cell::Empty,
                    "ps",
                    access_prob_exact(cfg.r_i_m, t, &p, &q)?,
                    cfg.seed,
                ))?;
                f.row(analytic_row(
                    "access",
                    "lb_analytic",
                    t,
                    Cell::Empty,
                    Cell::Empty,
                    "ps",
                    access_prob_lb(cfg.r_i_m, t, &p, &q)?,
                    cfg.seed,
                ))?;
            }
        }
        ExperimentKind::Outage => {
            for &sigma in &cfg.sigma_db {
                for &proto in &protocols {
                    for &t in &thetas {
                        let s = Scenario {
                            params: p,
                            protocol: proto,
                            policy: Policy::new(t, betas[0])?,
                            window_side: cfg.window_m,
                            trials: cfg.trials,
                            master_seed: cfg.seed,
                            error_sigma_db: sigma,
                            sensing_mode: cfg.sensing.into(),
                        };
                        let e = run_primary_outage_experiment(&s, t)?;
                        let mut row: Vec<Cell> = vec![
                            "outage".into(),
                            proto.name().into(),
                            linear_to_db(t).into(),
                            Cell::Empty,
                            sigma.into(),
                            "outage".into(),
                        ];
                        row.extend(estimate_cells(&e, 1.0));
                        row.push(cfg.seed.into());
                        f.row(row)?;
                    }
                }
            }
            for (label, reading) in
                [("corrected_analytic", OutageReading::Corrected), ("printed_analytic", OutageReading::Printed)]
            {
                let opts = crate::optimizer::AnalysisOptions { outage: reading, ..cfg.analysis(cfg.variant) };
                for &t in &thetas {
                    let v = primary_outage(t, &p, &opts)?;
                    f.row(analytic_row("outage", label, t, Cell::Empty, Cell::Empty, "outage", v, cfg.seed))?;
                }
            }
        }
    }
    f.finish()
}
