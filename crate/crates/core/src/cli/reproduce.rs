//! Built-in figure scenarios.

use clap::ValueEnum;

use super::commands::ASE_KM2;
use super::config::ExperimentConfig;
use super::output::{estimate_cells, Cell, OutDir};
use super::CliError;
use crate::analytic::{access_prob_exact, access_prob_lb};
use crate::model::{db_to_linear, dbm_to_watts, linear_to_db, presets};
use crate::numerics::QuadratureConfig;
use crate::optimizer::{optimize, AseSurface, OptimizeOptions};
use crate::simulator::{run_access_prob_experiment, run_ase_sweep, sir_map, AccessExperiment, AseSweep, Conditioning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
            Figure::Fig10 => "fig10",
        }
    }
}

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + step * k as f64).collect()
}

fn names(protocols: &[&str]) -> Vec<String> {
    protocols.iter().map(|s| s.to_string()).collect()
}

/// The built-in configuration of a figure, before flag overrides.
pub fn figure_config(fig: Figure) -> ExperimentConfig {
    let mut c = ExperimentConfig { scenario: fig.name().into(), out: fig.name().into(), ..Default::default() };
    match fig {
        Figure::Fig5 => {
            c.lambda1_km2 = 10.0;
            c.theta_db = vec![0.0];
            c.window_m = 1000.0;
        }
        Figure::Fig6 => {
            c.theta_db = steps(-10.0, 20.0, 2.0);
            c.beta_db = vec![0.0];
            c.protocols = names(&["tx_threshold", "sap_exact", "rx_threshold"]);
            c.trials = 200_000;
        }
        Figure::Fig7 => {
            c.lambda1_km2 = 7e3;
            c.lambda2_km2 = 0.0;
            c.p1_dbm = 11.3;
            c.p2_dbm = 5.0;
            c.alpha = 3.0;
            c.r_i_m = presets::FIG7_R_I;
            c.theta_db = steps(-10.0, 20.0, 2.0);
            c.trials = 200_000;
            c.window_m = 400.0;
        }
        Figure::Fig8 => {
            c.theta_db = steps(-5.0, 15.0, 1.0);
            c.protocols = names(&["sap_exact", "tx_threshold", "rx_threshold"]);
            c.trials = 200_000;
        }
        Figure::Fig9 => {
            c.lambda2_sweep_km2 = steps(25.0, 500.0, 25.0);
        }
        Figure::Fig10 => {
            c.sigma_db = steps(0.0, 6.0, 1.0);
            c.protocols = names(&["sap_exact", "tx_threshold"]);
            c.trials = 1_000_000;
        }
    }
    c
}

/// Grid optimum (θ*, β*) of the configured network, without refinement.
fn grid_optimum(c: &ExperimentConfig) -> Result<(f64, f64), CliError> {
    let p = c.validate()?;
    let oo = OptimizeOptions { include_boundary: false, refine: false };
    let o = optimize(&p, &c.analysis(c.variant), &c.design_theta_db, &c.design_beta_db, &oo)?;
    Ok((o.theta_star, o.beta_star))
}

pub fn reproduce(fig: Figure, c: &ExperimentConfig, out: &mut OutDir) -> Result<(), CliError> {
    let p = c.validate()?;
    let q = QuadratureConfig::default();
    match fig {
        Figure::Fig5 => {
            let theta = db_to_linear(c.theta_db[0]);
            let pts = sir_map(&p, c.window_m, 5, theta, dbm_to_watts(c.signal_dbm), c.seed)?;
            let mut f = out.csv(
                "fig5_sir_map.csv",
                &["x_m", "y_m", "sensed_sir_db", "predicted_sir_db", "rx_sir_db", "predicted_access", "rx_coverage"],
            )?;
            for m in pts {
                f.row(vec![
                    m.x.into(),
                    m.y.into(),
                    m.sensed_sir_db.into(),
                    m.predicted_sir_db.into(),
                    m.rx_sir_db.into(),
                    m.predicted_access.into(),
                    m.rx_coverage.into(),
                ])?;
            }
            f.finish()
        }
        Figure::Fig6 => {
            let protocols = c.protocols()?;
            let sweep = AseSweep {
                params: p,
                protocols: protocols.clone(),
                thetas: c.theta_db.iter().map(|&x| db_to_linear(x)).collect(),
                betas: vec![db_to_linear(c.beta_db[0])],
                window_side: c.window_m,
                trials: c.trials,
                seed: c.seed,
                error_sigma_db: c.sigma_db[0],
                sensing: c.sensing.into(),
            };
            let cells = run_ase_sweep(&sweep)?;
            for proto in protocols {
                let mut f = out.csv(
                    &format!("fig6_{}.csv", proto.name()),
                    &["theta_db", "mean_sir", "mean_sir_db", "access", "access_ci_low", "access_ci_high", "links"],
                )?;
                for cell in cells.iter().filter(|x| x.protocol == proto) {
                    f.row(vec![
                        linear_to_db(cell.theta).into(),
                        cell.mean_sir.into(),
                        cell.mean_sir_db.into(),
                        cell.access.mean.into(),
                        cell.access.ci_low.into(),
                        cell.access.ci_high.into(),
                        cell.access.trials.into(),
                    ])?;
                }
                f.finish()?;
            }
            Ok(())
        }
        Figure::Fig7 => {
            let thetas: Vec<f64> = c.theta_db.iter().map(|&x| db_to_linear(x)).collect();
            for d in presets::FIG7_DISTANCES {
                let pd = p.with_d(d);
                let mut f = out.csv(&format!("fig7_analytic_d{d}.csv"), &["theta_db", "ps_exact", "ps_lb"])?;
                for &t in &thetas {
                    f.row(vec![
                        linear_to_db(t).into(),
                        access_prob_exact(c.r_i_m, t, &pd, &q)?.into(),
                        access_prob_lb(c.r_i_m, t, &pd, &q)?.into(),
                    ])?;
                }
                f.finish()?;
                let exp = AccessExperiment {
                    params: pd,
                    thetas: thetas.clone(),
                    r_i: c.r_i_m,
                    trials: c.trials,
                    seed: c.seed,
                    mode: Conditioning::EmptyBall,
                    window_side: c.window_m,
                    sensing: c.sensing.into(),
                };
                let est = run_access_prob_experiment(&exp)?;
                let mut f =
                    out.csv(&format!("fig7_mc_d{d}.csv"), &["theta_db", "ps", "ci_low", "ci_high", "trials"])?;
                for (&t, e) in thetas.iter().zip(&est) {
                    let mut row = vec![Cell::from(linear_to_db(t))];
                    row.extend(estimate_cells(e, 1.0));
                    f.row(row)?;
                }
                f.finish()?;
            }
            Ok(())
        }
        Figure::Fig8 => {
            let (_, beta) = grid_optimum(c)?;
            let thetas: Vec<f64> = c.theta_db.iter().map(|&x| db_to_linear(x)).collect();
            let protocols = c.protocols()?;
            let sweep = AseSweep {
                params: p,
                protocols: protocols.clone(),
                thetas: thetas.clone(),
                betas: vec![beta],
                window_side: c.window_m,
                trials: c.trials,
                seed: c.seed,
                error_sigma_db: c.sigma_db[0],
                sensing: c.sensing.into(),
            };
            let cells = run_ase_sweep(&sweep)?;
            for proto in protocols {
                let mut f = out.csv(
                    &format!("fig8_{}.csv", proto.name()),
                    &["theta_db", "beta_db", "ase_km2", "ci_low", "ci_high", "links"],
                )?;
                for cell in cells.iter().filter(|x| x.protocol == proto) {
                    let mut row = vec![Cell::from(linear_to_db(cell.theta)), linear_to_db(beta).into()];
                    row.extend(estimate_cells(&cell.ase, ASE_KM2));
                    f.row(row)?;
                }
                f.finish()?;
            }
            let mut surf = AseSurface::new(p, c.analysis(c.variant));
            let mut f = out.csv("fig8_analytic.csv", &["theta_db", "beta_db", "ase_km2"])?;
            for &t in &thetas {
                f.row(vec![linear_to_db(t).into(), linear_to_db(beta).into(), (surf.ase(t, beta) * ASE_KM2).into()])?;
            }
            f.finish()
        }
        Figure::Fig9 => {
            let opts = c.analysis(c.variant);
            let oo = OptimizeOptions { include_boundary: c.include_boundary, refine: c.refine };
            let mut rows = Vec::new();
            for &l in &c.lambda2_sweep_km2 {
                let pl = p.with_lambda2(crate::model::per_km2_to_per_m2(l));
                let o = optimize(&pl, &opts, &c.design_theta_db, &c.design_beta_db, &oo)?;
                rows.push((l, o));
            }
            let mut f = out.csv("fig9_theta_star.csv", &["lambda2_km2", "theta_star_db", "theta_bar_db"])?;
            for (l, o) in &rows {
                f.row(vec![(*l).into(), linear_to_db(o.theta_star).into(), linear_to_db(o.theta_bar).into()])?;
            }
            f.finish()?;
            let mut f = out.csv("fig9_beta_star.csv", &["lambda2_km2", "beta_star_db"])?;
            for (l, o) in &rows {
                f.row(vec![(*l).into(), linear_to_db(o.beta_star).into()])?;
            }
            f.finish()
        }
        Figure::Fig10 => {
            let (theta, beta) = grid_optimum(c)?;
            let protocols = c.protocols()?;
            let mut per_sigma = Vec::new();
            for &sigma in &c.sigma_db {
                let sweep = AseSweep {
                    params: p,
                    protocols: protocols.clone(),
                    thetas: vec![theta],
                    betas: vec![beta],
                    window_side: c.window_m,
                    trials: c.trials,
                    seed: c.seed,
                    error_sigma_db: sigma,
                    sensing: c.sensing.into(),
                };
                per_sigma.push((sigma, run_ase_sweep(&sweep)?));
            }
            for (k, proto) in protocols.iter().enumerate() {
                let mut f = out.csv(
                    &format!("fig10_{}.csv", proto.name()),
                    &["sigma_db", "theta_db", "beta_db", "ase_km2", "ci_low", "ci_high", "links"],
                )?;
                for (sigma, cells) in &per_sigma {
                    let mut row = vec![Cell::from(*sigma), linear_to_db(theta).into(), linear_to_db(beta).into()];
                    row.extend(estimate_cells(&cells[k].ase, ASE_KM2));
                    f.row(row)?;
                }
                f.finish()?;
            }
            Ok(())
        }
    }
}
