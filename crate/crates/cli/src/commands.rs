//! One function per subcommand. Each writes its files into `out` and
//! returns the list with a JSON summary; none writes the manifest.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use patchkpp::dynamics::{level_crossings, measure_front_speed, spreading_speed_with, SimParams, SpeedOptions};
use patchkpp::eigen::{
    critical_patch_length, lambda1_dispersion, lambda1_grid_extrapolated, lambda1_value, lambda_dirichlet,
    lambda_mu_value,
};
use patchkpp::pde::export::write_snapshots;
use patchkpp::pde::{EvolveOptions, Evolver, Field, Grid, Semiflow, StepperConfig};
use patchkpp::steady::{compute_steady_state, verify_uniqueness, SteadyOptions};
use patchkpp::{Error, Landscape, Reaction};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{MapAxis, ReactionConfig, RunConfig};
use crate::initial::Profile;
use crate::{Artifacts, CliError, Out, Result};

fn seed(cfg: &RunConfig) -> u64 {
    cfg.seed.unwrap_or(crate::DEFAULT_SEED)
}

fn stepper(cfg: &RunConfig) -> StepperConfig {
    StepperConfig {
        dt: cfg.numerics.dt,
        scheme: cfg.numerics.scheme.into(),
        ..StepperConfig::default()
    }
}

fn steady_options(cfg: &RunConfig) -> SteadyOptions {
    SteadyOptions {
        nodes_per_patch: cfg.numerics.nodes_per_patch,
        ..SteadyOptions::default()
    }
}

pub const SIGMA_SWEEP_HEADER: &str = "sigma,alpha,lambda1";
pub const EIGENFUNCTION_HEADER: &str = "x,psi";

/// `lambda1` by the dispersion root, the transfer matrix at zero drift and
/// the extrapolated grid; the Dirichlet ladder; thresholds; an optional
/// sweep over `sigma`. Methods disagreeing beyond the gate fail after
/// `eigen.json` is written.
pub fn cmd_eigen(cfg: &RunConfig, out: &Path) -> Result<Artifacts> {
    let ls = cfg.build_landscape()?;
    let r = cfg.build_reaction()?;
    let mut out = Out::new(out)?;
    let sc = &cfg.scenario.eigen;

    let disp = lambda1_dispersion(&ls, &r)?;
    let transfer = lambda_mu_value(&ls, &r, 0.0)?;
    let grid = lambda1_grid_extrapolated(&ls, &r, cfg.numerics.eigen_nodes_per_patch)?;
    let values = [disp.lambda, transfer, grid];
    let spread = values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let agree = spread <= cfg.numerics.cross_method_tol;

    let ladder = sc
        .dirichlet_radii
        .par_iter()
        .map(|&k| {
            let e = lambda_dirichlet(&ls, &r, k * ls.period, 0.0, sc.dirichlet_nodes_per_patch)?;
            Ok(json!({"radius": k * ls.period, "lambda": e.lambda}))
        })
        .collect::<std::result::Result<Vec<_>, Error>>()?;

    let thresholds = match critical_patch_length(&ls, &r) {
        Ok(t) => Some(t),
        Err(Error::NotSourceSink { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    let sweep = match &sc.sigma_sweep {
        Some(sigmas) => {
            let rows = sigmas
                .par_iter()
                .map(|&s| {
                    let l = Landscape::with_sigma(ls.l1, ls.l2, ls.d1, ls.d2, s)?;
                    Ok((s, l.alpha, lambda1_value(&l, &r)?))
                })
                .collect::<std::result::Result<Vec<_>, Error>>()?;
            out.write("lambda_vs_sigma.csv", |w| {
                writeln!(w, "{SIGMA_SWEEP_HEADER}")?;
                rows.iter().try_for_each(|(s, a, l)| writeln!(w, "{s},{a},{l}"))
            })?;
            let mut sorted = rows.clone();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let monotone = sorted.windows(2).all(|w| w[1].2 > w[0].2 || w[1].0 == w[0].0);
            Some(json!({"points": rows.len(), "monotone_increasing": monotone}))
        }
        None => None,
    };

    out.write("eigenfunction.csv", |w| {
        writeln!(w, "{EIGENFUNCTION_HEADER}")?;
        disp.positions
            .iter()
            .zip(&disp.eigenfunction)
            .try_for_each(|(x, p)| writeln!(w, "{x},{p}"))
    })?;

    let summary = json!({
        "lambda1": {
            "dispersion": disp.lambda,
            "transfer_matrix": transfer,
            "grid_extrapolated": grid,
            "dispersion_residual": disp.residual,
        },
        "methods_agree": agree,
        "max_method_gap": spread,
        "persistent": disp.lambda < 0.0,
        "dirichlet": ladder,
        "thresholds": thresholds.map(|t| json!({
            "l1c": t.l1c,
            "big_l1c": t.big_l1c,
            "f2_prime0_critical": t.f2_critical,
        })),
        "sigma_sweep": sweep,
    });
    out.json("eigen.json", &summary)?;
    if !agree {
        return Err(Error::MethodsDisagree {
            a: values.iter().fold(f64::INFINITY, |m, &v| m.min(v)),
            b: values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)),
            tol: cfg.numerics.cross_method_tol,
        }
        .into());
    }
    Ok(out.finish(summary))
}

pub const PHI_HEADER: &str = "mu,lambda,phi";

/// `c*` and `mu*` from the variational formula, the `phi(mu)` table, and
/// optionally a simulated front whose fitted speeds are compared with `c*`.
/// The fitted speeds in the summary remove the logarithmic lag of pulled
/// fronts; the plain least-squares slopes are reported alongside.
pub fn cmd_speed(cfg: &RunConfig, out: &Path) -> Result<Artifacts> {
    let ls = cfg.build_landscape()?;
    let r = cfg.build_reaction()?;
    let sc = &cfg.scenario.speed;
    let opts = SpeedOptions {
        grid_check_nodes_per_patch: sc.grid_check.then_some(cfg.numerics.eigen_nodes_per_patch),
        table_points: sc.table_points,
        ..SpeedOptions::default()
    };
    let s = spreading_speed_with(&ls, &r, &opts)?;
    let mut out = Out::new(out)?;
    out.write("phi_of_mu.csv", |w| {
        writeln!(w, "{PHI_HEADER}")?;
        s.samples
            .iter()
            .try_for_each(|p| writeln!(w, "{},{},{}", p.mu, p.lambda, p.phi))
    })?;

    let mut summary = json!({
        "c_star": s.c_star,
        "mu_star": s.mu_star,
        "lambda1": s.lambda1,
        "c_fitted_right": null,
        "c_fitted_left": null,
        "rel_err": null,
        "c_star_left": s.c_star_left,
        "lambda_at_mu_star": s.lambda_at_mu_star,
        "grid_check": s.grid_check,
    });
    if sc.simulate_front {
        let params = SimParams {
            horizon: sc.horizon,
            nodes_per_patch: cfg.numerics.nodes_per_patch,
            dt: cfg.numerics.dt,
            scheme: cfg.numerics.scheme.into(),
            ..SimParams::default()
        };
        let trace = measure_front_speed(&ls, &r, &params)?;
        out.write("front_trace.csv", |w| trace.write_csv(w))?;
        let (cr, cl) = (trace.corrected_right.slope, trace.corrected_left.slope);
        let rel = ((cr - s.c_star).abs()).max((cl - s.c_star).abs()) / s.c_star;
        summary["c_fitted_right"] = json!(cr);
        summary["c_fitted_left"] = json!(cl);
        summary["rel_err"] = json!(rel);
        summary["c_ols_right"] = json!(trace.c_fit_right);
        summary["c_ols_left"] = json!(trace.c_fit_left);
        summary["stderr_right"] = json!(trace.corrected_right.slope_stderr);
        summary["stderr_left"] = json!(trace.corrected_left.slope_stderr);
    }
    out.json("speed.json", &summary)?;
    Ok(out.finish(summary))
}

/// Default tracked level: `min p / 2` when persistent, otherwise half the initial maximum.
fn front_level(cfg: &RunConfig, ls: &Landscape, r: &Reaction, u0: &Field) -> Result<f64> {
    if let Some(level) = cfg.scenario.simulate.front_level {
        return Ok(level);
    }
    let steady = compute_steady_state(ls, r, &steady_options(cfg))?;
    Ok(if steady.exists { 0.5 * steady.min_p } else { 0.5 * u0.sup_norm() })
}

/// `max |u(x + l) - u(x)|` on nodes far enough from both ends that the
/// truncation stays below roundoff; `None` when the window is too narrow.
fn periodicity_defect(field: &Field, semiflow: &Semiflow) -> Option<f64> {
    let g = &field.grid;
    let l = semiflow.landscape.period;
    let shift = g.nodes_per_tile();
    let margin = semiflow.margin(field.time);
    let (lo, hi) = (g.x[0] + margin, g.x[g.len() - 1] - margin - l);
    (hi > lo).then(|| {
        (0..g.len() - shift)
            .filter(|&i| g.x[i] >= lo - 1e-12 && g.x[i] <= hi + 1e-12)
            .map(|i| (field.values[i + shift] - field.values[i]).abs())
            .fold(0.0, f64::max)
    })
}

/// Comparison and subhomogeneity checks on the configured data, with tolerances.
const COMPARISON_TOL: f64 = 1e-10;
const SUBHOMOGENEITY_TOL: f64 = 1e-9;

fn property_checks(
    cfg: &RunConfig,
    ls: &Landscape,
    r: &Reaction,
    u0: &Field,
    end: &Field,
) -> Result<serde_json::Value> {
    let grid = u0.grid.clone();
    let horizon = cfg.scenario.simulate.horizon;
    let final_of = |start: &Field| -> Result<Field> {
        let mut ev = Evolver::new(grid.clone(), ls, r, stepper(cfg))?;
        Ok(ev.evolve(start, horizon, &EvolveOptions::default())?.last().clone())
    };
    let l = ls.period;
    let raised: Vec<f64> = grid
        .x
        .iter()
        .zip(&u0.values)
        .enumerate()
        .map(|(i, (&x, &u))| if grid.is_boundary(i) { 0.0 } else { u + 0.1 * (1.0 - (x / l).powi(2)).max(0.0) })
        .collect();
    let above = final_of(&Field::from_values(grid.clone(), raised)?)?;
    let comparison = end
        .values
        .iter()
        .zip(&above.values)
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut sub = f64::NEG_INFINITY;
    for gamma in [0.25, 0.5, 0.9] {
        let scaled = Field::from_values(grid.clone(), u0.values.iter().map(|v| gamma * v).collect())?;
        let q = final_of(&scaled)?;
        sub = end
            .values
            .iter()
            .zip(&q.values)
            .map(|(a, b)| gamma * a - b)
            .fold(sub, f64::max);
    }
    Ok(json!({
        "comparison": {"max_excess": comparison, "tol": COMPARISON_TOL, "pass": comparison <= COMPARISON_TOL},
        "subhomogeneity": {"max_excess": sub, "tol": SUBHOMOGENEITY_TOL, "pass": sub <= SUBHOMOGENEITY_TOL},
    }))
}

/// Evolution on `[-n l, n l]` with snapshots, the final state, the front
/// trace, the periodicity defect for periodic data, and optional property checks.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<Artifacts> {
    let ls = cfg.build_landscape()?;
    let r = cfg.build_reaction()?;
    let sc = &cfg.scenario.simulate;
    let profile = Profile::new(&sc.initial, &ls, seed(cfg))?;
    let grid = Arc::new(Grid::truncated(&ls, sc.n_tiles, cfg.numerics.nodes_per_patch)?);
    let u0 = Field::from_fn(grid.clone(), |x| profile.at(x))?;
    let mut ev = Evolver::new(grid.clone(), &ls, &r, stepper(cfg))?;
    let traj = ev.evolve(
        &u0,
        sc.horizon,
        &EvolveOptions {
            snapshot_every: Some(sc.snapshot_every),
            ..EvolveOptions::default()
        },
    )?;
    let end = traj.last().clone();
    let mut out = Out::new(out)?;
    out.write("snapshots.csv", |w| write_snapshots(w, &traj.snapshots, &ls))?;
    out.write("final_state.csv", |w| write_snapshots(w, [&end], &ls))?;

    let level = front_level(cfg, &ls, &r, &u0)?;
    let crossings: Vec<(f64, Option<(f64, f64)>)> = traj
        .snapshots
        .iter()
        .map(|f| (f.time, (level > 0.0).then(|| level_crossings(&grid, &f.values, level)).flatten()))
        .collect();
    out.write("front_trace.csv", |w| {
        writeln!(w, "{}", patchkpp::dynamics::FRONT_TRACE_HEADER)?;
        for (t, c) in &crossings {
            match c {
                Some((a, b)) => writeln!(w, "{t},{a},{b}")?,
                None => writeln!(w, "{t},,")?,
            }
        }
        Ok(())
    })?;

    let semiflow = Semiflow::new(&ls, &r, stepper(cfg), cfg.numerics.nodes_per_patch);
    let defect = if profile.is_periodic() { periodicity_defect(&end, &semiflow) } else { None };
    let properties = if sc.properties {
        let p = property_checks(cfg, &ls, &r, &u0, &end)?;
        out.json("properties.json", &p)?;
        Some(p)
    } else {
        None
    };
    let summary = json!({
        "horizon": end.time,
        "snapshots": traj.snapshots.len(),
        "final_sup": end.sup_norm(),
        "front_level": level,
        "final_front": crossings.last().and_then(|c| c.1).map(|(a, b)| json!({"right": a, "left": b})),
        "periodicity_defect": defect,
        "properties": properties,
    });
    out.json("simulate.json", &summary)?;
    Ok(out.finish(summary))
}

/// The periodic steady state, or its absence, and the uniqueness check.
pub fn cmd_steady(cfg: &RunConfig, out: &Path) -> Result<Artifacts> {
    let ls = cfg.build_landscape()?;
    let r = cfg.build_reaction()?;
    let opts = steady_options(cfg);
    let s = compute_steady_state(&ls, &r, &opts)?;
    let uniqueness = if s.exists && cfg.scenario.steady.uniqueness {
        Some(verify_uniqueness(&s, &ls, &r, &opts, seed(cfg))?)
    } else {
        None
    };
    let mut out = Out::new(out)?;
    out.write("steady_profile.csv", |w| s.write_csv(w))?;
    let summary = json!({
        "exists": s.exists,
        "lambda1": s.lambda1,
        "near_critical": s.near_critical,
        "residual": s.residual,
        "min_p": s.min_p,
        "max_p": s.max_p,
        "march_time": s.march_time,
        "uniqueness": uniqueness,
    });
    out.json("steady.json", &summary)?;
    Ok(out.finish(summary))
}

pub const MAP_L1C_HEADER_PREFIX: &str = "l1c,big_l1c";

/// Sign of `lambda1` on the `(l1, l2)` or `(l1, f2'(0))` grid and the
/// analytic `l1c` curve along the second axis.
pub fn cmd_persistence_map(cfg: &RunConfig, out: &Path) -> Result<Artifacts> {
    let ls = cfg.build_landscape()?;
    let r = cfg.build_reaction()?;
    let map = cfg
        .scenario
        .persistence_map
        .as_ref()
        .ok_or_else(|| CliError::Config("persistence-map needs scenario.persistence_map".into()))?;
    let mu1 = match (&map.axis, &cfg.reaction) {
        (MapAxis::F2Prime0 { .. }, ReactionConfig::Logistic { mu1, .. }) => Some(*mu1),
        (MapAxis::F2Prime0 { .. }, _) => {
            return Err(CliError::Config("the f2_prime0 axis needs a logistic reaction".into()));
        }
        _ => None,
    };
    let at = |y: f64| -> std::result::Result<(Landscape, Reaction), Error> {
        match (&map.axis, mu1) {
            (MapAxis::L2 { .. }, _) => Ok((ls.with_l2(y)?, r.clone())),
            (MapAxis::F2Prime0 { .. }, Some(m)) => Ok((ls, Reaction::logistic(m, y)?)),
            (MapAxis::F2Prime0 { .. }, None) => unreachable!(),
        }
    };
    let ys = map.axis.values();
    let cells: Vec<(f64, f64)> = map.l1.iter().flat_map(|&a| ys.iter().map(move |&b| (a, b))).collect();
    let lambdas = cells
        .par_iter()
        .map(|&(l1, y)| {
            let (l, rr) = at(y)?;
            lambda1_value(&l.with_l1(l1)?, &rr)
        })
        .collect::<std::result::Result<Vec<_>, Error>>()?;
    let curve = ys
        .iter()
        .map(|&y| {
            let (l, rr) = at(y)?;
            match critical_patch_length(&l, &rr) {
                Ok(t) => Ok((y, Some(t))),
                Err(Error::NotSourceSink { .. }) => Ok((y, None)),
                Err(e) => Err(e),
            }
        })
        .collect::<std::result::Result<Vec<_>, Error>>()?;

    let axis = map.axis.name();
    let mut out = Out::new(out)?;
    out.write("persistence_map.csv", |w| {
        writeln!(w, "l1,{axis},lambda1,sign,persistent")?;
        cells.iter().zip(&lambdas).try_for_each(|(&(l1, y), &lam)| {
            let sign = if lam < 0.0 { -1 } else if lam > 0.0 { 1 } else { 0 };
            writeln!(w, "{l1},{y},{lam},{sign},{}", lam < 0.0)
        })
    })?;
    out.write("l1c_curve.csv", |w| {
        writeln!(w, "{axis},{MAP_L1C_HEADER_PREFIX}")?;
        curve.iter().try_for_each(|(y, t)| match t {
            Some(t) => writeln!(w, "{y},{},{}", t.l1c, t.big_l1c),
            None => writeln!(w, "{y},,"),
        })
    })?;
    let persistent = lambdas.iter().filter(|&&l| l < 0.0).count();
    let summary = json!({
        "axis": axis,
        "cells": cells.len(),
        "persistent": persistent,
        "extinct": cells.len() - persistent,
    });
    out.json("persistence_map.json", &summary)?;
    Ok(out.finish(summary))
}

#[derive(serde::Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

/// Quick checks against closed forms and between independent methods.
/// Fails with exit code 4 when any check fails.
pub fn cmd_selftest(out: &Path) -> Result<Artifacts> {
    let mut checks = Vec::new();
    let mut push = |name, pass, detail: String| checks.push(Check { name, pass, detail });

    let mut worst = 0.0f64;
    for d in [0.25, 1.0, 4.0] {
        for m in [0.5, 1.0] {
            let ls = Landscape::homogeneous(1.0, 1.0, d)?;
            let opts = SpeedOptions {
                grid_check_nodes_per_patch: None,
                ..SpeedOptions::default()
            };
            let s = spreading_speed_with(&ls, &Reaction::logistic(m, m)?, &opts)?;
            worst = worst.max((s.c_star - 2.0 * (d * m).sqrt()).abs());
        }
    }
    push("homogeneous_speed", worst < 1e-8, format!("max |c* - 2 sqrt(dm)| = {worst:e}"));

    let ls = Landscape::new(2.0, 1.0, 1.0, 0.5, 0.4)?;
    let r = Reaction::logistic(1.0, -1.0)?;
    let a = lambda1_value(&ls, &r)?;
    let b = lambda_mu_value(&ls, &r, 0.0)?;
    let c = lambda1_grid_extrapolated(&ls, &r, 64)?;
    let gap = (a - b).abs().max((a - c).abs()).max((b - c).abs());
    push("eigen_cross_method", gap < 1e-6, format!("lambda1 {a}, max pairwise gap {gap:e}"));

    let ladder = [0.1, 0.3, 1.0, 3.0, 10.0]
        .iter()
        .map(|&s| lambda1_value(&Landscape::with_sigma(2.0, 1.0, 1.0, 0.5, s)?, &r))
        .collect::<std::result::Result<Vec<_>, Error>>()?;
    let increasing = ladder.windows(2).all(|w| w[1] > w[0]);
    push("sigma_monotone", increasing, format!("{ladder:?}"));

    let t = critical_patch_length(&ls, &r)?;
    let at = lambda1_value(&ls.with_l1(t.l1c)?, &r)?;
    push("critical_length_root", at.abs() < 1e-8, format!("lambda1(l1c = {}) = {at:e}", t.l1c));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let summary = json!({"checks": checks, "passed": failed.is_empty()});
    let mut out = Out::new(out)?;
    out.json("selftest.json", &summary)?;
    if !failed.is_empty() {
        return Err(CliError::CheckFailed(failed.join(", ")));
    }
    Ok(out.finish(summary))
}
