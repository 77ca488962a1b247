//! Quasi-periodicity of the late-time front: a pulsating wave satisfies
//! `u(t + l / c, x + l) = u(t, x)`.

use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::landscape::{Landscape, Reaction};
use crate::pde::{Evolver, Field, StepperConfig};
use crate::scalar::fit_line;

use super::front::{level_crossings, measure_front_speed, setup, SimParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulsatingOptions {
    /// Number of late check times `t_j`.
    pub checks: usize,
    /// Half-width of the assertion window around the right front.
    pub window: f64,
    /// Slack in the time-monotonicity test.
    pub monotone_slack: f64,
}

impl Default for PulsatingOptions {
    fn default() -> Self {
        Self {
            checks: 4,
            window: 3.0,
            monotone_slack: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectSample {
    pub t: f64,
    pub front: f64,
    /// `max |u(t + T_p, x + l) - u(t, x)|` over the window around the front.
    pub defect: f64,
    /// `max (u(t, x) - u(t + T_p, x))^+` over nodes behind the front.
    pub monotone_violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PulsatingReport {
    pub c_fit: f64,
    pub t_period: f64,
    pub samples: Vec<DefectSample>,
    pub max_defect: f64,
    pub p_sup: f64,
    /// `max_defect / p_sup`.
    pub relative_defect: f64,
    pub max_monotone_violation: f64,
    pub monotone: bool,
}

pub fn pulsating_wave_check(
    landscape: &Landscape,
    reaction: &Reaction,
    params: &SimParams,
    opts: &PulsatingOptions,
) -> Result<PulsatingReport> {
    let trace = measure_front_speed(landscape, reaction, params)?;
    let l = landscape.period;
    let horizon = params.horizon;
    // Refit over the late stretch that contains the checks.
    let rough_period = l / trace.c_fit_right;
    let periods = 2.0 + 0.5 * opts.checks.saturating_sub(1) as f64;
    let span = periods * rough_period;
    if !(trace.c_fit_right > 0.0) || span >= horizon - trace.t_transient {
        return Err(Error::NoCrossingFound(format!(
            "front too slow for {periods} periods after t = {}",
            trace.t_transient
        )));
    }
    let start = horizon - span;
    let (t, x): (Vec<f64>, Vec<f64>) = trace
        .times
        .iter()
        .zip(&trace.right)
        .filter_map(|(&t, r)| (t >= start).then_some((t, (*r)?)))
        .unzip();
    let c_fit = fit_line(&t, &x).ok_or_else(|| Error::NoCrossingFound("no late crossings".into()))?.slope;
    let t_period = l / c_fit;
    // Check times spaced half a period apart, the last one a period before T.
    let mut targets = Vec::new();
    for j in (0..opts.checks).rev() {
        let tj = horizon - t_period * (1.0 + 0.5 * j as f64);
        targets.push(tj);
        targets.push(tj + t_period);
    }
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]));

    let s = setup(landscape, reaction, params)?;
    let config = StepperConfig {
        dt: params.dt,
        scheme: params.scheme,
        ..StepperConfig::default()
    };
    let mut ev = Evolver::new(s.grid.clone(), landscape, reaction, config)?;
    let mut states: Vec<Option<Field>> = vec![None; targets.len()];
    let mut cur = s.field.clone();
    for &k in &order {
        let seg = targets[k] - cur.time;
        if seg > 0.0 {
            cur = ev.run(&cur, seg, |_| Ok(ControlFlow::Continue(())))?;
        }
        states[k] = Some(cur.clone());
    }

    let grid = &s.grid;
    let shift = grid.nodes_per_tile();
    let n = grid.len();
    let mut samples = Vec::new();
    for j in 0..opts.checks {
        let a = states[2 * j].as_ref().expect("all targets reached");
        let b = states[2 * j + 1].as_ref().expect("all targets reached");
        let (front, _) = level_crossings(grid, &a.values, s.level)
            .ok_or_else(|| Error::NoCrossingFound(format!("no front at t = {}", a.time)))?;
        let mut defect: f64 = 0.0;
        let mut violation: f64 = 0.0;
        for i in 0..n {
            let x = grid.x[i];
            if (x - front).abs() <= opts.window && i + shift < n {
                defect = defect.max((b.values[i + shift] - a.values[i]).abs());
            }
            if x >= 0.0 && x <= front - l {
                violation = violation.max(a.values[i] - b.values[i]);
            }
        }
        samples.push(DefectSample {
            t: a.time,
            front,
            defect,
            monotone_violation: violation,
        });
    }
    let max_defect = samples.iter().map(|s| s.defect).fold(0.0, f64::max);
    let max_monotone_violation = samples.iter().map(|s| s.monotone_violation).fold(0.0, f64::max);
    let p_sup = s.steady.max_p;
    Ok(PulsatingReport {
        c_fit,
        t_period,
        samples,
        max_defect,
        p_sup,
        relative_defect: max_defect / p_sup,
        max_monotone_violation,
        monotone: max_monotone_violation <= opts.monotone_slack,
    })
}
