//! Fixtures and semiflow property checks shared by the property suites and
//! the acceptance run.

#![allow(dead_code)]

use std::sync::Arc;

use patchkpp::pde::{assertion_nodes, EvolveOptions, Evolver, Field, Grid, Semiflow, StepperConfig};
use patchkpp::{Landscape, Reaction};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError};

pub const SEED: u64 = 0x5eed_2026;

/// l1 = 2, l2 = 1, d1 = 1, d2 = 0.5, alpha = 0.4, logistic rates 1 and -1.
pub fn reference() -> (Landscape, Reaction) {
    (
        Landscape::new(2.0, 1.0, 1.0, 0.5, 0.4).unwrap(),
        Reaction::logistic(1.0, -1.0).unwrap(),
    )
}

pub fn fixed_config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..Config::default()
    }
}

/// Gaussian bump `height * exp(-((x - center) / width)^2)`.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

pub fn profile(bumps: &[Bump]) -> impl Fn(f64) -> f64 + '_ {
    move |x| {
        bumps
            .iter()
            .map(|b| b.height * (-((x - b.center) / b.width).powi(2)).exp())
            .sum()
    }
}

/// A random landscape, logistic reaction, smooth data and a horizon.
#[derive(Debug, Clone)]
pub struct Case {
    pub landscape: Landscape,
    pub reaction: Reaction,
    pub data: Vec<Bump>,
    /// Nonnegative perturbation for ordered / nearby pairs.
    pub extra: Vec<Bump>,
    pub t: f64,
}

fn bumps(n: std::ops::Range<usize>, max_height: f64) -> impl Strategy<Value = Vec<Bump>> {
    prop::collection::vec(
        (-2.0..2.0f64, 0.6..1.5f64, 0.0..max_height).prop_map(|(center, width, height)| Bump { center, width, height }),
        n,
    )
}

pub fn case_strategy() -> impl Strategy<Value = Case> {
    (
        (0.5..2.0f64, 0.5..2.0f64, 0.3..2.0f64, 0.3..2.0f64, 0.25..0.75f64),
        (0.5..2.0f64, -1.5..1.0f64),
        bumps(1..4, 1.2),
        bumps(1..3, 0.5),
        0.2..1.0f64,
    )
        .prop_map(|((l1, l2, d1, d2, alpha), (m1, m2), data, extra, t)| Case {
            landscape: Landscape::new(l1, l2, d1, d2, alpha).unwrap(),
            reaction: Reaction::logistic(m1, m2.min(m1)).unwrap(),
            data,
            extra,
            t,
        })
}

pub const NODES_PER_PATCH: usize = 8;
pub const DT: f64 = 0.02;
/// Assertion region around the support of the data.
pub const REGION: (f64, f64) = (-4.0, 4.0);

impl Case {
    pub fn semiflow(&self) -> Semiflow {
        Semiflow::new(&self.landscape, &self.reaction, StepperConfig::with_dt(DT), NODES_PER_PATCH)
    }

    /// Horizon rounded to a whole number of steps.
    pub fn horizon(&self) -> f64 {
        (self.t / DT).round().max(1.0) * DT
    }

    pub fn grid(&self) -> Arc<Grid> {
        self.semiflow().grid_for(REGION, self.horizon()).unwrap()
    }

    pub fn field(&self, grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Field {
        Field::from_fn(grid.clone(), f).unwrap()
    }

    /// Snapshots every 0.1 up to the horizon.
    pub fn trajectory(&self, start: &Field) -> Vec<Field> {
        let mut ev = Evolver::new(start.grid.clone(), &self.landscape, &self.reaction, StepperConfig::with_dt(DT)).unwrap();
        ev.evolve(
            start,
            self.horizon(),
            &EvolveOptions {
                snapshot_every: Some(0.1),
                ..EvolveOptions::default()
            },
        )
        .unwrap()
        .snapshots
    }

    pub fn final_state(&self, start: &Field, t: f64) -> Field {
        let mut ev = Evolver::new(start.grid.clone(), &self.landscape, &self.reaction, StepperConfig::with_dt(DT)).unwrap();
        ev.evolve(start, t, &EvolveOptions::default()).unwrap().last().clone()
    }
}

fn sup(a: &[f64], b: &[f64], nodes: &[usize]) -> f64 {
    nodes.iter().map(|&i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

/// Largest `u(t) - v(t)` over recorded times for data `u0 <= v0`.
pub fn comparison(c: &Case) -> f64 {
    let g = c.grid();
    let u0 = c.field(&g, profile(&c.data));
    let p = profile(&c.extra);
    let v0 = c.field(&g, |x| profile(&c.data)(x) + p(x));
    let (u, v) = (c.trajectory(&u0), c.trajectory(&v0));
    u.iter()
        .zip(&v)
        .flat_map(|(a, b)| a.values.iter().zip(&b.values).map(|(x, y)| x - y))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest interior value on the assertion region for all recorded `t >= 0.1`.
pub fn positivity(c: &Case) -> f64 {
    let g = c.grid();
    let u0 = c.field(&g, profile(&c.data));
    let nodes = assertion_nodes(&g, REGION);
    c.trajectory(&u0)
        .iter()
        .filter(|f| f.time >= 0.1 - 1e-12)
        .flat_map(|f| nodes.iter().map(move |&i| f.values[i]))
        .fold(f64::INFINITY, f64::min)
}

/// Excess of the solution over `[0, max(K1, K2, |u0|)]`.
pub fn global_bound(c: &Case) -> f64 {
    let g = c.grid();
    let u0 = c.field(&g, profile(&c.data));
    let bound = c.reaction.max_cap().max(u0.sup_norm());
    c.trajectory(&u0)
        .iter()
        .flat_map(|f| f.values.iter().map(|&v| (v - bound).max(-v)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest `gamma Q_t(w) - Q_t(gamma w)` over the given factors.
pub fn subhomogeneity(c: &Case, gammas: &[f64]) -> f64 {
    let g = c.grid();
    let t = c.horizon();
    let w = c.field(&g, profile(&c.data));
    let qw = c.final_state(&w, t);
    gammas
        .iter()
        .map(|&gamma| {
            let gw = c.field(&g, |x| gamma * profile(&c.data)(x));
            let qgw = c.final_state(&gw, t);
            qw.values
                .iter()
                .zip(&qgw.values)
                .map(|(a, b)| gamma * a - b)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `|Q_{t1 + t2} w - Q_{t1}(Q_{t2} w)|` on the assertion region; `t2` is
/// a whole number of steps.
pub fn composition(c: &Case) -> f64 {
    let g = c.grid();
    let t = c.horizon();
    let steps = (t / DT).round() as usize;
    let t2 = (steps / 2).max(1) as f64 * DT;
    let w = c.field(&g, profile(&c.data));
    let direct = c.final_state(&w, t);
    let half = c.final_state(&w, t2);
    let composed = c.final_state(&half, t - t2);
    sup(&direct.values, &composed.values, &assertion_nodes(&g, REGION))
}

/// `|Q_t(w(. + l)) - Q_t(w)(. + l)|` on the assertion region.
pub fn translation(c: &Case) -> f64 {
    let sf = c.semiflow();
    let l = c.landscape.period;
    let t = c.horizon();
    // Leave room for the shifted region inside the window.
    let region = (REGION.0 - l, REGION.1 + l);
    let g = sf.grid_for(region, t).unwrap();
    let w = c.field(&g, profile(&c.data));
    let ws = c.field(&g, |x| profile(&c.data)(x + l));
    let qw = c.final_state(&w, t);
    let qws = c.final_state(&ws, t);
    let shift = g.nodes_per_tile();
    assertion_nodes(&g, REGION)
        .into_iter()
        .map(|i| (qws.values[i] - qw.values[i + shift]).abs())
        .fold(0.0, f64::max)
}

/// `|u(t) - v(t)|_inf - 2 |u0 - v0|_inf e^{L t}` over recorded times.
pub fn lipschitz(c: &Case) -> f64 {
    let g = c.grid();
    let u0 = c.field(&g, profile(&c.data));
    let p = profile(&c.extra);
    // Signed perturbation, clipped to keep the data nonnegative.
    let v0 = c.field(&g, |x| (profile(&c.data)(x) + p(x) * (x * 1.3).sin()).max(0.0));
    let d0 = u0.values.iter().zip(&v0.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let kbar = c.reaction.max_cap().max(u0.sup_norm()).max(v0.sup_norm());
    let lip = c.reaction.lipschitz(kbar);
    let (u, v) = (c.trajectory(&u0), c.trajectory(&v0));
    u.iter()
        .zip(&v)
        .map(|(a, b)| {
            let d = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            d - 2.0 * d0 * (lip * a.time).exp()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Runs `check` on `cases` seeded cases and returns every metric seen,
/// or the failure report of the first case rejected by `ok`.
pub fn run_suite(cases: u32, check: impl Fn(&Case) -> f64, ok: impl Fn(f64) -> bool) -> Result<Vec<f64>, String> {
    let mut runner = proptest::test_runner::TestRunner::new(fixed_config(cases));
    let seen = std::cell::RefCell::new(Vec::new());
    runner
        .run(&case_strategy(), |c| {
            let m = check(&c);
            seen.borrow_mut().push(m);
            if ok(m) {
                Ok(())
            } else {
                Err(TestCaseError::fail(format!("metric {m:e} for {c:?}")))
            }
        })
        .map_err(|e| e.to_string())?;
    Ok(seen.into_inner())
}
