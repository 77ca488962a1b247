mod common;

use std::sync::Arc;

use common::{reference, run_suite, Case};
use patchkpp::pde::{assertion_nodes, EvolveOptions, Evolver, Field, Grid, Semiflow, StepperConfig};
use patchkpp::{Landscape, Reaction};

fn homogeneous() -> (Landscape, Reaction) {
    (
        Landscape::homogeneous(1.0, 1.0, 1.0).unwrap(),
        Reaction::logistic(1.0, 1.0).unwrap(),
    )
}

fn run(grid: &Arc<Grid>, ls: &Landscape, r: &Reaction, u0: impl Fn(f64) -> f64, t: f64, dt: f64) -> Field {
    let field = Field::from_fn(grid.clone(), u0).unwrap();
    let mut ev = Evolver::new(grid.clone(), ls, r, StepperConfig::with_dt(dt)).unwrap();
    ev.evolve(&field, t, &EvolveOptions::default()).unwrap().last().clone()
}

#[test]
fn constant_data_follow_the_logistic_ode() {
    let (ls, r) = homogeneous();
    let grid = Arc::new(Grid::periodic(&ls, 4).unwrap());
    let u0 = 0.2;
    let e = 1f64.exp();
    let exact = u0 * e / (1.0 + u0 * (e - 1.0));
    // Backward Euler is first order: 4.9e-6 at dt = 1e-4, so use 1e-5.
    let end = run(&grid, &ls, &r, |_| u0, 1.0, 1e-5);
    for v in &end.values {
        assert!((v - exact).abs() < 1e-6, "{v} vs {exact}");
    }
}

#[test]
fn logistic_ode_error_is_first_order_in_dt() {
    let (ls, r) = homogeneous();
    let grid = Arc::new(Grid::periodic(&ls, 4).unwrap());
    let e = 1f64.exp();
    let exact = 0.2 * e / (1.0 + 0.2 * (e - 1.0));
    let err = |dt| (run(&grid, &ls, &r, |_| 0.2, 1.0, dt).values[0] - exact).abs();
    let (a, b) = (err(2e-4), err(1e-4));
    assert!(b < 1e-5 && (a / b - 2.0).abs() < 0.1, "{a} {b}");
}

#[test]
fn carrying_capacity_is_steady() {
    let (ls, r) = homogeneous();
    let grid = Arc::new(Grid::periodic(&ls, 8).unwrap());
    let end = run(&grid, &ls, &r, |_| 1.0, 2.0, 0.05);
    assert!(end.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn zero_stays_zero() {
    let (ls, r) = reference();
    let grid = Arc::new(Grid::truncated(&ls, 2, 8).unwrap());
    let end = run(&grid, &ls, &r, |_| 0.0, 1.0, 0.1);
    assert!(end.values.iter().all(|&v| v == 0.0));
}

#[test]
fn wider_windows_give_larger_solutions() {
    let (ls, r) = reference();
    let bump = |x: f64| 0.6 * (1.0 - (x / 2.0).powi(2)).max(0.0);
    let small = Arc::new(Grid::truncated(&ls, 4, 8).unwrap());
    let large = Arc::new(Grid::truncated(&ls, 6, 8).unwrap());
    let a = run(&small, &ls, &r, bump, 5.0, 0.02);
    let b = run(&large, &ls, &r, bump, 5.0, 0.02);
    for (i, &x) in small.x.iter().enumerate() {
        let j = large.find(x, 1e-9).unwrap();
        assert!(a.values[i] <= b.values[j] + 1e-12, "x = {x}: {} > {}", a.values[i], b.values[j]);
    }
}

#[test]
fn periodic_data_stay_periodic_away_from_the_ends() {
    let (ls, r) = reference();
    let l = ls.period;
    let t = 1.0;
    let sf = Semiflow::new(&ls, &r, StepperConfig::with_dt(0.02), 8);
    let region = (-2.0 * l, 2.0 * l);
    let grid = sf.grid_for(region, t).unwrap();
    let u0 = |x: f64| 0.5 + 0.3 * (2.0 * std::f64::consts::PI * x / l).sin();
    let end = run(&grid, &ls, &r, u0, t, 0.02);
    let shift = grid.nodes_per_tile();
    let gap = assertion_nodes(&grid, (-2.0 * l, l))
        .into_iter()
        .map(|i| (end.values[i + shift] - end.values[i]).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-10, "{gap}");
}

#[test]
fn distinct_ordered_data_become_strictly_ordered() {
    let res = run_suite(
        24,
        |c: &Case| {
            let g = c.grid();
            let u0 = c.field(&g, common::profile(&c.data));
            let p = common::profile(&c.extra);
            let v0 = c.field(&g, |x| common::profile(&c.data)(x) + p(x) + 1e-3);
            let (u, v) = (c.final_state(&u0, c.horizon()), c.final_state(&v0, c.horizon()));
            assertion_nodes(&g, common::REGION)
                .into_iter()
                .map(|i| v.values[i] - u.values[i])
                .fold(f64::INFINITY, f64::min)
        },
        |m| m > 0.0,
    );
    assert!(res.is_ok(), "{}", res.unwrap_err());
}

#[test]
fn boundary_values_stay_zero() {
    let (ls, r) = reference();
    let grid = Arc::new(Grid::truncated(&ls, 2, 8).unwrap());
    let end = run(&grid, &ls, &r, |x| (1.0 - (x / 3.0).powi(2)).max(0.0), 1.0, 0.05);
    assert_eq!(end.values[0], 0.0);
    assert_eq!(*end.values.last().unwrap(), 0.0);
}
