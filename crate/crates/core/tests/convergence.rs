//! Mesh and step halving on cases with closed-form answers.

use std::f64::consts::PI;
use std::sync::Arc;

use patchkpp::eigen::{lambda1_grid, lambda_dirichlet, refine};
use patchkpp::pde::{EvolveOptions, Evolver, Field, Grid, Scheme, StepperConfig};
use patchkpp::{Landscape, Reaction};

const LOW: f64 = 3.2;
const HIGH: f64 = 4.8;

fn assert_ratios(errs: &[f64], lo: f64, hi: f64) {
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!(r > lo && r < hi, "ratio {r} from {errs:?}");
    }
}

/// Homogeneous medium `d = 1` on `[-R, R]` with `R = 2`, started from the
/// first Dirichlet mode at a tiny amplitude so that `f(u) = u (1 - u)` is
/// linear to roundoff. Grid nodes sample the mode exactly, so only the
/// eigenvalue of the discrete Laplacian and the time stepping differ.
struct Mode {
    landscape: Landscape,
    reaction: Reaction,
    amplitude: f64,
    radius: f64,
}

impl Mode {
    fn new() -> Self {
        Self {
            landscape: Landscape::homogeneous(0.5, 0.5, 1.0).unwrap(),
            reaction: Reaction::logistic(1.0, 1.0).unwrap(),
            amplitude: 1e-9,
            radius: 2.0,
        }
    }

    /// Growth rate of the continuous mode.
    fn rate(&self) -> f64 {
        1.0 - (PI / (2.0 * self.radius)).powi(2)
    }

    /// Growth rate of the discrete mode at spacing `h`.
    fn discrete_rate(&self, h: f64) -> f64 {
        1.0 - (2.0 / h * (PI * h / (4.0 * self.radius)).sin()).powi(2)
    }

    /// Numerical solution at time `t`, divided by the initial mode, at `x = 0`.
    fn growth(&self, npp: usize, dt: f64, scheme: Scheme, t: f64) -> (f64, f64) {
        let grid = Arc::new(Grid::truncated(&self.landscape, 2, npp).unwrap());
        let k = PI / (2.0 * self.radius);
        let field = Field::from_fn(grid.clone(), |x| self.amplitude * (k * x).cos().max(0.0)).unwrap();
        let config = StepperConfig {
            dt,
            scheme,
            ..StepperConfig::default()
        };
        let mut ev = Evolver::new(grid.clone(), &self.landscape, &self.reaction, config).unwrap();
        let end = ev.evolve(&field, t, &EvolveOptions::default()).unwrap();
        let mid = grid.find(0.0, 1e-12).unwrap();
        (end.last().values[mid] / self.amplitude, grid.h1)
    }
}

#[test]
fn solver_is_second_order_in_space() {
    let m = Mode::new();
    let (t, dt) = (0.5f64, 0.01f64);
    let steps = (t / dt).round() as i32;
    let mut errs = Vec::new();
    let mut npp = 7;
    for _ in 0..4 {
        let (g, h) = m.growth(npp, dt, Scheme::ImplicitEulerNewton, t);
        // Backward Euler with the exact rate isolates the spatial error.
        let reference = (1.0 - dt * m.rate()).powi(-steps);
        errs.push((g - reference).abs());
        assert!((g - (1.0 - dt * m.discrete_rate(h)).powi(-steps)).abs() < 1e-6);
        npp = refine(npp);
    }
    assert_ratios(&errs, LOW, HIGH);
}

#[test]
fn solver_is_first_order_in_time() {
    let m = Mode::new();
    let t = 0.5;
    for scheme in [Scheme::ImplicitEulerNewton, Scheme::Imex] {
        let mut errs = Vec::new();
        for dt in [0.04, 0.02, 0.01, 0.005] {
            let (g, h) = m.growth(15, dt, scheme, t);
            errs.push((g - (m.discrete_rate(h) * t).exp()).abs());
        }
        assert_ratios(&errs, 1.6, 2.4);
    }
}

#[test]
fn heterogeneous_solutions_converge_at_second_order() {
    // Differences of successive meshes on the nodes shared by all of them.
    let ls = Landscape::new(2.0, 1.0, 1.0, 0.5, 0.4).unwrap();
    let r = Reaction::logistic(1.0, -1.0).unwrap();
    let u0 = |x: f64| 0.8 * (-(x / 1.5).powi(2)).exp();
    let mut npp = 7;
    let mut solutions = Vec::new();
    for _ in 0..4 {
        let grid = Arc::new(Grid::truncated(&ls, 3, npp).unwrap());
        let field = Field::from_fn(grid.clone(), u0).unwrap();
        let mut ev = Evolver::new(grid.clone(), &ls, &r, StepperConfig::with_dt(0.01)).unwrap();
        solutions.push(ev.evolve(&field, 0.5, &EvolveOptions::default()).unwrap().last().clone());
        npp = refine(npp);
    }
    let coarse = solutions[0].grid.clone();
    let at = |f: &Field, x: f64| f.values[f.grid.find(x, 1e-9).unwrap()];
    let diffs: Vec<f64> = solutions
        .windows(2)
        .map(|w| coarse.x.iter().map(|&x| (at(&w[0], x) - at(&w[1], x)).abs()).fold(0.0, f64::max))
        .collect();
    assert_ratios(&diffs, LOW, HIGH);
}

#[test]
fn dirichlet_eigenvalue_is_second_order() {
    let ls = Landscape::homogeneous(0.5, 0.5, 1.0).unwrap();
    let r = Reaction::logistic(1.0, 1.0).unwrap();
    let radius = 3.0;
    let exact = PI * PI / (4.0 * radius * radius) - 1.0;
    let mut npp = 8;
    let mut errs = Vec::new();
    for _ in 0..4 {
        errs.push((lambda_dirichlet(&ls, &r, radius, 0.0, npp).unwrap().lambda - exact).abs());
        npp = refine(npp);
    }
    assert_ratios(&errs, LOW, HIGH);
}

#[test]
fn drifted_grid_eigenvalue_is_second_order() {
    // Against the transfer-matrix value, which is exact up to root finding.
    use patchkpp::eigen::{lambda_mu, lambda_mu_value, MuMethod};
    let ls = Landscape::new(2.0, 1.0, 1.0, 0.5, 0.4).unwrap();
    let r = Reaction::logistic(1.0, -1.0).unwrap();
    let mu = 0.7;
    let exact = lambda_mu_value(&ls, &r, mu).unwrap();
    let mut npp = 16;
    let mut errs = Vec::new();
    for _ in 0..4 {
        let s = lambda_mu(&ls, &r, mu, MuMethod::Grid { nodes_per_patch: npp }).unwrap();
        errs.push((s.lambda_mu - exact).abs());
        npp = refine(npp);
    }
    assert_ratios(&errs, LOW, HIGH);
}

#[test]
fn periodic_grid_eigenvalue_is_second_order() {
    let ls = Landscape::new(2.0, 1.0, 1.0, 0.5, 0.4).unwrap();
    let r = Reaction::logistic(1.0, -1.0).unwrap();
    let exact = patchkpp::eigen::lambda1_value(&ls, &r).unwrap();
    let mut npp = 16;
    let mut errs = Vec::new();
    for _ in 0..4 {
        errs.push((lambda1_grid(&ls, &r, npp).unwrap().lambda - exact).abs());
        npp = refine(npp);
    }
    assert_ratios(&errs, LOW, HIGH);
}
