//! Finite-difference solver for the truncated Cauchy problem on `[-n l, n l]`
//! and its periodic counterpart on one tile.

pub mod export;
pub mod grid;
pub mod operator;
pub mod semiflow;
pub mod stepper;

use std::sync::Arc;

pub use grid::{Grid, NodeKind};
pub use operator::Operator;
pub use semiflow::{assertion_nodes, Semiflow};
pub use stepper::{evolve, imex_dt_max, step, EvolveOptions, Evolver, Field, Scheme, StepperConfig, Trajectory};

use crate::error::{Error, Result};
use crate::landscape::Landscape;

pub fn build_grid(landscape: &Landscape, n_tiles: usize, nodes_per_patch: usize) -> Result<Grid> {
    Grid::truncated(landscape, n_tiles, nodes_per_patch)
}

/// The cut-off `delta^n`: 1 on `[-n l - eps + l2, n l - l1 + eps]`, 0
/// outside `(-n l, n l)`, affine in between, with `eps = min(l1, l2) / 4`.
pub fn cutoff(landscape: &Landscape, n: usize, x: f64) -> f64 {
    let nl = n as f64 * landscape.period;
    let eps = landscape.l1.min(landscape.l2) / 4.0;
    let a = -nl - eps + landscape.l2;
    let b = nl - landscape.l1 + eps;
    if x <= -nl || x >= nl {
        0.0
    } else if x < a {
        (x + nl) / (a + nl)
    } else if x > b {
        (nl - x) / (nl - b)
    } else {
        1.0
    }
}

/// Nodal samples of `delta^n u0` on `grid`.
pub fn apply_cutoff(u0: impl Fn(f64) -> f64, grid: Arc<Grid>, landscape: &Landscape, n: usize) -> Result<Field> {
    for &x in &grid.x {
        let v = u0(x);
        if !(v >= 0.0) {
            return Err(Error::NegativeInitialData { x, value: v });
        }
    }
    Field::from_fn(grid, |x| cutoff(landscape, n, x) * u0(x))
}
