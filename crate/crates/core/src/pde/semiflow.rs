//! The solution map `Q_t` on the whole line, realized on a truncated window
//! wide enough that the Dirichlet ends do not reach the assertion region.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::landscape::{Landscape, Reaction};

use super::grid::Grid;
use super::stepper::{EvolveOptions, Evolver, Field, StepperConfig};

#[derive(Debug, Clone)]
pub struct Semiflow {
    pub landscape: Landscape,
    pub reaction: Reaction,
    pub config: StepperConfig,
    pub nodes_per_patch: usize,
    /// Target size of boundary effects at the assertion region.
    pub boundary_tol: f64,
}

impl Semiflow {
    pub fn new(landscape: &Landscape, reaction: &Reaction, config: StepperConfig, nodes_per_patch: usize) -> Self {
        Self {
            landscape: *landscape,
            reaction: reaction.clone(),
            config,
            nodes_per_patch,
            boundary_tol: 1e-12,
        }
    }

    /// Margin beyond the assertion region: at least `4 sqrt(d t) + 2 l`,
    /// widened so that a Gaussian tail amplified by `e^{L t}` stays below
    /// `boundary_tol`.
    pub fn margin(&self, t: f64) -> f64 {
        let d = self.landscape.d_max();
        let l = self.landscape.period;
        let lip = self.reaction.lipschitz(self.reaction.max_cap());
        let spec = 4.0 * (d * t).sqrt() + 2.0 * l;
        let tail = (4.0 * d * t * ((1.0 / self.boundary_tol).ln() + lip * t)).sqrt() + 2.0 * l;
        spec.max(tail)
    }

    /// Smallest truncation index whose window covers `region` plus the margin.
    pub fn tiles_for(&self, region: (f64, f64), t: f64) -> usize {
        let reach = region.0.abs().max(region.1.abs()) + self.margin(t);
        ((reach / self.landscape.period).ceil() as usize).max(1)
    }

    pub fn grid_for(&self, region: (f64, f64), t: f64) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::truncated(&self.landscape, self.tiles_for(region, t), self.nodes_per_patch)?))
    }

    /// `Q_t(omega)` sampled on `grid`; fails if the grid is narrower than
    /// the margin requires for `region`.
    pub fn apply_on(&self, grid: Arc<Grid>, omega: &Field, t: f64, region: (f64, f64)) -> Result<Field> {
        let need = self.tiles_for(region, t);
        if grid.n_tiles < need {
            return Err(Error::WindowTooSmall(format!(
                "assertion region [{}, {}] at t = {t} needs n_tiles >= {need}, grid has {}",
                region.0, region.1, grid.n_tiles
            )));
        }
        let mut ev = Evolver::new(grid, &self.landscape, &self.reaction, self.config)?;
        Ok(ev.evolve(omega, t, &EvolveOptions::default())?.last().clone())
    }

    /// `Q_t(omega)` for an initial profile given as a function.
    pub fn apply(&self, omega: impl Fn(f64) -> f64, t: f64, region: (f64, f64)) -> Result<Field> {
        let grid = self.grid_for(region, t)?;
        let field = Field::from_fn(grid.clone(), omega)?;
        self.apply_on(grid, &field, t, region)
    }
}

/// Nodes of `grid` inside `region`.
pub fn assertion_nodes(grid: &Grid, region: (f64, f64)) -> Vec<usize> {
    (0..grid.len())
        .filter(|&i| !grid.is_boundary(i) && grid.x[i] >= region.0 - 1e-12 && grid.x[i] <= region.1 + 1e-12)
        .collect()
}
