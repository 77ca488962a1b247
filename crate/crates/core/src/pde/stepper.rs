//! Time stepping of `u_t = G u + f(u)` with the interface and boundary
//! constraints imposed at every step.

use std::ops::ControlFlow;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::banded::BandedLu;
use crate::error::{Error, Result};
use crate::landscape::{continuous_to_physical, Landscape, NodeDensity, Reaction};

use super::grid::Grid;
use super::operator::Operator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Backward Euler, nonlinear system solved by Newton. Default.
    ImplicitEulerNewton,
    /// Backward Euler diffusion with the reaction taken explicitly.
    Imex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            scheme: Scheme::ImplicitEulerNewton,
            newton_tol: 1e-12,
            newton_max_iter: 25,
        }
    }
}

impl StepperConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }
}

/// Largest IMEX step: `0.5 / max |f_i'|` over `[0, kbar]`.
pub fn imex_dt_max(reaction: &Reaction, kbar: f64) -> f64 {
    let lip = reaction.lipschitz(kbar);
    if lip > 0.0 {
        0.5 / lip
    } else {
        f64::INFINITY
    }
}

/// Nodal values of the rescaled density at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub time: f64,
    pub values: Vec<f64>,
    pub grid: Arc<Grid>,
}

impl Field {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self {
            time: 0.0,
            values: vec![0.0; n],
            grid,
        }
    }

    /// Samples `u0` at the nodes; boundary nodes are set to 0.
    pub fn from_fn(grid: Arc<Grid>, u0: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for (i, &x) in grid.x.iter().enumerate() {
            let v = u0(x);
            if !v.is_finite() {
                return Err(Error::NegativeInitialData { x, value: v });
            }
            if v < 0.0 {
                return Err(Error::NegativeInitialData { x, value: v });
            }
            values.push(if grid.is_boundary(i) { 0.0 } else { v });
        }
        Ok(Self {
            time: 0.0,
            values,
            grid,
        })
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        assert_eq!(grid.len(), values.len());
        for (&x, &v) in grid.x.iter().zip(&values) {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::NegativeInitialData { x, value: v });
            }
        }
        Ok(Self {
            time: 0.0,
            values,
            grid,
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Physical density at each node (`None` at boundary nodes).
    pub fn physical(&self, landscape: &Landscape) -> Vec<Option<NodeDensity>> {
        self.values
            .iter()
            .zip(&self.grid.kinds)
            .map(|(&u, k)| k.tag().map(|t| continuous_to_physical(u, t, landscape)))
            .collect()
    }
}

/// A prepared solver for one grid; caches the assembled operator and, for
/// IMEX, the factored diffusion matrix.
pub struct Evolver {
    pub grid: Arc<Grid>,
    pub landscape: Landscape,
    pub reaction: Reaction,
    pub config: StepperConfig,
    op: Operator,
    imex: Option<(f64, BandedLu)>,
}

impl Evolver {
    pub fn new(grid: Arc<Grid>, landscape: &Landscape, reaction: &Reaction, config: StepperConfig) -> Result<Self> {
        if !(config.dt > 0.0) || !config.dt.is_finite() {
            return Err(Error::NonPositiveParameter { name: "dt", value: config.dt });
        }
        let op = Operator::assemble(&grid, landscape, 0.0);
        Ok(Self {
            grid,
            landscape: *landscape,
            reaction: reaction.clone(),
            config,
            op,
            imex: None,
        })
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    fn reaction_at(&self, i: usize, s: f64) -> f64 {
        self.op.reaction(&self.reaction, i, s)
    }

    fn reaction_slope_at(&self, i: usize, s: f64) -> f64 {
        self.op.reaction_slope(&self.reaction, i, s)
    }

    /// Advances `u` (at time `t`) by one step of length `dt`.
    pub fn step_values(&mut self, u: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
        let mut next = match self.config.scheme {
            Scheme::ImplicitEulerNewton => self.step_newton(u, t, dt)?,
            Scheme::Imex => self.step_imex(u, dt)?,
        };
        // The solve leaves roundoff on the Dirichlet rows.
        for i in 0..next.len() {
            if self.grid.is_boundary(i) {
                next[i] = 0.0;
            }
        }
        Ok(next)
    }

    fn step_newton(&self, u_old: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
        let n = u_old.len();
        let mut u = u_old.to_vec();
        let mut res = vec![0.0; n];
        let mut last = f64::INFINITY;
        for iter in 0..=self.config.newton_max_iter {
            let mut norm: f64 = 0.0;
            for i in 0..n {
                let gi = self.op.apply_row(i, &u);
                res[i] = if self.op.is_pde(i) {
                    u[i] - u_old[i] - dt * (gi + self.reaction_at(i, u[i]))
                } else {
                    gi
                };
                norm = norm.max(res[i].abs());
            }
            if !norm.is_finite() {
                return Err(Error::NewtonDiverged { t: t + dt, residual: norm });
            }
            if norm <= self.config.newton_tol {
                return Ok(u);
            }
            if iter == self.config.newton_max_iter {
                last = norm;
                break;
            }
            let jac = self
                .op
                .matrix(-dt, |i| 1.0 - dt * self.reaction_slope_at(i, u[i]))
                .factor()?;
            let mut delta = self.op.to_system(&res);
            jac.solve_in_place(&mut delta);
            let delta = self.op.from_system(&delta);
            let mut step: f64 = 0.0;
            for i in 0..n {
                u[i] -= delta[i];
                step = step.max(delta[i].abs());
            }
            last = norm;
            // With dt/h^2 large the residual floor from roundoff can sit
            // above the tolerance; a negligible update also counts.
            if step <= self.config.newton_tol {
                return Ok(u);
            }
        }
        Err(Error::NewtonDiverged { t: t + dt, residual: last })
    }

    fn step_imex(&mut self, u_old: &[f64], dt: f64) -> Result<Vec<f64>> {
        let kbar = self.reaction.max_cap().max(u_old.iter().fold(0.0, |m: f64, v| m.max(*v)));
        let dt_max = imex_dt_max(&self.reaction, kbar);
        if dt > dt_max * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dt, dt_max });
        }
        let stale = self.imex.as_ref().is_none_or(|(h, _)| (h - dt).abs() > 1e-15 * dt);
        if stale {
            let lu = self.op.matrix(-dt, |_| 1.0).factor()?;
            self.imex = Some((dt, lu));
        }
        let rhs: Vec<f64> = (0..u_old.len())
            .map(|i| {
                if self.op.is_pde(i) {
                    u_old[i] + dt * self.reaction_at(i, u_old[i])
                } else {
                    0.0
                }
            })
            .collect();
        let (_, lu) = self.imex.as_ref().expect("factored above");
        let mut x = self.op.to_system(&rhs);
        lu.solve_in_place(&mut x);
        Ok(self.op.from_system(&x))
    }

    pub fn step(&mut self, field: &Field) -> Result<Field> {
        let dt = self.config.dt;
        let values = self.step_values(&field.values, field.time, dt)?;
        Ok(Field {
            time: field.time + dt,
            values,
            grid: field.grid.clone(),
        })
    }

    /// Evolves to `field.time + horizon` with the step shrunk to divide the
    /// horizon evenly. The observer sees every intermediate field and may stop early.
    pub fn run(
        &mut self,
        field: &Field,
        horizon: f64,
        mut observer: impl FnMut(&Field) -> Result<ControlFlow<()>>,
    ) -> Result<Field> {
        let steps = steps_for(horizon, self.config.dt);
        let dt = if steps == 0 { 0.0 } else { horizon / steps as f64 };
        let mut cur = field.clone();
        let t0 = field.time;
        for s in 1..=steps {
            cur.values = self.step_values(&cur.values, cur.time, dt)?;
            cur.time = t0 + s as f64 * dt;
            if let ControlFlow::Break(()) = observer(&cur)? {
                break;
            }
        }
        Ok(cur)
    }

    /// Evolution with snapshots and the a priori bound
    /// `0 <= u <= max(K1, K2, |u0|_inf)` checked after every step.
    pub fn evolve(&mut self, field: &Field, horizon: f64, opts: &EvolveOptions) -> Result<Trajectory> {
        let bound = self.reaction.max_cap().max(field.sup_norm());
        let tol = opts.bound_tol * bound.max(1.0);
        let grid = field.grid.clone();
        let mut snapshots = vec![field.clone()];
        let mut next_snap = opts.snapshot_every.map(|s| field.time + s);
        let final_field = self.run(field, horizon, |f| {
            for (i, &v) in f.values.iter().enumerate() {
                if v < -tol || v > bound + tol || !v.is_finite() {
                    return Err(Error::BoundViolated {
                        t: f.time,
                        x: grid.x[i],
                        value: v,
                        bound,
                    });
                }
            }
            if let (Some(every), Some(next)) = (opts.snapshot_every, next_snap.as_mut()) {
                if f.time >= *next - 1e-9 * every {
                    snapshots.push(f.clone());
                    while *next <= f.time + 1e-9 * every {
                        *next += every;
                    }
                }
            }
            Ok(ControlFlow::Continue(()))
        })?;
        if snapshots.last().is_none_or(|s| s.time < final_field.time) {
            snapshots.push(final_field.clone());
        }
        Ok(Trajectory { snapshots, bound })
    }
}

pub(crate) fn steps_for(horizon: f64, dt: f64) -> usize {
    if horizon <= 0.0 {
        0
    } else {
        ((horizon / dt).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Snapshot spacing in time; `None` keeps only the initial and final fields.
    pub snapshot_every: Option<f64>,
    /// Relative slack on the a priori bound.
    pub bound_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            snapshot_every: None,
            bound_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Field>,
    /// The a priori bound `max(K1, K2, |u0|_inf)` that was enforced.
    pub bound: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Field {
        self.snapshots.last().expect("trajectory holds at least the initial field")
    }
}

/// Single step; convenience wrapper that assembles the operator each call.
pub fn step(field: &Field, landscape: &Landscape, reaction: &Reaction, config: &StepperConfig) -> Result<Field> {
    Evolver::new(field.grid.clone(), landscape, reaction, *config)?.step(field)
}

pub fn evolve(
    field: &Field,
    horizon: f64,
    landscape: &Landscape,
    reaction: &Reaction,
    config: &StepperConfig,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    Evolver::new(field.grid.clone(), landscape, reaction, *config)?.evolve(field, horizon, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn homogeneous() -> (Landscape, Reaction) {
        (Landscape::homogeneous(1.0, 1.0, 1.0).unwrap(), Reaction::logistic(1.0, 1.0).unwrap())
    }

    #[test]
    fn zero_is_fixed() {
        let (ls, r) = homogeneous();
        let g = Arc::new(Grid::truncated(&ls, 1, 8).unwrap());
        let f = Field::zeros(g);
        let out = step(&f, &ls, &r, &StepperConfig::default()).unwrap();
        assert!(out.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn carrying_capacity_is_steady_on_periodic_grid() {
        let (ls, r) = homogeneous();
        let g = Arc::new(Grid::periodic(&ls, 8).unwrap());
        let f = Field::from_fn(g, |_| 1.0).unwrap();
        let tr = evolve(&f, 2.0, &ls, &r, &StepperConfig::with_dt(0.1), &EvolveOptions::default()).unwrap();
        assert!(tr.last().values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn imex_rejects_large_steps() {
        let (ls, r) = homogeneous();
        let g = Arc::new(Grid::periodic(&ls, 8).unwrap());
        let f = Field::from_fn(g, |_| 0.5).unwrap();
        let cfg = StepperConfig {
            dt: 1.0,
            scheme: Scheme::Imex,
            ..StepperConfig::default()
        };
        assert!(matches!(step(&f, &ls, &r, &cfg), Err(Error::StepTooLarge { .. })));
        let cfg = StepperConfig { dt: 0.1, ..cfg };
        assert!(step(&f, &ls, &r, &cfg).is_ok());
    }

    #[test]
    fn negative_data_rejected() {
        let (ls, _) = homogeneous();
        let g = Arc::new(Grid::truncated(&ls, 1, 8).unwrap());
        assert!(matches!(
            Field::from_fn(g, |x| x),
            Err(Error::NegativeInitialData { .. })
        ));
    }
}
