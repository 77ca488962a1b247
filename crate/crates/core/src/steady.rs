//! Periodic positive steady state, extinction detection, and the checks
//! that the long-time dynamics select it.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::eigen::{inverse_iteration, lambda1_value, spectral_floor_shift};
use crate::error::{Error, Result};
use crate::landscape::{Landscape, Reaction};
use crate::pde::grid::Grid;
use crate::pde::operator::Operator;
use crate::pde::stepper::{EvolveOptions, Evolver, Field, StepperConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyOptions {
    pub nodes_per_patch: usize,
    /// Backward Euler step of the march; large steps are fine since only the fixed point matters.
    pub dt: f64,
    /// Stop marching once `|u(t + dt) - u(t)|_inf` drops below this.
    pub change_tol: f64,
    /// Sup-norm below which the population counts as extinct.
    pub extinction_tol: f64,
    /// First marching horizon; doubled on each retry up to `max_horizon`.
    pub horizon: f64,
    pub max_horizon: f64,
    pub newton_tol: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            nodes_per_patch: 32,
            dt: 0.5,
            change_tol: 1e-10,
            extinction_tol: 1e-8,
            horizon: 200.0,
            max_horizon: 2e5,
            newton_tol: 1e-12,
        }
    }
}

pub const PROFILE_HEADER: &str = "x,p,patch_type";

/// `|lambda1|` below this flags the verdict as unreliable.
pub const NEAR_CRITICAL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct SteadyState {
    pub exists: bool,
    pub positions: Vec<f64>,
    /// Empty when extinct.
    pub p: Vec<f64>,
    /// 1, 2 inside patches, 0 at interfaces.
    pub patch_type: Vec<u8>,
    /// Max residual of the discrete elliptic problem including both interface rows.
    pub residual: f64,
    pub min_p: f64,
    pub max_p: f64,
    pub lambda1: f64,
    pub near_critical: bool,
    /// Time marched before the verdict.
    pub march_time: f64,
    #[serde(skip)]
    pub grid: Arc<Grid>,
}

/// Residual of `G u + f(u) = 0`; Dirichlet rows give the boundary value.
pub fn elliptic_residual(op: &Operator, reaction: &Reaction, u: &[f64]) -> Vec<f64> {
    (0..u.len())
        .map(|i| {
            let g = op.apply_row(i, u);
            g + op.reaction(reaction, i, u[i])
        })
        .collect()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Newton's method on the discrete elliptic problem.
pub fn newton_polish(op: &Operator, reaction: &Reaction, mut u: Vec<f64>, tol: f64) -> Result<(Vec<f64>, f64)> {
    let mut res = elliptic_residual(op, reaction, &u);
    for _ in 0..50 {
        let r = sup(&res);
        if r <= tol {
            return Ok((u, r));
        }
        let jac = op
            .matrix(1.0, |i| op.reaction_slope(reaction, i, u[i]))
            .factor()?;
        let mut delta = op.to_system(&res);
        jac.solve_in_place(&mut delta);
        let delta = op.from_system(&delta);
        let mut step: f64 = 0.0;
        for (ui, di) in u.iter_mut().zip(&delta) {
            *ui -= di;
            step = step.max(di.abs());
        }
        res = elliptic_residual(op, reaction, &u);
        if step <= 1e-15 * (1.0 + sup(&u)) {
            break;
        }
    }
    let r = sup(&res);
    if r <= tol.max(1e-10) {
        Ok((u, r))
    } else {
        Err(Error::ConvergenceStalled { steps: 50, change: r })
    }
}

enum MarchEnd {
    Converged,
    Extinct,
}

struct March {
    u: Vec<f64>,
    time: f64,
    end: MarchEnd,
    /// Largest violation of monotonicity in time, upward and downward.
    max_increase: f64,
    max_decrease: f64,
}

fn march(ev: &mut Evolver, u0: Vec<f64>, opts: &SteadyOptions) -> Result<March> {
    let mut u = u0;
    let mut t = 0.0;
    let mut limit = opts.horizon;
    let (mut max_increase, mut max_decrease) = (0.0f64, 0.0f64);
    loop {
        while t < limit {
            let next = ev.step_values(&u, t, opts.dt)?;
            let mut change: f64 = 0.0;
            for (a, b) in next.iter().zip(&u) {
                let d = a - b;
                change = change.max(d.abs());
                max_increase = max_increase.max(d);
                max_decrease = max_decrease.max(-d);
            }
            u = next;
            t += opts.dt;
            if sup(&u) < opts.extinction_tol {
                return Ok(March { u, time: t, end: MarchEnd::Extinct, max_increase, max_decrease });
            }
            if change < opts.change_tol {
                return Ok(March { u, time: t, end: MarchEnd::Converged, max_increase, max_decrease });
            }
        }
        if limit >= opts.max_horizon {
            return Err(Error::ConvergenceStalled {
                steps: (t / opts.dt).round() as usize,
                change: sup(&u),
            });
        }
        limit = (2.0 * limit).min(opts.max_horizon);
    }
}

fn evolver(grid: &Arc<Grid>, landscape: &Landscape, reaction: &Reaction, opts: &SteadyOptions) -> Result<Evolver> {
    Evolver::new(
        grid.clone(),
        landscape,
        reaction,
        StepperConfig {
            dt: opts.dt,
            newton_tol: 1e-13,
            ..StepperConfig::default()
        },
    )
}

/// Polishes a converged march and classifies it as positive or extinct.
fn finish(op: &Operator, reaction: &Reaction, m: March, opts: &SteadyOptions) -> Result<Option<(Vec<f64>, f64)>> {
    match m.end {
        MarchEnd::Extinct => Ok(None),
        MarchEnd::Converged => {
            if sup(&m.u) < 1e3 * opts.extinction_tol {
                return Ok(None);
            }
            let (p, r) = newton_polish(op, reaction, m.u, opts.newton_tol)?;
            if sup(&p) < opts.extinction_tol {
                Ok(None)
            } else {
                Ok(Some((p, r)))
            }
        }
    }
}

impl SteadyState {
    /// One period of `p`; an extinct state writes only the header.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "{PROFILE_HEADER}")?;
        for (i, p) in self.p.iter().enumerate() {
            writeln!(out, "{},{},{}", self.positions[i], p, self.patch_type[i])?;
        }
        Ok(())
    }
}

pub fn compute_steady_state(landscape: &Landscape, reaction: &Reaction, opts: &SteadyOptions) -> Result<SteadyState> {
    let lambda1 = lambda1_value(landscape, reaction)?;
    let near_critical = lambda1.abs() < NEAR_CRITICAL;
    let grid = Arc::new(Grid::periodic(landscape, opts.nodes_per_patch)?);
    let mut ev = evolver(&grid, landscape, reaction, opts)?;
    let m0 = reaction.max_cap();
    let m = march(&mut ev, vec![m0; grid.len()], opts)?;
    let march_time = m.time;
    let outcome = finish(ev.operator(), reaction, m, opts)?;
    if !near_critical {
        let inconsistent = match &outcome {
            Some(_) => lambda1 >= 0.0,
            None => lambda1 < 0.0,
        };
        if inconsistent {
            return Err(Error::EigenInconsistent {
                lambda1,
                observed: if outcome.is_some() { "positive steady state" } else { "extinction" }.to_string(),
            });
        }
    }
    let patch_type = grid.kinds.iter().map(|k| k.patch_code()).collect();
    Ok(match outcome {
        Some((p, residual)) => {
            let min_p = p.iter().cloned().fold(f64::INFINITY, f64::min);
            let max_p = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            SteadyState {
                exists: true,
                positions: grid.x.clone(),
                p,
                patch_type,
                residual,
                min_p,
                max_p,
                lambda1,
                near_critical,
                march_time,
                grid,
            }
        }
        None => SteadyState {
            exists: false,
            positions: grid.x.clone(),
            p: Vec::new(),
            patch_type,
            residual: 0.0,
            min_p: 0.0,
            max_p: 0.0,
            lambda1,
            near_critical,
            march_time,
            grid,
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    /// Sup distance of each limit (small multiple of the eigenfunction, constant `M`, random) to `p`.
    pub gaps: [f64; 3],
    pub max_gap: f64,
    pub kappa: f64,
    /// Largest upward step seen when starting from `M` (should be ~0).
    pub increase_from_above: f64,
    /// Largest downward step seen when starting from `kappa phi` (should be ~0).
    pub decrease_from_below: f64,
    pub monotone_from_above: bool,
    pub monotone_from_below: bool,
}

/// Tolerance on the agreement of the three limits.
pub const UNIQUENESS_TOL: f64 = 1e-7;
/// Slack on the monotone-in-time checks.
pub const MONOTONE_TOL: f64 = 1e-10;

/// Largest `kappa = M / 2^j` with `G(kappa phi) + f(kappa phi) >= 0` on all
/// patch rows, given the discrete eigenpair `(lambda_h, phi)`.
fn subsolution_scale(op: &Operator, reaction: &Reaction, lambda_h: f64, phi: &[f64]) -> f64 {
    let mut kappa = reaction.max_cap();
    for _ in 0..200 {
        let ok = (0..phi.len()).all(|i| {
            let s = kappa * phi[i];
            !op.is_pde(i) || -(lambda_h + op.reaction_prime0(reaction, i)) * s + op.reaction(reaction, i, s) >= 0.0
        });
        if ok {
            return kappa;
        }
        kappa *= 0.5;
    }
    kappa
}

pub fn verify_uniqueness(
    steady: &SteadyState,
    landscape: &Landscape,
    reaction: &Reaction,
    opts: &SteadyOptions,
    seed: u64,
) -> Result<UniquenessReport> {
    if !steady.exists {
        return Err(Error::NotPersistent(steady.lambda1));
    }
    let grid = steady.grid.clone();
    let mut ev = evolver(&grid, landscape, reaction, opts)?;
    let n = grid.len();
    let pair = inverse_iteration(&grid, landscape, reaction, 0.0, spectral_floor_shift(landscape, reaction, 0.0))?;
    let kappa = subsolution_scale(ev.operator(), reaction, pair.lambda, &pair.vector);
    let m0 = reaction.max_cap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = landscape.period;
    let modes: Vec<(f64, f64, f64)> = (1..=4)
        .map(|k| (k as f64, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let random: Vec<f64> = grid
        .x
        .iter()
        .map(|&x| {
            let wave: f64 = modes
                .iter()
                .map(|&(k, a, ph)| a * (std::f64::consts::TAU * k * x / l + ph).sin())
                .sum::<f64>()
                / 4.0;
            m0 * (0.55 + 0.4 * wave)
        })
        .collect();

    let starts = [
        pair.vector.iter().map(|v| kappa * v).collect::<Vec<_>>(),
        vec![m0; n],
        random,
    ];
    let mut gaps = [0.0; 3];
    let mut increase_from_above = 0.0;
    let mut decrease_from_below = 0.0;
    for (k, u0) in starts.into_iter().enumerate() {
        let m = march(&mut ev, u0, opts)?;
        if k == 0 {
            decrease_from_below = m.max_decrease;
        }
        if k == 1 {
            increase_from_above = m.max_increase;
        }
        let gap = match finish(ev.operator(), reaction, m, opts)? {
            Some((p, _)) => p.iter().zip(&steady.p).fold(0.0f64, |g, (a, b)| g.max((a - b).abs())),
            None => steady.max_p,
        };
        gaps[k] = gap;
    }
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    if max_gap > UNIQUENESS_TOL {
        return Err(Error::NonUniqueLimit { gap: max_gap });
    }
    Ok(UniquenessReport {
        gaps,
        max_gap,
        kappa,
        increase_from_above,
        decrease_from_below,
        monotone_from_above: increase_from_above <= MONOTONE_TOL,
        monotone_from_below: decrease_from_below <= MONOTONE_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttractionOptions {
    pub n_tiles: usize,
    pub nodes_per_patch: usize,
    pub dt: f64,
    /// Half-width of the assertion region `|x| <= region`.
    pub region: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AttractionTarget {
    SteadyState,
    Zero,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractionReport {
    pub target: AttractionTarget,
    pub lambda1: f64,
    pub horizon: f64,
    pub region: f64,
    /// Sup distance to the target on the assertion region at the horizon.
    pub distance: f64,
    /// Sup norm of the solution over the whole window at the horizon.
    pub sup_norm: f64,
}

/// Steady profile `p` sampled at the nodes of a truncated grid built from
/// full tiles with the same resolution as `steady.grid`.
pub fn tile_values(steady: &SteadyState, landscape: &Landscape, grid: &Grid) -> Vec<f64> {
    let per = &steady.grid;
    grid.x
        .iter()
        .map(|&x| {
            let y = x - landscape.period * ((x + landscape.l1) / landscape.period).floor();
            let tol = 1e-9 * landscape.period;
            let idx = per.find(y, tol).or_else(|| {
                // `y` just below `l2` wraps to the node at `-l1`.
                (y > landscape.l2 - tol).then_some(0)
            });
            match idx {
                Some(i) => steady.p.get(i).copied().unwrap_or(0.0),
                None => {
                    // Not a node of the periodic grid: interpolate linearly.
                    let j = per.x.partition_point(|&v| v < y);
                    let (a, b) = (j - 1, j % per.len());
                    let xa = per.x[a];
                    let xb = if b == 0 { landscape.l2 } else { per.x[b] };
                    let w = (y - xa) / (xb - xa);
                    let pa = steady.p.get(a).copied().unwrap_or(0.0);
                    let pb = steady.p.get(b).copied().unwrap_or(0.0);
                    (1.0 - w) * pa + w * pb
                }
            }
        })
        .collect()
}

pub fn attraction_check(
    landscape: &Landscape,
    reaction: &Reaction,
    u0: impl Fn(f64) -> f64,
    horizon: f64,
    opts: &AttractionOptions,
) -> Result<AttractionReport> {
    let steady = compute_steady_state(
        landscape,
        reaction,
        &SteadyOptions {
            nodes_per_patch: opts.nodes_per_patch,
            ..SteadyOptions::default()
        },
    )?;
    let grid = Arc::new(Grid::truncated(landscape, opts.n_tiles, opts.nodes_per_patch)?);
    let field = Field::from_fn(grid.clone(), u0)?;
    let mut ev = Evolver::new(grid.clone(), landscape, reaction, StepperConfig::with_dt(opts.dt))?;
    let end = ev.evolve(&field, horizon, &EvolveOptions::default())?;
    let last = end.last();
    let target = if steady.exists { tile_values(&steady, landscape, &grid) } else { vec![0.0; grid.len()] };
    let distance = (0..grid.len())
        .filter(|&i| grid.x[i].abs() <= opts.region + 1e-12)
        .map(|i| (last.values[i] - target[i]).abs())
        .fold(0.0, f64::max);
    Ok(AttractionReport {
        target: if steady.exists { AttractionTarget::SteadyState } else { AttractionTarget::Zero },
        lambda1: steady.lambda1,
        horizon,
        region: opts.region,
        distance,
        sup_norm: last.sup_norm(),
    })
}
