//! Grid eigenvalues by shifted inverse iteration on the pencil `(A, B)`,
//! where `A = -G - f'(0)` on patch rows, the interface and boundary rows are
//! constraints, and `B` is the identity on patch rows and zero elsewhere.

use crate::error::{Error, Result};
use crate::landscape::{Landscape, Reaction};
use crate::pde::grid::Grid;
use crate::pde::operator::Operator;

#[derive(Debug, Clone)]
pub struct GridEigenpair {
    pub lambda: f64,
    /// Sup-normalized, positive on non-boundary nodes.
    pub vector: Vec<f64>,
    /// Max residual of `(A - lambda B) v` over all rows.
    pub residual: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 2000;

/// Principal eigenpair nearest to `shift` for the drifted operator on `grid`.
pub fn inverse_iteration(
    grid: &Grid,
    landscape: &Landscape,
    reaction: &Reaction,
    mu: f64,
    shift: f64,
) -> Result<GridEigenpair> {
    let op = Operator::assemble(grid, landscape, mu);
    let n = grid.len();
    let fprime = |i: usize| op.reaction_prime0(reaction, i);
    let lu = op.matrix(-1.0, |i| -fprime(i) - shift).factor()?;
    let mut y: Vec<f64> = (0..n).map(|i| if grid.is_boundary(i) { 0.0 } else { 1.0 }).collect();
    let mut lambda = f64::NAN;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    let mut near = 0;
    for it in 1..=MAX_ITER {
        iterations = it;
        let by: Vec<f64> = (0..n).map(|i| if op.is_pde(i) { y[i] } else { 0.0 }).collect();
        let mut z = op.to_system(&by);
        lu.solve_in_place(&mut z);
        let z = op.from_system(&z);
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            if op.is_pde(i) {
                num += by[i] * by[i];
                den += by[i] * z[i];
            }
        }
        let est = shift + num / den;
        let scale = z
            .iter()
            .cloned()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::IterationDiverged { iterations: it, change });
        }
        let next: Vec<f64> = z
            .iter()
            .enumerate()
            .map(|(i, v)| if grid.is_boundary(i) { 0.0 } else { v / scale })
            .collect();
        let dv = next.iter().zip(&y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        change = (est - lambda).abs();
        y = next;
        lambda = est;
        if change <= 1e-14 * (1.0 + lambda.abs()) && dv <= 1e-11 {
            break;
        }
        // Fine meshes reach a roundoff floor above the strict tolerance.
        if change <= 1e-10 * (1.0 + lambda.abs()) {
            near += 1;
            if near >= 25 {
                break;
            }
        }
        if it == MAX_ITER {
            return Err(Error::IterationDiverged { iterations: it, change });
        }
    }
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in grid.interior() {
        min = min.min(y[i]);
        max = max.max(y[i]);
    }
    if !(min > 0.0) {
        return Err(Error::NonPositiveEigenvector { ratio: min / max });
    }
    let mut residual: f64 = 0.0;
    for i in 0..n {
        let ay = op.apply_row(i, &y);
        let r = if op.is_pde(i) { -ay - fprime(i) * y[i] - lambda * y[i] } else { ay };
        residual = residual.max(r.abs());
    }
    Ok(GridEigenpair {
        lambda,
        vector: y,
        residual,
        iterations,
    })
}

/// One mesh halving in `nodes_per_patch`: `h = l / (npp + 1)` halves when
/// `npp` becomes `2 npp + 1`.
pub fn refine(nodes_per_patch: usize) -> usize {
    2 * nodes_per_patch + 1
}

/// Richardson extrapolation `(4 fine - coarse) / 3` of a second-order quantity.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}
