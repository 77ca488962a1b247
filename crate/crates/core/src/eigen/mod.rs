//! Principal eigenvalues: the periodic problem, Dirichlet problems on
//! bounded windows, and the drifted family `lambda(mu)`.

pub mod dispersion;
pub mod grid_eigen;
pub mod thresholds;
pub mod transfer;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{Landscape, Reaction};
use crate::pde::grid::Grid;

pub use dispersion::{dispersion_gap, lambda1_dispersion, lambda1_value};
pub use grid_eigen::{inverse_iteration, refine, richardson, GridEigenpair};
pub use thresholds::{critical_patch_length, Thresholds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    DispersionRoot,
    TransferMatrix,
    GridDiscretization,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub lambda: f64,
    pub positions: Vec<f64>,
    /// Sup-normalized samples at `positions`.
    pub eigenfunction: Vec<f64>,
    pub method: Method,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuFamilySample {
    pub mu: f64,
    pub lambda_mu: f64,
    pub positions: Vec<f64>,
    pub psi: Vec<f64>,
    pub method: Method,
}

/// How to evaluate `lambda(mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuMethod {
    TransferMatrix,
    Grid { nodes_per_patch: usize },
}

/// Shift below the spectrum of `L_mu`: `-max(f1', f2') - d_max mu^2 - 1`.
pub fn spectral_floor_shift(landscape: &Landscape, reaction: &Reaction, mu: f64) -> f64 {
    -reaction.max_prime0() - landscape.d_max() * mu * mu - 1.0
}

fn check_resolution(nodes_per_patch: usize) -> Result<()> {
    if nodes_per_patch < 8 {
        return Err(Error::ResolutionTooCoarse(format!(
            "eigen grids need nodes_per_patch >= 8, got {nodes_per_patch}"
        )));
    }
    Ok(())
}

fn grid_result(grid: &Grid, pair: GridEigenpair) -> EigenResult {
    EigenResult {
        lambda: pair.lambda,
        positions: grid.x.clone(),
        eigenfunction: pair.vector,
        method: Method::GridDiscretization,
        residual: pair.residual,
    }
}

/// Periodic principal eigenvalue of the discretized problem on one tile.
pub fn lambda1_grid(landscape: &Landscape, reaction: &Reaction, nodes_per_patch: usize) -> Result<EigenResult> {
    check_resolution(nodes_per_patch)?;
    let grid = Grid::periodic(landscape, nodes_per_patch)?;
    let pair = inverse_iteration(&grid, landscape, reaction, 0.0, spectral_floor_shift(landscape, reaction, 0.0))?;
    Ok(grid_result(&grid, pair))
}

/// Richardson-extrapolated grid eigenvalue from `npp` and its halving.
pub fn lambda1_grid_extrapolated(landscape: &Landscape, reaction: &Reaction, nodes_per_patch: usize) -> Result<f64> {
    let coarse = lambda1_grid(landscape, reaction, nodes_per_patch)?.lambda;
    let fine = lambda1_grid(landscape, reaction, refine(nodes_per_patch))?.lambda;
    Ok(richardson(coarse, fine))
}

pub fn lambda_mu(landscape: &Landscape, reaction: &Reaction, mu: f64, method: MuMethod) -> Result<MuFamilySample> {
    match method {
        MuMethod::TransferMatrix => {
            let root = transfer::solve(landscape, reaction, mu)?;
            Ok(MuFamilySample {
                mu,
                lambda_mu: root.lambda,
                positions: root.positions,
                psi: root.psi,
                method: Method::TransferMatrix,
            })
        }
        MuMethod::Grid { nodes_per_patch } => {
            check_resolution(nodes_per_patch)?;
            let grid = Grid::periodic(landscape, nodes_per_patch)?;
            let shift = spectral_floor_shift(landscape, reaction, mu);
            let pair = inverse_iteration(&grid, landscape, reaction, mu, shift)?;
            Ok(MuFamilySample {
                mu,
                lambda_mu: pair.lambda,
                positions: grid.x.clone(),
                psi: pair.vector,
                method: Method::GridDiscretization,
            })
        }
    }
}

/// Transfer-matrix `lambda(mu)` only; the hot path of the speed minimization.
pub fn lambda_mu_value(landscape: &Landscape, reaction: &Reaction, mu: f64) -> Result<f64> {
    Ok(transfer::solve(landscape, reaction, mu)?.lambda)
}

/// Richardson-extrapolated grid value of `lambda(mu)`.
pub fn lambda_mu_grid_extrapolated(
    landscape: &Landscape,
    reaction: &Reaction,
    mu: f64,
    nodes_per_patch: usize,
) -> Result<f64> {
    let coarse = lambda_mu(landscape, reaction, mu, MuMethod::Grid { nodes_per_patch })?.lambda_mu;
    let fine = lambda_mu(
        landscape,
        reaction,
        mu,
        MuMethod::Grid {
            nodes_per_patch: refine(nodes_per_patch),
        },
    )?
    .lambda_mu;
    Ok(richardson(coarse, fine))
}

/// Agreement gate between the transfer-matrix and extrapolated grid values.
pub const CROSS_METHOD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossCheck {
    pub transfer: f64,
    pub grid_extrapolated: f64,
}

/// Both methods at `mu`; `MethodsDisagree` beyond [`CROSS_METHOD_TOL`].
pub fn lambda_mu_cross_checked(
    landscape: &Landscape,
    reaction: &Reaction,
    mu: f64,
    nodes_per_patch: usize,
) -> Result<CrossCheck> {
    let transfer = lambda_mu_value(landscape, reaction, mu)?;
    let grid_extrapolated = lambda_mu_grid_extrapolated(landscape, reaction, mu, nodes_per_patch)?;
    if (transfer - grid_extrapolated).abs() > CROSS_METHOD_TOL {
        return Err(Error::MethodsDisagree {
            a: transfer,
            b: grid_extrapolated,
            tol: CROSS_METHOD_TOL,
        });
    }
    Ok(CrossCheck {
        transfer,
        grid_extrapolated,
    })
}

/// Dirichlet principal eigenvalue `lambda^y_R` on `(-R, R)` for the
/// coefficients shifted by `y`, i.e. the window `[y - R, y + R]` of the landscape.
///
/// The shift sits just below the periodic grid eigenvalue at the same
/// resolution, which lies below the Dirichlet one; this keeps inverse
/// iteration fast even when `lambda_R - lambda1` is tiny for large `R`.
pub fn lambda_dirichlet(
    landscape: &Landscape,
    reaction: &Reaction,
    radius: f64,
    y_shift: f64,
    nodes_per_patch: usize,
) -> Result<EigenResult> {
    if !(radius > 0.0) {
        return Err(Error::NonPositiveParameter { name: "R", value: radius });
    }
    check_resolution(nodes_per_patch)?;
    let periodic = lambda1_grid(landscape, reaction, nodes_per_patch)?.lambda;
    let shift = periodic - 1e-6 * (1.0 + periodic.abs());
    let grid = Grid::interval(landscape, y_shift - radius, y_shift + radius, nodes_per_patch)?;
    let pair = inverse_iteration(&grid, landscape, reaction, 0.0, shift)?;
    let mut res = grid_result(&grid, pair);
    // Report positions in the shifted frame (-R, R).
    res.positions.iter_mut().for_each(|x| *x -= y_shift);
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (Landscape, Reaction) {
        (
            Landscape::new(2.0, 1.0, 1.0, 0.5, 0.4).unwrap(),
            Reaction::logistic(1.0, -1.0).unwrap(),
        )
    }

    #[test]
    fn grid_agrees_with_dispersion() {
        let (ls, r) = reference();
        let exact = lambda1_value(&ls, &r).unwrap();
        let g = lambda1_grid_extrapolated(&ls, &r, 64).unwrap();
        assert!((g - exact).abs() < 1e-6, "{g} vs {exact}");
    }

    #[test]
    fn transfer_matches_dispersion_at_zero_drift() {
        let (ls, r) = reference();
        let exact = lambda1_value(&ls, &r).unwrap();
        let t = lambda_mu_value(&ls, &r, 0.0).unwrap();
        assert!((t - exact).abs() < 1e-10, "{t} vs {exact}");
    }

    #[test]
    fn drifted_methods_agree() {
        let (ls, r) = reference();
        let c = lambda_mu_cross_checked(&ls, &r, 0.7, 64).unwrap();
        assert!((c.transfer - c.grid_extrapolated).abs() < 1e-6);
    }

    #[test]
    fn dirichlet_above_periodic() {
        let (ls, r) = reference();
        let l1 = lambda1_value(&ls, &r).unwrap();
        let d = lambda_dirichlet(&ls, &r, 3.0, 0.0, 16).unwrap();
        assert!(d.lambda > l1);
        assert!(d.eigenfunction[0] == 0.0);
    }

    #[test]
    fn coarse_eigen_grid_rejected() {
        let (ls, r) = reference();
        assert!(matches!(lambda1_grid(&ls, &r, 4), Err(Error::ResolutionTooCoarse(_))));
    }
}
