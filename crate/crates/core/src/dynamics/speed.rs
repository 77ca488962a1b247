//! Spreading speed from the variational formula `c* = inf_{mu>0} -lambda(mu)/mu`.

use serde::Serialize;

use crate::eigen::{lambda1_value, lambda_mu_cross_checked, lambda_mu_value, CrossCheck};
use crate::error::{Error, Result};
use crate::landscape::{Landscape, Reaction};
use crate::scalar::golden_section;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedOptions {
    /// Start of the doubling search for a bracket.
    pub mu_start: f64,
    /// Width of the final golden-section bracket in `log mu`.
    pub log_tol: f64,
    /// Resolution of the grid cross-check at `mu*`; `None` skips it.
    pub grid_check_nodes_per_patch: Option<usize>,
    /// Log-spaced table points on `[mu*/20, 20 mu*]`.
    pub table_points: usize,
}

impl Default for SpeedOptions {
    fn default() -> Self {
        Self {
            mu_start: 1e-3,
            log_tol: 1e-10,
            grid_check_nodes_per_patch: Some(128),
            table_points: 81,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedSample {
    pub mu: f64,
    pub lambda: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedResult {
    pub c_star: f64,
    pub mu_star: f64,
    pub lambda_at_mu_star: f64,
    pub lambda1: f64,
    /// Minimum of `-lambda(-mu)/mu`, the leftward speed.
    pub c_star_left: f64,
    pub mu_star_left: f64,
    /// Central difference of `phi` at `mu*`.
    pub first_order_residual: f64,
    pub samples: Vec<SpeedSample>,
    /// Every `(mu, phi)` evaluated while doubling.
    pub bracket_history: Vec<(f64, f64)>,
    pub grid_check: Option<CrossCheck>,
}

/// Speeds of the two directions may differ by at most this before the
/// computation is rejected.
pub const SYMMETRY_TOL: f64 = 1e-8;

fn phi(landscape: &Landscape, reaction: &Reaction, mu: f64) -> Result<f64> {
    Ok(-lambda_mu_value(landscape, reaction, mu)? / mu)
}

struct Minimum {
    mu: f64,
    phi: f64,
    history: Vec<(f64, f64)>,
}

/// Minimizes `mu -> f(mu)` for `mu > 0` assuming quasi-convexity.
fn minimize(mut f: impl FnMut(f64) -> Result<f64>, opts: &SpeedOptions) -> Result<Minimum> {
    let mut history = Vec::new();
    let mut eval = |mu: f64, h: &mut Vec<(f64, f64)>| -> Result<f64> {
        let v = f(mu)?;
        h.push((mu, v));
        Ok(v)
    };
    let mut a = opts.mu_start;
    let mut fa = eval(a, &mut history)?;
    let mut b = 2.0 * a;
    let mut fb = eval(b, &mut history)?;
    // phi already rising at the start: walk down instead.
    while fb > fa {
        if a < 1e-12 {
            return Err(Error::BracketNotFound);
        }
        b = a;
        fb = fa;
        a *= 0.5;
        fa = eval(a, &mut history)?;
    }
    let mut c = 2.0 * b;
    let mut fc = eval(c, &mut history)?;
    while fc <= fb {
        if c > 1e8 || !fc.is_finite() {
            return Err(Error::BracketNotFound);
        }
        a = b;
        b = c;
        fb = fc;
        c *= 2.0;
        fc = eval(c, &mut history)?;
    }
    let mut failure = None;
    let (s, v) = golden_section(
        |s| match f(s.exp()) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        a.ln(),
        c.ln(),
        opts.log_tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Minimum {
        mu: s.exp(),
        phi: v,
        history,
    })
}

pub fn spreading_speed(landscape: &Landscape, reaction: &Reaction) -> Result<SpeedResult> {
    spreading_speed_with(landscape, reaction, &SpeedOptions::default())
}

pub fn spreading_speed_with(landscape: &Landscape, reaction: &Reaction, opts: &SpeedOptions) -> Result<SpeedResult> {
    let lambda1 = lambda1_value(landscape, reaction)?;
    if lambda1 >= 0.0 {
        return Err(Error::NotPersistent(lambda1));
    }
    let right = minimize(|mu| phi(landscape, reaction, mu), opts)?;
    let left = minimize(|mu| Ok(-lambda_mu_value(landscape, reaction, -mu)? / mu), opts)?;
    if (right.phi - left.phi).abs() > SYMMETRY_TOL * (1.0 + right.phi.abs()) {
        return Err(Error::MethodsDisagree {
            a: right.phi,
            b: left.phi,
            tol: SYMMETRY_TOL,
        });
    }
    let mu_star = right.mu;
    let lambda_at_mu_star = lambda_mu_value(landscape, reaction, mu_star)?;
    let h = 1e-4 * mu_star;
    let first_order_residual = (phi(landscape, reaction, mu_star + h)? - phi(landscape, reaction, mu_star - h)?) / (2.0 * h);

    let n = opts.table_points.max(2);
    let (lo, hi) = ((mu_star / 20.0).ln(), (mu_star * 20.0).ln());
    let samples = (0..n)
        .map(|i| {
            let mu = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
            let lambda = lambda_mu_value(landscape, reaction, mu)?;
            Ok(SpeedSample {
                mu,
                lambda,
                phi: -lambda / mu,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let grid_check = opts
        .grid_check_nodes_per_patch
        .map(|npp| lambda_mu_cross_checked(landscape, reaction, mu_star, npp))
        .transpose()?;

    Ok(SpeedResult {
        c_star: right.phi,
        mu_star,
        lambda_at_mu_star,
        lambda1,
        c_star_left: left.phi,
        mu_star_left: left.mu,
        first_order_residual,
        samples,
        bracket_history: right.history,
        grid_check,
    })
}

/// True when the discrete slope of `phi` changes sign at most once, from
/// negative to positive.
pub fn is_quasiconvex(samples: &[SpeedSample], tol: f64) -> bool {
    let mut rising = false;
    for w in samples.windows(2) {
        let d = w[1].phi - w[0].phi;
        if d > tol {
            rising = true;
        } else if d < -tol && rising {
            return false;
        }
    }
    true
}
