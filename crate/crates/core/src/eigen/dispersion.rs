//! Closed-form periodic principal eigenvalue.
//!
//! With `a = sqrt((f1'(0) + lambda) / d1)` and `b = sqrt(-(lambda + f2'(0)) / d2)`
//! the symmetric eigenfunction is `cos(a (x + l1/2))` on the type-1 patch
//! `[-l1, 0]` and a multiple of `cosh(b (x - l2/2))` on `[0, l2]`; matching
//! value and flux at the interfaces gives
//! `a tan(a l1 / 2) = sigma b tanh(b l2 / 2)`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::landscape::{Landscape, Reaction};
use crate::scalar::bisect;

use super::{EigenResult, Method};

/// Left side minus right side of the dispersion relation, with the tan
/// argument held on its principal branch.
pub fn dispersion_gap(landscape: &Landscape, f1: f64, f2: f64, lambda: f64) -> f64 {
    let a = ((f1 + lambda) / landscape.d1).max(0.0).sqrt();
    let b = (-(lambda + f2) / landscape.d2).max(0.0).sqrt();
    let arg = (a * landscape.l1 / 2.0).min(FRAC_PI_2 - 1e-12);
    a * arg.tan() - landscape.sigma * b * (b * landscape.l2 / 2.0).tanh()
}

/// Smallest root of the dispersion relation in `[-f1'(0), -f2'(0)]`.
pub fn lambda1_value(landscape: &Landscape, reaction: &Reaction) -> Result<f64> {
    let (f1, f2) = (reaction.f1_prime0, reaction.f2_prime0);
    if !(f1.is_finite() && f2.is_finite()) {
        return Err(Error::DegenerateRates(format!("f1'(0) = {f1}, f2'(0) = {f2}")));
    }
    if f1 < f2 {
        return Err(Error::DegenerateRates(format!(
            "f1'(0) = {f1} < f2'(0) = {f2}; relabel the patches"
        )));
    }
    if f1 == f2 {
        return Ok(-f1);
    }
    let lo = -f1;
    let pole = -f1 + landscape.d1 * (std::f64::consts::PI / landscape.l1).powi(2);
    let hi = (-f2).min(pole);
    bisect(|lam| dispersion_gap(landscape, f1, f2, lam), lo, hi, 0.0).ok_or(Error::NoRootInBracket {
        what: "dispersion relation",
        lo,
        hi,
    })
}

/// Eigenfunction of the periodic problem at `x` (any real), sup-normalized.
pub fn eigenfunction(landscape: &Landscape, reaction: &Reaction, lambda: f64, x: f64) -> f64 {
    let (f1, f2) = (reaction.f1_prime0, reaction.f2_prime0);
    if f1 == f2 {
        return 1.0;
    }
    let a = ((f1 + lambda) / landscape.d1).max(0.0).sqrt();
    let b = (-(lambda + f2) / landscape.d2).max(0.0).sqrt();
    let (l1, l2) = (landscape.l1, landscape.l2);
    // Reduce to [-l1, l2).
    let y = x - landscape.period * ((x + l1) / landscape.period).floor();
    if y <= 0.0 {
        (a * (y + l1 / 2.0)).cos()
    } else {
        let ratio = (a * l1 / 2.0).cos() / (b * l2 / 2.0).cosh();
        ratio * (b * (y - l2 / 2.0)).cosh()
    }
}

/// Derivative of [`eigenfunction`] from the left (`side < 0`) or right.
fn eigenfunction_slope(landscape: &Landscape, reaction: &Reaction, lambda: f64, y: f64, side: f64) -> f64 {
    let (f1, f2) = (reaction.f1_prime0, reaction.f2_prime0);
    let a = ((f1 + lambda) / landscape.d1).max(0.0).sqrt();
    let b = (-(lambda + f2) / landscape.d2).max(0.0).sqrt();
    let (l1, l2) = (landscape.l1, landscape.l2);
    let in_one = if y == 0.0 { side < 0.0 } else { y < 0.0 };
    if in_one {
        -a * (a * (y + l1 / 2.0)).sin()
    } else {
        let ratio = (a * l1 / 2.0).cos() / (b * l2 / 2.0).cosh();
        ratio * b * (b * (y - l2 / 2.0)).sinh()
    }
}

/// Samples per patch for the reconstructed eigenfunction.
const SAMPLES_PER_PATCH: usize = 64;

pub fn lambda1_dispersion(landscape: &Landscape, reaction: &Reaction) -> Result<EigenResult> {
    let lambda = lambda1_value(landscape, reaction)?;
    let (l1, l2) = (landscape.l1, landscape.l2);
    let n = 2 * SAMPLES_PER_PATCH;
    let mut positions = Vec::with_capacity(n);
    for j in 0..SAMPLES_PER_PATCH {
        positions.push(-l1 + l1 * j as f64 / SAMPLES_PER_PATCH as f64);
    }
    for j in 0..SAMPLES_PER_PATCH {
        positions.push(l2 * j as f64 / SAMPLES_PER_PATCH as f64);
    }
    let eigenfunction: Vec<f64> = positions
        .iter()
        .map(|&x| eigenfunction(landscape, reaction, lambda, x))
        .collect();
    let residual = if reaction.f1_prime0 == reaction.f2_prime0 {
        0.0
    } else {
        let sigma = landscape.sigma;
        let s1 = eigenfunction_slope(landscape, reaction, lambda, 0.0, -1.0)
            - sigma * eigenfunction_slope(landscape, reaction, lambda, 0.0, 1.0);
        let s2 = sigma * eigenfunction_slope(landscape, reaction, lambda, l2, -1.0)
            - eigenfunction_slope(landscape, reaction, lambda, -l1, 1.0);
        s1.abs().max(s2.abs())
    };
    Ok(EigenResult {
        lambda,
        positions,
        eigenfunction,
        method: Method::DispersionRoot,
        residual,
    })
}
