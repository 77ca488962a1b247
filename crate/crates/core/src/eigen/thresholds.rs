//! Persistence thresholds of source-sink landscapes (`f1'(0) > 0 > f2'(0)`).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::landscape::{Landscape, Reaction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// Critical favorable-patch length: `lambda1 >= 0` iff `l1 <= l1c`.
    pub l1c: f64,
    /// Limit of `l1c` as `l2 -> inf`.
    pub big_l1c: f64,
    /// Critical sink rate for the supplied `l1`; `None` when
    /// `sqrt(f1'(0)/d1) l1 / 2 >= pi / 2`, where no sink rate can cause extinction.
    pub f2_critical: Option<f64>,
}

/// `l1c` depends on `l2`, `d1`, `d2`, `sigma` and the growth rates; the
/// landscape's `l1` only enters the critical sink rate.
pub fn critical_patch_length(landscape: &Landscape, reaction: &Reaction) -> Result<Thresholds> {
    let (f1, f2) = (reaction.f1_prime0, reaction.f2_prime0);
    if !(f1 > 0.0 && f2 < 0.0) {
        return Err(Error::NotSourceSink { f1, f2 });
    }
    let Landscape { d1, d2, sigma, l1, l2, .. } = *landscape;
    let pre = 2.0 * (d1 / f1).sqrt();
    let inner = sigma * (-d1 * f2 / (d2 * f1)).sqrt();
    let l1c = pre * (inner * ((-f2 / d2).sqrt() * l2 / 2.0).tanh()).atan();
    let big_l1c = pre * inner.atan();
    let arg = (f1 / d1).sqrt() * l1 / 2.0;
    let f2_critical = (arg < std::f64::consts::FRAC_PI_2).then(|| -(d2 * f1 / (sigma * sigma * d1)) * arg.tan().powi(2));
    Ok(Thresholds {
        l1c,
        big_l1c,
        f2_critical,
    })
}
