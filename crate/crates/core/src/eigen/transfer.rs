//! Drifted eigenvalue `lambda(mu)` by transfer matrices.
//!
//! Inside a patch, `-d psi'' + 2 d mu psi' - (d mu^2 + f'(0)) psi = lambda psi`
//! is the first-order system `(psi, psi')' = A (psi, psi')` with
//! `A = [[0, 1], [-c, 2 mu]]`, `c = (lambda + d mu^2 + f'(0)) / d`. Writing
//! `A = mu I + B` with `B = [[-mu, 1], [-c, mu]]` gives `B^2 = q I`,
//! `q = -(lambda + f'(0)) / d`, hence the exact propagator
//! `exp(A t) = e^{mu t} (cosh(sqrt(q) t) I + sinh(sqrt(q) t) / sqrt(q) B)`
//! (trigonometric for `q < 0`).
//!
//! Interface jumps. Continuity of `psi` and
//! `(-mu psi + psi')(x-) = sigma (-mu psi + psi')(x+)` at `S1` solve to
//! `psi'(x+) = mu (1 - 1/sigma) psi + psi'(x-) / sigma`, i.e.
//! `J1 = [[1, 0], [mu (1 - 1/sigma), 1/sigma]]`. At `S2`,
//! `sigma (-mu psi + psi')(x-) = (-mu psi + psi')(x+)` gives
//! `J2 = [[1, 0], [mu (1 - sigma), sigma]]`.
//!
//! Starting just right of the `S1` point 0, one period is
//! `M = J1 E1(l1) J2 E2(l2)` with `det M = e^{2 mu l}`. Writing
//! `M = e^{mu l} N`, `det(M - I) = e^{mu l} (2 cosh(mu l) - tr N)`, so the
//! scan works with `g = 2 cosh(mu l) - tr N`, which is negative below the
//! principal eigenvalue.
//!
//! `tr N` is the Hill discriminant of the undrifted problem, decreasing to 2
//! on `(-inf, lambda1]`. For `mu != 0` the principal root is therefore the
//! only root of `g` below `lambda1`, and `[floor, lambda1]` brackets it
//! without any positivity test. That matters for large `|mu| l`, where
//! sampling `psi` by forward propagation loses all accuracy.

use crate::error::{Error, Result};
use crate::landscape::{Landscape, PatchType, Reaction};
use crate::scalar::bisect;

type Mat = [[f64; 2]; 2];

fn mul(a: &Mat, b: &Mat) -> Mat {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn apply(a: &Mat, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// `cosh(sqrt(q) t)` and `sinh(sqrt(q) t) / sqrt(q)` for any real `q`.
fn cosh_sinhc(q: f64, t: f64) -> (f64, f64) {
    if q > 0.0 {
        let r = q.sqrt();
        ((r * t).cosh(), (r * t).sinh() / r)
    } else if q < 0.0 {
        let r = (-q).sqrt();
        ((r * t).cos(), (r * t).sin() / r)
    } else {
        (1.0, t)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TransferProblem {
    pub landscape: Landscape,
    pub f1: f64,
    pub f2: f64,
    pub mu: f64,
}

impl TransferProblem {
    pub fn new(landscape: &Landscape, reaction: &Reaction, mu: f64) -> Self {
        Self {
            landscape: *landscape,
            f1: reaction.f1_prime0,
            f2: reaction.f2_prime0,
            mu,
        }
    }

    fn coefficients(&self, patch: PatchType) -> (f64, f64) {
        match patch {
            PatchType::One => (self.landscape.d1, self.f1),
            PatchType::Two => (self.landscape.d2, self.f2),
        }
    }

    /// `e^{-mu t} exp(A t)` across a length `t` of `patch`.
    fn propagator(&self, patch: PatchType, lambda: f64, t: f64) -> Mat {
        let (d, fp) = self.coefficients(patch);
        let mu = self.mu;
        let c = (lambda + d * mu * mu + fp) / d;
        let q = -(lambda + fp) / d;
        let (ch, sh) = cosh_sinhc(q, t);
        [[ch - sh * mu, sh], [-sh * c, ch + sh * mu]]
    }

    fn jumps(&self) -> (Mat, Mat) {
        let (mu, s) = (self.mu, self.landscape.sigma);
        (
            [[1.0, 0.0], [mu * (1.0 - 1.0 / s), 1.0 / s]],
            [[1.0, 0.0], [mu * (1.0 - s), s]],
        )
    }

    /// Monodromy with the drift factor `e^{mu l}` removed.
    pub fn reduced_monodromy(&self, lambda: f64) -> Mat {
        let (j1, j2) = self.jumps();
        let e1 = self.propagator(PatchType::One, lambda, self.landscape.l1);
        let e2 = self.propagator(PatchType::Two, lambda, self.landscape.l2);
        mul(&j1, &mul(&e1, &mul(&j2, &e2)))
    }

    pub fn g(&self, lambda: f64) -> f64 {
        let n = self.reduced_monodromy(lambda);
        2.0 * (self.mu * self.landscape.period).cosh() - (n[0][0] + n[1][1])
    }

    /// Periodic solution `(psi, psi')(0+)` of `M v = v`, normalized to `psi(0) = 1`.
    fn fixed_vector(&self, lambda: f64) -> Option<[f64; 2]> {
        let n = self.reduced_monodromy(lambda);
        let e = (-self.mu * self.landscape.period).exp();
        let rows = [[n[0][0] - e, n[0][1]], [n[1][0], n[1][1] - e]];
        let norm = |r: &[f64; 2]| r[0].abs() + r[1].abs();
        let r = if norm(&rows[0]) >= norm(&rows[1]) { rows[0] } else { rows[1] };
        // Null vector of the rank-one row: (r1, -r0).
        let v = [r[1], -r[0]];
        if v[0].abs() <= 1e-14 * (v[0].abs() + v[1].abs()) {
            return None;
        }
        Some([1.0, v[1] / v[0]])
    }

    /// Samples `psi` on `[0, l2]` then `[l2, l]` (written at `x - l` in
    /// `[-l1, 0)`), `per_patch` points per patch. Positions and values.
    pub fn sample(&self, lambda: f64, per_patch: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let v0 = self.fixed_vector(lambda)?;
        let (_, j2) = self.jumps();
        let (l1, l2) = (self.landscape.l1, self.landscape.l2);
        let mut xs = Vec::with_capacity(2 * per_patch);
        let mut ps = Vec::with_capacity(2 * per_patch);
        let mu = self.mu;
        // Type-1 patch first, reached from the type-2 end state.
        let end2 = apply(&self.propagator(PatchType::Two, lambda, l2), v0);
        let start1 = apply(&j2, end2);
        for j in 0..per_patch {
            let t = l1 * j as f64 / per_patch as f64;
            let s = apply(&self.propagator(PatchType::One, lambda, t), start1);
            xs.push(-l1 + t);
            // Drift factor at x + l; psi itself is l-periodic.
            ps.push(s[0] * (mu * (l2 + t)).exp());
        }
        for j in 0..per_patch {
            let t = l2 * j as f64 / per_patch as f64;
            let s = apply(&self.propagator(PatchType::Two, lambda, t), v0);
            xs.push(t);
            ps.push(s[0] * (mu * t).exp());
        }
        Some((xs, ps))
    }
}

/// Result of the transfer-matrix root search.
pub(crate) struct TransferRoot {
    pub lambda: f64,
    pub positions: Vec<f64>,
    pub psi: Vec<f64>,
}

const POSITIVITY_SAMPLES: usize = 16;

pub(crate) fn bracket(landscape: &Landscape, reaction: &Reaction, mu: f64) -> (f64, f64) {
    let floor = -reaction.f1_prime0 - landscape.d_max() * mu * mu;
    let top = -reaction.f2_prime0 + 1.0;
    (floor, top)
}

fn scan(tp: &TransferProblem, lo: f64, hi: f64) -> Option<f64> {
    let steps = 20;
    let w = (hi - lo) / steps as f64;
    let mut a = lo;
    let mut ga = tp.g(a);
    for k in 1..=steps {
        let b = lo + k as f64 * w;
        let gb = tp.g(b);
        if ga == 0.0 || ga.signum() != gb.signum() {
            let root = bisect(|l| tp.g(l), a, b, 0.0)?;
            if let Some((_, ps)) = tp.sample(root, POSITIVITY_SAMPLES) {
                if ps.iter().all(|&p| p > 0.0) {
                    return Some(root);
                }
            }
        }
        a = b;
        ga = gb;
    }
    None
}

pub(crate) fn solve(landscape: &Landscape, reaction: &Reaction, mu: f64) -> Result<TransferRoot> {
    if !mu.is_finite() {
        return Err(Error::NonPositiveParameter { name: "mu (finite)", value: mu });
    }
    let tp = TransferProblem::new(landscape, reaction, mu);
    let (floor, top) = bracket(landscape, reaction, mu);
    // The floor itself can be the root (homogeneous media); start just below it.
    let margin = 1e-3 * (1.0 + (top - floor).abs());
    let lo = floor - margin;
    let bracketed = if mu != 0.0 {
        let lambda1 = scan_positive(&TransferProblem { mu: 0.0, ..tp }, lo, top)?;
        (tp.g(lo) < 0.0 && tp.g(lambda1) > 0.0)
            .then(|| bisect(|l| tp.g(l), lo, lambda1, 0.0))
            .flatten()
    } else {
        None
    };
    let lambda = match bracketed {
        Some(l) => l,
        // Tiny |mu|: g(lambda1) is lost in rounding, fall back to the scan.
        None => scan_positive(&tp, lo, top)?,
    };
    let (positions, mut psi) = tp.sample(lambda, 64).ok_or(Error::BranchSelectionFailed { lo, hi: top })?;
    let max = psi.iter().cloned().fold(f64::MIN, f64::max);
    psi.iter_mut().for_each(|p| *p /= max);
    Ok(TransferRoot { lambda, positions, psi })
}

/// First root with a positive sampled eigenfunction.
fn scan_positive(tp: &TransferProblem, lo: f64, top: f64) -> Result<f64> {
    scan(tp, lo, top)
        .or_else(|| {
            // Widen once.
            let w = top - lo;
            scan(tp, lo - w, top + w)
        })
        .ok_or(Error::BranchSelectionFailed { lo, hi: top })
}
