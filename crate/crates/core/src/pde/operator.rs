//! Discrete spatial operator `G u = d u'' - 2 d mu u' + d mu^2 u` on patch
//! nodes, with interface rows and Dirichlet boundary rows.
//!
//! With drift `mu = 0` this is the diffusion part of the evolution problem.
//! Nonzero `mu` gives the conjugated operator `-L_mu - f'(0)` used by the
//! drifted eigenproblem, whose interface conditions read
//! `(u'(x-) - mu u) = sigma (u'(x+) - mu u)` at `S1` and
//! `sigma (u'(x-) - mu u) = (u'(x+) - mu u)` at `S2`.
//!
//! With weights `rho_1 = 1`, `rho_2 = sigma d1 / d2` both conditions say the
//! weighted flux `rho d (u' - mu u)` is continuous, and `rho G u` is the
//! divergence `(rho d q)' - rho d mu q` of that flux, `q = u' - mu u`. An
//! interface node therefore gets a control-volume row: flux balance over
//! the two half cells around it, divided by their weighted length
//! `(rho_L h_L + rho_R h_R) / 2`. The row is an M-matrix row for `mu = 0`,
//! which keeps the evolution positive and order preserving, and has
//! second-order global accuracy although its local truncation error is
//! first order.

use crate::banded::BandedMatrix;
use crate::landscape::{InterfaceKind, Landscape, PatchType, Reaction};

use super::grid::{Grid, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowKind {
    /// Evolution/eigen equation row. The reaction is `w f1 + (1 - w) f2`
    /// with `w` the type-1 share of the control volume: 1 or 0 inside a
    /// patch, in between at an interface.
    Pde { one: f64 },
    /// Dirichlet row; right-hand side 0.
    Constraint,
}

#[derive(Debug, Clone)]
pub struct Operator {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub kinds: Vec<RowKind>,
    /// Node index to position in the banded system.
    perm: Vec<usize>,
    kl: usize,
    ku: usize,
}

impl Operator {
    pub fn assemble(grid: &Grid, landscape: &Landscape, mu: f64) -> Self {
        let n = grid.len();
        let sigma = landscape.sigma;
        let mut rows = Vec::with_capacity(n);
        let mut kinds = Vec::with_capacity(n);
        for i in 0..n {
            match grid.kinds[i] {
                NodeKind::Boundary => {
                    rows.push(vec![(i, 1.0)]);
                    kinds.push(RowKind::Constraint);
                }
                NodeKind::Patch(p) => {
                    let d = landscape.diffusivity(p);
                    let h = grid.h_left(i);
                    let (a, b) = (d / (h * h), d * mu / h);
                    rows.push(vec![
                        (grid.left(i), a + b),
                        (i, -2.0 * a + d * mu * mu),
                        (grid.right(i), a - b),
                    ]);
                    kinds.push(RowKind::Pde {
                        one: if p == PatchType::One { 1.0 } else { 0.0 },
                    });
                }
                NodeKind::Interface(kind) => {
                    let (pl, pr) = match kind {
                        InterfaceKind::S1 => (PatchType::One, PatchType::Two),
                        InterfaceKind::S2 => (PatchType::Two, PatchType::One),
                    };
                    let rho = |p| match p {
                        PatchType::One => 1.0,
                        PatchType::Two => sigma * landscape.d1 / landscape.d2,
                    };
                    let (hl, hr) = (grid.h_left(i), grid.h_right(i));
                    let (cl, cr) = (rho(pl) * landscape.diffusivity(pl), rho(pr) * landscape.diffusivity(pr));
                    let (vl, vr) = (0.5 * rho(pl) * hl, 0.5 * rho(pr) * hr);
                    let vol = vl + vr;
                    // Midpoint fluxes, each scaled by the drift correction of its half cell.
                    let (sl, sr) = ((1.0 + 0.5 * mu * hl) / vol, (1.0 - 0.5 * mu * hr) / vol);
                    let row = vec![
                        (grid.left(i), sl * cl * (1.0 / hl + 0.5 * mu)),
                        (
                            i,
                            -sl * cl * (1.0 / hl - 0.5 * mu) - sr * cr * (1.0 / hr + 0.5 * mu),
                        ),
                        (grid.right(i), sr * cr * (1.0 / hr - 0.5 * mu)),
                    ];
                    rows.push(row);
                    let left_one = if pl == PatchType::One { vl } else { vr };
                    kinds.push(RowKind::Pde { one: left_one / vol });
                }
            }
        }
        let perm = if grid.periodic { fold_permutation(n) } else { (0..n).collect() };
        let (mut kl, mut ku) = (0, 0);
        for (i, row) in rows.iter().enumerate() {
            for &(j, _) in row {
                let (r, c) = (perm[i], perm[j]);
                if c < r {
                    kl = kl.max(r - c);
                } else {
                    ku = ku.max(c - r);
                }
            }
        }
        Self {
            rows,
            kinds,
            perm,
            kl,
            ku,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_pde(&self, i: usize) -> bool {
        matches!(self.kinds[i], RowKind::Pde { .. })
    }

    fn mix(&self, i: usize, g: impl Fn(PatchType) -> f64) -> f64 {
        match self.kinds[i] {
            RowKind::Constraint => 0.0,
            RowKind::Pde { one: 1.0 } => g(PatchType::One),
            RowKind::Pde { one: 0.0 } => g(PatchType::Two),
            RowKind::Pde { one } => one * g(PatchType::One) + (1.0 - one) * g(PatchType::Two),
        }
    }

    /// Reaction term of row `i` at value `s`; 0 on Dirichlet rows.
    pub fn reaction(&self, r: &Reaction, i: usize, s: f64) -> f64 {
        self.mix(i, |p| r.eval(p, s))
    }

    pub fn reaction_slope(&self, r: &Reaction, i: usize, s: f64) -> f64 {
        self.mix(i, |p| r.derivative(p, s))
    }

    pub fn reaction_prime0(&self, r: &Reaction, i: usize) -> f64 {
        self.mix(i, |p| r.prime0(p))
    }

    #[inline]
    pub fn apply_row(&self, i: usize, u: &[f64]) -> f64 {
        self.rows[i].iter().map(|&(j, c)| c * u[j]).sum()
    }

    /// Banded matrix with rows `scale * G_i + diag(i) e_i` on patch rows and
    /// the constraint rows unchanged, in the internal ordering.
    pub fn matrix(&self, scale: f64, diag: impl Fn(usize) -> f64) -> BandedMatrix {
        let mut m = BandedMatrix::zeros(self.len(), self.kl, self.ku);
        for (i, row) in self.rows.iter().enumerate() {
            let r = self.perm[i];
            if self.is_pde(i) {
                for &(j, c) in row {
                    m.add(r, self.perm[j], scale * c);
                }
                m.add(r, r, diag(i));
            } else {
                for &(j, c) in row {
                    m.add(r, self.perm[j], c);
                }
            }
        }
        m
    }

    /// Node-ordered vector to system ordering.
    pub fn to_system(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = v[i];
        }
        out
    }

    pub fn from_system(&self, v: &[f64]) -> Vec<f64> {
        self.perm.iter().map(|&p| v[p]).collect()
    }
}

/// Interleaves the two halves of a ring so that neighbours on the ring stay
/// within a few positions of each other: node `k` goes to `2k`, node
/// `n - 1 - k` to `2k + 1`.
fn fold_permutation(n: usize) -> Vec<usize> {
    let mut perm = vec![0; n];
    for k in 0..n {
        perm[k] = if k < n - k { 2 * k } else { 2 * (n - 1 - k) + 1 };
    }
    perm
}
