//! Periodic two-patch landscape, per-patch reactions, and the density
//! rescaling between the physical model and the continuous-density one.
//!
//! One period (tile) is `[-l1, l2]`: a type-1 patch `(-l1, 0)` followed by a
//! type-2 patch `(0, l2)`. Interfaces `S1 = lZ` sit where type 1 meets type 2
//! going rightwards, `S2 = lZ + l2` where type 2 meets type 1.
//!
//! All reactions in this crate act on the rescaled density `u`, which is
//! continuous across interfaces; the flux condition there reads
//! `u'(x-) = sigma u'(x+)` at `S1` and `sigma u'(x-) = u'(x+)` at `S2`.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatchType {
    /// Type-1 (more favorable) patch.
    One,
    /// Type-2 patch.
    Two,
}

impl PatchType {
    pub fn index(self) -> u8 {
        match self {
            PatchType::One => 1,
            PatchType::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterfaceKind {
    /// Type 1 on the left, type 2 on the right (points of `lZ`).
    S1,
    /// Type 2 on the left, type 1 on the right (points of `lZ + l2`).
    S2,
}

impl InterfaceKind {
    pub fn left_patch(self) -> PatchType {
        match self {
            InterfaceKind::S1 => PatchType::One,
            InterfaceKind::S2 => PatchType::Two,
        }
    }

    pub fn right_patch(self) -> PatchType {
        match self {
            InterfaceKind::S1 => PatchType::Two,
            InterfaceKind::S2 => PatchType::One,
        }
    }
}

/// Geometry and movement parameters of the periodic tile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub l1: f64,
    pub l2: f64,
    pub d1: f64,
    pub d2: f64,
    /// Probability that an individual at an interface steps into the type-1 patch.
    pub alpha: f64,
    /// Rescaling factor `u = k v` on type-2 patches.
    pub k: f64,
    /// Flux jump factor, `d2 / (k d1) = (1 - alpha) / alpha`.
    pub sigma: f64,
    pub period: f64,
}

impl Landscape {
    pub fn new(l1: f64, l2: f64, d1: f64, d2: f64, alpha: f64) -> Result<Self> {
        require_positive("l1", l1)?;
        require_positive("l2", l2)?;
        require_positive("d1", d1)?;
        require_positive("d2", d2)?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        let k = alpha / (1.0 - alpha) * (d2 / d1);
        let sigma = (1.0 - alpha) / alpha;
        Ok(Self {
            l1,
            l2,
            d1,
            d2,
            alpha,
            k,
            sigma,
            period: l1 + l2,
        })
    }

    /// Builds the landscape from the flux ratio instead of the preference;
    /// `alpha = 1 / (1 + sigma)`.
    pub fn with_sigma(l1: f64, l2: f64, d1: f64, d2: f64, sigma: f64) -> Result<Self> {
        require_positive("sigma", sigma)?;
        Self::new(l1, l2, d1, d2, 1.0 / (1.0 + sigma))
    }

    /// Homogeneous medium cut into patches of lengths `l1`, `l2` with no
    /// interface preference (`alpha = 1/2`, so `k = sigma = 1`).
    pub fn homogeneous(l1: f64, l2: f64, d: f64) -> Result<Self> {
        Self::new(l1, l2, d, d, 0.5)
    }

    pub fn with_l1(&self, l1: f64) -> Result<Self> {
        Self::new(l1, self.l2, self.d1, self.d2, self.alpha)
    }

    pub fn with_l2(&self, l2: f64) -> Result<Self> {
        Self::new(self.l1, l2, self.d1, self.d2, self.alpha)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.l1, self.l2, self.d1, self.d2, alpha)
    }

    pub fn diffusivity(&self, patch: PatchType) -> f64 {
        match patch {
            PatchType::One => self.d1,
            PatchType::Two => self.d2,
        }
    }

    pub fn length(&self, patch: PatchType) -> f64 {
        match patch {
            PatchType::One => self.l1,
            PatchType::Two => self.l2,
        }
    }

    pub fn d_max(&self) -> f64 {
        self.d1.max(self.d2)
    }

    /// Patch containing `x`; interface points are assigned to the patch on their right.
    pub fn patch_at(&self, x: f64) -> PatchType {
        let r = x - self.period * (x / self.period).floor();
        if r < self.l2 {
            PatchType::Two
        } else {
            PatchType::One
        }
    }

    /// All interface points in the closed window `[a, b]`, sorted.
    pub fn interfaces_between(&self, a: f64, b: f64) -> Vec<(f64, InterfaceKind)> {
        let l = self.period;
        let mut out = Vec::new();
        let m_lo = (a / l).floor() as i64 - 1;
        let m_hi = (b / l).ceil() as i64 + 1;
        for m in m_lo..=m_hi {
            let s1 = m as f64 * l;
            let s2 = s1 + self.l2;
            if s1 >= a && s1 <= b {
                out.push((s1, InterfaceKind::S1));
            }
            if s2 >= a && s2 <= b {
                out.push((s2, InterfaceKind::S2));
            }
        }
        out.sort_by(|p, q| p.0.total_cmp(&q.0));
        out
    }

    pub fn interface_set(&self, n_tiles: usize) -> InterfaceSet {
        let half = n_tiles as f64 * self.period;
        let mut set = InterfaceSet::default();
        for (x, kind) in self.interfaces_between(-half, half) {
            match kind {
                InterfaceKind::S1 => set.s1_points.push(x),
                InterfaceKind::S2 => set.s2_points.push(x),
            }
        }
        set
    }
}

/// Interface points inside a truncated window `[-n l, n l]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InterfaceSet {
    pub s1_points: Vec<f64>,
    pub s2_points: Vec<f64>,
}

impl InterfaceSet {
    /// Merged, sorted list of all points.
    pub fn all(&self) -> Vec<(f64, InterfaceKind)> {
        let mut v: Vec<_> = self
            .s1_points
            .iter()
            .map(|&x| (x, InterfaceKind::S1))
            .chain(self.s2_points.iter().map(|&x| (x, InterfaceKind::S2)))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

/// Sampled nonlinearity, interpolated by monotone piecewise-cubic Hermite
/// segments and extended linearly outside the sampled range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    s: Vec<f64>,
    f: Vec<f64>,
    slopes: Vec<f64>,
    slope_below: f64,
}

impl SampledFunction {
    /// `s` must start at 0 with `f[0] = 0`; the slope at 0 is pinned to `prime0`.
    pub fn new(s: Vec<f64>, f: Vec<f64>, prime0: f64) -> Result<Self> {
        if s.len() != f.len() || s.len() < 2 {
            return Err(Error::InvalidReaction(
                "tabulated reaction needs at least two (s, f) samples of equal length".into(),
            ));
        }
        if s[0] != 0.0 {
            return Err(Error::InvalidReaction("tabulated samples must start at s = 0".into()));
        }
        if f[0] != 0.0 {
            return Err(Error::InvalidReaction(format!("f(0) must be 0, got {}", f[0])));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidReaction("tabulated s must be strictly increasing".into()));
        }
        if s.iter().chain(f.iter()).any(|v| !v.is_finite()) || !prime0.is_finite() {
            return Err(Error::InvalidReaction("non-finite tabulated value".into()));
        }
        let slopes = pchip_slopes(&s, &f, prime0);
        Ok(Self {
            s,
            f,
            slopes,
            slope_below: prime0,
        })
    }

    fn locate(&self, x: f64) -> usize {
        match self.s.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.s.len() - 2),
            Err(i) => (i - 1).min(self.s.len() - 2),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.s.len();
        if x <= 0.0 {
            return self.slope_below * x;
        }
        if x >= self.s[n - 1] {
            return self.f[n - 1] + self.slopes[n - 1] * (x - self.s[n - 1]);
        }
        let i = self.locate(x);
        let h = self.s[i + 1] - self.s[i];
        let t = (x - self.s[i]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        h00 * self.f[i] + h10 * h * self.slopes[i] + h01 * self.f[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.s.len();
        if x <= 0.0 {
            return self.slope_below;
        }
        if x >= self.s[n - 1] {
            return self.slopes[n - 1];
        }
        let i = self.locate(x);
        let h = self.s[i + 1] - self.s[i];
        let t = (x - self.s[i]) / h;
        let d00 = 6.0 * t * t - 6.0 * t;
        let d10 = 3.0 * t * t - 4.0 * t + 1.0;
        let d01 = -6.0 * t * t + 6.0 * t;
        let d11 = 3.0 * t * t - 2.0 * t;
        (d00 * self.f[i] + d01 * self.f[i + 1]) / h + d10 * self.slopes[i] + d11 * self.slopes[i + 1]
    }
}

/// Fritsch-Carlson slopes with the first slope pinned.
fn pchip_slopes(s: &[f64], f: &[f64], first: f64) -> Vec<f64> {
    let n = s.len();
    let delta: Vec<f64> = (0..n - 1).map(|i| (f[i + 1] - f[i]) / (s[i + 1] - s[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = first;
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        if a * b <= 0.0 {
            m[i] = 0.0;
        } else {
            let (h0, h1) = (s[i] - s[i - 1], s[i + 1] - s[i]);
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            m[i] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReactionKind {
    /// `f_i(s) = s (mu_i - s)`.
    Logistic { mu1: f64, mu2: f64 },
    /// User-supplied samples with exact linearizations and caps.
    Tabulated { f1: SampledFunction, f2: SampledFunction },
}

/// Per-patch KPP nonlinearities `f1`, `f2` acting on the rescaled density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub kind: ReactionKind,
    pub f1_prime0: f64,
    pub f2_prime0: f64,
    /// `f_i <= 0` on `[K_i, inf)`.
    pub k1: f64,
    pub k2: f64,
}

/// Cap used for a logistic patch with `mu <= 0`, where `f <= 0` on all of `[0, inf)`.
const NONGROWING_CAP: f64 = 1e-12;

impl Reaction {
    pub fn logistic(mu1: f64, mu2: f64) -> Result<Self> {
        if !mu1.is_finite() || !mu2.is_finite() {
            return Err(Error::InvalidReaction("non-finite logistic rate".into()));
        }
        if mu1 < mu2 {
            return Err(Error::InvalidReaction(format!(
                "type-1 patches must be the more favorable: mu1 = {mu1} < mu2 = {mu2}"
            )));
        }
        let cap = |mu: f64| if mu > 0.0 { mu } else { NONGROWING_CAP };
        Ok(Self {
            kind: ReactionKind::Logistic { mu1, mu2 },
            f1_prime0: mu1,
            f2_prime0: mu2,
            k1: cap(mu1),
            k2: cap(mu2),
        })
    }

    /// Tabulated reaction on a shared abscissa `s` (starting at 0).
    pub fn tabulated(
        s: Vec<f64>,
        f1: Vec<f64>,
        f2: Vec<f64>,
        f1_prime0: f64,
        f2_prime0: f64,
        k1: f64,
        k2: f64,
    ) -> Result<Self> {
        require_positive("K1", k1)?;
        require_positive("K2", k2)?;
        if f1_prime0 < f2_prime0 {
            return Err(Error::InvalidReaction(format!(
                "type-1 patches must be the more favorable: f1'(0) = {f1_prime0} < f2'(0) = {f2_prime0}"
            )));
        }
        let t1 = SampledFunction::new(s.clone(), f1, f1_prime0)?;
        let t2 = SampledFunction::new(s, f2, f2_prime0)?;
        Ok(Self {
            kind: ReactionKind::Tabulated { f1: t1, f2: t2 },
            f1_prime0,
            f2_prime0,
            k1,
            k2,
        })
    }

    pub fn eval(&self, patch: PatchType, s: f64) -> f64 {
        match (&self.kind, patch) {
            (ReactionKind::Logistic { mu1, .. }, PatchType::One) => s * (mu1 - s),
            (ReactionKind::Logistic { mu2, .. }, PatchType::Two) => s * (mu2 - s),
            (ReactionKind::Tabulated { f1, .. }, PatchType::One) => f1.value(s),
            (ReactionKind::Tabulated { f2, .. }, PatchType::Two) => f2.value(s),
        }
    }

    pub fn derivative(&self, patch: PatchType, s: f64) -> f64 {
        match (&self.kind, patch) {
            (ReactionKind::Logistic { mu1, .. }, PatchType::One) => mu1 - 2.0 * s,
            (ReactionKind::Logistic { mu2, .. }, PatchType::Two) => mu2 - 2.0 * s,
            (ReactionKind::Tabulated { f1, .. }, PatchType::One) => f1.derivative(s),
            (ReactionKind::Tabulated { f2, .. }, PatchType::Two) => f2.derivative(s),
        }
    }

    pub fn prime0(&self, patch: PatchType) -> f64 {
        match patch {
            PatchType::One => self.f1_prime0,
            PatchType::Two => self.f2_prime0,
        }
    }

    pub fn cap(&self, patch: PatchType) -> f64 {
        match patch {
            PatchType::One => self.k1,
            PatchType::Two => self.k2,
        }
    }

    /// `M = max(K1, K2)`.
    pub fn max_cap(&self) -> f64 {
        self.k1.max(self.k2)
    }

    pub fn max_prime0(&self) -> f64 {
        self.f1_prime0.max(self.f2_prime0)
    }

    /// `max |f_i'|` over `[0, kbar]`, sampled.
    pub fn lipschitz(&self, kbar: f64) -> f64 {
        const SAMPLES: usize = 2000;
        let mut lip: f64 = 0.0;
        for j in 0..=SAMPLES {
            let s = kbar * j as f64 / SAMPLES as f64;
            for patch in [PatchType::One, PatchType::Two] {
                lip = lip.max(self.derivative(patch, s).abs());
            }
        }
        lip
    }
}

/// Outcome of the sampled check of the standing hypotheses on `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub f_zero_at_zero: [bool; 2],
    /// `f_i <= 0` on `[K_i, s_max]`.
    pub capped: [bool; 2],
    /// `f_i(s)/s` non-increasing on the sample grid.
    pub ratio_nonincreasing: [bool; 2],
    /// `f_i(s)/s` strictly decreasing on the sample grid.
    pub ratio_decreasing: [bool; 2],
    /// Existence hypothesis (`f_i(0) = 0`, caps valid).
    pub existence_holds: bool,
    /// KPP hypothesis (ratios non-increasing, one strictly decreasing).
    pub kpp_holds: bool,
    pub s_min: f64,
    pub s_max: f64,
}

/// Checks the hypotheses by sampling `f_i(s)/s` on a log-spaced grid over
/// `[1e-6, 10 max(K1, K2)]`. Heuristic: a sampled pass is not a proof.
pub fn validate_hypotheses(reaction: &Reaction) -> HypothesisReport {
    const SAMPLES: usize = 400;
    let s_min = 1e-6;
    let s_max = 10.0 * reaction.max_cap().max(1e-6);
    let ratio = (s_max / s_min).ln();
    let grid: Vec<f64> = (0..SAMPLES)
        .map(|j| s_min * (ratio * j as f64 / (SAMPLES - 1) as f64).exp())
        .collect();
    let mut report = HypothesisReport {
        f_zero_at_zero: [false; 2],
        capped: [false; 2],
        ratio_nonincreasing: [false; 2],
        ratio_decreasing: [false; 2],
        existence_holds: false,
        kpp_holds: false,
        s_min,
        s_max,
    };
    for (idx, patch) in [PatchType::One, PatchType::Two].into_iter().enumerate() {
        report.f_zero_at_zero[idx] = reaction.eval(patch, 0.0) == 0.0;
        let cap = reaction.cap(patch);
        report.capped[idx] = cap > 0.0
            && grid
                .iter()
                .filter(|&&s| s >= cap)
                .chain(std::iter::once(&cap))
                .chain(std::iter::once(&s_max))
                .all(|&s| reaction.eval(patch, s) <= 0.0);
        let ratios: Vec<f64> = grid.iter().map(|&s| reaction.eval(patch, s) / s).collect();
        let slack = |a: f64, b: f64| 1e-12 * (1.0 + a.abs().max(b.abs()));
        report.ratio_nonincreasing[idx] = ratios.windows(2).all(|w| w[1] <= w[0] + slack(w[0], w[1]));
        report.ratio_decreasing[idx] = ratios.windows(2).all(|w| w[1] < w[0]);
    }
    report.existence_holds = report.f_zero_at_zero.iter().all(|&b| b) && report.capped.iter().all(|&b| b);
    report.kpp_holds = report.ratio_nonincreasing.iter().all(|&b| b) && report.ratio_decreasing.iter().any(|&b| b);
    report
}

/// Physical density sample at a node. Interface nodes carry both one-sided
/// limits since the physical density may jump there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeDensity {
    Patch { patch: PatchType, v: f64 },
    Interface { kind: InterfaceKind, left: f64, right: f64 },
}

/// Relative tolerance on `v(x-) = k v(x+)` (S1) and `k v(x-) = v(x+)` (S2).
pub const INTERFACE_MATCH_TOL: f64 = 1e-9;

/// Maps a physical density to the continuous density `u`: `u = v` on
/// type-1 patches and `u = k v` on type-2 patches.
pub fn rescale_physical_to_continuous(
    positions: &[f64],
    v_field: &[NodeDensity],
    landscape: &Landscape,
) -> Result<Vec<f64>> {
    let k = landscape.k;
    v_field
        .iter()
        .zip(positions)
        .map(|(node, &x)| match *node {
            NodeDensity::Patch { patch: PatchType::One, v } => Ok(v),
            NodeDensity::Patch { patch: PatchType::Two, v } => Ok(k * v),
            NodeDensity::Interface { kind, left, right } => {
                let (from_left, from_right) = match kind {
                    InterfaceKind::S1 => (left, k * right),
                    InterfaceKind::S2 => (k * left, right),
                };
                let scale = 1.0 + from_left.abs().max(from_right.abs());
                if (from_left - from_right).abs() > INTERFACE_MATCH_TOL * scale {
                    return Err(Error::InconsistentInterfaceValues {
                        x,
                        left: from_left,
                        right: from_right,
                    });
                }
                Ok(match kind {
                    InterfaceKind::S1 => from_left,
                    InterfaceKind::S2 => from_right,
                })
            }
        })
        .collect()
}

/// Inverse of [`rescale_physical_to_continuous`].
pub fn continuous_to_physical(u: f64, node: NodeTag, landscape: &Landscape) -> NodeDensity {
    let k = landscape.k;
    match node {
        NodeTag::Patch(PatchType::One) => NodeDensity::Patch { patch: PatchType::One, v: u },
        NodeTag::Patch(PatchType::Two) => NodeDensity::Patch { patch: PatchType::Two, v: u / k },
        NodeTag::Interface(kind) => {
            let (left, right) = match kind {
                InterfaceKind::S1 => (u, u / k),
                InterfaceKind::S2 => (u / k, u),
            };
            NodeDensity::Interface { kind, left, right }
        }
    }
}

/// Where a node sits relative to the patch structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeTag {
    Patch(PatchType),
    Interface(InterfaceKind),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_case_is_skt() {
        let ls = Landscape::new(1.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(ls.k, 1.0);
        assert_eq!(ls.sigma, 1.0);
        assert_eq!(ls.period, 2.0);
    }

    #[test]
    fn unequal_diffusion_scales_k() {
        let ls = Landscape::new(1.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        assert_eq!(ls.k, 2.0);
        assert_eq!(ls.sigma, 1.0);
    }

    #[test]
    fn preference_example() {
        let ls = Landscape::new(2.0, 1.0, 1.0, 4.0, 0.2).unwrap();
        assert!((ls.k - 1.0).abs() < 1e-15);
        assert!((ls.sigma - 4.0).abs() < 1e-14);
        assert!((ls.k * ls.d1 * ls.sigma - ls.d2).abs() < 1e-14 * ls.d2);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            Landscape::new(0.0, 1.0, 1.0, 1.0, 0.5),
            Err(Error::NonPositiveParameter { name: "l1", .. })
        ));
        assert!(matches!(
            Landscape::new(1.0, 1.0, -1.0, 1.0, 0.5),
            Err(Error::NonPositiveParameter { name: "d1", .. })
        ));
        assert!(matches!(Landscape::new(1.0, 1.0, 1.0, 1.0, 1.0), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(Landscape::new(1.0, 1.0, 1.0, 1.0, 0.0), Err(Error::AlphaOutOfRange(_))));
    }

    #[test]
    fn sigma_constructor_inverts_alpha() {
        let ls = Landscape::with_sigma(1.0, 2.0, 1.0, 3.0, 4.0).unwrap();
        assert!((ls.alpha - 0.2).abs() < 1e-15);
        assert!((ls.sigma - 4.0).abs() < 1e-14);
    }

    #[test]
    fn interface_set_alternates() {
        let ls = Landscape::new(1.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        let set = ls.interface_set(1);
        assert_eq!(set.s1_points, vec![-2.0, 0.0, 2.0]);
        assert_eq!(set.s2_points, vec![-1.0, 1.0]);
        let all = set.all();
        for w in all.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert_ne!(w[0].1, w[1].1);
        }
    }

    #[test]
    fn patch_lookup() {
        let ls = Landscape::new(2.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(ls.patch_at(0.5), PatchType::Two);
        assert_eq!(ls.patch_at(-0.5), PatchType::One);
        assert_eq!(ls.patch_at(1.5), PatchType::One);
        assert_eq!(ls.patch_at(3.2), PatchType::Two);
    }

    #[test]
    fn logistic_hypotheses() {
        let r = validate_hypotheses(&Reaction::logistic(1.0, -1.0).unwrap());
        assert!(r.existence_holds && r.kpp_holds);
        assert!(r.ratio_decreasing[0]);
        let r = validate_hypotheses(&Reaction::logistic(1.0, 0.5).unwrap());
        assert!(r.existence_holds && r.kpp_holds);
    }

    #[test]
    fn linear_growth_has_no_cap() {
        let s: Vec<f64> = (0..=20).map(|j| j as f64 * 0.5).collect();
        let f1 = s.clone();
        let f2: Vec<f64> = s.iter().map(|&x| -x).collect();
        let reaction = Reaction::tabulated(s, f1, f2, 1.0, -1.0, 1.0, 1.0).unwrap();
        let r = validate_hypotheses(&reaction);
        assert!(!r.capped[0]);
        assert!(!r.existence_holds);
    }

    #[test]
    fn bistable_flags_kpp_violation() {
        // f(s) = s (s - 0.2)(1 - s): f(s)/s increases on (0, 0.6).
        let s: Vec<f64> = (0..=60).map(|j| j as f64 * 0.05).collect();
        let f: Vec<f64> = s.iter().map(|&x| x * (x - 0.2) * (1.0 - x)).collect();
        let reaction = Reaction::tabulated(s, f.clone(), f, -0.2, -0.2, 1.0, 1.0).unwrap();
        let r = validate_hypotheses(&reaction);
        assert!(r.existence_holds);
        assert!(!r.kpp_holds);
    }

    #[test]
    fn tabulated_matches_smooth_function() {
        let s: Vec<f64> = (0..=200).map(|j| j as f64 * 0.01).collect();
        let f: Vec<f64> = s.iter().map(|&x| x * (1.0 - x)).collect();
        let g: Vec<f64> = s.iter().map(|&x| x * (-1.0 - x)).collect();
        let t = Reaction::tabulated(s, f, g, 1.0, -1.0, 1.0, 1e-3).unwrap();
        for &x in &[0.013, 0.4, 0.77, 1.5] {
            assert!((t.eval(PatchType::One, x) - x * (1.0 - x)).abs() < 1e-4);
            assert!((t.derivative(PatchType::One, x) - (1.0 - 2.0 * x)).abs() < 1e-2);
        }
        assert_eq!(t.derivative(PatchType::Two, 0.0), -1.0);
    }

    #[test]
    fn tabulated_rejects_bad_tables() {
        assert!(Reaction::tabulated(vec![0.0, 1.0], vec![0.1, 0.0], vec![0.0, 0.0], 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(Reaction::tabulated(vec![0.5, 1.0], vec![0.0, 0.0], vec![0.0, 0.0], 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(Reaction::tabulated(vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0], -1.0, 0.0, 1.0, 1.0).is_err());
        assert!(Reaction::logistic(-1.0, 1.0).is_err());
    }

    #[test]
    fn rescale_identity_when_k_is_one() {
        let ls = Landscape::new(1.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        let x = [0.5, 1.0, 1.5];
        let v = [
            NodeDensity::Patch { patch: PatchType::Two, v: 0.3 },
            NodeDensity::Interface { kind: InterfaceKind::S2, left: 0.4, right: 0.4 },
            NodeDensity::Patch { patch: PatchType::One, v: 0.7 },
        ];
        assert_eq!(rescale_physical_to_continuous(&x, &v, &ls).unwrap(), vec![0.3, 0.4, 0.7]);
    }

    #[test]
    fn rescale_multiplies_type_two() {
        let ls = Landscape::new(1.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        let v = [NodeDensity::Patch { patch: PatchType::Two, v: 1.0 }];
        assert_eq!(rescale_physical_to_continuous(&[0.5], &v, &ls).unwrap(), vec![2.0]);
    }

    #[test]
    fn rescale_rejects_flux_incompatible_jump() {
        let ls = Landscape::new(1.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        let v = [NodeDensity::Interface { kind: InterfaceKind::S1, left: 1.0, right: 1.0 }];
        assert!(matches!(
            rescale_physical_to_continuous(&[0.0], &v, &ls),
            Err(Error::InconsistentInterfaceValues { .. })
        ));
    }

    #[test]
    fn round_trip_u_v_u() {
        let ls = Landscape::new(2.0, 1.0, 1.0, 4.0, 0.3).unwrap();
        let tags = [
            NodeTag::Patch(PatchType::One),
            NodeTag::Interface(InterfaceKind::S1),
            NodeTag::Patch(PatchType::Two),
            NodeTag::Interface(InterfaceKind::S2),
        ];
        let x = [-0.5, 0.0, 0.5, 1.0];
        let u = [0.25, 0.5, 0.75, 1.25];
        let v: Vec<_> = u.iter().zip(&tags).map(|(&u, &t)| continuous_to_physical(u, t, &ls)).collect();
        let back = rescale_physical_to_continuous(&x, &v, &ls).unwrap();
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-15 * a.abs());
        }
    }
}
