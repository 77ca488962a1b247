//! The JSON run configuration. Every block rejects unknown keys, and
//! [`RunConfig::validate`] runs before any computation.

use std::path::{Path, PathBuf};

use patchkpp::pde::Scheme;
use patchkpp::{Landscape, Reaction};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub landscape: LandscapeConfig,
    pub reaction: ReactionConfig,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(default)]
    pub output: OutputConfig,
    /// Seed for randomized initial data; `--seed` overrides it.
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Exactly one of `alpha` and `sigma` must be set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeConfig {
    pub l1: f64,
    pub l2: f64,
    pub d1: f64,
    pub d2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReactionConfig {
    Logistic {
        mu1: f64,
        mu2: f64,
    },
    Tabulated {
        s: Vec<f64>,
        f1: Vec<f64>,
        f2: Vec<f64>,
        f1_prime0: f64,
        f2_prime0: f64,
        k1: f64,
        k2: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Resolution of time-dependent and steady computations.
    pub nodes_per_patch: usize,
    /// Coarse resolution of the Richardson-extrapolated grid eigenvalue.
    pub eigen_nodes_per_patch: usize,
    pub dt: f64,
    pub scheme: SchemeName,
    /// Gate between eigenvalue methods.
    pub cross_method_tol: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            nodes_per_patch: 32,
            eigen_nodes_per_patch: 64,
            dt: 5e-3,
            scheme: SchemeName::ImplicitEuler,
            cross_method_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    ImplicitEuler,
    Imex,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::ImplicitEuler => Scheme::ImplicitEulerNewton,
            SchemeName::Imex => Scheme::Imex,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub eigen: EigenScenario,
    pub speed: SpeedScenario,
    pub simulate: SimulateScenario,
    pub steady: SteadyScenario,
    pub persistence_map: Option<MapScenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenScenario {
    /// Dirichlet half-widths in units of the period.
    pub dirichlet_radii: Vec<f64>,
    pub dirichlet_nodes_per_patch: usize,
    /// Sweep `lambda1` over these `sigma` values, other parameters fixed.
    pub sigma_sweep: Option<Vec<f64>>,
}

impl Default for EigenScenario {
    fn default() -> Self {
        Self {
            dirichlet_radii: vec![1.0, 2.0, 5.0, 10.0, 40.0],
            dirichlet_nodes_per_patch: 16,
            sigma_sweep: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeedScenario {
    /// Cross-check `lambda(mu*)` against the extrapolated grid eigenvalue.
    pub grid_check: bool,
    pub table_points: usize,
    /// Also simulate a front and fit its speed.
    pub simulate_front: bool,
    pub horizon: f64,
}

impl Default for SpeedScenario {
    fn default() -> Self {
        Self {
            grid_check: true,
            table_points: 81,
            simulate_front: false,
            horizon: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateScenario {
    pub horizon: f64,
    /// The window is `[-n l, n l]`.
    pub n_tiles: usize,
    pub snapshot_every: f64,
    pub initial: InitialData,
    /// Tracked level; defaults to `min p / 2` when persistent, else half the initial maximum.
    pub front_level: Option<f64>,
    /// Run comparison and subhomogeneity checks on the supplied data.
    pub properties: bool,
}

impl Default for SimulateScenario {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            n_tiles: 8,
            snapshot_every: 1.0,
            initial: InitialData::Bump {
                center: 0.0,
                width: 2.0,
                height: 0.5,
            },
            front_level: None,
            properties: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `height * max(0, 1 - ((x - center) / width)^2)`.
    Bump { center: f64, width: f64, height: f64 },
    Constant { value: f64 },
    /// Equally spaced samples over one period starting at `-l1`, interpolated periodically.
    Periodic { samples: Vec<f64> },
    /// CSV with columns `x,u`, interpolated linearly and zero outside its range.
    File { path: PathBuf },
    /// Sum of `bumps` parabolic bumps with seeded centers, widths and heights.
    Random { bumps: usize, max_height: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteadyScenario {
    /// Re-derive the profile from three further initial data.
    pub uniqueness: bool,
}

impl Default for SteadyScenario {
    fn default() -> Self {
        Self { uniqueness: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapScenario {
    pub l1: Vec<f64>,
    pub axis: MapAxis,
}

/// Second axis of the persistence map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapAxis {
    L2 { values: Vec<f64> },
    F2Prime0 { values: Vec<f64> },
}

impl MapAxis {
    pub fn name(&self) -> &'static str {
        match self {
            MapAxis::L2 { .. } => "l2",
            MapAxis::F2Prime0 { .. } => "f2_prime0",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            MapAxis::L2 { values } | MapAxis::F2Prime0 { values } => values,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Used when `--out` is absent; falls back to `patchkpp-out`.
    pub directory: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Parses a config, or the `config` block of a manifest written by an earlier run.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        let value = match value.get("manifest_version") {
            Some(_) => value.get("config").cloned().ok_or_else(|| config_err("manifest has no config"))?,
            None => value,
        };
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.build_landscape()?;
        self.build_reaction()?;
        let n = &self.numerics;
        positive("numerics.dt", n.dt)?;
        positive("numerics.cross_method_tol", n.cross_method_tol)?;
        if n.nodes_per_patch < 2 {
            return Err(config_err("numerics.nodes_per_patch must be at least 2"));
        }
        if n.eigen_nodes_per_patch < 8 {
            return Err(config_err("numerics.eigen_nodes_per_patch must be at least 8"));
        }
        let sc = &self.scenario;
        if sc.eigen.dirichlet_nodes_per_patch < 8 {
            return Err(config_err("scenario.eigen.dirichlet_nodes_per_patch must be at least 8"));
        }
        for &r in &sc.eigen.dirichlet_radii {
            positive("scenario.eigen.dirichlet_radii", r)?;
        }
        for &s in sc.eigen.sigma_sweep.iter().flatten() {
            positive("scenario.eigen.sigma_sweep", s)?;
        }
        positive("scenario.speed.horizon", sc.speed.horizon)?;
        if sc.speed.table_points < 2 {
            return Err(config_err("scenario.speed.table_points must be at least 2"));
        }
        let sim = &sc.simulate;
        positive("scenario.simulate.horizon", sim.horizon)?;
        positive("scenario.simulate.snapshot_every", sim.snapshot_every)?;
        if sim.n_tiles == 0 {
            return Err(config_err("scenario.simulate.n_tiles must be at least 1"));
        }
        if let Some(level) = sim.front_level {
            positive("scenario.simulate.front_level", level)?;
        }
        match &sim.initial {
            InitialData::Bump { width, height, .. } => {
                positive("initial.width", *width)?;
                if !(*height >= 0.0) {
                    return Err(config_err("initial.height must be nonnegative"));
                }
            }
            InitialData::Constant { value } if !(*value >= 0.0) => {
                return Err(config_err("initial.value must be nonnegative"));
            }
            InitialData::Periodic { samples } if samples.is_empty() || samples.iter().any(|v| !(*v >= 0.0)) => {
                return Err(config_err("initial.samples must be nonempty and nonnegative"));
            }
            InitialData::Random { bumps, max_height } => {
                if *bumps == 0 {
                    return Err(config_err("initial.bumps must be at least 1"));
                }
                positive("initial.max_height", *max_height)?;
            }
            _ => {}
        }
        if let Some(map) = &sc.persistence_map {
            if map.l1.is_empty() || map.axis.values().is_empty() {
                return Err(config_err("persistence_map ranges must be nonempty"));
            }
            for &l1 in &map.l1 {
                positive("persistence_map.l1", l1)?;
            }
            if let MapAxis::L2 { values } = &map.axis {
                for &l2 in values {
                    positive("persistence_map.l2", l2)?;
                }
            }
        }
        Ok(())
    }

    pub fn build_landscape(&self) -> Result<Landscape, CliError> {
        let LandscapeConfig { l1, l2, d1, d2, alpha, sigma } = self.landscape;
        let built = match (alpha, sigma) {
            (Some(a), None) => Landscape::new(l1, l2, d1, d2, a),
            (None, Some(s)) => Landscape::with_sigma(l1, l2, d1, d2, s),
            _ => return Err(config_err("landscape needs exactly one of alpha and sigma")),
        };
        built.map_err(|e| config_err(e.to_string()))
    }

    pub fn build_reaction(&self) -> Result<Reaction, CliError> {
        let built = match &self.reaction {
            ReactionConfig::Logistic { mu1, mu2 } => Reaction::logistic(*mu1, *mu2),
            ReactionConfig::Tabulated {
                s,
                f1,
                f2,
                f1_prime0,
                f2_prime0,
                k1,
                k2,
            } => Reaction::tabulated(s.clone(), f1.clone(), f2.clone(), *f1_prime0, *f2_prime0, *k1, *k2),
        };
        built.map_err(|e| config_err(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "landscape": {"l1": 2, "l2": 1, "d1": 1, "d2": 0.5, "alpha": 0.4},
        "reaction": {"kind": "logistic", "mu1": 1, "mu2": -1}
    }"#;

    #[test]
    fn defaults_fill_missing_blocks() {
        let c = RunConfig::from_json(BASE).unwrap();
        assert_eq!(c.numerics, Numerics::default());
        assert_eq!(c.scenario.eigen.dirichlet_radii.len(), 5);
        assert!((c.build_landscape().unwrap().sigma - 1.5).abs() < 1e-15);
    }

    #[test]
    fn alpha_and_sigma_are_exclusive() {
        let both = BASE.replace("\"alpha\": 0.4", "\"alpha\": 0.4, \"sigma\": 1.5");
        assert!(matches!(RunConfig::from_json(&both), Err(CliError::Config(_))));
        let neither = BASE.replace(", \"alpha\": 0.4", "");
        assert!(matches!(RunConfig::from_json(&neither), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let extra = BASE.replace("\"d2\": 0.5", "\"d2\": 0.5, \"d3\": 1");
        assert!(RunConfig::from_json(&extra).is_err());
    }

    #[test]
    fn numerics_must_be_positive() {
        let bad = BASE.replace("\"reaction\"", "\"numerics\": {\"dt\": -1}, \"reaction\"");
        assert!(matches!(RunConfig::from_json(&bad), Err(CliError::Config(m)) if m.contains("dt")));
    }

    #[test]
    fn manifests_load_as_configs() {
        let c = RunConfig::from_json(BASE).unwrap();
        let manifest = serde_json::json!({"manifest_version": 1, "config": c});
        assert_eq!(RunConfig::from_json(&manifest.to_string()).unwrap(), c);
    }
}
