//! Initial data from the `simulate` scenario as a function of `x`.

use patchkpp::Landscape;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::InitialData;
use crate::CliError;

pub struct Profile {
    kind: Kind,
}

enum Kind {
    Bumps(Vec<(f64, f64, f64)>),
    Constant(f64),
    Periodic { start: f64, period: f64, samples: Vec<f64> },
    Table { x: Vec<f64>, u: Vec<f64> },
}

fn bump(x: f64, center: f64, width: f64, height: f64) -> f64 {
    height * (1.0 - ((x - center) / width).powi(2)).max(0.0)
}

impl Profile {
    pub fn new(data: &InitialData, landscape: &Landscape, seed: u64) -> Result<Self, CliError> {
        let kind = match data {
            InitialData::Bump { center, width, height } => Kind::Bumps(vec![(*center, *width, *height)]),
            InitialData::Constant { value } => Kind::Constant(*value),
            InitialData::Periodic { samples } => Kind::Periodic {
                start: -landscape.l1,
                period: landscape.period,
                samples: samples.clone(),
            },
            InitialData::File { path } => read_table(path)?,
            InitialData::Random { bumps, max_height } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let l = landscape.period;
                Kind::Bumps(
                    (0..*bumps)
                        .map(|_| {
                            (
                                rng.gen_range(-l..l),
                                rng.gen_range(0.5 * l..2.0 * l),
                                rng.gen_range(0.0..*max_height),
                            )
                        })
                        .collect(),
                )
            }
        };
        Ok(Self { kind })
    }

    pub fn at(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Bumps(b) => b.iter().map(|&(c, w, h)| bump(x, c, w, h)).sum(),
            Kind::Constant(v) => *v,
            Kind::Periodic { start, period, samples } => {
                let n = samples.len();
                let s = ((x - start) / period).rem_euclid(1.0) * n as f64;
                let i = (s.floor() as usize).min(n - 1);
                let w = s - i as f64;
                (1.0 - w) * samples[i] + w * samples[(i + 1) % n]
            }
            Kind::Table { x: xs, u } => {
                if x < xs[0] || x > xs[xs.len() - 1] {
                    return 0.0;
                }
                let j = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
                let w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                (1.0 - w) * u[j - 1] + w * u[j]
            }
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, Kind::Periodic { .. } | Kind::Constant(_))
    }
}

#[derive(serde::Deserialize)]
struct Row {
    x: f64,
    u: f64,
}

fn read_table(path: &std::path::Path) -> Result<Kind, CliError> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut x = Vec::new();
    let mut u = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        if !(row.u >= 0.0) {
            return Err(bad(format!("negative value {} at x = {}", row.u, row.x)));
        }
        x.push(row.x);
        u.push(row.u);
    }
    if x.len() < 2 || x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(bad("need at least two rows with increasing x".into()));
    }
    Ok(Kind::Table { x, u })
}
