use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::stream::{stream_rng, Domain};
use crate::error::{Error, Result};
use crate::model::{finalize_design, StratifiedDesign, StratumRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Lognormal,
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(Family::Gaussian),
            "lognormal" => Ok(Family::Lognormal),
            other => Err(format!(
                "unknown distribution `{other}` (expected gaussian or lognormal)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumTarget {
    pub id: String,
    pub population: u64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub sd_x: f64,
    pub sd_y: f64,
    pub rho: f64,
}

/// Recipe for a synthetic finite population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub strata: Vec<StratumTarget>,
    pub family: Family,
    pub seed: u64,
}

impl PopulationSpec {
    /// Targets taken from a design's summaries, with every N_h multiplied by `scale`.
    pub fn from_design(design: &StratifiedDesign, family: Family, seed: u64, scale: u64) -> Self {
        let strata = design
            .strata()
            .iter()
            .map(|s| StratumTarget {
                id: s.id.clone(),
                population: s.population * scale,
                mean_x: s.mean_x,
                mean_y: s.mean_y,
                sd_x: s.sd_x,
                sd_y: s.sd_y,
                rho: s.rho,
            })
            .collect();
        Self {
            strata,
            family,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.strata.is_empty() {
            return Err(Error::InvalidSpec("no strata".into()));
        }
        for t in &self.strata {
            let bad = |why: &str| Err(Error::InvalidSpec(format!("stratum `{}`: {why}", t.id)));
            if t.population < 2 {
                return bad("N_h must be at least 2");
            }
            if !(t.mean_x.is_finite() && t.mean_y.is_finite()) {
                return bad("means must be finite");
            }
            if !(t.sd_x.is_finite() && t.sd_x >= 0.0 && t.sd_y.is_finite() && t.sd_y >= 0.0) {
                return bad("standard deviations must be finite and non-negative");
            }
            if !(-1.0..=1.0).contains(&t.rho) {
                return bad("rho must lie in [-1, 1]");
            }
            if self.family == Family::Lognormal && (t.mean_x <= 0.0 || t.mean_y <= 0.0) {
                return bad("lognormal needs positive means");
            }
        }
        Ok(())
    }
}

/// Unit values of one stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationStratum {
    pub id: String,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
}

impl PopulationStratum {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// A fixed finite population. Its realized moments are the design-based truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitePopulation {
    pub strata: Vec<PopulationStratum>,
}

impl FinitePopulation {
    pub fn new(strata: Vec<PopulationStratum>) -> Result<Self> {
        if strata.is_empty() {
            return Err(Error::EmptyDesign);
        }
        for s in &strata {
            if s.y.len() != s.x.len() {
                return Err(Error::LengthMismatch {
                    expected: s.y.len(),
                    got: s.x.len(),
                });
            }
        }
        Ok(Self { strata })
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.strata.iter().map(|s| s.len() as u64).collect()
    }

    /// Population mean of y over all units.
    pub fn mean_y(&self) -> f64 {
        let total: usize = self.strata.iter().map(PopulationStratum::len).sum();
        self.strata.iter().flat_map(|s| &s.y).sum::<f64>() / total as f64
    }

    /// The exact summary of these units for the given per-stratum sample sizes.
    ///
    /// Second moments use divisor N_h - 1. The covariance is stored as computed.
    pub fn realized_design(&self, sample_sizes: &[u64]) -> Result<StratifiedDesign> {
        if sample_sizes.len() != self.strata.len() {
            return Err(Error::LengthMismatch {
                expected: self.strata.len(),
                got: sample_sizes.len(),
            });
        }
        let records = self
            .strata
            .iter()
            .zip(sample_sizes)
            .map(|(s, &n)| realized_record(s, n))
            .collect();
        finalize_design(records)
    }
}

fn realized_record(s: &PopulationStratum, n: u64) -> StratumRecord {
    let count = s.len();
    let size = count as f64;
    let mean_y = s.y.iter().sum::<f64>() / size;
    let mean_x = s.x.iter().sum::<f64>() / size;
    let (mut syy, mut sxx, mut sxy) = (0.0, 0.0, 0.0);
    for (&y, &x) in s.y.iter().zip(&s.x) {
        let (dy, dx) = (y - mean_y, x - mean_x);
        syy += dy * dy;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    let d = (count.max(2) - 1) as f64;
    let (sd_y, sd_x, cov) = ((syy / d).sqrt(), (sxx / d).sqrt(), sxy / d);
    let rho = if sd_x > 0.0 && sd_y > 0.0 {
        (cov / (sd_x * sd_y)).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    StratumRecord {
        cov_xy: Some(cov),
        ..StratumRecord::new(
            s.id.clone(),
            count as u64,
            n,
            mean_x,
            mean_y,
            sd_x,
            sd_y,
            rho,
        )
    }
}

/// Draws a finite population from `spec`. Stratum h uses its own random stream.
pub fn gen_population(spec: &PopulationSpec) -> Result<FinitePopulation> {
    spec.validate()?;
    let strata = spec
        .strata
        .iter()
        .enumerate()
        .map(|(h, t)| {
            let mut rng = stream_rng(spec.seed, 0, h as u64, Domain::Population);
            let (y, x) = match spec.family {
                Family::Gaussian => gaussian_units(t, &mut rng),
                Family::Lognormal => lognormal_units(t, &mut rng),
            };
            PopulationStratum {
                id: t.id.clone(),
                y,
                x,
            }
        })
        .collect();
    FinitePopulation::new(strata)
}

fn normal_pairs(
    count: u64,
    rho: f64,
    rng: &mut ChaCha8Rng,
) -> impl Iterator<Item = (f64, f64)> + '_ {
    let tail = (1.0 - rho * rho).max(0.0).sqrt();
    (0..count).map(move |_| {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        (z1, rho * z1 + tail * z2)
    })
}

fn gaussian_units(t: &StratumTarget, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    normal_pairs(t.population, t.rho, rng)
        .map(|(zx, zy)| (t.mean_y + t.sd_y * zy, t.mean_x + t.sd_x * zx))
        .unzip()
}

// Log-scale parameters matching the target mean, standard deviation and,
// where attainable, correlation.
fn lognormal_units(t: &StratumTarget, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let (cv_x, cv_y) = (t.sd_x / t.mean_x, t.sd_y / t.mean_y);
    let (s2x, s2y) = ((1.0 + cv_x * cv_x).ln(), (1.0 + cv_y * cv_y).ln());
    let (sx, sy) = (s2x.sqrt(), s2y.sqrt());
    let (mx, my) = (t.mean_x.ln() - s2x / 2.0, t.mean_y.ln() - s2y / 2.0);
    let log_rho = if sx > 0.0 && sy > 0.0 {
        ((1.0 + t.rho * cv_x * cv_y).max(f64::MIN_POSITIVE).ln() / (sx * sy)).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    normal_pairs(t.population, log_rho, rng)
        .map(|(zx, zy)| ((my + sy * zy).exp(), (mx + sx * zx).exp()))
        .unzip()
}
