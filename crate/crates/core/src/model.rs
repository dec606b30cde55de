//! Stratified design data model.
//!
//! A [`StratifiedDesign`] is built once from raw [`StratumRecord`]s through
//! [`finalize_design`] and is immutable afterwards. Every derived quantity
//! (weights, finite population corrections, ratios, covariances) lives here so
//! the estimator and analysis modules never recompute them differently.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance when a supplied covariance is checked against `rho * sd_y * sd_x`.
pub const COVARIANCE_TOLERANCE: f64 = 1e-6;

/// One stratum as it arrives from a file or a caller, before derivation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumRecord {
    pub id: String,
    pub population: u64,
    pub sample: u64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub sd_x: f64,
    pub sd_y: f64,
    pub rho: f64,
    /// Population covariance S_yx. Derived from `rho` when absent.
    pub cov_xy: Option<f64>,
    pub cx: Option<f64>,
    pub cy: Option<f64>,
    pub beta2x: Option<f64>,
    /// Replaces the computed `1/n - 1/N` when present.
    pub fpc_override: Option<f64>,
}

impl StratumRecord {
    /// A record with no optional metadata, covariance derived from `rho`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        population: u64,
        sample: u64,
        mean_x: f64,
        mean_y: f64,
        sd_x: f64,
        sd_y: f64,
        rho: f64,
    ) -> Self {
        Self {
            id: id.into(),
            population,
            sample,
            mean_x,
            mean_y,
            sd_x,
            sd_y,
            rho,
            cov_xy: None,
            cx: None,
            cy: None,
            beta2x: None,
            fpc_override: None,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        let stratum = || self.id.clone();
        if self.population < 1 {
            return Err(Error::NonPositiveCount {
                stratum: stratum(),
                field: "N_h",
                value: self.population,
            });
        }
        if self.sample < 1 {
            return Err(Error::NonPositiveCount {
                stratum: stratum(),
                field: "n_h",
                value: self.sample,
            });
        }
        if self.population < 2 {
            return Err(Error::StratumTooSmall {
                stratum: stratum(),
                value: self.population,
            });
        }
        if self.sample > self.population {
            return Err(Error::SampleExceedsStratum {
                stratum: stratum(),
                n: self.sample,
                population: self.population,
            });
        }
        for (field, value) in [("mean_x", self.mean_x), ("mean_y", self.mean_y)] {
            if !value.is_finite() {
                return Err(Error::NonFiniteInput {
                    stratum: stratum(),
                    field,
                });
            }
        }
        for (field, value) in [("sd_x", self.sd_x), ("sd_y", self.sd_y)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidDispersion {
                    stratum: stratum(),
                    field,
                    value,
                });
            }
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::CorrelationOutOfRange {
                stratum: stratum(),
                rho: self.rho,
            });
        }
        if let Some(value) = self.fpc_override {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidFpcOverride {
                    stratum: stratum(),
                    value,
                });
            }
        }
        Ok(())
    }
}

/// One stratum of a finalized design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumFrame {
    pub id: String,
    pub population: u64,
    pub sample: u64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub sd_x: f64,
    pub sd_y: f64,
    pub rho: f64,
    pub cov_xy: f64,
    /// W_h = N_h / N.
    pub weight: f64,
    /// f_h, either `1/n_h - 1/N_h` or the override.
    pub fpc: f64,
    pub fpc_override: Option<f64>,
    pub cx: Option<f64>,
    pub cy: Option<f64>,
    pub beta2x: Option<f64>,
}

impl StratumFrame {
    /// `1/n_h - 1/N_h`, ignoring any override.
    pub fn computed_fpc(&self) -> f64 {
        fpc(self.sample, self.population)
    }

    /// R_h = Ȳ_h / X̄_h.
    pub fn ratio(&self) -> Result<f64> {
        if self.mean_x == 0.0 {
            return Err(Error::ZeroAuxMean {
                stratum: self.id.clone(),
            });
        }
        Ok(self.mean_y / self.mean_x)
    }

    pub fn var_x(&self) -> f64 {
        self.sd_x * self.sd_x
    }

    pub fn var_y(&self) -> f64 {
        self.sd_y * self.sd_y
    }

    /// W_h² f_h, the factor in front of every first-order MSE term.
    pub fn sampling_factor(&self) -> f64 {
        self.weight * self.weight * self.fpc
    }

    /// The record that reproduces this frame under [`finalize_design`].
    pub fn to_record(&self) -> StratumRecord {
        StratumRecord {
            id: self.id.clone(),
            population: self.population,
            sample: self.sample,
            mean_x: self.mean_x,
            mean_y: self.mean_y,
            sd_x: self.sd_x,
            sd_y: self.sd_y,
            rho: self.rho,
            cov_xy: Some(self.cov_xy),
            cx: self.cx,
            cy: self.cy,
            beta2x: self.beta2x,
            fpc_override: self.fpc_override,
        }
    }
}

fn fpc(sample: u64, population: u64) -> f64 {
    if sample == population {
        0.0
    } else {
        1.0 / sample as f64 - 1.0 / population as f64
    }
}

/// How the finite population corrections of a design were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FConvention {
    /// Every f_h is `1/n_h - 1/N_h`.
    Computed,
    /// At least one f_h was taken from a tabulated override.
    Tabulated,
}

impl FConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            FConvention::Computed => "computed",
            FConvention::Tabulated => "tabulated",
        }
    }
}

impl std::str::FromStr for FConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "computed" => Ok(FConvention::Computed),
            "tabulated" => Ok(FConvention::Tabulated),
            other => Err(format!(
                "unknown f convention `{other}` (expected computed or tabulated)"
            )),
        }
    }
}

impl std::fmt::Display for FConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered, validated collection of strata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratifiedDesign {
    name: Option<String>,
    strata: Vec<StratumFrame>,
    population: u64,
    sample: u64,
    mean_y: f64,
    mean_x: f64,
}

impl StratifiedDesign {
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn strata(&self) -> &[StratumFrame] {
        &self.strata
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// N = Σ N_h.
    pub fn population(&self) -> u64 {
        self.population
    }

    /// n = Σ n_h.
    pub fn sample(&self) -> u64 {
        self.sample
    }

    /// Ȳ = Σ W_h Ȳ_h.
    pub fn mean_y(&self) -> f64 {
        self.mean_y
    }

    /// X̄ = Σ W_h X̄_h.
    pub fn mean_x(&self) -> f64 {
        self.mean_x
    }

    pub fn sample_sizes(&self) -> Vec<u64> {
        self.strata.iter().map(|s| s.sample).collect()
    }

    pub fn f_convention(&self) -> FConvention {
        if self.strata.iter().any(|s| s.fpc_override.is_some()) {
            FConvention::Tabulated
        } else {
            FConvention::Computed
        }
    }

    pub fn to_records(&self) -> Vec<StratumRecord> {
        self.strata.iter().map(StratumFrame::to_record).collect()
    }

    /// The same design with every f_h recomputed from N_h and n_h.
    pub fn without_fpc_overrides(&self) -> Self {
        let records = self
            .to_records()
            .into_iter()
            .map(|r| StratumRecord {
                fpc_override: None,
                ..r
            })
            .collect();
        let design = finalize_design(records).expect("dropping overrides keeps a valid design");
        Self {
            name: self.name.clone(),
            ..design
        }
    }

    /// The same design with the given per-stratum f_h overrides applied.
    pub fn with_fpc_overrides(&self, overrides: &[f64]) -> Result<Self> {
        if overrides.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: overrides.len(),
            });
        }
        let records = self
            .to_records()
            .into_iter()
            .zip(overrides)
            .map(|(r, &f)| StratumRecord {
                fpc_override: Some(f),
                ..r
            })
            .collect();
        let design = finalize_design(records)?;
        Ok(Self {
            name: self.name.clone(),
            ..design
        })
    }

    /// Looks up a stratum position by id.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.strata.iter().position(|s| s.id == id)
    }
}

/// Validates raw strata and derives weights, corrections and covariances.
///
/// Input order is preserved and every sum accumulates in that order.
pub fn finalize_design(records: Vec<StratumRecord>) -> Result<StratifiedDesign> {
    if records.is_empty() {
        return Err(Error::EmptyDesign);
    }
    let mut seen = HashSet::new();
    for record in &records {
        record.check()?;
        if !seen.insert(record.id.as_str()) {
            return Err(Error::DuplicateStratum(record.id.clone()));
        }
    }

    let population: u64 = records.iter().map(|r| r.population).sum();
    let sample: u64 = records.iter().map(|r| r.sample).sum();
    let total = population as f64;

    let mut strata = Vec::with_capacity(records.len());
    for r in records {
        let derived = r.rho * r.sd_y * r.sd_x;
        let cov_xy = match r.cov_xy {
            None => derived,
            Some(supplied) => {
                if !supplied.is_finite() {
                    return Err(Error::NonFiniteInput {
                        stratum: r.id,
                        field: "cov_xy",
                    });
                }
                let scale = derived.abs().max(supplied.abs());
                if (supplied - derived).abs() > COVARIANCE_TOLERANCE * scale {
                    return Err(Error::InconsistentCovariance {
                        stratum: r.id,
                        supplied,
                        derived,
                    });
                }
                supplied
            }
        };
        let fpc = r
            .fpc_override
            .unwrap_or_else(|| fpc(r.sample, r.population));
        strata.push(StratumFrame {
            weight: r.population as f64 / total,
            fpc,
            cov_xy,
            id: r.id,
            population: r.population,
            sample: r.sample,
            mean_x: r.mean_x,
            mean_y: r.mean_y,
            sd_x: r.sd_x,
            sd_y: r.sd_y,
            rho: r.rho,
            fpc_override: r.fpc_override,
            cx: r.cx,
            cy: r.cy,
            beta2x: r.beta2x,
        });
    }

    let mean_y = strata.iter().map(|s| s.weight * s.mean_y).sum();
    let mean_x = strata.iter().map(|s| s.weight * s.mean_x).sum();

    Ok(StratifiedDesign {
        name: None,
        strata,
        population,
        sample,
        mean_y,
        mean_x,
    })
}

/// Sample moments of one stratum, divisor `n - 1` for second moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleMoments {
    pub count: usize,
    pub mean_y: f64,
    pub mean_x: f64,
    /// `None` when fewer than two units were drawn.
    pub var_y: Option<f64>,
    pub var_x: Option<f64>,
    pub cov_xy: Option<f64>,
}

impl SampleMoments {
    /// Two-pass moments of paired values. Panics on mismatched or empty input.
    pub fn from_values(y: &[f64], x: &[f64]) -> Self {
        assert_eq!(y.len(), x.len(), "y and x must have equal length");
        assert!(!y.is_empty(), "sample moments need at least one unit");
        let count = y.len();
        let n = count as f64;
        let mean_y = y.iter().sum::<f64>() / n;
        let mean_x = x.iter().sum::<f64>() / n;
        if count < 2 {
            return Self {
                count,
                mean_y,
                mean_x,
                var_y: None,
                var_x: None,
                cov_xy: None,
            };
        }
        let (mut syy, mut sxx, mut sxy) = (0.0, 0.0, 0.0);
        for (&yi, &xi) in y.iter().zip(x) {
            let dy = yi - mean_y;
            let dx = xi - mean_x;
            syy += dy * dy;
            sxx += dx * dx;
            sxy += dx * dy;
        }
        let d = n - 1.0;
        Self {
            count,
            mean_y,
            mean_x,
            var_y: Some(syy / d),
            var_x: Some(sxx / d),
            cov_xy: Some(sxy / d),
        }
    }

    /// Least-squares slope b_h = s_yx / s²_x, defined only when s²_x > 0.
    pub fn slope(&self) -> Option<f64> {
        match (self.cov_xy, self.var_x) {
            (Some(c), Some(v)) if v > 0.0 => Some(c / v),
            _ => None,
        }
    }
}

/// Units drawn from one stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumSample {
    pub id: String,
    pub values_y: Vec<f64>,
    pub values_x: Vec<f64>,
    pub moments: SampleMoments,
}

impl StratumSample {
    pub fn new(id: impl Into<String>, values_y: Vec<f64>, values_x: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if values_y.len() != values_x.len() {
            return Err(Error::LengthMismatch {
                expected: values_y.len(),
                got: values_x.len(),
            });
        }
        if values_y.is_empty() {
            return Err(Error::NonPositiveCount {
                stratum: id,
                field: "n_h",
                value: 0,
            });
        }
        let moments = SampleMoments::from_values(&values_y, &values_x);
        Ok(Self {
            id,
            values_y,
            values_x,
            moments,
        })
    }
}

/// A stratified sample: one [`StratumSample`] per stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveySample {
    pub strata: Vec<StratumSample>,
}

impl SurveySample {
    pub fn new(strata: Vec<StratumSample>) -> Self {
        Self { strata }
    }

    pub fn moments(&self) -> Vec<SampleMoments> {
        self.strata.iter().map(|s| s.moments).collect()
    }

    /// Reorders the strata to follow `design`, failing unless ids match one-to-one.
    pub fn aligned_to(&self, design: &StratifiedDesign) -> Result<SurveySample> {
        if self.strata.len() != design.len() {
            return Err(Error::StrataMismatch(format!(
                "sample has {} strata, design has {}",
                self.strata.len(),
                design.len()
            )));
        }
        let mut out = Vec::with_capacity(design.len());
        for frame in design.strata() {
            let found = self
                .strata
                .iter()
                .find(|s| s.id == frame.id)
                .ok_or_else(|| {
                    Error::StrataMismatch(format!("no sample for stratum `{}`", frame.id))
                })?;
            out.push(found.clone());
        }
        Ok(SurveySample::new(out))
    }
}

/// Tuning constants for the parameterised estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningParams {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Per-stratum a_h. `f64::INFINITY` stands for the limit a_h → ∞.
    pub a: Vec<f64>,
}

impl TuningParams {
    pub fn new(lambda1: f64, lambda2: f64, a: Vec<f64>) -> Result<Self> {
        validate_a(&a, None)?;
        Ok(Self {
            lambda1,
            lambda2,
            a,
        })
    }
}

pub(crate) fn validate_a(a: &[f64], design: Option<&StratifiedDesign>) -> Result<()> {
    if let Some(design) = design {
        if a.len() != design.len() {
            return Err(Error::LengthMismatch {
                expected: design.len(),
                got: a.len(),
            });
        }
    }
    for (h, &value) in a.iter().enumerate() {
        if value == 0.0 || value.is_nan() {
            let stratum = design
                .map(|d| d.strata()[h].id.clone())
                .unwrap_or_else(|| h.to_string());
            return Err(Error::ZeroTuning { stratum });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_strata() -> Vec<StratumRecord> {
        vec![
            StratumRecord::new("a", 100, 10, 5.0, 10.0, 2.0, 3.0, 0.5),
            StratumRecord::new("b", 300, 30, 8.0, 20.0, 4.0, 6.0, -0.25),
        ]
    }

    #[test]
    fn census_stratum_has_zero_fpc() {
        let d = finalize_design(vec![StratumRecord::new(
            "s", 100, 100, 1.0, 1.0, 1.0, 1.0, 0.0,
        )])
        .unwrap();
        assert_eq!(d.strata()[0].fpc, 0.0);
    }

    #[test]
    fn derives_weights_and_totals() {
        let d = finalize_design(two_strata()).unwrap();
        assert_eq!(d.population(), 400);
        assert_eq!(d.sample(), 40);
        assert_eq!(d.strata()[0].weight, 0.25);
        assert_eq!(d.strata()[1].weight, 0.75);
        assert_eq!(d.mean_y(), 0.25 * 10.0 + 0.75 * 20.0);
        assert_eq!(d.strata()[0].cov_xy, 0.5 * 3.0 * 2.0);
        assert_eq!(d.strata()[1].fpc, 1.0 / 30.0 - 1.0 / 300.0);
        assert_eq!(d.f_convention(), FConvention::Computed);
    }

    #[test]
    fn kadilar_stratum_fpcs() {
        assert!((fpc(9, 106) - 0.1017).abs() < 5e-5);
        // the printed 0.006 for this stratum cannot come from 1/2 - 1/173
        assert!((fpc(2, 173) - 0.4942).abs() < 5e-5);
    }

    #[test]
    fn rejects_bad_records() {
        let mut r = two_strata();
        r[0].sample = 0;
        assert!(matches!(
            finalize_design(r).unwrap_err(),
            Error::NonPositiveCount { .. }
        ));

        let mut r = two_strata();
        r[1].sample = 301;
        assert!(matches!(
            finalize_design(r).unwrap_err(),
            Error::SampleExceedsStratum { .. }
        ));

        let mut r = two_strata();
        r[0].rho = 1.5;
        match finalize_design(r).unwrap_err() {
            Error::CorrelationOutOfRange { stratum, .. } => assert_eq!(stratum, "a"),
            e => panic!("unexpected {e:?}"),
        }

        let mut r = two_strata();
        r[1].id = "a".into();
        assert!(matches!(
            finalize_design(r).unwrap_err(),
            Error::DuplicateStratum(_)
        ));

        let mut r = two_strata();
        r[0].population = 1;
        r[0].sample = 1;
        assert!(matches!(
            finalize_design(r).unwrap_err(),
            Error::StratumTooSmall { .. }
        ));

        let mut r = two_strata();
        r[0].sd_x = -1.0;
        assert!(matches!(
            finalize_design(r).unwrap_err(),
            Error::InvalidDispersion { .. }
        ));

        assert_eq!(finalize_design(vec![]).unwrap_err(), Error::EmptyDesign);
    }

    #[test]
    fn covariance_consistency() {
        let mut r = two_strata();
        r[0].cov_xy = Some(3.0 * (1.0 + 1e-9));
        assert!(finalize_design(r).is_ok());

        let mut r = two_strata();
        r[0].cov_xy = Some(3.1);
        assert!(matches!(
            finalize_design(r).unwrap_err(),
            Error::InconsistentCovariance { .. }
        ));
    }

    #[test]
    fn zero_aux_mean_is_legal_until_divided() {
        let mut r = two_strata();
        r[0].mean_x = 0.0;
        r[0].sd_x = 0.0;
        let d = finalize_design(r).unwrap();
        assert!(matches!(
            d.strata()[0].ratio(),
            Err(Error::ZeroAuxMean { .. })
        ));
        assert!(d.strata()[1].ratio().is_ok());
    }

    #[test]
    fn finalize_is_idempotent() {
        let mut r = two_strata();
        r[1].fpc_override = Some(0.01);
        let d = finalize_design(r).unwrap();
        let again = finalize_design(d.to_records()).unwrap();
        assert_eq!(d, again);
        assert_eq!(d.f_convention(), FConvention::Tabulated);
        assert_eq!(
            d.without_fpc_overrides().strata()[1].fpc,
            1.0 / 30.0 - 1.0 / 300.0
        );
    }

    #[test]
    fn sample_moments_by_hand() {
        let m = SampleMoments::from_values(&[1.0, 2.0, 6.0], &[2.0, 4.0, 6.0]);
        assert_eq!(m.mean_y, 3.0);
        assert_eq!(m.mean_x, 4.0);
        assert_eq!(m.var_y, Some(7.0));
        assert_eq!(m.var_x, Some(4.0));
        assert_eq!(m.cov_xy, Some(5.0));
        assert_eq!(m.slope(), Some(1.25));

        let flat = SampleMoments::from_values(&[1.0, 2.0], &[3.0, 3.0]);
        assert_eq!(flat.slope(), None);
        let single = SampleMoments::from_values(&[1.0], &[3.0]);
        assert_eq!(single.var_x, None);
    }

    #[test]
    fn tuning_rejects_zero_a() {
        assert!(TuningParams::new(1.0, 0.0, vec![1.0, 0.0]).is_err());
        assert!(TuningParams::new(1.0, 0.0, vec![1.0, f64::INFINITY]).is_ok());
    }
}
