//! Point estimators of the population mean from a drawn stratified sample.
//!
//! Every estimator is *separate*: a stratum-level estimate is formed from
//! that stratum's sample means and known population mean X̄_h, and the
//! results are combined with the weights W_h.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{validate_a, SampleMoments, StratifiedDesign, StratumFrame, SurveySample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorId {
    /// Stratified sample mean ȳ_st.
    Mean,
    /// Separate ratio.
    T1,
    /// Separate product.
    T2,
    /// Exponential ratio.
    T3,
    /// Exponential product.
    T4,
    /// Separate regression with within-stratum least-squares slopes.
    Tlr,
    /// Exponential ratio type with per-stratum constant a_h.
    TR,
    /// Difference-exponential estimator with global λ1, λ2.
    Tp,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 8] = [
        EstimatorId::Mean,
        EstimatorId::T1,
        EstimatorId::T2,
        EstimatorId::T3,
        EstimatorId::T4,
        EstimatorId::Tlr,
        EstimatorId::TR,
        EstimatorId::Tp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorId::Mean => "mean",
            EstimatorId::T1 => "t1",
            EstimatorId::T2 => "t2",
            EstimatorId::T3 => "t3",
            EstimatorId::T4 => "t4",
            EstimatorId::Tlr => "tlr",
            EstimatorId::TR => "tR",
            EstimatorId::Tp => "tp",
        }
    }

    /// Parses a comma separated list such as `mean,t1,tR`.
    pub fn parse_list(list: &str) -> Result<Vec<EstimatorId>> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        // `tR` is the canonical spelling; `tr` is accepted as well.
        EstimatorId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownEstimator(s.to_string()))
    }
}

impl Serialize for EstimatorId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for EstimatorId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameters an estimator may need beyond the sample itself.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Tuning<'a> {
    pub lambda: Option<(f64, f64)>,
    pub a: Option<&'a [f64]>,
}

fn zero_sample_mean(frame: &StratumFrame) -> Error {
    Error::ZeroSampleAuxMean {
        stratum: frame.id.clone(),
    }
}

fn zero_denominator(frame: &StratumFrame) -> Error {
    Error::ZeroDenominator {
        stratum: frame.id.clone(),
    }
}

fn stratum_estimate(
    id: EstimatorId,
    frame: &StratumFrame,
    m: &SampleMoments,
    h: usize,
    tuning: Tuning<'_>,
) -> Result<f64> {
    let (ybar, xbar, big_x) = (m.mean_y, m.mean_x, frame.mean_x);
    let value = match id {
        EstimatorId::Mean => ybar,
        EstimatorId::T1 => {
            if xbar == 0.0 {
                return Err(zero_sample_mean(frame));
            }
            ybar * (big_x / xbar)
        }
        EstimatorId::T2 => {
            if big_x == 0.0 {
                return Err(Error::ZeroAuxMean {
                    stratum: frame.id.clone(),
                });
            }
            ybar * (xbar / big_x)
        }
        EstimatorId::T3 | EstimatorId::T4 => {
            let denom = big_x + xbar;
            if denom == 0.0 {
                return Err(zero_denominator(frame));
            }
            let arg = (big_x - xbar) / denom;
            if id == EstimatorId::T3 {
                ybar * arg.exp()
            } else {
                ybar * (-arg).exp()
            }
        }
        EstimatorId::Tlr => {
            let slope = m.slope().ok_or_else(|| Error::DegenerateSlope {
                stratum: frame.id.clone(),
            })?;
            ybar + slope * (big_x - xbar)
        }
        EstimatorId::TR => {
            let a = tuning.a.ok_or(Error::MissingTuning("tR"))?[h];
            if a.is_infinite() {
                ybar
            } else {
                let denom = big_x + (a - 1.0) * xbar;
                if denom == 0.0 {
                    return Err(zero_denominator(frame));
                }
                ybar * ((big_x - xbar) / denom).exp()
            }
        }
        EstimatorId::Tp => {
            let (lambda1, lambda2) = tuning.lambda.ok_or(Error::MissingTuning("tp"))?;
            if xbar == 0.0 {
                return Err(zero_sample_mean(frame));
            }
            let denom = big_x + xbar;
            if denom == 0.0 {
                return Err(zero_denominator(frame));
            }
            let brace = 2.0 - (big_x / xbar) * ((big_x - xbar) / denom).exp();
            (lambda1 * ybar + lambda2 * (big_x - xbar)) * brace
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteResult {
            stratum: frame.id.clone(),
        })
    }
}

/// Weighted sum of stratum-level estimates from precomputed moments.
///
/// `moments` must already be in design order.
pub(crate) fn estimate_from_moments<'m, I>(
    id: EstimatorId,
    design: &StratifiedDesign,
    moments: I,
    tuning: Tuning<'_>,
) -> Result<f64>
where
    I: IntoIterator<Item = &'m SampleMoments>,
{
    let mut total = 0.0;
    let mut count = 0;
    for (h, (frame, m)) in design.strata().iter().zip(moments).enumerate() {
        total += frame.weight * stratum_estimate(id, frame, m, h, tuning)?;
        count += 1;
    }
    if count != design.len() {
        return Err(Error::StrataMismatch(format!(
            "got moments for {count} strata, design has {}",
            design.len()
        )));
    }
    if !total.is_finite() {
        return Err(Error::NonFiniteResult {
            stratum: "<combined>".to_string(),
        });
    }
    Ok(total)
}

fn check_alignment(sample: &SurveySample, design: &StratifiedDesign) -> Result<()> {
    if sample.strata.len() != design.len() {
        return Err(Error::StrataMismatch(format!(
            "sample has {} strata, design has {}",
            sample.strata.len(),
            design.len()
        )));
    }
    for (s, frame) in sample.strata.iter().zip(design.strata()) {
        if s.id != frame.id {
            return Err(Error::StrataMismatch(format!(
                "sample stratum `{}` where design has `{}`",
                s.id, frame.id
            )));
        }
    }
    Ok(())
}

/// Point estimate for every estimator except `tp`.
///
/// `a` is required for `tR` and ignored otherwise. Sample strata must be in
/// design order with matching ids.
pub fn point_estimate_classical(
    id: EstimatorId,
    sample: &SurveySample,
    design: &StratifiedDesign,
    a: Option<&[f64]>,
) -> Result<f64> {
    if id == EstimatorId::Tp {
        return Err(Error::MissingTuning("tp"));
    }
    check_alignment(sample, design)?;
    if id == EstimatorId::TR {
        let a = a.ok_or(Error::MissingTuning("tR"))?;
        validate_a(a, Some(design))?;
    }
    let moments = sample.strata.iter().map(|s| &s.moments);
    estimate_from_moments(id, design, moments, Tuning { lambda: None, a })
}

/// Point estimate of the difference-exponential estimator at `(lambda1, lambda2)`.
pub fn point_estimate_tp(
    sample: &SurveySample,
    design: &StratifiedDesign,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    check_alignment(sample, design)?;
    let moments = sample.strata.iter().map(|s| &s.moments);
    estimate_from_moments(
        EstimatorId::Tp,
        design,
        moments,
        Tuning {
            lambda: Some((lambda1, lambda2)),
            a: None,
        },
    )
}
