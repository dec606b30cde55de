use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::population::FinitePopulation;
use super::sampling::validate_sizes;
use crate::analysis::{opt_a_partial, opt_lambdas};
use crate::error::{Error, Result};
use crate::estimators::{estimate_from_moments, EstimatorId, Tuning};
use crate::model::SampleMoments;

/// Upper bound on the number of stratified samples [`enumerate_exact`] will visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactEstimator {
    pub id: EstimatorId,
    /// Design expectation E(t).
    pub expectation: Option<f64>,
    /// E(t - E t)².
    pub variance: Option<f64>,
    /// E(t - Ȳ)².
    pub mse: Option<f64>,
    /// Samples on which the estimator is undefined. Moments are reported only when zero.
    pub failed_samples: u64,
    pub unavailable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactReport {
    pub truth: f64,
    pub samples: u64,
    pub estimators: Vec<ExactEstimator>,
}

impl ExactReport {
    pub fn get(&self, id: EstimatorId) -> Option<&ExactEstimator> {
        self.estimators.iter().find(|e| e.id == id)
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    c
}

/// Number of distinct stratified samples, saturating at `u128::MAX`.
pub fn sample_count(pop: &FinitePopulation, n: &[u64]) -> u128 {
    pop.strata.iter().zip(n).fold(1u128, |acc, (s, &n_h)| {
        acc.saturating_mul(binomial(s.len() as u64, n_h))
    })
}

/// Exact design moments of every estimator by visiting each possible sample once.
///
/// `tR` and `tp` use the optimum constants of the population summary.
pub fn enumerate_exact(pop: &FinitePopulation, n: &[u64]) -> Result<ExactReport> {
    validate_sizes(pop, n)?;
    let total = sample_count(pop, n);
    if total > ENUMERATION_LIMIT {
        return Err(Error::TooManySamples(total, ENUMERATION_LIMIT));
    }
    let design = pop.realized_design(n)?;
    let truth = design.mean_y();

    // Every possible sample of each stratum, as moments.
    let per_stratum: Vec<Vec<SampleMoments>> = pop
        .strata
        .iter()
        .zip(n)
        .map(|(s, &n_h)| {
            (0..s.len())
                .combinations(n_h as usize)
                .map(|idx| {
                    let y: Vec<f64> = idx.iter().map(|&i| s.y[i]).collect();
                    let x: Vec<f64> = idx.iter().map(|&i| s.x[i]).collect();
                    SampleMoments::from_values(&y, &x)
                })
                .collect()
        })
        .collect();

    let a_values: Option<Vec<f64>> = opt_a_partial(&design)
        .ok()
        .map(|a| a.into_iter().map(|a| a.unwrap_or(f64::INFINITY)).collect());
    let lambdas = opt_lambdas(&design);

    let visit = |f: &mut dyn FnMut(&[&SampleMoments])| {
        let mut odometer = vec![0usize; per_stratum.len()];
        let mut current: Vec<&SampleMoments> = per_stratum.iter().map(|v| &v[0]).collect();
        loop {
            f(&current);
            let mut h = per_stratum.len();
            loop {
                if h == 0 {
                    return;
                }
                h -= 1;
                odometer[h] += 1;
                if odometer[h] < per_stratum[h].len() {
                    current[h] = &per_stratum[h][odometer[h]];
                    break;
                }
                odometer[h] = 0;
                current[h] = &per_stratum[h][0];
            }
        }
    };

    let count = total as f64;
    let estimators = EstimatorId::ALL
        .into_iter()
        .map(|id| {
            let tuning = match id {
                EstimatorId::TR => match &a_values {
                    Some(a) => Ok(Tuning {
                        lambda: None,
                        a: Some(&a[..]),
                    }),
                    None => Err("optimum a_h undefined".to_string()),
                },
                EstimatorId::Tp => match &lambdas {
                    Ok(l) => Ok(Tuning {
                        lambda: Some(*l),
                        a: None,
                    }),
                    Err(e) => Err(e.to_string()),
                },
                _ => Ok(Tuning::default()),
            };
            let mut row = ExactEstimator {
                id,
                expectation: None,
                variance: None,
                mse: None,
                failed_samples: 0,
                unavailable: None,
            };
            let tuning = match tuning {
                Ok(t) => t,
                Err(reason) => {
                    row.unavailable = Some(reason);
                    return row;
                }
            };
            let eval = |m: &[&SampleMoments]| {
                estimate_from_moments(id, &design, m.iter().copied(), tuning)
            };

            let mut sum = CompensatedSum::default();
            let mut failed = 0u64;
            visit(&mut |m| match eval(m) {
                Ok(t) => sum.add(t),
                Err(_) => failed += 1,
            });
            row.failed_samples = failed;
            if failed > 0 {
                row.unavailable = Some(format!("undefined on {failed} of {total} samples"));
                return row;
            }
            let mean = sum.total() / count;
            let (mut var, mut mse) = (CompensatedSum::default(), CompensatedSum::default());
            visit(&mut |m| {
                let t = eval(m).expect("defined on every sample in the first pass");
                var.add((t - mean) * (t - mean));
                mse.add((t - truth) * (t - truth));
            });
            row.expectation = Some(mean);
            row.variance = Some(var.total() / count);
            row.mse = Some(mse.total() / count);
            row
        })
        .collect();

    Ok(ExactReport {
        truth,
        samples: total as u64,
        estimators,
    })
}
