use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::population::FinitePopulation;
use super::sampling::{draw_moments, validate_sizes};
use crate::analysis::{moment_bundle, mse_classical, mse_tr, opt_a_partial, LambdaPair};
use crate::error::{Error, Result};
use crate::estimators::{estimate_from_moments, EstimatorId, Tuning};

pub const MIN_REPLICATES: usize = 100;
/// Replicates per work item. Fixed so the reduction tree never depends on the worker count.
pub const CHUNK_SIZE: u64 = 250;
/// Failure rate above which an estimator's row is flagged.
pub const FAILURE_FLAG_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub reps: usize,
    pub seed: u64,
    /// Worker threads; `0` lets rayon decide. Results do not depend on it.
    pub threads: usize,
}

impl SimulationConfig {
    pub fn new(reps: usize, seed: u64) -> Self {
        Self {
            reps,
            seed,
            threads: 1,
        }
    }

    pub fn with_threads(self, threads: usize) -> Self {
        Self { threads, ..self }
    }
}

// Running moments of the error e = t - Ȳ and of e², merged pairwise.
#[derive(Debug, Clone, Copy, Default)]
struct ErrorMoments {
    count: u64,
    failed: u64,
    mean: f64,
    m2: f64,
    mean_sq: f64,
    m2_sq: f64,
}

impl ErrorMoments {
    fn push(&mut self, e: f64) {
        self.count += 1;
        let n = self.count as f64;
        let d = e - self.mean;
        self.mean += d / n;
        self.m2 += d * (e - self.mean);
        let sq = e * e;
        let d = sq - self.mean_sq;
        self.mean_sq += d / n;
        self.m2_sq += d * (sq - self.mean_sq);
    }

    fn merge(&mut self, other: &ErrorMoments) {
        self.failed += other.failed;
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = ErrorMoments {
                failed: self.failed,
                ..*other
            };
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        self.m2 += other.m2 + d * d * na * nb / n;
        self.mean += d * nb / n;
        let d = other.mean_sq - self.mean_sq;
        self.m2_sq += other.m2_sq + d * d * na * nb / n;
        self.mean_sq += d * nb / n;
        self.count += other.count;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedEstimator {
    pub id: EstimatorId,
    /// Replicates that produced a finite estimate.
    pub replicates: u64,
    pub failed: u64,
    pub empirical_mse: Option<f64>,
    pub empirical_bias: Option<f64>,
    /// Standard error of `empirical_mse`.
    pub mc_standard_error: Option<f64>,
    /// First-order MSE evaluated on the realized population summary.
    pub theoretical_mse: Option<f64>,
    /// `empirical_mse / theoretical_mse`.
    pub ratio: Option<f64>,
    /// Failure rate above [`FAILURE_FLAG_RATE`].
    pub flagged: bool,
    pub unavailable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    /// Realized population mean Ȳ.
    pub truth: f64,
    pub reps: usize,
    pub seed: u64,
    pub sample_sizes: Vec<u64>,
    pub lambda_opt: Option<LambdaPair>,
    pub a_opt: Vec<Option<f64>>,
    pub estimators: Vec<SimulatedEstimator>,
}

impl SimulationReport {
    pub fn get(&self, id: EstimatorId) -> Option<&SimulatedEstimator> {
        self.estimators.iter().find(|e| e.id == id)
    }
}

/// Repeated SRSWOR draws from a fixed population.
///
/// `tR` runs at the per-stratum optimum a_h and `tp` at the optimum λ's, both
/// computed from the realized population summary. Replicates where an
/// estimator is undefined, or its squared error overflows, are counted as
/// failed for that estimator only.
pub fn simulate(
    pop: &FinitePopulation,
    n: &[u64],
    estimators: &[EstimatorId],
    config: SimulationConfig,
) -> Result<SimulationReport> {
    if config.reps < MIN_REPLICATES {
        return Err(Error::TooFewReplicates {
            min: MIN_REPLICATES,
            got: config.reps,
        });
    }
    validate_sizes(pop, n)?;
    let design = pop.realized_design(n)?;
    let truth = design.mean_y();

    let a_opt = opt_a_partial(&design).unwrap_or_else(|_| vec![None; design.len()]);
    let a_values: Vec<f64> = a_opt.iter().map(|a| a.unwrap_or(f64::INFINITY)).collect();
    let bundle = moment_bundle(&design);
    let lambdas = bundle.clone().and_then(|b| b.opt_lambdas());

    // (estimator, tuning for it) for every estimator that can run at all.
    let mut active = Vec::new();
    let mut rows: Vec<SimulatedEstimator> = Vec::new();
    for &id in estimators {
        let (tuning, theory) = match id {
            EstimatorId::TR => (
                Ok(Tuning {
                    lambda: None,
                    a: Some(&a_values[..]),
                }),
                mse_tr(&design, &a_values),
            ),
            EstimatorId::Tp => match (&lambdas, &bundle) {
                (Ok(l), Ok(b)) => (
                    Ok(Tuning {
                        lambda: Some(*l),
                        a: None,
                    }),
                    Ok(b.mse_tp(l.0, l.1)),
                ),
                (Err(e), _) | (_, Err(e)) => (Err(e.clone()), Err(e.clone())),
            },
            other => (Ok(Tuning::default()), mse_classical(&design, other)),
        };
        let mut row = SimulatedEstimator {
            id,
            replicates: 0,
            failed: 0,
            empirical_mse: None,
            empirical_bias: None,
            mc_standard_error: None,
            theoretical_mse: theory.ok(),
            ratio: None,
            flagged: false,
            unavailable: None,
        };
        match tuning {
            Ok(t) => active.push((rows.len(), id, t)),
            Err(e) => row.unavailable = Some(e.to_string()),
        }
        rows.push(row);
    }

    let reps = config.reps as u64;
    let chunks: Vec<u64> = (0..reps.div_ceil(CHUNK_SIZE)).collect();
    let run_chunk = |chunk: u64| -> Vec<ErrorMoments> {
        let mut acc = vec![ErrorMoments::default(); active.len()];
        let (mut y_buf, mut x_buf) = (Vec::new(), Vec::new());
        let end = ((chunk + 1) * CHUNK_SIZE).min(reps);
        for replicate in chunk * CHUNK_SIZE..end {
            let moments = draw_moments(pop, n, replicate, config.seed, &mut y_buf, &mut x_buf);
            for (slot, (_, id, tuning)) in acc.iter_mut().zip(&active) {
                match estimate_from_moments(*id, &design, &moments, *tuning) {
                    Ok(t) if ((t - truth) * (t - truth)).is_finite() => slot.push(t - truth),
                    _ => slot.failed += 1,
                }
            }
        }
        acc
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::InvalidSpec(format!("cannot start worker pool: {e}")))?;
    let partials: Vec<Vec<ErrorMoments>> =
        pool.install(|| chunks.par_iter().map(|&c| run_chunk(c)).collect());

    let mut totals = vec![ErrorMoments::default(); active.len()];
    for partial in &partials {
        for (total, part) in totals.iter_mut().zip(partial) {
            total.merge(part);
        }
    }

    for ((row_index, _, _), total) in active.iter().zip(&totals) {
        let row = &mut rows[*row_index];
        row.replicates = total.count;
        row.failed = total.failed;
        row.flagged = total.failed as f64 > FAILURE_FLAG_RATE * reps as f64;
        if total.count > 0 {
            let count = total.count as f64;
            let bias = total.mean;
            let mse = total.m2 / count + bias * bias;
            row.empirical_bias = Some(bias);
            row.empirical_mse = Some(mse);
            if total.count > 1 {
                row.mc_standard_error = Some((total.m2_sq / (count - 1.0) / count).sqrt());
            }
            row.ratio = row
                .theoretical_mse
                .map(|t| mse / t)
                .filter(|r| r.is_finite());
        }
    }

    Ok(SimulationReport {
        truth,
        reps: config.reps,
        seed: config.seed,
        sample_sizes: n.to_vec(),
        lambda_opt: lambdas
            .ok()
            .map(|(lambda1, lambda2)| LambdaPair { lambda1, lambda2 }),
        a_opt,
        estimators: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::population::{
        gen_population, Family, PopulationSpec, PopulationStratum, StratumTarget,
    };

    fn pop() -> FinitePopulation {
        let strata = (0..2)
            .map(|h| StratumTarget {
                id: format!("s{h}"),
                population: 60,
                mean_x: 40.0 + 10.0 * h as f64,
                mean_y: 20.0,
                sd_x: 6.0,
                sd_y: 4.0,
                rho: 0.7,
            })
            .collect();
        gen_population(&PopulationSpec {
            strata,
            family: Family::Gaussian,
            seed: 3,
        })
        .unwrap()
    }

    #[test]
    fn census_has_zero_error() {
        let pop = pop();
        let r = simulate(
            &pop,
            &[60, 60],
            &EstimatorId::ALL,
            SimulationConfig::new(100, 1),
        )
        .unwrap();
        for id in [
            EstimatorId::Mean,
            EstimatorId::T1,
            EstimatorId::T2,
            EstimatorId::T3,
            EstimatorId::T4,
            EstimatorId::Tlr,
            EstimatorId::TR,
        ] {
            let mse = r.get(id).unwrap().empirical_mse.unwrap();
            assert!(mse < 1e-20, "{id}: {mse}");
        }
        assert_eq!(r.get(EstimatorId::Mean).unwrap().empirical_mse, Some(0.0));
        // f_h = 0 makes the optimum λ system singular
        assert!(r.get(EstimatorId::Tp).unwrap().unavailable.is_some());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let pop = pop();
        let base = simulate(
            &pop,
            &[5, 8],
            &EstimatorId::ALL,
            SimulationConfig::new(1_100, 9),
        )
        .unwrap();
        for threads in [2, 4] {
            let other = simulate(
                &pop,
                &[5, 8],
                &EstimatorId::ALL,
                SimulationConfig::new(1_100, 9).with_threads(threads),
            )
            .unwrap();
            assert_eq!(base, other);
        }
    }

    #[test]
    fn mse_dominates_squared_bias() {
        let r = simulate(
            &pop(),
            &[4, 4],
            &EstimatorId::ALL,
            SimulationConfig::new(500, 2),
        )
        .unwrap();
        for e in &r.estimators {
            if let (Some(m), Some(b)) = (e.empirical_mse, e.empirical_bias) {
                assert!(m >= b * b, "{}", e.id);
            }
        }
    }

    #[test]
    fn failures_are_counted_per_estimator() {
        // x values symmetric around zero: x̄ = 0 happens in some draws
        let pop = FinitePopulation::new(vec![PopulationStratum {
            id: "z".into(),
            y: vec![1.0, 2.0, 3.0, 4.0],
            x: vec![-1.0, 1.0, -2.0, 2.0],
        }])
        .unwrap();
        let r = simulate(
            &pop,
            &[2],
            &[EstimatorId::Mean, EstimatorId::T1],
            SimulationConfig::new(400, 5),
        )
        .unwrap();
        let t1 = r.get(EstimatorId::T1).unwrap();
        assert!(t1.failed > 0);
        assert!(t1.flagged);
        assert_eq!(t1.failed + t1.replicates, 400);
        assert_eq!(r.get(EstimatorId::Mean).unwrap().failed, 0);
    }

    #[test]
    fn too_few_replicates() {
        assert!(matches!(
            simulate(
                &pop(),
                &[2, 2],
                &EstimatorId::ALL,
                SimulationConfig::new(99, 1)
            ),
            Err(Error::TooFewReplicates { .. })
        ));
    }

    #[test]
    fn merge_matches_single_pass() {
        let data: Vec<f64> = (0..37)
            .map(|i| ((i * 7919) % 101) as f64 / 10.0 - 3.0)
            .collect();
        let mut whole = ErrorMoments::default();
        data.iter().for_each(|&e| whole.push(e));
        let mut left = ErrorMoments::default();
        let mut right = ErrorMoments::default();
        data[..13].iter().for_each(|&e| left.push(e));
        data[13..].iter().for_each(|&e| right.push(e));
        left.merge(&right);
        assert!((left.mean - whole.mean).abs() < 1e-12);
        assert!((left.m2 - whole.m2).abs() < 1e-9);
        assert!((left.m2_sq - whole.m2_sq).abs() < 1e-7);
    }
}
