use rand::seq::index;

use super::population::FinitePopulation;
use super::stream::{stream_rng, Domain};
use crate::error::{Error, Result};
use crate::model::{SampleMoments, StratumSample, SurveySample};

fn check_sizes(pop: &FinitePopulation, n: &[u64]) -> Result<()> {
    if n.len() != pop.strata.len() {
        return Err(Error::LengthMismatch {
            expected: pop.strata.len(),
            got: n.len(),
        });
    }
    for (s, &n_h) in pop.strata.iter().zip(n) {
        if n_h as usize > s.len() {
            return Err(Error::SampleExceedsStratum {
                stratum: s.id.clone(),
                n: n_h,
                population: s.len() as u64,
            });
        }
        if n_h == 0 {
            return Err(Error::NonPositiveCount {
                stratum: s.id.clone(),
                field: "n_h",
                value: 0,
            });
        }
    }
    Ok(())
}

/// Sorted unit indices of one stratum's SRSWOR draw.
pub(crate) fn draw_indices(
    population: usize,
    n: usize,
    seed: u64,
    replicate: u64,
    stratum: usize,
) -> Vec<usize> {
    if n == population {
        return (0..population).collect();
    }
    let mut rng = stream_rng(seed, replicate, stratum as u64, Domain::Sample);
    let mut picked = index::sample(&mut rng, population, n).into_vec();
    picked.sort_unstable();
    picked
}

/// Draws one stratified simple random sample without replacement.
///
/// Each stratum's draw depends only on `(seed, replicate_index, stratum)`.
pub fn draw_srswor(
    pop: &FinitePopulation,
    n: &[u64],
    replicate_index: u64,
    seed: u64,
) -> Result<SurveySample> {
    check_sizes(pop, n)?;
    let strata = pop
        .strata
        .iter()
        .zip(n)
        .enumerate()
        .map(|(h, (s, &n_h))| {
            let picked = draw_indices(s.len(), n_h as usize, seed, replicate_index, h);
            let y = picked.iter().map(|&i| s.y[i]).collect();
            let x = picked.iter().map(|&i| s.x[i]).collect();
            StratumSample::new(s.id.clone(), y, x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurveySample::new(strata))
}

/// Moments of the same draw as [`draw_srswor`] without keeping the unit values.
pub(crate) fn draw_moments(
    pop: &FinitePopulation,
    n: &[u64],
    replicate_index: u64,
    seed: u64,
    y_buf: &mut Vec<f64>,
    x_buf: &mut Vec<f64>,
) -> Vec<SampleMoments> {
    pop.strata
        .iter()
        .zip(n)
        .enumerate()
        .map(|(h, (s, &n_h))| {
            let picked = draw_indices(s.len(), n_h as usize, seed, replicate_index, h);
            y_buf.clear();
            x_buf.clear();
            y_buf.extend(picked.iter().map(|&i| s.y[i]));
            x_buf.extend(picked.iter().map(|&i| s.x[i]));
            SampleMoments::from_values(y_buf, x_buf)
        })
        .collect()
}

pub(crate) fn validate_sizes(pop: &FinitePopulation, n: &[u64]) -> Result<()> {
    check_sizes(pop, n)
}
