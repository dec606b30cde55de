use serde::{Deserialize, Serialize};

use crate::analysis::moment_bundle;
use crate::error::{Error, Result};
use crate::model::StratifiedDesign;

pub const MIN_RESOLUTION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMinimum {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mse: f64,
}

fn axis(range: (f64, f64), resolution: usize, name: &str) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::EmptyRange(format!("{name} range [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (resolution - 1) as f64;
    Ok((0..resolution).map(|i| lo + step * i as f64).collect())
}

/// Brute-force minimum of the first-order `tp` MSE over a rectangular grid.
///
/// Endpoints are included. Ties keep the first point in row-major order.
pub fn grid_lambda_oracle(
    design: &StratifiedDesign,
    lambda1: (f64, f64),
    lambda2: (f64, f64),
    resolution: usize,
) -> Result<GridMinimum> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::EmptyRange(format!(
            "resolution {resolution} is below {MIN_RESOLUTION}"
        )));
    }
    let l1_axis = axis(lambda1, resolution, "lambda1")?;
    let l2_axis = axis(lambda2, resolution, "lambda2")?;
    let bundle = moment_bundle(design)?;
    let mut best = GridMinimum {
        lambda1: f64::NAN,
        lambda2: f64::NAN,
        mse: f64::INFINITY,
    };
    for &l1 in &l1_axis {
        for &l2 in &l2_axis {
            let mse = bundle.mse_tp(l1, l2);
            if mse < best.mse {
                best = GridMinimum {
                    lambda1: l1,
                    lambda2: l2,
                    mse,
                };
            }
        }
    }
    Ok(best)
}
