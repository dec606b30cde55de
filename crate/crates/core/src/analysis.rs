//! First-order MSE, bias and efficiency analysis from population summaries.
//!
//! All sums run over strata in design order. The difference-exponential
//! estimator's MSE is the quadratic form
//! `λ1² P1 + λ2² P2 − 2 λ1 λ2 P3 − 3 λ1 λ2 P4 − 2 λ1 A + A`
//! with `A = Σ W_h² Ȳ_h²`, evaluated exactly as written.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorId;
use crate::model::{validate_a, FConvention, StratifiedDesign};

/// Relative size of `4 P1 P2 − (2 P3 + 3 P4)²` below which the optimum is treated as singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

/// MSE of the estimators whose first-order MSE needs no tuning constants.
pub fn mse_classical(design: &StratifiedDesign, id: EstimatorId) -> Result<f64> {
    let mut total = 0.0;
    for s in design.strata() {
        let (vy, vx, cov) = (s.var_y(), s.var_x(), s.cov_xy);
        let bracket = match id {
            EstimatorId::Mean => vy,
            EstimatorId::Tlr => vy * (1.0 - s.rho * s.rho),
            EstimatorId::T1 | EstimatorId::T2 | EstimatorId::T3 | EstimatorId::T4 => {
                let r = s.ratio()?;
                match id {
                    EstimatorId::T1 => vy + r * r * vx - 2.0 * r * cov,
                    EstimatorId::T2 => vy + r * r * vx + 2.0 * r * cov,
                    EstimatorId::T3 => vy + r * r / 4.0 * vx - r * cov,
                    _ => vy + r * r / 4.0 * vx + r * cov,
                }
            }
            EstimatorId::TR => return Err(Error::MissingTuning("tR")),
            EstimatorId::Tp => return Err(Error::MissingTuning("tp")),
        };
        total += s.sampling_factor() * bracket;
    }
    Ok(total)
}

/// MSE of `tR` at per-stratum constants `a`. An infinite a_h contributes S²_yh.
pub fn mse_tr(design: &StratifiedDesign, a: &[f64]) -> Result<f64> {
    validate_a(a, Some(design))?;
    let mut total = 0.0;
    for (s, &a_h) in design.strata().iter().zip(a) {
        let r = s.ratio()?;
        let bracket = s.var_y() + r * r / (a_h * a_h) * s.var_x() - 2.0 * (r / a_h) * s.cov_xy;
        total += s.sampling_factor() * bracket;
    }
    Ok(total)
}

/// Per-stratum optimum a_h = R_h S²_xh / S_yxh.
///
/// Fails on the first stratum with zero covariance.
pub fn opt_a(design: &StratifiedDesign) -> Result<Vec<f64>> {
    opt_a_partial(design)?
        .into_iter()
        .zip(design.strata())
        .map(|(a, s)| {
            a.ok_or_else(|| Error::UncorrelatedStratum {
                stratum: s.id.clone(),
            })
        })
        .collect()
}

/// Like [`opt_a`], with `None` for strata where S_yxh = 0.
pub fn opt_a_partial(design: &StratifiedDesign) -> Result<Vec<Option<f64>>> {
    design
        .strata()
        .iter()
        .map(|s| {
            let r = s.ratio()?;
            if s.cov_xy == 0.0 {
                return Ok(None);
            }
            let a = r * s.var_x() / s.cov_xy;
            Ok((a != 0.0 && a.is_finite()).then_some(a))
        })
        .collect()
}

/// The aggregates feeding the difference-exponential estimator's MSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentBundle {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    /// Σ W_h² Ȳ_h².
    pub a: f64,
    /// `P1 − A`, summed without the level term.
    pub q: f64,
}

impl MomentBundle {
    /// `2 P3 + 3 P4`.
    fn cross(&self) -> f64 {
        2.0 * self.p3 + 3.0 * self.p4
    }

    /// `4 P1 P2 − (2 P3 + 3 P4)²`.
    pub fn determinant(&self) -> f64 {
        4.0 * self.p1 * self.p2 - self.cross().powi(2)
    }

    pub fn mse_tp(&self, lambda1: f64, lambda2: f64) -> f64 {
        let shortfall = lambda1 - 1.0;
        self.a * shortfall * shortfall + lambda1 * lambda1 * self.q + lambda2 * lambda2 * self.p2
            - lambda1 * lambda2 * self.cross()
    }

    pub fn opt_lambdas(&self) -> Result<(f64, f64)> {
        let det = self.determinant();
        let scale = (4.0 * self.p1 * self.p2).abs().max(self.cross().powi(2));
        if !det.is_finite() || det.abs() <= SINGULAR_TOLERANCE * scale {
            return Err(Error::SingularSystem(det));
        }
        let lambda1 = 4.0 * self.p2 * self.a / det;
        let lambda2 = 2.0 * self.cross() * self.a / det;
        Ok((lambda1, lambda2))
    }
}

pub fn moment_bundle(design: &StratifiedDesign) -> Result<MomentBundle> {
    let mut b = MomentBundle {
        p1: 0.0,
        p2: 0.0,
        p3: 0.0,
        p4: 0.0,
        a: 0.0,
        q: 0.0,
    };
    // P1 is accumulated from its four sums separately, then combined.
    let (mut vy, mut rvx, mut level, mut rcov) = (0.0, 0.0, 0.0, 0.0);
    for s in design.strata() {
        let r = s.ratio()?;
        let g = s.sampling_factor();
        let w2 = s.weight * s.weight;
        vy += g * s.var_y();
        rvx += g * r * r * s.var_x();
        level += w2 * s.mean_y * s.mean_y;
        rcov += g * r * s.cov_xy;
        b.p2 += g * s.var_x();
        b.p3 += g * s.cov_xy;
        b.p4 += g * r * s.var_x();
    }
    b.a = level;
    b.q = vy + 9.0 / 4.0 * rvx + 3.0 * rcov;
    b.p1 = b.q + level;
    Ok(b)
}

pub fn opt_lambdas(design: &StratifiedDesign) -> Result<(f64, f64)> {
    moment_bundle(design)?.opt_lambdas()
}

pub fn mse_tp(design: &StratifiedDesign, lambda1: f64, lambda2: f64) -> Result<f64> {
    Ok(moment_bundle(design)?.mse_tp(lambda1, lambda2))
}

/// First-order bias of the difference-exponential estimator.
///
/// The R_h S²_xh / X̄_h term carries f_h like the other sampling terms.
pub fn bias_tp(design: &StratifiedDesign, lambda1: f64, lambda2: f64) -> Result<f64> {
    let mut total = 0.0;
    for s in design.strata() {
        let r = s.ratio()?;
        let f = s.fpc;
        let term = s.mean_y * (lambda1 - 1.0) + 1.5 * lambda1 * f * s.cov_xy / s.mean_x
            - 1.5 * lambda2 * f * s.var_x() / s.mean_x
            - 15.0 / 8.0 * lambda1 * f * r * s.var_x() / s.mean_x;
        total += s.weight * term;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaPair {
    pub lambda1: f64,
    pub lambda2: f64,
}

/// One row of an efficiency table. `mse` and `pre` are `None` when unavailable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub id: EstimatorId,
    pub mse: Option<f64>,
    pub pre: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unavailable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub estimators: Vec<EstimatorResult>,
    pub lambda_opt: Option<LambdaPair>,
    pub a_opt: Vec<Option<f64>>,
    pub bias_tp: Option<f64>,
    pub mse_tp_min: Option<f64>,
    pub dataset: String,
    pub f_convention: FConvention,
}

impl AnalysisReport {
    pub fn get(&self, id: EstimatorId) -> Option<&EstimatorResult> {
        self.estimators.iter().find(|e| e.id == id)
    }

    pub fn pre(&self, id: EstimatorId) -> Option<f64> {
        self.get(id).and_then(|e| e.pre)
    }

    pub fn mse(&self, id: EstimatorId) -> Option<f64> {
        self.get(id).and_then(|e| e.mse)
    }

    /// Keeps only the listed estimators, in the given order.
    pub fn restricted_to(mut self, ids: &[EstimatorId]) -> Self {
        self.estimators = ids
            .iter()
            .filter_map(|id| self.estimators.iter().find(|e| e.id == *id).cloned())
            .collect();
        self
    }
}

/// Percent relative efficiency of every estimator against ȳ_st.
///
/// `tR` is evaluated at the per-stratum optimum (a_h → ∞ for uncorrelated
/// strata) and `tp` at the closed-form optimum λ's. An estimator whose
/// preconditions fail is reported unavailable.
pub fn pre_table(design: &StratifiedDesign) -> AnalysisReport {
    let a_opt = opt_a_partial(design).unwrap_or_else(|_| vec![None; design.len()]);
    let bundle = moment_bundle(design);
    let lambdas = bundle
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|b| b.opt_lambdas());

    let mse_of = |id: EstimatorId| -> Result<f64> {
        match id {
            EstimatorId::TR => {
                let a: Vec<f64> = a_opt.iter().map(|a| a.unwrap_or(f64::INFINITY)).collect();
                mse_tr(design, &a)
            }
            EstimatorId::Tp => {
                let (l1, l2) = lambdas.clone()?;
                Ok(bundle.as_ref().map_err(Clone::clone)?.mse_tp(l1, l2))
            }
            other => mse_classical(design, other),
        }
    };

    let base = mse_classical(design, EstimatorId::Mean).expect("mean MSE is always defined");
    let estimators = EstimatorId::ALL
        .into_iter()
        .map(|id| match mse_of(id) {
            Ok(mse) => {
                let pre = if id == EstimatorId::Mean {
                    Some(100.0)
                } else {
                    let pre = base / mse * 100.0;
                    pre.is_finite().then_some(pre)
                };
                EstimatorResult {
                    id,
                    mse: Some(mse),
                    pre,
                    unavailable: None,
                }
            }
            Err(e) => EstimatorResult {
                id,
                mse: None,
                pre: None,
                unavailable: Some(e.to_string()),
            },
        })
        .collect();

    let lambda_opt = lambdas
        .as_ref()
        .ok()
        .map(|&(lambda1, lambda2)| LambdaPair { lambda1, lambda2 });
    let bias = lambda_opt.and_then(|l| bias_tp(design, l.lambda1, l.lambda2).ok());
    let mse_tp_min = match (&bundle, lambda_opt) {
        (Ok(b), Some(l)) => Some(b.mse_tp(l.lambda1, l.lambda2)),
        _ => None,
    };

    AnalysisReport {
        dataset: design.name().unwrap_or("custom").to_string(),
        f_convention: design.f_convention(),
        estimators,
        lambda_opt,
        a_opt,
        bias_tp: bias,
        mse_tp_min,
    }
}
