//! Separate ratio, product, exponential, regression and difference-exponential
//! estimators of a finite-population mean under stratified simple random
//! sampling without replacement.
//!
//! The crate covers three layers:
//!
//! * point estimation from a drawn sample ([`estimators`]),
//! * first-order MSE, bias, optimum tuning constants and percent relative
//!   efficiencies from population summaries ([`analysis`]),
//! * simulation, exact enumeration and grid search that check those
//!   approximations empirically ([`montecarlo`]).

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod io;
pub mod model;
pub mod montecarlo;

pub use analysis::{
    bias_tp, moment_bundle, mse_classical, mse_tp, mse_tr, opt_a, opt_a_partial, opt_lambdas,
    pre_table, AnalysisReport, EstimatorResult, LambdaPair, MomentBundle,
};
pub use error::{Error, Result};
pub use estimators::{point_estimate_classical, point_estimate_tp, EstimatorId};
pub use model::{
    finalize_design, FConvention, SampleMoments, StratifiedDesign, StratumFrame, StratumRecord,
    StratumSample, SurveySample, TuningParams,
};
