//! Synthetic populations, SRSWOR replication, exact enumeration and a brute
//! force λ grid: the empirical checks behind every analytic formula.

mod enumerate;
mod grid;
mod population;
mod sampling;
mod simulate;
mod stream;

pub use enumerate::{
    enumerate_exact, sample_count, ExactEstimator, ExactReport, ENUMERATION_LIMIT,
};
pub use grid::{grid_lambda_oracle, GridMinimum, MIN_RESOLUTION};
pub use population::{
    gen_population, Family, FinitePopulation, PopulationSpec, PopulationStratum, StratumTarget,
};
pub use sampling::draw_srswor;
pub use simulate::{
    simulate, SimulatedEstimator, SimulationConfig, SimulationReport, CHUNK_SIZE,
    FAILURE_FLAG_RATE, MIN_REPLICATES,
};
pub use stream::{stream_rng, Domain};
