//! Shared fixtures for the criterion benches.

use strata_core::io::{builtin_dataset, KADILAR_CINGI_1999};
use strata_core::montecarlo::{
    gen_population, Family, FinitePopulation, PopulationSpec, StratumTarget,
};
use strata_core::StratifiedDesign;

pub fn kadilar() -> StratifiedDesign {
    builtin_dataset(KADILAR_CINGI_1999).expect("embedded dataset")
}

/// Three gaussian strata of `size` units each, correlation 0.8.
pub fn gaussian_population(size: u64) -> FinitePopulation {
    let strata = (0..3)
        .map(|h| StratumTarget {
            id: format!("s{h}"),
            population: size,
            mean_x: 100.0 + 20.0 * h as f64,
            mean_y: 50.0 + 10.0 * h as f64,
            sd_x: 15.0,
            sd_y: 10.0,
            rho: 0.8,
        })
        .collect();
    gen_population(&PopulationSpec {
        strata,
        family: Family::Gaussian,
        seed: 11,
    })
    .expect("valid spec")
}
