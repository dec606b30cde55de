//! Embedded reference datasets.

use crate::error::{Error, Result};
use crate::model::{finalize_design, FConvention, StratifiedDesign, StratumRecord};

/// Apple production (y) against number of apple trees (x) in 854 Turkish villages, 1999.
pub const KADILAR_CINGI_1999: &str = "kadilar-cingi-1999";

pub const AVAILABLE: [&str; 1] = [KADILAR_CINGI_1999];

/// The finite population corrections as printed alongside the dataset.
/// The last value is inconsistent with N = 173, n = 2.
pub const KADILAR_CINGI_TABULATED_FPC: [f64; 6] = [0.102, 0.049, 0.016, 0.009, 0.138, 0.006];

// id, N, n, X̄, Ȳ, S_x, S_y, ρ, C_x, C_y, β2(x)
#[allow(clippy::type_complexity)]
const KADILAR_CINGI_ROWS: [(&str, u64, u64, f64, f64, f64, f64, f64, f64, f64, f64); 6] = [
    (
        "1", 106, 9, 24375.0, 536.0, 49189.0, 6425.0, 0.82, 2.02, 4.18, 25.71,
    ),
    (
        "2", 106, 17, 27421.0, 2212.0, 57461.0, 11552.0, 0.86, 2.10, 5.22, 34.57,
    ),
    (
        "3", 94, 38, 72409.0, 9384.0, 160757.0, 29907.0, 0.90, 2.22, 3.19, 26.14,
    ),
    (
        "4", 171, 67, 74365.0, 5588.0, 285603.0, 28643.0, 0.99, 3.84, 5.13, 97.60,
    ),
    (
        "5", 204, 7, 26441.0, 967.0, 45403.0, 2390.0, 0.71, 1.72, 2.47, 27.47,
    ),
    (
        "6", 173, 2, 9844.0, 404.0, 18794.0, 946.0, 0.89, 1.91, 2.34, 28.10,
    ),
];

/// Looks up an embedded dataset with f_h computed from N_h and n_h.
pub fn builtin_dataset(name: &str) -> Result<StratifiedDesign> {
    builtin_dataset_with(name, FConvention::Computed)
}

/// Looks up an embedded dataset, optionally with its tabulated f_h values.
pub fn builtin_dataset_with(name: &str, convention: FConvention) -> Result<StratifiedDesign> {
    if name != KADILAR_CINGI_1999 {
        return Err(Error::UnknownDataset {
            name: name.to_string(),
            available: AVAILABLE.to_vec(),
        });
    }
    let records = KADILAR_CINGI_ROWS
        .iter()
        .zip(KADILAR_CINGI_TABULATED_FPC)
        .map(
            |(&(id, big_n, n, mx, my, sx, sy, rho, cx, cy, b2), f)| StratumRecord {
                cx: Some(cx),
                cy: Some(cy),
                beta2x: Some(b2),
                fpc_override: (convention == FConvention::Tabulated).then_some(f),
                ..StratumRecord::new(id, big_n, n, mx, my, sx, sy, rho)
            },
        )
        .collect();
    Ok(finalize_design(records)?.with_name(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals() {
        let d = builtin_dataset(KADILAR_CINGI_1999).unwrap();
        assert_eq!(d.population(), 854);
        assert_eq!(d.sample(), 140);
        assert_eq!(d.len(), 6);
        assert_eq!(d.f_convention(), FConvention::Computed);
        let s4 = &d.strata()[3];
        assert_eq!((s4.rho, s4.sd_x, s4.sd_y), (0.99, 285603.0, 28643.0));
        assert_eq!(s4.cov_xy, 0.99 * 28643.0 * 285603.0);
    }

    #[test]
    fn tabulated_variant() {
        let d = builtin_dataset_with(KADILAR_CINGI_1999, FConvention::Tabulated).unwrap();
        assert_eq!(d.f_convention(), FConvention::Tabulated);
        assert_eq!(d.strata()[5].fpc, 0.006);
        assert!((d.strata()[5].computed_fpc() - 0.4942).abs() < 1e-4);
        assert_eq!(
            d.without_fpc_overrides().strata(),
            builtin_dataset(KADILAR_CINGI_1999).unwrap().strata()
        );
    }

    #[test]
    fn unknown_name_lists_available() {
        match builtin_dataset("nope") {
            Err(Error::UnknownDataset { available, .. }) => {
                assert_eq!(available, vec![KADILAR_CINGI_1999])
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
