use proptest::prelude::*;
use strata_core::io::{parse_summary_csv, write_summary_csv};
use strata_core::montecarlo::{
    gen_population, simulate, Family, PopulationSpec, SimulationConfig, StratumTarget,
};
use strata_core::{
    finalize_design, moment_bundle, mse_classical, mse_tp, mse_tr, opt_a, opt_lambdas,
    point_estimate_classical, point_estimate_tp, pre_table, EstimatorId, StratifiedDesign,
    StratumRecord, StratumSample, SurveySample,
};

const CLASSICAL: [EstimatorId; 6] = [
    EstimatorId::Mean,
    EstimatorId::T1,
    EstimatorId::T2,
    EstimatorId::T3,
    EstimatorId::T4,
    EstimatorId::Tlr,
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn record() -> impl Strategy<Value = StratumRecord> {
    (
        5u64..400,
        0.0..1.0f64,
        1.0..1e4f64,
        1.0..1e4f64,
        0.05..3.0f64,
        0.05..3.0f64,
        0.05..0.99f64,
        any::<bool>(),
    )
        .prop_map(|(big_n, frac, mx, my, cv_x, cv_y, rho, neg)| {
            let n = 2 + ((big_n - 2) as f64 * frac) as u64;
            let rho = if neg { -rho } else { rho };
            StratumRecord::new("", big_n, n.min(big_n), mx, my, cv_x * mx, cv_y * my, rho)
        })
}

fn design_with(positive: bool) -> impl Strategy<Value = StratifiedDesign> {
    prop::collection::vec(record(), 1..7).prop_map(move |records| {
        let records = records
            .into_iter()
            .enumerate()
            .map(|(h, mut r)| {
                r.id = format!("s{h}");
                if positive {
                    r.rho = r.rho.abs();
                }
                r
            })
            .collect();
        finalize_design(records).unwrap()
    })
}

fn design() -> impl Strategy<Value = StratifiedDesign> {
    design_with(false)
}

fn sample_values(len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-50.0..150.0f64, len),
        prop::collection::vec(1.0..100.0f64, len),
    )
}

fn design_and_sample() -> impl Strategy<Value = (StratifiedDesign, SurveySample)> {
    prop::collection::vec((3usize..9, 1.0..100.0f64), 1..5)
        .prop_flat_map(|shape| {
            let values: Vec<_> = shape.iter().map(|&(len, _)| sample_values(len)).collect();
            (Just(shape), values)
        })
        .prop_map(|(shape, values)| {
            let records = shape
                .iter()
                .enumerate()
                .map(|(h, &(len, big_x))| {
                    StratumRecord::new(
                        format!("s{h}"),
                        50,
                        len as u64,
                        big_x,
                        40.0,
                        10.0,
                        12.0,
                        0.6,
                    )
                })
                .collect();
            let design = finalize_design(records).unwrap();
            let strata = values
                .into_iter()
                .enumerate()
                .map(|(h, (y, x))| StratumSample::new(format!("s{h}"), y, x).unwrap())
                .collect();
            (design, SurveySample::new(strata))
        })
}

fn map_sample(
    sample: &SurveySample,
    f: impl Fn(usize, &[f64], &[f64]) -> (Vec<f64>, Vec<f64>),
) -> SurveySample {
    SurveySample::new(
        sample
            .strata
            .iter()
            .enumerate()
            .map(|(h, s)| {
                let (y, x) = f(h, &s.values_y, &s.values_x);
                StratumSample::new(s.id.clone(), y, x).unwrap()
            })
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn weights_sum_to_one_and_covariance_matches(d in design()) {
        let total: f64 = d.strata().iter().map(|s| s.weight).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for s in d.strata() {
            prop_assert!(rel(s.cov_xy, s.rho * s.sd_y * s.sd_x) < 1e-12);
            prop_assert!(s.fpc >= 0.0);
        }
    }

    #[test]
    fn finalize_is_idempotent(d in design()) {
        let again = finalize_design(d.to_records()).unwrap();
        prop_assert_eq!(again.strata(), d.strata());
    }

    #[test]
    fn summary_csv_round_trips(d in design()) {
        let parsed = parse_summary_csv(&write_summary_csv(&d)).unwrap();
        prop_assert_eq!(parsed.strata(), d.strata());
    }

    #[test]
    fn tr_reduces_to_named_estimators(d in design()) {
        let k = d.len();
        for (a, id) in [(1.0, EstimatorId::T1), (2.0, EstimatorId::T3), (-2.0, EstimatorId::T4)] {
            let got = mse_tr(&d, &vec![a; k]).unwrap();
            let want = mse_classical(&d, id).unwrap();
            prop_assert!(rel(got, want) <= 1e-12, "{id}: {got} vs {want}");
        }
        let at_opt = mse_tr(&d, &opt_a(&d).unwrap()).unwrap();
        let tlr = mse_classical(&d, EstimatorId::Tlr).unwrap();
        prop_assert!(rel(at_opt, tlr) <= 1e-9, "{at_opt} vs {tlr}");
    }

    #[test]
    fn closed_form_lambdas_are_the_minimum(d in design(), dl1 in -0.5..0.5f64, dl2 in -0.5..0.5f64) {
        let b = moment_bundle(&d).unwrap();
        let (l1, l2) = opt_lambdas(&d).unwrap();
        let best = mse_tp(&d, l1, l2).unwrap();
        prop_assert!(rel(best, b.a * (1.0 - l1)) <= 1e-9);
        let scale = d.mean_y() / d.mean_x();
        let other = mse_tp(&d, l1 + dl1, l2 + dl2 * scale).unwrap();
        prop_assert!(other >= best * (1.0 - 1e-12));
        for i in 0..=8 {
            for j in 0..=8 {
                let g1 = i as f64 / 4.0;
                let g2 = (j as f64 - 4.0) / 2.0 * scale;
                prop_assert!(mse_tp(&d, g1, g2).unwrap() >= best * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn regression_dominates(d in design()) {
        let b = moment_bundle(&d).unwrap();
        prop_assert!(b.p1 >= b.a * (1.0 - 1e-12));
        let tlr = mse_classical(&d, EstimatorId::Tlr).unwrap();
        for id in [EstimatorId::Mean, EstimatorId::T1, EstimatorId::T2, EstimatorId::T3, EstimatorId::T4] {
            prop_assert!(mse_classical(&d, id).unwrap() >= tlr * (1.0 - 1e-12), "{id}");
        }
    }

    #[test]
    fn positive_correlation_orders_ratio_and_product(d in design_with(true)) {
        let t1 = mse_classical(&d, EstimatorId::T1).unwrap();
        let t2 = mse_classical(&d, EstimatorId::T2).unwrap();
        let t3 = mse_classical(&d, EstimatorId::T3).unwrap();
        let t4 = mse_classical(&d, EstimatorId::T4).unwrap();
        prop_assert!(t1 < t2);
        prop_assert!(t3 < t4);
    }

    #[test]
    fn stratum_order_does_not_matter(d in design()) {
        let mut records = d.to_records();
        records.reverse();
        let flipped = finalize_design(records).unwrap();
        let (a, b) = (pre_table(&d), pre_table(&flipped));
        for id in EstimatorId::ALL {
            match (a.mse(id), b.mse(id)) {
                (Some(x), Some(y)) => prop_assert!(rel(x, y) <= 1e-9, "{id}: {x} vs {y}"),
                (x, y) => prop_assert_eq!(x, y),
            }
        }
    }

    #[test]
    fn sample_mean_at_population_mean_collapses((d, sample) in design_and_sample(), l1 in 0.0..2.0f64, l2 in -1.0..1.0f64) {
        let collapsed = map_sample(&sample, |h, y, x| {
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            let shift = d.strata()[h].mean_x - mean;
            (y.to_vec(), x.iter().map(|v| v + shift).collect())
        });
        let mean = point_estimate_classical(EstimatorId::Mean, &collapsed, &d, None).unwrap();
        let a = vec![3.0; d.len()];
        for id in [EstimatorId::T1, EstimatorId::T2, EstimatorId::T3, EstimatorId::T4, EstimatorId::Tlr, EstimatorId::TR] {
            let t = point_estimate_classical(id, &collapsed, &d, Some(&a)).unwrap();
            prop_assert!((t - mean).abs() <= 1e-9 * (1.0 + mean.abs()), "{id}: {t} vs {mean}");
        }
        let tp = point_estimate_tp(&collapsed, &d, l1, l2).unwrap();
        prop_assert!((tp - l1 * mean).abs() <= 1e-9 * (1.0 + mean.abs()));
    }

    #[test]
    fn estimators_scale_with_y((d, sample) in design_and_sample(), c in 0.1..10.0f64) {
        let scaled = map_sample(&sample, |_, y, x| (y.iter().map(|v| v * c).collect(), x.to_vec()));
        let a = vec![3.0; d.len()];
        for id in CLASSICAL.into_iter().chain([EstimatorId::TR]) {
            let base = point_estimate_classical(id, &sample, &d, Some(&a)).unwrap();
            let t = point_estimate_classical(id, &scaled, &d, Some(&a)).unwrap();
            prop_assert!((t - c * base).abs() <= 1e-9 * (1.0 + (c * base).abs()), "{id}");
        }
        let base = point_estimate_tp(&sample, &d, 0.8, 0.3).unwrap();
        let t = point_estimate_tp(&scaled, &d, 0.8, 0.3 * c).unwrap();
        prop_assert!((t - c * base).abs() <= 1e-9 * (1.0 + (c * base).abs()));
    }

    #[test]
    fn estimators_ignore_unit_order((d, sample) in design_and_sample(), rot in 0usize..8) {
        let shuffled = map_sample(&sample, |_, y, x| {
            let k = rot % y.len();
            let (mut y, mut x) = (y.to_vec(), x.to_vec());
            y.rotate_left(k);
            x.rotate_left(k);
            y.reverse();
            x.reverse();
            (y, x)
        });
        let a = vec![3.0; d.len()];
        for id in CLASSICAL.into_iter().chain([EstimatorId::TR]) {
            let base = point_estimate_classical(id, &sample, &d, Some(&a)).unwrap();
            let t = point_estimate_classical(id, &shuffled, &d, Some(&a)).unwrap();
            prop_assert!((t - base).abs() <= 1e-9 * (1.0 + base.abs()), "{id}");
        }
    }
}

fn spec_from(d: &StratifiedDesign, seed: u64) -> PopulationSpec {
    PopulationSpec {
        strata: d
            .strata()
            .iter()
            .map(|s| StratumTarget {
                id: s.id.clone(),
                population: s.population,
                mean_x: s.mean_x,
                mean_y: s.mean_y,
                sd_x: s.sd_x,
                sd_y: s.sd_y,
                rho: s.rho,
            })
            .collect(),
        family: Family::Gaussian,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn realized_summary_agrees_with_units(d in design(), seed in any::<u64>()) {
        let pop = gen_population(&spec_from(&d, seed)).unwrap();
        let realized = pop.realized_design(&d.sample_sizes()).unwrap();
        prop_assert!(rel(realized.mean_y(), pop.mean_y()) <= 1e-9);
        for (s, units) in realized.strata().iter().zip(&pop.strata) {
            let n = units.len() as f64;
            let my = units.y.iter().sum::<f64>() / n;
            let mx = units.x.iter().sum::<f64>() / n;
            let syy = units.y.iter().map(|v| (v - my).powi(2)).sum::<f64>() / (n - 1.0);
            let sxy = units.y.iter().zip(&units.x).map(|(y, x)| (y - my) * (x - mx)).sum::<f64>() / (n - 1.0);
            prop_assert!((s.mean_y - my).abs() <= 1e-9 * my.abs().max(1.0));
            prop_assert!(rel(s.var_y(), syy) <= 1e-9);
            prop_assert!((s.cov_xy - sxy).abs() <= 1e-9 * (s.sd_x * s.sd_y).max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulated_mse_bounds_squared_bias(d in design_with(true), seed in any::<u64>()) {
        let pop = gen_population(&spec_from(&d, seed)).unwrap();
        let report = simulate(&pop, &d.sample_sizes(), &EstimatorId::ALL, SimulationConfig::new(200, seed)).unwrap();
        for e in &report.estimators {
            if let (Some(mse), Some(bias)) = (e.empirical_mse, e.empirical_bias) {
                prop_assert!(mse >= bias * bias, "{}: {mse} < {}", e.id, bias * bias);
            }
        }
    }
}
