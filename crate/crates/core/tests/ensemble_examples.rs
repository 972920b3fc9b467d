//! Worked examples of the ensemble layer at desk scale. The full-scale runs
//! (n = 1000 or n = 400 histograms) are `#[ignore]`d; run them with
//! `cargo test --release -- --ignored`.

use std::f64::consts::SQRT_2;

use svs_core::ensemble::{
    calibrate_references, locate_parameter, run_hist, run_point, run_sweep, AatScale, Budget, Control, HistJob,
    HistStat, HistogramSpec, LocateOptions, PointConfig, StatFlags, SweepSpec,
};
use svs_core::models::{derive_seed, GraphModel, GraphModelParams};
use svs_core::stats::{RatioFamily, ReferenceConstants};

fn ratios_only(family: RatioFamily) -> PointConfig {
    PointConfig {
        flags: StatFlags::only(family),
        ..PointConfig::default()
    }
}

fn normalized_curve(model: GraphModel, grid: &str, realizations: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let spec = SweepSpec {
        model,
        n_list: vec![100],
        param_grid: svs_core::ensemble::parse_grid(grid).unwrap(),
        budget: Budget::Realizations(realizations),
        master_seed: seed,
        config: ratios_only(RatioFamily::RrAat),
    };
    let result = run_sweep(&spec).unwrap();
    assert!(result.errors.is_empty());
    result
        .points
        .iter()
        .map(|p| {
            let r = p.rr_aat.unwrap();
            (p.param().unwrap(), r.normalized, r.normalized_std_err.unwrap())
        })
        .collect()
}

#[test]
fn derg_isolated_limit_has_zero_normalized_ratios() {
    let stats = run_point(
        &GraphModelParams::Derg { n: 100, p: 1e-4 },
        10_000,
        11,
        &PointConfig {
            flags: StatFlags {
                min_singular: false,
                ..StatFlags::ALL
            },
            ..PointConfig::default()
        },
    )
    .unwrap();
    for family in RatioFamily::ALL {
        let r = stats.ratio(family).unwrap();
        assert!(r.normalized.abs() < 0.05, "{}: {}", family.label(), r.normalized);
    }
}

#[test]
fn derg_curve_is_monotone_within_noise() {
    let curve = normalized_curve(GraphModel::Derg, "log:1e-4:1:12", 300, 12);
    for pair in curve.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let slack = 2.0 * a.2.hypot(b.2);
        assert!(b.1 >= a.1 - slack, "drop from {a:?} to {b:?}");
    }
}

#[test]
fn drrg_curve_rises_from_zero_to_one() {
    let curve = normalized_curve(GraphModel::Drrg, &format!("log:1e-3:{SQRT_2}:12"), 300, 13);
    let (first, last) = (curve[0], curve[curve.len() - 1]);
    assert!(first.1.abs() <= 2.0 * first.2 + 0.02, "{first:?}");
    assert!((last.1 - 1.0).abs() <= 2.0 * last.2 + 0.02, "{last:?}");
}

#[test]
fn single_point_sweep_is_run_point() {
    let spec = SweepSpec {
        model: GraphModel::Drrg,
        n_list: vec![40],
        param_grid: vec![0.3],
        budget: Budget::Realizations(25),
        master_seed: 14,
        config: PointConfig::default(),
    };
    let swept = run_sweep(&spec).unwrap().points.remove(0);
    let direct = run_point(&GraphModelParams::Drrg { n: 40, rho: 0.3 }, 25, derive_seed(14, 0), &spec.config).unwrap();
    assert_eq!(swept, direct);
}

#[test]
fn small_graphs_bias_complex_ratios_more_than_real_ones() {
    let cal = calibrate_references(10, 10_000, 15, AatScale::Singular).unwrap();
    assert!(cal.small_n_warning);
    let dev = |f: RatioFamily| {
        let (pe, rge) = cal.constants.endpoints(f);
        let (pe0, rge0) = ReferenceConstants::PUBLISHED.endpoints(f);
        (pe - pe0).abs().max((rge - rge0).abs())
    };
    let real = dev(RatioFamily::RrAat);
    let complex = dev(RatioFamily::RcA).max(dev(RatioFamily::RcAat));
    assert!(real < 0.02, "rR deviation {real}");
    let se = cal.std_errors.rc_rge.max(cal.std_errors.rr_rge_rget);
    assert!(complex > real + 3.0 * se, "rC deviation {complex} vs rR {real}");
}

#[test]
fn locate_accepts_the_connected_endpoint() {
    let found = locate_parameter(GraphModel::Derg, 100, 1.0, 0.02, 16, &LocateOptions::default()).unwrap();
    assert!(found.param >= 0.5, "{found:?}");
    let check = run_point(&GraphModelParams::Derg { n: 100, p: 0.5 }, 500, 17, &ratios_only(RatioFamily::RrAat)).unwrap();
    let r = check.rr_aat.unwrap();
    assert!((r.normalized - 1.0).abs() < 0.02 + 2.0 * r.normalized_std_err.unwrap(), "{r:?}");
}

#[test]
fn locate_accepts_the_isolated_endpoint() {
    let found = locate_parameter(GraphModel::Drrg, 100, 0.0, 0.02, 18, &LocateOptions::default()).unwrap();
    assert!((found.param - 1e-3).abs() < 1e-12, "{found:?}");
}

#[test]
fn located_parameter_validates_on_an_independent_ensemble() {
    let found = locate_parameter(GraphModel::Derg, 100, 0.5, 0.01, 19, &LocateOptions::default()).unwrap();
    let check = run_point(
        &GraphModelParams::Derg { n: 100, p: found.param },
        4000,
        20,
        &ratios_only(RatioFamily::RrAat),
    )
    .unwrap();
    let r = check.rr_aat.unwrap();
    assert!((r.normalized - 0.5).abs() <= 0.02, "p = {}: {r:?}", found.param);
}

fn fixed_rbar_histogram(model: GraphModel, n: usize, seed: u64) -> svs_core::stats::DensityHistogram {
    let job = HistJob {
        model,
        n,
        control: Control::TargetRbar(0.5),
        budget: Budget::Ratios(100_000),
        seed,
        stats: vec![HistStat::RrAat],
        bins: HistogramSpec {
            ratio_bins: 20,
            ..HistogramSpec::default()
        },
        scale: AatScale::Singular,
        refs: ReferenceConstants::PUBLISHED,
        tolerance: 0.02,
    };
    let result = run_hist(&job).unwrap();
    result.stats.histograms.unwrap().rr_aat.unwrap()
}

fn assert_size_invariant(model: GraphModel, sizes: &[usize]) {
    let hists: Vec<_> = sizes.iter().map(|&n| fixed_rbar_histogram(model, n, 21 + n as u64)).collect();
    for i in 0..hists.len() {
        for j in i + 1..hists.len() {
            let d = hists[i].max_abs_difference(&hists[j]).unwrap();
            assert!(d < 0.05, "{model} n={} vs n={}: {d}", sizes[i], sizes[j]);
        }
    }
}

#[test]
fn fixed_rbar_ratio_density_does_not_depend_on_size() {
    assert_size_invariant(GraphModel::Derg, &[100, 200]);
}

#[test]
#[ignore = "full scale"]
fn fixed_rbar_ratio_density_does_not_depend_on_size_up_to_400() {
    for model in [GraphModel::Derg, GraphModel::Drrg] {
        assert_size_invariant(model, &[100, 200, 400]);
    }
}

#[test]
#[ignore = "full scale"]
fn table_constants_at_n_1000() {
    let cal = calibrate_references(1000, 1000, 22, AatScale::Singular).unwrap();
    assert!((cal.constants.rr_pe_pet - 0.386).abs() < 0.005);
    assert!((cal.constants.rc_rge_rget - 0.569).abs() < 0.005);
    assert!((cal.pe.rc_a.unwrap().mean - 0.500).abs() < 0.005);
    assert!((cal.rge.rc_a.unwrap().mean - 0.737).abs() < 0.005);
}
