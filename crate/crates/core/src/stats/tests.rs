use super::*;
use crate::exec::{stream_rng, ExecMode};
use approx::assert_relative_eq;
use proptest::prelude::*;
use rand_distr::{Distribution, Exp1};

#[test]
fn ks_examples() {
    let xs = [0.3, 1.0, 2.0, 2.0, 7.0];
    assert_eq!(ks_distance(&xs, &xs).unwrap(), 0.0);
    assert_eq!(ks_distance(&[-3.0, -1.0], &[1.5, 4.0, 9.0]).unwrap(), 1.0);
    assert_relative_eq!(ks_distance(&[1.0, 2.0, 3.0], &[1.5, 2.5]).unwrap(), 1.0 / 3.0, max_relative = 1e-15);
    assert!(ks_distance(&[], &[1.0]).is_err());
}

#[test]
fn weighted_ks_reduces_to_plain() {
    let xs = [0.1, 0.5, 0.9, 1.3];
    let ys = [0.2, 0.4, 1.1];
    let w = [2.0; 4];
    assert_eq!(weighted_ks_distance(&xs, &w, &ys).unwrap(), ks_distance(&xs, &ys).unwrap());
    // all weight on the largest point
    let d = weighted_ks_distance(&xs, &[0.0, 0.0, 0.0, 1.0], &ys).unwrap();
    assert_relative_eq!(d, 1.0, max_relative = 1e-15);
}

#[test]
fn one_sample_ks_on_uniform_grid() {
    let xs: Vec<f64> = (0..100).map(|k| (k as f64 + 0.5) / 100.0).collect();
    assert_relative_eq!(ks_one_sample(&xs, |x| x).unwrap(), 0.005, max_relative = 1e-9);
}

#[test]
fn ks_critical_values() {
    let c = ks_critical(100_000, 100_000, 0.01).unwrap();
    assert_relative_eq!(c, 1.628 * (2.0f64 / 1e5).sqrt(), max_relative = 1e-3);
    assert!(ks_critical(1000, 0, 0.01).unwrap() > ks_critical(10_000, 0, 0.01).unwrap());
    assert!(ks_critical(10, 10, 0.02).is_err());
}

#[test]
fn moment_examples() {
    let c = moment_report(&[1.5; 10], 3).unwrap();
    assert_eq!(c.value, 3.375);
    assert_eq!(c.se, 0.0);
    let e = moment_report(&[0.0, 2.0], 1).unwrap();
    assert_eq!((e.value, e.se), (1.0, 1.0));
    let xs = [0.3, 1.7, 2.2, 5.0];
    assert_eq!(moment_report(&xs, 1).unwrap().value, Estimate::mean_of(&xs).unwrap().value);
    assert_relative_eq!(moment_report(&xs, 1).unwrap().se, Estimate::mean_of(&xs).unwrap().se, max_relative = 1e-12);
}

#[test]
fn bootstrap_properties() {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (lo, hi) = bootstrap_ci(&[2.5; 50], mean, 0.9, 200, 1, ExecMode::Sequential).unwrap();
    assert_eq!((lo, hi), (2.5, 2.5));
    let mut rng = stream_rng(4, 0);
    let xs: Vec<f64> = (0..200).map(|_| Exp1.sample(&mut rng)).collect();
    let mut prev = (f64::INFINITY, f64::NEG_INFINITY);
    for level in [0.5, 0.8, 0.9, 0.99] {
        let ci = bootstrap_ci(&xs, mean, level, 500, 11, ExecMode::Parallel).unwrap();
        assert!(ci.0 <= prev.0 && ci.1 >= prev.1);
        prev = ci;
    }
    let a = bootstrap_ci(&xs, mean, 0.9, 300, 5, ExecMode::Sequential).unwrap();
    let b = bootstrap_ci(&xs, mean, 0.9, 300, 5, ExecMode::Parallel).unwrap();
    assert_eq!(a, b);
    assert!(bootstrap_ci(&xs, mean, 0.9, 50, 5, ExecMode::Sequential).is_err());
}

#[test]
fn bootstrap_coverage_of_exponential_mean() {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let level = 0.9;
    let trials = 200;
    let covered = (0..trials)
        .filter(|&t| {
            let mut rng = stream_rng(77, t);
            let xs: Vec<f64> = (0..100).map(|_| Exp1.sample(&mut rng)).collect();
            let (lo, hi) = bootstrap_ci(&xs, mean, level, 400, 1000 + t, ExecMode::Parallel).unwrap();
            lo <= 1.0 && 1.0 <= hi
        })
        .count();
    let rate = covered as f64 / trials as f64;
    assert!((rate - level).abs() <= 0.05, "coverage {rate}");
}

#[test]
fn report_pass_rule_and_json() {
    let r = ComparisonReport::new("demo", Estimate { value: 1.02, se: 0.01, n: 10 }, Estimate::exact(1.0), 0.0, 3.0)
        .param("gamma", 0.5)
        .seed(7)
        .diagnostic("inf", f64::INFINITY);
    assert!(r.pass);
    let back = ComparisonReport::from_json(&r.to_json()).unwrap();
    assert_eq!(back, r);
    assert!(r.to_json().contains("\"schema\": 1"));
    let f = ComparisonReport::new("demo", Estimate::exact(1.1), Estimate::exact(1.0), 0.05, 3.0);
    assert!(!f.pass);
    let g = ComparisonReport::new("demo", Estimate::exact(1.0), Estimate::exact(1.0), 0.0, 3.0).check("trend", false);
    assert!(g.pass && !g.all_pass());
}

#[test]
fn ecdf_export() {
    let csv = ecdf_csv(&[1.0, 2.0], &[1.5]);
    assert_eq!(csv, "x,ecdf_lhs,ecdf_rhs\n1.0,0.5,0.0\n1.5,0.5,1.0\n2.0,1.0,1.0\n");
}

proptest! {
    #[test]
    fn ks_symmetric_and_triangle(
        x in prop::collection::vec(-5.0f64..5.0, 1..40),
        y in prop::collection::vec(-5.0f64..5.0, 1..40),
        z in prop::collection::vec(-5.0f64..5.0, 1..40),
    ) {
        let xy = ks_distance(&x, &y).unwrap();
        prop_assert_eq!(xy, ks_distance(&y, &x).unwrap());
        let xz = ks_distance(&x, &z).unwrap();
        let yz = ks_distance(&y, &z).unwrap();
        prop_assert!(xz <= xy + yz + 1e-12);
        prop_assert!((0.0..=1.0).contains(&xy));
    }
}
