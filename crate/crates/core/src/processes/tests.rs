use super::*;
use crate::exec::stream_rng;
use crate::numeric::integrate;
use crate::paths::{Factor, PathFunctional, ProductFunctional};
use crate::stats::{ks_critical, ks_distance, ks_one_sample, moment_report, Estimate};
use approx::assert_relative_eq;
use std::f64::consts::PI;

fn gi(g: f64) -> GammaIndex {
    GammaIndex::new(g).unwrap()
}

#[test]
fn gamma_index_bounds() {
    assert!(GammaIndex::new(0.0).is_err());
    assert!(GammaIndex::new(1.0).is_err());
    assert!(GammaIndex::new(f64::NAN).is_err());
    assert!(serde_json::from_str::<GammaIndex>("1.5").is_err());
    assert_eq!(serde_json::from_str::<GammaIndex>("0.25").unwrap().get(), 0.25);
}

#[test]
fn levy_density_matches_zolotarev() {
    let g = gi(0.5);
    assert_relative_eq!(levy_density(1.0), (-0.25f64).exp() / (2.0 * PI.sqrt()), max_relative = 1e-15);
    assert_relative_eq!(levy_density(1.0), 0.219_695_644_733_861_4, max_relative = 1e-12);
    for x in [0.02, 0.1, 0.5, 1.0, 3.0, 40.0, 2000.0] {
        assert_relative_eq!(standard_stable_density(g, x).unwrap(), levy_density(x), max_relative = 1e-8);
        assert_relative_eq!(standard_stable_cdf(g, x).unwrap(), levy_cdf(x), max_relative = 1e-8);
    }
    // scale mapping: Z = S / Gamma(3/2)^2
    let c = z_scale(g);
    assert_relative_eq!(c, PI / 4.0, max_relative = 1e-14);
    assert_relative_eq!(stable_density(g, 0.7).unwrap(), c * levy_density(c * 0.7), max_relative = 1e-8);
    assert!(stable_density(g, 0.0).is_err());
}

#[test]
fn stable_sampler_matches_levy_law() {
    let g = gi(0.5);
    let mut rng = stream_rng(21, 0);
    let xs: Vec<f64> = (0..20_000).map(|_| sample_standard_stable(g, &mut rng)).collect();
    let d = ks_one_sample(&xs, levy_cdf).unwrap();
    assert!(d < ks_critical(xs.len(), 0, 0.01).unwrap(), "KS {d}");
}

#[test]
fn stable_sampler_matches_zolotarev_cdf() {
    for gamma in [0.3, 0.7] {
        let g = gi(gamma);
        let mut rng = stream_rng(22, 0);
        let xs: Vec<f64> = (0..4000).map(|_| sample_standard_stable(g, &mut rng)).collect();
        let d = ks_one_sample(&xs, |x| standard_stable_cdf(g, x).unwrap()).unwrap();
        assert!(d < ks_critical(xs.len(), 0, 0.01).unwrap(), "gamma {gamma}: KS {d}");
    }
}

// integral over (0, inf) in log coordinates plus the leading stable tail beyond e^s_max
fn z_integral(g: GammaIndex, weight: impl Fn(f64) -> f64) -> f64 {
    let s_max = 60.0;
    integrate(
        |s: f64| {
            let x = s.exp();
            stable_density(g, x).unwrap() * weight(x) * x
        },
        -12.0,
        s_max,
        1e-13,
        1e-12,
        72,
    )
    .unwrap()
    .value
}

#[test]
fn stable_density_normalizations() {
    for gamma in [0.3, 0.5, 0.7] {
        let g = gi(gamma);
        let c = z_scale(g);
        let tail = (c * 60f64.exp()).powf(-gamma) / crate::numeric::gamma(1.0 - gamma);
        let mass = z_integral(g, |_| 1.0) + tail;
        assert!((mass - 1.0).abs() < 1e-6, "gamma {gamma}: mass {mass}");
        let neg = z_integral(g, |x| x.powf(-gamma));
        assert!((neg - 1.0).abs() < 1e-4, "gamma {gamma}: E Z^-gamma = {neg}");
    }
}

#[test]
fn kanter_factor_integral() {
    // E m(1) = Gamma(1+g) Gamma(2-g) E q(U) = 1 requires int_0^pi q = sin(pi g) / (g (1-g))
    for g in [0.2, 0.5, 0.8] {
        let q = integrate(|u| stable::kanter_q(g, u), 0.0, PI, 1e-14, 1e-12, 16).unwrap().value;
        assert_relative_eq!(q, (PI * g).sin() / (g * (1.0 - g)), max_relative = 1e-10);
    }
}

#[test]
fn exact_marginal_samplers() {
    for gamma in [0.3, 0.5, 0.7] {
        let g = gi(gamma);
        let s = MarginalSampler::new(g);
        let mut rng = stream_rng(5, 0);
        let ml: Vec<f64> = (0..100_000).map(|_| s.ml(&mut rng)).collect();
        let tied: Vec<f64> = (0..100_000).map(|_| s.tied(&mut rng)).collect();
        for p in [1, 2] {
            let e = moment_report(&ml, p).unwrap();
            assert!((e.value - ml_moment(g, p)).abs() < 4.0 * e.se, "gamma {gamma} p {p}: {e:?}");
        }
        let e = moment_report(&tied, 1).unwrap();
        assert!((e.value - tied_marginal_moment(g, 1)).abs() < 4.0 * e.se, "gamma {gamma}: {e:?}");
        // size-biasing of the exact m(1) draws
        let d = crate::stats::weighted_ks_distance(&ml, &ml, &tied).unwrap();
        assert!(d < 0.02, "gamma {gamma}: KS {d}");
    }
}

#[test]
fn moment_formulas() {
    for gamma in [0.1, 0.5, 0.9] {
        assert_relative_eq!(ml_moment(gi(gamma), 1), 1.0, max_relative = 1e-14);
        assert_relative_eq!(tied_marginal_moment(gi(gamma), 0), 1.0, max_relative = 1e-14);
    }
    assert_relative_eq!(ml_moment(gi(0.5), 2), PI / 2.0, max_relative = 1e-14);
    assert_relative_eq!(tied_marginal_moment(gi(0.5), 1), PI / 2.0, max_relative = 1e-14);
    let m: Vec<f64> = (0..3).map(|p| tied_marginal_moment(gi(0.5), p)).collect();
    assert!(m[0] < m[1] && m[1] < m[2]);
    assert!((ml_moment(gi(1.0 - 1e-9), 3) - 1.0).abs() < 1e-6);
}

#[test]
fn subordinator_paths() {
    let g = gi(0.5);
    let draws: Vec<f64> = (0..20_000)
        .map(|i| {
            let p = sample_subordinator(&SubordinatorSpec::normalized(g, 0.02, 8, i), 1.0).unwrap();
            assert!(p.values().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(p.num_jumps(), 50);
            p.final_value().powf(-0.5)
        })
        .collect();
    let e = Estimate::mean_of(&draws).unwrap();
    assert!((e.value - 1.0).abs() < 3.0 * e.se, "{e:?}");
    let bad = SubordinatorSpec { grid_step: 0.0, ..SubordinatorSpec::normalized(g, 0.1, 1, 0) };
    assert!(matches!(sample_subordinator(&bad, 1.0), Err(crate::Error::Config(_))));
}

#[test]
fn ml_path_is_the_inverse_of_the_subordinator() {
    let g = gi(0.4);
    let mut checked = 0;
    for stream in 0..50 {
        let spec = SubordinatorSpec::normalized(g, 0.01, 3, stream);
        let eta = sample_subordinator(&spec, 20.0).unwrap();
        if eta.final_value() <= 2.0 {
            continue;
        }
        let inv = eta.inverse(2.0).unwrap();
        assert!(!inv.censored);
        let m = sample_ml_path(g, 2.0, 100.0, 3, stream).unwrap();
        assert_eq!(m, inv.value);
        checked += 1;
    }
    assert!(checked > 40);
}

#[test]
fn ml_normalization_and_ladder() {
    for gamma in [0.3, 0.5, 0.7] {
        let g = gi(gamma);
        let xs = ml_marginals(g, 400.0, 20_000, 17, ExecMode::Parallel).unwrap();
        for p in [1, 2] {
            let e = moment_report(&xs, p).unwrap();
            assert!((e.value - ml_moment(g, p)).abs() < 4.0 * e.se, "gamma {gamma} p {p}: {e:?}");
        }
    }
}

#[test]
fn self_similarity() {
    let g = gi(0.5);
    let base = ml_marginals(g, 300.0, 10_000, 1, ExecMode::Parallel).unwrap();
    for (i, a) in [0.5, 2.0].into_iter().enumerate() {
        let scaled = ml_scaled_marginals(g, a, 300.0, 10_000, 100 + i as u64, ExecMode::Parallel).unwrap();
        let d = ks_distance(&base, &scaled).unwrap();
        assert!(d < ks_critical(10_000, 10_000, 0.01).unwrap(), "a {a}: KS {d}");
    }
}

#[test]
fn refinement_is_within_one_standard_error() {
    let r = refinement_study(gi(0.5), 500.0, 20_000, 9, ExecMode::Parallel).unwrap();
    assert!(r.pass, "{}", r.summary());
    // the coarse grid is coarser by at most one step
    assert!(r.lhs >= r.rhs - 1e-12 && r.lhs - r.rhs <= 1.0 / 500.0);
}

#[test]
fn tied_paths() {
    let g = gi(0.5);
    for stream in 0..200 {
        let t = sample_tied_path(g, 200.0, 4, stream).unwrap();
        assert_eq!(t.path.epochs().last(), Some(&1.0));
        assert_eq!(t.path.horizon(), 1.0);
    }
    let tm = tied_marginals(g, 400.0, 20_000, 6, ExecMode::Parallel).unwrap();
    let e = Estimate::mean_of(&tm.samples).unwrap();
    assert!((e.value - PI / 2.0).abs() < 3.0 * e.se, "{e:?}");
}

#[test]
fn prop_c_with_constant_functional() {
    let mc = MonteCarlo::new(5000, 200.0, 3);
    let r = estimate_prop_c(gi(0.5), &PathFunctional::terminal(Factor::one()), &mc, 1e-12, 3.0).unwrap();
    assert_eq!((r.lhs, r.lhs_se), (1.0, 0.0));
    assert!(r.pass, "{}", r.summary());
    let eps = [0.001, 0.01, 0.1].map(|e| {
        estimate_prop_c(gi(0.5), &PathFunctional::terminal(Factor::Exp { rate: 1.0 }), &MonteCarlo::new(2000, 200.0, 3), e, 3.0)
            .unwrap()
            .diagnostics["cutoff_bound"]
    });
    assert!(eps[0] < eps[1] && eps[1] < eps[2]);
}

#[test]
fn prop_d_with_constant_functional() {
    let mc = MonteCarlo::new(20_000, 200.0, 12);
    let r = estimate_prop_d(gi(0.7), &ProductFunctional::constant_one(), &mc, 3.0).unwrap();
    assert_eq!(r.lhs, 1.0);
    assert!(r.all_pass(), "{}", r.summary());
    let pf = ProductFunctional::single(0.5, Factor::Exp { rate: 1.0 }, Factor::Exp { rate: 1.0 }).unwrap();
    let r = estimate_prop_d(gi(0.7), &pf, &mc, 3.0).unwrap();
    assert!(r.all_pass(), "{}", r.summary());
}

#[test]
fn density_branches_agree_at_the_switch() {
    for gamma in [0.3, 0.5, 0.7] {
        let g = gi(gamma);
        let x = 0.3f64.powf(-1.0 / gamma);
        let below = standard_stable_density(g, x * (1.0 - 1e-9)).unwrap();
        let above = standard_stable_density(g, x * (1.0 + 1e-9)).unwrap();
        assert_relative_eq!(below, above, max_relative = 1e-7);
        let below = standard_stable_cdf(g, x * (1.0 - 1e-9)).unwrap();
        let above = standard_stable_cdf(g, x * (1.0 + 1e-9)).unwrap();
        assert_relative_eq!(below, above, max_relative = 1e-9);
    }
}
