use super::*;
use crate::exec::ExecMode;
use crate::paths::{Factor, ProductFunctional};
use crate::processes::{GammaIndex, MonteCarlo};
use approx::assert_relative_eq;
use std::sync::OnceLock;

fn half() -> GammaIndex {
    GammaIndex::new(0.5).unwrap()
}

fn system() -> &'static LsvSystem {
    static SYS: OnceLock<LsvSystem> = OnceLock::new();
    SYS.get_or_init(|| ulam_density(half(), 1024).unwrap())
}

#[test]
fn map_examples() {
    for g in [0.3, 0.5, 0.8] {
        assert_eq!(lsv_map(g, 0.0).unwrap(), 0.0);
        assert_eq!(lsv_map(g, 0.75).unwrap(), 0.5);
        assert_eq!(lsv_map(g, 0.5).unwrap(), 0.0);
        assert!((lsv_map(g, 0.5 - 1e-12).unwrap() - 1.0).abs() < 1e-10);
    }
    assert_eq!(lsv_map(0.5, 0.25).unwrap(), 5.0 / 16.0);
    assert!(lsv_map(0.5, 1.5).is_err());
    assert!(lsv_map(0.5, -0.1).is_err());
    assert!(lsv_map(1.5, 0.2).is_err());
}

#[test]
fn integer_and_real_exponents_agree() {
    let m = LsvMap::new(half());
    let g = 0.5f64;
    for i in 1..100 {
        let x = i as f64 / 200.0;
        let general = x * (1.0 + (2.0 * x).powf(1.0 / g));
        assert_relative_eq!(m.apply(x), general, max_relative = 1e-15);
    }
}

#[test]
fn left_inverse_round_trip() {
    for g in [0.3, 0.5, 0.9] {
        let m = LsvMap::new(GammaIndex::new(g).unwrap());
        for y in [1e-9, 1e-4, 0.1, 0.5, 0.9, 0.999] {
            let x = m.left_inverse(y);
            assert!((0.0..=0.5).contains(&x));
            assert!(((m.apply(x) - y) / y).abs() < 1e-13, "g={g} y={y} x={x} T(x)={}", m.apply(x));
        }
    }
}

#[test]
fn return_time_examples() {
    assert_eq!(return_time(0.5, 0.75, 10).unwrap(), crate::paths::Censored { value: 1, censored: false });
    assert_eq!(return_time(0.5, 0.9, 10).unwrap().value, 1);
    // 0.5 falls onto the fixed point and never returns
    let c = return_time(0.5, 0.5, 1000).unwrap();
    assert!(c.censored && c.value == 1000);
    // 0.51 -> 0.02 -> slow escape
    let r = return_time(0.5, 0.51, DEFAULT_RETURN_CAP).unwrap();
    assert!(!r.censored && r.value > 5);
    assert!(return_time(0.5, 0.3, 10).is_err());
}

#[test]
fn ulam_contract() {
    let sys = system();
    assert!(sys.residual() <= 1e-8, "{}", sys.residual());
    assert_relative_eq!(sys.omega_mass(), 1.0, max_relative = 1e-12);
    let slope = sys.log_slope(1e-5, 1e-3).unwrap();
    assert!((slope + 2.0).abs() <= 0.2, "{slope}");
    for i in 0..100 {
        let x = 0.5 + 0.5 * (i as f64 + 0.5) / 100.0;
        let h = sys.density_at(x);
        assert!(h > 0.0 && h < 10.0, "{x}: {h}");
    }
    assert!(sys.to_csv().starts_with("cell_left,cell_right,value\n"));
    assert!(ulam_density(half(), 100).is_err());
}

#[test]
fn ulam_density_solves_transfer_equation() {
    // h(y) = h(x1) / T'(x1) + h(x2) / 2 with x1, x2 the two preimages of y
    let sys = system();
    let m = sys.map();
    for y in [0.55, 0.6, 0.7, 0.8, 0.9, 0.95] {
        let x1 = m.left_inverse(y);
        let d1 = 1.0 + 3.0 * (2.0 * x1) * (2.0 * x1);
        let x2 = 0.5 * (y + 1.0);
        let rhs = sys.density_at(x1) / d1 + sys.density_at(x2) / 2.0;
        let lhs = sys.density_at(y);
        assert!((lhs - rhs).abs() < 0.02 * lhs, "y = {y}: {lhs} vs {rhs}");
    }
}

#[test]
fn ulam_other_gamma() {
    let sys = ulam_density(GammaIndex::new(0.7).unwrap(), 1200).unwrap();
    assert!(sys.residual() <= 1e-8);
    let slope = sys.log_slope(1e-5, 1e-3).unwrap();
    assert!((slope + 1.0 / 0.7).abs() <= 0.1 / 0.7, "{slope}");
}

#[test]
fn sampling_stays_in_omega() {
    let sys = system();
    let mut rng = crate::exec::stream_rng(1, 0);
    for _ in 0..1000 {
        let x = sys.sample_omega(&mut rng);
        assert!((0.5..=1.0).contains(&x));
    }
}

#[test]
fn return_time_tail_slope() {
    let sys = system();
    let times = return_time_tail(sys, 40_000, 100_000, 5, ExecMode::Parallel);
    let tail = |n: u64| times.iter().filter(|t| t.value > n).count() as f64 / times.len() as f64;
    let ns: Vec<u64> = (0..=8).map(|i| (100.0 * 10f64.powf(i as f64 / 4.0)) as u64).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns.iter().map(|&n| tail(n).ln()).collect();
    let slope = crate::numeric::ls_slope(&xs, &ys);
    assert!((slope + 0.5).abs() <= 0.1, "{slope}");
}

#[test]
fn empirical_returns() {
    let sys = system();
    let r = empirical_return_sequence(sys, 10_000, 2000, 9, ExecMode::Parallel).unwrap();
    assert_eq!(r.u_hat[0], 1.0);
    assert!(r.u_hat.iter().all(|u| (0.0..=1.0).contains(u)));
    assert!(r.a_hat.windows(2).all(|w| w[1] >= w[0]));
    let slope = r.a_slope(100, 10_000).unwrap();
    assert!((slope - 0.5).abs() <= 0.1, "{slope}");
    let ratio = r.srt_ratio(0.5, 10_000);
    assert!((ratio - 1.0).abs() < 0.2, "{ratio}");
    let seq = empirical_return_sequence(sys, 10_000, 2000, 9, ExecMode::Sequential).unwrap();
    assert_eq!(seq, r);
    assert!(r.to_csv().starts_with("k,u_hat,a_hat\n0,"));
}

#[test]
fn umbrella_constant_one_is_one() {
    let cfg = UmbrellaConfig {
        n: 2000,
        samples: 200,
        seed: 3,
        reference: MonteCarlo::new(100, 200.0, 0),
        rel_tol: 1e-9,
        mode: ExecMode::Parallel,
    };
    let r = verify_umbrella_mc(system(), &ProductFunctional::constant_one(), &cfg).unwrap();
    assert!((r.lhs - 1.0).abs() < 1e-12, "{}", r.lhs);
    assert!(r.pass);
}

#[test]
fn umbrella_small_run_is_sane_and_deterministic() {
    let pf = ProductFunctional::single(0.5, Factor::Exp { rate: 1.0 }, Factor::one()).unwrap();
    let cfg = UmbrellaConfig {
        n: 5000,
        samples: 500,
        seed: 11,
        reference: MonteCarlo::new(2000, 200.0, 0),
        rel_tol: 0.15,
        mode: ExecMode::Parallel,
    };
    let a = verify_umbrella_mc(system(), &pf, &cfg).unwrap();
    assert!(a.lhs > 0.0 && a.lhs < 1.0);
    let b = verify_umbrella_mc(system(), &pf, &UmbrellaConfig { mode: ExecMode::Sequential, ..cfg }).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}
