use kljn_lab::attack::nonlinearity::{
    apply_distortion, distort_sources, expected_net_power, power_sign_attack, power_sign_attack_with,
    temperature_sweep, total_distortion, DistortionSpec,
};
use kljn_lab::circuit::{net_power, solve_wire};
use kljn_lab::noise::{gen_gblwn, scale_johnson};
use kljn_lab::stats;
use kljn_lab::{BitSituation, Config, LabError, NoiseTrace, Scheme, Trace};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn ch2() -> Config {
    Config::new(1e5, 1e4, 1e18, 500.0, 1000).unwrap()
}

fn d2() -> DistortionSpec<f64> {
    DistortionSpec::new(1.0, 6e-3, 0.0).unwrap()
}

fn d3() -> DistortionSpec<f64> {
    DistortionSpec::new(1.0, 0.0, 5e-5).unwrap()
}

#[test]
fn linear_spec_is_identity() {
    let t: Trace = gen_gblwn(256, 500.0, 1, 4).unwrap();
    assert_eq!(apply_distortion(&t, &DistortionSpec::linear()), t);
    assert!(DistortionSpec::new(0.0, 1.0, 1.0).is_err());
}

#[test]
fn odd_polynomial_symmetry() {
    let t = scale_johnson(&gen_gblwn(256, 500.0, 2, 4).unwrap(), 1e5, 1e18, 500.0).unwrap();
    let neg = NoiseTrace::new(t.samples().iter().map(|v| -v).collect(), 500.0).unwrap();
    let (a, b) = (apply_distortion(&t, &d3()), apply_distortion(&neg, &d3()));
    for (x, y) in a.samples().iter().zip(b.samples()) {
        assert_eq!(*x, -*y);
    }
}

#[test]
fn second_order_pushes_power_in_hl() {
    let scheme = Scheme::kljn(&ch2());
    let powers: Vec<f64> = (0..200)
        .map(|r| {
            let src = distort_sources(&scheme.sources(1, r, 1000, 4).unwrap(), &d2());
            net_power(&scheme.wire(&src, BitSituation::HL).unwrap())
        })
        .collect();
    let m = stats::mean(&powers);
    assert!(m > 4.0 * stats::std_error(&powers), "{m}");
    let want = expected_net_power(&d2(), &ch2(), BitSituation::HL);
    assert!((m - want).abs() < 4.0 * stats::std_error(&powers), "{m} vs {want}");
    assert!(expected_net_power(&d2(), &ch2(), BitSituation::LH) < 0.0);
}

#[test]
fn total_distortion_oracles() {
    let unit: Trace = gen_gblwn(16384, 500.0, 3, 4).unwrap();
    let td2 = total_distortion(&unit, &d2()).unwrap();
    assert!((td2 / (3f64.sqrt() * 6e-3) - 1.0).abs() < 0.05, "{td2}");
    let hi = scale_johnson(&unit, 1e5, 1e18, 500.0).unwrap();
    assert!((hi.rms() - 52.55).abs() < 0.01);
    let td3 = total_distortion(&hi, &d3()).unwrap();
    assert!((td3 - 1.02e-2).abs() < 0.05 * 1.02e-2, "{td3}");
    assert!((d3().analytic_total_distortion(52.55) - 1.018e-2).abs() < 1e-5);
    assert!((d2().analytic_total_distortion(1.0) - 1.039e-2).abs() < 1e-5);
    assert_eq!(total_distortion(&hi, &DistortionSpec::linear()).unwrap(), 0.0);
    let zeros = NoiseTrace::new(vec![0.0; 8], 500.0).unwrap();
    assert!(matches!(
        total_distortion(&zeros, &d2()),
        Err(LabError::DegenerateInput(_))
    ));
}

#[test]
fn total_distortion_ignores_gain() {
    let t = scale_johnson(&gen_gblwn(4096, 500.0, 4, 4).unwrap(), 1e5, 1e18, 500.0).unwrap();
    let spec = DistortionSpec::new(1.0, 6e-3, 5e-5).unwrap();
    let gained = DistortionSpec::new(7.5, 6e-3, 5e-5).unwrap();
    assert_eq!(
        total_distortion(&t, &spec).unwrap(),
        total_distortion(&t, &gained).unwrap()
    );
}

#[test]
fn power_sign_rule() {
    let u = NoiseTrace::new(vec![1.0, 1.0, 1.0], 500.0).unwrap();
    let zero = solve_wire(&u, &u, 1.0, 2.0).unwrap();
    assert_eq!(power_sign_attack(&zero, 3).unwrap(), BitSituation::HL);
    let lo = NoiseTrace::new(vec![0.0, 0.0, 0.0], 500.0).unwrap();
    let rec = solve_wire(&lo, &u, 1.0, 2.0).unwrap();
    assert_eq!(power_sign_attack(&rec, 2).unwrap(), BitSituation::LH);
    assert_eq!(power_sign_attack_with(&rec, 2, false).unwrap(), BitSituation::HL);
    assert!(power_sign_attack(&rec, 0).is_err());
    assert!(power_sign_attack(&rec, 4).is_err());
}

#[test]
fn third_order_sign_flips_the_map() {
    let c = ch2();
    let pos = expected_net_power(&d3(), &c, BitSituation::HL);
    let neg = expected_net_power(&DistortionSpec::new(1.0, 0.0, -5e-5).unwrap(), &c, BitSituation::HL);
    assert!(pos > 0.0 && neg < 0.0);
    let flipped_b = expected_net_power(&DistortionSpec::new(1.0, -6e-3, 0.0).unwrap(), &c, BitSituation::HL);
    assert!((flipped_b / expected_net_power(&d2(), &c, BitSituation::HL) - 1.0).abs() < 1e-12);

    let neg_spec = DistortionSpec::new(1.0, 0.0, -5e-5).unwrap();
    let pts = temperature_sweep(&c, &neg_spec, &[1e18], &[1000], 200, 5, 4).unwrap();
    assert!(pts[0].p > 0.9, "{}", pts[0].p);
}

#[test]
fn second_order_long_window_breaks_key() {
    let pts = temperature_sweep(&ch2(), &d2(), &[1e18], &[10, 20, 100, 1000], 400, 11, 4).unwrap();
    assert_eq!(pts.len(), 4);
    assert!(pts[3].p > 0.95, "{}", pts[3].p);
    for w in pts.windows(2) {
        assert!(w[1].p + 0.03 >= w[0].p, "{} -> {}", w[0].p, w[1].p);
    }
    for p in &pts {
        assert_eq!(p.p + p.epsilon, 1.0);
        assert_eq!(p.outcomes.len(), 400);
    }
    assert!(pts[3].u_w_eff > 0.0 && pts[3].i_w_eff > 0.0);
}

#[test]
fn third_order_short_windows_beat_guessing() {
    let pts = temperature_sweep(&ch2(), &d3(), &[1e18], &[10, 20, 100, 1000], 400, 14, 4).unwrap();
    assert!(pts[0].p > 0.5 + 4.0 * stats::binomial_se(0.5, 400), "{}", pts[0].p);
    for w in pts.windows(2) {
        assert!(w[1].p + 0.03 >= w[0].p, "{} -> {}", w[0].p, w[1].p);
    }
}

#[test]
fn linear_pipeline_is_ideal() {
    let pts = temperature_sweep(&ch2(), &DistortionSpec::linear(), &[1e18], &[10, 1000], 400, 12, 4).unwrap();
    for p in pts {
        assert!((p.p - 0.5).abs() <= 4.0 * stats::binomial_se(0.5, 400), "{}", p.p);
    }
}

#[test]
fn cold_generators_approach_security() {
    let pts = temperature_sweep(&ch2(), &d2(), &[1e18, 1e14], &[1000], 400, 13, 4).unwrap();
    assert!(pts[0].p > 0.95);
    assert!(
        (pts[1].p - 0.5).abs() < 0.03 + 4.0 * stats::binomial_se(0.5, 400),
        "{}",
        pts[1].p
    );
    assert!(pts[1].u_w_eff < pts[0].u_w_eff / 50.0);
}

#[test]
fn sweep_validation() {
    let c = ch2();
    assert!(temperature_sweep(&c, &d2(), &[], &[10], 10, 1, 4).is_err());
    assert!(temperature_sweep(&c, &d2(), &[1e18], &[], 10, 1, 4).is_err());
    assert!(temperature_sweep(&c, &d2(), &[1e18], &[0], 10, 1, 4).is_err());
    assert!(temperature_sweep(&c, &d2(), &[1e18], &[10], 0, 1, 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        rng_seed: RngSeed::Fixed(0x6e6c),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn analytic_and_empirical_distortion_agree(b in 0.0f64..1e-2, c in 0.0f64..1e-4, seed in any::<u64>()) {
        prop_assume!(b > 1e-4 || c > 1e-6);
        let t = scale_johnson(&gen_gblwn(16384, 500.0, seed, 4).unwrap(), 1e5, 1e18, 500.0).unwrap();
        let spec = DistortionSpec::new(1.0, b, c).unwrap();
        let emp = total_distortion(&t, &spec).unwrap();
        let ana = spec.analytic_total_distortion(t.rms());
        prop_assert!((emp / ana - 1.0).abs() < 0.15, "{} vs {}", emp, ana);
    }
}
