use std::f64::consts::PI;

use kljn_lab::attack::zero_crossing::{find_zero_crossings, oversample, zc_attack, SchemeSimulator};
use kljn_lab::noise::gen_gblwn;
use kljn_lab::spectral::interpolate;
use kljn_lab::stats;
use kljn_lab::vmg::vmg_levels;
use kljn_lab::{BitSituation, Config, NoiseTrace, Scheme, Trace, Vmg};

fn sine(n: usize, f: f64, phase: f64) -> Trace {
    NoiseTrace::new(
        (0..n).map(|k| (2.0 * PI * f * k as f64 * 1e-3 + phase).sin()).collect(),
        500.0,
    )
    .unwrap()
}

#[test]
fn factor_one_is_identity() {
    let t: Trace = gen_gblwn(256, 500.0, 1, 4).unwrap();
    assert_eq!(oversample(&t, 1).unwrap(), t);
    assert!(oversample(&t, 0).is_err());
}

#[test]
fn sinusoid_interpolation_is_exact() {
    let (n, f, phase) = (1000, 123.0, 0.3);
    let dense = oversample(&sine(n, f, phase), 16).unwrap();
    assert_eq!(dense.len(), 16 * n);
    assert!((dense.dt() - 1e-3 / 16.0).abs() < 1e-18);
    for (j, &v) in dense.samples().iter().enumerate() {
        let want = (2.0 * PI * f * j as f64 * dense.dt() + phase).sin();
        assert!((v - want).abs() < 1e-6, "j={j}: {v} vs {want}");
    }
}

#[test]
fn interpolation_keeps_rms_and_samples() {
    let t: Trace = gen_gblwn(1024, 500.0, 2, 4).unwrap();
    let odd = t.truncated(999);
    let dense = oversample(&odd, 8).unwrap();
    assert!((dense.rms() / odd.rms() - 1.0).abs() < 1e-9);
    for (k, &v) in odd.samples().iter().enumerate() {
        assert!((dense.samples()[8 * k] - v).abs() < 1e-9);
    }
    let even = interpolate(t.samples(), 4);
    for (k, &v) in t.samples().iter().enumerate() {
        assert!((even[4 * k] - v).abs() < 1e-9);
    }
}

#[test]
fn sinusoid_crossing_rate() {
    let i = sine(1000, 37.0, 0.1);
    let u = sine(1000, 11.0, 0.0);
    let set = find_zero_crossings(&i, &u, 16).unwrap();
    assert!((set.len() as f64 - 74.0).abs() <= 1.0, "{}", set.len());
    assert!(set.times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(set.times.len(), set.sampled_voltages.len());
    for (&t, &v) in set.times.iter().zip(&set.sampled_voltages) {
        assert!((2.0 * PI * 37.0 * t + 0.1).sin().abs() < 1e-4);
        assert!((v - (2.0 * PI * 11.0 * t).sin()).abs() < 1e-3);
    }
}

#[test]
fn positive_current_has_no_crossings() {
    let i = NoiseTrace::new(vec![1.0; 64], 500.0).unwrap();
    assert!(find_zero_crossings(&i, &i, 4).unwrap().is_empty());
}

#[test]
fn crossings_bracket_sign_changes() {
    let i: Trace = gen_gblwn(512, 500.0, 3, 4).unwrap();
    let u: Trace = gen_gblwn(512, 500.0, 4, 4).unwrap();
    let set = find_zero_crossings(&i, &u, 16).unwrap();
    let dense = oversample(&i, 16).unwrap();
    let x = dense.samples();
    assert!(set.len() > 100);
    for &t in &set.times {
        let k = ((t / dense.dt()).floor() as usize).min(x.len() - 2);
        let brackets = |k: usize| (x[k] < 0.0) != (x[k + 1] < 0.0);
        assert!(brackets(k) || (k > 0 && brackets(k - 1)));
    }
}

fn kljn_sim() -> SchemeSimulator<f64> {
    let c = Config::new(1e4, 1e3, 1e18, 500.0, 1000).unwrap();
    SchemeSimulator {
        scheme: Scheme::kljn(&c),
        ensemble: 4,
    }
}

#[test]
fn equilibrium_crossings_sample_independently() {
    let r = zc_attack(&kljn_sim(), 500.0, 1000, 1000, 5, 16).unwrap();
    for s in r.calibration {
        let ratio_se = s.se_u2_zc;
        assert!((s.mean_u2_zc - s.mean_u2_w).abs() < 4.0 * ratio_se, "{s:?}");
        assert_eq!(s.discarded, 0);
        assert!(s.mean_crossings > 100.0);
    }
    assert!((r.p - 0.5).abs() <= 4.0 * stats::binomial_se(0.5, 1000));
    assert_eq!(r.per_run.len(), 1000);
}

#[test]
fn zero_power_scheme_is_indistinguishable() {
    let c = Vmg::fck1(1e5, 1e4, 1e4, 1.0, 500.0).unwrap();
    let sim = SchemeSimulator {
        scheme: Scheme::vmg(&c, &vmg_levels(&c).unwrap()),
        ensemble: 4,
    };
    let r = zc_attack(&sim, 500.0, 500, 1000, 6, 16).unwrap();
    let [hl, lh] = r.calibration;
    let pooled = (hl.se_u2_zc.powi(2) + lh.se_u2_zc.powi(2)).sqrt();
    assert!((hl.mean_u2_zc - lh.mean_u2_zc).abs() < 4.0 * pooled);
    assert!((r.p - 0.5).abs() <= 4.0 * stats::binomial_se(0.5, 500));
}

#[test]
fn vmg_crossing_level_matches_gaussian_conditioning() {
    let c = Vmg::new(46_416.0, 278.0, 278.0, 100.0, 1.0, 500.0).unwrap();
    let scheme = Scheme::vmg(&c, &vmg_levels(&c).unwrap());
    let sim = SchemeSimulator { scheme, ensemble: 4 };
    let r = zc_attack(&sim, 500.0, 300, 1000, 7, 16).unwrap();
    for s in r.calibration {
        let (u2, i2, p) = scheme.expected_wire(s.situation);
        let want = (u2 - p * p / i2) / u2;
        let got = s.mean_u2_zc / s.mean_u2_w;
        assert!((got / want - 1.0).abs() < 0.05, "{:?}: {got} vs {want}", s.situation);
    }
}

#[test]
fn attack_is_reproducible() {
    let a = zc_attack(&kljn_sim(), 500.0, 40, 1000, 9, 16).unwrap();
    let b = zc_attack(&kljn_sim(), 500.0, 40, 1000, 9, 16).unwrap();
    assert_eq!(a, b);
    assert!(a.per_run.iter().all(|r| BitSituation::SECURE.contains(&r.truth)));
    assert!(zc_attack(&kljn_sim(), 500.0, 0, 1000, 9, 16).is_err());
}
