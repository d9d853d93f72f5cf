use kljn_lab::attack::deterministic::{
    elimination_attack, ohms_law_attack, ohms_law_identify, one_bit_power_attack, power_signs, quantize,
    waiting_time_prob, EveKnowledge,
};
use kljn_lab::attack::statistical::ccc;
use kljn_lab::circuit::solve_wire;
use kljn_lab::stats;
use kljn_lab::{BitSituation, Config, LabError, NoiseTrace, Record, Resistor, Scheme, SourceSet, Trace};

fn ch2() -> Config {
    Config::new(1e5, 1e4, 1e18, 500.0, 1000).unwrap()
}

fn simulate(seed: u64, run: u64, s: BitSituation) -> (SourceSet<f64>, Record) {
    let scheme = Scheme::kljn(&ch2());
    let src = scheme.sources(seed, run, 1000, 4).unwrap();
    let w = scheme.wire(&src, s).unwrap();
    (src, w)
}

#[test]
fn ohms_law_flat_at_true_resistor() {
    let (src, w) = simulate(1, 0, BitSituation::LH);
    let v = ohms_law_identify(&w, &src.hb, &src.lb, 1e5, 1e4).unwrap();
    assert_eq!(v.resistor, Some(Resistor::High));
    assert!(v.high.rel_iqr < 1e-9, "{}", v.high.rel_iqr);
    assert!(v.high.residual() < 1e-9);
    assert!(v.high.within_1pct > 0.999);
    assert!(v.low.within_1pct < 0.5, "{}", v.low.within_1pct);
}

#[test]
fn ohms_law_single_sample_residual() {
    let ua = NoiseTrace::new(vec![3.0], 500.0).unwrap();
    let ub = NoiseTrace::new(vec![-2.0], 500.0).unwrap();
    let other = NoiseTrace::new(vec![0.5], 500.0).unwrap();
    let w = solve_wire(&ua, &ub, 1e4, 1e5).unwrap();
    let v = ohms_law_identify(&w, &ub, &other, 1e5, 1e4).unwrap();
    assert!(v.high.residual() < 1e-12);
    assert_eq!(v.resistor, None);
}

#[test]
fn ohms_law_collision_is_undecided() {
    let (src, w) = simulate(2, 0, BitSituation::HH);
    let v = ohms_law_identify(&w, &src.hb, &src.hb, 1e5, 1e4).unwrap();
    assert_eq!(v.resistor, None);
}

#[test]
fn ohms_law_without_matching_noise_fails() {
    let (_, w) = simulate(3, 0, BitSituation::LH);
    let (other, _) = simulate(4, 0, BitSituation::LH);
    let r = ohms_law_identify(&w, &other.hb, &other.lb, 1e5, 1e4);
    assert!(matches!(r, Err(LabError::InconsistentKnowledge(_))));
    let flat = NoiseTrace::new(vec![1.0; 1000], 500.0).unwrap();
    let z = solve_wire(&flat, &flat, 1e4, 1e5).unwrap();
    assert!(matches!(
        ohms_law_identify(&z, &flat, &flat, 1e5, 1e4),
        Err(LabError::InvalidArgument(_))
    ));
}

#[test]
fn ohms_law_bilateral_and_unilateral() {
    let c = ch2();
    for (run, s) in BitSituation::ALL.into_iter().enumerate() {
        let (src, w) = simulate(5, run as u64, s);
        let both = EveKnowledge::new(
            Some((src.la.clone(), src.ha.clone())),
            Some((src.lb.clone(), src.hb.clone())),
            None,
        )
        .unwrap();
        assert_eq!(ohms_law_attack(&w, &both, &c).unwrap().guess, Some(s));
        let bob_only = EveKnowledge::new(None, Some((src.lb.clone(), src.hb.clone())), None).unwrap();
        assert_eq!(ohms_law_attack(&w, &bob_only, &c).unwrap().guess, Some(s));
    }
    assert!(EveKnowledge::<f64>::new(None, None, None).is_err());
}

fn powers(v: &[f64]) -> Vec<f64> {
    v.to_vec()
}

#[test]
fn one_bit_unique_match() {
    let lh = powers(&[1.0, -1.0, 2.0]);
    let hl = powers(&[-1.0, -1.0, 2.0]);
    let hh = powers(&[1.0, 1.0, 2.0]);
    let ll = powers(&[1.0, -1.0, -2.0]);
    let hyps = [
        (BitSituation::HH, hh.as_slice()),
        (BitSituation::LL, ll.as_slice()),
        (BitSituation::HL, hl.as_slice()),
        (BitSituation::LH, lh.as_slice()),
    ];
    let out = one_bit_power_attack(&power_signs(&lh), &hyps).unwrap();
    assert_eq!(out.guess, Some(BitSituation::LH));
    assert_eq!(out.decision_step, Some(3));
    assert_eq!(out.aux["survivors"], 1.0);
}

#[test]
fn one_bit_decided_at_first_step() {
    let t = powers(&[1.0, 1.0]);
    let o = powers(&[-1.0, 1.0]);
    let hyps = [
        (BitSituation::HH, o.as_slice()),
        (BitSituation::LL, o.as_slice()),
        (BitSituation::HL, o.as_slice()),
        (BitSituation::LH, t.as_slice()),
    ];
    let out = one_bit_power_attack(&[1, 1], &hyps).unwrap();
    assert_eq!((out.guess, out.decision_step), (Some(BitSituation::LH), Some(1)));
}

#[test]
fn one_bit_zero_power_counts_positive() {
    assert_eq!(power_signs(&[0.0, -0.0, -1e-30, 2.0]), vec![1, 1, -1, 1]);
}

#[test]
fn one_bit_inconsistent_knowledge() {
    let a = powers(&[1.0]);
    let hyps = [(BitSituation::HL, a.as_slice()), (BitSituation::LH, a.as_slice())];
    assert!(matches!(
        one_bit_power_attack(&[-1], &hyps),
        Err(LabError::InconsistentKnowledge(_))
    ));
    let out = one_bit_power_attack(&[1], &hyps).unwrap();
    assert!(out.is_undecided());
}

#[test]
fn one_bit_never_loses_truth_and_halves() {
    let runs = 400;
    let mut undecided_after = [0usize; 5];
    for run in 0..runs {
        let truth = BitSituation::LH;
        let (src, w) = simulate(11, run, truth);
        let scheme = Scheme::kljn(&ch2());
        let probes: Vec<Record> = BitSituation::ALL
            .iter()
            .map(|&s| scheme.wire(&src, s).unwrap())
            .collect();
        let signs = power_signs(&w.p_w);
        let all: Vec<(BitSituation, &[f64])> = BitSituation::ALL
            .iter()
            .zip(&probes)
            .map(|(&s, p)| (s, p.p_w.as_slice()))
            .collect();
        let out = one_bit_power_attack(&signs, &all).unwrap();
        assert_eq!(out.guess, Some(truth));
        let pair = [all[2], all[3]];
        let step = one_bit_power_attack(&signs, &pair).unwrap().decision_step.unwrap();
        for (n, u) in undecided_after.iter_mut().enumerate() {
            if step > n + 1 {
                *u += 1;
            }
        }
    }
    for (n, &u) in undecided_after.iter().enumerate() {
        let want = 0.5f64.powi(n as i32 + 1);
        let got = u as f64 / runs as f64;
        assert!(
            (got - want).abs() <= 4.0 * stats::binomial_se(want, runs as usize),
            "n={} {got}",
            n + 1
        );
    }
}

#[test]
fn elimination_identifies_alice_exactly() {
    let (src, w) = simulate(21, 0, BitSituation::LH);
    let out = elimination_attack(&w, &src.la, &src.ha, 1e4, 1e5, &ch2(), None).unwrap();
    assert_eq!(out.guess, Some(BitSituation::LH));
    assert_eq!(out.decision_step, Some(1));
    let star: Vec<f64> = w.u_w.iter().zip(&w.i_w).map(|(u, i)| u + i * 1e4).collect();
    for (a, b) in star.iter().zip(src.la.samples()) {
        assert!((a - b).abs() <= 1e-9 * src.la.rms());
    }
    assert!((ccc(&star, src.la.samples()).unwrap() - 1.0).abs() < 1e-12);
    assert!(ccc(&star, src.ha.samples()).unwrap().abs() < 4.0 / 1000f64.sqrt());
}

#[test]
fn elimination_is_exact_over_runs() {
    for run in 0..200 {
        let truth = kljn_lab::circuit::draw_situation(22, run, &BitSituation::ALL);
        let (src, w) = simulate(22, run, truth);
        let out = elimination_attack(&w, &src.la, &src.ha, 1e4, 1e5, &ch2(), None).unwrap();
        assert_eq!(out.score(truth).correct, Some(true));
    }
}

#[test]
fn elimination_degenerate_candidates() {
    let (src, w) = simulate(23, 0, BitSituation::LH);
    let out = elimination_attack(&w, &src.la, &src.la, 1e4, 1e5, &ch2(), None).unwrap();
    assert!(out.is_undecided());
    let out = elimination_attack(&w, &src.la, &src.la, 1e4, 1e5, &ch2(), Some(6)).unwrap();
    assert!(out.is_undecided());
}

#[test]
fn elimination_quantized() {
    let mut hits = 0;
    for run in 0..100 {
        let (src, w) = simulate(24, run, BitSituation::HL);
        let out = elimination_attack(&w, &src.la, &src.ha, 1e4, 1e5, &ch2(), Some(4)).unwrap();
        hits += usize::from(out.guess == Some(BitSituation::HL));
        assert!(out.decision_step.unwrap() >= 1);
    }
    assert_eq!(hits, 100);
}

#[test]
fn elimination_rejects_unrelated_noise() {
    let (_, w) = simulate(25, 0, BitSituation::LH);
    let (other, _) = simulate(26, 0, BitSituation::LH);
    let r = elimination_attack(&w, &other.la, &other.ha, 1e4, 1e5, &ch2(), None);
    assert!(matches!(r, Err(LabError::InconsistentKnowledge(_))));
}

#[test]
fn quantizer_levels() {
    assert_eq!(quantize(-10.0, 2, 4.0), 0);
    assert_eq!(quantize(-0.1, 2, 4.0), 1);
    assert_eq!(quantize(0.0, 2, 4.0), 2);
    assert_eq!(quantize(3.99, 2, 4.0), 3);
    assert_eq!(quantize(100.0, 2, 4.0), 3);
}

#[test]
fn waiting_time_examples() {
    assert_eq!(waiting_time_prob(1, 1).unwrap(), 0.5);
    assert_eq!(waiting_time_prob(5, 0).unwrap(), 1.0);
    assert!((waiting_time_prob(7, 1).unwrap() - 7.8125e-3).abs() < 1e-15);
    assert_eq!(waiting_time_prob(2, 3).unwrap(), 0.25f64.powi(3));
    assert!(waiting_time_prob(0, 1).is_err());
}

#[test]
fn single_precision_elimination() {
    let c = kljn_lab::Config32::new(1e5, 1e4, 1e18, 500.0, 256).unwrap();
    let scheme = Scheme::kljn(&c);
    let src = scheme.sources(3, 0, 256, 4).unwrap();
    let w = scheme.wire(&src, BitSituation::HL).unwrap();
    let la: Trace = NoiseTrace::new(src.la.samples().iter().map(|&v| f64::from(v)).collect(), 500.0).unwrap();
    assert_eq!(la.len(), 256);
    let v = ohms_law_identify(&w, &src.hb, &src.lb, 1e5f32, 1e4).unwrap();
    assert_eq!(v.resistor, Some(Resistor::Low));
}
