//! Attacks that assume Eve holds exact copies of some generator outputs.

use crate::attack::statistical::{ccc, unilateral_finish};
use crate::attack::AttackOutcome;
use crate::circuit::{BitSituation, KljnConfig, Resistor, WireRecord};
use crate::error::{invalid, LabError, Result};
use crate::noise::NoiseTrace;
use crate::scalar::Real;
use crate::stats;

/// Samples with `|i_w|` below this fraction of the current RMS are skipped.
pub const CURRENT_GUARD: f64 = 1e-6;
/// Relative interquartile range below which an estimate counts as flat.
pub const FLATNESS: f64 = 1e-3;
/// Relative tolerance of exact-trace comparisons.
pub const EXACT_TOLERANCE: f64 = 1e-9;

/// What Eve knows about the generators.
#[derive(Debug, Clone, PartialEq)]
pub struct EveKnowledge<S> {
    pub knows_alice: bool,
    pub knows_bob: bool,
    /// Instrument resolution in bits; `None` means full resolution.
    pub resolution_bits: Option<u32>,
    /// `(low, high)` traces of Alice's generators.
    pub alice_traces: Option<(NoiseTrace<S>, NoiseTrace<S>)>,
    /// `(low, high)` traces of Bob's generators.
    pub bob_traces: Option<(NoiseTrace<S>, NoiseTrace<S>)>,
}

impl<S: Real> EveKnowledge<S> {
    pub fn new(
        alice_traces: Option<(NoiseTrace<S>, NoiseTrace<S>)>,
        bob_traces: Option<(NoiseTrace<S>, NoiseTrace<S>)>,
        resolution_bits: Option<u32>,
    ) -> Result<Self> {
        if alice_traces.is_none() && bob_traces.is_none() {
            return invalid("Eve must know at least one party's generators");
        }
        if resolution_bits == Some(0) {
            return invalid("resolution must be at least one bit");
        }
        Ok(Self {
            knows_alice: alice_traces.is_some(),
            knows_bob: bob_traces.is_some(),
            resolution_bits,
            alice_traces,
            bob_traces,
        })
    }
}

/// Spread of the instantaneous resistance estimate under one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResistanceEstimate {
    pub hypothesis: f64,
    pub median: f64,
    /// Interquartile range divided by `|median|`.
    pub rel_iqr: f64,
    /// Fraction of estimates within ±1 % of the median.
    pub within_1pct: f64,
    /// Samples surviving the small-current guard.
    pub used: usize,
}

impl ResistanceEstimate {
    pub fn is_flat(&self) -> bool {
        self.rel_iqr < FLATNESS
    }

    /// Relative distance of the median from the hypothesized resistor.
    pub fn residual(&self) -> f64 {
        ((self.median - self.hypothesis) / self.hypothesis).abs()
    }
}

/// Verdict of an Ohm's-law identification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhmsLaw {
    /// `None` when both hypotheses are flat (noise collision).
    pub resistor: Option<Resistor>,
    pub low: ResistanceEstimate,
    pub high: ResistanceEstimate,
}

fn estimate<S: Real>(i_w: &[S], hypothesis: S, numerator: impl Fn(usize) -> S) -> Result<ResistanceEstimate> {
    let irms = stats::rms(i_w);
    if irms == S::zero() {
        return invalid("wire current is identically zero");
    }
    let guard = S::of(CURRENT_GUARD) * irms;
    let mut r: Vec<f64> = i_w
        .iter()
        .enumerate()
        .filter(|(_, &i)| i.abs() >= guard)
        .map(|(n, &i)| (numerator(n) / i).as_f64())
        .collect();
    let used = r.len();
    let (median, iqr) = stats::median_iqr(&mut r);
    let within = r.iter().filter(|&&v| (v - median).abs() <= 0.01 * median.abs()).count();
    Ok(ResistanceEstimate {
        hypothesis: hypothesis.as_f64(),
        median,
        rel_iqr: if median == 0.0 {
            f64::INFINITY
        } else {
            iqr / median.abs()
        },
        within_1pct: within as f64 / used as f64,
        used,
    })
}

fn verdict(low: ResistanceEstimate, high: ResistanceEstimate) -> Result<OhmsLaw> {
    let resistor = match (low.is_flat(), high.is_flat()) {
        (true, false) => Some(Resistor::Low),
        (false, true) => Some(Resistor::High),
        (true, true) => None,
        (false, false) => {
            return Err(LabError::InconsistentKnowledge(
                "no noise hypothesis yields a constant resistance".into(),
            ))
        }
    };
    Ok(OhmsLaw { resistor, low, high })
}

fn check_aligned<S: Real>(record: &WireRecord<S>, traces: [&NoiseTrace<S>; 2]) -> Result<()> {
    if traces.iter().any(|t| t.len() != record.len()) {
        return invalid("noise traces not aligned with the wire record");
    }
    Ok(())
}

/// Identifies Bob's resistor from `R̂(t) = (u_w − u_b)/i_w`.
pub fn ohms_law_identify<S: Real>(
    record: &WireRecord<S>,
    u_hb: &NoiseTrace<S>,
    u_lb: &NoiseTrace<S>,
    r_h: S,
    r_l: S,
) -> Result<OhmsLaw> {
    check_aligned(record, [u_hb, u_lb])?;
    let est = |t: &NoiseTrace<S>, r: S| {
        let ub = t.samples();
        estimate(&record.i_w, r, |n| record.u_w[n] - ub[n])
    };
    verdict(est(u_lb, r_l)?, est(u_hb, r_h)?)
}

/// Identifies Alice's resistor from `R̂(t) = (u_a − u_w)/i_w`.
pub fn ohms_law_identify_alice<S: Real>(
    record: &WireRecord<S>,
    u_ha: &NoiseTrace<S>,
    u_la: &NoiseTrace<S>,
    r_h: S,
    r_l: S,
) -> Result<OhmsLaw> {
    check_aligned(record, [u_ha, u_la])?;
    let est = |t: &NoiseTrace<S>, r: S| {
        let ua = t.samples();
        estimate(&record.i_w, r, |n| ua[n] - record.u_w[n])
    };
    verdict(est(u_la, r_l)?, est(u_ha, r_h)?)
}

/// Ohm's-law attack with the knowledge Eve holds.
///
/// With both parties' generators each side is identified directly; with
/// one side only, the other resistor follows from the measured mean square.
pub fn ohms_law_attack<S: Real>(
    record: &WireRecord<S>,
    knowledge: &EveKnowledge<S>,
    config: &KljnConfig<S>,
) -> Result<AttackOutcome> {
    let (r_h, r_l) = (config.r_h, config.r_l);
    let bob = match &knowledge.bob_traces {
        Some((lb, hb)) => Some(ohms_law_identify(record, hb, lb, r_h, r_l)?),
        None => None,
    };
    let alice = match &knowledge.alice_traces {
        Some((la, ha)) => Some(ohms_law_identify_alice(record, ha, la, r_h, r_l)?),
        None => None,
    };
    let ms = record.mean_square_voltage();
    let (a, b) = match (alice, bob) {
        (Some(a), Some(b)) => (a.resistor, b.resistor),
        (Some(a), None) => {
            let b = a
                .resistor
                .map(|r| unilateral_finish(ms, config.resistance(r), config))
                .transpose()?;
            (a.resistor, b.map(|x| x.0))
        }
        (None, Some(b)) => {
            let a = b
                .resistor
                .map(|r| unilateral_finish(ms, config.resistance(r), config))
                .transpose()?;
            (a.map(|x| x.0), b.resistor)
        }
        (None, None) => return invalid("Eve must know at least one party's generators"),
    };
    let mut out = match (a, b) {
        (Some(a), Some(b)) => AttackOutcome::decided(BitSituation::new(a, b), 1),
        _ => AttackOutcome::undecided(),
    };
    for (side, v) in [("alice", alice), ("bob", bob)] {
        if let Some(v) = v {
            out = out
                .with_aux(&format!("{side}.low_rel_iqr"), v.low.rel_iqr)
                .with_aux(&format!("{side}.high_rel_iqr"), v.high.rel_iqr)
                .with_aux(&format!("{side}.low_within_1pct"), v.low.within_1pct)
                .with_aux(&format!("{side}.high_within_1pct"), v.high.within_1pct);
        }
    }
    Ok(out)
}

/// Sign sequence of a power record; exact zero counts as `+1`.
pub fn power_signs<S: Real>(p: &[S]) -> Vec<i8> {
    p.iter().map(|&v| if v < S::zero() { -1 } else { 1 }).collect()
}

/// Tracks which hypotheses reproduce the measured one-bit power record.
///
/// Each hypothesis whose sign differs from the measurement at any step is
/// dropped. `decision_step` is the first step at which exactly one
/// hypothesis is left; the aux entry `survivors` counts the hypotheses
/// alive at the end.
pub fn one_bit_power_attack<S: Real>(
    measured_sign: &[i8],
    hypothetical_powers: &[(BitSituation, &[S])],
) -> Result<AttackOutcome> {
    if hypothetical_powers.is_empty() {
        return invalid("no hypotheses supplied");
    }
    if hypothetical_powers.iter().any(|(_, p)| p.len() != measured_sign.len()) {
        return invalid("hypothetical power sequences differ in length from the measurement");
    }
    let mut alive: Vec<bool> = vec![true; hypothetical_powers.len()];
    let mut decided_at = None;
    for (n, &m) in measured_sign.iter().enumerate() {
        let m = if m < 0 { -1 } else { 1 };
        for (a, (_, p)) in alive.iter_mut().zip(hypothetical_powers) {
            let s = if p[n] < S::zero() { -1 } else { 1 };
            if s != m {
                *a = false;
            }
        }
        let count = alive.iter().filter(|&&a| a).count();
        if count == 0 {
            return Err(LabError::InconsistentKnowledge(format!(
                "every hypothesis eliminated at step {}",
                n + 1
            )));
        }
        if count == 1 && decided_at.is_none() {
            decided_at = Some(n + 1);
        }
    }
    let survivors = alive.iter().filter(|&&a| a).count();
    let out = if survivors == 1 {
        let idx = alive.iter().position(|&a| a).expect("one survivor");
        AttackOutcome::decided(hypothetical_powers[idx].0, decided_at.expect("decision recorded"))
    } else {
        AttackOutcome::undecided()
    };
    Ok(out.with_aux("survivors", survivors as f64))
}

/// Quantizes `x` to one of `2^bits` uniform levels spanning `±full_scale`.
pub fn quantize<S: Real>(x: S, bits: u32, full_scale: S) -> i64 {
    let levels = 1i64 << bits.min(62);
    let u = ((x + full_scale) / (full_scale + full_scale)).as_f64();
    ((u * levels as f64).floor() as i64).clamp(0, levels - 1)
}

fn quantized_trace<S: Real>(x: &[S], bits: u32, full_scale: S) -> Vec<S> {
    x.iter()
        .map(|&v| S::of(quantize(v, bits, full_scale) as f64 + 0.5))
        .collect()
}

/// Process of elimination with Alice's two candidate generators.
///
/// Forms `U*(t) = u_w + i_w·r` for both of Alice's resistors and tests
/// each against the matching candidate: exact comparison at full
/// resolution, largest correlation of the quantized traces otherwise. Bob's
/// resistor then follows from the bit's mean square.
pub fn elimination_attack<S: Real>(
    record: &WireRecord<S>,
    u_la: &NoiseTrace<S>,
    u_ha: &NoiseTrace<S>,
    r_l: S,
    r_h: S,
    config: &KljnConfig<S>,
    resolution_bits: Option<u32>,
) -> Result<AttackOutcome> {
    check_aligned(record, [u_la, u_ha])?;
    if record.is_empty() {
        return invalid("empty wire record");
    }
    if resolution_bits == Some(0) {
        return invalid("resolution must be at least one bit");
    }
    let star = |r: S| -> Vec<S> { record.u_w.iter().zip(&record.i_w).map(|(&u, &i)| u + i * r).collect() };
    let (star_l, star_h) = (star(r_l), star(r_h));
    let (la, ha) = (u_la.samples(), u_ha.samples());
    let scale = u_la.rms().max(u_ha.rms());
    if scale == S::zero() {
        return Err(LabError::DegenerateInput("candidate traces are all zero".into()));
    }
    let tol = S::of(EXACT_TOLERANCE) * scale;

    let (alice, step, ccc_l, ccc_h) = match resolution_bits {
        None => {
            if la.iter().zip(ha).all(|(&a, &b)| (a - b).abs() <= tol) {
                return Ok(AttackOutcome::undecided().with_aux("indistinguishable", 1.0));
            }
            let first_mismatch = |x: &[S], y: &[S]| x.iter().zip(y).position(|(&a, &b)| (a - b).abs() > tol);
            let miss_l = first_mismatch(&star_l, la);
            let miss_h = first_mismatch(&star_h, ha);
            let (alice, step) = match (miss_l, miss_h) {
                (None, Some(n)) => (Resistor::Low, n + 1),
                (Some(n), None) => (Resistor::High, n + 1),
                (None, None) => return Ok(AttackOutcome::undecided().with_aux("indistinguishable", 1.0)),
                (Some(_), Some(_)) => {
                    return Err(LabError::InconsistentKnowledge(
                        "neither candidate reproduces Alice's voltage".into(),
                    ))
                }
            };
            (alice, step, ccc(&star_l, la)?, ccc(&star_h, ha)?)
        }
        Some(bits) => {
            let fs_l = S::of(4.0) * u_la.rms();
            let fs_h = S::of(4.0) * u_ha.rms();
            let ql = quantized_trace(la, bits, fs_l);
            let qh = quantized_trace(ha, bits, fs_h);
            let qsl = quantized_trace(&star_l, bits, fs_l);
            let qsh = quantized_trace(&star_h, bits, fs_h);
            if ql.iter().zip(&qh).all(|(a, b)| a == b) && fs_l == fs_h {
                return Ok(AttackOutcome::undecided().with_aux("indistinguishable", 1.0));
            }
            let (cl, ch) = (ccc(&qsl, &ql)?, ccc(&qsh, &qh)?);
            let alice = if cl >= ch { Resistor::Low } else { Resistor::High };
            let (ws, wc) = match alice {
                Resistor::Low => (&qsh, &qh),
                Resistor::High => (&qsl, &ql),
            };
            match ws.iter().zip(wc).position(|(a, b)| a != b) {
                Some(n) => (alice, n + 1, cl, ch),
                None => {
                    return Ok(AttackOutcome::undecided()
                        .with_aux("ccc_low", cl.as_f64())
                        .with_aux("ccc_high", ch.as_f64()))
                }
            }
        }
    };
    let (bob, r_est) = unilateral_finish(record.mean_square_voltage(), config.resistance(alice), config)?;
    Ok(AttackOutcome::decided(BitSituation::new(alice, bob), step)
        .with_aux("ccc_low", ccc_l.as_f64())
        .with_aux("ccc_high", ccc_h.as_f64())
        .with_aux("bob_resistance_estimate", r_est.as_f64()))
}

/// Probability that two independent noises stay indistinguishable for
/// `n_steps` samples at `delta_bits` resolution, `(2^−Δ)^n`.
pub fn waiting_time_prob(delta_bits: u32, n_steps: u32) -> Result<f64> {
    if delta_bits == 0 {
        return invalid("resolution must be at least one bit");
    }
    Ok(2f64.powf(-(f64::from(delta_bits) * f64::from(n_steps))))
}
