//! Correlation attacks with partially correlated copies of the generators.

use crate::circuit::{solve_wire, BitSituation, KljnConfig, Party, Quantity, Resistor, WireRecord};
use crate::error::{invalid, LabError, Result};
use crate::noise::{johnson_mean_square, scale_johnson, NoiseTrace};
use crate::scalar::Real;
use crate::stats;

/// Cross-correlation coefficient `⟨xy⟩/(rms(x)·rms(y))`, without mean removal.
pub fn ccc<S: Real>(x: &[S], y: &[S]) -> Result<S> {
    if x.len() != y.len() || x.len() < 2 {
        return invalid(format!("ccc needs equal lengths >= 2, got {} and {}", x.len(), y.len()));
    }
    let (rx, ry) = (stats::rms(x), stats::rms(y));
    if rx == S::zero() || ry == S::zero() {
        return Err(LabError::DegenerateInput("zero-RMS input to ccc".into()));
    }
    let xy = x.iter().zip(y).map(|(&a, &b)| a * b).sum::<S>() / S::of_usize(x.len());
    Ok((xy / (rx * ry)).max(-S::one()).min(S::one()))
}

/// Correlation of the measured quantity with each situation's probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CccTable<S> {
    pub quantity: Quantity,
    /// Indexed by [`BitSituation::index`].
    pub values: [S; 4],
}

impl<S: Real> CccTable<S> {
    pub fn get(&self, s: BitSituation) -> S {
        self.values[s.index()]
    }

    /// Situation with the largest coefficient; ties keep the earlier one in
    /// the order HH, LL, HL, LH.
    pub fn argmax(&self) -> BitSituation {
        let mut best = BitSituation::HH;
        for s in BitSituation::ALL {
            if self.get(s) > self.get(best) {
                best = s;
            }
        }
        best
    }
}

/// Eve's simulated wire records for the four situations, built from her
/// copies `(low_a, high_a, low_b, high_b)` of the generators.
pub fn probe_records<S: Real>(
    low_a: &NoiseTrace<S>,
    high_a: &NoiseTrace<S>,
    low_b: &NoiseTrace<S>,
    high_b: &NoiseTrace<S>,
    config: &KljnConfig<S>,
) -> Result<[WireRecord<S>; 4]> {
    let probe = |s: BitSituation| {
        let ua = if s.alice() == Resistor::Low { low_a } else { high_a };
        let ub = if s.bob() == Resistor::Low { low_b } else { high_b };
        let (ra, rb) = config.pair(s);
        solve_wire(ua, ub, ra, rb)
    };
    Ok([
        probe(BitSituation::HH)?,
        probe(BitSituation::LL)?,
        probe(BitSituation::HL)?,
        probe(BitSituation::LH)?,
    ])
}

/// Guesses the situation whose probe best correlates with the measurement.
pub fn channel_ccc_attack<S: Real>(
    measured: &WireRecord<S>,
    probes: &[WireRecord<S>; 4],
    quantity: Quantity,
) -> Result<(CccTable<S>, BitSituation)> {
    let m = measured.quantity(quantity);
    let mut values = [S::zero(); 4];
    for (v, p) in values.iter_mut().zip(probes) {
        *v = ccc(m, p.quantity(quantity))?;
    }
    let table = CccTable { quantity, values };
    Ok((table, table.argmax()))
}

/// Outcome of a source-voltage hypothesis test on one side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisResult<S> {
    pub side: Party,
    pub chosen_resistor: Resistor,
    pub ccc_low: S,
    pub ccc_high: S,
}

/// Reconstructs one side's generator under the low-resistor hypothesis and
/// compares it with Eve's copies of that side's two generators.
///
/// Alice's side uses `U* = u_w + i_w·r_l`, Bob's `U* = u_w − i_w·r_l`.
pub fn source_ccc_attack<S: Real>(
    measured: &WireRecord<S>,
    eve_low: &NoiseTrace<S>,
    eve_high: &NoiseTrace<S>,
    side: Party,
    r_l: S,
    _r_h: S,
) -> Result<HypothesisResult<S>> {
    let sign = match side {
        Party::Alice => S::one(),
        Party::Bob => -S::one(),
    };
    let star: Vec<S> = measured
        .u_w
        .iter()
        .zip(&measured.i_w)
        .map(|(&u, &i)| u + sign * i * r_l)
        .collect();
    let ccc_low = ccc(&star, eve_low.samples())?;
    let ccc_high = ccc(&star, eve_high.samples())?;
    let chosen_resistor = if ccc_high > ccc_low {
        Resistor::High
    } else {
        Resistor::Low
    };
    Ok(HypothesisResult {
        side,
        chosen_resistor,
        ccc_low,
        ccc_high,
    })
}

/// Channel attack when Eve only has copies of Alice's generators; Bob's
/// are replaced by the independent dummies `(dummy_low, dummy_high)`, which
/// are scaled here to Bob's Johnson levels.
pub fn unilateral_channel_attack<S: Real>(
    measured: &WireRecord<S>,
    eve_alice: (&NoiseTrace<S>, &NoiseTrace<S>),
    dummies: (&NoiseTrace<S>, &NoiseTrace<S>),
    config: &KljnConfig<S>,
    quantity: Quantity,
) -> Result<(CccTable<S>, BitSituation)> {
    let (t, bw) = (config.t_eff, config.bandwidth);
    let dl = scale_johnson(dummies.0, config.r_l, t, bw)?;
    let dh = scale_johnson(dummies.1, config.r_h, t, bw)?;
    let probes = probe_records(eve_alice.0, eve_alice.1, &dl, &dh, config)?;
    channel_ccc_attack(measured, &probes, quantity)
}

/// Infers the other party's resistor from the bit's mean square once one
/// resistor is known. Returns the snapped resistor and the raw estimate.
pub fn unilateral_finish<S: Real>(measured_ms: S, known_r: S, config: &KljnConfig<S>) -> Result<(Resistor, S)> {
    if !(known_r > S::zero()) {
        return invalid(format!("known resistance must be positive, got {known_r}"));
    }
    let r_p = measured_ms / johnson_mean_square(S::one(), config.t_eff, config.bandwidth);
    let denom = known_r - r_p;
    if !(denom > S::zero()) || !(r_p > S::zero()) {
        return Err(LabError::Classification(format!(
            "mean square {measured_ms} implies a non-positive resistance next to {known_r}"
        )));
    }
    let other = known_r * r_p / denom;
    let x = other.ln();
    let dl = (x - config.r_l.ln()).abs();
    let dh = (x - config.r_h.ln()).abs();
    let r = if dh < dl { Resistor::High } else { Resistor::Low };
    Ok((r, other))
}

/// Completes a guess whose Alice side is trusted by inferring Bob's
/// resistor from the mean square.
pub fn complete_from_alice<S: Real>(
    alice: Resistor,
    measured: &WireRecord<S>,
    config: &KljnConfig<S>,
) -> Result<BitSituation> {
    let (bob, _) = unilateral_finish(measured.mean_square_voltage(), config.resistance(alice), config)?;
    Ok(BitSituation::new(alice, bob))
}
