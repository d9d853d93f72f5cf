//! The ideal KLJN channel: configuration, wire solution, levels and
//! the four-generator scheme used by every simulator.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::noise::{gen_gblwn, johnson_mean_square, scale_to_mean_square, NoiseTrace};
use crate::scalar::{Real, BOLTZMANN};
use crate::seed::{labels, stream_rng, stream_seed};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Resistor {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// Resistor choices of one bit exchange; the first letter is Alice's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BitSituation {
    HH,
    LL,
    HL,
    LH,
}

impl BitSituation {
    /// All situations in tie-break order.
    pub const ALL: [BitSituation; 4] = [Self::HH, Self::LL, Self::HL, Self::LH];
    pub const SECURE: [BitSituation; 2] = [Self::HL, Self::LH];

    pub fn new(alice: Resistor, bob: Resistor) -> Self {
        match (alice, bob) {
            (Resistor::High, Resistor::High) => Self::HH,
            (Resistor::Low, Resistor::Low) => Self::LL,
            (Resistor::High, Resistor::Low) => Self::HL,
            (Resistor::Low, Resistor::High) => Self::LH,
        }
    }

    pub fn alice(self) -> Resistor {
        match self {
            Self::HH | Self::HL => Resistor::High,
            Self::LL | Self::LH => Resistor::Low,
        }
    }

    pub fn bob(self) -> Resistor {
        match self {
            Self::HH | Self::LH => Resistor::High,
            Self::LL | Self::HL => Resistor::Low,
        }
    }

    pub fn resistor(self, party: Party) -> Resistor {
        match party {
            Party::Alice => self.alice(),
            Party::Bob => self.bob(),
        }
    }

    pub fn is_secure(self) -> bool {
        matches!(self, Self::HL | Self::LH)
    }

    pub fn level(self) -> Level {
        match self {
            Self::HH => Level::HH,
            Self::LL => Level::LL,
            Self::HL | Self::LH => Level::Secure,
        }
    }

    /// Position in [`BitSituation::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::HH => "HH",
            Self::LL => "LL",
            Self::HL => "HL",
            Self::LH => "LH",
        }
    }
}

impl fmt::Display for BitSituation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BitSituation {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "HH" => Ok(Self::HH),
            "LL" => Ok(Self::LL),
            "HL" => Ok(Self::HL),
            "LH" => Ok(Self::LH),
            other => invalid(format!("unknown bit situation {other:?}")),
        }
    }
}

/// The three mean-square levels observable on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    HH,
    Secure,
    LL,
}

/// Wire quantity used by the correlation attacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    Voltage,
    Current,
    Power,
}

impl FromStr for Quantity {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "u" | "voltage" => Ok(Self::Voltage),
            "i" | "current" => Ok(Self::Current),
            "p" | "power" => Ok(Self::Power),
            other => invalid(format!("unknown quantity {other:?}")),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Voltage => "voltage",
            Self::Current => "current",
            Self::Power => "power",
        })
    }
}

/// Original two-resistor KLJN configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KljnConfig<S> {
    pub r_h: S,
    pub r_l: S,
    pub t_eff: S,
    pub bandwidth: S,
    pub samples_per_bep: usize,
}

impl<S: Real> KljnConfig<S> {
    pub fn new(r_h: S, r_l: S, t_eff: S, bandwidth: S, samples_per_bep: usize) -> Result<Self> {
        if !(r_l > S::zero()) || !(r_h > r_l) || !r_h.is_finite() {
            return invalid(format!("need r_h > r_l > 0, got r_h={r_h}, r_l={r_l}"));
        }
        if !(t_eff > S::zero()) || !t_eff.is_finite() {
            return invalid(format!("temperature must be positive, got {t_eff}"));
        }
        if !(bandwidth > S::zero()) || !bandwidth.is_finite() {
            return invalid(format!("bandwidth must be positive, got {bandwidth}"));
        }
        if samples_per_bep == 0 {
            return invalid("samples per bit exchange must be at least 1");
        }
        Ok(Self {
            r_h,
            r_l,
            t_eff,
            bandwidth,
            samples_per_bep,
        })
    }

    pub fn boltzmann(&self) -> S {
        S::of(BOLTZMANN)
    }

    pub fn resistance(&self, r: Resistor) -> S {
        match r {
            Resistor::Low => self.r_l,
            Resistor::High => self.r_h,
        }
    }

    pub fn pair(&self, s: BitSituation) -> (S, S) {
        (self.resistance(s.alice()), self.resistance(s.bob()))
    }
}

pub fn parallel<S: Real>(a: S, b: S) -> S {
    a * b / (a + b)
}

/// Wire voltage, current and instantaneous power of one bit exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct WireRecord<S> {
    pub u_w: Vec<S>,
    pub i_w: Vec<S>,
    pub p_w: Vec<S>,
    pub dt: S,
}

impl<S: Real> WireRecord<S> {
    pub fn from_voltage_current(u_w: Vec<S>, i_w: Vec<S>, dt: S) -> Result<Self> {
        if u_w.len() != i_w.len() {
            return invalid("voltage and current lengths differ");
        }
        let p_w = u_w.iter().zip(&i_w).map(|(&u, &i)| u * i).collect();
        Ok(Self { u_w, i_w, p_w, dt })
    }

    pub fn len(&self) -> usize {
        self.u_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_w.is_empty()
    }

    pub fn quantity(&self, q: Quantity) -> &[S] {
        match q {
            Quantity::Voltage => &self.u_w,
            Quantity::Current => &self.i_w,
            Quantity::Power => &self.p_w,
        }
    }

    pub fn voltage_trace(&self, bandwidth: S) -> Result<NoiseTrace<S>> {
        NoiseTrace::with_dt(self.u_w.clone(), self.dt, bandwidth)
    }

    pub fn current_trace(&self, bandwidth: S) -> Result<NoiseTrace<S>> {
        NoiseTrace::with_dt(self.i_w.clone(), self.dt, bandwidth)
    }

    pub fn mean_square_voltage(&self) -> S {
        stats::mean_square(&self.u_w)
    }

    pub fn mean_square_current(&self) -> S {
        stats::mean_square(&self.i_w)
    }
}

/// Solves the loop of two noisy resistors joined by an ideal wire.
///
/// Positive current and power flow from Alice to Bob.
pub fn solve_wire<S: Real>(u_a: &NoiseTrace<S>, u_b: &NoiseTrace<S>, r_a: S, r_b: S) -> Result<WireRecord<S>> {
    if !u_a.aligned_with(u_b) {
        return invalid("Alice and Bob traces differ in length or time step");
    }
    let r_s = r_a + r_b;
    if !(r_s > S::zero()) {
        return invalid(format!("loop resistance must be positive, got {r_s}"));
    }
    let (i_w, u_w): (Vec<S>, Vec<S>) = u_a
        .samples()
        .iter()
        .zip(u_b.samples())
        .map(|(&a, &b)| {
            let i = (a - b) / r_s;
            (i, i * r_b + b)
        })
        .unzip();
    WireRecord::from_voltage_current(u_w, i_w, u_a.dt())
}

/// Expected wire mean-square voltage, `4 k T R_P Δf`.
pub fn expected_mean_square<S: Real>(config: &KljnConfig<S>, situation: BitSituation) -> S {
    let (a, b) = config.pair(situation);
    johnson_mean_square(parallel(a, b), config.t_eff, config.bandwidth)
}

fn level_mean_square<S: Real>(config: &KljnConfig<S>, level: Level) -> S {
    let s = match level {
        Level::HH => BitSituation::HH,
        Level::Secure => BitSituation::LH,
        Level::LL => BitSituation::LL,
    };
    expected_mean_square(config, s)
}

/// Nearest expected level on a logarithmic axis; ties go to `Secure`.
pub fn classify_level<S: Real>(measured_ms: S, config: &KljnConfig<S>) -> Level {
    if !(measured_ms > S::zero()) {
        return Level::LL;
    }
    let x = measured_ms.ln();
    let d = |l: Level| (x - level_mean_square(config, l).ln()).abs();
    let (dh, ds, dl) = (d(Level::HH), d(Level::Secure), d(Level::LL));
    if ds <= dh && ds <= dl {
        Level::Secure
    } else if dh < dl {
        Level::HH
    } else {
        Level::LL
    }
}

/// Equilibrium wire spectra for one situation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPrediction<S> {
    pub s_u: S,
    pub s_i: S,
    pub r_p: S,
    pub r_s: S,
}

pub fn predicted_spectra<S: Real>(config: &KljnConfig<S>, situation: BitSituation) -> SpectralPrediction<S> {
    let (a, b) = config.pair(situation);
    let four_kt = S::of(4.0 * BOLTZMANN) * config.t_eff;
    let r_p = parallel(a, b);
    let r_s = a + b;
    SpectralPrediction {
        s_u: four_kt * r_p,
        s_i: four_kt / r_s,
        r_p,
        r_s,
    }
}

/// Time-averaged power flowing from Alice to Bob.
pub fn net_power<S: Real>(record: &WireRecord<S>) -> S {
    stats::mean(&record.p_w)
}

/// Four resistors with the mean-square noise level of each generator.
///
/// Covers the original scheme (equal temperatures, shared resistor pair)
/// as well as the four-resistor generalizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme<S> {
    pub r_la: S,
    pub r_ha: S,
    pub r_lb: S,
    pub r_hb: S,
    pub u2_la: S,
    pub u2_ha: S,
    pub u2_lb: S,
    pub u2_hb: S,
    pub bandwidth: S,
}

/// The four generator outputs of one bit exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSet<S> {
    pub la: NoiseTrace<S>,
    pub ha: NoiseTrace<S>,
    pub lb: NoiseTrace<S>,
    pub hb: NoiseTrace<S>,
}

impl<S: Real> SourceSet<S> {
    pub fn get(&self, party: Party, r: Resistor) -> &NoiseTrace<S> {
        match (party, r) {
            (Party::Alice, Resistor::Low) => &self.la,
            (Party::Alice, Resistor::High) => &self.ha,
            (Party::Bob, Resistor::Low) => &self.lb,
            (Party::Bob, Resistor::High) => &self.hb,
        }
    }
}

/// Unit-RMS band-limited noise of `n` samples drawn from the stream `label`.
pub fn unit_noise<S: Real>(
    master: u64,
    run: u64,
    label: &str,
    n: usize,
    bandwidth: S,
    ensemble: usize,
) -> Result<NoiseTrace<S>> {
    if n == 0 {
        return invalid("zero-length noise request");
    }
    let full = gen_gblwn::<S>(
        n.next_power_of_two().max(2),
        bandwidth,
        stream_seed(master, run, label),
        ensemble,
    )?;
    Ok(full.truncated(n))
}

impl<S: Real> Scheme<S> {
    /// Original scheme: both parties share `{r_l, r_h}` at one temperature.
    pub fn kljn(config: &KljnConfig<S>) -> Self {
        let ms = |r| johnson_mean_square(r, config.t_eff, config.bandwidth);
        Self {
            r_la: config.r_l,
            r_ha: config.r_h,
            r_lb: config.r_l,
            r_hb: config.r_h,
            u2_la: ms(config.r_l),
            u2_ha: ms(config.r_h),
            u2_lb: ms(config.r_l),
            u2_hb: ms(config.r_h),
            bandwidth: config.bandwidth,
        }
    }

    pub fn resistance(&self, party: Party, r: Resistor) -> S {
        match (party, r) {
            (Party::Alice, Resistor::Low) => self.r_la,
            (Party::Alice, Resistor::High) => self.r_ha,
            (Party::Bob, Resistor::Low) => self.r_lb,
            (Party::Bob, Resistor::High) => self.r_hb,
        }
    }

    pub fn level(&self, party: Party, r: Resistor) -> S {
        match (party, r) {
            (Party::Alice, Resistor::Low) => self.u2_la,
            (Party::Alice, Resistor::High) => self.u2_ha,
            (Party::Bob, Resistor::Low) => self.u2_lb,
            (Party::Bob, Resistor::High) => self.u2_hb,
        }
    }

    /// `(r_a, r_b)` connected in `situation`.
    pub fn pair(&self, s: BitSituation) -> (S, S) {
        (
            self.resistance(Party::Alice, s.alice()),
            self.resistance(Party::Bob, s.bob()),
        )
    }

    /// Expected wire mean-square voltage, current and net power.
    pub fn expected_wire(&self, s: BitSituation) -> (S, S, S) {
        let (ra, rb) = self.pair(s);
        let ua = self.level(Party::Alice, s.alice());
        let ub = self.level(Party::Bob, s.bob());
        let rs = ra + rb;
        let u2 = (ua * rb * rb + ub * ra * ra) / (rs * rs);
        let i2 = (ua + ub) / (rs * rs);
        let p = (ua * rb - ub * ra) / (rs * rs);
        (u2, i2, p)
    }

    /// Materializes the four generators for run `run`.
    pub fn sources(&self, master: u64, run: u64, n: usize, ensemble: usize) -> Result<SourceSet<S>> {
        let make = |label: &str, ms: S| -> Result<NoiseTrace<S>> {
            let unit = unit_noise::<S>(master, run, label, n, self.bandwidth, ensemble)?;
            scale_to_mean_square(&unit, ms)
        };
        Ok(SourceSet {
            la: make(labels::U_L_A, self.u2_la)?,
            ha: make(labels::U_H_A, self.u2_ha)?,
            lb: make(labels::U_L_B, self.u2_lb)?,
            hb: make(labels::U_H_B, self.u2_hb)?,
        })
    }

    pub fn wire(&self, sources: &SourceSet<S>, s: BitSituation) -> Result<WireRecord<S>> {
        let (ra, rb) = self.pair(s);
        solve_wire(
            sources.get(Party::Alice, s.alice()),
            sources.get(Party::Bob, s.bob()),
            ra,
            rb,
        )
    }
}

/// Draws run `run`'s situation uniformly from `allowed` using the switch stream.
pub fn draw_situation(master: u64, run: u64, allowed: &[BitSituation]) -> BitSituation {
    let mut rng = stream_rng(master, run, labels::SWITCH);
    allowed[rng.random_range(0..allowed.len())]
}
