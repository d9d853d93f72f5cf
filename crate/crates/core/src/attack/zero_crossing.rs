//! Wire voltage sampled at the zero crossings of the wire current.

use rayon::prelude::*;

use crate::circuit::{draw_situation, BitSituation, Scheme, WireRecord};
use crate::error::{invalid, Result};
use crate::noise::NoiseTrace;
use crate::scalar::Real;
use crate::seed::stream_seed;
use crate::spectral;
use crate::stats;

/// Default oversampling factor.
pub const DEFAULT_FACTOR: usize = 16;

/// Interpolated zero-crossing instants of the current and the voltage there.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CrossingSet<S> {
    pub times: Vec<S>,
    pub sampled_voltages: Vec<S>,
}

impl<S: Real> CrossingSet<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mean_square(&self) -> S {
        stats::mean_square(&self.sampled_voltages)
    }
}

/// Band-limited interpolation to `factor` times the sample rate.
pub fn oversample<S: Real>(trace: &NoiseTrace<S>, factor: usize) -> Result<NoiseTrace<S>> {
    if factor == 0 {
        return invalid("oversampling factor must be at least 1");
    }
    if factor == 1 {
        return Ok(trace.clone());
    }
    let dense = spectral::interpolate(trace.samples(), factor);
    NoiseTrace::with_dt(dense, trace.dt() / S::of_usize(factor), trace.bandwidth())
}

/// Locates the sign changes of `i` on the oversampled grid and samples `u`
/// there, both by linear interpolation between the bracketing samples.
pub fn find_zero_crossings<S: Real>(i: &NoiseTrace<S>, u: &NoiseTrace<S>, factor: usize) -> Result<CrossingSet<S>> {
    if i.len() != u.len() || i.dt() != u.dt() {
        return invalid("current and voltage traces are not aligned");
    }
    let di = oversample(i, factor)?;
    let du = oversample(u, factor)?;
    let (x, v, dt) = (di.samples(), du.samples(), di.dt());
    let mut set = CrossingSet::default();
    for k in 0..x.len().saturating_sub(1) {
        let (a, b) = (x[k], x[k + 1]);
        if (a < S::zero()) == (b < S::zero()) {
            continue;
        }
        let theta = a / (a - b);
        let t = (S::of_usize(k) + theta) * dt;
        if set.times.last().is_some_and(|&last| t <= last) {
            continue;
        }
        set.times.push(t);
        set.sampled_voltages.push(v[k] + theta * (v[k + 1] - v[k]));
    }
    Ok(set)
}

/// Produces wire records for a requested situation.
pub trait SchemeRunner<S>: Sync {
    fn record(&self, master: u64, run: u64, situation: BitSituation, n: usize) -> Result<WireRecord<S>>;
}

/// Runner backed by a four-generator scheme.
#[derive(Debug, Clone, Copy)]
pub struct SchemeSimulator<S> {
    pub scheme: Scheme<S>,
    pub ensemble: usize,
}

impl<S: Real> SchemeRunner<S> for SchemeSimulator<S> {
    fn record(&self, master: u64, run: u64, situation: BitSituation, n: usize) -> Result<WireRecord<S>> {
        let sources = self.scheme.sources(master, run, n, self.ensemble)?;
        self.scheme.wire(&sources, situation)
    }
}

/// Statistics of one secure situation over the calibration runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SituationStats {
    pub situation: BitSituation,
    pub runs: usize,
    pub discarded: usize,
    pub mean_u2_zc: f64,
    pub se_u2_zc: f64,
    pub mean_u2_w: f64,
    pub mean_i2_w: f64,
    pub mean_power: f64,
    pub mean_crossings: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZcRun {
    pub run: usize,
    pub truth: BitSituation,
    pub guess: Option<BitSituation>,
    pub u2_zc: Option<f64>,
    pub u2_w: f64,
    pub crossings: usize,
}

impl ZcRun {
    pub fn correct(&self) -> bool {
        self.guess == Some(self.truth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZcReport {
    /// Calibration statistics for HL and LH, in that order.
    pub calibration: [SituationStats; 2],
    pub per_run: Vec<ZcRun>,
    /// Correct guesses over all attack runs; discarded runs count as misses.
    pub p: f64,
    pub sigma: f64,
    pub discarded: usize,
}

struct Observation {
    u2_zc: Option<f64>,
    u2_w: f64,
    i2_w: f64,
    power: f64,
    crossings: usize,
}

fn observe<S: Real>(record: &WireRecord<S>, bandwidth: S, factor: usize) -> Result<Observation> {
    let set = find_zero_crossings(
        &record.current_trace(bandwidth)?,
        &record.voltage_trace(bandwidth)?,
        factor,
    )?;
    Ok(Observation {
        u2_zc: (!set.is_empty()).then(|| set.mean_square().as_f64()),
        u2_w: record.mean_square_voltage().as_f64(),
        i2_w: record.mean_square_current().as_f64(),
        power: stats::mean(&record.p_w).as_f64(),
        crossings: set.len(),
    })
}

/// Calibrated nearest-mean zero-crossing attack.
///
/// `runs` labeled runs per secure situation calibrate the mean `U²_zc`;
/// `runs` further runs with switch-drawn situations are then classified
/// by the nearer calibrated mean.
pub fn zc_attack<S: Real, R: SchemeRunner<S>>(
    runner: &R,
    bandwidth: S,
    runs: usize,
    samples_per_bep: usize,
    seed: u64,
    factor: usize,
) -> Result<ZcReport> {
    if runs == 0 || samples_per_bep < 2 {
        return invalid("need at least one run and two samples per bit exchange");
    }
    let cal_master = stream_seed(seed, u64::MAX, "zc_calibration");
    let calibrate = |situation: BitSituation| -> Result<SituationStats> {
        let salt = situation.index() as u64;
        let obs: Vec<Observation> = (0..runs)
            .into_par_iter()
            .map(|r| {
                let rec = runner.record(cal_master ^ salt, r as u64, situation, samples_per_bep)?;
                observe(&rec, bandwidth, factor)
            })
            .collect::<Result<_>>()?;
        let zc: Vec<f64> = obs.iter().filter_map(|o| o.u2_zc).collect();
        let avg = |f: &dyn Fn(&Observation) -> f64| obs.iter().map(f).sum::<f64>() / obs.len() as f64;
        Ok(SituationStats {
            situation,
            runs: zc.len(),
            discarded: obs.len() - zc.len(),
            mean_u2_zc: if zc.is_empty() {
                f64::NAN
            } else {
                zc.iter().sum::<f64>() / zc.len() as f64
            },
            se_u2_zc: stats::std_error(&zc),
            mean_u2_w: avg(&|o| o.u2_w),
            mean_i2_w: avg(&|o| o.i2_w),
            mean_power: avg(&|o| o.power),
            mean_crossings: avg(&|o| o.crossings as f64),
        })
    };
    let calibration = [calibrate(BitSituation::HL)?, calibrate(BitSituation::LH)?];
    let (m_hl, m_lh) = (calibration[0].mean_u2_zc, calibration[1].mean_u2_zc);

    let per_run: Vec<ZcRun> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let truth = draw_situation(seed, r as u64, &BitSituation::SECURE);
            let rec = runner.record(seed, r as u64, truth, samples_per_bep)?;
            let o = observe(&rec, bandwidth, factor)?;
            let guess = o.u2_zc.map(|z| {
                if (z - m_lh).abs() < (z - m_hl).abs() {
                    BitSituation::LH
                } else {
                    BitSituation::HL
                }
            });
            Ok(ZcRun {
                run: r,
                truth,
                guess,
                u2_zc: o.u2_zc,
                u2_w: o.u2_w,
                crossings: o.crossings,
            })
        })
        .collect::<Result<_>>()?;
    let outcomes: Vec<bool> = per_run.iter().map(ZcRun::correct).collect();
    let correct = outcomes.iter().filter(|&&c| c).count();
    Ok(ZcReport {
        calibration,
        discarded: per_run.iter().filter(|r| r.u2_zc.is_none()).count(),
        p: correct as f64 / runs as f64,
        sigma: stats::batch_sigma(&outcomes),
        per_run,
    })
}
