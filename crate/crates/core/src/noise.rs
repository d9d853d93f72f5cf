//! Band-limited white noise synthesis, Johnson scaling, Eve's correlated
//! copies and noise diagnostics.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::scalar::{Real, BOLTZMANN};
use crate::seed::{labels, stream_seed};
use crate::spectral;
use crate::stats;

/// Uniformly sampled voltage sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace<S> {
    samples: Vec<S>,
    dt: S,
    bandwidth: S,
}

impl<S: Real> NoiseTrace<S> {
    /// Trace sampled at the Nyquist rate of `bandwidth`.
    pub fn new(samples: Vec<S>, bandwidth: S) -> Result<Self> {
        if !(bandwidth > S::zero()) || !bandwidth.is_finite() {
            return invalid(format!("bandwidth must be positive, got {bandwidth}"));
        }
        let dt = S::one() / (S::of(2.0) * bandwidth);
        Self::with_dt(samples, dt, bandwidth)
    }

    /// Trace with an explicit time step (oversampled traces).
    pub fn with_dt(samples: Vec<S>, dt: S, bandwidth: S) -> Result<Self> {
        if !(dt > S::zero()) || !dt.is_finite() {
            return invalid(format!("time step must be positive, got {dt}"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite sample at index {i}"));
        }
        Ok(Self { samples, dt, bandwidth })
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<S> {
        self.samples
    }

    pub fn dt(&self) -> S {
        self.dt
    }

    pub fn bandwidth(&self) -> S {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn rms(&self) -> S {
        stats::rms(&self.samples)
    }

    pub fn mean_square(&self) -> S {
        stats::mean_square(&self.samples)
    }

    /// First `n` samples (or the whole trace if shorter).
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            samples: self.samples[..n.min(self.len())].to_vec(),
            dt: self.dt,
            bandwidth: self.bandwidth,
        }
    }

    pub(crate) fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self {
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            dt: self.dt,
            bandwidth: self.bandwidth,
        }
    }

    pub(crate) fn aligned_with(&self, other: &Self) -> bool {
        self.len() == other.len() && self.dt == other.dt
    }
}

/// Mean square of Johnson noise, `4 k T R Δf`.
pub fn johnson_mean_square<S: Real>(r: S, t_eff: S, bandwidth: S) -> S {
    S::of(4.0 * BOLTZMANN) * t_eff * r * bandwidth
}

/// Gaussian band-limited white noise at the Nyquist rate, unit RMS.
///
/// `ensemble_count` independent normal streams are averaged and the average
/// is renormalized to unit RMS. The spectrum is then zero-padded to twice
/// the length, inverted and decimated back to the Nyquist rate.
pub fn gen_gblwn<S: Real>(n_samples: usize, bandwidth: S, seed: u64, ensemble_count: usize) -> Result<NoiseTrace<S>> {
    if n_samples < 2 || !n_samples.is_power_of_two() {
        return invalid(format!("sample count must be a power of two >= 2, got {n_samples}"));
    }
    if ensemble_count == 0 {
        return invalid("ensemble count must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut avg = vec![0.0f64; n_samples];
    for _ in 0..ensemble_count {
        for a in avg.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *a += z;
        }
    }
    let rms = stats::rms(&avg);
    if rms == 0.0 {
        return Err(LabError::DegenerateInput("all-zero source stream".into()));
    }
    avg.iter_mut().for_each(|a| *a /= rms);

    let dense = spectral::interpolate(&avg, 2);
    let samples = dense.iter().step_by(2).map(|&v| S::of(v)).collect();
    NoiseTrace::new(samples, bandwidth)
}

fn check_johnson_args<S: Real>(r: S, t_eff: S, bandwidth: S) -> Result<()> {
    for (name, v) in [("resistance", r), ("temperature", t_eff), ("bandwidth", bandwidth)] {
        if !(v > S::zero()) || !v.is_finite() {
            return invalid(format!("{name} must be positive, got {v}"));
        }
    }
    Ok(())
}

/// Renormalizes `trace` to unit RMS and scales it to the Johnson level.
pub fn scale_johnson<S: Real>(trace: &NoiseTrace<S>, r: S, t_eff: S, bandwidth: S) -> Result<NoiseTrace<S>> {
    check_johnson_args(r, t_eff, bandwidth)?;
    scale_to_mean_square(trace, johnson_mean_square(r, t_eff, bandwidth))
}

/// Renormalizes `trace` to the given mean square.
pub fn scale_to_mean_square<S: Real>(trace: &NoiseTrace<S>, ms: S) -> Result<NoiseTrace<S>> {
    if !(ms > S::zero()) || !ms.is_finite() {
        return invalid(format!("target mean square must be positive, got {ms}"));
    }
    let rms = trace.rms();
    if rms == S::zero() || trace.is_empty() {
        return Err(LabError::DegenerateInput("zero-variance trace".into()));
    }
    let g = ms.sqrt() / rms;
    Ok(trace.map(|v| v * g))
}

/// Eve's partially correlated copy of a party's noise.
///
/// `independent` is first brought to the RMS of `base`, so that the copy's
/// correlation with `base` is `1/√(1+m²)` regardless of the scale of the
/// independent stream. The sum is then rescaled to the Johnson level.
pub fn mix_eve_noise<S: Real>(
    base: &NoiseTrace<S>,
    independent: &NoiseTrace<S>,
    m: S,
    r: S,
    t_eff: S,
    bandwidth: S,
) -> Result<NoiseTrace<S>> {
    if !base.aligned_with(independent) {
        return invalid("base and independent traces differ in length or time step");
    }
    if !(m >= S::zero()) || !m.is_finite() {
        return invalid(format!("mixing multiplier must be finite and >= 0, got {m}"));
    }
    if m == S::zero() {
        return scale_johnson(base, r, t_eff, bandwidth);
    }
    let (rb, ri) = (base.rms(), independent.rms());
    if ri == S::zero() {
        return Err(LabError::DegenerateInput("zero-variance independent trace".into()));
    }
    let g = m * rb / ri;
    let samples = base
        .samples()
        .iter()
        .zip(independent.samples())
        .map(|(&b, &i)| b + g * i)
        .collect();
    let mixed = NoiseTrace::with_dt(samples, base.dt(), base.bandwidth())?;
    scale_johnson(&mixed, r, t_eff, bandwidth)
}

/// Mixing parameters for one run: the multiplier and the seeds of Eve's
/// independent additive streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveMix {
    pub m: f64,
    pub master_seed: u64,
    pub per_source_seeds: BTreeMap<String, u64>,
}

impl EveMix {
    /// Seeds for Eve's four additive streams in run `run`.
    pub fn for_run(m: f64, master_seed: u64, run: u64) -> Self {
        let per_source_seeds = [labels::EVE_L_A, labels::EVE_H_A, labels::EVE_L_B, labels::EVE_H_B]
            .iter()
            .map(|l| (l.to_string(), stream_seed(master_seed, run, l)))
            .collect();
        Self {
            m,
            master_seed,
            per_source_seeds,
        }
    }

    /// Builds Eve's copy of `base` using the additive stream `label`.
    pub fn mix<S: Real>(
        &self,
        label: &str,
        base: &NoiseTrace<S>,
        r: S,
        t_eff: S,
        ensemble_count: usize,
    ) -> Result<NoiseTrace<S>> {
        let seed = *self
            .per_source_seeds
            .get(label)
            .ok_or_else(|| LabError::InvalidArgument(format!("no seed for source {label}")))?;
        let n = base.len().next_power_of_two().max(2);
        let ind = gen_gblwn::<S>(n, base.bandwidth(), seed, ensemble_count)?;
        let ind = NoiseTrace::with_dt(ind.samples()[..base.len()].to_vec(), base.dt(), base.bandwidth())?;
        mix_eve_noise(base, &ind, S::of(self.m), r, t_eff, base.bandwidth())
    }
}

/// Moments, whiteness and spectrum of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseQualityReport<S> {
    pub mean: S,
    pub std: S,
    pub skewness: S,
    pub excess_kurtosis: S,
    pub lag1_autocorr: S,
    /// `(Hz, V²/Hz)` one-sided density bins spanning `[0, bandwidth]`.
    pub psd_bins: Vec<(S, S)>,
}

impl<S: Real> NoiseQualityReport<S> {
    /// Mean density over bins strictly inside the band.
    pub fn in_band_psd_mean(&self) -> S {
        let inner = &self.psd_bins[1..self.psd_bins.len().saturating_sub(1)];
        if inner.is_empty() {
            return S::zero();
        }
        inner.iter().map(|b| b.1).sum::<S>() / S::of_usize(inner.len())
    }
}

pub fn quality_report<S: Real>(trace: &NoiseTrace<S>, n_psd_segments: usize) -> Result<NoiseQualityReport<S>> {
    if n_psd_segments == 0 || trace.len() < 4 * n_psd_segments {
        return invalid(format!(
            "trace of {} samples too short for {n_psd_segments} segments",
            trace.len()
        ));
    }
    let x = trace.samples();
    let n = S::of_usize(x.len());
    let mean = stats::mean(x);
    let central = |p: i32| x.iter().map(|&v| (v - mean).powi(p)).sum::<S>() / n;
    let var = central(2);
    let std = var.sqrt();
    let (skewness, excess_kurtosis, lag1_autocorr) = if var > S::zero() {
        let lag: S = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        (
            central(3) / (var * std),
            central(4) / (var * var) - S::of(3.0),
            lag / (var * n),
        )
    } else {
        (S::zero(), S::zero(), S::zero())
    };
    Ok(NoiseQualityReport {
        mean,
        std,
        skewness,
        excess_kurtosis,
        lag1_autocorr,
        psd_bins: spectral::bartlett_psd(x, trace.dt(), n_psd_segments),
    })
}
