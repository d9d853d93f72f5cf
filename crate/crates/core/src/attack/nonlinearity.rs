//! Polynomial generator distortion and the net-power sign attack.

use rayon::prelude::*;

use crate::circuit::{draw_situation, BitSituation, KljnConfig, Party, Scheme, SourceSet, WireRecord};
use crate::error::{invalid, LabError, Result};
use crate::noise::NoiseTrace;
use crate::scalar::Real;
use crate::stats;

/// Output `A·(u + B·u² + C·u³)` of a weakly nonlinear generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionSpec<S> {
    pub a: S,
    pub b: S,
    pub c: S,
}

impl<S: Real> DistortionSpec<S> {
    pub fn new(a: S, b: S, c: S) -> Result<Self> {
        if !(a > S::zero()) || !a.is_finite() {
            return invalid(format!("linear gain must be positive, got {a}"));
        }
        if !b.is_finite() || !c.is_finite() {
            return invalid("distortion coefficients must be finite");
        }
        Ok(Self { a, b, c })
    }

    pub fn linear() -> Self {
        Self {
            a: S::one(),
            b: S::zero(),
            c: S::zero(),
        }
    }

    pub fn is_linear(&self) -> bool {
        self.b == S::zero() && self.c == S::zero()
    }

    /// Total distortion of a zero-mean Gaussian input with standard
    /// deviation `sigma`, `√(3B² + 15C²σ²)`.
    pub fn analytic_total_distortion(&self, sigma: S) -> S {
        (S::of(3.0) * self.b * self.b + S::of(15.0) * self.c * self.c * sigma * sigma).sqrt()
    }

    /// Mean and mean square of the output for a zero-mean Gaussian input
    /// of variance `var`.
    pub fn gaussian_moments(&self, var: S) -> (S, S) {
        let (a, b, c) = (self.a, self.b, self.c);
        let mean = a * b * var;
        let ms = a
            * a
            * (var
                + S::of(3.0) * b * b * var * var
                + S::of(6.0) * c * var * var
                + S::of(15.0) * c * c * var * var * var);
        (mean, ms)
    }
}

pub fn apply_distortion<S: Real>(trace: &NoiseTrace<S>, spec: &DistortionSpec<S>) -> NoiseTrace<S> {
    let DistortionSpec { a, b, c } = *spec;
    trace.map(|u| a * (u + b * u * u + c * u * u * u))
}

/// `√(⟨(Bu²)²⟩ + ⟨(Cu³)²⟩) / ⟨u²⟩` of the undistorted input.
pub fn total_distortion<S: Real>(trace: &NoiseTrace<S>, spec: &DistortionSpec<S>) -> Result<S> {
    let ms = trace.mean_square();
    if ms == S::zero() || trace.is_empty() {
        return Err(LabError::DegenerateInput("zero-RMS trace".into()));
    }
    let n = S::of_usize(trace.len());
    let (b, c) = (spec.b, spec.c);
    let second = trace.samples().iter().map(|&u| (b * u * u).powi(2)).sum::<S>() / n;
    let third = trace.samples().iter().map(|&u| (c * u * u * u).powi(2)).sum::<S>() / n;
    Ok((second + third).sqrt() / ms)
}

/// Expected net power from Alice to Bob when every generator is distorted
/// by `spec` and the sources are independent Gaussians.
pub fn expected_net_power<S: Real>(spec: &DistortionSpec<S>, config: &KljnConfig<S>, situation: BitSituation) -> S {
    let scheme = Scheme::kljn(config);
    let (ra, rb) = scheme.pair(situation);
    let (ma, msa) = spec.gaussian_moments(scheme.level(Party::Alice, situation.alice()));
    let (mb, msb) = spec.gaussian_moments(scheme.level(Party::Bob, situation.bob()));
    let rs = ra + rb;
    (rb * msa - ra * msb + (ra - rb) * ma * mb) / (rs * rs)
}

fn mean_power<S: Real>(record: &WireRecord<S>, gamma: usize) -> Result<S> {
    if gamma == 0 || gamma > record.len() {
        return invalid(format!("gamma must be in 1..={}, got {gamma}", record.len()));
    }
    Ok(stats::mean(&record.p_w[..gamma]))
}

/// Positive net power over the first `gamma` samples means HL, negative LH;
/// exact zero counts as HL.
pub fn power_sign_attack<S: Real>(record: &WireRecord<S>, gamma: usize) -> Result<BitSituation> {
    power_sign_attack_with(record, gamma, true)
}

/// Same as [`power_sign_attack`] for distortions whose HL power is negative
/// when `hl_positive` is false.
pub fn power_sign_attack_with<S: Real>(
    record: &WireRecord<S>,
    gamma: usize,
    hl_positive: bool,
) -> Result<BitSituation> {
    let p = mean_power(record, gamma)?;
    let positive = p >= S::zero();
    Ok(if positive == hl_positive {
        BitSituation::HL
    } else {
        BitSituation::LH
    })
}

/// Applies `spec` to every generator of a source set.
pub fn distort_sources<S: Real>(sources: &SourceSet<S>, spec: &DistortionSpec<S>) -> SourceSet<S> {
    SourceSet {
        la: apply_distortion(&sources.la, spec),
        ha: apply_distortion(&sources.ha, spec),
        lb: apply_distortion(&sources.lb, spec),
        hb: apply_distortion(&sources.hb, spec),
    }
}

/// One `(T_eff, γ)` grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub gamma: usize,
    pub t_eff: f64,
    /// RMS wire voltage over the first `gamma` samples, averaged over runs.
    pub u_w_eff: f64,
    pub i_w_eff: f64,
    pub p: f64,
    pub epsilon: f64,
    pub sigma: f64,
    /// `(truth, guess)` per run.
    pub outcomes: Vec<(BitSituation, BitSituation)>,
}

/// Power-sign attack over a grid of temperatures and window lengths.
///
/// Each run draws a fresh record long enough for the largest `γ`; every `γ`
/// uses that record's first `γ` samples. The same run seeds are reused at
/// every temperature.
pub fn temperature_sweep<S: Real>(
    template: &KljnConfig<S>,
    spec: &DistortionSpec<S>,
    t_eff_list: &[S],
    gamma_list: &[usize],
    runs: usize,
    seed: u64,
    ensemble: usize,
) -> Result<Vec<SweepPoint>> {
    if t_eff_list.is_empty() || gamma_list.is_empty() {
        return invalid("temperature and gamma lists must be nonempty");
    }
    if runs == 0 {
        return invalid("runs must be at least 1");
    }
    if gamma_list.contains(&0) {
        return invalid("gamma must be at least 1");
    }
    let n = template
        .samples_per_bep
        .max(*gamma_list.iter().max().expect("nonempty"));
    let mut points = Vec::with_capacity(t_eff_list.len() * gamma_list.len());
    for &t in t_eff_list {
        let config = KljnConfig::new(template.r_h, template.r_l, t, template.bandwidth, n)?;
        let hl_positive = expected_net_power(spec, &config, BitSituation::HL) >= S::zero();
        let scheme = Scheme::kljn(&config);
        // (truth, per-gamma guess, per-gamma u², per-gamma i²)
        type Row = (BitSituation, Vec<BitSituation>, Vec<f64>, Vec<f64>);
        let rows: Vec<Row> = (0..runs)
            .into_par_iter()
            .map(|r| {
                let truth = draw_situation(seed, r as u64, &BitSituation::SECURE);
                let sources = distort_sources(&scheme.sources(seed, r as u64, n, ensemble)?, spec);
                let rec = scheme.wire(&sources, truth)?;
                let mut guesses = Vec::with_capacity(gamma_list.len());
                let mut u2 = Vec::with_capacity(gamma_list.len());
                let mut i2 = Vec::with_capacity(gamma_list.len());
                for &g in gamma_list {
                    guesses.push(power_sign_attack_with(&rec, g, hl_positive)?);
                    u2.push(stats::mean_square(&rec.u_w[..g]).as_f64());
                    i2.push(stats::mean_square(&rec.i_w[..g]).as_f64());
                }
                Ok((truth, guesses, u2, i2))
            })
            .collect::<Result<_>>()?;
        for (k, &gamma) in gamma_list.iter().enumerate() {
            let outcomes: Vec<(BitSituation, BitSituation)> = rows.iter().map(|r| (r.0, r.1[k])).collect();
            let hits: Vec<bool> = outcomes.iter().map(|(t, g)| t == g).collect();
            let p = hits.iter().filter(|&&h| h).count() as f64 / runs as f64;
            points.push(SweepPoint {
                gamma,
                t_eff: t.as_f64(),
                u_w_eff: (rows.iter().map(|r| r.2[k]).sum::<f64>() / runs as f64).sqrt(),
                i_w_eff: (rows.iter().map(|r| r.3[k]).sum::<f64>() / runs as f64).sqrt(),
                p,
                epsilon: 1.0 - p,
                sigma: stats::batch_sigma(&hits),
                outcomes,
            });
        }
    }
    Ok(points)
}
