//! FFT helpers: band-limited interpolation and Bartlett periodograms.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Real;

/// Band-limited (periodic) interpolation of `x` to `factor` times its rate.
///
/// The spectrum is zero-padded above the band edge; for even lengths the
/// Nyquist bin is split evenly between the positive and negative halves so
/// the result stays real and passes through every original sample.
pub fn interpolate<S: Real>(x: &[S], factor: usize) -> Vec<S> {
    let n = x.len();
    if factor <= 1 || n == 0 {
        return x.to_vec();
    }
    let big = n * factor;
    let mut planner = FftPlanner::<S>::new();
    let mut spec: Vec<Complex<S>> = x.iter().map(|&v| Complex::new(v, S::zero())).collect();
    planner.plan_fft_forward(n).process(&mut spec);

    let mut padded = vec![Complex::new(S::zero(), S::zero()); big];
    let half = n / 2;
    if n.is_multiple_of(2) {
        padded[..half].copy_from_slice(&spec[..half]);
        let nyq = spec[half] * S::of(0.5);
        padded[half] = nyq;
        padded[big - half] = nyq;
        for k in 1..half {
            padded[big - k] = spec[n - k];
        }
    } else {
        padded[..=half].copy_from_slice(&spec[..=half]);
        for k in 1..=half {
            padded[big - k] = spec[n - k];
        }
    }
    planner.plan_fft_inverse(big).process(&mut padded);
    let scale = S::one() / S::of_usize(n);
    padded.into_iter().map(|c| c.re * scale).collect()
}

/// Segment-averaged one-sided periodogram.
///
/// Returns `(frequency, density)` pairs for bins `0..=L/2` where `L` is the
/// segment length; densities are in units of `x²/Hz`.
pub fn bartlett_psd<S: Real>(x: &[S], dt: S, segments: usize) -> Vec<(S, S)> {
    let seg = x.len() / segments.max(1);
    if seg == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<S>::new();
    let fft = planner.plan_fft_forward(seg);
    let bins = seg / 2 + 1;
    let mut acc = vec![S::zero(); bins];
    let mut buf = vec![Complex::new(S::zero(), S::zero()); seg];
    for s in 0..segments {
        for (b, &v) in buf.iter_mut().zip(&x[s * seg..(s + 1) * seg]) {
            *b = Complex::new(v, S::zero());
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a = *a + c.norm_sqr();
        }
    }
    let norm = dt / (S::of_usize(seg) * S::of_usize(segments));
    let df = S::one() / (S::of_usize(seg) * dt);
    acc.iter()
        .enumerate()
        .map(|(k, &a)| {
            let edge = k == 0 || (seg.is_multiple_of(2) && k == seg / 2);
            let two = if edge { S::one() } else { S::of(2.0) };
            (S::of_usize(k) * df, a * norm * two)
        })
        .collect()
}
