//! Small descriptive statistics helpers.

use crate::scalar::Real;

pub fn mean<S: Real>(x: &[S]) -> S {
    if x.is_empty() {
        return S::zero();
    }
    x.iter().copied().sum::<S>() / S::of_usize(x.len())
}

/// Biased (1/N) mean square.
pub fn mean_square<S: Real>(x: &[S]) -> S {
    if x.is_empty() {
        return S::zero();
    }
    x.iter().map(|&v| v * v).sum::<S>() / S::of_usize(x.len())
}

pub fn rms<S: Real>(x: &[S]) -> S {
    mean_square(x).sqrt()
}

/// Sample standard deviation (n − 1 denominator); zero for fewer than two values.
pub fn sample_std(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (x.len() - 1) as f64).sqrt()
}

/// Standard error of the mean.
pub fn std_error(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    sample_std(x) / (x.len() as f64).sqrt()
}

pub fn binomial_se(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Number of batches used for the across-batch σ.
pub const SIGMA_BATCHES: usize = 10;

/// Across-batch standard deviation of the success rate.
///
/// Outcomes are split, in order, into ten contiguous batches of (as nearly
/// as possible) equal size. Batches left empty by very short inputs are
/// dropped.
pub fn batch_sigma(outcomes: &[bool]) -> f64 {
    let n = outcomes.len();
    let k = SIGMA_BATCHES.min(n);
    if k < 2 {
        return 0.0;
    }
    let rates: Vec<f64> = (0..k)
        .map(|b| {
            let lo = b * n / k;
            let hi = (b + 1) * n / k;
            let hits = outcomes[lo..hi].iter().filter(|&&c| c).count();
            hits as f64 / (hi - lo) as f64
        })
        .collect();
    sample_std(&rates)
}

/// Median and relative interquartile range of a sample.
pub fn median_iqr(values: &mut [f64]) -> (f64, f64) {
    values.sort_by(|a, b| a.total_cmp(b));
    let q = |f: f64| -> f64 {
        let pos = f * (values.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let w = pos - lo as f64;
        values[lo] * (1.0 - w) + values[hi] * w
    };
    (q(0.5), q(0.75) - q(0.25))
}
