use kljn_lab::seed::{fnv1a, stream_rng, stream_seed};
use kljn_lab::stats::{batch_sigma, binomial_se, median_iqr, sample_std};
use rand::RngCore;

#[test]
fn sigma_of_perfect_batches_is_zero() {
    assert_eq!(batch_sigma(&[true; 1000]), 0.0);
    assert_eq!(batch_sigma(&[false; 200]), 0.0);
    assert_eq!(batch_sigma(&[true]), 0.0);
}

#[test]
fn sigma_uses_ten_contiguous_batches() {
    let mut v = vec![true; 100];
    v[..10].iter_mut().for_each(|x| *x = false);
    let rates = [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    assert!((batch_sigma(&v) - sample_std(&rates)).abs() < 1e-15);
}

#[test]
fn descriptive_helpers() {
    assert_eq!(binomial_se(0.5, 100), 0.05);
    assert_eq!(sample_std(&[1.0, 1.0]), 0.0);
    let (med, iqr) = median_iqr(&mut [5.0, 1.0, 3.0, 2.0, 4.0]);
    assert_eq!((med, iqr), (3.0, 2.0));
}

#[test]
fn streams_are_keyed_by_run_and_label() {
    assert_ne!(fnv1a("u_l_a"), fnv1a("u_h_a"));
    assert_eq!(stream_seed(1, 2, "x"), stream_seed(1, 2, "x"));
    assert_ne!(stream_seed(1, 2, "x"), stream_seed(1, 3, "x"));
    assert_ne!(stream_seed(1, 2, "x"), stream_seed(2, 2, "x"));
    assert_ne!(stream_seed(1, 2, "x"), stream_seed(1, 2, "y"));
    assert_eq!(stream_rng(4, 5, "z").next_u64(), stream_rng(4, 5, "z").next_u64());
}
