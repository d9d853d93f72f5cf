//! Seed-stream derivation.
//!
//! Every random source is keyed by `(master_seed, run, label)`, so a run's
//! draws never depend on which worker evaluates it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Source labels used by the simulators.
pub mod labels {
    pub const U_L_A: &str = "u_l_a";
    pub const U_H_A: &str = "u_h_a";
    pub const U_L_B: &str = "u_l_b";
    pub const U_H_B: &str = "u_h_b";
    pub const EVE_L_A: &str = "eve_l_a";
    pub const EVE_H_A: &str = "eve_h_a";
    pub const EVE_L_B: &str = "eve_l_b";
    pub const EVE_H_B: &str = "eve_h_b";
    pub const DUMMY_L_B: &str = "dummy_l_b";
    pub const DUMMY_H_B: &str = "dummy_h_b";
    pub const SWITCH: &str = "switch";
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a hash of a label.
pub fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of the stream `label` within run `run` of experiment `master`.
pub fn stream_seed(master: u64, run: u64, label: &str) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(run)) ^ fnv1a(label))
}

pub fn stream_rng(master: u64, run: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, run, label))
}
