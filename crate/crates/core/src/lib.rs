//! Simulation core of a laboratory for the Kirchhoff-law-Johnson-noise
//! (KLJN) key exchanger: noise synthesis, the wire circuit, the
//! four-resistor generalizations and Eve's attacks.
//!
//! Numeric routines are generic over [`Real`]; the aliases below fix the
//! scalar to `f64` (the default used by the experiment harness) or `f32`.

// `!(x > 0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod circuit;
pub mod error;
pub mod noise;
pub mod scalar;
pub mod seed;
pub mod spectral;
pub mod stats;
pub mod vmg;

pub use circuit::{BitSituation, KljnConfig, Level, Party, Quantity, Resistor, Scheme, SourceSet, WireRecord};
pub use error::{LabError, Result};
pub use noise::NoiseTrace;
pub use scalar::{Real, BOLTZMANN};
pub use vmg::{VmgConfig, VmgDerived};

pub type Trace = NoiseTrace<f64>;
pub type Config = KljnConfig<f64>;
pub type Record = WireRecord<f64>;
pub type Vmg = VmgConfig<f64>;

pub type Trace32 = NoiseTrace<f32>;
pub type Config32 = KljnConfig<f32>;
pub type Record32 = WireRecord<f32>;
pub type Vmg32 = VmgConfig<f32>;
