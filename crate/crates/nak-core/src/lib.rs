//! Non-Archimedean local fields, scaling maps, measures on their unit balls,
//! and uniform-distribution experiments for sequences built from them.

pub mod error;
pub mod exceptional;
pub mod experiments;
mod fft;
pub mod field;
mod gf2;
mod kernel;
pub mod measures;
pub mod orbit;
pub mod rational;
pub mod scaling;
pub mod special;

pub use error::{Error, Result};
pub use field::{Characteristic, FieldSpec, LocalFieldElement, NormExponent, Tri, Valuation};
pub use measures::{Disk, FrequencyReport, MeasureSpec};
pub use rational::Rational;
pub use scaling::{MapKind, ScalingExponent, ScalingMapSpec};
