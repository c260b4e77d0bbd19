//! Separability and distillability of multiqubit GHZ-diagonal states.
//!
//! - [`tensor`]: dense operators, partial transposes, spectra, local projections.
//! - [`family`]: the GHZ basis, the GHZ-diagonal family and its depolarization map.
//! - [`classify`]: closed-form partial-transpose conditions and the class report.
//! - [`witness`]: explicit operators certifying separability.
//! - [`distill`]: the direct projection and multi-copy filtering protocol.

#![forbid(unsafe_code)]

pub mod classify;
pub mod distill;
pub mod error;
pub mod family;
pub mod tensor;
pub mod witness;

pub use error::{Error, Result};
pub use family::GhzWeights;
pub use tensor::{DensityMatrix, Ket, Partition};
