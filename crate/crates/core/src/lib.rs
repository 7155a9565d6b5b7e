//! Exact optimal quantization of condensation measures generated by two similarities
//! of ratio 1/5 and a self-similar condensation measure on [2/5, 3/5].
//!
//! Everything numeric lives in [`scalar::Scalar`]: rationals or elements of Q(√6).

pub mod asymptotics;
pub mod construction;
pub mod distortion;
pub mod exec;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod sequences;

pub use exec::Execution;
pub use model::{Address, Anchor, CondensationSystem, Variant, Word};
pub use scalar::{Rational, Scalar};
