//! Exact valuation-guided monomialization.
//!
//! Values live in ordered groups of finite rational rank ([`values`]);
//! polynomials are sparse with rational coefficients ([`polyalg`]). Framed
//! blow-ups ([`framing`]) drive the descent game ([`game`]), key-polynomial
//! chains ([`keypoly`]) define the valuations being monomialized, and
//! [`unifseq`] turns key polynomials into regular parameters.

pub mod framing;
pub mod game;
pub mod keypoly;
pub mod polyalg;
pub mod rat;
pub mod unifseq;
pub mod values;

pub use values::{GroupOrdering, Value, ValueError, ValueGroup};
