//! Spin-resolved tunnelling of a bound two-particle system through a
//! rectangular barrier with a localized magnetic field.
//!
//! The centre-of-mass motion is expanded in internal well eigenstates and
//! spin, giving a coupled-channel problem that is solved with variable
//! reflection/transmission amplitudes ([`vra`]) and cross-checked against a
//! piecewise-constant transfer-matrix solver ([`oracle`]).

pub mod cli;
pub mod error;
pub mod matelem;
pub mod model;
pub mod odeint;
pub mod oracle;
pub mod sweep;
pub mod vra;

pub use error::{Error, Result};
