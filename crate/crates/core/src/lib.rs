//! Joint transmit / reflection beamforming for an active reconfigurable
//! intelligent surface (RIS) whose reflection amplifiers follow a practical,
//! incident-power dependent gain law.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: geometric path loss and Rician / Rayleigh channel draws.
//! - [`amplifier`]: piecewise reflection-gain law of a tunnel-diode amplifier.
//! - [`system`]: signal model (incident power, effective channels, SINR,
//!   sum-rate, constraint report).
//! - [`qcqp`]: the two convex kernels used by the alternating optimizer.
//! - [`solver`]: the fractional-programming / MM / block-coordinate loop for
//!   the practical-active, ideal-active and passive designs.
//! - [`harness`]: seeded Monte Carlo sweeps, CSV output and the CLI.

pub mod amplifier;
pub mod channel;
mod error;
pub mod harness;
pub mod qcqp;
pub mod solver;
pub mod system;
pub mod units;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
