#![no_std]
#![deny(unsafe_code)]
//! Simulation kernel for optically amplified macrostates: truncated Fock-space
//! builders, beam-splitter loss channels, closed-form Wigner functions, an
//! independent displaced-parity oracle, and Bures-distance metrology.
//!
//! Conventions used throughout: the phase-space variable is `α = X + iY`, the
//! vacuum Wigner function is `(2/π)·exp(−2(X²+Y²))` with unit integral, and the
//! vacuum quadrature uncertainty is `ΔX = ΔY = 1/2`.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod channel;
pub mod decoherence;
pub mod error;
pub mod fock;
pub mod metrology;
pub mod oracle;
pub mod specfun;
pub mod wigner;

pub use error::Error;

/// Complex double, the scalar type for all amplitudes and matrix entries.
pub type C64 = num_complex::Complex<f64>;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
