//! Gaussian-state model of a simultaneous position/momentum
//! measurement with the free Hamiltonian of all three modes included.
//!
//! Everything here works on pure three-mode Gaussian states, either as a
//! complex quadratic form `amplitude * exp(-x^T A x)` or as a 6x6 canonical
//! covariance over `(x1, p1, x2, p2, x3, p3)`, with `hbar = 1`.
//!
//! Three routes to the evolved state are provided and compared by the test
//! suites:
//!
//! * [`symplectic`]: exact Heisenberg-picture evolution of second moments.
//! * [`staged`]: the seven-factor disentangled propagator applied in closed
//!   form to the quadratic form.
//! * [`analytic`]: closed-form coefficient functions.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod config;
pub mod error;
pub mod expm;
pub mod gaussian;
pub mod mutation;
pub mod phase_space;
pub mod staged;
pub mod statistics;
pub mod sweep;
pub mod symplectic;

pub use config::{ConfigBuilder, InitialSqueezing, MeasurementConfig};
pub use error::{Error, Result};
pub use gaussian::{make_initial_state, CanonicalCovariance, QuadraticGaussian};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Indices into the canonical ordering `(x1, p1, x2, p2, x3, p3)`.
pub mod idx {
    pub const X1: usize = 0;
    pub const P1: usize = 1;
    pub const X2: usize = 2;
    pub const P2: usize = 3;
    pub const X3: usize = 4;
    pub const P3: usize = 5;

    /// Position index of mode `k` (0-based).
    pub const fn x(k: usize) -> usize {
        2 * k
    }

    /// Momentum index of mode `k` (0-based).
    pub const fn p(k: usize) -> usize {
        2 * k + 1
    }
}
