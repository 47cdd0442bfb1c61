//! Oscillator coupled to a bath of two-level systems.
//!
//! The crate covers three layers:
//!
//! * [`operators`]: truncated Fock space, two-level operators, density matrices.
//! * [`spin_bath`]: spin-bath correlation functions, spectral densities and the
//!   four Born–Markov coefficients (frequency shift, damping, normal and
//!   anomalous diffusion), by closed form and by regulated quadrature.
//! * [`dynamics`]: the Born–Markov, joint oscillator–TLS and adiabatic
//!   generators, a fixed-step RK4 integrator and observable extraction.
//!
//! [`oracle`] holds independent brute-force checks (Liouvillian matrices, exact
//! joint unitary evolution, matrix exponentials, multi-route coefficient
//! checks) and [`quadrature`] the adaptive integration machinery.

pub mod dynamics;
pub mod error;
pub mod operators;
pub mod oracle;
pub mod quadrature;
pub mod spin_bath;

pub use error::{Error, Result};

/// Version of this crate, recorded in every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use dynamics::{OscillatorSpec, TlsJointSpec, Trajectory};
pub use operators::{ComplexMatrix, DensityMatrix, FockSpace};
pub use spin_bath::{CoefficientSet, DiscreteBath, OhmicDensity, SpinParams};
