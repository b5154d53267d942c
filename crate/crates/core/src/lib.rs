//! Observable quantum speed limits.
//!
//! Evolves observables in the Heisenberg picture under unitary, Lindblad and
//! Kraus dynamics, evaluates lower bounds on the time needed for an
//! expectation value to change, and checks those bounds against the actual
//! evolution time.

pub mod bounds;
pub mod dynamics;
pub mod linalg;
pub mod scalar;
pub mod scenarios;
pub mod sysdl;

pub use scalar::Real;

/// Double-precision complex matrix.
pub type ComplexMatrix = linalg::Matrix<f64>;
/// Double-precision density operator.
pub type DensityState = linalg::DensityState<f64>;
/// Double-precision complex scalar.
pub type C64 = num_complex::Complex<f64>;
