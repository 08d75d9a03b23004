//! Numerical model of spin resonance spectroscopy with an electron
//! interferometer.
//!
//! A free electron is split into two arms that pass on either side of a
//! magnetic moment. The moment imprints an Aharonov–Bohm phase on the
//! electron, and when the moment belongs to a quantum spin the passage also
//! entangles spin and path. The crate covers
//!
//! * [`constants`]: CODATA constants, spin species and beam kinematics,
//! * [`magnetostatics`]: the classical dipole picture (vector potential,
//!   phase, deflection, validity limits),
//! * [`quantum`]: the spin ⊗ path model of a single passage,
//! * [`ensemble`]: many-spin overlap factors and magnetized samples,
//! * [`estimation`]: Fisher information, shot sampling and estimators,
//! * [`scenario`]: declarative configs, pump–probe protocols and tables.
//!
//! All quantities are SI internally.

pub mod constants;
pub mod ensemble;
mod error;
pub mod estimation;
pub mod magnetostatics;
pub mod quadrature;
pub mod quantum;
pub mod scenario;

pub use error::{Error, Result};

pub use nalgebra::{Vector2, Vector3};
pub use num_complex::Complex64;
