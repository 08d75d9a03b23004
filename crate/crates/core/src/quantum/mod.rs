//! Spin ⊗ path two-qubit model of a single electron passage.
//!
//! Conventions:
//!
//! * Basis index of the composite space is `2·spin + path`, with spin basis
//!   `{|↑⟩, |↓⟩}` (eigenstates of `σ_z`) and path basis `{|R⟩, |L⟩}`.
//! * The spin Hamiltonian is `H = −μ σ·B`, so free precession rotates the
//!   Bloch vector by `−ω₀t` about the bias axis and the thermal ground state
//!   is aligned with `+n`. Microwave pulses rotate in the same sense about
//!   their own axis.
//! * `ω₀ = γB₀` is the Larmor frequency of the spin.

mod dynamics;
mod passage;
mod state;

pub use dynamics::{
    larmor_evolve, mw_pulse, rotation, sigma_x_at, sigma_x_expectation, thermal_population, thermal_state,
};
pub use passage::{
    detection_probability, fringe_observables, fringe_phase_visibility, full_passage, passage_unitary,
    thermal_visibility_approx, thermal_visibility_exact, FringeObservables, PortProbabilities,
};
pub use state::{CompositeState, PathState, Port, SpinState};

use crate::constants::{SpinSpecies, ELEMENTARY_CHARGE, HBAR, MU_0};
use crate::{Error, Result};
use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

pub(crate) const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
const C_I: Complex64 = Complex64::new(0.0, 1.0);

/// `[σ_x, σ_y, σ_z]`.
pub fn pauli() -> [Matrix2<Complex64>; 3] {
    [
        Matrix2::new(C_ZERO, C_ONE, C_ONE, C_ZERO),
        Matrix2::new(C_ZERO, -C_I, C_I, C_ZERO),
        Matrix2::new(C_ONE, C_ZERO, C_ZERO, -C_ONE),
    ]
}

/// `n·σ`.
pub fn sigma_along(n: &Vector3<f64>) -> Matrix2<Complex64> {
    let [sx, sy, sz] = pauli();
    sx * Complex64::from(n.x) + sy * Complex64::from(n.y) + sz * Complex64::from(n.z)
}

pub fn unit_axis(axis: Vector3<f64>) -> Result<Vector3<f64>> {
    let n = axis.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::domain("axis must be a non-zero finite vector"));
    }
    Ok(axis / n)
}

/// Static bias field and the resulting Larmor frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasField {
    b0: f64,
    axis: Vector3<f64>,
    omega0: f64,
}

impl BiasField {
    /// `ω₀ = γB₀` for the given species; the axis is normalized.
    pub fn new(species: &SpinSpecies, b0: f64, axis: Vector3<f64>) -> Result<Self> {
        if !(b0.is_finite() && b0 >= 0.0) {
            return Err(Error::domain(format!("bias field magnitude must be ≥ 0, got {b0}")));
        }
        Ok(BiasField {
            b0,
            axis: unit_axis(axis)?,
            omega0: species.gamma * b0,
        })
    }

    /// Field defined directly by its Larmor frequency (`B₀` is left at 0).
    pub fn from_omega(omega0: f64, axis: Vector3<f64>) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(Error::domain("Larmor frequency must be finite"));
        }
        Ok(BiasField {
            b0: 0.0,
            axis: unit_axis(axis)?,
            omega0,
        })
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn axis(&self) -> Vector3<f64> {
        self.axis
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega0
    }
}

/// Coupling `θ = eμ₀μ/(2πħd)` of a spin at distance `d` from each arm.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionStrength {
    pub theta: f64,
    pub d: f64,
    pub species: SpinSpecies,
}

impl InteractionStrength {
    pub fn new(d: f64, species: SpinSpecies) -> Result<Self> {
        Ok(InteractionStrength {
            theta: theta_for(d, species.mu)?,
            d,
            species,
        })
    }
}

pub fn theta_for(d: f64, mu: f64) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::domain(format!("distance must be > 0, got {d}")));
    }
    Ok(ELEMENTARY_CHARGE * MU_0 * mu / (2.0 * std::f64::consts::PI * HBAR * d))
}
