use crate::constants::{BOLTZMANN, HBAR};
use crate::{Error, Result};
use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

use super::{pauli, sigma_along, unit_axis, BiasField, SpinState};

/// `exp(−i·angle·n·σ/2)`: rotates the Bloch vector by `+angle` about `n`
/// (right-handed).
pub fn rotation(axis: &Vector3<f64>, angle: f64) -> Matrix2<Complex64> {
    let (s, c) = (0.5 * angle).sin_cos();
    Matrix2::identity() * Complex64::from(c) - sigma_along(axis) * Complex64::new(0.0, s)
}

fn conjugate(state: &SpinState, u: &Matrix2<Complex64>) -> SpinState {
    SpinState::from_density_unchecked(u * state.rho() * u.adjoint())
}

fn larmor_propagator(field: &BiasField, t: f64) -> Matrix2<Complex64> {
    rotation(&field.axis(), -field.omega0() * t)
}

/// Free precession for a time `t`: the Bloch vector turns by `−ω₀t` about
/// the bias axis.
pub fn larmor_evolve(state: &SpinState, field: &BiasField, t: f64) -> SpinState {
    conjugate(state, &larmor_propagator(field, t))
}

/// Instantaneous pulse: the Bloch vector turns by `−angle` about `axis`, the
/// same sense as free precession about a field along `axis`.
pub fn mw_pulse(state: &SpinState, axis: Vector3<f64>, angle: f64) -> Result<SpinState> {
    let n = unit_axis(axis)?;
    Ok(conjugate(state, &rotation(&n, -angle)))
}

/// Excited-state population `1/(1 + exp(ħω₀/k_BT))`.
pub fn thermal_population(field: &BiasField, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::domain(format!("temperature must be > 0, got {temperature}")));
    }
    let x = HBAR * field.omega0().abs() / (BOLTZMANN * temperature);
    Ok(1.0 / (1.0 + x.exp()))
}

/// Equilibrium state: polarization `tanh(ħω₀/2k_BT)` along the bias axis.
pub fn thermal_state(field: &BiasField, temperature: f64) -> Result<SpinState> {
    thermal_population(field, temperature)?;
    let x = HBAR * field.omega0() / (BOLTZMANN * temperature);
    SpinState::from_bloch(field.axis() * (0.5 * x).tanh())
}

/// Heisenberg-picture `σ_x(t₀) = U†(t₀) σ_x U(t₀)` under the bias field.
pub fn sigma_x_at(field: &BiasField, t0: f64) -> Matrix2<Complex64> {
    let u = larmor_propagator(field, t0);
    u.adjoint() * pauli()[0] * u
}

/// `⟨σ_x(t₀)⟩` for a state prepared at `t = 0`.
pub fn sigma_x_expectation(state: &SpinState, field: &BiasField, t0: f64) -> f64 {
    state.expectation(&sigma_x_at(field, t0))
}
