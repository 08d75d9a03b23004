use crate::{Error, Result};
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::Serialize;

use super::dynamics::{sigma_x_at, thermal_population};
use super::state::kron;
use super::{BiasField, CompositeState, PathState, SpinState};

const SX_TOL: f64 = 1e-12;

/// `e^{−iθσ_x(t₀)}|R⟩⟨R| + e^{iθσ_x(t₀)}|L⟩⟨L|`.
pub fn passage_unitary(theta: f64, t0: f64, field: &BiasField) -> Matrix4<Complex64> {
    let sig = sigma_x_at(field, t0);
    let (s, c) = theta.sin_cos();
    let id = Matrix2::<Complex64>::identity() * Complex64::from(c);
    let right = id - sig * Complex64::new(0.0, s);
    let left = id + sig * Complex64::new(0.0, s);
    let pr = Matrix2::new(Complex64::from(1.0), 0.0.into(), 0.0.into(), 0.0.into());
    let pl = Matrix2::new(0.0.into(), 0.0.into(), 0.0.into(), Complex64::from(1.0));
    kron(&right, &pr) + kron(&left, &pl)
}

/// Applies the passage to `spin ⊗ path`.
pub fn full_passage(spin: &SpinState, path: &PathState, theta: f64, t0: f64, field: &BiasField) -> CompositeState {
    let u = passage_unitary(theta, t0, field);
    let rho = CompositeState::product(spin, path);
    CompositeState::from_density_unchecked(u * rho.rho() * u.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortProbabilities {
    pub plus: f64,
    pub minus: f64,
}

/// Phase shift and visibility `(Δφ_S, 𝒱)` of the fringe for coupling `θ`
/// and `⟨σ_x(t₀)⟩ = sx`.
///
/// `Δφ_S = atan2(sx·sin2θ, cos2θ)`, which coincides with
/// `arctan(sx·tan2θ)` for `|θ| < π/4` and stays continuous beyond.
pub fn fringe_phase_visibility(theta: f64, sx: f64) -> (f64, f64) {
    let (s2, c2) = (2.0 * theta).sin_cos();
    let im = sx * s2;
    (im.atan2(c2), c2.hypot(im))
}

fn check_sx(sx: f64) -> Result<()> {
    if !(sx.abs() <= 1.0 + SX_TOL) {
        return Err(Error::domain(format!("|⟨σ_x⟩| must be ≤ 1, got {sx}")));
    }
    Ok(())
}

/// Port probabilities `p± = ½[1 ± 𝒱 cos(φ − Δφ_S)]`.
pub fn detection_probability(theta: f64, phi: f64, sx: f64) -> Result<PortProbabilities> {
    check_sx(sx)?;
    let (delta, vis) = fringe_phase_visibility(theta, sx);
    let plus = (0.5 * (1.0 + vis * (phi - delta).cos())).clamp(0.0, 1.0);
    Ok(PortProbabilities {
        plus,
        minus: 1.0 - plus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeObservables {
    pub delta_phi: f64,
    pub visibility: f64,
    pub sx_expect: f64,
}

pub fn fringe_observables(spin: &SpinState, theta: f64, t0: f64, field: &BiasField) -> FringeObservables {
    let sx = spin.expectation(&sigma_x_at(field, t0)).clamp(-1.0, 1.0);
    let (delta_phi, visibility) = fringe_phase_visibility(theta, sx);
    FringeObservables {
        delta_phi,
        visibility,
        sx_expect: sx,
    }
}

fn require_x_axis(field: &BiasField) -> Result<()> {
    if (field.axis() - nalgebra::Vector3::x()).norm() > 1e-9 {
        return Err(Error::domain("thermal visibility requires the bias along e_x"));
    }
    Ok(())
}

/// `𝒱 ≈ 1 − 8n̄(1 − n̄)θ²` for a thermal spin biased along `e_x`.
pub fn thermal_visibility_approx(theta: f64, field: &BiasField, temperature: f64) -> Result<f64> {
    require_x_axis(field)?;
    let n = thermal_population(field, temperature)?;
    Ok(1.0 - 8.0 * n * (1.0 - n) * theta * theta)
}

/// Visibility of the thermally averaged fringe, obtained by mixing the two
/// eigenstates with weights `1 − n̄` and `n̄`.
pub fn thermal_visibility_exact(theta: f64, field: &BiasField, temperature: f64) -> Result<f64> {
    require_x_axis(field)?;
    let n = thermal_population(field, temperature)?;
    let (s2, c2) = (2.0 * theta).sin_cos();
    let ground = Complex64::new(c2, s2);
    let excited = Complex64::new(c2, -s2);
    Ok((ground * (1.0 - n) + excited * n).norm())
}
