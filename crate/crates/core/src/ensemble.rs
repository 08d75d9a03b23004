//! Many-spin samples: coherent product states of `N_S` identical spins and
//! the classical magnetized-sphere model.
//!
//! For a product state the overlap factor factorizes,
//! `D_S = ⟨e^{2iθΣσ_x,m(t₀)}⟩ = (cos2θ + i⟨σ_x(t₀)⟩ sin2θ)^{N_S}`, so an
//! unpolarized sample has visibility `|cos2θ|^{N_S}`. [`ds_bruteforce`]
//! evaluates the same quantity on the full `2^{N_S}` Hilbert space as an
//! independent check.

use crate::constants::{SpinSpecies, BOLTZMANN, ELEMENTARY_CHARGE, HBAR, MU_0, NUCLEAR_MAGNETON};
use crate::quantum::{sigma_x_at, theta_for, BiasField, SpinState};
use crate::{Error, Result};
use nalgebra::{DVector, Matrix2};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Largest ensemble handled by [`ds_bruteforce`].
pub const BRUTE_FORCE_MAX_SPINS: usize = 12;

/// `N_S` spins at one point, all in the same single-spin state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinEnsemble {
    pub n_spins: usize,
    pub single: SpinState,
    pub species: SpinSpecies,
}

impl SpinEnsemble {
    pub fn new(n_spins: usize, single: SpinState, species: SpinSpecies) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::domain("ensemble needs at least one spin"));
        }
        Ok(SpinEnsemble {
            n_spins,
            single,
            species,
        })
    }
}

fn single_factor(sx: f64, theta: f64) -> Complex64 {
    let (s2, c2) = (2.0 * theta).sin_cos();
    Complex64::new(c2, sx * s2)
}

fn ensemble_sx(ens: &SpinEnsemble, t0: f64, field: &BiasField) -> f64 {
    ens.single.expectation(&sigma_x_at(field, t0)).clamp(-1.0, 1.0)
}

/// `D_S` by single-spin factorization. `arg D_S` is the phase shift and
/// `|D_S|` the visibility.
pub fn ds_factor(ens: &SpinEnsemble, theta: f64, t0: f64, field: &BiasField) -> Complex64 {
    ds_from_sx(ensemble_sx(ens, t0, field), theta, ens.n_spins)
}

/// `(cos2θ + i·sx·sin2θ)^N`.
pub fn ds_from_sx(sx: f64, theta: f64, n_spins: usize) -> Complex64 {
    let d1 = single_factor(sx, theta);
    match u32::try_from(n_spins) {
        Ok(n) => d1.powu(n),
        Err(_) => d1.powf(n_spins as f64),
    }
}

// y += A_m x, with A acting on qubit `bit` of the register.
fn apply_single(op: &Matrix2<Complex64>, bit: usize, x: &[Complex64], y: &mut [Complex64]) {
    let mask = 1usize << bit;
    for i in 0..x.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a, b) = (x[i], x[j]);
            y[i] += op[(0, 0)] * a + op[(0, 1)] * b;
            y[j] += op[(1, 0)] * a + op[(1, 1)] * b;
        }
    }
}

fn apply_collective(op: &Matrix2<Complex64>, n: usize, x: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for bit in 0..n {
        apply_single(op, bit, x, &mut y);
    }
    y
}

/// `D_S` from the full tensor-product state vector and the collective
/// operator `Σ_m σ_x,m(t₀)`, exponentiated by scaled Taylor steps. Requires a
/// pure single-spin state and `N_S ≤ 12`.
pub fn ds_bruteforce(ens: &SpinEnsemble, theta: f64, t0: f64, field: &BiasField) -> Result<Complex64> {
    let n = ens.n_spins;
    if n > BRUTE_FORCE_MAX_SPINS {
        return Err(Error::Capacity(format!(
            "brute-force overlap supports at most {BRUTE_FORCE_MAX_SPINS} spins, got {n}"
        )));
    }
    if !ens.single.is_pure() {
        return Err(Error::domain("brute-force overlap requires a pure single-spin state"));
    }
    let ket = ens.single.dominant_ket();
    let dim = 1usize << n;
    let psi: Vec<Complex64> = (0..dim)
        .map(|idx| (0..n).map(|bit| ket[(idx >> bit) & 1]).product())
        .collect();

    let op = sigma_x_at(field, t0);
    // exp(2iθH) with ‖2θH‖ ≤ 2|θ|N, split into steps of norm ≤ 1/2
    let span = 2.0 * theta.abs() * n as f64;
    let steps = (span / 0.5).ceil().max(1.0) as usize;
    let coeff = Complex64::new(0.0, 2.0 * theta / steps as f64);
    let mut v = psi.clone();
    for _ in 0..steps {
        let mut acc = v.clone();
        let mut term = v;
        for k in 1..60 {
            term = apply_collective(&op, n, &term);
            let scale = coeff / k as f64;
            term.iter_mut().for_each(|t| *t *= scale);
            let size: f64 = term.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
            acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
            if size < 1e-18 {
                break;
            }
        }
        v = acc;
    }
    let bra = DVector::from_vec(psi);
    let ket = DVector::from_vec(v);
    Ok(bra.dotc(&ket))
}

/// Brute-force overlaps for many ensembles in parallel.
pub fn ds_bruteforce_batch(cases: &[(SpinEnsemble, f64, f64)], field: &BiasField) -> Vec<Result<Complex64>> {
    cases
        .par_iter()
        .map(|(ens, theta, t0)| ds_bruteforce(ens, *theta, *t0, field))
        .collect()
}

/// `Var[θ] ≥ 1/(4N_eN_S²)` for spins aligned with `σ_x(t₀)`.
pub fn crb_coherent(n_spins: usize, n_electrons: u64) -> Result<f64> {
    check_counts(n_spins, n_electrons)?;
    let n = n_spins as f64;
    Ok(1.0 / (4.0 * n_electrons as f64 * n * n))
}

/// `Var[θ] ≥ (1 − cos^{2N}2θ)/(N_e(2N sin2θ cos^{N−1}2θ)²)` for
/// `⟨σ_x(t₀)⟩ = 0` at the optimal `φ = 0`; tends to `1/(4N_eN)` as `θ → 0`.
pub fn crb_unpolarized(n_spins: usize, n_electrons: u64, theta: f64) -> Result<f64> {
    check_counts(n_spins, n_electrons)?;
    let n = n_spins as f64;
    let ne = n_electrons as f64;
    if theta == 0.0 {
        return Ok(1.0 / (4.0 * ne * n));
    }
    let c = (2.0 * theta).cos();
    let s = (2.0 * theta).sin();
    // 1 − c^{2N} with c = 1 − 2sin²θ, kept accurate for small θ
    let log_c2 = 2.0 * (-2.0 * theta.sin().powi(2)).ln_1p();
    let num = if c > 0.0 {
        -(n * log_c2).exp_m1()
    } else {
        1.0 - c.powf(2.0 * n)
    };
    let den = ne * (2.0 * n * s * c.powf(n - 1.0)).powi(2);
    if den == 0.0 {
        return Err(Error::NonIdentifiable(format!("θ = {theta} carries no information")));
    }
    Ok(num / den)
}

/// Single-shot bound from `p₊ = ½[1 + Re(e^{−iφ}D_S)]` with the analytic
/// `∂_θD_S`, for any product state and any `φ`.
pub fn ensemble_crb(
    ens: &SpinEnsemble,
    n_electrons: u64,
    theta: f64,
    phi: f64,
    t0: f64,
    field: &BiasField,
) -> Result<f64> {
    check_counts(ens.n_spins, n_electrons)?;
    let sx = ensemble_sx(ens, t0, field);
    let fi = ensemble_fisher(sx, theta, phi, ens.n_spins);
    if !(fi.is_finite() && fi > 0.0) {
        return Err(Error::NonIdentifiable(format!(
            "Fisher information {fi} at θ = {theta}, φ = {phi}"
        )));
    }
    Ok(1.0 / (n_electrons as f64 * fi))
}

/// `p₊` of the ensemble fringe.
pub fn ensemble_p_plus(sx: f64, theta: f64, phi: f64, n_spins: usize) -> f64 {
    let d = ds_from_sx(sx, theta, n_spins);
    (0.5 * (1.0 + (Complex64::from_polar(1.0, -phi) * d).re)).clamp(0.0, 1.0)
}

/// `∂_θp₊` of the ensemble fringe.
pub fn ensemble_p_plus_derivative(sx: f64, theta: f64, phi: f64, n_spins: usize) -> f64 {
    let d1 = single_factor(sx, theta);
    let (s2, c2) = (2.0 * theta).sin_cos();
    let dd1 = Complex64::new(-2.0 * s2, 2.0 * sx * c2);
    let dd = if n_spins == 1 {
        dd1
    } else {
        d1.powu(n_spins as u32 - 1) * dd1 * n_spins as f64
    };
    0.5 * (Complex64::from_polar(1.0, -phi) * dd).re
}

/// Per-electron Fisher information `(∂_θp₊)²/(p₊(1 − p₊))` of the ensemble.
pub fn ensemble_fisher(sx: f64, theta: f64, phi: f64, n_spins: usize) -> f64 {
    let d = ds_from_sx(sx, theta, n_spins);
    let re = (Complex64::from_polar(1.0, -phi) * d).re;
    let g = ensemble_p_plus_derivative(sx, theta, phi, n_spins);
    let var = 0.25 * (1.0 - re * re);
    if var <= 0.0 {
        return if g == 0.0 { f64::NAN } else { f64::INFINITY };
    }
    g * g / var
}

fn check_counts(n_spins: usize, n_electrons: u64) -> Result<()> {
    if n_spins == 0 || n_electrons == 0 {
        return Err(Error::domain("spin and electron counts must be ≥ 1"));
    }
    Ok(())
}

/// Net spin fraction `γħB₀/(2k_BT)` in the high-temperature limit.
pub fn thermal_polarization(species: &SpinSpecies, b0: f64, temperature: f64) -> Result<f64> {
    Ok(0.5 * regime_ratio(species, b0, temperature)?)
}

/// `γħB₀/(k_BT)`; the polarization formula assumes this is ≪ 1.
pub fn regime_ratio(species: &SpinSpecies, b0: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::domain(format!("temperature must be > 0, got {temperature}")));
    }
    if !(b0 >= 0.0) {
        return Err(Error::domain(format!("bias field must be ≥ 0, got {b0}")));
    }
    Ok(species.gamma * HBAR * b0 / (BOLTZMANN * temperature))
}

/// Differential phase `4θN_S·polarization` of a point-like column with a
/// given polarization.
pub fn column_phase_polarized(n_spins: f64, species: &SpinSpecies, d: f64, polarization: f64) -> Result<f64> {
    if !(n_spins >= 0.0) {
        return Err(Error::domain("spin count must be ≥ 0"));
    }
    Ok(4.0 * theta_for(d, species.mu)? * n_spins * polarization)
}

/// Differential phase of a thermally polarized point-like column.
pub fn column_phase(n_spins: f64, species: &SpinSpecies, d: f64, b0: f64, temperature: f64) -> Result<f64> {
    let pol = thermal_polarization(species, b0, temperature)?;
    column_phase_polarized(n_spins, species, d, pol)
}

/// Nuclear coupling `θ_I = μ₀eμ_Ng_I/(4πħd)`.
pub fn nuclear_theta(d: f64, g_i: f64) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::domain(format!("distance must be > 0, got {d}")));
    }
    Ok(MU_0 * ELEMENTARY_CHARGE * NUCLEAR_MAGNETON * g_i / (4.0 * PI * HBAR * d))
}

/// Homogeneous paramagnetic sphere in the field `B₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizedSphere {
    pub radius: f64,
    pub n_spins: f64,
    pub density: f64,
    pub species: SpinSpecies,
    pub b0: f64,
    pub temperature: f64,
}

impl MagnetizedSphere {
    pub fn new(radius: f64, n_spins: f64, species: SpinSpecies, b0: f64, temperature: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("radius must be > 0, got {radius}")));
        }
        if !(n_spins >= 0.0) {
            return Err(Error::domain("spin count must be ≥ 0"));
        }
        if !(temperature > 0.0) {
            return Err(Error::domain(format!("temperature must be > 0, got {temperature}")));
        }
        let volume = 4.0 / 3.0 * PI * radius.powi(3);
        Ok(MagnetizedSphere {
            radius,
            n_spins,
            density: n_spins / volume,
            species,
            b0,
            temperature,
        })
    }

    /// Curie susceptibility `μ₀n_Sγ²ħ²I(I+1)/(3k_BT)`.
    pub fn susceptibility(&self) -> f64 {
        let i = self.species.spin;
        MU_0 * self.density * (self.species.gamma * HBAR).powi(2) * i * (i + 1.0) / (3.0 * BOLTZMANN * self.temperature)
    }

    /// Interior field of the magnetized sphere, `(2/3)χB₀`.
    pub fn internal_field(&self) -> f64 {
        2.0 / 3.0 * self.susceptibility() * self.b0
    }

    /// Flux `πR²B'_in` through the equatorial cross-section.
    pub fn flux(&self) -> f64 {
        PI * self.radius.powi(2) * self.internal_field()
    }
}

/// `−(e/ħ)Φ` for the electron passing through the sphere's flux.
pub fn sphere_phase(sphere: &MagnetizedSphere) -> f64 {
    -ELEMENTARY_CHARGE / HBAR * sphere.flux()
}
