//! Physical constants, spin species and relativistic beam kinematics.
//!
//! Values are CODATA 2018. Magnetic moments are stored as positive
//! magnitudes: the electron moment is antiparallel to its spin, but every
//! phase formula in this crate depends on `|μ|` only, and the orientation
//! sign is absorbed into the precession convention of [`crate::quantum`].

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Elementary charge e (C). Exact.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Reduced Planck constant ħ (J·s). Exact to the digits given.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permeability μ₀ (N/A²).
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Electron mass (kg).
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Proton mass (kg).
pub const PROTON_MASS: f64 = 1.672_621_923_69e-27;
/// Speed of light (m/s). Exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant (J/K). Exact.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Bohr magneton (J/T).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Nuclear magneton (J/T).
pub const NUCLEAR_MAGNETON: f64 = 5.050_783_746_1e-27;
/// Classical electron radius (m).
pub const CLASSICAL_ELECTRON_RADIUS: f64 = 2.817_940_326_2e-15;
/// Magnitude of the free-electron g-factor.
pub const ELECTRON_G: f64 = 2.002_319_304_362_56;
/// Proton g-factor.
pub const PROTON_G: f64 = 5.585_694_689_3;
/// Electron gyromagnetic ratio magnitude (rad/s/T).
pub const ELECTRON_GYROMAGNETIC_RATIO: f64 = 1.760_859_630_23e11;
/// Proton gyromagnetic ratio (rad/s/T).
pub const PROTON_GYROMAGNETIC_RATIO: f64 = 2.675_221_874_4e8;
/// Electron rest energy m_e c² (eV).
pub const ELECTRON_REST_ENERGY_EV: f64 = 0.510_998_950_00e6;

/// The constant set as a value, for code that wants to carry it around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub e: f64,
    pub hbar: f64,
    pub mu0: f64,
    pub m_e: f64,
    pub m_p: f64,
    pub c: f64,
    pub k_b: f64,
    pub mu_b: f64,
    pub mu_n: f64,
    pub r_e: f64,
    pub g_s: f64,
}

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    e: ELEMENTARY_CHARGE,
    hbar: HBAR,
    mu0: MU_0,
    m_e: ELECTRON_MASS,
    m_p: PROTON_MASS,
    c: SPEED_OF_LIGHT,
    k_b: BOLTZMANN,
    mu_b: BOHR_MAGNETON,
    mu_n: NUCLEAR_MAGNETON,
    r_e: CLASSICAL_ELECTRON_RADIUS,
    g_s: ELECTRON_G,
};

/// A spin species: gyromagnetic ratio, moment magnitude and spin quantum number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinSpecies {
    pub name: String,
    /// Gyromagnetic ratio magnitude (rad/s/T).
    pub gamma: f64,
    /// Magnetic moment magnitude μ = γħI (J/T).
    pub mu: f64,
    /// Spin quantum number I.
    pub spin: f64,
    /// g-factor magnitude.
    pub g: f64,
}

impl SpinSpecies {
    /// Builds a species from its gyromagnetic ratio; the moment follows as γħI.
    pub fn new(name: impl Into<String>, gamma: f64, spin: f64, g: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::domain(format!(
                "gyromagnetic ratio must be positive, got {gamma}"
            )));
        }
        if !(spin.is_finite() && spin > 0.0) || (2.0 * spin).fract() != 0.0 {
            return Err(Error::domain(format!(
                "spin quantum number must be a positive half-integer, got {spin}"
            )));
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::domain(format!("g-factor must be non-negative, got {g}")));
        }
        Ok(SpinSpecies {
            name: name.into(),
            gamma,
            mu: gamma * HBAR * spin,
            spin,
            g,
        })
    }

    /// Builds a species from all four quantities and checks that μ = γħI.
    pub fn with_moment(name: impl Into<String>, gamma: f64, mu: f64, spin: f64, g: f64) -> Result<Self> {
        let species = Self::new(name, gamma, spin, g)?;
        if ((species.mu - mu) / species.mu).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "moment {mu:e} J/T inconsistent with gamma*hbar*I = {:e} J/T",
                species.mu
            )));
        }
        Ok(species)
    }

    /// Electron with the rounded ratio 2π·28 GHz/T.
    pub fn electron_nominal() -> Self {
        Self::new("electron", 2.0 * PI * 28.0e9, 0.5, ELECTRON_G).expect("valid preset")
    }

    /// Hydrogen nucleus with the rounded ratio 2π·42.6 MHz/T.
    pub fn proton_nominal() -> Self {
        Self::new("proton", 2.0 * PI * 42.6e6, 0.5, PROTON_G).expect("valid preset")
    }
}

/// Free electron spin with CODATA values.
pub fn electron_species() -> SpinSpecies {
    SpinSpecies::new("electron", ELECTRON_GYROMAGNETIC_RATIO, 0.5, ELECTRON_G).expect("valid preset")
}

/// Hydrogen nucleus with CODATA values.
pub fn proton_species() -> SpinSpecies {
    SpinSpecies::new("proton", PROTON_GYROMAGNETIC_RATIO, 0.5, PROTON_G).expect("valid preset")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamKinematics {
    /// Kinetic energy (eV).
    pub kinetic_energy: f64,
    /// Speed (m/s).
    pub v: f64,
    /// Lorentz factor.
    pub gamma_l: f64,
}

impl BeamKinematics {
    /// Relativistic momentum p = m γ_L v (kg·m/s).
    pub fn momentum(&self) -> f64 {
        ELECTRON_MASS * self.gamma_l * self.v
    }
}

/// Speed and Lorentz factor of an electron with the given kinetic energy in eV.
pub fn beam_kinematics(kinetic_energy: f64) -> Result<BeamKinematics> {
    if !(kinetic_energy.is_finite() && kinetic_energy > 0.0) {
        return Err(Error::domain(format!(
            "kinetic energy must be positive, got {kinetic_energy} eV"
        )));
    }
    let excess = kinetic_energy / ELECTRON_REST_ENERGY_EV;
    let gamma_l = 1.0 + excess;
    // γ² − 1 = (γ − 1)(γ + 1) keeps the low-energy limit accurate.
    let v = SPEED_OF_LIGHT * (excess * (gamma_l + 1.0)).sqrt() / gamma_l;
    Ok(BeamKinematics {
        kinetic_energy,
        v,
        gamma_l,
    })
}
