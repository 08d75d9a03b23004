//! Parameter sweeps: orientation (β) sweep, Larmor-phase fringe sweep, resonance
//! scan over the electron pulse rate, and tabulated phase estimates.

use super::config::{Axis, ScenarioConfig, SpeciesChoice};
use super::output::{Cell, Table};
use super::protocols::{ensemble_phase_visibility, initial_state};
use crate::constants::PROTON_G;
use crate::ensemble::{column_phase_polarized, ds_from_sx, nuclear_theta};
use crate::estimation::electrons_for_phase;
use crate::quantum::{fringe_observables, mw_pulse, sigma_x_at, theta_for, BiasField, SpinState};
use crate::{Error, Result};
use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, TAU};

fn config_theta(cfg: &ScenarioConfig) -> Result<f64> {
    theta_for(cfg.d, cfg.spin_species()?.mu)
}

/// `n` angles `2πk/n`.
pub fn beta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// Pure spin in the arm plane at angle `β` from the interferometer normal:
/// columns `beta_rad, delta_phi_rad, visibility`, where the last column is
/// the deviation `𝒱 − 1`.
pub fn beta_sweep(cfg: &ScenarioConfig, betas: &[f64]) -> Result<Table> {
    let theta = config_theta(cfg)?;
    let frozen = BiasField::from_omega(0.0, Vector3::z())?;
    let mut table = Table::new(&["beta_rad", "delta_phi_rad", "visibility"]);
    for &beta in betas {
        let spin = SpinState::from_bloch(Vector3::new(beta.cos(), beta.sin(), 0.0))?;
        let obs = fringe_observables(&spin, theta, 0.0, &frozen);
        table.push(vec![
            Cell::Num(beta),
            Cell::Num(obs.delta_phi),
            Cell::Num(visibility_deficit(obs.sx_expect, theta)),
        ]);
    }
    Ok(table)
}

/// `𝒱 − 1 = −x/(1 + √(1 − x))` with `x = (1 − sx²)sin²2θ`, free of
/// cancellation for small couplings.
pub fn visibility_deficit(sx: f64, theta: f64) -> f64 {
    let x = (1.0 - sx * sx).max(0.0) * (2.0 * theta).sin().powi(2);
    0.0 - x / (1.0 + (1.0 - x).sqrt())
}

/// Phase and visibility of the configured state (after its pulses) over the
/// `t0_phase` grid.
pub fn fringe_sweep(cfg: &ScenarioConfig) -> Result<Table> {
    cfg.validate()?;
    let theta = config_theta(cfg)?;
    let field = cfg.bias_field()?;
    let mut state = initial_state(cfg, &field)?;
    for (axis, angle) in cfg.pulse_axes()? {
        state = mw_pulse(&state, axis, angle)?;
    }
    let unit = BiasField::from_omega(1.0, field.axis())?;
    let mut table = Table::new(&["t0_phase_rad", "t0_s", "sx_expect", "delta_phi_rad", "visibility"]);
    for &phase in &cfg.t0_phase {
        let sx = state.expectation(&sigma_x_at(&unit, phase)).clamp(-1.0, 1.0);
        let (dphi, vis) = ensemble_phase_visibility(sx, theta, cfg.n_spins);
        let t0 = if field.omega0() > 0.0 {
            phase / field.omega0()
        } else {
            0.0
        };
        table.push(vec![
            Cell::Num(phase),
            Cell::Num(t0),
            Cell::Num(sx),
            Cell::Num(dphi),
            Cell::Num(vis),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Accumulation {
    /// Mean of `|arg D_k|` over the arrivals.
    Magnitude,
    /// `|arg ⟨D_k⟩|`, the phase of the averaged overlap.
    Coherent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceScan {
    #[serde(skip)]
    pub table: Table,
    pub omega0: f64,
    pub argmax_omega: f64,
    pub argmax_index: usize,
}

/// `points` rates `ω₀(1 + span·(j − c)/c)` with `c = (points − 1)/2`, so
/// the centre is exactly `ω₀`; `points` is rounded up to an odd number.
pub fn resonance_grid(omega0: f64, span: f64, points: usize) -> Result<Vec<f64>> {
    if !(span > 0.0 && span < 1.0) {
        return Err(Error::domain(format!("relative span must lie in (0, 1), got {span}")));
    }
    let points = (points.max(3)) | 1;
    let c = ((points - 1) / 2) as f64;
    Ok((0..points)
        .map(|j| omega0 * (1.0 + span * (j as f64 - c) / c))
        .collect())
}

/// Protocol-B resonance: after the π/2-pulse, `arrivals` electrons pass at
/// `t_k = (2πk + ψ)/ω_e` with lock phase `ψ`; the signal accumulates the
/// per-arrival phase. Odd subharmonics `ω₀/(2m + 1)` tie with `ω₀` for the
/// default lock phase, so ties go to the highest rate.
pub fn resonance_scan(cfg: &ScenarioConfig, omega_grid: &[f64], mode: Accumulation) -> Result<ResonanceScan> {
    if cfg.bias_axis != Axis::Z {
        return Err(Error::config(
            "resonance scan needs a protocol-b configuration (bias_axis = z)",
        ));
    }
    cfg.validate()?;
    if omega_grid.is_empty() || omega_grid.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::domain("pulse rates must be positive and finite"));
    }
    let theta = config_theta(cfg)?;
    let field = cfg.bias_field()?;
    if field.omega0() <= 0.0 {
        return Err(Error::domain("resonance scan needs B0 > 0"));
    }
    let mut state = initial_state(cfg, &field)?;
    for (axis, angle) in cfg.pulse_axes()? {
        state = mw_pulse(&state, axis, angle)?;
    }
    let n = cfg.n_spins;
    let signals: Vec<f64> = omega_grid
        .par_iter()
        .map(|&we| {
            let mut magnitude = 0.0;
            let mut coherent = Complex64::new(0.0, 0.0);
            for k in 0..cfg.arrivals {
                let t = (TAU * k as f64 + cfg.lock_phase) / we;
                let sx = state.expectation(&sigma_x_at(&field, t)).clamp(-1.0, 1.0);
                magnitude += ensemble_phase_visibility(sx, theta, n).0.abs();
                coherent += ds_from_sx(sx, theta, n as usize);
            }
            match mode {
                Accumulation::Magnitude => magnitude / cfg.arrivals as f64,
                Accumulation::Coherent => coherent.arg().abs(),
            }
        })
        .collect();
    let best = signals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * best.abs();
    let argmax_index = (0..signals.len())
        .filter(|&j| signals[j] >= best - tol)
        .max_by(|&a, &b| omega_grid[a].total_cmp(&omega_grid[b]))
        .expect("non-empty grid");
    let mut table = Table::new(&["omega_e_rad_s", "detuning", "signal_rad"]);
    for (&we, &sig) in omega_grid.iter().zip(&signals) {
        table.push(vec![
            Cell::Num(we),
            Cell::Num(we / field.omega0() - 1.0),
            Cell::Num(sig),
        ]);
    }
    Ok(ResonanceScan {
        table,
        omega0: field.omega0(),
        argmax_omega: omega_grid[argmax_index],
        argmax_index,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRow {
    pub species: SpeciesChoice,
    pub d: f64,
    pub n_spins: f64,
    pub polarization: f64,
}

/// Single electron, single proton, 12 %-polarized electron column of 1000 and
/// 10 %-hyperpolarized proton column of 1000, each at 0.1 nm and 1 nm.
pub fn default_phase_rows() -> Vec<PhaseRow> {
    let mut rows = Vec::new();
    for d in [1e-10, 1e-9] {
        for (species, n, pol) in [
            (SpeciesChoice::Electron, 1.0, 1.0),
            (SpeciesChoice::Proton, 1.0, 1.0),
            (SpeciesChoice::Electron, 1000.0, 0.12),
            (SpeciesChoice::Proton, 1000.0, 0.10),
        ] {
            rows.push(PhaseRow {
                species,
                d,
                n_spins: n,
                polarization: pol,
            });
        }
    }
    rows
}

fn species_label(s: &SpeciesChoice) -> &'static str {
    match s {
        SpeciesChoice::Electron => "electron",
        SpeciesChoice::Proton => "proton",
        SpeciesChoice::Custom { .. } => "custom",
    }
}

/// Differential phase `2Δφ_S = 4θN_S·polarization` per row, with the
/// electron count for unit signal-to-noise.
pub fn phase_table(rows: &[PhaseRow]) -> Result<Table> {
    let mut table = Table::new(&[
        "species",
        "d_m",
        "n_spins",
        "polarization",
        "theta_rad",
        "differential_phase_rad",
        "electrons_snr1",
    ]);
    for row in rows {
        let species = row.species.species()?;
        let theta = match row.species {
            SpeciesChoice::Proton => nuclear_theta(row.d, PROTON_G)?,
            _ => theta_for(row.d, species.mu)?,
        };
        let diff = match row.species {
            SpeciesChoice::Proton => 4.0 * theta * row.n_spins * row.polarization,
            _ => column_phase_polarized(row.n_spins, &species, row.d, row.polarization)?,
        };
        let electrons = if diff > 0.0 {
            electrons_for_phase(diff, 1.0)?
        } else {
            f64::INFINITY
        };
        table.push(vec![
            Cell::from(species_label(&row.species)),
            Cell::Num(row.d),
            Cell::Num(row.n_spins),
            Cell::Num(row.polarization),
            Cell::Num(theta),
            Cell::Num(diff),
            Cell::Num(electrons),
        ]);
    }
    Ok(table)
}

/// A ready-made protocol-B configuration (bias along `z`, π/2-pulse about `x`).
pub fn protocol_b_config() -> ScenarioConfig {
    let mut cfg = ScenarioConfig {
        bias_axis: Axis::Z,
        ..Default::default()
    };
    cfg.pulses[0].axis = Axis::X;
    cfg.pulses[0].angle = FRAC_PI_2;
    cfg
}
