//! Pump–probe protocols: fringe scans before and after a microwave pulse.
//!
//! * Protocol A: bias along `x`; a π-pulse toggles the spin between the two
//!   eigenstates of `σ_x` and the phase difference of the two scans is the
//!   signal. A π/2-pulse turns the spin into the plane normal to the bias
//!   and the post-pulse scan becomes a null measurement.
//! * Protocol B: bias along `z`; a π/2-pulse tips the spin into the
//!   precession plane and the phase oscillates with the passage time as
//!   `⟨σ_x(t₀)⟩ = s_z sin ω₀t₀`.
//!
//! Each `(stage, t₀)` group is a scan over the `φ` grid with `N_e` sampled
//! electrons per point, followed by a fringe fit.

use super::config::{Axis, ScenarioConfig};
use super::output::{Cell, Table};
use crate::ensemble::{ensemble_fisher, ensemble_p_plus};
use crate::estimation::{bernoulli_count, crb, fit_fringe, FringePoint};
use crate::quantum::{mw_pulse, sigma_x_at, thermal_state, theta_for, BiasField, SpinState};
use crate::{Error, Result};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

pub const RUN_COLUMNS: [&str; 12] = [
    "stage",
    "t0_s",
    "t0_phase_rad",
    "phi_rad",
    "p_plus_model",
    "n_plus",
    "n_minus",
    "delta_phi_model_rad",
    "visibility_model",
    "delta_phi_fit_rad",
    "visibility_fit",
    "crb_rad2",
];

/// Fit of one `(stage, t₀)` scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanFit {
    pub stage: u64,
    pub t0_phase: f64,
    pub sx_expect: f64,
    pub delta_phi_model: f64,
    pub visibility_model: f64,
    pub delta_phi_fit: f64,
    pub sigma_delta_phi: f64,
    pub visibility_fit: f64,
    pub sigma_visibility: f64,
    pub phase_identifiable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub protocol: String,
    pub variant: String,
    /// Rows ordered by stage, then `t₀`, then `φ`; each stage contributes
    /// `|t0_grid| × |phi_grid|` rows.
    #[serde(skip)]
    pub table: Table,
    pub fits: Vec<ScanFit>,
    pub summary: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub config_hash: String,
    pub seed: u64,
}

/// Ensemble phase `N_S·atan2(sx sin2θ, cos2θ)` (unwrapped) and visibility.
pub fn ensemble_phase_visibility(sx: f64, theta: f64, n_spins: u64) -> (f64, f64) {
    let (s2, c2) = (2.0 * theta).sin_cos();
    let n = n_spins as f64;
    ((sx * s2).atan2(c2) * n, c2.hypot(sx * s2).powf(n))
}

/// `p₊` of one row: `½[1 + Re(e^{−iφ}D_S)]`.
pub fn row_p_plus(sx: f64, theta: f64, phi: f64, n_spins: u64) -> f64 {
    ensemble_p_plus(sx, theta, phi, n_spins as usize)
}

fn row_crb(sx: f64, theta: f64, phi: f64, n_spins: u64, n_e: u64) -> f64 {
    if n_spins == 1 {
        return crb(theta, phi, sx, n_e).unwrap_or(f64::INFINITY);
    }
    let fi = ensemble_fisher(sx, theta, phi, n_spins as usize);
    if fi.is_finite() && fi > 0.0 {
        1.0 / (n_e as f64 * fi)
    } else {
        f64::INFINITY
    }
}

pub fn stream_id(stage: u64, t0_idx: usize, phi_idx: usize) -> u64 {
    (stage << 48) | ((t0_idx as u64) << 24) | phi_idx as u64
}

/// Initial spin state: along `+n` with the configured polarization, the
/// thermal value, or fully polarized.
pub fn initial_state(cfg: &ScenarioConfig, field: &BiasField) -> Result<SpinState> {
    let n = field.axis();
    match (cfg.polarization, cfg.temperature) {
        (Some(p), _) => SpinState::from_bloch(n * p),
        (None, Some(t)) => thermal_state(field, t),
        (None, None) => SpinState::from_bloch(n),
    }
}

// Larmor phases are used directly, so the operator is evaluated on a unit
// frequency field with t = ω₀t₀.
fn sx_at_phase(state: &SpinState, axis: Vector3<f64>, phase: f64) -> Result<f64> {
    let unit = BiasField::from_omega(1.0, axis)?;
    Ok(state.expectation(&sigma_x_at(&unit, phase)).clamp(-1.0, 1.0))
}

struct Setup {
    field: BiasField,
    theta: f64,
}

fn setup(cfg: &ScenarioConfig) -> Result<Setup> {
    cfg.validate()?;
    let species = cfg.spin_species()?;
    Ok(Setup {
        field: cfg.bias_field()?,
        theta: theta_for(cfg.d, species.mu)?,
    })
}

fn seconds(field: &BiasField, phase: f64) -> f64 {
    if field.omega0() > 0.0 {
        phase / field.omega0()
    } else {
        0.0
    }
}

fn scan_stages(cfg: &ScenarioConfig, s: &Setup, stages: &[SpinState]) -> Result<(Table, Vec<ScanFit>)> {
    let groups: Vec<(usize, usize)> = (0..stages.len())
        .flat_map(|st| (0..cfg.t0_phase.len()).map(move |k| (st, k)))
        .collect();
    let results = groups
        .par_iter()
        .map(|&(st, k)| {
            let stage = st as u64;
            let phase = cfg.t0_phase[k];
            let sx = sx_at_phase(&stages[st], s.field.axis(), phase)?;
            let (dphi, vis) = ensemble_phase_visibility(sx, s.theta, cfg.n_spins);
            let mut points = Vec::with_capacity(cfg.phi.len());
            let mut rows = Vec::with_capacity(cfg.phi.len());
            for (j, &phi) in cfg.phi.iter().enumerate() {
                let p = row_p_plus(sx, s.theta, phi, cfg.n_spins);
                let n_plus = bernoulli_count(p, cfg.n_electrons, cfg.seed, stream_id(stage, k, j));
                let n_minus = cfg.n_electrons - n_plus;
                points.push(FringePoint { phi, n_plus, n_minus });
                rows.push((
                    phi,
                    p,
                    n_plus,
                    n_minus,
                    row_crb(sx, s.theta, phi, cfg.n_spins, cfg.n_electrons),
                ));
            }
            let fit = fit_fringe(&points)?;
            let scan = ScanFit {
                stage,
                t0_phase: phase,
                sx_expect: sx,
                delta_phi_model: dphi,
                visibility_model: vis,
                delta_phi_fit: fit.delta_phi,
                sigma_delta_phi: fit.sigma_delta_phi,
                visibility_fit: fit.visibility,
                sigma_visibility: fit.sigma_visibility,
                phase_identifiable: fit.phase_identifiable,
            };
            let table_rows: Vec<Vec<Cell>> = rows
                .into_iter()
                .map(|(phi, p, np, nm, bound)| {
                    vec![
                        Cell::Int(stage),
                        Cell::Num(seconds(&s.field, phase)),
                        Cell::Num(phase),
                        Cell::Num(phi),
                        Cell::Num(p),
                        Cell::Int(np),
                        Cell::Int(nm),
                        Cell::Num(dphi),
                        Cell::Num(vis),
                        Cell::Num(fit.delta_phi),
                        Cell::Num(fit.visibility),
                        Cell::Num(bound),
                    ]
                })
                .collect();
            Ok((scan, table_rows))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&RUN_COLUMNS);
    let mut fits = Vec::with_capacity(results.len());
    for (scan, rows) in results {
        fits.push(scan);
        rows.into_iter().for_each(|r| table.push(r));
    }
    Ok((table, fits))
}

fn single_pulse(cfg: &ScenarioConfig, protocol: &str) -> Result<(Vector3<f64>, f64)> {
    let pulses = cfg.pulse_axes()?;
    match pulses.as_slice() {
        [one] => Ok(*one),
        _ => Err(Error::config(format!(
            "{protocol} expects exactly one pulse, got {}",
            pulses.len()
        ))),
    }
}

fn near(angle: f64, target: f64) -> bool {
    let a = angle.rem_euclid(TAU);
    (a - target).abs() < 1e-9 || (a - (TAU - target)).abs() < 1e-9
}

fn lifetime_warnings(cfg: &ScenarioConfig, field: &BiasField) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(t_life) = cfg.t_life {
        let longest = cfg.t0_phase.iter().cloned().fold(0.0, f64::max);
        let duration = seconds(field, longest);
        if duration > t_life {
            out.push(format!(
                "protocol duration {duration:e} s exceeds the spin lifetime {t_life:e} s"
            ));
        }
    }
    out
}

fn base_result(
    cfg: &ScenarioConfig,
    protocol: &str,
    variant: &str,
    table: Table,
    fits: Vec<ScanFit>,
    warnings: Vec<String>,
) -> RunResult {
    RunResult {
        protocol: protocol.into(),
        variant: variant.into(),
        table,
        fits,
        summary: BTreeMap::new(),
        warnings,
        config_hash: cfg.hash(),
        seed: cfg.seed,
    }
}

/// Protocol A: π-pulse toggle (or π/2-pulse null measurement) with the bias
/// along the interferometer normal.
pub fn run_protocol_a(cfg: &ScenarioConfig) -> Result<RunResult> {
    if cfg.bias_axis != Axis::X {
        return Err(Error::config("protocol-a needs bias_axis = x"));
    }
    let s = setup(cfg)?;
    let (axis, angle) = single_pulse(cfg, "protocol-a")?;
    let variant = if near(angle, PI) {
        "toggle"
    } else if near(angle, FRAC_PI_2) {
        "null"
    } else {
        return Err(Error::config("protocol-a expects a π or π/2 pulse"));
    };
    let before = initial_state(cfg, &s.field)?;
    let after = mw_pulse(&before, axis, angle)?;
    let (table, fits) = scan_stages(cfg, &s, &[before, after])?;
    let nt = cfg.t0_phase.len();
    let (b, a) = (&fits[0], &fits[nt]);
    let mut res = base_result(
        cfg,
        "protocol-a",
        variant,
        table,
        fits.clone(),
        lifetime_warnings(cfg, &s.field),
    );
    let sum = &mut res.summary;
    sum.insert("theta_rad".into(), s.theta);
    sum.insert("phase_before_model_rad".into(), b.delta_phi_model);
    sum.insert("phase_after_model_rad".into(), a.delta_phi_model);
    sum.insert("phase_before_fit_rad".into(), b.delta_phi_fit);
    sum.insert("phase_after_fit_rad".into(), a.delta_phi_fit);
    sum.insert("phase_after_sigma_rad".into(), a.sigma_delta_phi);
    sum.insert("differential_model_rad".into(), b.delta_phi_model - a.delta_phi_model);
    sum.insert("differential_fit_rad".into(), b.delta_phi_fit - a.delta_phi_fit);
    sum.insert(
        "differential_sigma_rad".into(),
        b.sigma_delta_phi.hypot(a.sigma_delta_phi),
    );
    sum.insert("visibility_before_model".into(), b.visibility_model);
    sum.insert("visibility_after_model".into(), a.visibility_model);
    sum.insert("visibility_before_fit".into(), b.visibility_fit);
    sum.insert("visibility_after_fit".into(), a.visibility_fit);
    sum.insert("visibility_drop_model".into(), 1.0 - b.visibility_model);
    Ok(res)
}

/// Protocol B: π/2-pulse into the precession plane with the bias along `z`.
pub fn run_protocol_b(cfg: &ScenarioConfig) -> Result<RunResult> {
    if cfg.bias_axis != Axis::Z {
        return Err(Error::config("protocol-b needs bias_axis = z"));
    }
    let s = setup(cfg)?;
    let (axis, angle) = single_pulse(cfg, "protocol-b")?;
    if !near(angle, FRAC_PI_2) {
        return Err(Error::config("protocol-b expects a π/2 pulse"));
    }
    let before = initial_state(cfg, &s.field)?;
    let after = mw_pulse(&before, axis, angle)?;
    let (table, fits) = scan_stages(cfg, &s, &[before, after])?;
    let nt = cfg.t0_phase.len();
    let mut res = base_result(
        cfg,
        "protocol-b",
        "tip",
        table,
        fits.clone(),
        lifetime_warnings(cfg, &s.field),
    );
    let post = &fits[nt..];
    let max_model = post.iter().map(|f| f.delta_phi_model.abs()).fold(0.0, f64::max);
    let max_fit = post.iter().map(|f| f.delta_phi_fit.abs()).fold(0.0, f64::max);
    let sum = &mut res.summary;
    sum.insert("theta_rad".into(), s.theta);
    sum.insert("s_z".into(), before.bloch().dot(&s.field.axis()));
    sum.insert("phase_before_model_rad".into(), fits[0].delta_phi_model);
    sum.insert("phase_before_fit_rad".into(), fits[0].delta_phi_fit);
    sum.insert("visibility_before_model".into(), fits[0].visibility_model);
    sum.insert("visibility_before_fit".into(), fits[0].visibility_fit);
    sum.insert("max_abs_phase_after_model_rad".into(), max_model);
    sum.insert("max_abs_phase_after_fit_rad".into(), max_fit);
    sum.insert(
        "amplitude_model_rad".into(),
        ensemble_phase_visibility(before.bloch().dot(&s.field.axis()), s.theta, cfg.n_spins).0,
    );
    Ok(res)
}
