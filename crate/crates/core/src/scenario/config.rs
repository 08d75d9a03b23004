//! Flat `key = value unit` scenario files.
//!
//! ```text
//! # single electron spin, π-pulse toggle
//! species     = electron
//! d           = 0.1 nm
//! B0          = 1.8 T
//! bias_axis   = x
//! temperature = pure
//! pulse       = z, 1 pi
//! t0_phase    = 0 rad
//! phi         = linspace(0, 1.8333333333333333, 12) pi
//! N_e         = 1000000
//! seed        = 42
//! ```
//!
//! Dimensional values need a unit. `pulse` may repeat and is applied in
//! order; `pulse = none` clears the default π-pulse. Lists are comma separated with the unit
//! written once at the end; `linspace(a, b, n) unit` includes both ends.

use super::units::{convert, parse_quantity, split_number, unit_error, Dimension};
use crate::constants::{electron_species, proton_species, SpinSpecies};
use crate::quantum::{unit_axis, BiasField};
use crate::{Error, Result};
use nalgebra::Vector3;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn vector(self) -> Vector3<f64> {
        match self {
            Axis::X => Vector3::x(),
            Axis::Y => Vector3::y(),
            Axis::Z => Vector3::z(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SpeciesChoice {
    Electron,
    Proton,
    Custom { gamma: f64, g: f64, spin: f64 },
}

impl SpeciesChoice {
    pub fn species(&self) -> Result<SpinSpecies> {
        match *self {
            SpeciesChoice::Electron => Ok(electron_species()),
            SpeciesChoice::Proton => Ok(proton_species()),
            SpeciesChoice::Custom { gamma, g, spin } => SpinSpecies::new("custom", gamma, spin, g),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "electron" => Ok(SpeciesChoice::Electron),
            "proton" | "hydrogen" => Ok(SpeciesChoice::Proton),
            other => Err(Error::config(format!("unknown species '{other}'"))),
        }
    }
}

/// Microwave pulse about a signed coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pulse {
    pub axis: Axis,
    pub negative: bool,
    pub angle: f64,
}

impl Pulse {
    pub fn axis_vector(&self) -> Vector3<f64> {
        let v = self.axis.vector();
        if self.negative {
            -v
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub species: SpeciesChoice,
    /// Distance from the spin to each arm (m).
    pub d: f64,
    pub b0: f64,
    pub bias_axis: Axis,
    /// `None` for a pure state along the bias axis.
    pub temperature: Option<f64>,
    pub n_spins: u64,
    /// Overrides the thermal polarization along the bias axis.
    pub polarization: Option<f64>,
    pub pulses: Vec<Pulse>,
    /// Larmor phases `ω₀t₀` (rad) at which the electrons pass.
    pub t0_phase: Vec<f64>,
    pub phi: Vec<f64>,
    pub n_electrons: u64,
    pub seed: u64,
    /// Beam kinetic energy (eV).
    pub beam_energy: f64,
    pub t_life: Option<f64>,
    /// Phase `ω_e t_k mod 2π` of the pulse arrivals in resonance scans.
    pub lock_phase: f64,
    pub arrivals: usize,
}

/// `n` equally spaced phases covering `[0, 2π)`.
pub fn full_circle(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            species: SpeciesChoice::Electron,
            d: 1e-10,
            b0: 1.8,
            bias_axis: Axis::X,
            temperature: None,
            n_spins: 1,
            polarization: None,
            pulses: vec![Pulse {
                axis: Axis::Z,
                negative: false,
                angle: PI,
            }],
            t0_phase: vec![0.0],
            phi: full_circle(12),
            n_electrons: 1_000_000,
            seed: 42,
            beam_energy: 200e3,
            t_life: None,
            lock_phase: FRAC_PI_2,
            arrivals: 100,
        }
    }
}

fn cfg_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config {
        line: Some(line),
        msg: msg.into(),
    }
}

fn with_line(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Config { msg, .. } => cfg_err(line, msg),
        other => other,
    }
}

fn parse_count(text: &str) -> Result<u64> {
    let t = text.trim();
    if let Ok(n) = t.parse::<u64>() {
        return Ok(n);
    }
    // allow 1e6-style counts when they are exact integers
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(64) => Ok(v as u64),
        _ => Err(Error::config(format!("expected a non-negative integer, got '{t}'"))),
    }
}

fn parse_list(text: &str, dim: Dimension) -> Result<Vec<f64>> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix("linspace(") {
        let close = rest.find(')').ok_or_else(|| Error::config("linspace is missing ')'"))?;
        let unit = rest[close + 1..].trim();
        let args: Vec<&str> = rest[..close].split(',').map(str::trim).collect();
        if args.len() != 3 {
            return Err(Error::config("linspace takes (start, stop, count)"));
        }
        let a = args[0]
            .parse::<f64>()
            .map_err(|_| Error::config(format!("bad number '{}'", args[0])))?;
        let b = args[1]
            .parse::<f64>()
            .map_err(|_| Error::config(format!("bad number '{}'", args[1])))?;
        let n = parse_count(args[2])? as usize;
        if n == 0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::config("linspace needs finite bounds and a count ≥ 1"));
        }
        let conv = |v: f64| convert(v, unit, dim).ok_or_else(|| unit_error(text, unit, dim));
        return (0..n)
            .map(|k| {
                let v = if n == 1 {
                    a
                } else {
                    a + (b - a) * k as f64 / (n - 1) as f64
                };
                conv(v)
            })
            .collect();
    }
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    let parsed = items.iter().map(|s| split_number(s)).collect::<Result<Vec<_>>>()?;
    let trailing = parsed.last().map(|p| p.1).unwrap_or("");
    parsed
        .iter()
        .map(|&(v, unit)| {
            let unit = if unit.is_empty() { trailing } else { unit };
            convert(v, unit, dim).ok_or_else(|| unit_error(text, unit, dim))
        })
        .collect()
}

fn parse_pulse(text: &str) -> Result<Pulse> {
    let (axis_text, angle_text) = text
        .split_once(',')
        .ok_or_else(|| Error::config("pulse expects 'axis, angle unit'"))?;
    let axis_text = axis_text.trim();
    let (negative, name) = match axis_text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, axis_text.strip_prefix('+').unwrap_or(axis_text)),
    };
    let axis = Axis::parse(name).ok_or_else(|| Error::config(format!("unknown pulse axis '{axis_text}'")))?;
    Ok(Pulse {
        axis,
        negative,
        angle: parse_quantity(angle_text, Dimension::Angle)?,
    })
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(", ")
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut pulses = Vec::new();
        let mut pulses_given = false;
        let mut custom = (None, None, None);
        let mut species_name = None;
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| cfg_err(line, format!("expected 'key = value', got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if key != "pulse" && !seen.insert(key.to_string()) {
                return Err(cfg_err(line, format!("duplicate key '{key}'")));
            }
            let wrap = with_line(line);
            match key {
                "species" => species_name = Some(value.to_string()),
                "gamma" => custom.0 = Some(parse_quantity(value, Dimension::Gyromagnetic).map_err(&wrap)?),
                "g" => custom.1 = Some(parse_quantity(value, Dimension::Fraction).map_err(&wrap)?),
                "spin" => custom.2 = Some(parse_quantity(value, Dimension::Fraction).map_err(&wrap)?),
                "d" => cfg.d = parse_quantity(value, Dimension::Length).map_err(&wrap)?,
                "B0" => cfg.b0 = parse_quantity(value, Dimension::Field).map_err(&wrap)?,
                "bias_axis" => {
                    cfg.bias_axis = Axis::parse(value)
                        .ok_or_else(|| cfg_err(line, format!("bias_axis must be x, y or z, got '{value}'")))?
                }
                "temperature" => {
                    cfg.temperature = if value == "pure" {
                        None
                    } else {
                        Some(parse_quantity(value, Dimension::Temperature).map_err(&wrap)?)
                    }
                }
                "N_S" => cfg.n_spins = parse_count(value).map_err(&wrap)?,
                "polarization" => cfg.polarization = Some(parse_quantity(value, Dimension::Fraction).map_err(&wrap)?),
                "pulse" => {
                    pulses_given = true;
                    if value != "none" {
                        pulses.push(parse_pulse(value).map_err(&wrap)?);
                    }
                }
                "t0_phase" => cfg.t0_phase = parse_list(value, Dimension::Angle).map_err(&wrap)?,
                "phi" => cfg.phi = parse_list(value, Dimension::Angle).map_err(&wrap)?,
                "N_e" => cfg.n_electrons = parse_count(value).map_err(&wrap)?,
                "seed" => cfg.seed = parse_count(value).map_err(&wrap)?,
                "beam_energy" => cfg.beam_energy = parse_quantity(value, Dimension::Energy).map_err(&wrap)?,
                "t_life" => cfg.t_life = Some(parse_quantity(value, Dimension::Time).map_err(&wrap)?),
                "lock_phase" => cfg.lock_phase = parse_quantity(value, Dimension::Angle).map_err(&wrap)?,
                "arrivals" => cfg.arrivals = parse_count(value).map_err(&wrap)? as usize,
                other => return Err(cfg_err(line, format!("unknown key '{other}'"))),
            }
        }
        if pulses_given {
            cfg.pulses = pulses;
        }
        cfg.species = match species_name.as_deref() {
            Some("custom") => match custom {
                (Some(gamma), Some(g), Some(spin)) => SpeciesChoice::Custom { gamma, g, spin },
                _ => return Err(Error::config("species = custom needs gamma, g and spin")),
            },
            other => {
                if custom != (None, None, None) {
                    return Err(Error::config("gamma, g and spin are only valid with species = custom"));
                }
                other
                    .map(SpeciesChoice::parse)
                    .transpose()?
                    .unwrap_or(SpeciesChoice::Electron)
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("d", self.d), ("beam_energy", self.beam_energy)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.b0.is_finite() && self.b0 >= 0.0) {
            return Err(Error::config(format!("B0 must be ≥ 0, got {}", self.b0)));
        }
        if let Some(t) = self.temperature {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::config(format!("temperature must be > 0, got {t}")));
            }
        }
        if let Some(t) = self.t_life {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::config(format!("t_life must be > 0, got {t}")));
            }
        }
        if let Some(p) = self.polarization {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("polarization must lie in [0, 1], got {p}")));
            }
        }
        if self.n_spins == 0 || self.n_electrons == 0 || self.arrivals == 0 {
            return Err(Error::config("N_S, N_e and arrivals must be ≥ 1"));
        }
        if self.t0_phase.is_empty() || self.phi.is_empty() {
            return Err(Error::config("t0_phase and phi grids must not be empty"));
        }
        self.species.species().map_err(|e| Error::config(e.to_string()))?;
        Ok(())
    }

    /// Canonical text: SI units, fixed key order, shortest round-trip floats.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match &self.species {
            SpeciesChoice::Electron => kv("species", "electron".into()),
            SpeciesChoice::Proton => kv("species", "proton".into()),
            SpeciesChoice::Custom { gamma, g, spin } => {
                kv("species", "custom".into());
                kv("gamma", format!("{gamma:e} rad/s/T"));
                kv("g", format!("{g:e}"));
                kv("spin", format!("{spin:e}"));
            }
        }
        kv("d", format!("{:e} m", self.d));
        kv("B0", format!("{:e} T", self.b0));
        kv("bias_axis", self.bias_axis.name().into());
        kv(
            "temperature",
            self.temperature.map_or("pure".into(), |t| format!("{t:e} K")),
        );
        kv("N_S", self.n_spins.to_string());
        if let Some(p) = self.polarization {
            kv("polarization", format!("{p:e}"));
        }
        if self.pulses.is_empty() {
            kv("pulse", "none".into());
        }
        for p in &self.pulses {
            let sign = if p.negative { "-" } else { "" };
            kv("pulse", format!("{sign}{}, {:e} rad", p.axis.name(), p.angle));
        }
        kv("t0_phase", format!("{} rad", join(&self.t0_phase)));
        kv("phi", format!("{} rad", join(&self.phi)));
        kv("N_e", self.n_electrons.to_string());
        kv("seed", self.seed.to_string());
        kv("beam_energy", format!("{:e} eV", self.beam_energy));
        if let Some(t) = self.t_life {
            kv("t_life", format!("{t:e} s"));
        }
        kv("lock_phase", format!("{:e} rad", self.lock_phase));
        kv("arrivals", self.arrivals.to_string());
        out
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn spin_species(&self) -> Result<SpinSpecies> {
        self.species.species()
    }

    pub fn bias_field(&self) -> Result<BiasField> {
        BiasField::new(&self.spin_species()?, self.b0, self.bias_axis.vector())
    }

    pub fn pulse_axes(&self) -> Result<Vec<(Vector3<f64>, f64)>> {
        self.pulses
            .iter()
            .map(|p| Ok((unit_axis(p.axis_vector())?, p.angle)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const SAMPLE: &str = "
# thermal column
species = electron
d = 1 nm
B0 = 1.8 T
bias_axis = z        # precession protocol
temperature = 10 K
N_S = 1000
pulse = -x, 90 deg
t0_phase = linspace(0, 2, 5) pi
phi = 0, 0.5, 1, 1.5 pi
N_e = 1e5
seed = 7
beam_energy = 200 keV
t_life = 1 us
";

    #[test]
    fn parses_sample() {
        let cfg = ScenarioConfig::parse(SAMPLE).unwrap();
        assert_relative_eq!(cfg.d, 1e-9);
        assert_eq!(cfg.bias_axis, Axis::Z);
        assert_eq!(cfg.temperature, Some(10.0));
        assert_eq!(cfg.n_spins, 1000);
        assert_eq!(cfg.pulses.len(), 1);
        assert!(cfg.pulses[0].negative);
        assert_relative_eq!(cfg.pulses[0].angle, FRAC_PI_2);
        assert_eq!(cfg.t0_phase.len(), 5);
        assert_relative_eq!(cfg.t0_phase[4], 2.0 * PI);
        assert_relative_eq!(cfg.phi[3], 1.5 * PI);
        assert_eq!(cfg.n_electrons, 100_000);
        assert_relative_eq!(cfg.beam_energy, 2e5);
        assert_relative_eq!(cfg.t_life.unwrap(), 1e-6);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let cfg = ScenarioConfig::parse(SAMPLE).unwrap();
        let text = cfg.to_canonical();
        let again = ScenarioConfig::parse(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(text, again.to_canonical());
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match ScenarioConfig::parse("species = electron\nd = 0.1\n") {
            Err(Error::Config { line: Some(2), .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(ScenarioConfig::parse("colour = red").is_err());
        assert!(ScenarioConfig::parse("d = -1 nm").is_err());
        assert!(ScenarioConfig::parse("d = 1 nm\nd = 2 nm").is_err());
        assert!(ScenarioConfig::parse("temperature = 0 K").is_err());
        assert!(ScenarioConfig::parse("phi = linspace(0, 1, 0) pi").is_err());
        assert!(ScenarioConfig::parse("gamma = 1 rad/s/T").is_err());
        assert!(ScenarioConfig::parse("species = custom\ngamma = 1 rad/s/T").is_err());
        assert!(ScenarioConfig::parse("pulse = w, 1 rad").is_err());
    }

    #[test]
    fn custom_species() {
        let cfg = ScenarioConfig::parse("species = custom\ngamma = 10 MHz/T\ng = 1.2\nspin = 1.5").unwrap();
        let s = cfg.spin_species().unwrap();
        assert_relative_eq!(s.gamma, 2.0 * PI * 1e7);
        assert_relative_eq!(s.spin, 1.5);
    }

    proptest! {
        #[test]
        fn arbitrary_round_trip(
            d in 1e-12f64..1e-6, b0 in 0.0f64..20.0, t in proptest::option::of(1e-3f64..1e3),
            ns in 1u64..100_000, phis in proptest::collection::vec(-10.0f64..10.0, 1..20),
            seed in any::<u64>(), pol in proptest::option::of(0.0f64..=1.0),
        ) {
            let cfg = ScenarioConfig { d, b0, temperature: t, n_spins: ns, phi: phis, seed, polarization: pol, ..Default::default() };
            let back = ScenarioConfig::parse(&cfg.to_canonical()).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.to_canonical(), cfg.to_canonical());
        }
    }
}
