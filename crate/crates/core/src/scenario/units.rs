//! Quantities with mandatory unit suffixes, e.g. `0.1 nm`, `1.8 T`, `0.5 pi`.

use crate::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Field,
    Temperature,
    Angle,
    Energy,
    Time,
    Gyromagnetic,
    Fraction,
}

impl Dimension {
    /// Factor converting `unit` to SI (rad for angles, eV for energies,
    /// rad/s/T for gyromagnetic ratios).
    fn factor(self, unit: &str) -> Option<f64> {
        use Dimension::*;
        let f = match (self, unit) {
            (Length, "m") => 1.0,
            (Length, "mm") => 1e-3,
            (Length, "um" | "µm" | "μm") => 1e-6,
            (Length, "nm") => 1e-9,
            (Length, "pm") => 1e-12,
            (Length, "A" | "Å" | "angstrom") => 1e-10,
            (Field, "T") => 1.0,
            (Field, "mT") => 1e-3,
            (Field, "uT" | "µT" | "μT") => 1e-6,
            (Field, "G") => 1e-4,
            (Temperature, "K") => 1.0,
            (Temperature, "mK") => 1e-3,
            (Angle, "rad") => 1.0,
            (Angle, "mrad") => 1e-3,
            (Angle, "urad" | "µrad" | "μrad") => 1e-6,
            (Angle, "deg") => PI / 180.0,
            (Angle, "pi") => PI,
            (Energy, "eV") => 1.0,
            (Energy, "keV") => 1e3,
            (Energy, "MeV") => 1e6,
            (Time, "s") => 1.0,
            (Time, "ms") => 1e-3,
            (Time, "us" | "µs" | "μs") => 1e-6,
            (Time, "ns") => 1e-9,
            (Time, "ps") => 1e-12,
            (Gyromagnetic, "rad/s/T") => 1.0,
            (Gyromagnetic, "Hz/T") => 2.0 * PI,
            (Gyromagnetic, "MHz/T") => 2.0 * PI * 1e6,
            (Gyromagnetic, "GHz/T") => 2.0 * PI * 1e9,
            (Fraction, "") => 1.0,
            (Fraction, "%") => 1e-2,
            _ => return None,
        };
        Some(f)
    }

    pub fn si_unit(self) -> &'static str {
        use Dimension::*;
        match self {
            Length => "m",
            Field => "T",
            Temperature => "K",
            Angle => "rad",
            Energy => "eV",
            Time => "s",
            Gyromagnetic => "rad/s/T",
            Fraction => "",
        }
    }
}

/// Splits `text` into its longest leading floating-point literal and the
/// trimmed remainder.
pub fn split_number(text: &str) -> Result<(f64, &str)> {
    let text = text.trim();
    let best = text
        .char_indices()
        .rev()
        .map(|(i, c)| i + c.len_utf8())
        .find_map(|end| text[..end].parse::<f64>().ok().map(|v| (v, end)));
    match best {
        Some((v, end)) if v.is_finite() => Ok((v, text[end..].trim())),
        Some(_) => Err(Error::config(format!("non-finite number in '{text}'"))),
        None => Err(Error::config(format!("expected a number in '{text}'"))),
    }
}

/// Parses `value unit` into SI.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let (v, unit) = split_number(text)?;
    convert(v, unit, dim).ok_or_else(|| unit_error(text, unit, dim))
}

pub(crate) fn convert(v: f64, unit: &str, dim: Dimension) -> Option<f64> {
    dim.factor(unit).map(|f| v * f)
}

pub(crate) fn unit_error(text: &str, unit: &str, dim: Dimension) -> Error {
    if unit.is_empty() {
        Error::config(format!("'{text}' is missing a unit (e.g. {})", dim.si_unit()))
    } else {
        Error::config(format!("unknown unit '{unit}' in '{text}' for a {dim:?} quantity"))
    }
}
