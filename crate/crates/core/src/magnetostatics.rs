//! Classical picture of the electron–dipole interaction.
//!
//! The electron travels along `e_z`; the two interferometer arms pass the
//! dipole at `±d⃗` with `d⃗ = (d_x, d_y)` in the transverse plane. The
//! two-arm phase is `Δφ_S = 2(e/ħ)∫A_z(d⃗ + z e_z) dz`, which for a moment
//! along `e_x` and `d_x = 0` evaluates to `eμ₀μ/(πħd)`.

use crate::constants::{BeamKinematics, SpinSpecies, ELEMENTARY_CHARGE, HBAR, MU_0};
use crate::quadrature::{integrate_real_line, Tolerance};
use crate::{Error, Result};
use nalgebra::{Vector2, Vector3};
use serde::Serialize;
use std::f64::consts::PI;

const UNIT_TOL: f64 = 1e-12;

/// Point magnetic dipole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleSource {
    /// Moment magnitude (J/T).
    pub mu: f64,
    orientation: Vector3<f64>,
    pub position: Vector3<f64>,
}

impl DipoleSource {
    pub fn new(mu: f64, orientation: Vector3<f64>) -> Result<Self> {
        Self::at(mu, orientation, Vector3::zeros())
    }

    pub fn at(mu: f64, orientation: Vector3<f64>, position: Vector3<f64>) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::domain(format!("dipole moment must be non-negative, got {mu}")));
        }
        if ((orientation.norm() - 1.0).abs()) > UNIT_TOL {
            return Err(Error::domain(format!(
                "dipole orientation must be a unit vector, |n| = {}",
                orientation.norm()
            )));
        }
        Ok(DipoleSource {
            mu,
            orientation,
            position,
        })
    }

    pub fn orientation(&self) -> Vector3<f64> {
        self.orientation
    }

    fn moment(&self) -> Vector3<f64> {
        self.orientation * self.mu
    }
}

/// Straight-line passage of one arm: transverse offset from the dipole,
/// beam kinematics and time of closest approach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    pub d_vec: Vector2<f64>,
    pub kinematics: BeamKinematics,
    pub t0: f64,
}

impl BeamGeometry {
    pub fn new(d_vec: Vector2<f64>, kinematics: BeamKinematics, t0: f64) -> Result<Self> {
        let d = d_vec.norm();
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::domain("beam offset |d| must be positive"));
        }
        Ok(BeamGeometry { d_vec, kinematics, t0 })
    }

    pub fn distance(&self) -> f64 {
        self.d_vec.norm()
    }

    fn with_offset(&self, d_vec: Vector2<f64>) -> Self {
        BeamGeometry { d_vec, ..*self }
    }
}

/// Dipole vector potential `A = (μ₀/4π) m × r / r³` (T·m).
pub fn vector_potential(r: Vector3<f64>, source: &DipoleSource) -> Result<Vector3<f64>> {
    let rel = r - source.position;
    let r2 = rel.norm_squared();
    if r2 == 0.0 {
        return Err(Error::domain("vector potential evaluated at the dipole position"));
    }
    let r3 = r2 * r2.sqrt();
    Ok(source.moment().cross(&rel) * (MU_0 / (4.0 * PI * r3)))
}

/// Dipole field `B = (μ₀/4π)(3r̂(m·r̂) − m)/r³` (T).
pub fn dipole_field(r: Vector3<f64>, source: &DipoleSource) -> Result<Vector3<f64>> {
    let rel = r - source.position;
    let r2 = rel.norm_squared();
    if r2 == 0.0 {
        return Err(Error::domain("dipole field evaluated at the dipole position"));
    }
    let m = source.moment();
    let r3 = r2 * r2.sqrt();
    Ok((rel * (3.0 * m.dot(&rel) / r2) - m) * (MU_0 / (4.0 * PI * r3)))
}

/// Closed-form two-arm phase `eμ₀μ/(πħd)` for a moment normal to the arm plane.
///
/// This equals `2θ` with `θ` the quantum coupling strength.
pub fn ab_phase_analytic(d: f64, mu: f64) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::domain(format!("distance must be positive, got {d}")));
    }
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::domain(format!("moment must be non-negative, got {mu}")));
    }
    Ok(ELEMENTARY_CHARGE * MU_0 * mu / (PI * HBAR * d))
}

fn line_point(source: &DipoleSource, d_vec: Vector2<f64>, z: f64) -> Vector3<f64> {
    source.position + Vector3::new(d_vec.x, d_vec.y, z)
}

/// Two-arm phase `2(e/ħ)∫A_z(d⃗ + z e_z) dz` evaluated by adaptive quadrature.
pub fn ab_phase_quadrature(geometry: &BeamGeometry, source: &DipoleSource) -> Result<f64> {
    let d = geometry.distance();
    let d_vec = geometry.d_vec;
    // |A_z| ≤ μ₀μ/(4π r²); its line integral is bounded by μ₀μ/(4d)
    let scale = 2.0 * ELEMENTARY_CHARGE / HBAR * MU_0 * source.mu / (4.0 * d);
    let tol = Tolerance::default().with_abs(1e-15 * scale / (2.0 * ELEMENTARY_CHARGE / HBAR));
    let est = integrate_real_line(
        |z| {
            vector_potential(line_point(source, d_vec, z), source)
                .map(|a| a.z)
                .unwrap_or(0.0)
        },
        d,
        tol,
    )?;
    Ok(2.0 * ELEMENTARY_CHARGE / HBAR * est.value)
}

/// Interferometer arm, in the ket labels of the path qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    L,
    R,
}

/// Magnetic field of the passing electron at the sample, `±B(t) e_x`
/// (+ for arm L, − for arm R).
pub fn field_at_sample(t: f64, geometry: &BeamGeometry, side: Side) -> Vector3<f64> {
    let d = geometry.distance();
    let v = geometry.kinematics.v;
    let g = geometry.kinematics.gamma_l;
    let dt = t - geometry.t0;
    let denom = (d * d + g * g * v * v * dt * dt).powf(1.5);
    let b = MU_0 * ELEMENTARY_CHARGE * g * v * d / (4.0 * PI * denom);
    let sign = match side {
        Side::L => 1.0,
        Side::R => -1.0,
    };
    Vector3::new(sign * b, 0.0, 0.0)
}

/// Time integral of [`field_at_sample`] over the whole passage (T·s).
pub fn field_time_integral(geometry: &BeamGeometry, side: Side) -> Result<Vector3<f64>> {
    let tau = geometry.distance() / (geometry.kinematics.gamma_l * geometry.kinematics.v);
    let t0 = geometry.t0;
    let est = integrate_real_line(|s| field_at_sample(t0 + s, geometry, side).x, tau, Tolerance::default())?;
    Ok(Vector3::new(est.value, 0.0, 0.0))
}

/// Deflection angle `ħΔφ/(2mγ_L v d)` for a phase falling off as `1/d`.
pub fn deflection_analytic(d: f64, delta_phi: f64, kin: &BeamKinematics) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::domain(format!("distance must be positive, got {d}")));
    }
    Ok(HBAR * delta_phi / (2.0 * kin.momentum() * d))
}

/// Transverse momentum kick (kg·m/s) from the Lorentz force `−e v × B`
/// integrated along the undeflected straight trajectory.
pub fn deflection_quadrature(geometry: &BeamGeometry, source: &DipoleSource) -> Result<Vector2<f64>> {
    let d = geometry.distance();
    let d_vec = geometry.d_vec;
    let b_scale = MU_0 * source.mu / (4.0 * PI * d * d);
    let tol = Tolerance::default().with_abs(1e-15 * b_scale);
    let field = |z: f64| dipole_field(line_point(source, d_vec, z), source).unwrap_or_else(|_| Vector3::zeros());
    // F dt = −e v e_z × B dz/v = −e (−B_y, B_x, 0) dz
    let bx = integrate_real_line(|z| field(z).x, d, tol)?.value;
    let by = integrate_real_line(|z| field(z).y, d, tol)?.value;
    Ok(Vector2::new(ELEMENTARY_CHARGE * by, -ELEMENTARY_CHARGE * bx))
}

/// Central-difference gradient of [`ab_phase_quadrature`] with respect to
/// the beam offset, with step `rel_step · |d|`.
pub fn phase_gradient(geometry: &BeamGeometry, source: &DipoleSource, rel_step: f64) -> Result<Vector2<f64>> {
    let h = rel_step * geometry.distance();
    let mut grad = Vector2::zeros();
    for k in 0..2 {
        let mut step = Vector2::zeros();
        step[k] = h;
        let plus = ab_phase_quadrature(&geometry.with_offset(geometry.d_vec + step), source)?;
        let minus = ab_phase_quadrature(&geometry.with_offset(geometry.d_vec - step), source)?;
        grad[k] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// Margin ratio below which a "≪" condition counts as satisfied.
pub const MUCH_LESS_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    /// Largest transverse wave-packet width (m) for which the deflection
    /// leaves the packet overlap intact.
    pub delta_y_max: f64,
    /// `(ħω₀/v)/(ħ/2Δz)`; the kick condition holds when this is ≤ 0.1.
    pub momentum_kick_ratio: f64,
    pub momentum_kick_ok: bool,
    /// `d/(8Δr⊥)`; the spin-flip condition holds when this is ≥ 1.
    pub spin_flip_ratio: f64,
    pub spin_flip_ok: bool,
}

/// Wave-packet conditions under which the semiclassical passage model holds.
pub fn validity_limits(
    d: f64,
    species: &SpinSpecies,
    omega0: f64,
    kin: &BeamKinematics,
    dz: f64,
    dr_perp: f64,
) -> Result<ValidityReport> {
    for (name, value) in [("d", d), ("dz", dz), ("dr_perp", dr_perp)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::domain(format!("{name} must be positive, got {value}")));
        }
    }
    if !(omega0.is_finite() && omega0 >= 0.0) {
        return Err(Error::domain(format!("omega0 must be non-negative, got {omega0}")));
    }
    let delta_y_max = 2.0 * PI * d * d / (MU_0 * ELEMENTARY_CHARGE * species.gamma);
    let momentum_kick_ratio = 2.0 * omega0 * dz / kin.v;
    let spin_flip_ratio = d / (8.0 * dr_perp);
    Ok(ValidityReport {
        delta_y_max,
        momentum_kick_ratio,
        momentum_kick_ok: momentum_kick_ratio <= MUCH_LESS_FACTOR,
        spin_flip_ratio,
        spin_flip_ok: d >= 8.0 * dr_perp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{beam_kinematics, electron_species, ELECTRON_MASS};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ex() -> Vector3<f64> {
        Vector3::x()
    }

    fn geometry(d_vec: Vector2<f64>) -> BeamGeometry {
        BeamGeometry::new(d_vec, beam_kinematics(200e3).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn vector_potential_geometry() {
        let mu = electron_species().mu;
        let src = DipoleSource::new(mu, ex()).unwrap();
        let d = 1e-9;
        let a = vector_potential(Vector3::new(0.0, d, 0.0), &src).unwrap();
        assert_eq!(a.x, 0.0);
        assert_eq!(a.y, 0.0);
        assert_relative_eq!(a.z, MU_0 * mu / (4.0 * PI * d * d), max_relative = 1e-14);
    }

    #[test]
    fn vector_potential_power_law() {
        let src = DipoleSource::new(1e-23, Vector3::new(0.6, 0.0, 0.8)).unwrap();
        let r = Vector3::new(0.3e-9, -1.1e-9, 0.7e-9);
        let a1 = vector_potential(r, &src).unwrap().norm();
        let a2 = vector_potential(2.0 * r, &src).unwrap().norm();
        assert_relative_eq!(a2 / a1, 0.25, max_relative = 1e-14);
    }

    #[test]
    fn vector_potential_singular_at_source() {
        let src = DipoleSource::new(1e-23, ex()).unwrap();
        assert!(matches!(
            vector_potential(Vector3::zeros(), &src),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn field_is_curl_of_potential() {
        let src = DipoleSource::new(1e-23, Vector3::new(0.48, 0.6, 0.64)).unwrap();
        let r = Vector3::new(0.4e-9, 0.9e-9, -0.3e-9);
        let h = 1e-14;
        let a = |p: Vector3<f64>| vector_potential(p, &src).unwrap();
        let d = |i: usize, c: usize| {
            let mut e = Vector3::zeros();
            e[i] = h;
            (a(r + e)[c] - a(r - e)[c]) / (2.0 * h)
        };
        let curl = Vector3::new(d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0));
        let b = dipole_field(r, &src).unwrap();
        assert!((curl - b).norm() < 1e-6 * b.norm());
    }

    #[test]
    fn analytic_phase_single_electron_spin() {
        let mu = electron_species().mu;
        let p01 = ab_phase_analytic(0.1e-9, mu).unwrap();
        assert_relative_eq!(p01, 5.64e-5, max_relative = 1e-3);
        // toggled differential ≈ 0.11 mrad and ≈ 1.1e-2 mrad
        assert!((2.0 * p01 * 1e3 - 0.11).abs() < 0.005);
        let p1 = ab_phase_analytic(1e-9, mu).unwrap();
        assert!((2.0 * p1 * 1e3 - 1.1e-2).abs() < 0.05e-2);
        assert_eq!(ab_phase_analytic(1e-9, 0.0).unwrap(), 0.0);
        assert!(ab_phase_analytic(0.0, mu).is_err());
    }

    #[test]
    fn analytic_phase_inverse_distance() {
        let mu = electron_species().mu;
        for d in [0.05e-9, 0.1e-9, 0.37e-9, 2e-9] {
            assert_eq!(
                ab_phase_analytic(2.0 * d, mu).unwrap(),
                ab_phase_analytic(d, mu).unwrap() / 2.0
            );
        }
    }

    #[test]
    fn quadrature_matches_analytic() {
        let mu = electron_species().mu;
        let d = 0.1e-9;
        let src = DipoleSource::new(mu, ex()).unwrap();
        let q = ab_phase_quadrature(&geometry(Vector2::new(0.0, d)), &src).unwrap();
        assert_relative_eq!(q, ab_phase_analytic(d, mu).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn quadrature_in_beam_orientation_vanishes() {
        let mu = electron_species().mu;
        let d = 0.5e-9;
        let src = DipoleSource::new(mu, Vector3::z()).unwrap();
        let q = ab_phase_quadrature(&geometry(Vector2::new(0.3e-9, 0.4e-9)), &src).unwrap();
        let scale = ab_phase_analytic(d, mu).unwrap();
        assert!(q.abs() <= 1e-15 * scale);
    }

    #[test]
    fn quadrature_is_odd_in_orientation() {
        let mu = electron_species().mu;
        let n = Vector3::new(0.36, 0.48, 0.8);
        let g = geometry(Vector2::new(0.2e-9, 0.7e-9));
        let plus = ab_phase_quadrature(&g, &DipoleSource::new(mu, n).unwrap()).unwrap();
        let minus = ab_phase_quadrature(&g, &DipoleSource::new(mu, -n).unwrap()).unwrap();
        assert_relative_eq!(plus, -minus, max_relative = 1e-12);
    }

    #[test]
    fn field_integral_gives_coupling() {
        let species = electron_species();
        let d = 0.1e-9;
        let g = geometry(Vector2::new(0.0, d));
        let integral = field_time_integral(&g, Side::L).unwrap().x;
        assert_relative_eq!(integral, MU_0 * ELEMENTARY_CHARGE / (2.0 * PI * d), max_relative = 1e-9);
        let phase = 2.0 * species.mu / HBAR * integral;
        assert_relative_eq!(phase, ab_phase_analytic(d, species.mu).unwrap(), max_relative = 1e-9);
        let right = field_time_integral(&g, Side::R).unwrap().x;
        assert_relative_eq!(right, -integral, max_relative = 1e-12);
    }

    #[test]
    fn field_symmetry_and_peak() {
        let d = 0.3e-9;
        let g = BeamGeometry::new(Vector2::new(0.0, d), beam_kinematics(200e3).unwrap(), 1e-15).unwrap();
        let kin = g.kinematics;
        for s in [1e-19, 3e-18, 2e-17] {
            let a = field_at_sample(1e-15 + s, &g, Side::L).x;
            let b = field_at_sample(1e-15 - s, &g, Side::L).x;
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
        let peak = field_at_sample(1e-15, &g, Side::L).x;
        assert_relative_eq!(
            peak,
            MU_0 * ELEMENTARY_CHARGE * kin.gamma_l * kin.v / (4.0 * PI * d * d),
            max_relative = 1e-14
        );
    }

    #[test]
    fn deflection_angles() {
        let mu = electron_species().mu;
        let kin = beam_kinematics(200e3).unwrap();
        let a01 = deflection_analytic(0.1e-9, ab_phase_analytic(0.1e-9, mu).unwrap(), &kin).unwrap();
        assert!((a01 * 1e9 - 110.0).abs() < 0.05 * 110.0, "alpha = {a01:e}");
        let a1 = deflection_analytic(1e-9, ab_phase_analytic(1e-9, mu).unwrap(), &kin).unwrap();
        assert!((a1 * 1e9 - 1.1).abs() < 0.05 * 1.1, "alpha = {a1:e}");
        assert_eq!(deflection_analytic(1e-9, 0.0, &kin).unwrap(), 0.0);
    }

    #[test]
    fn deflection_matches_phase_gradient() {
        let mu = electron_species().mu;
        let d = 0.1e-9;
        let g = geometry(Vector2::new(0.0, d));
        let src = DipoleSource::new(mu, ex()).unwrap();
        let dp = deflection_quadrature(&g, &src).unwrap();
        let dphi = ab_phase_analytic(d, mu).unwrap();
        assert_relative_eq!(dp.norm(), HBAR * dphi / (2.0 * d), max_relative = 1e-5);
        let grad = phase_gradient(&g, &src, 1e-4).unwrap();
        assert_relative_eq!(dp.y, -HBAR / 2.0 * grad.y, max_relative = 1e-5);
        assert!(dp.x.abs() < 1e-9 * dp.norm());
        let alpha = dp.norm() / g.kinematics.momentum();
        let analytic = deflection_analytic(d, dphi, &g.kinematics).unwrap();
        assert_relative_eq!(alpha, analytic, max_relative = 1e-5);
        assert_relative_eq!(
            g.kinematics.momentum(),
            ELECTRON_MASS * g.kinematics.gamma_l * g.kinematics.v,
            max_relative = 1e-15
        );
    }

    #[test]
    fn deflection_vanishes_without_moment() {
        let g = geometry(Vector2::new(0.1e-9, 0.2e-9));
        let src = DipoleSource::new(0.0, ex()).unwrap();
        assert_eq!(deflection_quadrature(&g, &src).unwrap(), Vector2::zeros());
    }

    #[test]
    fn validity_report() {
        let e = electron_species();
        let kin = beam_kinematics(200e3).unwrap();
        let r = validity_limits(1e-9, &e, 0.0, &kin, 1e-9, 0.1e-9).unwrap();
        // 2πd²/(μ₀eγ) at d = 1 nm: 177 µm, about 200 µm
        assert_relative_eq!(r.delta_y_max, 1.7723e-4, max_relative = 1e-3);
        assert!((r.delta_y_max - 200e-6).abs() < 0.15 * 200e-6);
        assert_eq!(r.momentum_kick_ratio, 0.0);
        assert!(r.momentum_kick_ok);

        let dr = 0.125e-9;
        let at = validity_limits(8.0 * dr, &e, 1e10, &kin, 1e-9, dr).unwrap();
        assert!(at.spin_flip_ok);
        assert_eq!(at.spin_flip_ratio, 1.0);
        let below = validity_limits(7.9 * dr, &e, 1e10, &kin, 1e-9, dr).unwrap();
        assert!(!below.spin_flip_ok);

        let fast = validity_limits(1e-9, &e, 1e17, &kin, 1e-9, 0.1e-9).unwrap();
        assert!(!fast.momentum_kick_ok);
        assert!(validity_limits(1e-9, &e, 1.0, &kin, 0.0, 0.1e-9).is_err());
    }

    proptest! {
        #[test]
        fn vector_potential_antisymmetric(x in -5e-9f64..5e-9, y in -5e-9f64..5e-9, z in -5e-9f64..5e-9,
                                          a in 0.0f64..PI, b in 0.0f64..(2.0 * PI)) {
            prop_assume!(x.abs() + y.abs() + z.abs() > 1e-11);
            let n = Vector3::new(a.sin() * b.cos(), a.sin() * b.sin(), a.cos());
            let src = DipoleSource::new(1e-23, n).unwrap();
            let r = Vector3::new(x, y, z);
            let plus = vector_potential(r, &src).unwrap();
            let minus = vector_potential(-r, &src).unwrap();
            prop_assert!((plus + minus).norm() <= 1e-14 * plus.norm());
        }

        #[test]
        fn quadrature_projects_onto_normal(d in 0.05e-9f64..10e-9, a in 0.0f64..PI, b in 0.0f64..(2.0 * PI)) {
            let mu = electron_species().mu;
            let n = Vector3::new(a.sin() * b.cos(), a.sin() * b.sin(), a.cos());
            let src = DipoleSource::new(mu, n).unwrap();
            let q = ab_phase_quadrature(&geometry(Vector2::new(0.0, d)), &src).unwrap();
            let analytic = ab_phase_analytic(d, mu).unwrap();
            prop_assert!((q - n.x * analytic).abs() <= 1e-6 * analytic);
        }

        #[test]
        fn force_equals_phase_gradient(dx in -3e-9f64..3e-9, dy in 0.05e-9f64..3e-9,
                                       a in 0.2f64..(PI - 0.2), b in 0.0f64..(2.0 * PI)) {
            let mu = electron_species().mu;
            let n = Vector3::new(a.sin() * b.cos(), a.sin() * b.sin(), a.cos());
            let src = DipoleSource::new(mu, n).unwrap();
            let g = geometry(Vector2::new(dx, dy));
            let dp = deflection_quadrature(&g, &src).unwrap();
            let grad = phase_gradient(&g, &src, 1e-4).unwrap();
            let expect = -HBAR / 2.0 * grad;
            let scale = expect.norm();
            for k in 0..2 {
                prop_assert!((dp[k] - expect[k]).abs() <= 1e-5 * scale, "component {k}: {} vs {}", dp[k], expect[k]);
            }
        }
    }
}
