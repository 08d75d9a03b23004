use crate::{Error, Result};
use nalgebra::{Matrix2, Vector2};
use serde::Serialize;
use std::f64::consts::{PI, TAU};

/// Port counts at one external phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringePoint {
    pub phi: f64,
    pub n_plus: u64,
    pub n_minus: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit {
    pub delta_phi: f64,
    pub visibility: f64,
    pub sigma_delta_phi: f64,
    pub sigma_visibility: f64,
    /// Covariance of the linear coefficients `(a, b)`.
    pub covariance_ab: [[f64; 2]; 2],
    /// False when the visibility is below three standard errors.
    pub phase_identifiable: bool,
}

fn check_grid(phis: &[f64]) -> Result<()> {
    let mut wrapped: Vec<f64> = phis.iter().map(|p| p.rem_euclid(TAU)).collect();
    wrapped.sort_by(f64::total_cmp);
    wrapped.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if wrapped.len() < 3 {
        return Err(Error::domain(format!(
            "fringe fit needs at least 3 distinct phases, got {}",
            wrapped.len()
        )));
    }
    let max_gap = wrapped
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrapped[0] + TAU - wrapped[wrapped.len() - 1], f64::max);
    if max_gap >= PI {
        return Err(Error::domain("phase grid must span more than π"));
    }
    Ok(())
}

/// Weighted least squares of `p̂ − ½ = a cosφ + b sinφ` with weights `N_i`
/// and binomial errors; `(φ, p̂, N)` triples.
pub fn fit_fringe_weighted(points: &[(f64, f64, f64)]) -> Result<FringeFit> {
    let phis: Vec<f64> = points.iter().map(|p| p.0).collect();
    check_grid(&phis)?;
    let mut normal = Matrix2::zeros();
    let mut rhs = Vector2::zeros();
    for &(phi, p, w) in points {
        if !(w > 0.0) {
            return Err(Error::domain("fringe point weight must be > 0"));
        }
        let x = Vector2::new(phi.cos(), phi.sin());
        normal += x * x.transpose() * w;
        rhs += x * (w * (p - 0.5));
    }
    let scale = normal.trace().powi(2);
    if normal.determinant().abs() <= 1e-12 * scale {
        return Err(Error::domain("rank-deficient phase grid"));
    }
    let inv = normal
        .try_inverse()
        .ok_or_else(|| Error::domain("rank-deficient phase grid"))?;
    let coef = inv * rhs;
    let (a, b) = (coef[0], coef[1]);

    let mut meat = Matrix2::zeros();
    for &(phi, _, w) in points {
        let x = Vector2::new(phi.cos(), phi.sin());
        let model = (0.5 + x.dot(&coef)).clamp(0.0, 1.0);
        let var = (model * (1.0 - model)).max(0.25 / w);
        meat += x * x.transpose() * (w * var);
    }
    let cov = inv * meat * inv;

    let r2 = a * a + b * b;
    let r = r2.sqrt();
    let visibility = 2.0 * r;
    let delta_phi = b.atan2(a);
    let (sigma_delta_phi, sigma_visibility) = if r > 0.0 {
        let jd = Vector2::new(-b / r2, a / r2);
        let jv = Vector2::new(2.0 * a / r, 2.0 * b / r);
        (
            (jd.transpose() * cov * jd)[0].sqrt(),
            (jv.transpose() * cov * jv)[0].sqrt(),
        )
    } else {
        (f64::INFINITY, 2.0 * cov.trace().sqrt())
    };
    Ok(FringeFit {
        delta_phi,
        visibility,
        sigma_delta_phi,
        sigma_visibility,
        covariance_ab: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        phase_identifiable: visibility >= 3.0 * sigma_visibility,
    })
}

/// Fits `p₊(φ) = ½[1 + 𝒱 cos(φ − Δφ_S)]` to a phase scan of port counts.
pub fn fit_fringe(scan: &[FringePoint]) -> Result<FringeFit> {
    let points: Vec<(f64, f64, f64)> = scan
        .iter()
        .map(|p| {
            let n = (p.n_plus + p.n_minus) as f64;
            (p.phi, p.n_plus as f64 / n, n)
        })
        .collect();
    fit_fringe_weighted(&points)
}
