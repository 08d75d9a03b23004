use crate::{Error, Result};

/// `∂_θp₊ = −cosφ sin2θ + sx sinφ cos2θ`.
pub fn p_plus_derivative(theta: f64, phi: f64, sx: f64) -> f64 {
    let (s2, c2) = (2.0 * theta).sin_cos();
    let (sp, cp) = phi.sin_cos();
    -cp * s2 + sx * sp * c2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherInfo {
    pub value: f64,
    /// `p₊ ∈ {0, 1}`; `value` is then the limit along `θ`.
    pub at_endpoint: bool,
}

/// Per-electron Fisher information `(∂_θp₊)²/(p₊(1 − p₊))`.
///
/// Evaluated as `4g²/(g² + (1 − sx²)sin²φ)` with `g = ∂_θp₊`, which equals
/// the textbook ratio because `4p₊(1 − p₊) = g² + (1 − sx²)sin²φ`. Where
/// both terms vanish the limit is 4.
pub fn fisher_information(theta: f64, phi: f64, sx: f64) -> Result<FisherInfo> {
    if !(sx.abs() <= 1.0 + 1e-12) {
        return Err(Error::domain(format!("|⟨σ_x⟩| must be ≤ 1, got {sx}")));
    }
    let sx = sx.clamp(-1.0, 1.0);
    let g = p_plus_derivative(theta, phi, sx);
    let den = g * g + (1.0 - sx * sx) * phi.sin().powi(2);
    if den == 0.0 {
        return Ok(FisherInfo {
            value: 4.0,
            at_endpoint: true,
        });
    }
    Ok(FisherInfo {
        value: 4.0 * g * g / den,
        at_endpoint: false,
    })
}

/// `Var[θ] ≥ [1 − c²]/(4N_e g²)` with `c = cosφ cos2θ + sx sinφ sin2θ` and
/// `g = ∂_θp₊`.
pub fn crb(theta: f64, phi: f64, sx: f64, n_electrons: u64) -> Result<f64> {
    if n_electrons == 0 {
        return Err(Error::domain("electron count must be ≥ 1"));
    }
    let ne = n_electrons as f64;
    let fi = fisher_information(theta, phi, sx)?;
    if fi.at_endpoint {
        return Ok(1.0 / (ne * fi.value));
    }
    if fi.value <= 1e-24 {
        return Err(Error::NonIdentifiable(format!(
            "∂θp₊ vanishes at θ = {theta}, φ = {phi}, ⟨σ_x⟩ = {sx}"
        )));
    }
    let g = p_plus_derivative(theta, phi, sx);
    let sx = sx.clamp(-1.0, 1.0);
    let one_minus_c2 = g * g + (1.0 - sx * sx) * phi.sin().powi(2);
    Ok(one_minus_c2 / (4.0 * ne * g * g))
}

/// Electrons needed to resolve `delta_phi` at the given signal-to-noise
/// ratio under projection noise `σ_φ = 1/√N_e` (unit visibility).
pub fn electrons_for_phase(delta_phi: f64, snr: f64) -> Result<f64> {
    if !(delta_phi > 0.0 && delta_phi.is_finite()) {
        return Err(Error::domain(format!("phase must be > 0, got {delta_phi}")));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::domain(format!("snr must be > 0, got {snr}")));
    }
    Ok((snr / delta_phi).powi(2))
}
