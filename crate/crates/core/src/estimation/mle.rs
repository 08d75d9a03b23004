use super::fisher::crb;
use super::sampling::{sample_shots_stream, ShotRecord};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaEstimate {
    pub theta_hat: f64,
    /// The observed ratio was outside the achievable `p₊` range.
    pub clamped: bool,
}

/// Closed-form inversion of the fringe at known `φ` and `⟨σ_x⟩`.
///
/// `2p₊ − 1 = R cos(2θ − δ)` with `R = √(cos²φ + sx² sin²φ)` and
/// `δ = atan2(sx sinφ, cosφ)`. Of the two solutions the one on the branch
/// through `θ = 0` is returned.
pub fn estimate_theta_mle(record: &ShotRecord, phi: f64, sx: f64) -> Result<ThetaEstimate> {
    let n = record.n_electrons();
    if n == 0 {
        return Err(Error::domain("empty shot record"));
    }
    let (sp, cp) = phi.sin_cos();
    let r = cp.hypot(sx * sp);
    if r < 1e-12 {
        return Err(Error::NonIdentifiable(format!(
            "p₊ does not depend on θ at φ = {phi}, ⟨σ_x⟩ = {sx}"
        )));
    }
    let delta = (sx * sp).atan2(cp);
    let x = (2.0 * record.p_hat() - 1.0) / r;
    let clamped = !(-1.0..=1.0).contains(&x);
    let acos = x.clamp(-1.0, 1.0).acos();
    let two_theta = if delta > 0.0 { delta - acos } else { delta + acos };
    Ok(ThetaEstimate {
        theta_hat: 0.5 * two_theta,
        clamped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorResult {
    /// Mean of the per-trial estimates.
    pub theta_hat: f64,
    /// Empirical variance of the estimates (unbiased, `n − 1`).
    pub variance: f64,
    pub mse: f64,
    pub n_trials: usize,
    pub crb: f64,
    pub clamped_trials: usize,
}

impl EstimatorResult {
    pub fn efficiency_ratio(&self) -> f64 {
        self.variance / self.crb
    }
}

/// Repeats sampling and estimation `trials` times; trial `k` uses stream `k`.
pub fn mle_study(
    theta_true: f64,
    phi: f64,
    sx: f64,
    n_electrons: u64,
    trials: usize,
    seed: u64,
) -> Result<EstimatorResult> {
    if trials < 2 {
        return Err(Error::domain("a study needs at least 2 trials"));
    }
    let bound = crb(theta_true, phi, sx, n_electrons)?;
    let estimates = (0..trials)
        .into_par_iter()
        .map(|k| {
            let rec = sample_shots_stream(theta_true, phi, sx, n_electrons, seed, k as u64)?;
            estimate_theta_mle(&rec, phi, sx)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = trials as f64;
    let mean = estimates.iter().map(|e| e.theta_hat).sum::<f64>() / m;
    let variance = estimates.iter().map(|e| (e.theta_hat - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let mse = estimates
        .iter()
        .map(|e| (e.theta_hat - theta_true).powi(2))
        .sum::<f64>()
        / m;
    Ok(EstimatorResult {
        theta_hat: mean,
        variance,
        mse,
        n_trials: trials,
        crb: bound,
        clamped_trials: estimates.iter().filter(|e| e.clamped).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::detection_probability;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

    fn exact_record(theta: f64, phi: f64, sx: f64, n: u64) -> ShotRecord {
        let p = detection_probability(theta, phi, sx).unwrap().plus;
        let n_plus = (p * n as f64).round() as u64;
        ShotRecord {
            n_plus,
            n_minus: n - n_plus,
            phi,
            seed: 0,
            stream: 0,
            theta,
            sx_expect: sx,
        }
    }

    #[test]
    fn noiseless_inversion() {
        // counts chosen so that n_plus/N_e is exactly representable
        for &(theta, phi, sx) in &[
            (0.05, 0.0, 0.2),
            (0.3, 1.0, 0.7),
            (-0.2, FRAC_PI_2, 1.0),
            (0.1, -2.0, -0.4),
        ] {
            let p = detection_probability(theta, phi, sx).unwrap().plus;
            let n = 1u64 << 52;
            let rec = ShotRecord {
                n_plus: (p * n as f64) as u64,
                n_minus: n - (p * n as f64) as u64,
                phi,
                seed: 0,
                stream: 0,
                theta,
                sx_expect: sx,
            };
            let est = estimate_theta_mle(&rec, phi, sx).unwrap();
            assert!(
                (est.theta_hat - theta).abs() < 1e-10,
                "{theta} {phi} {sx}: {}",
                est.theta_hat
            );
            assert!(!est.clamped);
        }
    }

    #[test]
    fn clamps_unreachable_ratio() {
        // at φ = π/2, sx = 0.5: p₊ ∈ [0.25, 0.75]
        let rec = ShotRecord {
            n_plus: 95,
            n_minus: 5,
            phi: FRAC_PI_2,
            seed: 0,
            stream: 0,
            theta: 0.0,
            sx_expect: 0.5,
        };
        let est = estimate_theta_mle(&rec, FRAC_PI_2, 0.5).unwrap();
        assert!(est.clamped);
        assert_relative_eq!(est.theta_hat, FRAC_PI_2 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn non_identifiable_setting() {
        let rec = exact_record(0.1, FRAC_PI_2, 0.0, 100);
        assert!(matches!(
            estimate_theta_mle(&rec, FRAC_PI_2, 0.0),
            Err(Error::NonIdentifiable(_))
        ));
    }

    #[test]
    fn efficient_at_zero_phase() {
        let r = mle_study(FRAC_PI_8, 0.0, 1.0, 100_000, 1000, 42).unwrap();
        let ratio = r.efficiency_ratio();
        assert!((0.9..=1.3).contains(&ratio), "{ratio}");
        assert_relative_eq!(r.crb, 1.0 / 400_000.0, max_relative = 1e-12);
    }

    #[test]
    fn centered_at_null() {
        let r = mle_study(0.0, FRAC_PI_2, 1.0, 10_000, 400, 5).unwrap();
        assert!(r.theta_hat.abs() < 4.0 * (r.variance / 400.0).sqrt(), "{}", r.theta_hat);
    }

    #[test]
    fn rmse_decreases_with_electrons() {
        let rmse: Vec<f64> = [1_000, 10_000, 100_000]
            .iter()
            .map(|&n| mle_study(0.3, 0.0, 1.0, n, 300, 11).unwrap().mse.sqrt())
            .collect();
        assert!(rmse[0] > rmse[1] && rmse[1] > rmse[2], "{rmse:?}");
    }

    #[test]
    fn study_is_deterministic() {
        let a = mle_study(0.2, 0.0, 0.5, 5_000, 50, 9).unwrap();
        let b = mle_study(0.2, 0.0, 0.5, 5_000, 50, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_coupling_at_zero_phase_is_far_from_asymptotic() {
        // Exact variance of the estimator from the binomial distribution:
        // with θ* = 5.64e-5 and N_e = 1e5 almost every record has n_minus = 0,
        // so the estimator variance is orders of magnitude below 1/(4N_e).
        let (theta, n) = (5.64e-5f64, 100_000u64);
        let q = theta.sin().powi(2);
        let mut pmf = (n as f64 * (-q).ln_1p()).exp();
        let (mut m1, mut m2) = (0.0, 0.0);
        for k in 0..50u64 {
            let rec = ShotRecord {
                n_plus: n - k,
                n_minus: k,
                phi: 0.0,
                seed: 0,
                stream: 0,
                theta,
                sx_expect: 1.0,
            };
            let t = estimate_theta_mle(&rec, 0.0, 1.0).unwrap().theta_hat;
            m1 += pmf * t;
            m2 += pmf * t * t;
            pmf *= (n - k) as f64 / (k + 1) as f64 * q / (1.0 - q);
        }
        let ratio = (m2 - m1 * m1) * 4.0 * n as f64;
        assert!(ratio < 0.01, "{ratio}");
    }

    proptest! {
        #[test]
        fn estimates_stay_on_branch(theta in -0.3f64..0.3, phi in 0.2f64..1.4, sx in 0.3f64..=1.0) {
            let delta = (sx * phi.sin()).atan2(phi.cos());
            prop_assume!(2.0 * theta < delta - 0.05);
            let rec = exact_record(theta, phi, sx, 1 << 40);
            let est = estimate_theta_mle(&rec, phi, sx).unwrap();
            prop_assert!((est.theta_hat - theta).abs() < 1e-5);
        }
    }
}
