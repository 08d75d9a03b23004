//! Fisher information, Cramér–Rao bounds, shot sampling and estimators for
//! the single-spin fringe `p₊ = ½[1 + 𝒱 cos(φ − Δφ_S)]`.

mod fisher;
mod fringe_fit;
mod mle;
mod sampling;

pub use fisher::{crb, electrons_for_phase, fisher_information, p_plus_derivative, FisherInfo};
pub use fringe_fit::{fit_fringe, fit_fringe_weighted, FringeFit, FringePoint};
pub use mle::{estimate_theta_mle, mle_study, EstimatorResult, ThetaEstimate};
pub use sampling::{bernoulli_count, sample_shots, sample_shots_stream, ShotRecord};
