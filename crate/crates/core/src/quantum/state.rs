use crate::{Error, Result};
use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector2, Vector3};
use num_complex::Complex64;

#[cfg(test)]
use super::C_ZERO;
use super::{pauli, C_ONE};

const TRACE_TOL: f64 = 1e-12;
const PURE_TOL: f64 = 1e-9;

/// Density matrix of a spin-1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    rho: Matrix2<Complex64>,
}

impl SpinState {
    /// `ρ = (1 + s·σ)/2`; rejects `|s| > 1`.
    pub fn from_bloch(s: Vector3<f64>) -> Result<Self> {
        let len = s.norm();
        if !len.is_finite() || len > 1.0 + TRACE_TOL {
            return Err(Error::domain(format!("Bloch vector length {len} exceeds 1")));
        }
        let [sx, sy, sz] = pauli();
        let rho =
            (Matrix2::identity() + sx * Complex64::from(s.x) + sy * Complex64::from(s.y) + sz * Complex64::from(s.z))
                * Complex64::from(0.5);
        Ok(SpinState { rho })
    }

    /// Pure state from a (not necessarily normalized) ket.
    pub fn from_ket(ket: Vector2<Complex64>) -> Result<Self> {
        let n = ket.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::domain("ket must be non-zero"));
        }
        let k = ket / Complex64::from(n);
        Ok(SpinState { rho: k * k.adjoint() })
    }

    /// Validates trace, hermiticity and positivity.
    pub fn from_density(rho: Matrix2<Complex64>) -> Result<Self> {
        let tr = rho.trace();
        if (tr - C_ONE).norm() > TRACE_TOL {
            return Err(Error::domain(format!("trace {tr} differs from 1")));
        }
        if (rho - rho.adjoint()).norm() > TRACE_TOL {
            return Err(Error::domain("density matrix is not Hermitian"));
        }
        let state = SpinState { rho };
        let len = state.bloch().norm();
        if len > 1.0 + TRACE_TOL {
            return Err(Error::domain(format!("density matrix is not positive (|s| = {len})")));
        }
        Ok(state)
    }

    pub fn maximally_mixed() -> Self {
        SpinState {
            rho: Matrix2::identity() * Complex64::from(0.5),
        }
    }

    pub(crate) fn from_density_unchecked(rho: Matrix2<Complex64>) -> Self {
        SpinState { rho }
    }

    pub fn rho(&self) -> &Matrix2<Complex64> {
        &self.rho
    }

    pub fn bloch(&self) -> Vector3<f64> {
        let [sx, sy, sz] = pauli();
        Vector3::new(self.expectation(&sx), self.expectation(&sy), self.expectation(&sz))
    }

    /// `Tr(ρ A)` for Hermitian `A`.
    pub fn expectation(&self, op: &Matrix2<Complex64>) -> f64 {
        (self.rho * op).trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    pub fn is_pure(&self) -> bool {
        (self.bloch().norm() - 1.0).abs() <= PURE_TOL
    }

    /// Normalized eigenvector of the largest eigenvalue; the state itself if pure.
    pub fn dominant_ket(&self) -> Vector2<Complex64> {
        let eig = SymmetricEigen::new(self.rho);
        let idx = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
        eig.eigenvectors.column(idx).into_owned()
    }
}

/// Electron path qubit in the `{|R⟩, |L⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    amplitudes: Vector2<Complex64>,
    phi: f64,
}

impl PathState {
    /// First-beam-splitter output with external phase `φ`:
    /// `(|R⟩ + e^{−iφ}|L⟩)/√2`.
    ///
    /// The sign of the phase on `|L⟩` is chosen so that the `+` port
    /// probability reads `½[1 + 𝒱 cos(φ − Δφ_S)]` for the passage unitary
    /// `e^{−iθσ̂}|R⟩⟨R| + e^{iθσ̂}|L⟩⟨L|`.
    pub fn with_phase(phi: f64) -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        PathState {
            amplitudes: Vector2::new(Complex64::from(a), Complex64::from_polar(a, -phi)),
            phi,
        }
    }

    pub fn from_amplitudes(c_r: Complex64, c_l: Complex64) -> Result<Self> {
        let norm = (c_r.norm_sqr() + c_l.norm_sqr()).sqrt();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::domain(format!("path amplitudes have norm {norm}")));
        }
        let phi = if c_r.norm() > 0.0 && c_l.norm() > 0.0 {
            -(c_l / c_r).arg()
        } else {
            0.0
        };
        Ok(PathState {
            amplitudes: Vector2::new(c_r, c_l),
            phi,
        })
    }

    pub fn amplitudes(&self) -> Vector2<Complex64> {
        self.amplitudes
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn density(&self) -> Matrix2<Complex64> {
        self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Output port of the second beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    Plus,
    Minus,
}

impl Port {
    /// `|±⟩ = (|R⟩ ± |L⟩)/√2`.
    pub fn ket(self) -> Vector2<Complex64> {
        let a = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        match self {
            Port::Plus => Vector2::new(a, a),
            Port::Minus => Vector2::new(a, -a),
        }
    }
}

/// Joint spin ⊗ path density matrix; basis index `2·spin + path`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeState {
    rho4: Matrix4<Complex64>,
}

pub(crate) fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

impl CompositeState {
    pub fn product(spin: &SpinState, path: &PathState) -> Self {
        CompositeState {
            rho4: kron(spin.rho(), &path.density()),
        }
    }

    pub fn from_density(rho4: Matrix4<Complex64>) -> Result<Self> {
        let state = CompositeState { rho4 };
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn from_density_unchecked(rho4: Matrix4<Complex64>) -> Self {
        CompositeState { rho4 }
    }

    pub fn rho(&self) -> &Matrix4<Complex64> {
        &self.rho4
    }

    /// Checks unit trace, hermiticity and positivity to `tol`.
    pub fn validate_with(&self, tol: f64) -> Result<()> {
        let tr = self.rho4.trace();
        if (tr - C_ONE).norm() > tol {
            return Err(Error::domain(format!("composite trace {tr} differs from 1")));
        }
        if (self.rho4 - self.rho4.adjoint()).norm() > tol {
            return Err(Error::domain("composite state is not Hermitian"));
        }
        let min = self.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(Error::domain(format!("composite state has eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(TRACE_TOL)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = SymmetricEigen::new(self.rho4);
        [
            eig.eigenvalues[0],
            eig.eigenvalues[1],
            eig.eigenvalues[2],
            eig.eigenvalues[3],
        ]
    }

    /// Reduced spin state (path traced out).
    pub fn spin_marginal(&self) -> SpinState {
        let m = Matrix2::from_fn(|i, k| self.rho4[(2 * i, 2 * k)] + self.rho4[(2 * i + 1, 2 * k + 1)]);
        SpinState::from_density_unchecked(m)
    }

    /// Reduced path density matrix (spin traced out).
    pub fn path_marginal(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|j, l| self.rho4[(j, l)] + self.rho4[(2 + j, 2 + l)])
    }

    /// Probability of detecting the electron in `port`.
    pub fn port_probability(&self, port: Port) -> f64 {
        let k = port.ket();
        let projector = kron(&Matrix2::identity(), &(k * k.adjoint()));
        (self.rho4 * projector).trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.rho4 * self.rho4).trace().re
    }

    /// Von Neumann entropy (nats) of the reduced spin state. Measures
    /// spin–path entanglement when the joint state is pure.
    pub fn entanglement_entropy(&self) -> f64 {
        let len = self.spin_marginal().bloch().norm().min(1.0);
        [(1.0 + len) / 2.0, (1.0 - len) / 2.0]
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }
}
