//! Density-matrix newtypes for the three-level dot and the two time-bin qubits.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{eig_hermitian, ComplexMatrix, LinalgError, ONE};

/// Validation tolerance for trace, Hermiticity and positivity.
pub const STATE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("expected a {expected}x{expected} matrix, got {got}x{got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("trace is {trace}, expected 1")]
    Trace { trace: Complex64 },
    #[error("not Hermitian (violation {violation:.3e})")]
    NotHermitian { violation: f64 },
    #[error("negative eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_trace_hermitian(m: &ComplexMatrix, tol: f64) -> Result<(), StateError> {
    let trace = m.trace();
    if (trace - ONE).norm() > tol {
        return Err(StateError::Trace { trace });
    }
    let violation = m.hermiticity_violation();
    if violation > tol {
        return Err(StateError::NotHermitian { violation });
    }
    Ok(())
}

fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64, LinalgError> {
    Ok(eig_hermitian(m)?.min_value())
}

/// Energy levels of the dot, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Ground,
    Exciton,
    Biexciton,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Ground, Level::Exciton, Level::Biexciton];

    pub fn index(self) -> usize {
        match self {
            Level::Ground => 0,
            Level::Exciton => 1,
            Level::Biexciton => 2,
        }
    }
}

/// Density matrix of the dot over `(|g⟩, |x⟩, |b⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QdDensityMatrix(ComplexMatrix);

impl QdDensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, StateError> {
        if m.dim() != 3 {
            return Err(StateError::WrongDimension {
                expected: 3,
                got: m.dim(),
            });
        }
        check_trace_hermitian(&m, STATE_TOL)?;
        let min_eigenvalue = min_eigenvalue(&m)?;
        if min_eigenvalue < -STATE_TOL {
            return Err(StateError::NotPositive { min_eigenvalue });
        }
        Ok(Self(m))
    }

    /// Wraps an integrator output without validation; invariants are
    /// monitored by the caller.
    pub(crate) fn from_raw(m: ComplexMatrix) -> Self {
        debug_assert_eq!(m.dim(), 3);
        Self(m)
    }

    pub fn pure_level(level: Level) -> Self {
        let i = level.index();
        Self(ComplexMatrix::unit(3, i, i))
    }

    pub fn ground() -> Self {
        Self::pure_level(Level::Ground)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn population(&self, level: Level) -> f64 {
        let i = level.index();
        self.0[(i, i)].re
    }

    pub fn populations(&self) -> [f64; 3] {
        Level::ALL.map(|l| self.population(l))
    }

    /// `⟨a|ρ|b⟩`
    pub fn element(&self, a: Level, b: Level) -> Complex64 {
        self.0[(a.index(), b.index())]
    }

    pub fn min_eigenvalue(&self) -> Result<f64, LinalgError> {
        min_eigenvalue(&self.0)
    }
}

/// One time-bin qubit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeBin {
    Early,
    Late,
}

/// Two-photon basis states, XX photon first.
pub const EE: usize = 0;
pub const EL: usize = 1;
pub const LE: usize = 2;
pub const LL: usize = 3;

pub fn basis_index(xx: TimeBin, x: TimeBin) -> usize {
    let bit = |b| match b {
        TimeBin::Early => 0,
        TimeBin::Late => 1,
    };
    2 * bit(xx) + bit(x)
}

pub fn basis_label(index: usize) -> &'static str {
    ["ee", "el", "le", "ll"][index]
}

/// Density matrix of the (XX, X) time-bin photon pair over
/// `(|ee⟩, |el⟩, |le⟩, |ll⟩)`.
///
/// Construction enforces unit trace and Hermiticity. Positivity is checked
/// separately with [`TwoQubitState::is_physical`] because a linear-inversion
/// estimate may legitimately violate it.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState(ComplexMatrix);

impl TwoQubitState {
    pub fn new(m: ComplexMatrix) -> Result<Self, StateError> {
        if m.dim() != 4 {
            return Err(StateError::WrongDimension {
                expected: 4,
                got: m.dim(),
            });
        }
        check_trace_hermitian(&m, STATE_TOL)?;
        Ok(Self(m))
    }

    /// Like [`TwoQubitState::new`] but also requires eigenvalues ≥ −tol.
    pub fn new_physical(m: ComplexMatrix) -> Result<Self, StateError> {
        let s = Self::new(m)?;
        let min_eigenvalue = s.min_eigenvalue()?;
        if min_eigenvalue < -STATE_TOL {
            return Err(StateError::NotPositive { min_eigenvalue });
        }
        Ok(s)
    }

    /// Pure state from (possibly unnormalized) amplitudes on `ee, el, le, ll`.
    pub fn pure(amplitudes: [Complex64; 4]) -> Self {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "zero state vector");
        let v: Vec<Complex64> = amplitudes.iter().map(|a| a / norm).collect();
        Self(ComplexMatrix::projector(&v))
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix::identity(4).scale_real(0.25))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    pub fn min_eigenvalue(&self) -> Result<f64, LinalgError> {
        min_eigenvalue(&self.0)
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.min_eigenvalue().map(|m| m >= -tol).unwrap_or(false)
    }

    /// `Tr(ρ P)`, real part.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        (&self.0 * op).trace().re
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized `ψ`.
    pub fn overlap(&self, psi: &[Complex64]) -> f64 {
        let rho_psi = self.0.mul_vec(psi);
        psi.iter()
            .zip(&rho_psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .re
    }
}

impl Default for TwoQubitState {
    fn default() -> Self {
        Self::maximally_mixed()
    }
}
