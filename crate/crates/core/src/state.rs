//! Normalized pure states.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{c64, ComplexMatrix, C64};

/// Tolerance on the Euclidean norm of a [`StateVector`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// A normalized complex vector |ψ⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct StateVector(DVector<C64>);

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amplitudes))
    }

    pub fn from_vector(v: DVector<C64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidParameter("empty state vector".into()));
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self(v))
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        Self::normalize_vector(DVector::from_vec(amplitudes))
    }

    pub fn normalize_vector(v: DVector<C64>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero vector cannot be normalized".into()));
        }
        Self::from_vector(v.unscale(norm))
    }

    /// Computational basis state |index⟩.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                index,
                max: dim.saturating_sub(1),
            });
        }
        let mut v = DVector::zeros(dim);
        v[index] = c64(1.0, 0.0);
        Ok(Self(v))
    }

    /// cos(η/2)|0⟩ + e^{iξ} sin(η/2)|1⟩.
    pub fn bloch(eta: f64, xi: f64) -> Self {
        let v = DVector::from_vec(vec![
            c64((eta / 2.0).cos(), 0.0),
            C64::from_polar((eta / 2.0).sin(), xi),
        ]);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.0
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0.dotc(&other.0)
    }

    /// ⟨self|v⟩ for an unnormalized vector.
    pub fn inner_vector(&self, v: &DVector<C64>) -> C64 {
        self.0.dotc(v)
    }

    /// ⟨ψ|op|ψ⟩.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        self.check_operator(op)?;
        Ok(self.0.dotc(&(op * &self.0)))
    }

    /// ⟨self|op|ket⟩.
    pub fn matrix_element(&self, op: &ComplexMatrix, ket: &StateVector) -> Result<C64> {
        self.check_operator(op)?;
        ket.check_operator(op)?;
        Ok(self.0.dotc(&(op * &ket.0)))
    }

    /// Applies a (numerically) unitary matrix and renormalizes away rounding drift.
    pub fn evolve(&self, unitary: &ComplexMatrix) -> Result<StateVector> {
        self.check_operator(unitary)?;
        Self::normalize_vector(unitary * &self.0)
    }

    /// Unnormalized op·|ψ⟩.
    pub fn apply(&self, op: &ComplexMatrix) -> Result<DVector<C64>> {
        self.check_operator(op)?;
        Ok(op * &self.0)
    }

    /// |ψ⟩⟨ψ|.
    pub fn projector(&self) -> ComplexMatrix {
        &self.0 * self.0.adjoint()
    }

    /// Multiplies by a unit-modulus phase.
    pub fn with_phase(&self, phase: f64) -> StateVector {
        let factor = C64::from_polar(1.0, phase);
        Self(self.0.map(|z| z * factor))
    }

    pub(crate) fn check_operator(&self, op: &ComplexMatrix) -> Result<()> {
        if op.nrows() != op.ncols() {
            return Err(Error::NotSquare {
                rows: op.nrows(),
                cols: op.ncols(),
            });
        }
        if op.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.nrows(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_same_dim(&self, other: &StateVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<[f64; 2]>> for StateVector {
    type Error = Error;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(pairs.into_iter().map(|[re, im]| c64(re, im)).collect())
    }
}

impl From<StateVector> for Vec<[f64; 2]> {
    fn from(s: StateVector) -> Self {
        s.0.iter().map(|z| [z.re, z.im]).collect()
    }
}
