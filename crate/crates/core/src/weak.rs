//! Exact weak values and the polar-decomposition route to non-Hermitian
//! expectation values.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, PolarFactors};
use crate::state::StateVector;
use crate::{ComplexMatrix, C64};

/// Below this `|⟨post|pre⟩|` a weak value is treated as undefined.
pub const EPS_OVERLAP: f64 = 1e-8;

/// A weak value together with the overlap that turns it into an expectation value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakValueResult {
    /// `None` when the post-selection was (numerically) orthogonal to the
    /// pre-selection and the expectation was computed directly instead.
    pub weak_value: Option<C64>,
    /// ⟨post|pre⟩.
    pub overlap: C64,
    pub reconstructed_expectation: C64,
    /// |⟨post|pre⟩|², the zeroth-order post-selection probability.
    pub postselect_prob_zeroth: f64,
}

impl WeakValueResult {
    pub(crate) fn from_parts(numerator: C64, overlap: C64) -> Self {
        let prob = overlap.norm_sqr().min(1.0);
        if overlap.norm() < EPS_OVERLAP {
            return Self {
                weak_value: None,
                overlap,
                reconstructed_expectation: numerator,
                postselect_prob_zeroth: prob,
            };
        }
        let wv = numerator / overlap;
        Self {
            weak_value: Some(wv),
            overlap,
            reconstructed_expectation: wv * overlap,
            postselect_prob_zeroth: prob,
        }
    }

    pub fn used_fallback(&self) -> bool {
        self.weak_value.is_none()
    }
}

fn check_overlap(pre: &StateVector, post: &StateVector) -> Result<C64> {
    pre.check_same_dim(post)?;
    let overlap = post.inner(pre);
    if overlap.norm() < EPS_OVERLAP {
        return Err(Error::OrthogonalSelection(overlap.norm()));
    }
    Ok(overlap)
}

/// ⟨post|op|pre⟩ / ⟨post|pre⟩.
pub fn weak_value(op: &ComplexMatrix, pre: &StateVector, post: &StateVector) -> Result<C64> {
    let overlap = check_overlap(pre, post)?;
    Ok(post.matrix_element(op, pre)? / overlap)
}

/// ⟨ψ|UR|ψ⟩ through the weak value of `R` with post-selection U†|ψ⟩.
pub fn expectation_from_factors(
    unitary: &ComplexMatrix,
    psd: &ComplexMatrix,
    psi: &StateVector,
) -> Result<WeakValueResult> {
    let phi = psi.evolve(&unitary.adjoint())?;
    let numerator = phi.matrix_element(psd, psi)?;
    Ok(WeakValueResult::from_parts(numerator, phi.inner(psi)))
}

/// ⟨ψ|A|ψ⟩ from the right polar form A = UR.
pub fn expectation_via_right_polar(a: &ComplexMatrix, psi: &StateVector) -> Result<WeakValueResult> {
    psi.check_operator(a)?;
    let polar = linalg::polar_decompose(a)?;
    expectation_via_right_factors(&polar, psi)
}

pub fn expectation_via_right_factors(polar: &PolarFactors, psi: &StateVector) -> Result<WeakValueResult> {
    expectation_from_factors(&polar.unitary, &polar.psd, psi)
}

/// ⟨ψ|A|ψ⟩ from the left polar form A = SU: weak value of `S` pre-selected
/// in U|ψ⟩ and post-selected in |ψ⟩.
pub fn expectation_via_left_polar(a: &ComplexMatrix, psi: &StateVector) -> Result<WeakValueResult> {
    psi.check_operator(a)?;
    let polar = linalg::polar_decompose(a)?;
    expectation_via_left_factors(&polar, psi)
}

pub fn expectation_via_left_factors(polar: &PolarFactors, psi: &StateVector) -> Result<WeakValueResult> {
    let chi = psi.evolve(&polar.unitary)?;
    let numerator = psi.matrix_element(&polar.left_psd, &chi)?;
    Ok(WeakValueResult::from_parts(numerator, psi.inner(&chi)))
}

/// Pieces of a non-Hermitian weak value assembled from the polar form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarWeakValue {
    pub weak_value: C64,
    /// Weak value of `R` post-selected in U†|post⟩; `None` if that overlap vanishes.
    pub psd_weak_value: Option<C64>,
    /// z = ⟨ψ″|pre⟩ / ⟨post|pre⟩.
    pub z: C64,
}

/// Weak value of an arbitrary operator, `⟨post|A|pre⟩/⟨post|pre⟩`, computed as
/// the weak value of `R` (post-selected in ψ″ = U†|post⟩) times z, and checked
/// against the direct quotient.
pub fn weak_value_nonhermitian_parts(
    a: &ComplexMatrix,
    pre: &StateVector,
    post: &StateVector,
) -> Result<PolarWeakValue> {
    let overlap = check_overlap(pre, post)?;
    pre.check_operator(a)?;
    let polar = linalg::polar_decompose(a)?;
    let rotated = post.evolve(&polar.unitary.adjoint())?;
    let rotated_overlap = rotated.inner(pre);
    let z = rotated_overlap / overlap;
    let numerator = rotated.matrix_element(&polar.psd, pre)?;
    let (psd_weak_value, wv) = if rotated_overlap.norm() < EPS_OVERLAP {
        (None, numerator / overlap)
    } else {
        let w = numerator / rotated_overlap;
        (Some(w), w * z)
    };

    let direct = post.matrix_element(a, pre)? / overlap;
    let tol = 1e-12 * linalg::max_abs(a).max(1.0) * (a.nrows() as f64) / overlap.norm();
    if (wv - direct).norm() > tol {
        return Err(Error::invariant(
            "weak value via polar form equals direct quotient",
            format!("{wv} vs {direct}"),
        ));
    }
    Ok(PolarWeakValue {
        weak_value: wv,
        psd_weak_value,
        z,
    })
}

pub fn weak_value_nonhermitian(a: &ComplexMatrix, pre: &StateVector, post: &StateVector) -> Result<C64> {
    Ok(weak_value_nonhermitian_parts(a, pre, post)?.weak_value)
}

/// ⟨bra|A|ket⟩ reconstructed from weak values.
///
/// When bra and ket are (nearly) orthogonal the element is split as
/// `N·⟨m|A|ket⟩ − ⟨ket|A|ket⟩` with |m⟩ = (|bra⟩+|ket⟩)/N, both terms having
/// post-selection overlap close to one.
pub fn matrix_element_via_weak(a: &ComplexMatrix, bra: &StateVector, ket: &StateVector) -> Result<C64> {
    bra.check_same_dim(ket)?;
    let overlap = bra.inner(ket);
    if overlap.norm() >= EPS_OVERLAP {
        return Ok(weak_value_nonhermitian(a, ket, bra)? * overlap);
    }
    let sum = bra.as_vector() + ket.as_vector();
    let norm = sum.norm();
    let mid = StateVector::normalize_vector(sum)?;
    let cross = weak_value_nonhermitian(a, ket, &mid)? * mid.inner(ket);
    let diag = expectation_via_right_polar(a, ket)?.reconstructed_expectation;
    Ok(cross * norm - diag)
}
