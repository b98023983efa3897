//! Variances of non-Hermitian operators and uncertainty relations.
//!
//! For arbitrary A, B the Cauchy–Schwarz inequality on
//! |f⟩ = (A − ⟨A⟩)|ψ⟩, |g⟩ = (B − ⟨B⟩)|ψ⟩ gives ΔA ΔB ≥ |⟨f|g⟩|. With the left
//! polar forms A = S_A U_A, B = S_B U_B the right-hand side becomes
//! |⟨φ|S_A P S_B|χ⟩| where P = I − |ψ⟩⟨ψ|, |φ⟩ = U_A|ψ⟩ and |χ⟩ = U_B|ψ⟩, i.e.
//! a weak value times an overlap.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eig};
use crate::phase::{self, PhaseSpaceConfig};
use crate::state::StateVector;
use crate::weak::EPS_OVERLAP;
use crate::{c64, ComplexMatrix, C64};

/// Rounding window below zero that variances are clamped out of.
pub const VARIANCE_CLAMP: f64 = 1e-12;

/// Slack allowed when asserting an uncertainty inequality.
pub const RELATION_SLACK: f64 = 1e-10;

/// ΔA² = ⟨A†A⟩ − ⟨A†⟩⟨A⟩, computed as ‖(A − ⟨A⟩)ψ‖².
pub fn variance_nonhermitian(a: &ComplexMatrix, psi: &StateVector) -> Result<f64> {
    Ok(deviation(a, psi)?.1.norm_squared())
}

/// (⟨A⟩, (A − ⟨A⟩)|ψ⟩).
fn deviation(a: &ComplexMatrix, psi: &StateVector) -> Result<(C64, DVector<C64>)> {
    let applied = psi.apply(a)?;
    let mean = psi.inner_vector(&applied);
    Ok((mean, applied - psi.as_vector() * mean))
}

/// Variance from the moment formula, clamped into `[0, ∞)`.
pub fn variance_from_moments(a: &ComplexMatrix, psi: &StateVector) -> Result<f64> {
    let second = psi.expectation(&(a.adjoint() * a))?.re;
    let mean = psi.expectation(a)?;
    let v = second - mean.norm_sqr();
    if v < -VARIANCE_CLAMP * second.abs().max(1.0) {
        return Err(Error::invariant("variance is non-negative", format!("{v:e}")));
    }
    Ok(v.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub delta_a: f64,
    pub delta_b: f64,
    pub product_lhs: f64,
    pub bound_rhs: f64,
    /// φ[S_A P S_B]^w_χ; `None` when ⟨φ|χ⟩ vanishes.
    pub weak_value_bound_term: Option<C64>,
    /// ⟨φ|χ⟩.
    pub overlap_term: C64,
    /// ⟨f|g⟩ computed straight from its definition.
    pub direct_inner: C64,
}

/// ΔA ΔB ≥ |⟨φ|S_A P S_B|χ⟩|, evaluated through the polar forms.
pub fn uncertainty_bound(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    psi: &StateVector,
) -> Result<UncertaintyReport> {
    let (_, f) = deviation(a, psi)?;
    let (_, g) = deviation(b, psi)?;
    let delta_a = f.norm();
    let delta_b = g.norm();

    let pa = linalg::polar_decompose(a)?;
    let pb = linalg::polar_decompose(b)?;
    let phi = psi.evolve(&pa.unitary)?;
    let chi = psi.evolve(&pb.unitary)?;
    let dim = psi.dim();
    let projector = linalg::identity(dim) - psi.projector();
    let middle = &pa.left_psd * projector * &pb.left_psd;
    let numerator = phi.matrix_element(&middle, &chi)?;
    let overlap = phi.inner(&chi);
    let weak = (overlap.norm() >= EPS_OVERLAP).then(|| numerator / overlap);

    let report = UncertaintyReport {
        delta_a,
        delta_b,
        product_lhs: delta_a * delta_b,
        bound_rhs: numerator.norm(),
        weak_value_bound_term: weak,
        overlap_term: overlap,
        direct_inner: f.dotc(&g),
    };
    if report.product_lhs < report.bound_rhs - RELATION_SLACK {
        return Err(Error::invariant(
            "product of deviations bounds the polar-form term",
            format!("{} < {}", report.product_lhs, report.bound_rhs),
        ));
    }
    Ok(report)
}

/// One row of the creation/annihilation uncertainty table in a phase state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CreationBoundRow {
    pub s: usize,
    /// (Δa†)² = s/2 − (s+1)^{-2}(Σ√n)².
    pub lhs: f64,
    /// (s+1)^{-1}|Σ√(n(n−1)) − (s+1)^{-1}(Σ√n)²|.
    pub rhs: f64,
    /// Δa†Δa from the matrices.
    pub matrix_lhs: f64,
    /// |⟨(a†)²⟩ − ⟨a†⟩²| from the matrices.
    pub matrix_rhs: f64,
    /// Polar-form bound from [`uncertainty_bound`] with A = a†, B = a.
    pub polar_rhs: f64,
}

impl CreationBoundRow {
    pub fn slack(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Closed-form left and right sides for truncation `s`.
pub fn creation_bound_closed_form(s: usize) -> (f64, f64) {
    let n1 = (s + 1) as f64;
    let root_sum: f64 = (0..=s).map(|n| (n as f64).sqrt()).sum();
    let pair_sum: f64 = (0..=s).map(|n| ((n * n.saturating_sub(1)) as f64).sqrt()).sum();
    let lhs = (s as f64 / 2.0 - root_sum * root_sum / (n1 * n1)).abs();
    let rhs = (pair_sum - root_sum * root_sum / n1).abs() / n1;
    (lhs, rhs)
}

/// Table for s = 1..=s_max in the phase state |θ_m⟩ (m is clamped to s).
pub fn creation_annihilation_bound_sweep(
    s_max: usize,
    theta0: f64,
    m: usize,
) -> Result<Vec<CreationBoundRow>> {
    if s_max < 1 {
        return Err(Error::InvalidParameter("s_max must be >= 1".into()));
    }
    (1..=s_max)
        .into_par_iter()
        .map(|s| {
            let cfg = PhaseSpaceConfig::new(s, theta0)?;
            let psi = phase::phase_state(&cfg, m.min(s))?;
            let adag = phase::raising_operator(s);
            let a = phase::lowering_operator(s);
            let (lhs, rhs) = creation_bound_closed_form(s);
            let matrix_lhs = (variance_nonhermitian(&adag, &psi)? * variance_nonhermitian(&a, &psi)?).sqrt();
            let mean = psi.expectation(&adag)?;
            let square = psi.expectation(&(&adag * &adag))?;
            let matrix_rhs = (square - mean * mean).norm();
            let polar = uncertainty_bound(&adag, &a, &psi)?;
            Ok(CreationBoundRow {
                s,
                lhs,
                rhs,
                matrix_lhs,
                matrix_rhs,
                polar_rhs: polar.bound_rhs,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongerReport {
    pub sign: i8,
    /// ΔA² + ΔB².
    pub lhs: f64,
    pub rhs: f64,
    /// ±i⟨[A,B]⟩ (real for Hermitian A, B).
    pub commutator_term: f64,
    /// |⟨ψ|A ± iB|ψ̄⟩|².
    pub overlap_term: f64,
    /// Weak value of R for C = A ∓ iB = UR, pre-selected in |ψ⟩ and
    /// post-selected in U†|ψ̄⟩; `None` if that overlap vanishes.
    pub weak_value: Option<C64>,
    /// ⟨U†ψ̄|ψ⟩.
    pub weak_overlap: C64,
}

/// First computational basis vector not parallel to ψ, orthogonalized against it.
pub fn default_orthogonal(psi: &StateVector) -> Result<StateVector> {
    for k in 0..psi.dim() {
        let e = StateVector::basis(psi.dim(), k)?;
        let v = e.as_vector() - psi.as_vector() * psi.inner(&e);
        if v.norm() > 1e-6 {
            return StateVector::normalize_vector(v);
        }
    }
    Err(Error::InvalidParameter(
        "no orthogonal complement in dimension 1".into(),
    ))
}

/// ΔA² + ΔB² ≥ ±i⟨[A,B]⟩ + |⟨ψ|A ± iB|ψ̄⟩|² for Hermitian A, B and ψ̄ ⊥ ψ.
pub fn stronger_uncertainty_check(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    psi: &StateVector,
    psibar: &StateVector,
    sign: i8,
) -> Result<StrongerReport> {
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidParameter(format!(
            "sign must be +1 or -1, got {sign}"
        )));
    }
    hermitian_eig(a)?;
    hermitian_eig(b)?;
    psi.check_operator(a)?;
    psi.check_same_dim(psibar)?;
    let ov = psibar.inner(psi).norm();
    if ov > 1e-10 {
        return Err(Error::NotOrthogonal(ov));
    }
    let sgn = f64::from(sign);
    let i = c64(0.0, 1.0);

    let lhs = variance_nonhermitian(a, psi)? + variance_nonhermitian(b, psi)?;
    let commutator = a * b - b * a;
    let commutator_term = (i * sgn * psi.expectation(&commutator)?).re;
    let plus = a + b * (i * sgn);
    let overlap_term = psi.matrix_element(&plus, psibar)?.norm_sqr();
    let rhs = commutator_term + overlap_term;

    // |⟨ψ̄|(A ∓ iB)|ψ⟩|² through the polar form of A ∓ iB.
    let minus = plus.adjoint();
    let polar = linalg::polar_decompose(&minus)?;
    let rotated = psibar.evolve(&polar.unitary.adjoint())?;
    let weak_overlap = rotated.inner(psi);
    let numerator = rotated.matrix_element(&polar.psd, psi)?;
    let weak_value = (weak_overlap.norm() >= EPS_OVERLAP).then(|| numerator / weak_overlap);
    let via_weak = numerator.norm_sqr();
    if (via_weak - overlap_term).abs() > 1e-10 * overlap_term.max(1.0) {
        return Err(Error::invariant(
            "polar factorization reproduces the overlap term",
            format!("{via_weak} vs {overlap_term}"),
        ));
    }

    if lhs < rhs - RELATION_SLACK {
        return Err(Error::invariant(
            "sum of variances bounds the stronger relation",
            format!("{lhs} < {rhs}"),
        ));
    }
    Ok(StrongerReport {
        sign,
        lhs,
        rhs,
        commutator_term,
        overlap_term,
        weak_value,
        weak_overlap,
    })
}

/// Quadratures X = (a + a†)/√2 and P = i(a† − a)/√2 in dimension `dim`.
pub fn truncated_quadratures(dim: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if dim < 2 {
        return Err(Error::InvalidParameter("quadratures need dim >= 2".into()));
    }
    let a = phase::lowering_operator(dim - 1);
    let ad = a.adjoint();
    let x = (&a + &ad).scale(std::f64::consts::FRAC_1_SQRT_2);
    let p = (&ad - &a) * c64(0.0, std::f64::consts::FRAC_1_SQRT_2);
    Ok((x, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureDemo {
    pub report: StrongerReport,
    /// −i⟨[X,P]⟩; equals 1 only without truncation.
    pub commutator_constant: f64,
    /// 2|⟨ψ|a†|ψ̄⟩|².
    pub creation_term: f64,
}

/// Minus-sign relation for truncated X, P: ΔX² + ΔP² ≥ −i⟨[X,P]⟩ + 2|⟨ψ|a†|ψ̄⟩|².
/// With truncation −i⟨[X,P]⟩ = 1 − dim·|⟨dim−1|ψ⟩|².
pub fn truncated_quadrature_demo(psi: &StateVector, psibar: &StateVector) -> Result<QuadratureDemo> {
    let (x, p) = truncated_quadratures(psi.dim())?;
    let report = stronger_uncertainty_check(&x, &p, psi, psibar, -1)?;
    let ad = phase::raising_operator(psi.dim() - 1);
    let creation_term = 2.0 * psi.matrix_element(&ad, psibar)?.norm_sqr();
    Ok(QuadratureDemo {
        commutator_constant: report.commutator_term,
        creation_term,
        report,
    })
}
