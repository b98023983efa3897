//! Products of projectors from two bases and the discrete Dirac distribution.
//!
//! Π_i(B)Π_j(C) = ⟨ψ_i|φ_j⟩|ψ_i⟩⟨φ_j| factors as U R with
//! U = e^{iη} Σ_k |ψ_{k⊕m}⟩⟨φ_k| (m = i − j mod d, e^{iη} the phase of
//! ⟨ψ_i|φ_j⟩) and R = |⟨ψ_i|φ_j⟩| |φ_j⟩⟨φ_j|, so each table entry is a weak
//! value of a rank-one PSD operator times an overlap.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::StateVector;
use crate::weak::{expectation_from_factors, WeakValueResult};
use crate::{c64, ComplexMatrix, C64};

/// Orthonormality tolerance for input bases.
pub const BASIS_TOL: f64 = 1e-10;

/// Below this |⟨ψ_i|φ_j⟩| the unitary U is undefined.
pub const ZERO_OVERLAP_TOL: f64 = 1e-10;

/// Checks that the states form an orthonormal basis of a common space.
pub fn check_basis(basis: &[StateVector]) -> Result<usize> {
    let d = basis.len();
    if d == 0 {
        return Err(Error::InvalidParameter("empty basis".into()));
    }
    for (a, u) in basis.iter().enumerate() {
        if u.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: u.dim(),
            });
        }
        for v in &basis[a + 1..] {
            let ov = u.inner(v).norm();
            if ov > BASIS_TOL {
                return Err(Error::NotOrthogonal(ov));
            }
        }
    }
    Ok(d)
}

/// Two orthonormal bases and the selected indices.
#[derive(Debug, Clone)]
pub struct ProjectorPair {
    basis_b: Vec<StateVector>,
    basis_c: Vec<StateVector>,
    pub i: usize,
    pub j: usize,
}

impl ProjectorPair {
    pub fn new(basis_b: Vec<StateVector>, basis_c: Vec<StateVector>, i: usize, j: usize) -> Result<Self> {
        let d = check_basis(&basis_b)?;
        let dc = check_basis(&basis_c)?;
        if dc != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: dc,
            });
        }
        for idx in [i, j] {
            if idx >= d {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    max: d - 1,
                });
            }
        }
        Ok(Self {
            basis_b,
            basis_c,
            i,
            j,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis_b.len()
    }

    /// ⟨ψ_i|φ_j⟩.
    pub fn overlap(&self) -> C64 {
        self.basis_b[self.i].inner(&self.basis_c[self.j])
    }

    /// Π_i(B)Π_j(C) = |ψ_i⟩⟨ψ_i|φ_j⟩⟨φ_j|.
    pub fn product_operator(&self) -> ComplexMatrix {
        let psi = self.basis_b[self.i].as_vector();
        let phi = self.basis_c[self.j].as_vector();
        psi * phi.adjoint() * self.overlap()
    }

    /// ⟨ψ|ψ_i⟩⟨ψ_i|φ_j⟩⟨φ_j|ψ⟩.
    pub fn direct_value(&self, psi: &StateVector) -> C64 {
        psi.inner(&self.basis_b[self.i]) * self.overlap() * self.basis_c[self.j].inner(psi)
    }
}

/// U(m) = e^{iη} Σ_k |ψ_{k⊕m}⟩⟨φ_k|.
pub fn projector_product_unitary(pp: &ProjectorPair) -> Result<ComplexMatrix> {
    let ov = pp.overlap();
    if ov.norm() <= ZERO_OVERLAP_TOL {
        return Err(Error::ZeroOverlap(ov.norm()));
    }
    let d = pp.dim();
    let phase = ov / ov.norm();
    let m = (pp.i + d - pp.j) % d;
    let mut u = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        u += pp.basis_b[(k + m) % d].as_vector() * pp.basis_c[k].as_vector().adjoint();
    }
    Ok(u * phase)
}

/// R = |⟨ψ_i|φ_j⟩| |φ_j⟩⟨φ_j|.
pub fn projector_product_psd(pp: &ProjectorPair) -> ComplexMatrix {
    pp.basis_c[pp.j].projector().scale(pp.overlap().norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiracPoint {
    pub value: C64,
    pub weak: WeakValueResult,
}

/// ⟨ψ|Π_i(B)Π_j(C)|ψ⟩ from the weak value of R post-selected in U†|ψ⟩.
pub fn dirac_distribution_point(pp: &ProjectorPair, psi: &StateVector) -> Result<DiracPoint> {
    if psi.dim() != pp.dim() {
        return Err(Error::DimensionMismatch {
            expected: pp.dim(),
            found: psi.dim(),
        });
    }
    let u = projector_product_unitary(pp)?;
    let r = projector_product_psd(pp);
    let weak = expectation_from_factors(&u, &r, psi)?;
    let value = weak.reconstructed_expectation;
    let direct = pp.direct_value(psi);
    if (value - direct).norm() > 1e-12 {
        return Err(Error::invariant(
            "projector product via weak value equals the overlap product",
            format!("{value} vs {direct}"),
        ));
    }
    Ok(DiracPoint { value, weak })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiracTable {
    /// values[i][j] = ⟨ψ|Π_i(B)Π_j(C)|ψ⟩.
    pub values: Vec<Vec<C64>>,
    /// Points where ⟨ψ_i|φ_j⟩ = 0: U is undefined there and the value is exactly 0.
    pub protocol_undefined: Vec<Vec<bool>>,
}

impl DiracTable {
    pub fn grand_sum(&self) -> C64 {
        self.values.iter().flatten().sum()
    }

    /// Σ_i values[i][j] for each j.
    pub fn column_sums(&self) -> Vec<C64> {
        let d = self.values.len();
        (0..d).map(|j| (0..d).map(|i| self.values[i][j]).sum()).collect()
    }

    /// Σ_j values[i][j] for each i.
    pub fn row_sums(&self) -> Vec<C64> {
        self.values.iter().map(|row| row.iter().sum()).collect()
    }
}

/// The full d×d table.
pub fn dirac_distribution_full(
    basis_b: &[StateVector],
    basis_c: &[StateVector],
    psi: &StateVector,
) -> Result<DiracTable> {
    let d = check_basis(basis_b)?;
    let dc = check_basis(basis_c)?;
    if dc != d || psi.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if dc != d { dc } else { psi.dim() },
        });
    }
    let points: Vec<(C64, bool)> = (0..d * d)
        .into_par_iter()
        .map(|idx| {
            let pp = ProjectorPair {
                basis_b: basis_b.to_vec(),
                basis_c: basis_c.to_vec(),
                i: idx / d,
                j: idx % d,
            };
            if pp.overlap().norm() <= ZERO_OVERLAP_TOL {
                return Ok((c64(0.0, 0.0), true));
            }
            Ok((dirac_distribution_point(&pp, psi)?.value, false))
        })
        .collect::<Result<_>>()?;
    let values = points
        .chunks(d)
        .map(|row| row.iter().map(|p| p.0).collect())
        .collect();
    let protocol_undefined = points
        .chunks(d)
        .map(|row| row.iter().map(|p| p.1).collect())
        .collect();
    Ok(DiracTable {
        values,
        protocol_undefined,
    })
}

pub fn computational_basis(d: usize) -> Vec<StateVector> {
    (0..d)
        .map(|k| StateVector::basis(d, k).expect("index in range"))
        .collect()
}

/// |f_k⟩ = d^{-1/2} Σ_n e^{2πikn/d}|n⟩.
pub fn fourier_basis(d: usize) -> Vec<StateVector> {
    let amp = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|k| {
            let v = (0..d)
                .map(|n| C64::from_polar(amp, 2.0 * PI * ((k * n) % d) as f64 / d as f64))
                .collect();
            StateVector::new(v).expect("Fourier vectors are normalized")
        })
        .collect()
}

/// Columns of a unitary as a basis.
pub fn basis_from_unitary(u: &ComplexMatrix) -> Result<Vec<StateVector>> {
    linalg::check_square(u)?;
    (0..u.ncols())
        .map(|k| StateVector::normalize_vector(u.column(k).into_owned()))
        .collect()
}
