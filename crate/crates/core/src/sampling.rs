//! Seeded random ensembles: Gaussian matrices, Haar states and unitaries,
//! orthonormal bases and Stinespring-sampled channels.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::KrausChannel;
use crate::error::Result;
use crate::state::StateVector;
use crate::{c64, ComplexMatrix, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut impl Rng) -> C64 {
    c64(r.sample(StandardNormal), r.sample(StandardNormal))
}

/// Matrix with i.i.d. complex standard normal entries.
pub fn random_matrix(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    DMatrix::from_fn(n, n, |_, _| gaussian(r))
}

pub fn random_rect(r: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(r))
}

/// Random matrix of the given rank (product of n×rank and rank×n Gaussians).
pub fn random_rank_deficient(r: &mut impl Rng, n: usize, rank: usize) -> ComplexMatrix {
    random_rect(r, n, rank) * random_rect(r, rank, n)
}

pub fn random_hermitian(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    let x = random_matrix(r, n);
    (&x + x.adjoint()).scale(0.5)
}

/// Random PSD matrix X†X scaled to unit spectral radius.
pub fn random_psd(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    let x = random_matrix(r, n);
    let m = x.adjoint() * &x;
    let top = m.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    m.unscale(top)
}

/// Haar-random pure state.
pub fn random_state(r: &mut impl Rng, n: usize) -> StateVector {
    let v = nalgebra::DVector::from_fn(n, |_, _| gaussian(r));
    StateVector::normalize_vector(v).expect("Gaussian vector is nonzero")
}

/// Orthonormal columns from the QR factor of a Gaussian `rows×cols` matrix,
/// with the phases fixed so the ensemble is Haar.
pub fn random_isometry(r: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let qr = random_rect(r, rows, cols).qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..cols {
        let d = rr[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..rows {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

pub fn random_unitary(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_isometry(r, n, n)
}

pub fn random_basis(r: &mut impl Rng, n: usize) -> Vec<StateVector> {
    let u = random_unitary(r, n);
    (0..n)
        .map(|j| StateVector::normalize_vector(u.column(j).into_owned()).expect("unit column"))
        .collect()
}

/// A random unit vector orthogonal to `psi`.
pub fn random_orthogonal_state(r: &mut impl Rng, psi: &StateVector) -> StateVector {
    loop {
        let candidate = random_state(r, psi.dim());
        let v = candidate.as_vector() - psi.as_vector() * psi.inner(&candidate);
        if v.norm() > 1e-3 {
            return StateVector::normalize_vector(v).expect("nonzero");
        }
    }
}

/// Channel with `kraus_count` Kraus operators from a random isometry
/// C^d → C^d ⊗ C^K (Stinespring dilation).
pub fn random_channel(r: &mut impl Rng, dim: usize, kraus_count: usize) -> Result<KrausChannel> {
    let v = random_isometry(r, dim * kraus_count, dim);
    let kraus = (0..kraus_count)
        .map(|k| v.rows(k * dim, dim).into_owned())
        .collect();
    KrausChannel::new(kraus)
}
