//! Dense complex linear algebra: adjoints, Hermitian eigendecomposition,
//! SVD, PSD square roots and the polar decomposition.
//!
//! Eigen- and singular-value kernels come from `nalgebra`; this module pins
//! ordering, phase conventions and tolerances on top of them so that every
//! downstream computation is reproducible.

use nalgebra::linalg::{SymmetricEigen, SVD};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::{c64, ComplexMatrix, C64};

/// Relative Hermiticity tolerance: `max|m - m†| <= HERMITIAN_TOL * max(1, max|m|)`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues in `[-PSD_CLAMP, 0)` are rounded up to zero by [`psd_sqrt`].
pub const PSD_CLAMP: f64 = 1e-10;

/// Magnitude below which a vector component counts as zero when fixing phases.
const PHASE_PIVOT_TOL: f64 = 1e-10;

/// Conjugate transpose.
pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Builds a matrix from row-major real/imaginary pairs.
pub fn from_rows(rows: &[&[C64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

/// Diagonal matrix with real entries.
pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c64(values[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-entry norm of `a - b`. Panics on shape mismatch.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max|U†U - I|`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn is_hermitian(m: &ComplexMatrix) -> bool {
    m.is_square() && hermiticity_residual(m) <= HERMITIAN_TOL * max_abs(m).max(1.0)
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub(crate) fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    check_square(m)?;
    let res = hermiticity_residual(m);
    if res > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(res));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone, Serialize)]
pub struct HermitianEig {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    #[serde(skip)]
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    /// Reassembles `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Rotates the column so its first significant component is real and positive,
/// returning the applied phase factor.
fn fix_column_phase(m: &mut ComplexMatrix, col: usize) -> C64 {
    let pivot = (0..m.nrows())
        .map(|i| m[(i, col)])
        .find(|z| z.norm() > PHASE_PIVOT_TOL);
    match pivot {
        Some(z) => {
            let factor = z.conj() / z.norm();
            for i in 0..m.nrows() {
                m[(i, col)] *= factor;
            }
            factor
        }
        None => c64(1.0, 0.0),
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    check_hermitian(m)?;
    let n = m.nrows();
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    for col in 0..n {
        fix_column_phase(&mut vectors, col);
    }
    Ok(HermitianEig { values, vectors })
}

/// The unique PSD square root of a Hermitian PSD matrix.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let scale = max_abs(m).max(1.0);
    if let Some(&lowest) = eig.values.first() {
        if lowest < -PSD_CLAMP * scale {
            return Err(Error::NegativeEigenvalue(lowest));
        }
    }
    let root = eig.map(|lambda| c64(lambda.max(0.0).sqrt(), 0.0));
    Ok((&root + root.adjoint()).scale(0.5))
}

/// Singular value decomposition `a = W Σ V†`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub left: ComplexMatrix,
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    pub right: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let sigma = diag_real(&self.singular_values);
        &self.left * sigma * self.right.adjoint()
    }
}

/// SVD of a square matrix with descending singular values and the
/// phase convention applied to the right singular vectors.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    let n = check_square(a)?;
    let dec = SVD::new(a.clone(), true, true);
    let u = dec
        .u
        .ok_or_else(|| Error::invariant("svd", "left singular vectors missing"))?;
    let v_t = dec
        .v_t
        .ok_or_else(|| Error::invariant("svd", "right singular vectors missing"))?;
    let v = v_t.adjoint();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));

    let singular_values = order.iter().map(|&k| dec.singular_values[k].max(0.0)).collect();
    let mut left = DMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    let mut right = DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    for col in 0..n {
        let factor = fix_column_phase(&mut right, col);
        for i in 0..n {
            left[(i, col)] *= factor;
        }
    }
    Ok(Svd {
        left,
        singular_values,
        right,
    })
}

/// Polar factors of a square matrix: `A = U R = S U`.
#[derive(Debug, Clone)]
pub struct PolarFactors {
    pub unitary: ComplexMatrix,
    /// R = √(A†A).
    pub psd: ComplexMatrix,
    /// S = U R U† = √(AA†).
    pub left_psd: ComplexMatrix,
}

impl PolarFactors {
    /// Builds factors from `U` and `R`, deriving `S = U R U†`.
    pub fn from_right(unitary: ComplexMatrix, psd: ComplexMatrix) -> Self {
        let left = &unitary * &psd * unitary.adjoint();
        let left_psd = (&left + left.adjoint()).scale(0.5);
        Self {
            unitary,
            psd,
            left_psd,
        }
    }

    /// Builds factors from `U` and `S` (A = SU), deriving `R = U† S U`.
    pub fn from_left(unitary: ComplexMatrix, left_psd: ComplexMatrix) -> Self {
        let right = unitary.adjoint() * &left_psd * &unitary;
        let psd = (&right + right.adjoint()).scale(0.5);
        Self {
            unitary,
            psd,
            left_psd,
        }
    }

    /// U·R.
    pub fn product(&self) -> ComplexMatrix {
        &self.unitary * &self.psd
    }

    /// S·U.
    pub fn left_product(&self) -> ComplexMatrix {
        &self.left_psd * &self.unitary
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }
}

/// Polar decomposition via the SVD: `R = VΣV†`, `U = WV†`, `S = WΣW†`.
///
/// Singular input is allowed; `U` is then the SVD-canonical completion.
pub fn polar_decompose(a: &ComplexMatrix) -> Result<PolarFactors> {
    let dec = svd(a)?;
    let sigma = diag_real(&dec.singular_values);
    let r = &dec.right * &sigma * dec.right.adjoint();
    let s = &dec.left * &sigma * dec.left.adjoint();
    let u = &dec.left * dec.right.adjoint();
    Ok(PolarFactors {
        unitary: u,
        psd: (&r + r.adjoint()).scale(0.5),
        left_psd: (&s + s.adjoint()).scale(0.5),
    })
}

/// Polar decomposition with the null-space freedom of `U` spent on making
/// |⟨ψ|U|ψ⟩| as large as possible.
///
/// For singular `a`, each left singular vector paired with σ = 0 can take any
/// phase without changing `U R`. Aligning those terms of ⟨ψ|U|ψ⟩ with the
/// rest gives |⟨ψ|U|ψ⟩| = |a₀| + Σ|b_k|, the maximum over such phases.
pub fn polar_decompose_aligned(a: &ComplexMatrix, psi: &DVector<C64>) -> Result<PolarFactors> {
    let mut dec = svd(a)?;
    let n = dec.singular_values.len();
    if psi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: psi.len(),
        });
    }
    let top = dec.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = PSD_CLAMP * top.max(1.0);
    let term = |dec: &Svd, k: usize| psi.dotc(&dec.left.column(k)) * dec.right.column(k).dotc(psi);
    let kernel: Vec<usize> = (0..n).filter(|&k| dec.singular_values[k] <= cutoff).collect();
    if !kernel.is_empty() {
        let base: C64 = (0..n)
            .filter(|k| !kernel.contains(k))
            .map(|k| term(&dec, k))
            .sum();
        let mut target = base;
        for &k in &kernel {
            let b = term(&dec, k);
            if b.norm() == 0.0 {
                continue;
            }
            let reference = if target.norm() > 0.0 { target } else { b };
            let phase = C64::from_polar(1.0, reference.arg() - b.arg());
            for i in 0..n {
                dec.left[(i, k)] *= phase;
            }
            target += b * phase;
        }
    }
    let sigma = diag_real(&dec.singular_values);
    let r = &dec.right * &sigma * dec.right.adjoint();
    let s = &dec.left * &sigma * dec.left.adjoint();
    Ok(PolarFactors {
        unitary: &dec.left * dec.right.adjoint(),
        psd: (&r + r.adjoint()).scale(0.5),
        left_psd: (&s + s.adjoint()).scale(0.5),
    })
}

/// Eigenvalues of an arbitrary square complex matrix via the Schur form.
pub fn general_eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    check_square(m)?;
    m.clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::invariant("general_eigenvalues", "Schur form did not converge"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_matrix, rng};
    use proptest::prelude::*;

    fn z(re: f64, im: f64) -> C64 {
        c64(re, im)
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(adjoint(&identity(3)), identity(3));
        let nil = from_rows(&[&[z(0., 0.), z(1., 0.)], &[z(0., 0.), z(0., 0.)]]);
        let expect = from_rows(&[&[z(0., 0.), z(0., 0.)], &[z(1., 0.), z(0., 0.)]]);
        assert_eq!(adjoint(&nil), expect);
        let m = from_rows(&[&[z(0., 0.), z(0., 1.)], &[z(0., 0.), z(0., 0.)]]);
        let expect = from_rows(&[&[z(0., 0.), z(0., 0.)], &[z(0., -1.), z(0., 0.)]]);
        assert_eq!(adjoint(&m), expect);
    }

    #[test]
    fn eig_of_diagonal_and_pauli_x() {
        let e = hermitian_eig(&diag_real(&[3.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 3.0]);
        let sx = from_rows(&[&[z(0., 0.), z(1., 0.)], &[z(1., 0.), z(0., 0.)]]);
        let e = hermitian_eig(&sx).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let nil = from_rows(&[&[z(0., 0.), z(1., 0.)], &[z(0., 0.), z(0., 0.)]]);
        assert!(matches!(hermitian_eig(&nil), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eig_phase_convention_first_component_real_positive() {
        let mut r = rng(3);
        let x = random_matrix(&mut r, 4);
        let h = &x + x.adjoint();
        let e = hermitian_eig(&h).unwrap();
        for k in 0..4 {
            let first = (0..4)
                .map(|i| e.vectors[(i, k)])
                .find(|c| c.norm() > 1e-10)
                .unwrap();
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
    }

    #[test]
    fn eig_matches_quadratic_formula_on_pt_r_squared() {
        // R² = H†H for r=1, s=2, t=3, θ=π/4, solved independently as a 2×2 quadratic.
        let (r, s, t, th) = (1.0f64, 2.0f64, 3.0f64, std::f64::consts::FRAC_PI_4);
        let off = C64::from_polar(r * (s + t), -th);
        let m = from_rows(&[&[z(r * r + s * s, 0.), off], &[off.conj(), z(r * r + t * t, 0.)]]);
        let (a, d, b2) = (r * r + s * s, r * r + t * t, off.norm_sqr());
        let disc = ((a - d) * (a - d) + 4.0 * b2).sqrt();
        let oracle = [(a + d - disc) / 2.0, (a + d + disc) / 2.0];
        let e = hermitian_eig(&m).unwrap();
        for k in 0..2 {
            assert!(
                (e.values[k] - oracle[k]).abs() < 1e-12,
                "{:?} vs {:?}",
                e.values,
                oracle
            );
        }
    }

    #[test]
    fn psd_sqrt_examples() {
        let root = psd_sqrt(&diag_real(&[4.0, 9.0])).unwrap();
        assert!(max_abs_diff(&root, &diag_real(&[2.0, 3.0])) < 1e-14);
        assert!(max_abs_diff(&psd_sqrt(&identity(3)).unwrap(), &identity(3)) < 1e-14);
    }

    #[test]
    fn psd_sqrt_of_random_gram_matrix_squares_back() {
        let mut r = rng(11);
        for _ in 0..20 {
            let x = random_matrix(&mut r, 4);
            let m = x.adjoint() * &x;
            let root = psd_sqrt(&m).unwrap();
            assert!(max_abs_diff(&(&root * &root), &m) < 1e-9);
            let e = hermitian_eig(&root).unwrap();
            assert!(e.values[0] >= -1e-12);
        }
    }

    #[test]
    fn psd_sqrt_rejects_negative_and_clamps_rounding() {
        assert!(matches!(
            psd_sqrt(&diag_real(&[1.0, -1e-3])),
            Err(Error::NegativeEigenvalue(_))
        ));
        let root = psd_sqrt(&diag_real(&[1.0, -1e-12])).unwrap();
        assert_eq!(root[(1, 1)], c64(0.0, 0.0));
    }

    #[test]
    fn svd_examples() {
        let d = svd(&diag_real(&[5.0, 2.0])).unwrap();
        assert_eq!(d.singular_values, vec![5.0, 2.0]);
        let nil = from_rows(&[&[z(0., 0.), z(1., 0.)], &[z(0., 0.), z(0., 0.)]]);
        let d = svd(&nil).unwrap();
        assert!((d.singular_values[0] - 1.0).abs() < 1e-15 && d.singular_values[1].abs() < 1e-15);
        assert!(max_abs_diff(&d.reconstruct(), &nil) < 1e-15);
    }

    #[test]
    fn svd_random_5x5_reconstructs() {
        let mut r = rng(5);
        let a = random_matrix(&mut r, 5);
        let d = svd(&a).unwrap();
        assert!(max_abs_diff(&d.reconstruct(), &a) < 1e-9);
        assert!(unitarity_residual(&d.left) < 1e-9);
        assert!(unitarity_residual(&d.right) < 1e-9);
        assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn polar_examples() {
        let p = polar_decompose(&identity(2)).unwrap();
        assert!(max_abs_diff(&p.unitary, &identity(2)) < 1e-15);
        assert!(max_abs_diff(&p.psd, &identity(2)) < 1e-15);

        let p = polar_decompose(&diag_real(&[2.0, -3.0])).unwrap();
        assert!(max_abs_diff(&p.psd, &diag_real(&[2.0, 3.0])) < 1e-14);
        assert!(max_abs_diff(&p.unitary, &diag_real(&[1.0, -1.0])) < 1e-14);
    }

    #[test]
    fn polar_of_pt_hamiltonian_special_case() {
        // s = t = 2, r = 1, θ = 0.3: R = [[s, r e^{-iθ}], [r e^{iθ}, s]], U = σx.
        let (r, s, th) = (1.0, 2.0, 0.3);
        let h = from_rows(&[
            &[C64::from_polar(r, th), z(s, 0.)],
            &[z(s, 0.), C64::from_polar(r, -th)],
        ]);
        let p = polar_decompose(&h).unwrap();
        let r_expect = from_rows(&[
            &[z(s, 0.), C64::from_polar(r, -th)],
            &[C64::from_polar(r, th), z(s, 0.)],
        ]);
        let sx = from_rows(&[&[z(0., 0.), z(1., 0.)], &[z(1., 0.), z(0., 0.)]]);
        assert!(max_abs_diff(&p.psd, &r_expect) < 1e-12);
        assert!(max_abs_diff(&p.unitary, &sx) < 1e-12);
    }

    #[test]
    fn eig_trace_identity() {
        let mut r = rng(17);
        for n in 2..7 {
            let x = random_matrix(&mut r, n);
            let h = &x + x.adjoint();
            let e = hermitian_eig(&h).unwrap();
            let sum: f64 = e.values.iter().sum();
            assert!((sum - trace(&h).re).abs() < 1e-9);
            let recon = e.map(|l| c64(l, 0.0));
            assert!(max_abs_diff(&recon, &h) < 1e-9);
            assert!(unitarity_residual(&e.vectors) < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn double_adjoint_is_identity(seed in any::<u64>(), n in 1usize..7) {
            let a = random_matrix(&mut rng(seed), n);
            prop_assert_eq!(adjoint(&adjoint(&a)), a);
        }

        #[test]
        fn polar_contracts_hold(seed in any::<u64>(), n in 2usize..9) {
            let a = random_matrix(&mut rng(seed), n);
            let p = polar_decompose(&a).unwrap();
            prop_assert!(unitarity_residual(&p.unitary) < 1e-10);
            prop_assert!(max_abs_diff(&p.product(), &a) < 1e-10);
            prop_assert!(max_abs_diff(&p.left_product(), &a) < 1e-10);
            let e = hermitian_eig(&p.psd).unwrap();
            prop_assert!(e.values[0] >= -1e-10);
            let s = &p.unitary * &p.psd * p.unitary.adjoint();
            prop_assert!(max_abs_diff(&s, &p.left_psd) < 1e-10);
        }

        #[test]
        fn aligned_gauge_never_loses_overlap(seed in any::<u64>(), n in 2usize..7, rank in 1usize..6) {
            let mut r = rng(seed);
            let a = crate::sampling::random_rank_deficient(&mut r, n, rank.min(n - 1));
            let psi = crate::sampling::random_state(&mut r, n);
            let v = psi.as_vector();
            let plain = polar_decompose(&a).unwrap();
            let aligned = polar_decompose_aligned(&a, v).unwrap();
            prop_assert!(unitarity_residual(&aligned.unitary) < 1e-10);
            prop_assert!(max_abs_diff(&aligned.product(), &a) < 1e-10);
            prop_assert!(max_abs_diff(&aligned.psd, &plain.psd) < 1e-10);
            let ov = |u: &ComplexMatrix| v.dotc(&(u * v)).norm();
            prop_assert!(ov(&aligned.unitary) >= ov(&plain.unitary) - 1e-12);
        }
    }

    #[test]
    fn aligned_gauge_rescues_nilpotent_overlap() {
        // |0><1| on (|0> + |1>)/sqrt2: some null-space completions give zero overlap.
        let a = from_rows(&[&[z(0.0, 0.0), z(1.0, 0.0)], &[z(0.0, 0.0), z(0.0, 0.0)]]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = DVector::from_vec(vec![z(h, 0.0), z(h, 0.0)]);
        let p = polar_decompose_aligned(&a, &psi).unwrap();
        assert!(max_abs_diff(&p.product(), &a) < 1e-15);
        let ov = psi.dotc(&(&p.unitary * &psi));
        assert!((ov.norm() - 1.0).abs() < 1e-12, "{ov}");
    }

    #[test]
    fn aligned_gauge_rejects_wrong_dimension() {
        let psi = DVector::from_element(3, z(1.0, 0.0));
        assert!(polar_decompose_aligned(&identity(2), &psi).is_err());
    }
}
