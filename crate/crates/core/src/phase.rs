//! Finite-dimensional phase formalism on the truncated Fock space
//! `span{|0⟩, …, |s⟩}`.
//!
//! Phase states `|θ_m⟩ = (s+1)^{-1/2} Σ_n e^{inθ_m}|n⟩` with
//! `θ_m = θ₀ + 2πm/(s+1)` form an orthonormal basis, and the phase operator is
//! diagonal in it. The exponentials `e^{±iφ̂}` are built spectrally, which
//! gives the exact polar forms `a = e^{iφ̂}√N` and `a† = √N e^{-iφ̂}`.

use std::f64::consts::PI;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, PolarFactors};
use crate::state::StateVector;
use crate::weak::WeakValueResult;
use crate::{c64, ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceConfig {
    /// Truncation; the Hilbert space has dimension `s + 1`.
    pub s: usize,
    pub theta0: f64,
}

impl PhaseSpaceConfig {
    pub fn new(s: usize, theta0: f64) -> Result<Self> {
        if s < 1 {
            return Err(Error::InvalidParameter("phase space needs s >= 1".into()));
        }
        if !theta0.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { s, theta0 })
    }

    pub fn dim(&self) -> usize {
        self.s + 1
    }

    /// θ_m = θ₀ + 2πm/(s+1).
    pub fn theta(&self, m: usize) -> f64 {
        self.theta0 + 2.0 * PI * m as f64 / self.dim() as f64
    }

    /// Spectral kernel `e^{inθ_m}` evaluated through a root-of-unity table so
    /// that large `n·m` does not lose phase accuracy.
    fn kernel(&self) -> PhaseKernel {
        let d = self.dim();
        let roots = (0..d)
            .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64))
            .collect();
        let offsets = (0..d)
            .map(|n| C64::from_polar(1.0, n as f64 * self.theta0))
            .collect();
        PhaseKernel { d, roots, offsets }
    }
}

struct PhaseKernel {
    d: usize,
    roots: Vec<C64>,
    offsets: Vec<C64>,
}

impl PhaseKernel {
    /// e^{inθ_m}.
    fn at(&self, n: usize, m: usize) -> C64 {
        self.offsets[n] * self.roots[(n * m) % self.d]
    }

    /// Σ_m e^{i·sign·θ_m}|θ_m⟩⟨θ_m|v⟩ in O(d²).
    fn apply_exp(&self, cfg: &PhaseSpaceConfig, sign: f64, v: &DVector<C64>) -> DVector<C64> {
        let d = self.d;
        let norm = 1.0 / d as f64;
        let weights: Vec<C64> = (0..d)
            .map(|m| {
                let coeff: C64 = (0..d).map(|n| self.at(n, m).conj() * v[n]).sum();
                coeff * C64::from_polar(norm, sign * cfg.theta(m))
            })
            .collect();
        DVector::from_fn(d, |n, _| (0..d).map(|m| self.at(n, m) * weights[m]).sum())
    }
}

/// |θ_m⟩.
pub fn phase_state(cfg: &PhaseSpaceConfig, m: usize) -> Result<StateVector> {
    if m > cfg.s {
        return Err(Error::IndexOutOfRange { index: m, max: cfg.s });
    }
    let kernel = cfg.kernel();
    let amp = 1.0 / (cfg.dim() as f64).sqrt();
    StateVector::new((0..cfg.dim()).map(|n| kernel.at(n, m) * amp).collect())
}

fn spectral_sum(cfg: &PhaseSpaceConfig, f: impl Fn(f64) -> C64) -> ComplexMatrix {
    let d = cfg.dim();
    let kernel = cfg.kernel();
    let mut out = ComplexMatrix::zeros(d, d);
    for m in 0..d {
        let weight = f(cfg.theta(m)) / d as f64;
        for i in 0..d {
            let left = kernel.at(i, m) * weight;
            for j in 0..d {
                out[(i, j)] += left * kernel.at(j, m).conj();
            }
        }
    }
    out
}

/// φ̂ = Σ_m θ_m |θ_m⟩⟨θ_m|.
pub fn phase_operator(cfg: &PhaseSpaceConfig) -> ComplexMatrix {
    let phi = spectral_sum(cfg, |theta| c64(theta, 0.0));
    (&phi + phi.adjoint()).scale(0.5)
}

/// e^{i·sign·φ̂} as a matrix; `sign` is +1 or −1.
pub fn phase_exp(cfg: &PhaseSpaceConfig, sign: f64) -> ComplexMatrix {
    spectral_sum(cfg, |theta| C64::from_polar(1.0, sign * theta))
}

/// e^{i·sign·φ̂}|v⟩ without forming the matrix.
pub fn apply_phase_exp(cfg: &PhaseSpaceConfig, sign: f64, v: &DVector<C64>) -> Result<DVector<C64>> {
    if v.len() != cfg.dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim(),
            found: v.len(),
        });
    }
    Ok(cfg.kernel().apply_exp(cfg, sign, v))
}

pub fn number_operator(s: usize) -> ComplexMatrix {
    let diag: Vec<f64> = (0..=s).map(|n| n as f64).collect();
    linalg::diag_real(&diag)
}

/// √N̂ = diag(0, 1, √2, …, √s).
pub fn sqrt_number_operator(s: usize) -> ComplexMatrix {
    let diag: Vec<f64> = (0..=s).map(|n| (n as f64).sqrt()).collect();
    linalg::diag_real(&diag)
}

/// Truncated lowering operator, a|n⟩ = √n|n−1⟩.
pub fn lowering_operator(s: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(s + 1, s + 1);
    for n in 1..=s {
        a[(n - 1, n)] = c64((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn raising_operator(s: usize) -> ComplexMatrix {
    lowering_operator(s).adjoint()
}

/// a = e^{iφ̂}√N̂ as right polar factors.
pub fn annihilation_polar(cfg: &PhaseSpaceConfig) -> PolarFactors {
    PolarFactors::from_right(phase_exp(cfg, 1.0), sqrt_number_operator(cfg.s))
}

/// a† = √N̂ e^{−iφ̂} as left polar factors.
pub fn creation_polar(cfg: &PhaseSpaceConfig) -> PolarFactors {
    PolarFactors::from_left(phase_exp(cfg, -1.0), sqrt_number_operator(cfg.s))
}

/// ⟨ψ|a†|ψ⟩ as the weak value of √N̂ (pre-selected in |χ⟩ = e^{−iφ̂}|ψ⟩,
/// post-selected in |ψ⟩) times ⟨ψ|χ⟩.
pub fn creation_expectation_via_weak(cfg: &PhaseSpaceConfig, psi: &StateVector) -> Result<WeakValueResult> {
    let chi = apply_phase_exp(cfg, -1.0, psi.as_vector())?;
    let c = psi.amplitudes();
    let numerator: C64 = (1..cfg.dim())
        .map(|n| c[n].conj() * (n as f64).sqrt() * chi[n])
        .sum();
    Ok(WeakValueResult::from_parts(numerator, psi.inner_vector(&chi)))
}

/// Σ_m c_{m−1} c_m* √m.
pub fn creation_expectation_direct(psi: &StateVector) -> C64 {
    let c = psi.amplitudes();
    (1..c.len())
        .map(|m| c[m - 1] * c[m].conj() * (m as f64).sqrt())
        .sum()
}

/// Σ_m e^{iνm}|m⟩/√(s+1).
pub fn equal_superposition(s: usize, nu: f64) -> StateVector {
    let amp = 1.0 / ((s + 1) as f64).sqrt();
    StateVector::new((0..=s).map(|m| C64::from_polar(amp, nu * m as f64)).collect())
        .expect("unit-modulus amplitudes are normalized")
}

/// Leading terms r/(r+1)(s+1)^{(r+1)/r} − ½(s+1)^{1/r} of the sum Σ m^{1/r}.
pub fn ramanujan_leading(s: usize, r: f64) -> f64 {
    let n = (s + 1) as f64;
    r / (r + 1.0) * n.powf((r + 1.0) / r) - 0.5 * n.powf(1.0 / r)
}

/// Φ_s(r) from the direct sum Σ_{m=1}^{s} m^{1/r}.
pub fn ramanujan_remainder(s: usize, r: f64) -> f64 {
    let direct: f64 = (1..=s).map(|m| (m as f64).powf(1.0 / r)).sum();
    ramanujan_leading(s, r) - direct
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RamanujanReport {
    pub s: usize,
    /// Σ√m recovered from the creation-operator expectation.
    pub direct_sum: f64,
    /// Imaginary part left over after undoing the e^{−iν}/(s+1) factor.
    pub imag_residue: f64,
    /// (2/3)(s+1)^{3/2} − ½(s+1)^{1/2}.
    pub formula_value_minus_phi: f64,
    pub phi_s_2: f64,
}

/// Tolerance on the Φ_s(2) ∈ [0, ½] band.
pub const RAMANUJAN_BAND_TOL: f64 = 1e-9;

/// Recovers Σ√m = e^{iν}(s+1)⟨ψ|a†|ψ⟩ from the equal superposition and checks
/// the remainder band.
pub fn ramanujan_verify(s: usize, nu: f64) -> Result<RamanujanReport> {
    let cfg = PhaseSpaceConfig::new(s, 0.0)?;
    let psi = equal_superposition(s, nu);
    let wv = creation_expectation_via_weak(&cfg, &psi)?;
    let recovered = wv.reconstructed_expectation * C64::from_polar((s + 1) as f64, nu);
    let leading = ramanujan_leading(s, 2.0);
    let phi = leading - recovered.re;
    if !(-RAMANUJAN_BAND_TOL..=0.5 + RAMANUJAN_BAND_TOL).contains(&phi) {
        return Err(Error::invariant(
            "remainder of the square-root sum lies in [0, 1/2]",
            format!("s = {s}: phi = {phi}"),
        ));
    }
    Ok(RamanujanReport {
        s,
        direct_sum: recovered.re,
        imag_residue: recovered.im,
        formula_value_minus_phi: leading,
        phi_s_2: phi,
    })
}

/// [`ramanujan_verify`] for s = 1..=s_max, in order.
pub fn ramanujan_sweep(s_max: usize, nu: f64) -> Result<Vec<RamanujanReport>> {
    (1..=s_max)
        .into_par_iter()
        .map(|s| ramanujan_verify(s, nu))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, max_abs_diff, unitarity_residual};
    use crate::sampling::{random_state, rng};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cfg(s: usize, theta0: f64) -> PhaseSpaceConfig {
        PhaseSpaceConfig::new(s, theta0).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn two_level_phase_states() {
        let c = cfg(1, 0.0);
        let s0 = phase_state(&c, 0).unwrap();
        let s1 = phase_state(&c, 1).unwrap();
        assert!(close(s0.amplitudes()[1], c64(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(s1.amplitudes()[1], c64(-FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(matches!(phase_state(&c, 2), Err(Error::IndexOutOfRange { .. })));
        assert!(PhaseSpaceConfig::new(0, 0.0).is_err());
    }

    #[test]
    fn phase_states_are_orthonormal() {
        for s in [3, 17, 64] {
            let c = cfg(s, 0.7);
            let states: Vec<_> = (0..=s).map(|m| phase_state(&c, m).unwrap()).collect();
            for (i, a) in states.iter().enumerate() {
                for (j, b) in states.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(close(a.inner(b), c64(expect, 0.0), 1e-12));
                }
            }
        }
    }

    #[test]
    fn phase_operator_spectrum_and_trace() {
        let c = cfg(1, 0.0);
        let eig = hermitian_eig(&phase_operator(&c)).unwrap();
        assert!((eig.values[0]).abs() < 1e-14 && (eig.values[1] - PI).abs() < 1e-14);

        let c = cfg(5, 0.3);
        let phi = phase_operator(&c);
        let expected: f64 = (0..=5).map(|m| c.theta(m)).sum();
        assert!(close(linalg::trace(&phi), c64(expected, 0.0), 1e-12));
        let eplus = phase_exp(&c, 1.0);
        for m in 0..=5 {
            let st = phase_state(&c, m).unwrap();
            let out = &eplus * st.as_vector();
            let want = st.as_vector() * C64::from_polar(1.0, c.theta(m));
            assert!((out - want).norm() < 1e-10);
        }
    }

    #[test]
    fn lowering_exponential_shifts_number_states() {
        let c = cfg(4, 0.9);
        let eminus = phase_exp(&c, -1.0);
        assert!(unitarity_residual(&eminus) < 1e-12);
        for n in 0..4 {
            let col = eminus.column(n);
            assert!(close(col[n + 1], c64(1.0, 0.0), 1e-12));
        }
        let wrap = C64::from_polar(1.0, -5.0 * 0.9);
        assert!(close(eminus[(0, 4)], wrap, 1e-12));

        let v = random_state(&mut rng(4), 5);
        let fast = apply_phase_exp(&c, -1.0, v.as_vector()).unwrap();
        assert!((fast - &eminus * v.as_vector()).norm() < 1e-12);
    }

    #[test]
    fn polar_forms_reproduce_ladder_operators() {
        for s in [1, 4, 12] {
            let c = cfg(s, 0.7);
            let a = annihilation_polar(&c);
            assert!(max_abs_diff(&a.product(), &lowering_operator(s)) < 1e-12);
            let ad = creation_polar(&c);
            assert!(max_abs_diff(&ad.left_product(), &raising_operator(s)) < 1e-12);
            assert!(max_abs_diff(&ad.product(), &raising_operator(s)) < 1e-12);
            let n = a.product().adjoint() * a.product();
            assert!(max_abs_diff(&n, &number_operator(s)) < 1e-12);
            // R is unique even though U is not for this singular matrix.
            let numeric = linalg::polar_decompose(&lowering_operator(s)).unwrap();
            assert!(max_abs_diff(&numeric.psd, &a.psd) < 1e-10);
        }
    }

    #[test]
    fn phase_state_moments() {
        let s = 3;
        let c = cfg(s, 0.0);
        let st = phase_state(&c, 0).unwrap();
        let adag = raising_operator(s);
        let sum: f64 = (0..=s).map(|n| (n as f64).sqrt()).sum();
        let got = st.expectation(&adag).unwrap();
        assert!(close(got, c64(sum / 4.0, 0.0), 1e-14));
        assert!((got.re - 1.036_566_092_485_493).abs() < 1e-14);

        for s in [2, 7, 30] {
            for theta0 in [0.0, 0.7] {
                let c = cfg(s, theta0);
                let n = number_operator(s);
                let sq = &raising_operator(s) * &raising_operator(s);
                let pair_sum: f64 = (0..=s).map(|n| ((n * n.saturating_sub(1)) as f64).sqrt()).sum();
                for m in 0..=s {
                    let st = phase_state(&c, m).unwrap();
                    assert!(close(
                        st.expectation(&n).unwrap(),
                        c64(s as f64 / 2.0, 0.0),
                        1e-12
                    ));
                    let want = C64::from_polar(pair_sum / (s + 1) as f64, -2.0 * c.theta(m));
                    assert!(close(st.expectation(&sq).unwrap(), want, 1e-12));
                }
            }
        }
    }

    #[test]
    fn creation_expectation_routes_agree() {
        let c = cfg(4, 0.0);
        let psi = equal_superposition(4, 0.3);
        let res = creation_expectation_via_weak(&c, &psi).unwrap();
        let want = C64::from_polar(6.146_264_369_941_973 / 5.0, -0.3);
        assert!(close(res.reconstructed_expectation, want, 1e-12));
        assert!(!res.used_fallback());

        // Weak value of √N̂ against its closed form.
        let amps = psi.amplitudes();
        let overlap: C64 =
            (1..=4).map(|m| amps[m].conj() * amps[m - 1]).sum::<C64>() + amps[0].conj() * amps[4];
        let w = creation_expectation_direct(&psi) / overlap;
        assert!(close(res.weak_value.unwrap(), w, 1e-12));

        for d in 2..=8 {
            let c = cfg(d - 1, 0.4);
            let mut r = rng(d as u64);
            for _ in 0..50 {
                let psi = random_state(&mut r, d);
                let res = creation_expectation_via_weak(&c, &psi).unwrap();
                let oracle = psi.expectation(&raising_operator(d - 1)).unwrap();
                assert!(close(res.reconstructed_expectation, oracle, 1e-12));
            }
        }
    }

    #[test]
    fn number_state_uses_fallback() {
        let c = cfg(5, 0.0);
        let psi = StateVector::basis(6, 2).unwrap();
        let res = creation_expectation_via_weak(&c, &psi).unwrap();
        assert!(res.used_fallback());
        assert!(res.reconstructed_expectation.norm() < 1e-14);
    }

    #[test]
    fn ramanujan_small_cases() {
        let r1 = ramanujan_verify(1, 0.0).unwrap();
        assert!((r1.direct_sum - 1.0).abs() < 1e-12);
        assert!((r1.formula_value_minus_phi - 1.178_511_301_977_579).abs() < 1e-12);
        assert!((r1.phi_s_2 - 0.178_511_301_977_579).abs() < 1e-12);

        let r4 = ramanujan_verify(4, 0.3).unwrap();
        assert!((r4.direct_sum - 6.146_264_369_941_973).abs() < 1e-12);
        assert!((r4.formula_value_minus_phi - 6.335_525_936_249_404).abs() < 1e-10);
        assert!((r4.phi_s_2 - 0.189_261_566_307_431_8).abs() < 1e-10);
        assert!(r4.imag_residue.abs() < 1e-12);
        assert!((r4.phi_s_2 - ramanujan_remainder(4, 2.0)).abs() < 1e-12);
    }
}
