//! Kraus channels, input–output fidelity and Kraus-operator uncertainty.
//!
//! For a pure input and a trace-preserving channel, F = Σ_k |⟨E_k⟩|² and
//! therefore F + Σ_k ΔE_k² = 1. Each ⟨E_k⟩ is obtainable from the weak value
//! of the PSD part of E_k, so the fidelity is measurable without tomography.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eig, PolarFactors};
use crate::pointer::{reconstruct_expectation_stochastic, PointerConfig};
use crate::state::StateVector;
use crate::uncertainty::{uncertainty_bound, variance_nonhermitian};
use crate::weak::expectation_via_right_polar;
use crate::{c64, ComplexMatrix, C64};

/// Tolerance on Σ E_k†E_k = I and on density-matrix invariants.
pub const CHANNEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel needs at least one Kraus operator".into()))?;
        let dim = linalg::check_square(first)?;
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for e in &kraus {
            if linalg::check_square(e)? != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.nrows(),
                });
            }
            sum += e.adjoint() * e;
        }
        let residual = linalg::max_abs_diff(&sum, &linalg::identity(dim));
        if residual > CHANNEL_TOL {
            return Err(Error::NotTracePreserving(residual));
        }
        Ok(Self { dim, kraus })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![linalg::identity(dim)],
        }
    }
}

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        linalg::check_square(&m)?;
        let eig = hermitian_eig(&m)?;
        let tr = linalg::trace(&m);
        if (tr - c64(1.0, 0.0)).norm() > CHANNEL_TOL {
            return Err(Error::InvalidParameter(format!("trace {tr} != 1")));
        }
        if eig.values[0] < -CHANNEL_TOL {
            return Err(Error::NegativeEigenvalue(eig.values[0]));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn fidelity_with(&self, psi: &StateVector) -> Result<f64> {
        Ok(psi.expectation(&self.0)?.re)
    }
}

/// ρ = Σ_k E_k|ψ⟩⟨ψ|E_k†.
pub fn apply_channel(ch: &KrausChannel, psi: &StateVector) -> Result<DensityMatrix> {
    if psi.dim() != ch.dim {
        return Err(Error::DimensionMismatch {
            expected: ch.dim,
            found: psi.dim(),
        });
    }
    let input = psi.projector();
    let mut rho = ComplexMatrix::zeros(ch.dim, ch.dim);
    for e in &ch.kraus {
        rho += e * &input * e.adjoint();
    }
    DensityMatrix::new(rho)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelReport {
    /// ⟨ψ|ρ|ψ⟩.
    pub fidelity: f64,
    /// Σ_k |⟨E_k⟩|² with each ⟨E_k⟩ from the weak-value route.
    pub fidelity_weak: f64,
    pub variance_sum: f64,
    pub per_kraus_variance: Vec<f64>,
    pub two_kraus: Option<TwoKrausBounds>,
}

/// Fidelity by two routes, with F + Σ ΔE_k² = 1 asserted.
pub fn channel_fidelity(ch: &KrausChannel, psi: &StateVector) -> Result<ChannelReport> {
    let rho = apply_channel(ch, psi)?;
    let fidelity = rho.fidelity_with(psi)?;
    let mut fidelity_weak = 0.0;
    let mut per_kraus_variance = Vec::with_capacity(ch.kraus.len());
    for e in &ch.kraus {
        fidelity_weak += expectation_via_right_polar(e, psi)?
            .reconstructed_expectation
            .norm_sqr();
        per_kraus_variance.push(variance_nonhermitian(e, psi)?);
    }
    let variance_sum: f64 = per_kraus_variance.iter().sum();

    if (fidelity - fidelity_weak).abs() > 1e-12 {
        return Err(Error::invariant(
            "fidelity from rho equals weak-value fidelity",
            format!("{fidelity} vs {fidelity_weak}"),
        ));
    }
    if (fidelity + variance_sum - 1.0).abs() > CHANNEL_TOL {
        return Err(Error::invariant(
            "fidelity plus Kraus variances equals one",
            format!("{fidelity} + {variance_sum}"),
        ));
    }
    let two_kraus = if ch.kraus.len() == 2 {
        Some(two_kraus_bounds(ch, psi)?)
    } else {
        None
    };
    Ok(ChannelReport {
        fidelity,
        fidelity_weak,
        variance_sum,
        per_kraus_variance,
        two_kraus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoKrausBounds {
    /// (1 − F)/2.
    pub upper: f64,
    /// ΔE₁ΔE₂.
    pub product: f64,
    /// |⟨φ|S₁ P S₂|χ⟩| with P = I − |ψ⟩⟨ψ|, |φ⟩ = U₁|ψ⟩, |χ⟩ = U₂|ψ⟩.
    pub lower: f64,
    /// φ[S₁ P S₂]^w_χ; `None` when ⟨φ|χ⟩ vanishes.
    pub lower_weak_value: Option<C64>,
    /// ⟨φ|χ⟩.
    pub overlap: C64,
}

/// (1−F)/2 ≥ ΔE₁ΔE₂ ≥ |⟨φ|S₁ P S₂|χ⟩| for a two-element channel.
///
/// In dimension 2, P is the projector onto the unique |ψ⊥⟩; in higher
/// dimension the full orthogonal complement is used.
pub fn two_kraus_bounds(ch: &KrausChannel, psi: &StateVector) -> Result<TwoKrausBounds> {
    if ch.kraus.len() != 2 {
        return Err(Error::WrongKrausCount {
            expected: 2,
            found: ch.kraus.len(),
        });
    }
    let fidelity = apply_channel(ch, psi)?.fidelity_with(psi)?;
    let rep = uncertainty_bound(&ch.kraus[0], &ch.kraus[1], psi)?;
    let bounds = TwoKrausBounds {
        upper: (1.0 - fidelity) / 2.0,
        product: rep.product_lhs,
        lower: rep.bound_rhs,
        lower_weak_value: rep.weak_value_bound_term,
        overlap: rep.overlap_term,
    };
    if bounds.upper < bounds.product - CHANNEL_TOL || bounds.product < bounds.lower - CHANNEL_TOL {
        return Err(Error::invariant(
            "two-Kraus bounds are ordered",
            format!("{} >= {} >= {}", bounds.upper, bounds.product, bounds.lower),
        ));
    }
    Ok(bounds)
}

/// Fidelity estimate from simulated weak measurements of each Kraus operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StochasticFidelity {
    pub estimate: f64,
    pub std_error: f64,
}

/// Σ_k |⟨E_k⟩|² with every ⟨E_k⟩ reconstructed from Monte Carlo pointer
/// readings. Kraus operator k uses seed `cfg.seed + k`.
pub fn channel_fidelity_stochastic(
    ch: &KrausChannel,
    psi: &StateVector,
    cfg: &PointerConfig,
    n_trials: usize,
) -> Result<StochasticFidelity> {
    let mut estimate = 0.0;
    let mut variance = 0.0;
    for (k, e) in ch.kraus.iter().enumerate() {
        let run = reconstruct_expectation_stochastic(e, psi, &cfg.with_seed(cfg.seed + k as u64), n_trials)?;
        let (z, se) = match (run.estimate, run.std_error) {
            (Some(z), Some(se)) => (z, se),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "no post-selected trials for Kraus operator {k}"
                )))
            }
        };
        estimate += z.norm_sqr();
        variance += (2.0 * z.re * se.re).powi(2) + (2.0 * z.im * se.im).powi(2);
    }
    Ok(StochasticFidelity {
        estimate,
        std_error: variance.sqrt(),
    })
}

/// E₁ = |0⟩⟨0| + √(1−p)|1⟩⟨1|, E₂ = √p|0⟩⟨1|.
pub fn amplitude_damping(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("damping p = {p} outside [0, 1]")));
    }
    let mut e1 = ComplexMatrix::zeros(2, 2);
    e1[(0, 0)] = c64(1.0, 0.0);
    e1[(1, 1)] = c64((1.0 - p).sqrt(), 0.0);
    let mut e2 = ComplexMatrix::zeros(2, 2);
    e2[(0, 1)] = c64(p.sqrt(), 0.0);
    KrausChannel::new(vec![e1, e2])
}

/// Left polar forms: E₁ = E₁·I and E₂ = (√p|0⟩⟨0|)·σ_x.
pub fn amplitude_damping_polar(p: f64) -> Result<[PolarFactors; 2]> {
    let ch = amplitude_damping(p)?;
    let sigma_x = linalg::from_rows(&[&[c64(0., 0.), c64(1., 0.)], &[c64(1., 0.), c64(0., 0.)]]);
    Ok([
        PolarFactors::from_left(linalg::identity(2), ch.kraus[0].clone()),
        PolarFactors::from_left(sigma_x, linalg::diag_real(&[p.sqrt(), 0.0])),
    ])
}

/// Closed-form amplitude-damping quantities for the input
/// cos(θ/2)|0⟩ + e^{iφ}sin(θ/2)|1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeDampingClosedForm {
    /// ρ = ½[e₁|0⟩⟨0| + e₂|1⟩⟨1| + e₃|0⟩⟨1| + e₃*|1⟩⟨0|].
    pub e1: f64,
    pub e2: f64,
    pub e3: C64,
    pub fidelity: f64,
    pub delta_e1: f64,
    pub delta_e2: f64,
    /// 2cosφ cos²(θ/2) sin⁴(θ/2) √p (1 − √(1−p)).
    pub lower_bound: f64,
}

pub fn amplitude_damping_closed_form(theta: f64, phi: f64, p: f64) -> AmplitudeDampingClosedForm {
    let q = (1.0 - p).sqrt();
    let (sh, ch) = (theta / 2.0).sin_cos();
    AmplitudeDampingClosedForm {
        e1: 1.0 + p + (1.0 - p) * theta.cos(),
        e2: (1.0 - p) * (1.0 - theta.cos()),
        e3: C64::from_polar(q * theta.sin(), -phi),
        fidelity: 0.25 * (3.0 + q - p + 2.0 * p * theta.cos() + (1.0 - p - q) * (2.0 * theta).cos()),
        delta_e1: (ch * sh * (1.0 - q)).abs(),
        delta_e2: p.sqrt() * sh * sh,
        lower_bound: 2.0 * phi.cos() * ch * ch * sh.powi(4) * p.sqrt() * (1.0 - q),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig2Row {
    pub p: f64,
    /// Closed-form lower bound.
    pub lower: f64,
    /// ΔE₁ΔE₂ from the Kraus matrices.
    pub product: f64,
    /// (1 − F)/2 from the output state.
    pub upper: f64,
    /// Lower bound from the weak-value (polar) route.
    pub lower_weak: f64,
}

/// Bounds on ΔE₁ΔE₂ for amplitude damping across `p_grid`.
pub fn fig2_sweep(theta: f64, phi: f64, p_grid: &[f64]) -> Result<Vec<Fig2Row>> {
    let psi = StateVector::bloch(theta, phi);
    p_grid
        .par_iter()
        .map(|&p| {
            let ch = amplitude_damping(p)?;
            let bounds = two_kraus_bounds(&ch, &psi)?;
            let closed = amplitude_damping_closed_form(theta, phi, p);
            if bounds.product < closed.lower_bound - CHANNEL_TOL {
                return Err(Error::invariant(
                    "product of Kraus deviations exceeds the closed-form lower bound",
                    format!("p = {p}: {} < {}", bounds.product, closed.lower_bound),
                ));
            }
            Ok(Fig2Row {
                p,
                lower: closed.lower_bound,
                product: bounds.product,
                upper: bounds.upper,
                lower_weak: bounds.lower,
            })
        })
        .collect()
}

/// `steps` evenly spaced points from 0 to `p_max` inclusive.
pub fn p_grid(p_max: f64, steps: usize) -> Vec<f64> {
    if steps < 2 {
        return vec![0.0];
    }
    (0..steps)
        .map(|i| p_max * i as f64 / (steps - 1) as f64)
        .collect()
}
