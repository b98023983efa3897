//! Von Neumann weak measurement with a Gaussian pointer.
//!
//! The impulsive coupling `exp(-i g R ⊗ P)` (ħ = 1) translates the pointer by
//! `g·r_k` on each eigenbranch `r_k` of `R`. The pointer lives on a uniform
//! periodic grid and translations are applied spectrally, so the joint
//! evolution is exact up to rounding. After post-selecting the system, the
//! pointer's mean position and momentum shifts give the real and imaginary
//! parts of the weak value:
//!
//! ```text
//! Re w ≈ Δ⟨x⟩ / g,   Im w ≈ Δ⟨p⟩ / (2 g Var(p))
//! ```

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eig};
use crate::state::StateVector;
use crate::weak::EPS_OVERLAP;
use crate::{c64, ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerConfig {
    /// Number of grid points; must be a power of two.
    pub grid_points: usize,
    /// Grid spans `[-grid_halfwidth, grid_halfwidth)`.
    pub grid_halfwidth: f64,
    /// Position standard deviation of the initial Gaussian.
    pub sigma: f64,
    /// Coupling strength.
    pub g: f64,
    pub seed: u64,
    /// Mean momentum of the initial pointer; zero gives a real symmetric Gaussian.
    pub momentum_offset: f64,
}

impl Default for PointerConfig {
    fn default() -> Self {
        Self {
            grid_points: 1024,
            grid_halfwidth: 16.0,
            sigma: 1.0,
            g: 0.05,
            seed: 0,
            momentum_offset: 0.0,
        }
    }
}

impl PointerConfig {
    pub fn spacing(&self) -> f64 {
        2.0 * self.grid_halfwidth / self.grid_points as f64
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// Checks that the grid resolves the pointer and contains every branch shift.
    pub fn validate(&self, max_eigenvalue: f64) -> Result<()> {
        if !self.grid_points.is_power_of_two() || self.grid_points < 16 {
            return Err(Error::GridTooCoarse(format!(
                "grid_points = {} is not a power of two >= 16",
                self.grid_points
            )));
        }
        if !(self.sigma > 0.0 && self.grid_halfwidth > 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidParameter(
                "sigma and grid_halfwidth must be positive, g finite".into(),
            ));
        }
        if self.g == 0.0 {
            return Err(Error::InvalidParameter("coupling g must be nonzero".into()));
        }
        if self.sigma < 8.0 * self.spacing() {
            return Err(Error::GridTooCoarse(format!(
                "sigma = {} < 8 x spacing = {}",
                self.sigma,
                8.0 * self.spacing()
            )));
        }
        if self.g.abs() * max_eigenvalue > self.grid_halfwidth / 4.0 {
            return Err(Error::GridTooCoarse(format!(
                "largest shift g*r = {} exceeds halfwidth/4 = {}",
                self.g.abs() * max_eigenvalue,
                self.grid_halfwidth / 4.0
            )));
        }
        Ok(())
    }
}

/// Outcome of a (simulated) weak measurement with post-selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerRecord {
    pub post_prob_exact: f64,
    /// |⟨post|pre⟩|² (1 + 2 g Im(w) ⟨P⟩).
    pub post_prob_firstorder: f64,
    pub mean_position_shift: Option<f64>,
    pub mean_momentum_shift: Option<f64>,
    pub wv_estimate: Option<C64>,
    /// Standard errors of the real and imaginary parts; `None` for the exact record.
    pub wv_std_error: Option<C64>,
    /// ⟨post|R|pre⟩/⟨post|pre⟩ computed directly.
    pub exact_weak_value: C64,
    pub n_trials: usize,
    pub n_postselected: usize,
    /// Joint system ⊗ pointer norm before post-selection.
    pub joint_norm: f64,
}

/// Discrete distribution on a grid with a cumulative table for sampling.
struct GridDensity {
    points: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridDensity {
    fn new(points: Vec<f64>, weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        Self { points, cdf }
    }

    fn sample(&self, u: f64) -> f64 {
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.points.len() - 1);
        self.points[idx]
    }
}

struct Simulation {
    record: PointerRecord,
    position: GridDensity,
    momentum: GridDensity,
    initial_mean_x: f64,
    initial_mean_p: f64,
    var_p: f64,
}

fn mean_and_var(points: &[f64], weights: &[f64]) -> (f64, f64) {
    let total = pairwise_sum(weights);
    let first: Vec<f64> = points.iter().zip(weights).map(|(x, w)| x * w).collect();
    let mean = pairwise_sum(&first) / total;
    let second: Vec<f64> = points
        .iter()
        .zip(weights)
        .map(|(x, w)| (x - mean) * (x - mean) * w)
        .collect();
    (mean, pairwise_sum(&second) / total)
}

/// Pairwise summation; result independent of how trials were scheduled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn simulate(
    r: &ComplexMatrix,
    pre: &StateVector,
    post: &StateVector,
    cfg: &PointerConfig,
) -> Result<Simulation> {
    pre.check_operator(r)?;
    pre.check_same_dim(post)?;
    let overlap = post.inner(pre);
    if overlap.norm() < EPS_OVERLAP {
        return Err(Error::OrthogonalSelection(overlap.norm()));
    }
    let eig = hermitian_eig(r)?;
    let scale = linalg::max_abs(r).max(1.0);
    if eig.values[0] < -linalg::PSD_CLAMP * scale {
        return Err(Error::NegativeEigenvalue(eig.values[0]));
    }
    let max_eig = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    cfg.validate(max_eig)?;

    let n = cfg.grid_points;
    let dx = cfg.spacing();
    let xs: Vec<f64> = (0..n).map(|j| -cfg.grid_halfwidth + j as f64 * dx).collect();
    let dp = 2.0 * PI / (n as f64 * dx);
    let ps: Vec<f64> = (0..n)
        .map(|k| if k < n / 2 { k as f64 } else { k as f64 - n as f64 } * dp)
        .collect();

    let mut initial: Vec<C64> = xs
        .iter()
        .map(|&x| {
            C64::from_polar(
                (-x * x / (4.0 * cfg.sigma * cfg.sigma)).exp(),
                cfg.momentum_offset * x,
            )
        })
        .collect();
    let norm = initial.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    initial.iter_mut().for_each(|z| *z /= norm);

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut spectrum = initial.clone();
    forward.process(&mut spectrum);

    let initial_x_weights: Vec<f64> = initial.iter().map(|z| z.norm_sqr()).collect();
    let initial_p_weights: Vec<f64> = spectrum.iter().map(|z| z.norm_sqr()).collect();
    let (initial_mean_x, _) = mean_and_var(&xs, &initial_x_weights);
    let (initial_mean_p, var_p) = mean_and_var(&ps, &initial_p_weights);

    // Branch amplitudes in R's eigenbasis.
    let dim = pre.dim();
    let mut joint_norm = 0.0;
    let mut post_spectrum = vec![c64(0.0, 0.0); n];
    for k in 0..dim {
        let v = eig.vectors.column(k);
        let pre_amp = v.dotc(pre.as_vector());
        let post_amp = post.as_vector().dotc(&v);
        let shift = cfg.g * eig.values[k];
        let mut branch: Vec<C64> = spectrum
            .iter()
            .zip(&ps)
            .map(|(z, &p)| z * C64::from_polar(1.0, -p * shift))
            .collect();
        let coeff = post_amp * pre_amp;
        for (acc, b) in post_spectrum.iter_mut().zip(&branch) {
            *acc += coeff * b;
        }
        inverse.process(&mut branch);
        let branch_norm: f64 = branch.iter().map(|z| z.norm_sqr()).sum::<f64>() / (n * n) as f64;
        joint_norm += pre_amp.norm_sqr() * branch_norm;
    }

    let mut post_pointer = post_spectrum.clone();
    inverse.process(&mut post_pointer);
    let x_weights: Vec<f64> = post_pointer
        .iter()
        .map(|z| z.norm_sqr() / (n * n) as f64)
        .collect();
    let p_weights: Vec<f64> = post_spectrum.iter().map(|z| z.norm_sqr()).collect();
    let post_prob_exact = pairwise_sum(&x_weights);

    let (mean_x, _) = mean_and_var(&xs, &x_weights);
    let (mean_p, _) = mean_and_var(&ps, &p_weights);
    let dx_shift = mean_x - initial_mean_x;
    let dp_shift = mean_p - initial_mean_p;
    let wv_estimate = c64(dx_shift / cfg.g, dp_shift / (2.0 * cfg.g * var_p));

    let exact_weak_value = post.matrix_element(r, pre)? / overlap;
    let post_prob_firstorder =
        overlap.norm_sqr() * (1.0 + 2.0 * cfg.g * exact_weak_value.im * initial_mean_p);

    Ok(Simulation {
        record: PointerRecord {
            post_prob_exact,
            post_prob_firstorder,
            mean_position_shift: Some(dx_shift),
            mean_momentum_shift: Some(dp_shift),
            wv_estimate: Some(wv_estimate),
            wv_std_error: None,
            exact_weak_value,
            n_trials: 0,
            n_postselected: 0,
            joint_norm,
        },
        position: GridDensity::new(xs, &x_weights),
        momentum: GridDensity::new(ps, &p_weights),
        initial_mean_x,
        initial_mean_p,
        var_p,
    })
}

/// Exact wavefunction-level weak measurement of a PSD `r` with post-selection.
pub fn evolve_and_postselect(
    r: &ComplexMatrix,
    pre: &StateVector,
    post: &StateVector,
    cfg: &PointerConfig,
) -> Result<PointerRecord> {
    Ok(simulate(r, pre, post, cfg)?.record)
}

/// Stream-per-trial generator: trial `t` always draws the same numbers for a given seed.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Monte Carlo realization: each trial is post-selected with the exact
/// probability; survivors yield one position and one momentum reading drawn
/// from the exact post-selected pointer densities.
pub fn monte_carlo_clicks(
    r: &ComplexMatrix,
    pre: &StateVector,
    post: &StateVector,
    cfg: &PointerConfig,
    n_trials: usize,
) -> Result<PointerRecord> {
    let sim = simulate(r, pre, post, cfg)?;
    let prob = sim.record.post_prob_exact;
    let seed = cfg.seed;

    let clicks: Vec<Option<(f64, f64)>> = (0..n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            if rng.random::<f64>() >= prob {
                return None;
            }
            let x = sim.position.sample(rng.random());
            let p = sim.momentum.sample(rng.random());
            Some((x, p))
        })
        .collect();

    let (xs, ps): (Vec<f64>, Vec<f64>) = clicks.into_iter().flatten().unzip();
    let n_post = xs.len();
    let mut record = PointerRecord {
        n_trials,
        n_postselected: n_post,
        mean_position_shift: None,
        mean_momentum_shift: None,
        wv_estimate: None,
        wv_std_error: None,
        ..sim.record
    };
    if n_post == 0 {
        return Ok(record);
    }

    let count = n_post as f64;
    let mean_x = pairwise_sum(&xs) / count;
    let mean_p = pairwise_sum(&ps) / count;
    let sample_var = |v: &[f64], mean: f64| -> f64 {
        if v.len() < 2 {
            return f64::INFINITY;
        }
        let sq: Vec<f64> = v.iter().map(|a| (a - mean) * (a - mean)).collect();
        pairwise_sum(&sq) / (v.len() - 1) as f64
    };
    let se_x = (sample_var(&xs, mean_x) / count).sqrt();
    let se_p = (sample_var(&ps, mean_p) / count).sqrt();

    let dx_shift = mean_x - sim.initial_mean_x;
    let dp_shift = mean_p - sim.initial_mean_p;
    let im_scale = 2.0 * cfg.g * sim.var_p;
    record.mean_position_shift = Some(dx_shift);
    record.mean_momentum_shift = Some(dp_shift);
    record.wv_estimate = Some(c64(dx_shift / cfg.g, dp_shift / im_scale));
    record.wv_std_error = Some(c64(se_x / cfg.g.abs(), se_p / im_scale.abs()));
    Ok(record)
}

/// End-to-end stochastic estimate of ⟨ψ|A|ψ⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StochasticExpectation {
    pub estimate: Option<C64>,
    /// Standard errors of the real and imaginary parts of `estimate`.
    pub std_error: Option<C64>,
    /// ⟨U†ψ|ψ⟩, supplied from theory.
    pub overlap: C64,
    pub record: PointerRecord,
}

/// Polar-decomposes `a`, weakly measures `R` by Monte Carlo with
/// post-selection U†|ψ⟩ and multiplies by the known overlap ⟨U†ψ|ψ⟩.
///
/// For singular `a` the null-space gauge of `U` is chosen to maximize the
/// overlap (see [`linalg::polar_decompose_aligned`]).
pub fn reconstruct_expectation_stochastic(
    a: &ComplexMatrix,
    psi: &StateVector,
    cfg: &PointerConfig,
    n_trials: usize,
) -> Result<StochasticExpectation> {
    psi.check_operator(a)?;
    let polar = linalg::polar_decompose_aligned(a, psi.as_vector())?;
    let post = psi.evolve(&polar.unitary.adjoint())?;
    let overlap = post.inner(psi);
    let record = monte_carlo_clicks(&polar.psd, psi, &post, cfg, n_trials)?;
    let estimate = record.wv_estimate.map(|w| w * overlap);
    let std_error = record.wv_std_error.map(|se| {
        let re = ((se.re * overlap.re).powi(2) + (se.im * overlap.im).powi(2)).sqrt();
        let im = ((se.re * overlap.im).powi(2) + (se.im * overlap.re).powi(2)).sqrt();
        c64(re, im)
    });
    Ok(StochasticExpectation {
        estimate,
        std_error,
        overlap,
        record,
    })
}
