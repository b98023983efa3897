//! The 2×2 PT-symmetric family H = [[r e^{iθ}, t], [s, r e^{−iθ}]].
//!
//! Closed forms for the spectrum and for the polar factors H = U R, with
//!
//! ```text
//! R² = H†H = [[r² + s², r(s+t)e^{−iθ}], [r(s+t)e^{iθ}, r² + t²]]
//! A  = √(4r² + (s−t)²),   B± = √(2r² + s² + t² ± (s+t)A)
//! ```
//!
//! U = H R⁻¹ exists in closed form whenever r² ≠ st.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, PolarFactors};
use crate::state::StateVector;
use crate::weak::{expectation_via_right_factors, WeakValueResult};
use crate::{c64, ComplexMatrix, C64};

/// |st − r²sin²θ| below this is treated as an exceptional point.
pub const EXCEPTIONAL_TOL: f64 = 1e-12;

/// |r² − st| below this (relative) makes R singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PTParams {
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub theta: f64,
}

impl PTParams {
    pub fn new(r: f64, s: f64, t: f64, theta: f64) -> Result<Self> {
        if ![r, s, t, theta].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { r, s, t, theta })
    }

    /// st − r²sin²θ; positive in the unbroken regime.
    pub fn discriminant(&self) -> f64 {
        self.s * self.t - (self.r * self.theta.sin()).powi(2)
    }

    pub fn is_unbroken(&self) -> bool {
        self.discriminant() > 0.0
    }

    /// det H = r² − st.
    pub fn determinant(&self) -> f64 {
        self.r * self.r - self.s * self.t
    }

    fn scale(&self) -> f64 {
        self.r.abs().max(self.s.abs()).max(self.t.abs()).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub eta: f64,
    pub xi: f64,
}

impl BlochState {
    pub fn state(&self) -> StateVector {
        StateVector::bloch(self.eta, self.xi)
    }
}

pub fn pt_hamiltonian(p: &PTParams) -> ComplexMatrix {
    linalg::from_rows(&[
        &[C64::from_polar(p.r, p.theta), c64(p.t, 0.0)],
        &[c64(p.s, 0.0), C64::from_polar(p.r, -p.theta)],
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PtEigensystem {
    pub eps_plus: C64,
    pub eps_minus: C64,
    /// Complex-conjugate pair of eigenvalues.
    pub broken: bool,
    /// sin α = r sinθ / √(st), when defined.
    pub alpha: Option<f64>,
    /// Eigenvectors for ε+ and ε− (not normalized in the closed form).
    #[serde(skip)]
    pub vectors: [DVector<C64>; 2],
    /// True if `vectors` came from the closed form rather than a null-space solve.
    pub closed_form_vectors: bool,
}

/// Null vector of the 2×2 matrix H − εI, unit norm.
fn null_vector(h: &ComplexMatrix, eps: C64) -> DVector<C64> {
    let row0 = (h[(0, 1)], eps - h[(0, 0)]);
    let row1 = (eps - h[(1, 1)], h[(1, 0)]);
    let pick = if row0.0.norm_sqr() + row0.1.norm_sqr() >= row1.0.norm_sqr() + row1.1.norm_sqr() {
        row0
    } else {
        row1
    };
    let v = DVector::from_vec(vec![pick.0, pick.1]);
    let n = v.norm();
    v.unscale(n)
}

/// ε± = r cosθ ± √(st − r²sin²θ) and eigenvectors.
///
/// In the unbroken regime with st > 0 the eigenvectors are
/// (2cosα)^{-1/2}((t/s)^{1/4}e^{±iα/2}, ±(s/t)^{1/4}e^{∓iα/2}); otherwise they
/// come from the null space of H − ε±I.
pub fn pt_eigensystem(p: &PTParams) -> Result<PtEigensystem> {
    let disc = p.discriminant();
    if disc.abs() < EXCEPTIONAL_TOL {
        return Err(Error::ExceptionalPoint(disc));
    }
    let root = c64(disc, 0.0).sqrt();
    let base = c64(p.r * p.theta.cos(), 0.0);
    let eps_plus = base + root;
    let eps_minus = base - root;
    let st = p.s * p.t;

    let alpha = (st > 0.0 && disc > 0.0).then(|| (p.r * p.theta.sin() / st.sqrt()).asin());
    let closed = alpha.filter(|a| a.cos() > 1e-8);
    let (vectors, closed_form_vectors) = match closed {
        Some(a) => {
            let norm = 1.0 / (2.0 * a.cos()).sqrt();
            let ratio = (p.t / p.s).powf(0.25);
            let sign = p.s.signum();
            let plus = DVector::from_vec(vec![
                C64::from_polar(norm * ratio, a / 2.0),
                C64::from_polar(sign * norm / ratio, -a / 2.0),
            ]);
            let minus = DVector::from_vec(vec![
                C64::from_polar(norm * ratio, -a / 2.0),
                C64::from_polar(-sign * norm / ratio, a / 2.0),
            ]);
            ([plus, minus], true)
        }
        None => {
            let h = pt_hamiltonian(p);
            ([null_vector(&h, eps_plus), null_vector(&h, eps_minus)], false)
        }
    };
    Ok(PtEigensystem {
        eps_plus,
        eps_minus,
        broken: disc < 0.0,
        alpha,
        vectors,
        closed_form_vectors,
    })
}

/// A, B+ and B−. B± are assigned so that B+² = 2r²+s²+t² + (s+t)A; the
/// smaller of the two is recovered from B+B− = 2|r² − st| to avoid cancellation.
fn a_b_coefficients(p: &PTParams) -> (f64, f64, f64) {
    let (r, s, t) = (p.r, p.s, p.t);
    let a = (4.0 * r * r + (s - t) * (s - t)).sqrt();
    let base = 2.0 * r * r + s * s + t * t;
    let big = (base + (s + t).abs() * a).sqrt();
    let small = 2.0 * p.determinant().abs() / big;
    if s + t >= 0.0 {
        (a, big, small)
    } else {
        (a, small, big)
    }
}

/// The R² matrix in closed form.
pub fn pt_r_squared(p: &PTParams) -> ComplexMatrix {
    let (r, s, t) = (p.r, p.s, p.t);
    let off = C64::from_polar(r * (s + t), -p.theta);
    linalg::from_rows(&[
        &[c64(r * r + s * s, 0.0), off],
        &[off.conj(), c64(r * r + t * t, 0.0)],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PtPolarRoute {
    /// General closed form, U = H R⁻¹.
    General,
    /// s = t, r > |s|: U = diag(e^{iθ}, e^{−iθ}).
    DiagonalUnitary,
    /// s = t, |r| < s: U = σ_x.
    SigmaX,
    /// r² = st (or A = 0): numerical SVD polar decomposition; U is only
    /// fixed up to a gauge on the null space of R.
    NumericalSvd,
}

#[derive(Debug, Clone)]
pub struct PtPolar {
    pub factors: PolarFactors,
    pub route: PtPolarRoute,
    /// R⁻¹ from its closed form, when R is invertible.
    pub r_inverse: Option<ComplexMatrix>,
}

/// Closed-form polar factors. Fails with `SingularR` when r² = st.
pub fn pt_polar_closed_form(p: &PTParams) -> Result<PtPolar> {
    let det = p.determinant();
    if det.abs() < SINGULAR_TOL * p.scale().powi(2) {
        return Err(Error::SingularR(format!("r^2 - st = {det:e}")));
    }
    let (r, s, t, theta) = (p.r, p.s, p.t, p.theta);
    let e_plus = C64::from_polar(1.0, theta);
    let e_minus = e_plus.conj();

    if s == t {
        if r > s.abs() {
            let rr = linalg::from_rows(&[&[c64(r, 0.0), e_minus * s], &[e_plus * s, c64(r, 0.0)]]);
            let u = linalg::from_rows(&[&[e_plus, c64(0.0, 0.0)], &[c64(0.0, 0.0), e_minus]]);
            return Ok(special_case(u, rr, PtPolarRoute::DiagonalUnitary));
        }
        if s > r.abs() {
            let rr = linalg::from_rows(&[&[c64(s, 0.0), e_minus * r], &[e_plus * r, c64(s, 0.0)]]);
            let u = linalg::from_rows(&[&[c64(0.0, 0.0), c64(1.0, 0.0)], &[c64(1.0, 0.0), c64(0.0, 0.0)]]);
            return Ok(special_case(u, rr, PtPolarRoute::SigmaX));
        }
    }

    let (a, bp, bm) = a_b_coefficients(p);
    if a == 0.0 {
        return Err(Error::SingularR("A = 0 leaves the closed form undefined".into()));
    }
    let d = s - t;
    let diff = bp - bm;
    let k = 1.0 / (2.0 * std::f64::consts::SQRT_2 * a);
    let r11 = ((a - d) * bm + (a + d) * bp) * k;
    let r22 = ((a + d) * bm + (a - d) * bp) * k;
    let r12 = e_minus * (2.0 * r * diff * k);
    let rr = linalg::from_rows(&[&[c64(r11, 0.0), r12], &[r12.conj(), c64(r22, 0.0)]]);

    let kinv = 1.0 / (std::f64::consts::SQRT_2 * a * bp * bm);
    let s11 = (a + d) * bm + (a - d) * bp;
    let s22 = (a - d) * bm + (a + d) * bp;
    let s12 = e_minus * (-2.0 * r * diff);
    let r_inv = linalg::from_rows(&[
        &[c64(s11 * kinv, 0.0), s12 * kinv],
        &[s12.conj() * kinv, c64(s22 * kinv, 0.0)],
    ]);

    let u11 = e_plus * (r * (s11 - 2.0 * t * diff));
    let u12 = t * ((a - d) * bm + (a + d) * bp) - 2.0 * r * r * diff;
    let u21 = s * ((a + d) * bm + (a - d) * bp) - 2.0 * r * r * diff;
    let u22 = e_minus * (r * (s22 - 2.0 * s * diff));
    let u = linalg::from_rows(&[
        &[u11 * kinv, c64(u12 * kinv, 0.0)],
        &[c64(u21 * kinv, 0.0), u22 * kinv],
    ]);

    Ok(PtPolar {
        factors: PolarFactors::from_right(u, rr),
        route: PtPolarRoute::General,
        r_inverse: Some(r_inv),
    })
}

fn special_case(u: ComplexMatrix, rr: ComplexMatrix, route: PtPolarRoute) -> PtPolar {
    let r_inverse = rr.clone().try_inverse();
    PtPolar {
        factors: PolarFactors::from_right(u, rr),
        route,
        r_inverse,
    }
}

/// Closed form when available, numerical SVD otherwise (flagged in `route`).
pub fn pt_polar(p: &PTParams) -> Result<PtPolar> {
    match pt_polar_closed_form(p) {
        Err(Error::SingularR(_)) => Ok(PtPolar {
            factors: linalg::polar_decompose(&pt_hamiltonian(p))?,
            route: PtPolarRoute::NumericalSvd,
            r_inverse: None,
        }),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PtExpectation {
    /// r cosθ + s cosξ sinη + i r sinθ cosη; exact only for s = t.
    pub printed_formula: C64,
    /// r cosθ + (s+t)/2 cosξ sinη + i[r sinθ cosη + (t−s)/2 sinξ sinη].
    pub general_formula: C64,
    /// Weak value of R (post-selected in U†|ψ⟩) times ⟨U†ψ|ψ⟩.
    pub weak_route: WeakValueResult,
    pub route: PtPolarRoute,
}

pub fn pt_expectation(p: &PTParams, state: &BlochState) -> Result<PtExpectation> {
    let (r, s, t, th) = (p.r, p.s, p.t, p.theta);
    let (eta, xi) = (state.eta, state.xi);
    let printed_formula = c64(r * th.cos() + s * xi.cos() * eta.sin(), r * th.sin() * eta.cos());
    let general_formula = c64(
        r * th.cos() + 0.5 * (s + t) * xi.cos() * eta.sin(),
        r * th.sin() * eta.cos() + 0.5 * (t - s) * xi.sin() * eta.sin(),
    );
    let polar = pt_polar(p)?;
    let weak_route = expectation_via_right_factors(&polar.factors, &state.state())?;
    Ok(PtExpectation {
        printed_formula,
        general_formula,
        weak_route,
        route: polar.route,
    })
}
