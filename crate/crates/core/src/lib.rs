//! Expectation values and weak values of non-Hermitian operators.
//!
//! Any square operator factors as `A = U R` with `U` unitary and `R = √(A†A)`
//! positive semi-definite. For a pure state |ψ⟩,
//!
//! ```text
//! ⟨ψ|A|ψ⟩ = ⟨φ|R|ψ⟩/⟨φ|ψ⟩ · ⟨φ|ψ⟩,   |φ⟩ = U†|ψ⟩
//! ```
//!
//! so the complex expectation value is the weak value of the Hermitian part
//! `R` (pre-selected in |ψ⟩, post-selected in U†|ψ⟩) times a number fixed by
//! the unitary part. This crate computes those quantities exactly from state
//! vectors, simulates the pointer-based weak measurement that would estimate
//! them, and carries the worked applications: non-Hermitian uncertainty
//! relations, Pegg–Barnett phase operators, Kraus-channel fidelity,
//! 2×2 PT-symmetric Hamiltonians and discrete Dirac quasiprobabilities.

pub mod channels;
pub mod dirac;
pub mod error;
pub mod linalg;
pub mod phase;
pub mod pointer;
pub mod pt;
pub mod sampling;
pub mod state;
pub mod uncertainty;
pub mod weak;

pub use error::{Error, Result};
pub use linalg::{polar_decompose, PolarFactors};
pub use state::StateVector;
pub use weak::{WeakValueResult, EPS_OVERLAP};

/// Double-precision complex scalar.
pub type C64 = num_complex::Complex64;

/// Dense square complex matrix.
pub type ComplexMatrix = nalgebra::DMatrix<C64>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
