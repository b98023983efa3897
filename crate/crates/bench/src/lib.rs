//! Seeded inputs shared by the benchmarks in `benches/`.

use weakval_core::sampling::{random_psd, random_state, rng};
use weakval_core::{ComplexMatrix, StateVector};

/// Random operator and state of dimension `n`.
pub fn operator_and_state(n: usize, seed: u64) -> (ComplexMatrix, StateVector) {
    let mut r = rng(seed);
    let a = weakval_core::sampling::random_matrix(&mut r, n);
    (a, random_state(&mut r, n))
}

/// PSD operator with pre- and post-selected states of overlap at least 0.3.
pub fn pointer_triple(n: usize, seed: u64) -> (ComplexMatrix, StateVector, StateVector) {
    let mut r = rng(seed);
    loop {
        let rm = random_psd(&mut r, n);
        let pre = random_state(&mut r, n);
        let post = random_state(&mut r, n);
        if post.inner(&pre).norm() >= 0.3 {
            return (rm, pre, post);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic() {
        assert_eq!(operator_and_state(3, 1).0, operator_and_state(3, 1).0);
        let (_, pre, post) = pointer_triple(2, 9);
        assert!(post.inner(&pre).norm() >= 0.3);
    }
}
