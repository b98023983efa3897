//! Cross-module checks: the same number reached through different modules.

use weakval_core::channels::{amplitude_damping, channel_fidelity};
use weakval_core::dirac::{
    dirac_distribution_point, fourier_basis, projector_product_psd, projector_product_unitary, ProjectorPair,
};
use weakval_core::linalg::{max_abs_diff, polar_decompose};
use weakval_core::phase::{self, PhaseSpaceConfig};
use weakval_core::pt::{self, BlochState, PTParams};
use weakval_core::sampling::{random_basis, random_state, rng};
use weakval_core::uncertainty::variance_nonhermitian;
use weakval_core::weak::{expectation_from_factors, expectation_via_right_polar};
use weakval_core::StateVector;

#[test]
fn pt_weak_route_matches_generic_protocol() {
    let p = PTParams::new(0.8, 1.7, 0.6, 0.9).unwrap();
    let state = BlochState { eta: 1.1, xi: 2.3 };
    let h = pt::pt_hamiltonian(&p);
    let via_pt = pt::pt_expectation(&p, &state)
        .unwrap()
        .weak_route
        .reconstructed_expectation;
    let generic = expectation_via_right_polar(&h, &state.state())
        .unwrap()
        .reconstructed_expectation;
    assert!((via_pt - generic).norm() < 1e-12);
}

#[test]
fn pt_closed_form_and_svd_give_same_factors() {
    let p = PTParams::new(0.3, 2.0, 1.2, 0.4).unwrap();
    let closed = pt::pt_polar_closed_form(&p).unwrap();
    let svd = polar_decompose(&pt::pt_hamiltonian(&p)).unwrap();
    assert!(max_abs_diff(&closed.factors.unitary, &svd.unitary) < 1e-12);
    assert!(max_abs_diff(&closed.factors.psd, &svd.psd) < 1e-12);
}

#[test]
fn dirac_factors_feed_the_generic_protocol() {
    let mut r = rng(3);
    let b = random_basis(&mut r, 4);
    let c = fourier_basis(4);
    let psi = random_state(&mut r, 4);
    for (i, j) in [(0, 0), (1, 3), (3, 2)] {
        let pp = ProjectorPair::new(b.clone(), c.clone(), i, j).unwrap();
        let u = projector_product_unitary(&pp).unwrap();
        let rm = projector_product_psd(&pp);
        assert!(max_abs_diff(&(&u * &rm), &pp.product_operator()) < 1e-12);
        let generic = expectation_from_factors(&u, &rm, &psi)
            .unwrap()
            .reconstructed_expectation;
        let point = dirac_distribution_point(&pp, &psi).unwrap().value;
        assert!((generic - point).norm() < 1e-12);
    }
}

#[test]
fn channel_variances_match_uncertainty_module() {
    let psi = StateVector::bloch(1.0, 0.3);
    let ch = amplitude_damping(0.4).unwrap();
    let rep = channel_fidelity(&ch, &psi).unwrap();
    for (k, e) in ch.kraus().iter().enumerate() {
        assert!((rep.per_kraus_variance[k] - variance_nonhermitian(e, &psi).unwrap()).abs() < 1e-14);
    }
    let bounds = rep.two_kraus.unwrap();
    assert!(bounds.upper >= bounds.product && bounds.product >= bounds.lower - 1e-12);
}

#[test]
fn creation_weak_route_matches_generic_polar() {
    let cfg = PhaseSpaceConfig::new(6, 0.2).unwrap();
    let psi = phase::equal_superposition(6, 0.4);
    let via_phase = phase::creation_expectation_via_weak(&cfg, &psi)
        .unwrap()
        .reconstructed_expectation;
    let generic = expectation_via_right_polar(&phase::raising_operator(6), &psi)
        .unwrap()
        .reconstructed_expectation;
    assert!((via_phase - generic).norm() < 1e-12);
    assert!((via_phase - phase::creation_expectation_direct(&psi)).norm() < 1e-12);
}

#[test]
fn square_root_sums_small_s() {
    // Σ_{m=1}^{s} √m for s = 1, 2, 3.
    let expected = [1.0, 2.414213562373095, 4.146264369941973];
    for (s, want) in (1..=3).zip(expected) {
        let rep = phase::ramanujan_verify(s, 0.0).unwrap();
        assert!(
            (rep.direct_sum - want).abs() < 1e-13,
            "s = {s}: {}",
            rep.direct_sum
        );
    }
}
