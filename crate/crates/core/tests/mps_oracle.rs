mod common;

use common::{dim, max_diff, random_named_circuit, random_pauli, random_unitary};
use proptest::prelude::*;
use qsim_core::c64;
use qsim_core::circuit::{gate_matrix, t_gate, GateOp};
use qsim_core::gcamps::Disentanglers;
use qsim_core::mps::{memory_from_bonds, Mps, PauliMpo, TruncationPolicy};
use qsim_core::pauli::{decompose_unitary, PauliSum, QuditDim};
use qsim_core::statevector::{fidelity, DenseState};
use qsim_core::tableau::Tableau;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn apply_both(m: &mut Mps, s: &mut DenseState, op: &GateOp, d: QuditDim) {
    let u = gate_matrix(op, d).unwrap();
    match op.sites.as_slice() {
        [a] => m.apply_single_site(*a, &u).unwrap(),
        [a, b] => {
            m.apply_two_site_any(*a, *b, &u).unwrap();
        }
        _ => unreachable!(),
    }
    s.apply_gate(op).unwrap();
}

fn assert_ceiling(m: &Mps) {
    let n = m.n();
    for (i, &chi) in m.bond_dims().iter().enumerate() {
        assert!(chi <= Mps::bond_ceiling(m.dim(), n, i), "bond {i} = {chi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    /// Exact policy reproduces the dense state for 30-gate circuits, including long-range SUMs.
    #[test]
    fn exact_mps_matches_dense(d in prop_oneof![Just(2u32), Just(3)], n in 2usize..=6, seed in any::<u64>()) {
        let d = dim(d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ops = random_named_circuit(&mut rng, n, d, 30);
        let mut m = Mps::zero(n, d, TruncationPolicy::exact()).unwrap();
        let mut s = DenseState::zero(n, d).unwrap();
        for op in &ops {
            apply_both(&mut m, &mut s, op, d);
            assert_ceiling(&m);
        }
        prop_assert!(fidelity(&m.to_dense().unwrap(), &s) >= 1.0 - 1e-9);
        prop_assert!(m.canonical_error() < 1e-10);
        prop_assert!((m.norm() - 1.0).abs() < 1e-10);
        let p = random_pauli(&mut rng, n, d);
        let want = s.pauli_expectation(&p).unwrap();
        prop_assert!((m.expectation_pauli(&p).unwrap() - want).norm() < 1e-9);
        let digits: Vec<u32> = (0..n).map(|_| rng.gen_range(0..d.get())).collect();
        prop_assert!((m.amplitude(&digits).unwrap() - s.amplitude(&digits)).norm() < 1e-9);
    }
}

#[test]
fn random_single_site_unitary_matches_dense() {
    let d = dim(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut m = Mps::zero(4, d, TruncationPolicy::default()).unwrap();
    let mut s = DenseState::zero(4, d).unwrap();
    for op in random_named_circuit(&mut rng, 4, d, 12) {
        apply_both(&mut m, &mut s, &op, d);
    }
    let dims = m.bond_dims();
    let u = random_unitary(&mut rng, 3);
    m.apply_single_site(2, &u).unwrap();
    s.apply_one(2, &u).unwrap();
    assert_eq!(m.bond_dims(), dims);
    let got = m.to_dense().unwrap();
    let diff = got.amplitudes().iter().zip(s.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-10);
}

#[test]
fn catalog_gate_on_random_mps_matches_dense() {
    let d = dim(3);
    let set = Disentanglers::for_dim(d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut m = Mps::zero(4, d, TruncationPolicy::default()).unwrap();
    let mut s = DenseState::zero(4, d).unwrap();
    for op in random_named_circuit(&mut rng, 4, d, 20) {
        apply_both(&mut m, &mut s, &op, d);
    }
    for _ in 0..5 {
        let entry = set.candidates()[rng.gen_range(0..set.candidates().len())];
        let u = set.unitary(entry);
        m.apply_two_site(1, u).unwrap();
        s.apply_two(1, 2, u).unwrap();
    }
    assert!(fidelity(&m.to_dense().unwrap(), &s) >= 1.0 - 1e-9);
}

/// `T` on site `k` commuted through a random Clifford, applied to the MPS as a Pauli sum.
fn commuted_t_case(d: QuditDim, n: usize, site: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Entangled start so the sum acts on a nontrivial MPS.
    let mut m = Mps::zero(n, d, TruncationPolicy::default()).unwrap();
    let mut s = DenseState::zero(n, d).unwrap();
    for op in random_named_circuit(&mut rng, n, d, 15) {
        apply_both(&mut m, &mut s, &op, d);
    }
    let word = common::random_word(&mut rng, n, 30);
    let mut tab = Tableau::identity(n, d).unwrap();
    tab.apply_word(&word).unwrap();
    let local = decompose_unitary(&t_gate(d).unwrap(), d).unwrap();
    let commuted = local.map_strings(|p| tab.conjugate_inverse(&p.embed(n, &[site])?)).unwrap();
    let before = m.bond_dims();
    let err = m.apply_pauli_sum(&commuted).unwrap();
    assert!(err < 1e-20);
    for (b, a) in before.iter().zip(m.bond_dims()) {
        assert!(a <= b * commuted.len());
    }
    // Dense reference: C† T_site C applied to s.
    let c = common::dense_word(n, d, &word);
    let t_full = common::dense_circuit(n, d, &[GateOp::one(qsim_core::circuit::GateName::T, site)]);
    let ut = &(c.adjoint() * &t_full) * &c;
    let vec = faer::Mat::from_fn(s.amplitudes().len(), 1, |i, _| s.amplitudes()[i]);
    let out = &ut * &vec;
    let want = DenseState::from_amplitudes(n, d, (0..out.nrows()).map(|i| out[(i, 0)]).collect()).unwrap();
    assert!(fidelity(&m.to_dense().unwrap(), &want) >= 1.0 - 1e-9);
    assert!(m.canonical_error() < 1e-10);
}

#[test]
fn qubit_t_through_identity_clifford() {
    let d = dim(2);
    let mut m = Mps::zero(3, d, TruncationPolicy::default()).unwrap();
    let mut s = DenseState::zero(3, d).unwrap();
    for op in [GateOp::one(qsim_core::circuit::GateName::H, 0), GateOp::one(qsim_core::circuit::GateName::H, 1)] {
        apply_both(&mut m, &mut s, &op, d);
    }
    let tab = Tableau::identity(3, d).unwrap();
    let local = decompose_unitary(&t_gate(d).unwrap(), d).unwrap();
    let sum = local.map_strings(|p| tab.conjugate_inverse(&p.embed(3, &[1])?)).unwrap();
    m.apply_pauli_sum(&sum).unwrap();
    s.apply_one(1, &t_gate(d).unwrap()).unwrap();
    assert!(fidelity(&m.to_dense().unwrap(), &s) >= 1.0 - 1e-12);
    assert_eq!(m.bond_dims(), vec![1, 1]);
}

#[test]
fn qutrit_t_through_random_clifford() {
    for seed in 0..5 {
        commuted_t_case(dim(3), 4, (seed % 4) as usize, seed);
    }
    commuted_t_case(dim(2), 5, 2, 99);
}

#[test]
fn single_term_sum_keeps_bonds() {
    let d = dim(3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut m = Mps::zero(4, d, TruncationPolicy::default()).unwrap();
    let mut s = DenseState::zero(4, d).unwrap();
    for op in random_named_circuit(&mut rng, 4, d, 20) {
        apply_both(&mut m, &mut s, &op, d);
    }
    let dims = m.bond_dims();
    let p = random_pauli(&mut rng, 4, d);
    let phase = c64::from_polar(1.0, 0.7);
    m.apply_pauli_sum(&PauliSum::new([(phase, p.clone())]).unwrap()).unwrap();
    assert_eq!(m.bond_dims(), dims);
    s.apply_pauli(&p).unwrap();
    assert!(fidelity(&m.to_dense().unwrap(), &s) >= 1.0 - 1e-12);
}

#[test]
fn non_unitary_sum_reports_drift() {
    let d = dim(2);
    let mut m = Mps::zero(2, d, TruncationPolicy::default()).unwrap();
    let x0 = qsim_core::pauli::PauliString::single_x(2, d, 0, 1);
    let id = qsim_core::pauli::PauliString::identity(2, d);
    let sum = PauliSum::new([(c64::new(1.0, 0.0), x0), (c64::new(1.0, 0.0), id)]).unwrap();
    assert!(matches!(m.apply_pauli_sum(&sum), Err(qsim_core::Error::NormDrift(_))));
}

#[test]
fn mpo_contracts_to_dense_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in [2, 3] {
        let d = dim(d);
        for n in 1..=3 {
            let terms: Vec<_> = (0..4)
                .map(|_| (c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), random_pauli(&mut rng, n, d)))
                .collect();
            let sum = PauliSum::new(terms).unwrap();
            let mpo = PauliMpo::from_sum(&sum).unwrap();
            assert_eq!(mpo.bond_dim(), sum.len());
            assert!(max_diff(&mpo.to_dense().unwrap(), &sum.to_matrix().unwrap()) < 1e-12);
        }
    }
}

#[test]
fn hermitian_mpo_expectation_is_real() {
    let d = dim(3);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut m = Mps::zero(4, d, TruncationPolicy::default()).unwrap();
    let mut s = DenseState::zero(4, d).unwrap();
    for op in random_named_circuit(&mut rng, 4, d, 25) {
        apply_both(&mut m, &mut s, &op, d);
    }
    let p = random_pauli(&mut rng, 4, d);
    let half = c64::new(0.5, 0.0);
    let o = PauliSum::new([(half, p.clone()), (half, p.adjoint())]).unwrap();
    let val = m.expectation_mpo(&PauliMpo::from_sum(&o).unwrap()).unwrap();
    assert!(val.im.abs() < 1e-10);
    assert!((val.re - s.pauli_expectation(&p).unwrap().re).abs() < 1e-10);
}

#[test]
fn truncation_error_is_discarded_weight() {
    let d = dim(3);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut m = Mps::zero(4, d, TruncationPolicy::exact()).unwrap();
    let mut s = DenseState::zero(4, d).unwrap();
    for op in random_named_circuit(&mut rng, 4, d, 30) {
        apply_both(&mut m, &mut s, &op, d);
    }
    let u = random_unitary(&mut rng, 9);
    let mut exact = m.clone();
    exact.apply_two_site(1, &u).unwrap();
    let sv = exact.schmidt_values(1).unwrap();
    m.set_policy(TruncationPolicy::new(2, 0.0).unwrap());
    let err = m.apply_two_site(1, &u).unwrap();
    let kept: f64 = sv[..2].iter().map(|x| x * x).sum();
    assert!((err - (1.0 - kept)).abs() < 1e-12);
    assert_eq!(m.bond_dims()[1], 2);
    assert!((m.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn product_state_diagnostics() {
    let d = dim(3);
    let mut m = Mps::product_state(d, &[2, 0, 1], TruncationPolicy::default()).unwrap();
    assert_eq!(m.bond_dims(), vec![1, 1]);
    for b in 0..2 {
        assert!(m.entanglement_entropy(b).unwrap().abs() < 1e-14);
    }
    assert_eq!(m.memory_bytes(), memory_from_bonds(d, &[1, 1]));
    assert!(m.schmidt_values(2).is_err());
}
