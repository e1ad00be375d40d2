#![allow(dead_code)]

use faer::Mat;
use qsim_core::circuit::{gate_matrix, GateName, GateOp};
use qsim_core::pauli::{PauliString, QuditDim};
use qsim_core::statevector::DenseState;
use qsim_core::tableau::CliffordGate;
use qsim_core::{c64, CMat};
use rand::Rng;

pub fn dim(d: u32) -> QuditDim {
    QuditDim::new(d).unwrap()
}

pub fn random_pauli(rng: &mut impl Rng, n: usize, d: QuditDim) -> PauliString {
    let m = d.get();
    let x = (0..n).map(|_| rng.gen_range(0..m)).collect();
    let z = (0..n).map(|_| rng.gen_range(0..m)).collect();
    PauliString::new(d, x, z, rng.gen_range(0..2 * m)).unwrap()
}

/// Any Clifford generator, including the inverse and Pauli gates.
pub fn random_gate(rng: &mut impl Rng, n: usize) -> CliffordGate {
    use CliffordGate::*;
    let a = rng.gen_range(0..n);
    let kinds = if n >= 2 { 8 } else { 6 };
    match rng.gen_range(0..kinds) {
        0 => H(a),
        1 => HInv(a),
        2 => S(a),
        3 => SInv(a),
        4 => X(a),
        5 => Z(a),
        k => {
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            if k == 6 {
                Sum { control: a, target: b }
            } else {
                SumInv { control: a, target: b }
            }
        }
    }
}

pub fn random_word(rng: &mut impl Rng, n: usize, len: usize) -> Vec<CliffordGate> {
    (0..len).map(|_| random_gate(rng, n)).collect()
}

/// Dense matrix of a gate list applied in order, built column by column.
pub fn dense_circuit(n: usize, d: QuditDim, ops: &[GateOp]) -> CMat {
    let dimn = d.dense_dim(n).unwrap();
    let mut out = Mat::<c64>::zeros(dimn, dimn);
    for col in 0..dimn {
        let mut amps = vec![c64::new(0.0, 0.0); dimn];
        amps[col] = c64::new(1.0, 0.0);
        let mut s = DenseState::from_amplitudes(n, d, amps).unwrap();
        for op in ops {
            s.apply_gate(op).unwrap();
        }
        for (row, a) in s.amplitudes().iter().enumerate() {
            out[(row, col)] = *a;
        }
    }
    out
}

pub fn dense_word(n: usize, d: QuditDim, word: &[CliffordGate]) -> CMat {
    let ops: Vec<GateOp> = word.iter().map(GateOp::from_clifford).collect();
    dense_circuit(n, d, &ops)
}

/// Unitary from the QR factor of a random complex matrix.
pub fn random_unitary(rng: &mut impl Rng, size: usize) -> CMat {
    let g = Mat::from_fn(size, size, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    g.qr().compute_Q()
}

pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    qsim_core::pauli::max_abs_diff(a, b)
}

/// Random circuit over Clifford generators and the diagonal RZ / U1 gates.
pub fn random_named_circuit(rng: &mut impl Rng, n: usize, d: QuditDim, len: usize) -> Vec<GateOp> {
    let mut ops = Vec::with_capacity(len);
    for _ in 0..len {
        let op = match rng.gen_range(0..6) {
            0..=3 => GateOp::from_clifford(&random_gate(rng, n)),
            4 => GateOp::new(GateName::Rz, vec![rng.gen_range(0..n)], vec![rng.gen_range(-3.0..3.0)]),
            _ => {
                let phases = (0..d.usize()).map(|_| rng.gen_range(-3.0..3.0)).collect();
                GateOp::new(GateName::U1, vec![rng.gen_range(0..n)], phases)
            }
        };
        ops.push(op);
    }
    ops
}

pub fn op_matrix(op: &GateOp, d: QuditDim) -> CMat {
    gate_matrix(op, d).unwrap()
}
