mod common;

use common::dim;
use qsim_core::bench::{bench_tdoped, read_csv, run_circuit, write_csv, write_json, Backend, RunOptions, TdopedConfig};
use qsim_core::circuit::{random_clifford_word_seeded, t_doped_circuit, Circuit, GateOp};
use qsim_core::gcamps::worst_case_bonds;
use qsim_core::mps::{memory_from_bonds, Mps, TruncationPolicy};
use qsim_core::par::Execution;

fn config(backends: Vec<Backend>, exec: Execution) -> TdopedConfig {
    TdopedConfig {
        d: dim(3),
        n: 5,
        layers: 4,
        shots: 3,
        seed: 17,
        backends,
        block_len: Some(25),
        policy: TruncationPolicy::default(),
        exec,
    }
}

#[test]
fn deterministic_apart_from_timing() {
    let all = vec![Backend::Gcamps, Backend::Mps, Backend::Statevector];
    let strip = |rs: Vec<qsim_core::bench::BenchRecord>| rs.into_iter().map(|r| r.without_timing()).collect::<Vec<_>>();
    let a = strip(bench_tdoped(&config(all.clone(), Execution::Sequential)).unwrap());
    let b = strip(bench_tdoped(&config(all, Execution::Parallel)).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.len(), 3 * 3 * 4);
}

#[test]
fn backends_agree_on_exact_bonds() {
    // Exact MPS and dense Schmidt ranks describe the same state.
    let rows = bench_tdoped(&config(vec![Backend::Mps, Backend::Statevector], Execution::default())).unwrap();
    let (mps, dense): (Vec<_>, Vec<_>) = rows.iter().partition(|r| r.backend == Backend::Mps);
    for (m, s) in mps.iter().zip(&dense) {
        assert_eq!((m.shot, m.layer), (s.shot, s.layer));
        assert_eq!(m.chi_vector, s.chi_vector);
    }
}

#[test]
fn rows_are_consistent() {
    let rows = bench_tdoped(&config(vec![Backend::Gcamps, Backend::Mps], Execution::default())).unwrap();
    let d = dim(3);
    for r in &rows {
        let chis = r.chis().unwrap();
        assert_eq!(chis.len(), r.n - 1);
        assert_eq!(r.chi_max, *chis.iter().max().unwrap());
        assert_eq!(r.mem_bytes, memory_from_bonds(d, &chis));
        if r.backend == Backend::Gcamps {
            assert_eq!(r.mem_worst_bytes, memory_from_bonds(d, &worst_case_bonds(d, &chis)));
        }
        for (i, &c) in chis.iter().enumerate() {
            assert!(c <= Mps::bond_ceiling(d, r.n, i));
        }
    }
    let layers: Vec<usize> =
        rows.iter().filter(|r| r.shot == 0 && r.backend == Backend::Gcamps).map(|r| r.layer).collect();
    assert_eq!(layers, vec![1, 2, 3, 4]);
}

#[test]
fn csv_and_json_round_trip() {
    let rows = bench_tdoped(&config(vec![Backend::Gcamps], Execution::default())).unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).unwrap();
    assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    let mut json = Vec::new();
    write_json(&mut json, &rows).unwrap();
    let back: Vec<qsim_core::bench::BenchRecord> = serde_json::from_slice(&json).unwrap();
    assert_eq!(back, rows);
    assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
}

#[test]
fn clifford_only_gcamps_rows_are_flat() {
    let d = dim(3);
    let mut c = Circuit::new(6, d);
    for g in random_clifford_word_seeded(6, 200, 5) {
        c.push(GateOp::from_clifford(&g)).unwrap();
    }
    let out = run_circuit(&c, &RunOptions::new(Backend::Gcamps), 0, 0).unwrap();
    assert_eq!(out.records.len(), 1);
    assert!(out.records.iter().all(|r| r.chi_max == 1));
}

#[test]
fn verification_passes_on_t_doped_circuits() {
    for v in [2, 3] {
        let c = t_doped_circuit(5, dim(v), 8, 31, Some(30)).unwrap();
        for backend in [Backend::Gcamps, Backend::Mps] {
            let mut opts = RunOptions::new(backend);
            opts.verify = true;
            let f = run_circuit(&c, &opts, 0, 0).unwrap().fidelity.unwrap();
            assert!(f >= 1.0 - 1e-8, "{backend} d={v}: {f}");
        }
    }
}
