//! T-doped benchmark harness and its CSV/JSON records.

use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::circuit::{gate_matrix, t_doped_circuit, Circuit, GateOp};
use crate::gcamps::{worst_case_bonds, Disentanglers, GcampsState};
use crate::mps::{memory_from_bonds, Mps, TruncationPolicy};
use crate::par::Execution;
use crate::pauli::QuditDim;
use crate::statevector::{fidelity, run_circuit as run_dense, DenseState};
use crate::{Error, Result};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "QSIM_THREADS";

pub const CSV_HEADER: &str = "backend,d,n,shot,seed,layer,chi_max,chi_vector,mem_bytes,mem_worst_bytes,dt_seconds";

/// Fidelity shortfall tolerated by `--verify`.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Gcamps,
    Mps,
    Statevector,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Gcamps => "gcamps",
            Backend::Mps => "mps",
            Backend::Statevector => "statevector",
        }
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gcamps" => Ok(Backend::Gcamps),
            "mps" => Ok(Backend::Mps),
            "statevector" => Ok(Backend::Statevector),
            other => Err(Error::Invalid(format!("unknown backend `{other}`"))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row per layer boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub backend: Backend,
    pub d: u32,
    pub n: usize,
    pub shot: usize,
    pub seed: u64,
    /// Counts from 1.
    pub layer: usize,
    pub chi_max: usize,
    /// Bond dimensions joined with `|`.
    pub chi_vector: String,
    pub mem_bytes: u64,
    pub mem_worst_bytes: u64,
    /// Wall time spent on this layer alone.
    pub dt_seconds: f64,
}

impl BenchRecord {
    pub fn chis(&self) -> Result<Vec<usize>> {
        if self.chi_vector.is_empty() {
            return Ok(Vec::new());
        }
        self.chi_vector
            .split('|')
            .map(|s| s.parse().map_err(|_| Error::Invalid(format!("bad chi entry `{s}`"))))
            .collect()
    }

    /// The row with its timing column zeroed, for determinism checks.
    pub fn without_timing(&self) -> BenchRecord {
        BenchRecord { dt_seconds: 0.0, ..self.clone() }
    }
}

pub fn join_chis(chis: &[usize]) -> String {
    chis.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("|")
}

/// Structural ceiling on every bond, capped at `chi_max`.
pub fn ceiling_bonds(d: QuditDim, n: usize, chi_max: usize) -> Vec<usize> {
    (0..n.saturating_sub(1)).map(|i| Mps::bond_ceiling(d, n, i).min(chi_max)).collect()
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub backend: Backend,
    pub policy: TruncationPolicy,
    /// Compare against the dense oracle at the end.
    pub verify: bool,
    pub exec: Execution,
    /// Prebuilt disentanglers for the gcamps backend.
    pub disentanglers: Option<Arc<Disentanglers>>,
}

impl RunOptions {
    pub fn new(backend: Backend) -> Self {
        RunOptions {
            backend,
            policy: TruncationPolicy::default(),
            verify: false,
            exec: Execution::default(),
            disentanglers: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub records: Vec<BenchRecord>,
    /// `|⟨oracle|state⟩|` when verification was requested.
    pub fidelity: Option<f64>,
    pub total_seconds: f64,
}

/// Op ranges ending after each non-Clifford op, plus a trailing Clifford block.
pub fn layer_ranges(c: &Circuit) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, op) in c.ops.iter().enumerate() {
        if !op.is_clifford() {
            out.push(start..i + 1);
            start = i + 1;
        }
    }
    if start < c.ops.len() || out.is_empty() {
        out.push(start..c.ops.len());
    }
    out
}

trait Engine {
    fn apply(&mut self, op: &GateOp) -> Result<()>;
    fn bonds(&mut self) -> Result<Vec<usize>>;
    fn worst_bonds(&mut self) -> Result<Vec<usize>>;
    fn dense(&self) -> Result<DenseState>;
}

struct GcampsEngine(GcampsState);

impl Engine for GcampsEngine {
    fn apply(&mut self, op: &GateOp) -> Result<()> {
        self.0.apply_gate(op).map(|_| ())
    }
    fn bonds(&mut self) -> Result<Vec<usize>> {
        Ok(self.0.mps().bond_dims())
    }
    fn worst_bonds(&mut self) -> Result<Vec<usize>> {
        Ok(worst_case_bonds(self.0.dim(), &self.0.mps().bond_dims()))
    }
    fn dense(&self) -> Result<DenseState> {
        self.0.dense_state()
    }
}

struct MpsEngine(Mps);

impl Engine for MpsEngine {
    fn apply(&mut self, op: &GateOp) -> Result<()> {
        op.validate(self.0.n(), self.0.dim())?;
        let u = gate_matrix(op, self.0.dim())?;
        match op.sites.as_slice() {
            [a] => self.0.apply_single_site(*a, &u),
            [a, b] => self.0.apply_two_site_any(*a, *b, &u).map(|_| ()),
            _ => unreachable!("validated arity"),
        }
    }
    fn bonds(&mut self) -> Result<Vec<usize>> {
        Ok(self.0.bond_dims())
    }
    fn worst_bonds(&mut self) -> Result<Vec<usize>> {
        Ok(ceiling_bonds(self.0.dim(), self.0.n(), self.0.policy().chi_max))
    }
    fn dense(&self) -> Result<DenseState> {
        self.0.to_dense()
    }
}

struct DenseEngine(DenseState);

impl Engine for DenseEngine {
    fn apply(&mut self, op: &GateOp) -> Result<()> {
        self.0.apply_gate(op)
    }
    fn bonds(&mut self) -> Result<Vec<usize>> {
        (1..self.0.n())
            .map(|cut| {
                let sv = self.0.schmidt_values(cut)?;
                let top = sv.first().copied().unwrap_or(0.0);
                Ok(sv.iter().filter(|&&s| s > 1e-12 * top).count().max(1))
            })
            .collect()
    }
    fn worst_bonds(&mut self) -> Result<Vec<usize>> {
        Ok(ceiling_bonds(self.0.dim(), self.0.n(), usize::MAX))
    }
    fn dense(&self) -> Result<DenseState> {
        Ok(self.0.clone())
    }
}

/// Simulate `c` on one backend, emitting a record per layer boundary.
pub fn run_circuit(c: &Circuit, opts: &RunOptions, shot: usize, seed: u64) -> Result<RunOutcome> {
    let d = c.d;
    let mut engine: Box<dyn Engine> = match opts.backend {
        Backend::Gcamps => {
            let set = match &opts.disentanglers {
                Some(s) => s.clone(),
                None => Disentanglers::for_dim(d)?,
            };
            let mut st = GcampsState::new(c.n, d, set)?.with_policy(opts.policy).with_execution(opts.exec);
            if opts.verify {
                st = st.with_verification();
            }
            Box::new(GcampsEngine(st))
        }
        Backend::Mps => Box::new(MpsEngine(Mps::zero(c.n, d, opts.policy)?)),
        Backend::Statevector => Box::new(DenseEngine(DenseState::zero(c.n, d)?)),
    };
    let mut records = Vec::new();
    let mut total = 0.0;
    for (k, range) in layer_ranges(c).into_iter().enumerate() {
        let start = Instant::now();
        for op in &c.ops[range] {
            engine.apply(op)?;
        }
        let dt = start.elapsed().as_secs_f64();
        total += dt;
        let chis = engine.bonds()?;
        let worst = engine.worst_bonds()?;
        records.push(BenchRecord {
            backend: opts.backend,
            d: d.get(),
            n: c.n,
            shot,
            seed,
            layer: k + 1,
            chi_max: chis.iter().copied().max().unwrap_or(1),
            chi_vector: join_chis(&chis),
            mem_bytes: memory_from_bonds(d, &chis),
            mem_worst_bytes: memory_from_bonds(d, &worst),
            dt_seconds: dt,
        });
    }
    let fidelity = if opts.verify {
        let oracle = run_dense(c)?;
        Some(fidelity(&oracle, &engine.dense()?))
    } else {
        None
    };
    Ok(RunOutcome { records, fidelity, total_seconds: total })
}

#[derive(Clone, Debug)]
pub struct TdopedConfig {
    pub d: QuditDim,
    pub n: usize,
    pub layers: usize,
    pub shots: usize,
    pub seed: u64,
    pub backends: Vec<Backend>,
    /// Clifford gates per block; `None` uses the circuit module default.
    pub block_len: Option<usize>,
    pub policy: TruncationPolicy,
    /// Parallelism over shots.
    pub exec: Execution,
}

/// Seed of shot `k`, decorrelated from neighbouring base seeds.
pub fn shot_seed(base: u64, shot: usize) -> u64 {
    let mut z = base.wrapping_add((shot as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run every backend on every shot; rows are ordered by shot, then backend, then layer.
pub fn bench_tdoped(cfg: &TdopedConfig) -> Result<Vec<BenchRecord>> {
    if cfg.backends.contains(&Backend::Gcamps) {
        // Build once outside the workers.
        Disentanglers::for_dim(cfg.d)?;
    }
    let per_shot = cfg.exec.map_range(cfg.shots, |shot| -> Result<Vec<BenchRecord>> {
        let seed = shot_seed(cfg.seed, shot);
        let circuit = t_doped_circuit(cfg.n, cfg.d, cfg.layers, seed, cfg.block_len)?;
        let mut rows = Vec::new();
        for &backend in &cfg.backends {
            let mut opts = RunOptions::new(backend);
            opts.policy = cfg.policy;
            // Shots are the unit of parallelism; each state runs on one worker.
            opts.exec = Execution::Sequential;
            rows.extend(run_circuit(&circuit, &opts, shot, seed)?.records);
        }
        Ok(rows)
    });
    let mut out = Vec::new();
    for rows in per_shot {
        out.extend(rows?);
    }
    Ok(out)
}

pub fn write_csv<W: Write>(w: W, records: &[BenchRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    if records.is_empty() {
        wr.write_record(CSV_HEADER.split(','))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<BenchRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.iter().collect::<Vec<_>>().join(",");
    if headers != CSV_HEADER {
        return Err(Error::Invalid(format!("unexpected CSV header `{headers}`")));
    }
    rd.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_json<W: Write>(w: W, records: &[BenchRecord]) -> Result<()> {
    serde_json::to_writer_pretty(w, records)?;
    Ok(())
}

/// Worker cap from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateName;

    fn d(v: u32) -> QuditDim {
        QuditDim::new(v).unwrap()
    }

    #[test]
    fn layers_split_after_non_clifford() {
        let mut c = Circuit::new(2, d(2));
        c.push(GateOp::one(GateName::H, 0)).unwrap();
        c.push(GateOp::one(GateName::T, 0)).unwrap();
        c.push(GateOp::two(GateName::Sum, 0, 1)).unwrap();
        assert_eq!(layer_ranges(&c), vec![0..2, 2..3]);
        let empty = Circuit::new(2, d(2));
        assert_eq!(layer_ranges(&empty), vec![0..0]);
    }

    #[test]
    fn csv_round_trip() {
        let rec = BenchRecord {
            backend: Backend::Gcamps,
            d: 3,
            n: 3,
            shot: 0,
            seed: 7,
            layer: 1,
            chi_max: 3,
            chi_vector: "3|1".into(),
            mem_bytes: memory_from_bonds(d(3), &[3, 1]),
            mem_worst_bytes: 0,
            dt_seconds: 0.5,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, std::slice::from_ref(&rec)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert!(text.contains("gcamps,3,3,0,7,1,3,3|1,"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), vec![rec]);
    }

    #[test]
    fn backend_names() {
        for b in [Backend::Gcamps, Backend::Mps, Backend::Statevector] {
            assert_eq!(b.as_str().parse::<Backend>().unwrap(), b);
        }
        assert!("dmrg".parse::<Backend>().is_err());
    }

    #[test]
    fn shot_seeds_differ() {
        assert_ne!(shot_seed(1, 0), shot_seed(1, 1));
        assert_ne!(shot_seed(1, 1), shot_seed(2, 0));
    }
}
