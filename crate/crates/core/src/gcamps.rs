//! The hybrid state `C|MPS⟩`.
//!
//! Clifford gates only touch the tableau holding `C`. A non-Clifford `U` is
//! expanded in Pauli strings, each string is pulled through `C` (giving
//! `C†UC`), the resulting sum is applied to the MPS, and a greedy sweep then
//! tries every catalog disentangler `Q` on each bond. An accepted `Q` goes onto
//! the MPS and `Q†` onto the right of `C`, so the physical state is unchanged.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use faer::Mat;

use crate::catalog::DisentanglerCatalog;
use crate::circuit::{clifford_matrix, gate_matrix, swap_gate, GateOp};
use crate::mps::{gate_on_theta, kron, memory_from_bonds, renyi2, Absorb, Mps, TruncationPolicy};
use crate::par::Execution;
use crate::pauli::{decompose_unitary, unitarity_error, PauliString, QuditDim};
use crate::statevector::DenseState;
use crate::tableau::{inverse_word, CliffordGate, Tableau};
use crate::{c64, CMat, Error, Result};

pub const DEFAULT_PASS_LIMIT: usize = 4;

/// Relative singular-value threshold used when counting a bond's rank.
pub const RANK_TOL: f64 = 1e-12;

/// Rényi-2 decrease below which a candidate does not count as an improvement.
pub const RENYI_TOL: f64 = 1e-9;

/// A catalog together with the dense `d² × d²` unitary of every entry.
#[derive(Debug)]
pub struct Disentanglers {
    catalog: DisentanglerCatalog,
    unitaries: Vec<CMat>,
    /// Indices of entries that can change entanglement.
    candidates: Vec<usize>,
}

impl Disentanglers {
    pub fn new(catalog: DisentanglerCatalog) -> Self {
        let d = catalog.d;
        let unitaries = catalog.entries.iter().map(|e| word_unitary(&e.word, d)).collect();
        let candidates = catalog.entangling().map(|(i, _)| i).collect();
        Disentanglers { catalog, unitaries, candidates }
    }

    /// Shared, lazily built instance for `d`.
    pub fn for_dim(d: QuditDim) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Disentanglers>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(hit) = cache.lock().expect("cache lock").get(&d.get()) {
            return Ok(hit.clone());
        }
        let built = Arc::new(Disentanglers::new(DisentanglerCatalog::build(d, Execution::default())?));
        cache.lock().expect("cache lock").insert(d.get(), built.clone());
        Ok(built)
    }

    pub fn catalog(&self) -> &DisentanglerCatalog {
        &self.catalog
    }

    pub fn unitary(&self, entry: usize) -> &CMat {
        &self.unitaries[entry]
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }
}

/// Dense unitary of a word on sites {0, 1}, indexed `|site0, site1⟩`.
pub fn word_unitary(word: &[CliffordGate], d: QuditDim) -> CMat {
    let dd = d.usize();
    let id = Mat::<c64>::identity(dd, dd);
    let swap = swap_gate(d);
    let mut u = Mat::<c64>::identity(dd * dd, dd * dd);
    for g in word {
        let sites = g.sites();
        let local = clifford_matrix(g, d);
        let m = match sites.as_slice() {
            [0] => kron(&local, &id),
            [1] => kron(&id, &local),
            [0, 1] => local,
            [1, 0] => &(&swap * &local) * &swap,
            other => panic!("catalog word touches sites {other:?}"),
        };
        u = &m * &u;
    }
    u
}

/// `(rank above RANK_TOL, Rényi-2 entropy)`, compared lexicographically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    pub rank: usize,
    pub renyi2: f64,
}

impl Objective {
    pub fn from_singular_values(sv: &[f64]) -> Self {
        let top = sv.first().copied().unwrap_or(0.0);
        let rank = sv.iter().filter(|&&s| s > RANK_TOL * top).count().max(1);
        Objective { rank, renyi2: renyi2(sv) }
    }

    fn of(theta: &CMat) -> Result<Self> {
        let sv = crate::linalg::singular_values(theta)?;
        Ok(Self::from_singular_values(&sv))
    }

    /// Strict improvement over `other`.
    pub fn better_than(&self, other: &Objective) -> bool {
        self.rank < other.rank || (self.rank == other.rank && self.renyi2 < other.renyi2 - RENYI_TOL)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppliedDisentangler {
    pub bond: usize,
    pub entry: usize,
    pub before: Objective,
    pub after: Objective,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DisentangleReport {
    pub bonds_visited: usize,
    pub passes: usize,
    pub gates_applied: Vec<AppliedDisentangler>,
    /// A full pass accepted nothing before the pass limit was reached.
    pub early_termination: bool,
}

/// One factor of `C`, kept only in verification mode.
#[derive(Clone, Debug)]
enum Factor {
    Gate(CliffordGate),
}

#[derive(Clone)]
pub struct GcampsState {
    tableau: Tableau,
    mps: Mps,
    disentanglers: Arc<Disentanglers>,
    /// `C = factors[0] · factors[1] · …` when verification is on.
    log: Option<VecDeque<Factor>>,
    pass_limit: usize,
    exec: Execution,
}

impl GcampsState {
    /// `C = I`, `|MPS⟩ = |0…0⟩`.
    pub fn new(n: usize, d: QuditDim, disentanglers: Arc<Disentanglers>) -> Result<Self> {
        if disentanglers.catalog.d != d {
            return Err(Error::Invalid(format!("catalog is for d={}, state has d={d}", disentanglers.catalog.d)));
        }
        Ok(GcampsState {
            tableau: Tableau::identity(n, d)?,
            mps: Mps::zero(n, d, TruncationPolicy::default())?,
            disentanglers,
            log: None,
            pass_limit: DEFAULT_PASS_LIMIT,
            exec: Execution::default(),
        })
    }

    /// Record every factor of `C` so [`dense_state`](Self::dense_state) works.
    pub fn with_verification(mut self) -> Self {
        self.log = Some(VecDeque::new());
        self
    }

    pub fn with_policy(mut self, policy: TruncationPolicy) -> Self {
        self.mps.set_policy(policy);
        self
    }

    pub fn with_pass_limit(mut self, passes: usize) -> Self {
        self.pass_limit = passes;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn n(&self) -> usize {
        self.tableau.n()
    }

    pub fn dim(&self) -> QuditDim {
        self.tableau.dim()
    }

    pub fn tableau(&self) -> &Tableau {
        &self.tableau
    }

    pub fn mps(&self) -> &Mps {
        &self.mps
    }

    pub fn mps_mut(&mut self) -> &mut Mps {
        &mut self.mps
    }

    pub fn apply_clifford(&mut self, g: &CliffordGate) -> Result<()> {
        self.tableau.apply_gate(g)?;
        if let Some(log) = &mut self.log {
            log.push_front(Factor::Gate(*g));
        }
        Ok(())
    }

    /// Dispatch a circuit op to the Clifford or non-Clifford path.
    pub fn apply_gate(&mut self, op: &GateOp) -> Result<Option<DisentangleReport>> {
        op.validate(self.n(), self.dim())?;
        if let Some(word) = op.to_clifford_word() {
            for g in &word {
                self.apply_clifford(g)?;
            }
            return Ok(None);
        }
        let u = gate_matrix(op, self.dim())?;
        self.apply_non_clifford(op.sites[0], &u).map(Some)
    }

    pub fn apply_non_clifford(&mut self, site: usize, u: &CMat) -> Result<DisentangleReport> {
        let n = self.n();
        if site >= n {
            return Err(Error::Site { site, n });
        }
        let dev = unitarity_error(u);
        if dev > crate::mps::UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        let local = decompose_unitary(u, self.dim())?;
        let tableau = &self.tableau;
        let commuted = local.map_strings(|p| tableau.conjugate_inverse(&p.embed(n, &[site])?))?;
        self.mps.apply_pauli_sum(&commuted)?;
        self.disentangle()
    }

    /// Greedy disentangling sweeps over every bond.
    ///
    /// A pass runs right to left and then left to right. At each bond with
    /// χ > 1 every entangling catalog entry is scored on the two-site block;
    /// the best is accepted if it strictly improves the bond's objective.
    pub fn disentangle(&mut self) -> Result<DisentangleReport> {
        let n = self.n();
        let mut report = DisentangleReport::default();
        if n < 2 {
            report.early_termination = true;
            return Ok(report);
        }
        for _ in 0..self.pass_limit {
            report.passes += 1;
            let mut accepted = false;
            for bond in (0..n - 1).rev() {
                accepted |= self.optimise_bond(bond, Absorb::Left, &mut report)?;
            }
            for bond in 0..n - 1 {
                accepted |= self.optimise_bond(bond, Absorb::Right, &mut report)?;
            }
            if !accepted {
                report.early_termination = true;
                break;
            }
        }
        Ok(report)
    }

    fn optimise_bond(&mut self, bond: usize, absorb: Absorb, report: &mut DisentangleReport) -> Result<bool> {
        if self.mps.bond_dims()[bond] == 1 {
            return Ok(false);
        }
        report.bonds_visited += 1;
        let d = self.dim().usize();
        let theta = self.mps.pair_theta(bond)?;
        let before = Objective::of(&theta)?;
        let set = &self.disentanglers;
        let scores = self.exec.map(set.candidates(), |&entry| {
            Objective::of(&gate_on_theta(&theta, set.unitary(entry), d)).map(|o| (entry, o))
        });
        let mut best: Option<(usize, Objective)> = None;
        for s in scores {
            let (entry, obj) = s?;
            let beats_best = best.as_ref().is_none_or(|(_, b)| obj.better_than(b));
            if obj.better_than(&before) && beats_best {
                best = Some((entry, obj));
            }
        }
        let Some((entry, after)) = best else { return Ok(false) };
        let moved = gate_on_theta(&theta, self.disentanglers.unitary(entry), d);
        self.mps.commit_pair(bond, &moved, absorb)?;
        let word: Vec<CliffordGate> =
            self.disentanglers.catalog.entries[entry].word.iter().map(|g| g.relabel(|s| s + bond)).collect();
        let inverse = inverse_word(&word, self.dim());
        self.tableau.right_multiply(&inverse)?;
        if let Some(log) = &mut self.log {
            // C·(w_k … w_1) with w_1 applied first: push the last gate first.
            for g in inverse.iter().rev() {
                log.push_back(Factor::Gate(*g));
            }
        }
        report.gates_applied.push(AppliedDisentangler { bond, entry, before, after });
        Ok(true)
    }

    /// `⟨ψ|σ|ψ⟩ = ⟨mps|C†σC|mps⟩`.
    pub fn expectation(&self, sigma: &PauliString) -> Result<c64> {
        let pulled = self.tableau.conjugate_inverse(sigma)?;
        self.mps.expectation_pauli(&pulled)
    }

    /// `⟨(σ + σ†)/2⟩`.
    pub fn hermitian_expectation(&self, sigma: &PauliString) -> Result<f64> {
        Ok(self.expectation(sigma)?.re)
    }

    /// Bytes for the MPS at 16 per amplitude plus the tableau at 8 per entry.
    ///
    /// With `worst_case`, every bond is first multiplied by `d` and capped at
    /// its structural ceiling.
    pub fn memory_estimate(&self, worst_case: bool) -> u64 {
        let n = self.n();
        let d = self.dim();
        let tableau = (2 * n * (2 * n + 1) * 8) as u64;
        let mut bonds = self.mps.bond_dims();
        if worst_case {
            bonds = worst_case_bonds(d, &bonds);
        }
        memory_from_bonds(d, &bonds) + tableau
    }

    /// Dense physical state `C|MPS⟩`; needs verification mode.
    pub fn dense_state(&self) -> Result<DenseState> {
        let log = self.log.as_ref().ok_or_else(|| Error::Unsupported("dense replay needs verification mode".into()))?;
        let mut state = self.mps.to_dense()?;
        for f in log.iter().rev() {
            let Factor::Gate(g) = f;
            state.apply_gate(&GateOp::from_clifford(g))?;
        }
        Ok(state)
    }
}

/// Every bond times `d`, capped at `d^{min(i+1, n-i-1)}`.
pub fn worst_case_bonds(d: QuditDim, bonds: &[usize]) -> Vec<usize> {
    let n = bonds.len() + 1;
    bonds.iter().enumerate().map(|(i, &c)| (c.saturating_mul(d.usize())).min(Mps::bond_ceiling(d, n, i))).collect()
}
