//! Matrix product states over `d`-level sites.
//!
//! Site tensor `i` has shape `(χ_{i-1}, d, χ_i)` and is stored as a
//! `(χ_{i-1}·d) × χ_i` matrix with row index `a·d + s`. The chain is kept in
//! mixed canonical form around `center`: tensors to its left are left-isometries,
//! tensors to its right are right-isometries.

use faer::Mat;

use crate::linalg::{singular_values, svd, Svd};
use crate::pauli::{unitarity_error, PauliString, PauliSum, QuditDim};
use crate::statevector::DenseState;
use crate::{c64, CMat, Error, Result};

/// Unitarity tolerance for caller-supplied gates.
pub const UNITARY_TOL: f64 = 1e-10;

/// Norm drift beyond which an applied operator is treated as non-unitary.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    pub chi_max: usize,
    /// Singular values with `σ_k / σ_max` at or below this are discarded.
    pub cutoff: f64,
}

impl TruncationPolicy {
    pub fn new(chi_max: usize, cutoff: f64) -> Result<Self> {
        if chi_max == 0 {
            return Err(Error::Invalid("chi_max must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&cutoff) {
            return Err(Error::Invalid(format!("cutoff {cutoff} must lie in [0, 1)")));
        }
        Ok(TruncationPolicy { chi_max, cutoff })
    }

    /// No truncation at all.
    pub fn exact() -> Self {
        TruncationPolicy { chi_max: usize::MAX, cutoff: 0.0 }
    }

    /// Number of singular values kept (at least one).
    pub fn keep(&self, sv: &[f64]) -> usize {
        let Some(&top) = sv.first() else { return 0 };
        let above = sv.iter().take_while(|&&s| s > self.cutoff * top && s > 0.0).count();
        above.clamp(1, self.chi_max.max(1)).min(sv.len())
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { chi_max: usize::MAX, cutoff: 1e-12 }
    }
}

/// Which side of a split receives the singular values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Absorb {
    Left,
    Right,
}

/// Diagonal-in-bond operator built from a [`PauliSum`]: bond dimension equals
/// the number of terms and coefficients sit on site 0.
#[derive(Clone, Debug)]
pub struct PauliMpo {
    n: usize,
    d: QuditDim,
    coeffs: Vec<c64>,
    /// `factors[j][i]`: the `d × d` factor of term `j` on site `i`, or `None` for identity.
    factors: Vec<Vec<Option<CMat>>>,
}

impl PauliMpo {
    pub fn from_sum(sum: &PauliSum) -> Result<Self> {
        let (_, first) =
            sum.terms().first().ok_or_else(|| Error::Shape("cannot build an operator from an empty sum".into()))?;
        let (n, d) = (first.n_sites(), first.dim());
        let mut coeffs = Vec::with_capacity(sum.len());
        let mut factors = Vec::with_capacity(sum.len());
        for (c, p) in sum.terms() {
            coeffs.push(*c * p.phase().value(d));
            factors
                .push((0..n).map(|i| if p.x(i) == 0 && p.z(i) == 0 { None } else { Some(p.site_matrix(i)) }).collect());
        }
        Ok(PauliMpo { n, d, coeffs, factors })
    }

    pub fn from_string(p: &PauliString) -> Result<Self> {
        Self::from_sum(&PauliSum::new([(c64::new(1.0, 0.0), p.clone())])?)
    }

    pub fn bond_dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// Contract the operator over its bond into a dense matrix (small `n` only).
    pub fn to_dense(&self) -> Result<CMat> {
        let dim = self.d.dense_dim(self.n)?;
        let dd = self.d.usize();
        let id = Mat::<c64>::identity(dd, dd);
        let mut total = Mat::<c64>::zeros(dim, dim);
        for (c, fs) in self.coeffs.iter().zip(&self.factors) {
            let mut acc = Mat::<c64>::identity(1, 1);
            for f in fs {
                let f = f.as_ref().unwrap_or(&id);
                acc = kron(&acc, f);
            }
            total += faer::Scale(*c) * &acc;
        }
        Ok(total)
    }
}

pub(crate) fn kron(a: &CMat, b: &CMat) -> CMat {
    Mat::from_fn(a.nrows() * b.nrows(), a.ncols() * b.ncols(), |r, c| {
        a[(r / b.nrows(), c / b.ncols())] * b[(r % b.nrows(), c % b.ncols())]
    })
}

fn qr(m: &CMat) -> (CMat, CMat) {
    let f = m.qr();
    (f.compute_thin_Q(), f.thin_R().to_owned())
}

/// `(χl·d) × χr` → `χl × (d·χr)`.
fn to_right(t: &CMat, d: usize) -> CMat {
    let (chil, chir) = (t.nrows() / d, t.ncols());
    Mat::from_fn(chil, d * chir, |a, col| t[(a * d + col / chir, col % chir)])
}

/// Inverse of [`to_right`].
fn from_right(m: &CMat, d: usize) -> CMat {
    let (chil, chir) = (m.nrows(), m.ncols() / d);
    Mat::from_fn(chil * d, chir, |row, b| m[(row / d, (row % d) * chir + b)])
}

/// Apply `u` (indexed `|s1, s2⟩`) to a two-site block `θ[(a,s1), (s2,b)]`.
pub(crate) fn gate_on_theta(theta: &CMat, u: &CMat, d: usize) -> CMat {
    let chil = theta.nrows() / d;
    let chir = theta.ncols() / d;
    // Gather into ((s1,s2), (a,b)), multiply, scatter back.
    let p = Mat::from_fn(d * d, chil * chir, |s, ab| {
        let (s1, s2) = (s / d, s % d);
        let (a, b) = (ab / chir, ab % chir);
        theta[(a * d + s1, s2 * chir + b)]
    });
    let q = u * &p;
    Mat::from_fn(chil * d, d * chir, |row, col| {
        let (a, s1) = (row / d, row % d);
        let (s2, b) = (col / chir, col % chir);
        q[(s1 * d + s2, a * chir + b)]
    })
}

#[derive(Clone, Debug)]
pub struct Mps {
    d: QuditDim,
    tensors: Vec<CMat>,
    center: usize,
    policy: TruncationPolicy,
}

impl Mps {
    /// `|digits⟩` with every bond of dimension one.
    pub fn product_state(d: QuditDim, digits: &[u32], policy: TruncationPolicy) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::Invalid("an MPS needs at least one site".into()));
        }
        let dd = d.usize();
        let tensors = digits
            .iter()
            .map(|&s| {
                if s >= d.get() {
                    return Err(Error::Invalid(format!("digit {s} out of range for d={d}")));
                }
                let mut t = Mat::<c64>::zeros(dd, 1);
                t[(s as usize, 0)] = c64::new(1.0, 0.0);
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Mps { d, tensors, center: 0, policy })
    }

    pub fn zero(n: usize, d: QuditDim, policy: TruncationPolicy) -> Result<Self> {
        Self::product_state(d, &vec![0; n], policy)
    }

    pub fn n(&self) -> usize {
        self.tensors.len()
    }

    pub fn dim(&self) -> QuditDim {
        self.d
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn set_policy(&mut self, policy: TruncationPolicy) {
        self.policy = policy;
    }

    pub fn tensors(&self) -> &[CMat] {
        &self.tensors
    }

    /// `χ_i` between sites `i` and `i+1`, length `n − 1`.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.n() - 1].iter().map(|t| t.ncols()).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Structural ceiling `d^{min(i+1, n-i-1)}` for bond `i`.
    pub fn bond_ceiling(d: QuditDim, n: usize, bond: usize) -> usize {
        let k = (bond + 1).min(n - bond - 1) as u32;
        (d.usize()).checked_pow(k).unwrap_or(usize::MAX)
    }

    /// Bytes needed at 16 bytes per complex amplitude.
    pub fn memory_bytes(&self) -> u64 {
        memory_from_bonds(self.d, &self.bond_dims())
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n() {
            return Err(Error::Site { site, n: self.n() });
        }
        Ok(())
    }

    fn left_step(&mut self) {
        let c = self.center;
        let d = self.d.usize();
        let (q, r) = qr(&self.tensors[c]);
        self.tensors[c] = q;
        let next = to_right(&self.tensors[c + 1], d);
        self.tensors[c + 1] = from_right(&(&r * &next), d);
        self.center += 1;
    }

    fn right_step(&mut self) {
        let c = self.center;
        let d = self.d.usize();
        let m = to_right(&self.tensors[c], d);
        let (q, r) = qr(&m.adjoint().to_owned());
        self.tensors[c] = from_right(&q.adjoint().to_owned(), d);
        self.tensors[c - 1] = &self.tensors[c - 1] * r.adjoint();
        self.center -= 1;
    }

    /// Move the orthogonality center to `site`.
    pub fn move_center(&mut self, site: usize) -> Result<()> {
        self.check_site(site)?;
        while self.center < site {
            self.left_step();
        }
        while self.center > site {
            self.right_step();
        }
        Ok(())
    }

    pub fn apply_single_site(&mut self, site: usize, u: &CMat) -> Result<()> {
        self.check_site(site)?;
        let d = self.d.usize();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::Shape(format!("{}x{} gate on a d={} site", u.nrows(), u.ncols(), d)));
        }
        let dev = unitarity_error(u);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        self.apply_site_op(site, u);
        Ok(())
    }

    /// Contract a `d × d` operator into a site; canonical form survives only if it is unitary.
    fn apply_site_op(&mut self, site: usize, u: &CMat) {
        let d = self.d.usize();
        let t = &self.tensors[site];
        let chil = t.nrows() / d;
        let mut out = Mat::<c64>::zeros(t.nrows(), t.ncols());
        for a in 0..chil {
            let block = u * t.submatrix(a * d, 0, d, t.ncols());
            out.submatrix_mut(a * d, 0, d, t.ncols()).copy_from(&block);
        }
        self.tensors[site] = out;
    }

    /// The two-site block on `(site, site+1)`; the center is moved onto the pair.
    pub(crate) fn pair_theta(&mut self, site: usize) -> Result<CMat> {
        if site + 1 >= self.n() {
            return Err(Error::Site { site: site + 1, n: self.n() });
        }
        if self.center != site && self.center != site + 1 {
            self.move_center(site)?;
        }
        let d = self.d.usize();
        Ok(&self.tensors[site] * &to_right(&self.tensors[site + 1], d))
    }

    /// Split a two-site block back into the chain under the truncation policy.
    /// Returns the discarded weight `Σ σ²` of the dropped singular values.
    pub(crate) fn commit_pair(&mut self, site: usize, theta: &CMat, absorb: Absorb) -> Result<f64> {
        let d = self.d.usize();
        let Svd { u, s, v } = svd(theta)?;
        let keep = self.policy.keep(&s);
        let discarded: f64 = s[keep..].iter().map(|x| x * x).sum();
        let kept: f64 = s[..keep].iter().map(|x| x * x).sum();
        let scale = if kept > 0.0 { 1.0 / kept.sqrt() } else { 1.0 };
        let left_u = u.submatrix(0, 0, u.nrows(), keep);
        let vh = Mat::from_fn(keep, v.nrows(), |k, j| v[(j, k)].conj());
        match absorb {
            Absorb::Right => {
                self.tensors[site] = left_u.to_owned();
                let sv = Mat::from_fn(keep, vh.ncols(), |k, j| vh[(k, j)] * (s[k] * scale));
                self.tensors[site + 1] = from_right(&sv, d);
                self.center = site + 1;
            }
            Absorb::Left => {
                self.tensors[site] = Mat::from_fn(left_u.nrows(), keep, |r, k| left_u[(r, k)] * (s[k] * scale));
                self.tensors[site + 1] = from_right(&vh, d);
                self.center = site;
            }
        }
        debug_assert!(
            keep <= Self::bond_ceiling(self.d, self.n(), site),
            "bond {site} = {keep} exceeds its structural ceiling"
        );
        Ok(discarded)
    }

    /// Apply `u` (indexed `|site, site+1⟩`) to adjacent sites.
    /// Returns the truncation error.
    pub fn apply_two_site(&mut self, site: usize, u: &CMat) -> Result<f64> {
        self.apply_two_site_absorb(site, u, Absorb::Right)
    }

    pub fn apply_two_site_absorb(&mut self, site: usize, u: &CMat, absorb: Absorb) -> Result<f64> {
        let d = self.d.usize();
        if u.nrows() != d * d || u.ncols() != d * d {
            return Err(Error::Shape(format!("{}x{} gate on two d={} sites", u.nrows(), u.ncols(), d)));
        }
        let dev = unitarity_error(u);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        self.apply_pair_unchecked(site, u, absorb)
    }

    pub(crate) fn apply_pair_unchecked(&mut self, site: usize, u: &CMat, absorb: Absorb) -> Result<f64> {
        let theta = self.pair_theta(site)?;
        let theta = gate_on_theta(&theta, u, self.d.usize());
        self.commit_pair(site, &theta, absorb)
    }

    /// Apply `u` indexed `|a, b⟩` to arbitrary distinct sites, routing the
    /// farther qudit next to the nearer one with SWAPs and back.
    pub fn apply_two_site_any(&mut self, a: usize, b: usize, u: &CMat) -> Result<f64> {
        self.check_site(a)?;
        self.check_site(b)?;
        if a == b {
            return Err(Error::Invalid("two-site gate on a single site".into()));
        }
        let d = self.d;
        let dd = d.usize();
        if u.nrows() != dd * dd || u.ncols() != dd * dd {
            return Err(Error::Shape(format!("{}x{} gate on two d={} sites", u.nrows(), u.ncols(), dd)));
        }
        let dev = unitarity_error(u);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        let swap = crate::circuit::swap_gate(d);
        let (lo, hi, gate) = if a < b { (a, b, u.clone()) } else { (b, a, &(&swap * u) * &swap) };
        let mut err = 0.0;
        for k in (lo + 1..hi).rev() {
            err += self.apply_pair_unchecked(k, &swap, Absorb::Left)?;
        }
        err += self.apply_pair_unchecked(lo, &gate, Absorb::Right)?;
        for k in lo + 1..hi {
            err += self.apply_pair_unchecked(k, &swap, Absorb::Right)?;
        }
        Ok(err)
    }

    /// Apply a sum of Pauli strings. A single term is a product operator and is
    /// applied site by site; longer sums go through a [`PauliMpo`] followed by
    /// a compression sweep. Returns the truncation error.
    pub fn apply_pauli_sum(&mut self, ps: &PauliSum) -> Result<f64> {
        let mpo = PauliMpo::from_sum(ps)?;
        if mpo.n != self.n() || mpo.d != self.d {
            return Err(Error::Shape(format!(
                "operator on {} sites (d={}) for an MPS of {} sites (d={})",
                mpo.n,
                mpo.d,
                self.n(),
                self.d
            )));
        }
        if mpo.bond_dim() == 1 {
            for (i, f) in mpo.factors[0].iter().enumerate() {
                if let Some(f) = f {
                    self.apply_site_op(i, f);
                }
            }
            let c = mpo.coeffs[0];
            let drift = (c.norm() - 1.0).abs();
            if drift > NORM_DRIFT_TOL {
                return Err(Error::NormDrift(drift));
            }
            let center = self.center;
            self.tensors[center] = faer::Scale(c) * &self.tensors[center];
            return Ok(0.0);
        }
        self.apply_mpo(&mpo);
        self.compress()
    }

    fn apply_mpo(&mut self, mpo: &PauliMpo) {
        let n = self.n();
        let d = self.d.usize();
        let k = mpo.bond_dim();
        for i in 0..n {
            let t = &self.tensors[i];
            let (chil, chir) = (t.nrows() / d, t.ncols());
            let lk = if i == 0 { 1 } else { k };
            let rk = if i == n - 1 { 1 } else { k };
            let mut out = Mat::<c64>::zeros(chil * lk * d, chir * rk);
            for j in 0..k {
                let mut block = t.to_owned();
                if let Some(f) = &mpo.factors[j][i] {
                    for a in 0..chil {
                        let b = f * t.submatrix(a * d, 0, d, chir);
                        block.submatrix_mut(a * d, 0, d, chir).copy_from(&b);
                    }
                }
                if i == 0 {
                    block = faer::Scale(mpo.coeffs[j]) * &block;
                }
                let jl = if lk == 1 { 0 } else { j };
                let jr = if rk == 1 { 0 } else { j };
                for a in 0..chil {
                    for s in 0..d {
                        let row = (a * lk + jl) * d + s;
                        for b in 0..chir {
                            out[(row, b * rk + jr)] += block[(a * d + s, b)];
                        }
                    }
                }
            }
            self.tensors[i] = out;
        }
    }

    /// Re-canonicalize an arbitrary chain and truncate every bond under the policy.
    fn compress(&mut self) -> Result<f64> {
        let n = self.n();
        let d = self.d.usize();
        self.center = 0;
        while self.center < n - 1 {
            self.left_step();
        }
        let norm = self.tensors[n - 1].norm_l2();
        let drift = (norm - 1.0).abs();
        if drift > NORM_DRIFT_TOL {
            return Err(Error::NormDrift(drift));
        }
        let mut err = 0.0;
        for i in (1..n).rev() {
            let m = to_right(&self.tensors[i], d);
            let Svd { u, s, v } = svd(&m)?;
            let keep = self.policy.keep(&s);
            err += s[keep..].iter().map(|x| x * x).sum::<f64>();
            let vh = Mat::from_fn(keep, v.nrows(), |kk, j| v[(j, kk)].conj());
            let us = Mat::from_fn(u.nrows(), keep, |r, kk| u[(r, kk)] * s[kk]);
            self.tensors[i] = from_right(&vh, d);
            self.tensors[i - 1] = &self.tensors[i - 1] * &us;
            self.center = i - 1;
        }
        let norm = self.tensors[0].norm_l2();
        if norm > 0.0 {
            self.tensors[0] = faer::Scale(c64::new(1.0 / norm, 0.0)) * &self.tensors[0];
        }
        Ok(err)
    }

    /// Schmidt coefficients across `bond` (between sites `bond` and `bond+1`).
    pub fn schmidt_values(&mut self, bond: usize) -> Result<Vec<f64>> {
        if bond + 1 >= self.n() {
            return Err(Error::Site { site: bond + 1, n: self.n() });
        }
        self.move_center(bond)?;
        singular_values(&self.tensors[bond])
    }

    /// Von Neumann entropy `−Σ σ² ln σ²` across `bond`.
    pub fn entanglement_entropy(&mut self, bond: usize) -> Result<f64> {
        Ok(entropy(&self.schmidt_values(bond)?))
    }

    pub fn amplitude(&self, digits: &[u32]) -> Result<c64> {
        if digits.len() != self.n() {
            return Err(Error::Shape(format!("{} digits for {} sites", digits.len(), self.n())));
        }
        let d = self.d.usize();
        let mut v = Mat::<c64>::identity(1, 1);
        for (t, &s) in self.tensors.iter().zip(digits) {
            if s >= self.d.get() {
                return Err(Error::Invalid(format!("digit {s} out of range for d={}", self.d)));
            }
            let chil = t.nrows() / d;
            let slice = Mat::from_fn(chil, t.ncols(), |a, b| t[(a * d + s as usize, b)]);
            v = &v * &slice;
        }
        Ok(v[(0, 0)])
    }

    /// `⟨ψ| ⊗_i O_i |ψ⟩` with `None` meaning identity.
    fn product_expectation(&self, ops: &[Option<CMat>]) -> c64 {
        let d = self.d.usize();
        let mut env = Mat::<c64>::identity(1, 1);
        for (t, op) in self.tensors.iter().zip(ops) {
            let chil = t.nrows() / d;
            let chir = t.ncols();
            let ot = match op {
                Some(o) => {
                    let mut out = Mat::<c64>::zeros(t.nrows(), chir);
                    for a in 0..chil {
                        out.submatrix_mut(a * d, 0, d, chir).copy_from(&(o * t.submatrix(a * d, 0, d, chir)));
                    }
                    out
                }
                None => t.to_owned(),
            };
            let mut next = Mat::<c64>::zeros(chir, chir);
            for s in 0..d {
                let ts = Mat::from_fn(chil, chir, |a, b| t[(a * d + s, b)]);
                let os = Mat::from_fn(chil, chir, |a, b| ot[(a * d + s, b)]);
                next += ts.adjoint() * (&env * &os);
            }
            env = next;
        }
        env[(0, 0)]
    }

    pub fn norm(&self) -> f64 {
        let ops = vec![None; self.n()];
        self.product_expectation(&ops).re.max(0.0).sqrt()
    }

    pub fn expectation_pauli(&self, p: &PauliString) -> Result<c64> {
        if p.n_sites() != self.n() || p.dim() != self.d {
            return Err(Error::Shape("pauli string does not match the MPS".into()));
        }
        let ops: Vec<Option<CMat>> =
            (0..self.n()).map(|i| if p.x(i) == 0 && p.z(i) == 0 { None } else { Some(p.site_matrix(i)) }).collect();
        Ok(self.product_expectation(&ops) * p.phase().value(self.d))
    }

    pub fn expectation_mpo(&self, o: &PauliMpo) -> Result<c64> {
        if o.n != self.n() || o.d != self.d {
            return Err(Error::Shape("operator does not match the MPS".into()));
        }
        Ok(o.coeffs.iter().zip(&o.factors).map(|(c, f)| c * self.product_expectation(f)).sum())
    }

    /// Contract into a dense state vector.
    pub fn to_dense(&self) -> Result<DenseState> {
        let d = self.d.usize();
        self.d.dense_dim(self.n())?;
        // acc: (d^k) × χ, rows in big-endian digit order.
        let mut acc = Mat::<c64>::identity(1, 1);
        for t in &self.tensors {
            let chir = t.ncols();
            let rows = acc.nrows();
            let chil = t.nrows() / d;
            let mut next = Mat::<c64>::zeros(rows * d, chir);
            for s in 0..d {
                let ts = Mat::from_fn(chil, chir, |a, b| t[(a * d + s, b)]);
                let prod = &acc * &ts;
                for r in 0..rows {
                    for b in 0..chir {
                        next[(r * d + s, b)] = prod[(r, b)];
                    }
                }
            }
            acc = next;
        }
        let amps = (0..acc.nrows()).map(|r| acc[(r, 0)]).collect();
        DenseState::from_amplitudes(self.n(), self.d, amps)
    }

    /// Deviation of the left/right isometry conditions around the center.
    pub fn canonical_error(&self) -> f64 {
        let d = self.d.usize();
        let mut worst = 0.0f64;
        for (i, t) in self.tensors.iter().enumerate() {
            let gram = if i < self.center {
                t.adjoint() * t
            } else if i > self.center {
                let m = to_right(t, d);
                &m * m.adjoint()
            } else {
                continue;
            };
            let id = Mat::<c64>::identity(gram.nrows(), gram.ncols());
            worst = worst.max(crate::pauli::max_abs_diff(&gram, &id));
        }
        worst
    }
}

/// `−Σ p ln p` with `p = σ²`.
pub fn entropy(sv: &[f64]) -> f64 {
    sv.iter().map(|s| s * s).filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum()
}

/// `−ln Σ p²` with `p = σ² / Σσ²`.
pub fn renyi2(sv: &[f64]) -> f64 {
    let total: f64 = sv.iter().map(|s| s * s).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let purity: f64 = sv.iter().map(|s| (s * s / total).powi(2)).sum();
    -purity.ln()
}

/// `Σ_i 16·d·χ_{i-1}·χ_i` with unit boundary bonds.
pub fn memory_from_bonds(d: QuditDim, bonds: &[usize]) -> u64 {
    let n = bonds.len() + 1;
    (0..n)
        .map(|i| {
            let left = if i == 0 { 1 } else { bonds[i - 1] } as u64;
            let right = if i == n - 1 { 1 } else { bonds[i] } as u64;
            16 * d.get() as u64 * left * right
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{hadamard, shift, sum_gate};

    fn d(v: u32) -> QuditDim {
        QuditDim::new(v).unwrap()
    }

    #[test]
    fn product_state_amplitudes() {
        let m = Mps::product_state(d(2), &[1, 0], TruncationPolicy::default()).unwrap();
        assert_eq!(m.amplitude(&[1, 0]).unwrap(), c64::new(1.0, 0.0));
        assert_eq!(m.amplitude(&[0, 0]).unwrap(), c64::new(0.0, 0.0));
        assert_eq!(m.bond_dims(), vec![1]);
        assert!((m.norm() - 1.0).abs() < 1e-15);
        let m3 = Mps::zero(3, d(3), TruncationPolicy::default()).unwrap();
        assert_eq!(m3.amplitude(&[0, 0, 0]).unwrap(), c64::new(1.0, 0.0));
        assert!(Mps::product_state(d(3), &[3], TruncationPolicy::default()).is_err());
    }

    #[test]
    fn shift_moves_digit() {
        let mut m = Mps::zero(2, d(3), TruncationPolicy::default()).unwrap();
        m.apply_single_site(1, &shift(d(3))).unwrap();
        assert!((m.amplitude(&[0, 1]).unwrap() - c64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(m.apply_single_site(2, &shift(d(3))), Err(Error::Site { .. })));
        let bad = Mat::<c64>::identity(3, 3) * faer::Scale(c64::new(2.0, 0.0));
        assert!(matches!(m.apply_single_site(0, &bad), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn bell_pair_entropy() {
        let mut m = Mps::zero(2, d(2), TruncationPolicy::default()).unwrap();
        m.apply_single_site(0, &hadamard(d(2))).unwrap();
        m.apply_two_site(0, &sum_gate(d(2))).unwrap();
        assert_eq!(m.bond_dims(), vec![2]);
        assert!((m.entanglement_entropy(0).unwrap() - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn qutrit_pair_entropy() {
        let mut m = Mps::zero(2, d(3), TruncationPolicy::default()).unwrap();
        m.apply_single_site(0, &hadamard(d(3))).unwrap();
        m.apply_two_site(0, &sum_gate(d(3))).unwrap();
        assert_eq!(m.bond_dims(), vec![3]);
        assert!((m.entanglement_entropy(0).unwrap() - 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn identity_two_site_keeps_state() {
        let mut m = Mps::zero(3, d(3), TruncationPolicy::default()).unwrap();
        m.apply_single_site(1, &hadamard(d(3))).unwrap();
        m.apply_two_site(1, &sum_gate(d(3))).unwrap();
        let before = m.to_dense().unwrap();
        let dims = m.bond_dims();
        m.apply_two_site(0, &Mat::<c64>::identity(9, 9)).unwrap();
        let after = m.to_dense().unwrap();
        assert!(m.bond_dims().iter().zip(&dims).all(|(a, b)| a <= b));
        assert!((crate::statevector::fidelity(&before, &after) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn memory_formula() {
        assert_eq!(memory_from_bonds(d(3), &[1]), 96);
        assert_eq!(memory_from_bonds(d(3), &[3]), 288);
    }

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::new(0, 0.1).is_err());
        assert!(TruncationPolicy::new(4, 1.0).is_err());
        let p = TruncationPolicy::new(2, 0.1).unwrap();
        assert_eq!(p.keep(&[1.0, 0.5, 0.2, 0.05]), 2);
        assert_eq!(TruncationPolicy::default().keep(&[1.0, 1e-13]), 1);
        assert_eq!(TruncationPolicy::exact().keep(&[1.0, 1e-13]), 2);
    }
}
