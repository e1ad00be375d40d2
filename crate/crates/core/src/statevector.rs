//! Dense reference simulator.
//!
//! Amplitudes are indexed with site 0 as the most significant base-`d` digit.
//! Gates act by contracting along the affected axes; the full `d^n × d^n`
//! operator is never formed.

use crate::circuit::{gate_matrix, Circuit, GateOp};
use crate::pauli::{PauliString, QuditDim};
use crate::{c64, CMat, Error, Result};

#[derive(Clone, Debug)]
pub struct DenseState {
    n: usize,
    d: QuditDim,
    amps: Vec<c64>,
}

impl DenseState {
    /// `|0…0⟩`.
    pub fn zero(n: usize, d: QuditDim) -> Result<Self> {
        let dim = d.dense_dim(n)?;
        let mut amps = vec![c64::new(0.0, 0.0); dim];
        amps[0] = c64::new(1.0, 0.0);
        Ok(DenseState { n, d, amps })
    }

    pub fn from_amplitudes(n: usize, d: QuditDim, amps: Vec<c64>) -> Result<Self> {
        let dim = d.dense_dim(n)?;
        if amps.len() != dim {
            return Err(Error::Shape(format!("{} amplitudes for d^n = {dim}", amps.len())));
        }
        Ok(DenseState { n, d, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> QuditDim {
        self.d
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amps
    }

    pub fn amplitude(&self, digits: &[u32]) -> c64 {
        let idx = digits.iter().fold(0usize, |acc, &s| acc * self.d.usize() + s as usize);
        self.amps[idx]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn stride(&self, site: usize) -> usize {
        self.d.usize().pow((self.n - 1 - site) as u32)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n {
            return Err(Error::Site { site, n: self.n });
        }
        Ok(())
    }

    pub fn apply_one(&mut self, site: usize, u: &CMat) -> Result<()> {
        self.check_site(site)?;
        let d = self.d.usize();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::Shape(format!("{}x{} gate on a d={} site", u.nrows(), u.ncols(), d)));
        }
        let stride = self.stride(site);
        let mut buf = vec![c64::new(0.0, 0.0); d];
        for base in 0..self.amps.len() {
            if !(base / stride).is_multiple_of(d) {
                continue;
            }
            for (s, b) in buf.iter_mut().enumerate() {
                *b = self.amps[base + s * stride];
            }
            for r in 0..d {
                let mut acc = c64::new(0.0, 0.0);
                for (s, b) in buf.iter().enumerate() {
                    acc += u[(r, s)] * b;
                }
                self.amps[base + r * stride] = acc;
            }
        }
        Ok(())
    }

    /// Apply `u` indexed `|a, b⟩` (a major) to sites `a` and `b`, in any order.
    pub fn apply_two(&mut self, a: usize, b: usize, u: &CMat) -> Result<()> {
        self.check_site(a)?;
        self.check_site(b)?;
        if a == b {
            return Err(Error::Invalid("two-site gate on a single site".into()));
        }
        let d = self.d.usize();
        if u.nrows() != d * d || u.ncols() != d * d {
            return Err(Error::Shape(format!("{}x{} gate on two d={} sites", u.nrows(), u.ncols(), d)));
        }
        let (sa, sb) = (self.stride(a), self.stride(b));
        let mut buf = vec![c64::new(0.0, 0.0); d * d];
        for base in 0..self.amps.len() {
            if (base / sa) % d != 0 || (base / sb) % d != 0 {
                continue;
            }
            for i in 0..d {
                for j in 0..d {
                    buf[i * d + j] = self.amps[base + i * sa + j * sb];
                }
            }
            for i in 0..d {
                for j in 0..d {
                    let mut acc = c64::new(0.0, 0.0);
                    for (k, bv) in buf.iter().enumerate() {
                        acc += u[(i * d + j, k)] * bv;
                    }
                    self.amps[base + i * sa + j * sb] = acc;
                }
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, g: &GateOp) -> Result<()> {
        g.validate(self.n, self.d)?;
        let u = gate_matrix(g, self.d)?;
        match g.sites.as_slice() {
            [a] => self.apply_one(*a, &u),
            [a, b] => self.apply_two(*a, *b, &u),
            _ => unreachable!("validated arity"),
        }
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.n_sites() != self.n || p.dim() != self.d {
            return Err(Error::Shape("pauli string does not match the state".into()));
        }
        for site in 0..self.n {
            if p.x(site) != 0 || p.z(site) != 0 {
                self.apply_one(site, &p.site_matrix(site))?;
            }
        }
        let ph = p.phase().value(self.d);
        for a in &mut self.amps {
            *a *= ph;
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DenseState) -> c64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `⟨ψ|p|ψ⟩`.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<c64> {
        let mut moved = self.clone();
        moved.apply_pauli(p)?;
        Ok(self.inner(&moved))
    }

    /// Singular values of the `d^cut × d^{n-cut}` reshaping, descending.
    pub fn schmidt_values(&self, cut: usize) -> Result<Vec<f64>> {
        if cut == 0 || cut >= self.n {
            return Err(Error::Invalid(format!("cut {cut} must lie strictly inside 0..{}", self.n)));
        }
        let rows = self.d.usize().pow(cut as u32);
        let cols = self.amps.len() / rows;
        let m = faer::Mat::from_fn(rows, cols, |r, c| self.amps[r * cols + c]);
        crate::linalg::singular_values(&m)
    }
}

/// `|⟨a|b⟩|`.
pub fn fidelity(a: &DenseState, b: &DenseState) -> f64 {
    a.inner(b).norm()
}

pub fn run_circuit(c: &Circuit) -> Result<DenseState> {
    let mut s = DenseState::zero(c.n, c.d)?;
    for op in &c.ops {
        s.apply_gate(op)?;
    }
    Ok(s)
}
