//! Generalized Pauli strings over prime `d`.
//!
//! A [`PauliString`] denotes `τ^phase · Π_i X_i^{x_i} Z_i^{z_i}` with
//! `τ = e^{iπ/d}` and `ω = τ²`. Every factor is written X-before-Z on its site,
//! and phases are kept as exponents of `τ` modulo `2d` for both parities of `d`.

use std::f64::consts::PI;
use std::fmt;

use faer::Mat;

use crate::{c64, CMat, Error, Result};

/// Largest `d^n` for which dense matrices and vectors are built.
pub const DENSE_LIMIT: usize = 1 << 14;

/// Coefficients below this magnitude are dropped from a [`PauliSum`].
pub const DROP_TOL: f64 = 1e-14;

/// A prime local dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuditDim(u32);

impl QuditDim {
    pub fn new(d: u32) -> Result<Self> {
        if !(2..=251).contains(&d) || !(2..d).take_while(|p| p * p <= d).all(|p| !d.is_multiple_of(p)) {
            return Err(Error::NotPrime(d));
        }
        Ok(QuditDim(d))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn usize(self) -> usize {
        self.0 as usize
    }

    /// `τ^k` as a complex number.
    pub fn tau_pow(self, k: u32) -> c64 {
        let k = k % (2 * self.0);
        c64::from_polar(1.0, PI * k as f64 / self.0 as f64)
    }

    /// `ω^k`.
    pub fn omega_pow(self, k: u32) -> c64 {
        self.tau_pow(2 * (k % self.0))
    }

    /// Additive inverse in `Z_d`.
    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        (self.0 - a % self.0) % self.0
    }

    /// Multiplicative inverse in `Z_d` via Fermat's little theorem.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.0), "zero has no inverse mod {}", self.0);
        let (mut base, mut exp, mut acc) = (a as u64 % self.0 as u64, self.0 - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.0 as u64;
            }
            base = base * base % self.0 as u64;
            exp >>= 1;
        }
        acc as u32
    }

    /// `d^n`, failing when it exceeds the dense guard.
    pub fn dense_dim(self, n: usize) -> Result<usize> {
        let mut dim = 1usize;
        for _ in 0..n {
            dim = dim.saturating_mul(self.usize());
        }
        if dim > DENSE_LIMIT {
            return Err(Error::SizeGuard { dim, limit: DENSE_LIMIT });
        }
        Ok(dim)
    }
}

impl fmt::Display for QuditDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A phase `τ^k`, normalized to `0 ≤ k < 2d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhaseExp(u32);

impl PhaseExp {
    pub fn new(k: u32, d: QuditDim) -> Self {
        PhaseExp(k % (2 * d.get()))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    pub fn add(self, other: PhaseExp, d: QuditDim) -> Self {
        PhaseExp::new(self.0 + other.0, d)
    }

    pub fn neg(self, d: QuditDim) -> Self {
        PhaseExp::new(2 * d.get() - self.0, d)
    }

    pub fn value(self, d: QuditDim) -> c64 {
        d.tau_pow(self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    d: QuditDim,
    x: Vec<u8>,
    z: Vec<u8>,
    phase: PhaseExp,
}

impl PauliString {
    pub fn identity(n: usize, d: QuditDim) -> Self {
        PauliString { d, x: vec![0; n], z: vec![0; n], phase: PhaseExp(0) }
    }

    pub fn new(d: QuditDim, x: Vec<u32>, z: Vec<u32>, phase: u32) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Shape(format!("x has {} sites, z has {}", x.len(), z.len())));
        }
        let m = d.get();
        Ok(PauliString {
            d,
            x: x.into_iter().map(|v| (v % m) as u8).collect(),
            z: z.into_iter().map(|v| (v % m) as u8).collect(),
            phase: PhaseExp::new(phase, d),
        })
    }

    /// `X^power` on one site.
    pub fn single_x(n: usize, d: QuditDim, site: usize, power: u32) -> Self {
        let mut p = Self::identity(n, d);
        p.x[site] = (power % d.get()) as u8;
        p
    }

    /// `Z^power` on one site.
    pub fn single_z(n: usize, d: QuditDim, site: usize, power: u32) -> Self {
        let mut p = Self::identity(n, d);
        p.z[site] = (power % d.get()) as u8;
        p
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn dim(&self) -> QuditDim {
        self.d
    }

    #[inline]
    pub fn x(&self, site: usize) -> u32 {
        self.x[site] as u32
    }

    #[inline]
    pub fn z(&self, site: usize) -> u32 {
        self.z[site] as u32
    }

    pub fn xs(&self) -> impl Iterator<Item = u32> + '_ {
        self.x.iter().map(|&v| v as u32)
    }

    pub fn zs(&self) -> impl Iterator<Item = u32> + '_ {
        self.z.iter().map(|&v| v as u32)
    }

    #[inline]
    pub fn phase(&self) -> PhaseExp {
        self.phase
    }

    pub fn set_x(&mut self, site: usize, v: u32) {
        self.x[site] = (v % self.d.get()) as u8;
    }

    pub fn set_z(&mut self, site: usize, v: u32) {
        self.z[site] = (v % self.d.get()) as u8;
    }

    pub fn set_phase(&mut self, k: u32) {
        self.phase = PhaseExp::new(k, self.d);
    }

    pub fn with_phase(mut self, k: u32) -> Self {
        self.set_phase(k);
        self
    }

    /// True when all exponents vanish (a pure phase times identity).
    pub fn is_scalar(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&v| v == 0)
    }

    pub fn same_operator(&self, other: &PauliString) -> bool {
        self.x == other.x && self.z == other.z
    }

    fn check_shape(&self, other: &PauliString) -> Result<()> {
        if self.d != other.d || self.n_sites() != other.n_sites() {
            return Err(Error::Shape(format!(
                "pauli strings (d={}, n={}) and (d={}, n={})",
                self.d,
                self.n_sites(),
                other.d,
                other.n_sites()
            )));
        }
        Ok(())
    }

    /// The product `self · other`, reordered X-before-Z.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        self.check_shape(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        out
    }

    /// In-place right multiplication; `Z^a X^b = ω^{ab} X^b Z^a` supplies the phase.
    pub(crate) fn mul_assign_unchecked(&mut self, other: &PauliString) {
        let d = self.d.get();
        let mut cross = 0u32;
        for i in 0..self.x.len() {
            cross = (cross + self.z[i] as u32 * other.x[i] as u32) % d;
            self.x[i] = ((self.x[i] as u32 + other.x[i] as u32) % d) as u8;
            self.z[i] = ((self.z[i] as u32 + other.z[i] as u32) % d) as u8;
        }
        self.phase = PhaseExp::new(self.phase.0 + other.phase.0 + 2 * cross, self.d);
    }

    pub fn pow(&self, k: u32) -> PauliString {
        let mut out = PauliString::identity(self.n_sites(), self.d);
        for _ in 0..k {
            out.mul_assign_unchecked(self);
        }
        out
    }

    /// `c` with `a·b = ω^c b·a`.
    pub fn commutation_exponent(&self, other: &PauliString) -> Result<u32> {
        self.check_shape(other)?;
        Ok(self.commutation_unchecked(other))
    }

    pub(crate) fn commutation_unchecked(&self, other: &PauliString) -> u32 {
        let d = self.d.get();
        let mut c = 0u32;
        for i in 0..self.x.len() {
            c += self.z[i] as u32 * other.x[i] as u32;
            c += d * d - self.x[i] as u32 * other.z[i] as u32;
        }
        c % d
    }

    /// The inverse `P^{-1} = P†`.
    pub fn adjoint(&self) -> PauliString {
        // P^d is a pure phase, so P^{-1} = P^{d-1} / (that phase).
        let d = self.d.get();
        let mut inv = self.pow(d - 1);
        let full = inv.mul_unchecked(self);
        inv.phase = inv.phase.add(full.phase.neg(self.d), self.d);
        inv
    }

    /// Dense `d^n × d^n` matrix; site 0 is the most significant digit.
    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.n_sites();
        let dim = self.d.dense_dim(n)?;
        let d = self.d.usize();
        // Each column has exactly one nonzero: X^x Z^z |j⟩ = ω^{z j} |j + x⟩.
        let mut m = Mat::<c64>::zeros(dim, dim);
        let global = self.phase.value(self.d);
        for col in 0..dim {
            let mut rest = col;
            let mut row = 0usize;
            let mut stride = 1usize;
            let mut w = 0u32;
            for site in (0..n).rev() {
                let j = rest % d;
                rest /= d;
                w += self.z[site] as u32 * j as u32;
                row += ((j + self.x[site] as usize) % d) * stride;
                stride *= d;
            }
            m[(row, col)] = global * self.d.omega_pow(w % self.d.get());
        }
        Ok(m)
    }

    /// Copy of the string restricted to `sites` (in the given order).
    pub fn restrict(&self, sites: &[usize]) -> PauliString {
        PauliString {
            d: self.d,
            x: sites.iter().map(|&s| self.x[s]).collect(),
            z: sites.iter().map(|&s| self.z[s]).collect(),
            phase: self.phase,
        }
    }

    /// Place a local string onto `sites` of an `n`-site identity.
    pub fn embed(&self, n: usize, sites: &[usize]) -> Result<PauliString> {
        if sites.len() != self.n_sites() {
            return Err(Error::Shape(format!("{} sites for a {}-site string", sites.len(), self.n_sites())));
        }
        let mut out = PauliString::identity(n, self.d);
        for (k, &s) in sites.iter().enumerate() {
            if s >= n {
                return Err(Error::Site { site: s, n });
            }
            out.x[s] = self.x[k];
            out.z[s] = self.z[k];
        }
        out.phase = self.phase;
        Ok(out)
    }

    /// Dense `d × d` matrix of `X^x Z^z` on a single site, without phase.
    pub fn site_matrix(&self, site: usize) -> CMat {
        let d = self.d.usize();
        let (x, z) = (self.x[site] as usize, self.z[site] as u32);
        Mat::from_fn(d, d, |r, c| if r == (c + x) % d { self.d.omega_pow(z * c as u32) } else { c64::new(0.0, 0.0) })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t^{}", self.phase.0)?;
        for i in 0..self.n_sites() {
            if self.x[i] != 0 {
                write!(f, " X{}^{}", i, self.x[i])?;
            }
            if self.z[i] != 0 {
                write!(f, " Z{}^{}", i, self.z[i])?;
            }
        }
        Ok(())
    }
}

/// A linear combination of Pauli strings with distinct exponent vectors.
///
/// Each stored string carries phase zero; its phase lives in the coefficient.
#[derive(Clone, Debug)]
pub struct PauliSum {
    terms: Vec<(c64, PauliString)>,
}

impl PauliSum {
    pub fn new(terms: impl IntoIterator<Item = (c64, PauliString)>) -> Result<Self> {
        let mut merged: Vec<(c64, PauliString)> = Vec::new();
        for (c, p) in terms {
            if let Some((_, first)) = merged.first() {
                first.check_shape(&p)?;
            }
            let c = c * p.phase.value(p.d);
            let p = p.with_phase(0);
            match merged.iter_mut().find(|(_, q)| q.same_operator(&p)) {
                Some((acc, _)) => *acc += c,
                None => merged.push((c, p)),
            }
        }
        merged.retain(|(c, _)| c.norm() >= DROP_TOL);
        Ok(PauliSum { terms: merged })
    }

    pub fn terms(&self) -> &[(c64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let first = self.terms.first().ok_or_else(|| Error::Shape("empty Pauli sum has no size".into()))?;
        let dim = first.1.d.dense_dim(first.1.n_sites())?;
        let mut m = Mat::<c64>::zeros(dim, dim);
        for (c, p) in &self.terms {
            let pm = p.to_matrix()?;
            m += faer::Scale(*c) * &pm;
        }
        Ok(m)
    }

    /// Apply `f` to every string, carrying the result's phase into the coefficient.
    pub fn map_strings(&self, mut f: impl FnMut(&PauliString) -> Result<PauliString>) -> Result<PauliSum> {
        let mapped = self.terms.iter().map(|(c, p)| f(p).map(|q| (*c, q))).collect::<Result<Vec<_>>>()?;
        PauliSum::new(mapped)
    }
}

/// Max-norm deviation of `u†u` from the identity.
pub fn unitarity_error(u: &CMat) -> f64 {
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - c64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Max-norm of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// Expand a unitary on one or two sites in the `X^x Z^z` basis.
///
/// Coefficients come from the trace inner product
/// `c_{xz} = Tr(u · (X^x Z^z)†) / d^k`.
pub fn decompose_unitary(u: &CMat, d: QuditDim) -> Result<PauliSum> {
    if u.nrows() != u.ncols() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", u.nrows(), u.ncols())));
    }
    let dd = d.usize();
    let k = match u.nrows() {
        n if n == dd => 1,
        n if n == dd * dd => 2,
        n => return Err(Error::Shape(format!("{n}x{n} matrix is not one or two qudits of d={d}"))),
    };
    let dev = unitarity_error(u);
    if dev > 1e-10 {
        return Err(Error::NotUnitary(dev));
    }
    let dim = u.nrows();
    let norm = 1.0 / dim as f64;
    let mut terms = Vec::new();
    let total = dd.pow(2 * k as u32);
    for idx in 0..total {
        let mut rest = idx;
        let mut x = vec![0u32; k];
        let mut z = vec![0u32; k];
        for s in 0..k {
            x[s] = (rest % dd) as u32;
            rest /= dd;
            z[s] = (rest % dd) as u32;
            rest /= dd;
        }
        let p = PauliString::new(d, x, z, 0)?;
        let pm = p.to_matrix()?;
        let mut acc = c64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                if pm[(i, j)].norm() > 0.0 {
                    acc += u[(i, j)] * pm[(i, j)].conj();
                }
            }
        }
        terms.push((acc * norm, p));
    }
    let sum = PauliSum::new(terms)?;
    let err = max_abs_diff(&sum.to_matrix()?, u);
    if err > 1e-12 {
        return Err(Error::Decomposition(format!("reconstruction error {err:.3e}")));
    }
    Ok(sum)
}
