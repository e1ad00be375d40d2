//! Qudit stabilizer tableau.
//!
//! A [`Tableau`] stores a Clifford `C` through the images of the basis Paulis:
//! rows `0..n` hold `C Z_i C†` (stabilizers) and rows `n..2n` hold `C X_i C†`
//! (destabilizers), each with its own phase.

use std::fmt;

use crate::pauli::{PauliString, QuditDim};
use crate::{Error, Result};

/// Generators of the qudit Clifford group and their inverses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CliffordGate {
    H(usize),
    HInv(usize),
    S(usize),
    SInv(usize),
    X(usize),
    Z(usize),
    Sum { control: usize, target: usize },
    SumInv { control: usize, target: usize },
}

impl CliffordGate {
    pub fn sites(&self) -> Vec<usize> {
        use CliffordGate::*;
        match *self {
            H(a) | HInv(a) | S(a) | SInv(a) | X(a) | Z(a) => vec![a],
            Sum { control, target } | SumInv { control, target } => vec![control, target],
        }
    }

    /// Inverse gate as a word (Pauli inverses are powers of the gate).
    pub fn inverse_word(&self, d: QuditDim) -> Vec<CliffordGate> {
        use CliffordGate::*;
        match *self {
            H(a) => vec![HInv(a)],
            HInv(a) => vec![H(a)],
            S(a) => vec![SInv(a)],
            SInv(a) => vec![S(a)],
            X(a) => vec![X(a); d.usize() - 1],
            Z(a) => vec![Z(a); d.usize() - 1],
            Sum { control, target } => vec![SumInv { control, target }],
            SumInv { control, target } => vec![Sum { control, target }],
        }
    }

    /// Same gate with sites relabelled through `map`.
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> CliffordGate {
        use CliffordGate::*;
        match *self {
            H(a) => H(map(a)),
            HInv(a) => HInv(map(a)),
            S(a) => S(map(a)),
            SInv(a) => SInv(map(a)),
            X(a) => X(map(a)),
            Z(a) => Z(map(a)),
            Sum { control, target } => Sum { control: map(control), target: map(target) },
            SumInv { control, target } => SumInv { control: map(control), target: map(target) },
        }
    }

    /// Compact token such as `H0`, `Sdg1`, `SUM01`; sites must be single digits.
    pub fn token(&self) -> String {
        use CliffordGate::*;
        match *self {
            H(a) => format!("H{a}"),
            HInv(a) => format!("Hdg{a}"),
            S(a) => format!("S{a}"),
            SInv(a) => format!("Sdg{a}"),
            X(a) => format!("X{a}"),
            Z(a) => format!("Z{a}"),
            Sum { control, target } => format!("SUM{control}{target}"),
            SumInv { control, target } => format!("SUMdg{control}{target}"),
        }
    }

    pub fn from_token(tok: &str) -> Option<CliffordGate> {
        use CliffordGate::*;
        let digit = |s: &str| -> Option<usize> {
            if s.len() == 1 {
                s.parse().ok()
            } else {
                None
            }
        };
        let pair = |s: &str| -> Option<(usize, usize)> {
            if s.len() == 2 {
                Some((digit(&s[..1])?, digit(&s[1..])?))
            } else {
                None
            }
        };
        if let Some(rest) = tok.strip_prefix("SUMdg") {
            let (control, target) = pair(rest)?;
            return Some(SumInv { control, target });
        }
        if let Some(rest) = tok.strip_prefix("SUM") {
            let (control, target) = pair(rest)?;
            return Some(Sum { control, target });
        }
        for (prefix, ctor) in
            [("Hdg", HInv as fn(usize) -> CliffordGate), ("Sdg", SInv), ("H", H), ("S", S), ("X", X), ("Z", Z)]
        {
            if let Some(rest) = tok.strip_prefix(prefix) {
                return digit(rest).map(ctor);
            }
        }
        None
    }

    /// Conjugation images of the local basis `(X_a, Z_a[, X_b, Z_b])` as
    /// strings on the gate's own sites.
    fn local_images(&self, d: QuditDim) -> Vec<PauliString> {
        use CliffordGate::*;
        let m = d.get();
        let neg1 = m - 1;
        // S: X -> τ XZ for even d, XZ for odd d.
        let s_phase = if m.is_multiple_of(2) { 1 } else { 0 };
        let one = |x: u32, z: u32, ph: u32| PauliString::new(d, vec![x], vec![z], ph).unwrap();
        let two = |x: [u32; 2], z: [u32; 2]| PauliString::new(d, x.to_vec(), z.to_vec(), 0).unwrap();
        match *self {
            H(_) => vec![one(0, 1, 0), one(neg1, 0, 0)],
            HInv(_) => vec![one(0, neg1, 0), one(1, 0, 0)],
            S(_) => vec![one(1, 1, s_phase), one(0, 1, 0)],
            SInv(_) => vec![one(1, neg1, 2 * m - s_phase), one(0, 1, 0)],
            X(_) => vec![one(1, 0, 0), one(0, 1, 2 * m - 2)],
            Z(_) => vec![one(1, 0, 2), one(0, 1, 0)],
            Sum { .. } => vec![two([1, 1], [0, 0]), two([0, 0], [1, 0]), two([0, 1], [0, 0]), two([0, 0], [neg1, 1])],
            SumInv { .. } => {
                vec![two([1, neg1], [0, 0]), two([0, 0], [1, 0]), two([0, 1], [0, 0]), two([0, 0], [1, 1])]
            }
        }
    }
}

impl fmt::Display for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CliffordGate::*;
        match *self {
            H(a) => write!(f, "H {a}"),
            HInv(a) => write!(f, "Hdg {a}"),
            S(a) => write!(f, "S {a}"),
            SInv(a) => write!(f, "Sdg {a}"),
            X(a) => write!(f, "X {a}"),
            Z(a) => write!(f, "Z {a}"),
            Sum { control, target } => write!(f, "SUM {control} {target}"),
            SumInv { control, target } => write!(f, "SUMdg {control} {target}"),
        }
    }
}

/// Inverse of a gate word: reversed order, each gate inverted.
pub fn inverse_word(word: &[CliffordGate], d: QuditDim) -> Vec<CliffordGate> {
    word.iter().rev().flat_map(|g| g.inverse_word(d)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    d: QuditDim,
    rows: Vec<PauliString>,
}

impl Tableau {
    /// The tableau of `C = I`: stabilizers `Z_i`, destabilizers `X_i`.
    pub fn identity(n: usize, d: QuditDim) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("tableau needs at least one site".into()));
        }
        let rows = (0..n)
            .map(|i| PauliString::single_z(n, d, i, 1))
            .chain((0..n).map(|i| PauliString::single_x(n, d, i, 1)))
            .collect();
        Ok(Tableau { n, d, rows })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> QuditDim {
        self.d
    }

    pub fn rows(&self) -> &[PauliString] {
        &self.rows
    }

    /// `C Z_i C†`.
    pub fn stabilizer(&self, i: usize) -> &PauliString {
        &self.rows[i]
    }

    /// `C X_i C†`.
    pub fn destabilizer(&self, i: usize) -> &PauliString {
        &self.rows[self.n + i]
    }

    fn check_sites(&self, g: &CliffordGate) -> Result<()> {
        let sites = g.sites();
        for &s in &sites {
            if s >= self.n {
                return Err(Error::Site { site: s, n: self.n });
            }
        }
        if sites.len() == 2 && sites[0] == sites[1] {
            return Err(Error::Invalid(format!("two-site gate `{g}` acts twice on site {}", sites[0])));
        }
        Ok(())
    }

    /// Apply `g` circuit-style: the stored Clifford becomes `g·C`.
    pub fn apply_gate(&mut self, g: &CliffordGate) -> Result<&mut Self> {
        self.check_sites(g)?;
        let sites = g.sites();
        let images = g.local_images(self.d);
        let k = sites.len();
        for row in &mut self.rows {
            let local = row.restrict(&sites);
            if local.is_scalar() {
                continue;
            }
            // Factors on distinct sites commute, so X_a^x Z_a^z X_b^x Z_b^z maps
            // factor by factor; the multiplication order carries the phase.
            let mut img = PauliString::identity(k, self.d).with_phase(local.phase().get());
            for (s, _) in sites.iter().enumerate() {
                for _ in 0..local.x(s) {
                    img.mul_assign_unchecked(&images[2 * s]);
                }
                for _ in 0..local.z(s) {
                    img.mul_assign_unchecked(&images[2 * s + 1]);
                }
            }
            for (s, &site) in sites.iter().enumerate() {
                row.set_x(site, img.x(s));
                row.set_z(site, img.z(s));
            }
            row.set_phase(img.phase().get());
        }
        Ok(self)
    }

    pub fn apply_word(&mut self, word: &[CliffordGate]) -> Result<&mut Self> {
        for g in word {
            self.apply_gate(g)?;
        }
        Ok(self)
    }

    fn check_string(&self, p: &PauliString) -> Result<()> {
        if p.n_sites() != self.n || p.dim() != self.d {
            return Err(Error::Shape(format!(
                "pauli on {} sites (d={}) against tableau on {} sites (d={})",
                p.n_sites(),
                p.dim(),
                self.n,
                self.d
            )));
        }
        Ok(())
    }

    /// `C p C†`.
    pub fn conjugate_forward(&self, p: &PauliString) -> Result<PauliString> {
        self.check_string(p)?;
        Ok(self.forward_unchecked(p))
    }

    fn forward_unchecked(&self, p: &PauliString) -> PauliString {
        let mut out = PauliString::identity(self.n, self.d).with_phase(p.phase().get());
        for i in 0..self.n {
            for _ in 0..p.x(i) {
                out.mul_assign_unchecked(&self.rows[self.n + i]);
            }
        }
        for i in 0..self.n {
            for _ in 0..p.z(i) {
                out.mul_assign_unchecked(&self.rows[i]);
            }
        }
        out
    }

    /// `C† p C`, found by solving for the row exponents over `Z_d` and then
    /// multiplying the rows out to recover the phase.
    pub fn conjugate_inverse(&self, p: &PauliString) -> Result<PauliString> {
        self.check_string(p)?;
        let n = self.n;
        let m = self.d.get();
        // Columns 0..n: stabilizer exponent vectors; n..2n: destabilizers.
        // Vector layout: (x_0..x_{n-1}, z_0..z_{n-1}); last column is p.
        let width = 2 * n + 1;
        let mut a = vec![0u32; 2 * n * width];
        for (col, row) in self.rows.iter().enumerate() {
            for i in 0..n {
                a[i * width + col] = row.x(i);
                a[(n + i) * width + col] = row.z(i);
            }
        }
        for i in 0..n {
            a[i * width + 2 * n] = p.x(i);
            a[(n + i) * width + 2 * n] = p.z(i);
        }
        let sol = solve_mod(&mut a, 2 * n, self.d).ok_or(Error::SingularTableau)?;
        let (s, dst) = sol.split_at(n);
        let q0 = PauliString::new(self.d, dst.to_vec(), s.to_vec(), 0)?;
        let fwd = self.forward_unchecked(&q0);
        if !fwd.same_operator(p) {
            return Err(Error::SingularTableau);
        }
        let c = p.phase().get() + 2 * m - fwd.phase().get();
        Ok(q0.with_phase(c))
    }

    /// Replace `C` by `C·W` for the unitary `W` of `word`.
    pub fn right_multiply(&mut self, word: &[CliffordGate]) -> Result<&mut Self> {
        if word.is_empty() {
            return Ok(self);
        }
        let mut support: Vec<usize> = word.iter().flat_map(|g| g.sites()).collect();
        support.sort_unstable();
        support.dedup();
        let mut w = Tableau::identity(self.n, self.d)?;
        w.apply_word(word)?;
        // W fixes Z_i and X_i off its support, so only those rows change.
        let mut updates = Vec::with_capacity(2 * support.len());
        for &i in &support {
            updates.push((i, self.forward_unchecked(&w.rows[i])));
            updates.push((self.n + i, self.forward_unchecked(&w.rows[self.n + i])));
        }
        for (r, row) in updates {
            self.rows[r] = row;
        }
        Ok(self)
    }

    /// Check the paired commutation relations of the rows.
    ///
    /// Stabilizers commute among themselves, destabilizers likewise, and
    /// `stabilizer_i · destabilizer_i = ω destabilizer_i · stabilizer_i`, as
    /// `Z X = ω X Z` for the identity tableau.
    pub fn is_symplectic(&self) -> bool {
        let n = self.n;
        let m = self.d.get();
        for i in 0..2 * n {
            for j in 0..2 * n {
                let c = self.rows[i].commutation_unchecked(&self.rows[j]);
                let want = if i < n && j == i + n {
                    1
                } else if i >= n && j + n == i {
                    m - 1
                } else {
                    0
                };
                if c != want {
                    return false;
                }
            }
        }
        true
    }

    /// Text dump: `x-vector | z-vector | phase`, stabilizers first.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let xs: Vec<String> = row.xs().map(|v| v.to_string()).collect();
            let zs: Vec<String> = row.zs().map(|v| v.to_string()).collect();
            out.push_str(&format!("{} | {} | {}\n", xs.join(" "), zs.join(" "), row.phase().get()));
        }
        out
    }
}

/// Solve `A v = b` over `Z_d` for square `A` stored row-major with `b` as an
/// extra column. Returns `None` when `A` is singular.
pub(crate) fn solve_mod(a: &mut [u32], size: usize, d: QuditDim) -> Option<Vec<u32>> {
    let m = d.get();
    let width = size + 1;
    for col in 0..size {
        let pivot = (col..size).find(|&r| a[r * width + col] != 0)?;
        if pivot != col {
            for k in 0..width {
                a.swap(pivot * width + k, col * width + k);
            }
        }
        let inv = d.inv(a[col * width + col]);
        for k in col..width {
            a[col * width + k] = a[col * width + k] * inv % m;
        }
        for r in 0..size {
            let f = a[r * width + col];
            if r == col || f == 0 {
                continue;
            }
            for k in col..width {
                let sub = f * a[col * width + k] % m;
                a[r * width + k] = (a[r * width + k] + m - sub) % m;
            }
        }
    }
    Some((0..size).map(|r| a[r * width + size]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: u32) -> QuditDim {
        QuditDim::new(v).unwrap()
    }

    #[test]
    fn identity_rows() {
        let t = Tableau::identity(2, d(2)).unwrap();
        assert_eq!(t.stabilizer(0), &PauliString::single_z(2, d(2), 0, 1));
        assert_eq!(t.stabilizer(1), &PauliString::single_z(2, d(2), 1, 1));
        assert_eq!(t.destabilizer(0), &PauliString::single_x(2, d(2), 0, 1));
        assert_eq!(t.destabilizer(1), &PauliString::single_x(2, d(2), 1, 1));
        assert!(t.is_symplectic());
        assert!(Tableau::identity(0, d(3)).is_err());
    }

    #[test]
    fn hadamard_maps_z_to_x_for_qubits() {
        let mut t = Tableau::identity(1, d(2)).unwrap();
        t.apply_gate(&CliffordGate::H(0)).unwrap();
        assert_eq!(t.stabilizer(0), &PauliString::single_x(1, d(2), 0, 1));
        let z = PauliString::single_z(1, d(2), 0, 1);
        assert_eq!(t.conjugate_forward(&z).unwrap(), PauliString::single_x(1, d(2), 0, 1));
    }

    #[test]
    fn phase_gate_maps_x_to_xz_for_qutrits() {
        let mut t = Tableau::identity(1, d(3)).unwrap();
        t.apply_gate(&CliffordGate::S(0)).unwrap();
        let y = PauliString::new(d(3), vec![1], vec![1], 0).unwrap();
        assert_eq!(t.destabilizer(0), &y);
    }

    #[test]
    fn bad_site_rejected() {
        let mut t = Tableau::identity(2, d(3)).unwrap();
        assert!(matches!(t.apply_gate(&CliffordGate::H(2)), Err(Error::Site { site: 2, n: 2 })));
        assert!(t.apply_gate(&CliffordGate::Sum { control: 1, target: 1 }).is_err());
    }

    #[test]
    fn inverse_of_identity_tableau() {
        let t = Tableau::identity(2, d(3)).unwrap();
        let p = PauliString::new(d(3), vec![1, 0], vec![0, 1], 4).unwrap();
        assert_eq!(t.conjugate_inverse(&p).unwrap(), p);
    }

    #[test]
    fn right_multiply_on_identity_matches_apply() {
        let mut a = Tableau::identity(3, d(3)).unwrap();
        a.right_multiply(&[CliffordGate::H(0)]).unwrap();
        let mut b = Tableau::identity(3, d(3)).unwrap();
        b.apply_gate(&CliffordGate::H(0)).unwrap();
        assert_eq!(a, b);
        let before = a.clone();
        a.right_multiply(&[]).unwrap();
        assert_eq!(a, before);
    }

    #[test]
    fn tokens_round_trip() {
        use CliffordGate::*;
        for g in
            [H(0), HInv(1), S(1), SInv(0), X(0), Z(1), Sum { control: 0, target: 1 }, SumInv { control: 1, target: 0 }]
        {
            assert_eq!(CliffordGate::from_token(&g.token()), Some(g));
        }
        assert_eq!(CliffordGate::from_token("Q0"), None);
        assert_eq!(CliffordGate::from_token("SUM0"), None);
    }

    #[test]
    fn dump_format() {
        let t = Tableau::identity(1, d(3)).unwrap();
        assert_eq!(t.dump(), "0 | 1 | 0\n1 | 0 | 0\n");
    }
}
