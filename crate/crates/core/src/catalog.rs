//! Two-qudit disentangler catalog.
//!
//! The two-site Clifford group modulo Paulis and phases is the symplectic group
//! `Sp(4, Z_d)`. It is enumerated by breadth-first closure over the generators
//! `{H₀, H₁, S₀, S₁, SUM₀₁, SUM₁₀}`, then split into classes `L·g`, where `L` is
//! the local subgroup `Sp(2, Z_d) × Sp(2, Z_d)` applied *after* `g`. Local
//! gates applied last cannot change any entanglement spectrum, so one
//! representative per class covers every two-site Clifford for disentangling.
//! There are `|Sp(4)| / |Sp(2)|²` classes: 20 for `d = 2`, 90 for `d = 3`.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::par::Execution;
use crate::pauli::QuditDim;
use crate::tableau::{CliffordGate, Tableau};
use crate::{Error, Result};

const FILE_MAGIC: &str = "# qsim-catalog v1";

/// Action of a two-site Clifford on exponent vectors `(x₀, x₁, z₀, z₁)`,
/// stored row-major; column `j` is the image of basis vector `j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymplecticMat {
    m: [u8; 16],
}

impl SymplecticMat {
    pub fn identity() -> Self {
        let mut m = [0u8; 16];
        for i in 0..4 {
            m[i * 5] = 1;
        }
        SymplecticMat { m }
    }

    pub fn from_entries(entries: [u8; 16]) -> Self {
        SymplecticMat { m: entries }
    }

    pub fn entries(&self) -> &[u8; 16] {
        &self.m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.m[r * 4 + c] as u32
    }

    /// `self · other` over `Z_d` (apply `other` first).
    pub fn mul(&self, other: &SymplecticMat, d: QuditDim) -> SymplecticMat {
        let m = d.get();
        let mut out = [0u8; 16];
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = 0u32;
                for k in 0..4 {
                    acc += self.get(r, k) * other.get(k, c);
                }
                out[r * 4 + c] = (acc % m) as u8;
            }
        }
        SymplecticMat { m: out }
    }

    /// Base-`d` integer of the row-major entries; numeric order is lexicographic order.
    pub fn key(&self, d: QuditDim) -> u64 {
        self.m.iter().fold(0u64, |acc, &v| acc * d.get() as u64 + v as u64)
    }

    /// `mᵀ J m = J` for the form `⟨v, w⟩ = Σ_i z_i x'_i − x_i z'_i`.
    pub fn is_symplectic(&self, d: QuditDim) -> bool {
        let m = d.get();
        let form = |v: [u32; 4], w: [u32; 4]| -> u32 {
            (v[2] * w[0] + v[3] * w[1] + 2 * m * m - v[0] * w[2] - v[1] * w[3]) % m
        };
        let col = |j: usize| [self.get(0, j), self.get(1, j), self.get(2, j), self.get(3, j)];
        let basis = |j: usize| {
            let mut e = [0u32; 4];
            e[j] = 1;
            e
        };
        (0..4).all(|i| (0..4).all(|j| form(col(i), col(j)) == form(basis(i), basis(j))))
    }

    /// True when the matrix acts on each site separately.
    pub fn is_local(&self) -> bool {
        // Site 0 owns indices {0, 2}; site 1 owns {1, 3}.
        (0..4).all(|r| (0..4).all(|c| r % 2 == c % 2 || self.m[r * 4 + c] == 0))
    }

    /// Read the symplectic action off a two-site tableau (phases dropped).
    pub fn from_tableau(t: &Tableau) -> Result<Self> {
        if t.n() != 2 {
            return Err(Error::Shape(format!("symplectic matrices need a 2-site tableau, got {}", t.n())));
        }
        let images = [t.destabilizer(0), t.destabilizer(1), t.stabilizer(0), t.stabilizer(1)];
        let mut m = [0u8; 16];
        for (c, img) in images.iter().enumerate() {
            let v = [img.x(0), img.x(1), img.z(0), img.z(1)];
            for r in 0..4 {
                m[r * 4 + c] = v[r] as u8;
            }
        }
        Ok(SymplecticMat { m })
    }

    pub fn from_word(word: &[CliffordGate], d: QuditDim) -> Result<Self> {
        let mut t = Tableau::identity(2, d)?;
        t.apply_word(word)?;
        Self::from_tableau(&t)
    }

    fn digits(&self) -> String {
        self.m.iter().map(|v| char::from_digit(*v as u32, 36).unwrap()).collect()
    }
}

impl fmt::Debug for SymplecticMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymplecticMat({})", self.digits())
    }
}

/// The two generators on site 0 and 1 plus both SUM orientations.
pub fn generators() -> [CliffordGate; 6] {
    use CliffordGate::*;
    [H(0), H(1), S(0), S(1), Sum { control: 0, target: 1 }, Sum { control: 1, target: 0 }]
}

/// `d^{k²} Π_{i=1..k} (d^{2i} − 1)`.
pub fn symplectic_group_order(d: u64, k: u32) -> u64 {
    let mut order = d.pow(k * k);
    for i in 1..=k {
        order *= d.pow(2 * i) - 1;
    }
    order
}

/// Every element of `Sp(4, Z_d)` with a shortest generator word.
pub struct GroupEnumeration {
    d: QuditDim,
    elements: Vec<SymplecticMat>,
    /// `(parent index, generator index)`; the root has `None`.
    parents: Vec<Option<(u32, u8)>>,
    index: HashMap<SymplecticMat, u32>,
}

impl GroupEnumeration {
    pub fn dim(&self) -> QuditDim {
        self.d
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[SymplecticMat] {
        &self.elements
    }

    pub fn contains(&self, m: &SymplecticMat) -> bool {
        self.index.contains_key(m)
    }

    pub fn word(&self, idx: usize) -> Vec<CliffordGate> {
        let gens = generators();
        let mut word = Vec::new();
        let mut cur = idx;
        while let Some((parent, g)) = self.parents[cur] {
            word.push(gens[g as usize]);
            cur = parent as usize;
        }
        word.reverse();
        word
    }

    pub fn word_of(&self, m: &SymplecticMat) -> Option<Vec<CliffordGate>> {
        self.index.get(m).map(|&i| self.word(i as usize))
    }
}

/// Breadth-first closure of the generators acting on the identity.
///
/// `d ∈ {2, 3}` always; `d = 5` (about 9.4 million elements) only with
/// `allow_large`.
pub fn enumerate_group(d: QuditDim, allow_large: bool, exec: Execution) -> Result<GroupEnumeration> {
    match d.get() {
        2 | 3 => {}
        5 if allow_large => {}
        other => {
            return Err(Error::Unsupported(format!(
                "two-site group enumeration for d={other} exceeds the memory guard{}",
                if other == 5 { " (pass the large-run flag)" } else { "" }
            )))
        }
    }
    let gen_mats = generators()
        .iter()
        .map(|g| SymplecticMat::from_word(std::slice::from_ref(g), d))
        .collect::<Result<Vec<_>>>()?;

    let root = SymplecticMat::identity();
    let mut elements = vec![root];
    let mut parents = vec![None];
    let mut index = HashMap::new();
    index.insert(root, 0u32);
    let mut frontier: Vec<u32> = vec![0];
    while !frontier.is_empty() {
        let products: Vec<[SymplecticMat; 6]> = exec.map(&frontier, |&i| {
            let cur = elements[i as usize];
            std::array::from_fn(|g| gen_mats[g].mul(&cur, d))
        });
        let mut next = Vec::new();
        for (&parent, prods) in frontier.iter().zip(&products) {
            for (g, m) in prods.iter().enumerate() {
                if !index.contains_key(m) {
                    let id = elements.len() as u32;
                    index.insert(*m, id);
                    elements.push(*m);
                    parents.push(Some((parent, g as u8)));
                    next.push(id);
                }
            }
        }
        frontier = next;
    }
    Ok(GroupEnumeration { d, elements, parents, index })
}

/// All matrices of `SL(2, Z_d) = Sp(2, Z_d)` on one site as `(a b; c e)` acting on `(x, z)`.
fn single_site_group(d: QuditDim) -> Vec<[u32; 4]> {
    let m = d.get();
    let mut out = Vec::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for e in 0..m {
                    if (a * e + m * m - b * c) % m == 1 {
                        out.push([a, b, c, e]);
                    }
                }
            }
        }
    }
    out
}

/// The local subgroup `Sp(2) × Sp(2)` as 4×4 matrices.
pub fn local_subgroup(d: QuditDim) -> Vec<SymplecticMat> {
    let single = single_site_group(d);
    let mut out = Vec::with_capacity(single.len() * single.len());
    for s0 in &single {
        for s1 in &single {
            let mut m = [0u8; 16];
            // Site 0 on indices (0, 2), site 1 on (1, 3).
            for (site, blk) in [(0usize, s0), (1usize, s1)] {
                let (xi, zi) = (site, site + 2);
                m[xi * 4 + xi] = blk[0] as u8;
                m[xi * 4 + zi] = blk[1] as u8;
                m[zi * 4 + xi] = blk[2] as u8;
                m[zi * 4 + zi] = blk[3] as u8;
            }
            out.push(SymplecticMat { m });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisentanglerEntry {
    /// Lexicographically smallest member of the class.
    pub representative: SymplecticMat,
    /// Generator word on sites {0, 1} realizing the representative.
    pub word: Vec<CliffordGate>,
    pub class_size: u64,
}

impl DisentanglerEntry {
    /// The class of purely local gates, which cannot change entanglement.
    pub fn is_non_entangling(&self) -> bool {
        self.representative.is_local()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisentanglerCatalog {
    pub d: QuditDim,
    pub group_order: u64,
    /// One entry per class, sorted by representative; includes the local class.
    pub entries: Vec<DisentanglerEntry>,
}

impl DisentanglerCatalog {
    /// Enumerate and reduce in one step.
    pub fn build(d: QuditDim, exec: Execution) -> Result<Self> {
        let group = enumerate_group(d, false, exec)?;
        Ok(reduce_to_catalog(&group))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries that can change entanglement.
    pub fn entangling(&self) -> impl Iterator<Item = (usize, &DisentanglerEntry)> {
        self.entries.iter().enumerate().filter(|(_, e)| !e.is_non_entangling())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{FILE_MAGIC}\n{} {} {}\n", self.d, self.group_order, self.entries.len());
        for e in &self.entries {
            let digits: Vec<String> = e.representative.m.iter().map(|v| v.to_string()).collect();
            out.push_str(&digits.concat());
            out.push(' ');
            out.push_str(&e.class_size.to_string());
            for g in &e.word {
                out.push(' ');
                out.push_str(&g.token());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Catalog(msg);
        let mut lines = text.lines();
        match lines.next() {
            Some(l) if l.trim() == FILE_MAGIC => {}
            Some(l) => return Err(bad(format!("unsupported catalog version line `{l}`"))),
            None => return Err(bad("empty catalog file".into())),
        }
        let header = lines.next().ok_or_else(|| bad("missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(bad(format!("header `{header}` must be `d group_order n_entries`")));
        }
        let parse_u64 = |s: &str| s.parse::<u64>().map_err(|_| bad(format!("bad integer `{s}`")));
        let d = QuditDim::new(parse_u64(fields[0])? as u32)?;
        let group_order = parse_u64(fields[1])?;
        let count = parse_u64(fields[2])? as usize;
        let mut entries = Vec::with_capacity(count);
        for (i, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let mut toks = line.split_whitespace();
            let digits = toks.next().ok_or_else(|| bad(format!("entry {i}: empty line")))?;
            if digits.len() != 16 {
                return Err(bad(format!("entry {i}: expected 16 digits, found `{digits}`")));
            }
            let mut m = [0u8; 16];
            for (k, ch) in digits.chars().enumerate() {
                let v = ch
                    .to_digit(10)
                    .filter(|&v| v < d.get())
                    .ok_or_else(|| bad(format!("entry {i}: digit `{ch}` not in Z_{d}")))?;
                m[k] = v as u8;
            }
            let representative = SymplecticMat { m };
            if !representative.is_symplectic(d) {
                return Err(bad(format!("entry {i}: matrix {digits} is not symplectic")));
            }
            let class_size = parse_u64(toks.next().ok_or_else(|| bad(format!("entry {i}: missing class size")))?)?;
            let word = toks
                .map(|t| CliffordGate::from_token(t).ok_or_else(|| bad(format!("entry {i}: bad token `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            if SymplecticMat::from_word(&word, d)? != representative {
                return Err(bad(format!("entry {i}: word does not reproduce its matrix")));
            }
            entries.push(DisentanglerEntry { representative, word, class_size });
        }
        if entries.len() != count {
            return Err(bad(format!("header promises {count} entries, found {}", entries.len())));
        }
        let total: u64 = entries.iter().map(|e| e.class_size).sum();
        if total != group_order {
            return Err(bad(format!("class sizes sum to {total}, not {group_order}")));
        }
        Ok(DisentanglerCatalog { d, group_order, entries })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

/// Partition the group into classes `{l·g : l ∈ L}`.
pub fn reduce_to_catalog(group: &GroupEnumeration) -> DisentanglerCatalog {
    let d = group.d;
    let locals = local_subgroup(d);
    let mut seen = vec![false; group.len()];
    let mut entries = Vec::new();
    for (i, g) in group.elements.iter().enumerate() {
        if seen[i] {
            continue;
        }
        let mut rep = *g;
        let mut size = 0u64;
        for l in &locals {
            let member = l.mul(g, d);
            let idx = group.index[&member] as usize;
            if !seen[idx] {
                seen[idx] = true;
                size += 1;
            }
            if member.key(d) < rep.key(d) {
                rep = member;
            }
        }
        let word = group.word_of(&rep).expect("class members belong to the group");
        entries.push(DisentanglerEntry { representative: rep, word, class_size: size });
    }
    entries.sort_by_key(|e| e.representative.key(d));
    DisentanglerCatalog { d, group_order: group.len() as u64, entries }
}
