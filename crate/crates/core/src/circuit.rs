//! Circuit representation, text format, gate matrices and random generators.
//!
//! Text format:
//!
//! ```text
//! # qsim v1 d=3 n=4
//! # optional metadata comment
//! H 0
//! SUM 0 1
//! T 0
//! U1 2 0.0000000000000000 1.0471975511965976 2.0943951023931953
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pauli::QuditDim;
use crate::tableau::CliffordGate;
use crate::{c64, CMat, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateName {
    H,
    Hdg,
    S,
    Sdg,
    X,
    Z,
    Sum,
    SumDg,
    Swap,
    T,
    Tdg,
    Rz,
    U1,
}

impl GateName {
    pub const ALL: [GateName; 13] = [
        GateName::H,
        GateName::Hdg,
        GateName::S,
        GateName::Sdg,
        GateName::X,
        GateName::Z,
        GateName::Sum,
        GateName::SumDg,
        GateName::Swap,
        GateName::T,
        GateName::Tdg,
        GateName::Rz,
        GateName::U1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GateName::H => "H",
            GateName::Hdg => "Hdg",
            GateName::S => "S",
            GateName::Sdg => "Sdg",
            GateName::X => "X",
            GateName::Z => "Z",
            GateName::Sum => "SUM",
            GateName::SumDg => "SUMdg",
            GateName::Swap => "SWAP",
            GateName::T => "T",
            GateName::Tdg => "Tdg",
            GateName::Rz => "RZ",
            GateName::U1 => "U1",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateName::Sum | GateName::SumDg | GateName::Swap => 2,
            _ => 1,
        }
    }

    pub fn is_clifford(self) -> bool {
        !matches!(self, GateName::T | GateName::Tdg | GateName::Rz | GateName::U1)
    }

    fn param_count(self, d: QuditDim) -> usize {
        match self {
            GateName::Rz => 1,
            GateName::U1 => d.usize(),
            _ => 0,
        }
    }
}

impl FromStr for GateName {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        GateName::ALL.iter().copied().find(|g| g.as_str() == s).ok_or(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    pub name: GateName,
    pub sites: Vec<usize>,
    pub params: Vec<f64>,
}

impl GateOp {
    pub fn new(name: GateName, sites: Vec<usize>, params: Vec<f64>) -> Self {
        GateOp { name, sites, params }
    }

    pub fn one(name: GateName, site: usize) -> Self {
        GateOp::new(name, vec![site], vec![])
    }

    pub fn two(name: GateName, a: usize, b: usize) -> Self {
        GateOp::new(name, vec![a, b], vec![])
    }

    pub fn is_clifford(&self) -> bool {
        self.name.is_clifford()
    }

    pub fn validate(&self, n: usize, d: QuditDim) -> Result<()> {
        if self.sites.len() != self.name.arity() {
            return Err(Error::Invalid(format!("{} takes {} site(s)", self.name.as_str(), self.name.arity())));
        }
        for &s in &self.sites {
            if s >= n {
                return Err(Error::Site { site: s, n });
            }
        }
        if self.sites.len() == 2 && self.sites[0] == self.sites[1] {
            return Err(Error::Invalid(format!("{} needs two distinct sites", self.name.as_str())));
        }
        let want = self.name.param_count(d);
        if self.params.len() != want {
            return Err(Error::Invalid(format!(
                "{} takes {} parameter(s) at d={}, got {}",
                self.name.as_str(),
                want,
                d,
                self.params.len()
            )));
        }
        Ok(())
    }

    /// Clifford ops as a word over the tableau generators; `None` for non-Clifford ops.
    pub fn to_clifford_word(&self) -> Option<Vec<CliffordGate>> {
        use CliffordGate as G;
        let a = self.sites[0];
        let word = match self.name {
            GateName::H => vec![G::H(a)],
            GateName::Hdg => vec![G::HInv(a)],
            GateName::S => vec![G::S(a)],
            GateName::Sdg => vec![G::SInv(a)],
            GateName::X => vec![G::X(a)],
            GateName::Z => vec![G::Z(a)],
            GateName::Sum => vec![G::Sum { control: a, target: self.sites[1] }],
            GateName::SumDg => vec![G::SumInv { control: a, target: self.sites[1] }],
            GateName::Swap => swap_word(a, self.sites[1]),
            _ => return None,
        };
        Some(word)
    }

    pub fn from_clifford(g: &CliffordGate) -> GateOp {
        use CliffordGate as G;
        match *g {
            G::H(a) => GateOp::one(GateName::H, a),
            G::HInv(a) => GateOp::one(GateName::Hdg, a),
            G::S(a) => GateOp::one(GateName::S, a),
            G::SInv(a) => GateOp::one(GateName::Sdg, a),
            G::X(a) => GateOp::one(GateName::X, a),
            G::Z(a) => GateOp::one(GateName::Z, a),
            G::Sum { control, target } => GateOp::two(GateName::Sum, control, target),
            G::SumInv { control, target } => GateOp::two(GateName::SumDg, control, target),
        }
    }
}

/// `SWAP_{ab}` as generators: `|i,j⟩ → |i,i+j⟩ → |-j,i+j⟩ → |-j,i⟩ → |j,i⟩`,
/// the last step being `H_a² |k⟩ = |-k⟩`.
pub fn swap_word(a: usize, b: usize) -> Vec<CliffordGate> {
    use CliffordGate as G;
    vec![
        G::Sum { control: a, target: b },
        G::SumInv { control: b, target: a },
        G::Sum { control: a, target: b },
        G::H(a),
        G::H(a),
    ]
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name.as_str())?;
        for s in &self.sites {
            write!(f, " {s}")?;
        }
        for p in &self.params {
            write!(f, " {}", format_param(*p))?;
        }
        Ok(())
    }
}

/// Decimal rendering with 17 significant digits.
fn format_param(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { format!("{:.16}", 0.0) } else { format!("{x}") };
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (16 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n: usize,
    pub d: QuditDim,
    pub ops: Vec<GateOp>,
    /// Free-form comment lines (without the leading `# `).
    pub metadata: Vec<String>,
}

impl Circuit {
    pub fn new(n: usize, d: QuditDim) -> Self {
        Circuit { n, d, ops: Vec::new(), metadata: Vec::new() }
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate(self.n, self.d)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn non_clifford_count(&self) -> usize {
        self.ops.iter().filter(|o| !o.is_clifford()).count()
    }

    pub fn emit(&self) -> String {
        let mut out = format!("# qsim v1 d={} n={}\n", self.d, self.n);
        for m in &self.metadata {
            out.push_str("# ");
            out.push_str(m);
            out.push('\n');
        }
        for op in &self.ops {
            out.push_str(&op.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Circuit> {
        let syntax = |line: usize, col: usize, msg: String| Error::Syntax { line, col, msg };
        let mut lines = text.split('\n').enumerate().peekable();
        let (n, d) = loop {
            let Some((i, raw)) = lines.next() else {
                return Err(syntax(1, 1, "missing `# qsim v1 d=<d> n=<n>` header".into()));
            };
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            break parse_header(line).map_err(|msg| syntax(i + 1, 1, msg))?;
        };
        let mut circuit = Circuit::new(n, d);
        for (i, raw) in lines {
            let lineno = i + 1;
            let line = raw.trim_end_matches('\r');
            if let Some(comment) = line.strip_prefix('#') {
                circuit.metadata.push(comment.strip_prefix(' ').unwrap_or(comment).to_string());
                continue;
            }
            let tokens = tokenize(line);
            let Some(&(col, name_tok)) = tokens.first() else {
                continue;
            };
            let name: GateName =
                name_tok.parse().map_err(|_| syntax(lineno, col, format!("unknown gate `{name_tok}`")))?;
            let arity = name.arity();
            if tokens.len() < 1 + arity {
                return Err(syntax(lineno, col, format!("{} needs {} site(s)", name.as_str(), arity)));
            }
            let mut sites = Vec::with_capacity(arity);
            for &(c, tok) in &tokens[1..1 + arity] {
                let s: usize = tok.parse().map_err(|_| syntax(lineno, c, format!("bad site `{tok}`")))?;
                if s >= n {
                    return Err(syntax(lineno, c, format!("site {s} out of range for n={n}")));
                }
                sites.push(s);
            }
            let mut params = Vec::new();
            for &(c, tok) in &tokens[1 + arity..] {
                let p: f64 = tok.parse().map_err(|_| syntax(lineno, c, format!("bad parameter `{tok}`")))?;
                params.push(p);
            }
            let op = GateOp::new(name, sites, params);
            op.validate(n, d).map_err(|e| syntax(lineno, col, e.to_string()))?;
            circuit.ops.push(op);
        }
        Ok(circuit)
    }
}

fn parse_header(line: &str) -> std::result::Result<(usize, QuditDim), String> {
    let rest =
        line.strip_prefix("# qsim v1").ok_or_else(|| format!("expected `# qsim v1 d=<d> n=<n>`, found `{line}`"))?;
    let (mut d, mut n) = (None, None);
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("d=") {
            d = Some(v.parse::<u32>().map_err(|_| format!("bad d `{v}`"))?);
        } else if let Some(v) = tok.strip_prefix("n=") {
            n = Some(v.parse::<usize>().map_err(|_| format!("bad n `{v}`"))?);
        } else {
            return Err(format!("unexpected header token `{tok}`"));
        }
    }
    let d = QuditDim::new(d.ok_or("header missing d=")?).map_err(|e| e.to_string())?;
    let n = n.ok_or("header missing n=")?;
    if n == 0 {
        return Err("n must be positive".into());
    }
    Ok((n, d))
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn diag(values: impl IntoIterator<Item = c64>) -> CMat {
    let v: Vec<c64> = values.into_iter().collect();
    Mat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { c64::new(0.0, 0.0) })
}

pub fn hadamard(d: QuditDim) -> CMat {
    let dd = d.usize();
    let s = 1.0 / (dd as f64).sqrt();
    // H = Σ ω^{ij} |j⟩⟨i|: row j, column i.
    Mat::from_fn(dd, dd, |j, i| d.omega_pow((i * j) as u32 % d.get()) * s)
}

pub fn phase_gate(d: QuditDim) -> CMat {
    let m = d.get();
    if m.is_multiple_of(2) {
        diag((0..m).map(|j| d.tau_pow(j * j % (2 * m))))
    } else {
        diag((0..m).map(|j| d.omega_pow(j * j.saturating_sub(1) / 2 % m)))
    }
}

pub fn shift(d: QuditDim) -> CMat {
    let dd = d.usize();
    Mat::from_fn(dd, dd, |r, c| if r == (c + 1) % dd { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
}

pub fn clock(d: QuditDim) -> CMat {
    diag((0..d.get()).map(|j| d.omega_pow(j)))
}

/// `SUM |i,j⟩ = |i, i+j⟩` on (control, target), control the major index.
pub fn sum_gate(d: QuditDim) -> CMat {
    let dd = d.usize();
    Mat::from_fn(dd * dd, dd * dd, |r, c| {
        let (i, j) = (c / dd, c % dd);
        if r == i * dd + (i + j) % dd {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

pub fn swap_gate(d: QuditDim) -> CMat {
    let dd = d.usize();
    Mat::from_fn(
        dd * dd,
        dd * dd,
        |r, c| {
            if r == (c % dd) * dd + c / dd {
                c64::new(1.0, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        },
    )
}

/// The qudit T gate for `d ∈ {2, 3}`.
pub fn t_gate(d: QuditDim) -> Result<CMat> {
    match d.get() {
        2 => Ok(diag([c64::new(1.0, 0.0), c64::from_polar(1.0, PI / 4.0)])),
        3 => Ok(diag([c64::new(1.0, 0.0), c64::from_polar(1.0, PI / 9.0), c64::from_polar(1.0, 8.0 * PI / 9.0)])),
        other => Err(Error::Unsupported(format!("T gate is defined only for d=2,3 (got d={other})"))),
    }
}

/// `RZ(θ) = diag(e^{iθ(2j-(d-1))/2})`, the usual `diag(e^{-iθ/2}, e^{iθ/2})` at d=2.
pub fn rz_gate(d: QuditDim, theta: f64) -> CMat {
    let m = d.get() as f64;
    diag((0..d.get()).map(|j| c64::from_polar(1.0, theta * (2.0 * j as f64 - (m - 1.0)) / 2.0)))
}

pub fn adjoint(u: &CMat) -> CMat {
    u.adjoint().to_owned()
}

/// Dense unitary of a gate. Two-site gates index `|sites[0], sites[1]⟩`.
pub fn gate_matrix(g: &GateOp, d: QuditDim) -> Result<CMat> {
    let m = match g.name {
        GateName::H => hadamard(d),
        GateName::Hdg => adjoint(&hadamard(d)),
        GateName::S => phase_gate(d),
        GateName::Sdg => adjoint(&phase_gate(d)),
        GateName::X => shift(d),
        GateName::Z => clock(d),
        GateName::Sum => sum_gate(d),
        GateName::SumDg => adjoint(&sum_gate(d)),
        GateName::Swap => swap_gate(d),
        GateName::T => t_gate(d)?,
        GateName::Tdg => adjoint(&t_gate(d)?),
        GateName::Rz => {
            let theta = *g.params.first().ok_or_else(|| Error::Invalid("RZ needs an angle".into()))?;
            rz_gate(d, theta)
        }
        GateName::U1 => {
            if g.params.len() != d.usize() {
                return Err(Error::Invalid(format!("U1 needs {} phases at d={}", d, d)));
            }
            diag(g.params.iter().map(|&t| c64::from_polar(1.0, t)))
        }
    };
    Ok(m)
}

/// Dense unitary of a Clifford generator, two-site gates indexed `|control, target⟩`.
pub fn clifford_matrix(g: &CliffordGate, d: QuditDim) -> CMat {
    gate_matrix(&GateOp::from_clifford(g), d).expect("Clifford generators are always defined")
}

/// Default Clifford block length for `n` sites.
pub fn default_word_length(n: usize) -> usize {
    5 * n * n
}

/// Random word over `{H_i, S_i, SUM_ij}`: the gate kind is drawn uniformly
/// (SUM only when `n ≥ 2`), then its site(s) uniformly.
pub fn random_clifford_word(n: usize, length: usize, rng: &mut impl Rng) -> Vec<CliffordGate> {
    let kinds = if n >= 2 { 3u32 } else { 2 };
    (0..length)
        .map(|_| match rng.gen_range(0..kinds) {
            0 => CliffordGate::H(rng.gen_range(0..n as u32) as usize),
            1 => CliffordGate::S(rng.gen_range(0..n as u32) as usize),
            _ => {
                let control = rng.gen_range(0..n as u32);
                let mut target = rng.gen_range(0..n as u32 - 1);
                if target >= control {
                    target += 1;
                }
                CliffordGate::Sum { control: control as usize, target: target as usize }
            }
        })
        .collect()
}

/// Seeded variant of [`random_clifford_word`].
pub fn random_clifford_word_seeded(n: usize, length: usize, seed: u64) -> Vec<CliffordGate> {
    random_clifford_word(n, length, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `layers` repetitions of a random Clifford block followed by `T 0`.
///
/// `block_len` defaults to [`default_word_length`].
pub fn t_doped_circuit(n: usize, d: QuditDim, layers: usize, seed: u64, block_len: Option<usize>) -> Result<Circuit> {
    if layers == 0 {
        return Err(Error::Invalid("a T-doped circuit needs at least one layer".into()));
    }
    if n == 0 {
        return Err(Error::Invalid("a T-doped circuit needs at least one site".into()));
    }
    let len = block_len.unwrap_or_else(|| default_word_length(n));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n, d);
    c.metadata.push(format!("t-doped seed={seed} layers={layers} block={len}"));
    for _ in 0..layers {
        for g in random_clifford_word(n, len, &mut rng) {
            c.ops.push(GateOp::from_clifford(&g));
        }
        c.ops.push(GateOp::one(GateName::T, 0));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::max_abs_diff;

    fn d(v: u32) -> QuditDim {
        QuditDim::new(v).unwrap()
    }

    #[test]
    fn parses_simple_program() {
        let c = Circuit::parse("# qsim v1 d=3 n=2\nH 0\nSUM 0 1\n").unwrap();
        assert_eq!(c.ops.len(), 2);
        assert_eq!(c.ops[1], GateOp::two(GateName::Sum, 0, 1));
        let t = Circuit::parse("# qsim v1 d=3 n=2\nT 0\n").unwrap();
        assert!(!t.ops[0].is_clifford());
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Circuit::parse("# qsim v1 d=3 n=2\nH 0\n  FOO 1\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 3, col: 3, .. }), "{err}");
        let err = Circuit::parse("# qsim v1 d=3 n=2\nSUM 0 5\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, col: 7, .. }), "{err}");
        let err = Circuit::parse("# qsim v1 d=2 n=1\nRZ 0\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, .. }), "{err}");
        assert!(Circuit::parse("H 0\n").is_err());
        assert!(Circuit::parse("# qsim v1 d=4 n=2\n").is_err());
    }

    #[test]
    fn rz_quarter_is_t_up_to_phase() {
        let c = Circuit::parse("# qsim v1 d=2 n=1\nRZ 0 0.7853981633974483\n").unwrap();
        let rz = gate_matrix(&c.ops[0], d(2)).unwrap();
        let scaled = faer::Scale(c64::from_polar(1.0, PI / 8.0)) * &rz;
        assert!(max_abs_diff(&scaled, &t_gate(d(2)).unwrap()) < 1e-15);
    }

    #[test]
    fn qubit_hadamard() {
        let h = hadamard(d(2));
        let s = 1.0 / 2f64.sqrt();
        let want = Mat::from_fn(2, 2, |i, j| c64::new(if i == 1 && j == 1 { -s } else { s }, 0.0));
        assert!(max_abs_diff(&h, &want) < 1e-15);
    }

    #[test]
    fn qutrit_phase_gate_exponents() {
        let s = phase_gate(d(3));
        assert!((s[(0, 0)] - c64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((s[(1, 1)] - c64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((s[(2, 2)] - d(3).omega_pow(1)).norm() < 1e-15);
    }

    #[test]
    fn qutrit_sum_action() {
        let m = sum_gate(d(3));
        // |1,2⟩ = index 5 → |1,0⟩ = index 3
        assert_eq!(m[(3, 5)], c64::new(1.0, 0.0));
    }

    #[test]
    fn swap_word_is_swap() {
        for dv in [2, 3, 5] {
            let dd = d(dv);
            let mut acc = Mat::<c64>::identity(dv as usize * dv as usize, dv as usize * dv as usize);
            for g in swap_word(0, 1) {
                let m = match g {
                    CliffordGate::Sum { control: 0, .. } => sum_gate(dd),
                    CliffordGate::SumInv { control: 1, .. } => {
                        &swap_gate(dd) * &adjoint(&sum_gate(dd)) * &swap_gate(dd)
                    }
                    CliffordGate::H(0) => {
                        let h = hadamard(dd);
                        let id = Mat::<c64>::identity(dv as usize, dv as usize);
                        kron(&h, &id)
                    }
                    _ => unreachable!(),
                };
                acc = &m * &acc;
            }
            assert!(max_abs_diff(&acc, &swap_gate(dd)) < 1e-12);
        }
    }

    fn kron(a: &CMat, b: &CMat) -> CMat {
        Mat::from_fn(a.nrows() * b.nrows(), a.ncols() * b.ncols(), |r, c| {
            a[(r / b.nrows(), c / b.ncols())] * b[(r % b.nrows(), c % b.ncols())]
        })
    }

    #[test]
    fn t_doped_shape() {
        let c = t_doped_circuit(4, d(3), 3, 7, Some(10)).unwrap();
        let ts: Vec<_> = c.ops.iter().filter(|o| !o.is_clifford()).collect();
        assert_eq!(ts.len(), 3);
        assert!(ts.iter().all(|o| o.name == GateName::T && o.sites == vec![0]));
        assert!(t_doped_circuit(4, d(3), 0, 7, None).is_err());
    }

    #[test]
    fn word_is_deterministic() {
        assert_eq!(random_clifford_word_seeded(4, 50, 9), random_clifford_word_seeded(4, 50, 9));
        assert!(random_clifford_word_seeded(1, 50, 9).iter().all(|g| g.sites().len() == 1));
    }

    #[test]
    fn params_use_seventeen_digits() {
        assert_eq!(format_param(PI / 4.0), "0.78539816339744828");
        assert_eq!(format_param(0.0), "0.0000000000000000");
        assert_eq!(format_param(-2.5), "-2.5000000000000000");
    }
}
