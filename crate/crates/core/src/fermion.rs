//! Second-quantized operators and the Jordan-Wigner mapping to Pauli sums.
//!
//! Conventions:
//! - `a+_p -> (X_p - i Y_p)/2 Z_{p-1} ... Z_0`.
//! - Basis state index bit `q` is the occupation of qubit `q`.
//! - In text form the rightmost character of a Pauli string is qubit 0,
//!   matching the ket notation `|q_{n-1} ... q_1 q_0>`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::hamio::SpinOrbitalHamiltonian;

/// Terms with a coefficient magnitude at or below this are dropped.
pub const SIMPLIFY_TOL: f64 = 1e-14;

/// Largest register a packed Pauli string can describe.
pub const MAX_QUBITS: usize = 64;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, PartialEq)]
pub enum OperatorError {
    #[error("mode index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },
    #[error("{0} qubits exceeds the packed Pauli limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("cannot parse Pauli operator line `{0}`")]
    Parse(String),
}

/// Exact phase `i^k`.
#[inline]
fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// An n-qubit Pauli string packed into X and Z bit masks.
///
/// Qubit `q` carries `X` when only bit `q` of `x` is set, `Z` when only bit
/// `q` of `z` is set, and `Y` when both are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn single(qubit: usize, p: Pauli) -> Self {
        let bit = 1u64 << qubit;
        match p {
            Pauli::I => Self::IDENTITY,
            Pauli::X => Self { x: bit, z: 0 },
            Pauli::Y => Self { x: bit, z: bit },
            Pauli::Z => Self { x: 0, z: bit },
        }
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let bit = 1u64 << qubit;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Product `self * other = i^k * result`, returning `(k mod 4, result)`.
    #[inline]
    pub fn mul(&self, other: &PauliString) -> (u32, PauliString) {
        // Each factor is i^{x z} X^x Z^z per qubit; moving Z^{z1} past
        // X^{x2} contributes (-1)^{z1 x2}.
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let k = self.y_count() + other.y_count() + 2 * (self.z & other.x).count_ones()
            + 4
            - (x & z).count_ones() % 4;
        (k % 4, PauliString { x, z })
    }

    /// `true` when the two strings commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Action on a basis state: `P|b> = phase * |b ^ x>`.
    #[inline]
    pub fn apply_to_basis(&self, b: u64) -> (Complex64, u64) {
        let sign = if (b & self.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        (i_pow(self.y_count()) * sign, b ^ self.x)
    }

    pub fn to_label(&self, n_qubits: usize) -> String {
        (0..n_qubits)
            .rev()
            .map(|q| match self.get(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            })
            .collect()
    }

    pub fn from_label(label: &str) -> Option<(usize, PauliString)> {
        let n = label.chars().count();
        if n > MAX_QUBITS {
            return None;
        }
        let mut s = PauliString::IDENTITY;
        for (pos, c) in label.chars().enumerate() {
            let q = n - 1 - pos;
            let p = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return None,
            };
            let single = PauliString::single(q, p);
            s.x |= single.x;
            s.z |= single.z;
        }
        Some((n, s))
    }
}

/// Weighted sum of Pauli strings on a fixed register.
///
/// Terms live in a `BTreeMap` so iteration order (and hence every floating
/// point accumulation over terms) is reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliOperator {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliOperator {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "{n_qubits} qubits exceeds {MAX_QUBITS}");
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize, coeff: impl Into<Complex64>) -> Self {
        let mut op = Self::zero(n_qubits);
        op.add_term(PauliString::IDENTITY, coeff.into());
        op.simplify();
        op
    }

    /// `coeff * P_qubit`.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli, coeff: impl Into<Complex64>) -> Self {
        Self::from_terms(n_qubits, [(PauliString::single(qubit, p), coeff.into())])
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (PauliString, Complex64)>,
    ) -> Self {
        let mut op = Self::zero(n_qubits);
        for (s, c) in terms {
            op.add_term(s, c);
        }
        op.simplify();
        op
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    /// Adds `coeff * s` without simplifying.
    pub fn add_term(&mut self, s: PauliString, coeff: Complex64) {
        *self.terms.entry(s).or_default() += coeff;
    }

    /// Drops terms whose coefficient magnitude is at most [`SIMPLIFY_TOL`].
    pub fn simplify(&mut self) {
        self.terms.retain(|_, c| c.norm() > SIMPLIFY_TOL);
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = Self::from_terms(self.n_qubits, self.terms.iter().map(|(s, c)| (*s, c * factor)));
        out.simplify();
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(s, c)| (*s, c.conj())).collect(),
        }
    }

    /// All coefficients real (within `tol`).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// All coefficients imaginary (within `tol`).
    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.re.abs() <= tol)
    }

    fn check_same_register(&self, other: &Self) -> Result<(), OperatorError> {
        if self.n_qubits != other.n_qubits {
            return Err(OperatorError::QubitMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_same_register(other)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(*s, *c);
        }
        out.simplify();
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_same_register(other)?;
        let mut out = Self::zero(self.n_qubits);
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                let (k, s) = sa.mul(sb);
                out.add_term(s, ca * cb * i_pow(k));
            }
        }
        out.simplify();
        Ok(out)
    }

    /// Maximum coefficient magnitude of `self - other`.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let mut keys: Vec<&PauliString> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|k| (self.coefficient(k) - other.coefficient(k)).norm())
            .fold(0.0, f64::max)
    }

    /// One term per line: `coeff PAULISTRING`, e.g. `0.5 IXYZ` or `-0.5i XY`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, c) in &self.terms {
            out.push_str(&format_coefficient(*c));
            out.push(' ');
            out.push_str(&s.to_label(self.n_qubits));
            out.push('\n');
        }
        out
    }

    /// Parses the [`PauliOperator::to_text`] format; `n_qubits` is needed to
    /// describe the empty operator.
    pub fn from_text(text: &str, n_qubits: usize) -> Result<Self, OperatorError> {
        let mut op = Self::zero(n_qubits);
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut parts = line.split_whitespace();
            let (Some(coeff), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(OperatorError::Parse(line.to_string()));
            };
            let c = parse_coefficient(coeff).ok_or_else(|| OperatorError::Parse(line.to_string()))?;
            let (n, s) =
                PauliString::from_label(label).ok_or_else(|| OperatorError::Parse(line.to_string()))?;
            if n != n_qubits {
                return Err(OperatorError::QubitMismatch { left: n_qubits, right: n });
            }
            op.add_term(s, c);
        }
        op.simplify();
        Ok(op)
    }
}

fn format_coefficient(c: Complex64) -> String {
    match (c.re != 0.0, c.im != 0.0) {
        (_, false) => format!("{:e}", c.re),
        (false, true) => format!("{:e}i", c.im),
        (true, true) => {
            let sign = if c.im.is_sign_negative() { "" } else { "+" };
            format!("{:e}{sign}{:e}i", c.re, c.im)
        }
    }
}

fn parse_coefficient(token: &str) -> Option<Complex64> {
    let Some(body) = token.strip_suffix('i') else {
        return token.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // Split at the sign that separates real and imaginary parts, skipping
    // the leading sign and exponent signs.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().ok()?;
            let im = body[k..].trim_start_matches('+').parse::<f64>().ok()?;
            Some(Complex64::new(re, im))
        }
        None => body.parse::<f64>().ok().map(|im| Complex64::new(0.0, im)),
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Add for &PauliOperator {
    type Output = PauliOperator;
    fn add(self, rhs: Self) -> PauliOperator {
        self.try_add(rhs).expect("qubit count mismatch in operator sum")
    }
}

impl Neg for &PauliOperator {
    type Output = PauliOperator;
    fn neg(self) -> PauliOperator {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &PauliOperator {
    type Output = PauliOperator;
    fn sub(self, rhs: Self) -> PauliOperator {
        self + &(-rhs)
    }
}

impl Mul for &PauliOperator {
    type Output = PauliOperator;
    fn mul(self, rhs: Self) -> PauliOperator {
        self.try_mul(rhs).expect("qubit count mismatch in operator product")
    }
}

/// `ab - ba`.
pub fn commutator(a: &PauliOperator, b: &PauliOperator) -> Result<PauliOperator, OperatorError> {
    a.check_same_register(b)?;
    // Commuting string pairs cancel exactly; anticommuting ones double.
    let mut out = PauliOperator::zero(a.n_qubits);
    for (sa, ca) in &a.terms {
        for (sb, cb) in &b.terms {
            if !sa.commutes_with(sb) {
                let (k, s) = sa.mul(sb);
                out.add_term(s, 2.0 * ca * cb * i_pow(k));
            }
        }
    }
    out.simplify();
    Ok(out)
}

/// A creation (`dagger = true`) or annihilation operator on one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LadderOp {
    pub mode: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }
    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }
}

/// Coefficient times an ordered product of ladder operators.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub coefficient: Complex64,
    pub ops: Vec<LadderOp>,
}

impl FermionTerm {
    pub fn new(coefficient: impl Into<Complex64>, ops: Vec<LadderOp>) -> Self {
        Self { coefficient: coefficient.into(), ops }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            coefficient: self.coefficient.conj(),
            ops: self.ops.iter().rev().map(|o| LadderOp { mode: o.mode, dagger: !o.dagger }).collect(),
        }
    }
}

/// Sum of fermion terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FermionOperator {
    pub terms: Vec<FermionTerm>,
}

impl FermionOperator {
    pub fn new(terms: Vec<FermionTerm>) -> Self {
        Self { terms }
    }

    pub fn adjoint(&self) -> Self {
        Self { terms: self.terms.iter().map(FermionTerm::adjoint).collect() }
    }

    /// Normal-ordered form: creators left of annihilators, each group sorted
    /// by descending mode, like terms combined and near-zero terms dropped.
    pub fn normal_ordered(&self) -> BTreeMap<Vec<LadderOp>, Complex64> {
        let mut out: BTreeMap<Vec<LadderOp>, Complex64> = BTreeMap::new();
        let mut stack: Vec<(Complex64, Vec<LadderOp>)> =
            self.terms.iter().map(|t| (t.coefficient, t.ops.clone())).collect();
        while let Some((coeff, mut ops)) = stack.pop() {
            match normal_order_pass(&mut ops) {
                PassOutcome::Vanishes => {}
                PassOutcome::Done(sign) => *out.entry(ops).or_default() += coeff * sign,
                PassOutcome::Split { sign, contraction } => {
                    stack.push((coeff * sign, ops));
                    stack.push((coeff * contraction.0, contraction.1));
                }
            }
        }
        out.retain(|_, c| c.norm() > SIMPLIFY_TOL);
        out
    }

    /// Operator equality after normal ordering.
    pub fn equivalent(&self, other: &Self) -> bool {
        let a = self.normal_ordered();
        let b = other.normal_ordered();
        let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
        let same = keys.into_iter().all(|k| {
            let ca = a.get(k).copied().unwrap_or_default();
            let cb = b.get(k).copied().unwrap_or_default();
            (ca - cb).norm() <= 1e-12
        });
        same
    }
}

enum PassOutcome {
    Vanishes,
    Done(f64),
    /// The swap produced a sign on the reordered term plus a contraction term
    /// (from `a_p a+_p = 1 - a+_p a_p`).
    Split { sign: f64, contraction: (Complex64, Vec<LadderOp>) },
}

/// Bubble sort into normal order, stopping at the first swap that generates
/// a contraction.
fn normal_order_pass(ops: &mut [LadderOp]) -> PassOutcome {
    let key = |o: &LadderOp| (!o.dagger, std::cmp::Reverse(o.mode));
    let mut sign = 1.0;
    loop {
        let mut swapped = false;
        for k in 0..ops.len().saturating_sub(1) {
            let (left, right) = (ops[k], ops[k + 1]);
            if left == right {
                return PassOutcome::Vanishes;
            }
            if key(&left) <= key(&right) {
                continue;
            }
            if !left.dagger && right.dagger && left.mode == right.mode {
                let mut contracted = ops.to_vec();
                contracted.drain(k..k + 2);
                ops.swap(k, k + 1);
                return PassOutcome::Split {
                    sign: -sign,
                    contraction: (Complex64::new(sign, 0.0), contracted),
                };
            }
            ops.swap(k, k + 1);
            sign = -sign;
            swapped = true;
        }
        if !swapped {
            return PassOutcome::Done(sign);
        }
    }
}

fn ladder_image(op: LadderOp, n_qubits: usize) -> PauliOperator {
    let zs = (1u64 << op.mode) - 1;
    let bit = 1u64 << op.mode;
    let x = PauliString { x: bit, z: zs };
    let y = PauliString { x: bit, z: zs | bit };
    let y_coeff = if op.dagger { -0.5 } else { 0.5 };
    PauliOperator::from_terms(
        n_qubits,
        [(x, Complex64::new(0.5, 0.0)), (y, Complex64::new(0.0, y_coeff))],
    )
}

/// Jordan-Wigner image of a single fermion term.
pub fn jordan_wigner(term: &FermionTerm, n_qubits: usize) -> Result<PauliOperator, OperatorError> {
    if n_qubits > MAX_QUBITS {
        return Err(OperatorError::TooManyQubits(n_qubits));
    }
    let mut out = PauliOperator::identity(n_qubits, term.coefficient);
    for op in &term.ops {
        if op.mode >= n_qubits {
            return Err(OperatorError::IndexOutOfRange { index: op.mode, n_qubits });
        }
        out = out.try_mul(&ladder_image(*op, n_qubits))?;
    }
    Ok(out)
}

/// Jordan-Wigner image of a fermion sum.
pub fn jordan_wigner_sum(
    op: &FermionOperator,
    n_qubits: usize,
) -> Result<PauliOperator, OperatorError> {
    let mut out = PauliOperator::zero(n_qubits);
    for term in &op.terms {
        for (s, c) in jordan_wigner(term, n_qubits)?.terms() {
            out.add_term(*s, *c);
        }
    }
    out.simplify();
    Ok(out)
}

/// Qubit Hamiltonian `e_nuc + sum h a+a + 1/4 sum g a+a+aa`.
pub fn hamiltonian_to_qubits(h: &SpinOrbitalHamiltonian) -> PauliOperator {
    let n = h.n_so;
    let images: Vec<[PauliOperator; 2]> = (0..n)
        .map(|p| [ladder_image(LadderOp::annihilate(p), n), ladder_image(LadderOp::create(p), n)])
        .collect();
    let mut out = PauliOperator::identity(n, h.e_nuc);
    let mut accumulate = |coeff: f64, product: PauliOperator| {
        for (s, c) in product.terms() {
            out.add_term(*s, c * coeff);
        }
    };
    for p in 0..n {
        for q in 0..n {
            let c = h.h(p, q);
            if c.abs() > SIMPLIFY_TOL {
                accumulate(c, &images[p][1] * &images[q][0]);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            let pq = &images[p][1] * &images[q][1];
            for r in 0..n {
                for s in 0..n {
                    if r == s {
                        continue;
                    }
                    let c = 0.25 * h.g(p, q, r, s);
                    if c.abs() > SIMPLIFY_TOL {
                        let sr = &images[s][0] * &images[r][0];
                        accumulate(c, &pq * &sr);
                    }
                }
            }
        }
    }
    out.simplify();
    out
}

/// A Pauli sum precompiled for matrix-free application.
///
/// Strings sharing an X mask flip the same bits, so each group is stored as
/// the list of basis states where its combined diagonal factor is nonzero.
#[derive(Debug, Clone)]
pub struct CompiledOperator {
    n_qubits: usize,
    groups: Vec<FlipGroup>,
}

#[derive(Debug, Clone)]
struct FlipGroup {
    flip: u32,
    entries: Vec<(u32, Complex64)>,
}

impl CompiledOperator {
    /// Compilation is limited to 30 qubits (basis indices stored as `u32`).
    pub fn new(op: &PauliOperator) -> Self {
        assert!(op.n_qubits <= 30, "compiled operators support at most 30 qubits");
        let dim = 1usize << op.n_qubits;
        let mut by_flip: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
        for (s, c) in op.terms() {
            by_flip.entry(s.x).or_default().push((s.z, c * i_pow(s.y_count())));
        }
        let groups = by_flip
            .into_iter()
            .map(|(flip, terms)| {
                let entries = (0..dim as u64)
                    .filter_map(|b| {
                        let v: Complex64 = terms
                            .iter()
                            .map(|&(z, c)| if (b & z).count_ones() % 2 == 1 { -c } else { c })
                            .sum();
                        (v.norm() > SIMPLIFY_TOL).then_some((b as u32, v))
                    })
                    .collect();
                FlipGroup { flip: flip as u32, entries }
            })
            .collect();
        Self { n_qubits: op.n_qubits, groups }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of stored nonzero matrix elements.
    pub fn nnz(&self) -> usize {
        self.groups.iter().map(|g| g.entries.len()).sum()
    }

    /// `out = op * input`.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), 1 << self.n_qubits);
        out.iter_mut().for_each(|v| *v = Complex64::default());
        for g in &self.groups {
            for &(b, c) in &g.entries {
                out[(b ^ g.flip) as usize] += c * input[b as usize];
            }
        }
    }

    /// `out += op * input`.
    #[inline]
    pub fn accumulate(&self, input: &[Complex64], out: &mut [Complex64]) {
        for g in &self.groups {
            for &(b, c) in &g.entries {
                out[(b ^ g.flip) as usize] += c * input[b as usize];
            }
        }
    }

    /// `<bra| op |ket>`.
    #[inline]
    pub fn matrix_element(&self, bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::default();
        for g in &self.groups {
            for &(b, c) in &g.entries {
                acc += bra[(b ^ g.flip) as usize].conj() * c * ket[b as usize];
            }
        }
        acc
    }

    /// Sorted, deduplicated basis indices that can receive amplitude.
    pub fn targets(&self) -> Vec<u32> {
        let mut rows: Vec<u32> =
            self.groups.iter().flat_map(|g| g.entries.iter().map(move |e| e.0 ^ g.flip)).collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }

    /// Nonzero column entries `(row, value)` of the basis state `b`.
    pub fn column(&self, b: u32) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.groups.iter().filter_map(move |g| {
            g.entries
                .binary_search_by_key(&b, |e| e.0)
                .ok()
                .map(|k| (b ^ g.flip, g.entries[k].1))
        })
    }
}
