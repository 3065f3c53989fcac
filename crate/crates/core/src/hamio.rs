//! Molecular integrals: FCIDUMP parsing and spin-orbital expansion.
//!
//! Spatial orbital `p` expands to spin orbitals `2p` (alpha) and `2p + 1`
//! (beta). Two-electron integrals are stored in chemists' notation `(pq|rs)`.

use std::fmt::Write as _;

use thiserror::Error;

/// Symmetry tolerance used when validating parsed integrals.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum HamiltonianError {
    #[error("line {line}: malformed FCIDUMP header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("FCIDUMP header is missing required key {0}")]
    MissingKey(&'static str),
    #[error("line {line}: cannot parse `{token}` as a number")]
    InvalidNumber { line: usize, token: String },
    #[error("line {line}: index {index} outside [0, {norb}]")]
    IndexOutOfRange { line: usize, index: i64, norb: usize },
    #[error("line {line}: expected `value i j k l`, found {found} tokens")]
    MalformedEntry { line: usize, found: usize },
    #[error("line {line}: complex integrals are not supported")]
    ComplexIntegral { line: usize },
    #[error("line {line}: index pattern ({i},{j},{k},{l}) is not a valid FCIDUMP entry")]
    InvalidIndexPattern { line: usize, i: usize, j: usize, k: usize, l: usize },
    #[error("{n_electrons} electrons cannot occupy {n_spin_orbitals} spin orbitals")]
    TooManyElectrons { n_electrons: usize, n_spin_orbitals: usize },
    #[error("electron count {n_electrons} is inconsistent with MS2={ms2}")]
    InconsistentSpin { n_electrons: usize, ms2: i32 },
}

/// Integrals over spatial orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularHamiltonian {
    pub n_spatial: usize,
    pub n_electrons: usize,
    pub ms2: i32,
    pub e_nuc: f64,
    /// One-electron integrals, row-major `n_spatial x n_spatial`.
    pub h: Vec<f64>,
    /// Two-electron integrals `(pq|rs)`, row-major over `p, q, r, s`.
    pub g: Vec<f64>,
}

impl MolecularHamiltonian {
    pub fn zeros(n_spatial: usize, n_electrons: usize, ms2: i32) -> Self {
        Self {
            n_spatial,
            n_electrons,
            ms2,
            e_nuc: 0.0,
            h: vec![0.0; n_spatial * n_spatial],
            g: vec![0.0; n_spatial.pow(4)],
        }
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.n_spatial + q]
    }

    #[inline]
    pub fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.g[self.g_index(p, q, r, s)]
    }

    #[inline]
    fn g_index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.n_spatial;
        ((p * n + q) * n + r) * n + s
    }

    pub fn set_h(&mut self, p: usize, q: usize, value: f64) {
        let n = self.n_spatial;
        self.h[p * n + q] = value;
        self.h[q * n + p] = value;
    }

    /// Sets `(pq|rs)` together with its eight real-orbital images.
    pub fn set_g(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let idx = self.g_index(a, b, c, d);
            self.g[idx] = value;
        }
    }

    /// Number of (alpha, beta) electrons implied by `n_electrons` and `ms2`.
    pub fn electron_split(&self) -> Result<(usize, usize), HamiltonianError> {
        electron_split(self.n_electrons, self.ms2)
    }

    /// Checks the structural invariants: symmetric `h`, eight-fold symmetric
    /// `g`, and an electron count that fits.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.n_spatial;
        if self.n_electrons > 2 * n {
            return Err(format!("{} electrons in {} spatial orbitals", self.n_electrons, n));
        }
        for p in 0..n {
            for q in 0..n {
                if (self.h(p, q) - self.h(q, p)).abs() > SYMMETRY_TOL {
                    return Err(format!("h[{p}][{q}] != h[{q}][{p}]"));
                }
                for r in 0..n {
                    for s in 0..n {
                        let v = self.g(p, q, r, s);
                        for w in [self.g(q, p, r, s), self.g(p, q, s, r), self.g(r, s, p, q)] {
                            if (v - w).abs() > SYMMETRY_TOL {
                                return Err(format!("({p}{q}|{r}{s}) breaks 8-fold symmetry"));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Closed-shell determinant energy with the lowest `n_electrons / 2`
    /// spatial orbitals doubly occupied.
    pub fn closed_shell_energy(&self) -> f64 {
        let occ = self.n_electrons / 2;
        let mut e = self.e_nuc;
        for i in 0..occ {
            e += 2.0 * self.h(i, i);
            for j in 0..occ {
                e += 2.0 * self.g(i, i, j, j) - self.g(i, j, j, i);
            }
        }
        e
    }
}

/// Number of (alpha, beta) electrons for a given total count and `2 * S_z`.
pub fn electron_split(n_electrons: usize, ms2: i32) -> Result<(usize, usize), HamiltonianError> {
    let ne = n_electrons as i64;
    let ms2_i = ms2 as i64;
    if (ne + ms2_i) % 2 != 0 || ms2_i.abs() > ne {
        return Err(HamiltonianError::InconsistentSpin { n_electrons, ms2 });
    }
    Ok((((ne + ms2_i) / 2) as usize, ((ne - ms2_i) / 2) as usize))
}

/// Spin orbitals occupied in the Hartree-Fock determinant under interleaved
/// ordering (alpha even, beta odd), ascending.
pub fn hf_occupation(
    n_spin_orbitals: usize,
    n_electrons: usize,
    ms2: i32,
) -> Result<Vec<usize>, HamiltonianError> {
    let too_many = HamiltonianError::TooManyElectrons { n_electrons, n_spin_orbitals };
    if n_electrons > n_spin_orbitals || !n_spin_orbitals.is_multiple_of(2) {
        return Err(too_many);
    }
    let (n_alpha, n_beta) = electron_split(n_electrons, ms2)?;
    let n_spatial = n_spin_orbitals / 2;
    if n_alpha > n_spatial || n_beta > n_spatial {
        return Err(too_many);
    }
    let mut occ: Vec<usize> = (0..n_alpha)
        .map(|p| 2 * p)
        .chain((0..n_beta).map(|p| 2 * p + 1))
        .collect();
    occ.sort_unstable();
    Ok(occ)
}

#[derive(Default)]
struct Header {
    norb: Option<usize>,
    nelec: Option<usize>,
    ms2: Option<i32>,
}

fn parse_header(lines: &[(usize, &str)]) -> Result<Header, HamiltonianError> {
    let mut header = Header::default();
    for &(line, text) in lines {
        let cleaned = text.replace("&FCI", " ").replace("&fci", " ");
        for item in cleaned.split(',') {
            let Some((key, value)) = item.split_once('=') else {
                continue;
            };
            let key = key.trim().to_ascii_uppercase();
            let value = value.trim();
            let bad = || HamiltonianError::MalformedHeader {
                line,
                reason: format!("cannot parse {key}={value}"),
            };
            match key.as_str() {
                "NORB" => header.norb = Some(value.parse().map_err(|_| bad())?),
                "NELEC" => header.nelec = Some(value.parse().map_err(|_| bad())?),
                "MS2" => header.ms2 = Some(value.parse().map_err(|_| bad())?),
                _ => {}
            }
        }
    }
    Ok(header)
}

/// Parses an FCIDUMP file.
///
/// The header must contain `NORB`, `NELEC` and `MS2`; other keys (`ORBSYM`,
/// `ISYM`, ...) are ignored. Each integral line is `value i j k l` with
/// one-based indices: `(0,0,0,0)` is the nuclear repulsion, `(i,j,0,0)` a
/// one-electron integral, and `(i,j,k,l)` the two-electron integral
/// `(ij|kl)`. Lines of the form `(i,0,0,0)` (orbital energies) are skipped.
pub fn parse_fcidump(text: &str) -> Result<MolecularHamiltonian, HamiltonianError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();

    let Some(&(first_line, first)) = lines.first() else {
        return Err(HamiltonianError::MalformedHeader {
            line: 1,
            reason: "empty input".into(),
        });
    };
    if !first.trim_start().to_ascii_uppercase().starts_with("&FCI") {
        return Err(HamiltonianError::MalformedHeader {
            line: first_line,
            reason: "expected `&FCI`".into(),
        });
    }
    let end = lines
        .iter()
        .position(|(_, l)| {
            let t = l.trim().to_ascii_uppercase();
            t.starts_with("&END") || t == "/" || t.ends_with("&END")
        })
        .ok_or(HamiltonianError::MalformedHeader {
            line: lines.last().map_or(1, |l| l.0),
            reason: "header is not terminated by &END or /".into(),
        })?;

    let header = parse_header(&lines[..=end])?;
    let norb = header.norb.ok_or(HamiltonianError::MissingKey("NORB"))?;
    let nelec = header.nelec.ok_or(HamiltonianError::MissingKey("NELEC"))?;
    let ms2 = header.ms2.ok_or(HamiltonianError::MissingKey("MS2"))?;
    if nelec > 2 * norb {
        return Err(HamiltonianError::TooManyElectrons {
            n_electrons: nelec,
            n_spin_orbitals: 2 * norb,
        });
    }
    electron_split(nelec, ms2)?;

    let mut ham = MolecularHamiltonian::zeros(norb, nelec, ms2);
    for &(line, text) in &lines[end + 1..] {
        if text.contains('(') {
            return Err(HamiltonianError::ComplexIntegral { line });
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != 5 {
            if tokens.len() == 6 {
                return Err(HamiltonianError::ComplexIntegral { line });
            }
            return Err(HamiltonianError::MalformedEntry { line, found: tokens.len() });
        }
        let value = parse_float(tokens[0]).ok_or_else(|| HamiltonianError::InvalidNumber {
            line,
            token: tokens[0].to_string(),
        })?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&tokens[1..]) {
            let v: i64 = tok.parse().map_err(|_| HamiltonianError::InvalidNumber {
                line,
                token: tok.to_string(),
            })?;
            if v < 0 || v as usize > norb {
                return Err(HamiltonianError::IndexOutOfRange { line, index: v, norb });
            }
            *slot = v as usize;
        }
        match idx {
            [0, 0, 0, 0] => ham.e_nuc = value,
            [i, 0, 0, 0] if i > 0 => {}
            [i, j, 0, 0] if i > 0 && j > 0 => ham.set_h(i - 1, j - 1, value),
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                ham.set_g(i - 1, j - 1, k - 1, l - 1, value)
            }
            [i, j, k, l] => {
                return Err(HamiltonianError::InvalidIndexPattern { line, i, j, k, l });
            }
        }
    }
    Ok(ham)
}

fn parse_float(token: &str) -> Option<f64> {
    // Fortran writers sometimes emit `1.0D-03`.
    token.replace(['D', 'd'], "E").parse().ok()
}

/// Serializes to FCIDUMP with one line per symmetry-unique integral.
/// Values use the shortest representation that round-trips exactly.
pub fn write_fcidump(m: &MolecularHamiltonian) -> String {
    let n = m.n_spatial;
    let mut out = String::new();
    let _ = writeln!(out, " &FCI NORB={},NELEC={},MS2={},", n, m.n_electrons, m.ms2);
    out.push_str(" &END\n");
    let pair = |a: usize, b: usize| a * (a + 1) / 2 + b;
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if pair(p, q) < pair(r, s) {
                        continue;
                    }
                    let v = m.g(p, q, r, s);
                    if v != 0.0 {
                        let _ = writeln!(out, "{:e} {} {} {} {}", v, p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = m.h(p, q);
            if v != 0.0 {
                let _ = writeln!(out, "{:e} {} {} 0 0", v, p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:e} 0 0 0 0", m.e_nuc);
    out
}

/// One- and antisymmetrized two-body coefficients over spin orbitals.
///
/// The second-quantized Hamiltonian is
/// `e_nuc + sum h_PQ a+_P a_Q + 1/4 sum g_PQRS a+_P a+_Q a_S a_R`
/// with `g_PQRS = <PQ||RS>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOrbitalHamiltonian {
    pub n_so: usize,
    pub e_nuc: f64,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
}

impl SpinOrbitalHamiltonian {
    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.n_so + q]
    }

    #[inline]
    pub fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_so;
        self.g[((p * n + q) * n + r) * n + s]
    }

    /// Energy of the determinant with the given occupied spin orbitals.
    pub fn determinant_energy(&self, occupied: &[usize]) -> f64 {
        let mut e = self.e_nuc;
        for &i in occupied {
            e += self.h(i, i);
            for &j in occupied {
                e += 0.5 * self.g(i, j, i, j);
            }
        }
        e
    }
}

/// Expands spatial integrals to spin orbitals (alpha = `2p`, beta = `2p + 1`).
pub fn to_spin_orbitals(m: &MolecularHamiltonian) -> SpinOrbitalHamiltonian {
    let n = 2 * m.n_spatial;
    let mut h = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            if p % 2 == q % 2 {
                h[p * n + q] = m.h(p / 2, q / 2);
            }
        }
    }
    // <PQ|RS> = (PR|QS) with spin deltas on (P,R) and (Q,S).
    let phys = |p: usize, q: usize, r: usize, s: usize| -> f64 {
        if p % 2 == r % 2 && q % 2 == s % 2 {
            m.g(p / 2, r / 2, q / 2, s / 2)
        } else {
            0.0
        }
    };
    let mut g = vec![0.0; n.pow(4)];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    g[((p * n + q) * n + r) * n + s] = phys(p, q, r, s) - phys(p, q, s, r);
                }
            }
        }
    }
    SpinOrbitalHamiltonian { n_so: n, e_nuc: m.e_nuc, h, g }
}
