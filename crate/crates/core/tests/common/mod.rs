//! Shared helpers for integration tests: fixture loading and a bitwise
//! second-quantization oracle that never touches Pauli strings.

#![allow(dead_code)]

use std::path::PathBuf;

use adaptvqe::hamio::{parse_fcidump, MolecularHamiltonian};
use adaptvqe::problem::Problem;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn molecule(name: &str) -> MolecularHamiltonian {
    let text = std::fs::read_to_string(fixtures_dir().join(format!("{name}.fcidump"))).unwrap();
    parse_fcidump(&text).unwrap()
}

pub fn problem(name: &str) -> Problem {
    Problem::new(molecule(name)).unwrap()
}

#[derive(Deserialize)]
pub struct Manifest {
    pub fixture: Vec<Entry>,
}

#[derive(Deserialize)]
pub struct Entry {
    pub name: String,
    pub norb: usize,
    pub nelec: usize,
    pub e_nuc: f64,
    pub rhf_energy: f64,
    pub fci_energy: f64,
}

pub fn manifest() -> Manifest {
    toml::from_str(&std::fs::read_to_string(fixtures_dir().join("manifest.toml")).unwrap()).unwrap()
}

/// `a_p |b>` with the Jordan-Wigner sign from occupied modes below `p`.
pub fn annihilate(p: usize, b: u64) -> Option<(f64, u64)> {
    if b >> p & 1 == 0 {
        return None;
    }
    let sign = if (b & ((1u64 << p) - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
    Some((sign, b ^ (1 << p)))
}

pub fn create(p: usize, b: u64) -> Option<(f64, u64)> {
    if b >> p & 1 == 1 {
        return None;
    }
    let sign = if (b & ((1u64 << p) - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
    Some((sign, b ^ (1 << p)))
}

/// Applies a ladder string, rightmost operator first. `(mode, dagger)`.
pub fn apply_string(ops: &[(usize, bool)], b: u64) -> Option<(f64, u64)> {
    let mut sign = 1.0;
    let mut state = b;
    for &(mode, dagger) in ops.iter().rev() {
        let (s, next) = if dagger { create(mode, state)? } else { annihilate(mode, state)? };
        sign *= s;
        state = next;
    }
    Some((sign, state))
}

/// Dense matrix of `sum_k c_k * string_k` on `n` modes.
pub fn ladder_matrix(terms: &[(f64, Vec<(usize, bool)>)], n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (c, ops) in terms {
        for b in 0..dim as u64 {
            if let Some((s, out)) = apply_string(ops, b) {
                m[(out as usize, b as usize)] += Complex64::new(c * s, 0.0);
            }
        }
    }
    m
}

/// Molecular Hamiltonian from spatial integrals in chemists' notation,
/// alpha = 2p and beta = 2p + 1.
pub fn hamiltonian_matrix(m: &MolecularHamiltonian) -> DMatrix<Complex64> {
    let n = 2 * m.n_spatial;
    let mut terms: Vec<(f64, Vec<(usize, bool)>)> = Vec::new();
    for p in 0..m.n_spatial {
        for q in 0..m.n_spatial {
            for s in 0..2 {
                terms.push((m.h(p, q), vec![(2 * p + s, true), (2 * q + s, false)]));
            }
        }
    }
    for p in 0..m.n_spatial {
        for q in 0..m.n_spatial {
            for r in 0..m.n_spatial {
                for s in 0..m.n_spatial {
                    let v = m.g(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for x in 0..2 {
                        for y in 0..2 {
                            terms.push((
                                0.5 * v,
                                vec![(2 * p + x, true), (2 * r + y, true), (2 * s + y, false), (2 * q + x, false)],
                            ));
                        }
                    }
                }
            }
        }
    }
    let mut h = ladder_matrix(&terms, n);
    for d in 0..1usize << n {
        h[(d, d)] += Complex64::new(m.e_nuc, 0.0);
    }
    h
}

pub fn dense_apply(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    (m * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `exp(theta * g) v` by a truncated Taylor series over sub-steps small
/// enough that thirty terms reach machine precision (needs `||g|| <= 1`).
pub fn taylor_expm_apply(g: &DMatrix<Complex64>, theta: f64, v: &[Complex64]) -> Vec<Complex64> {
    let steps = (theta.abs() / 0.5).ceil().max(1.0) as usize;
    let h = theta / steps as f64;
    let mut out = nalgebra::DVector::from_column_slice(v);
    for _ in 0..steps {
        let mut term = out.clone();
        let mut sum = out.clone();
        for k in 1..30 {
            term = (g * term) * Complex64::new(h / k as f64, 0.0);
            sum += &term;
        }
        out = sum;
    }
    out.as_slice().to_vec()
}
