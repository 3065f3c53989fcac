//! Particle-hole UCCSD operator pool.
//!
//! Singles `a+_a a_i - a+_i a_a` and doubles `a+_a a+_b a_j a_i - h.c.` over
//! occupied `i < j` and virtual `a < b`, restricted to excitations that keep
//! the numbers of alpha and beta electrons fixed.

use num_complex::Complex64;
use thiserror::Error;

use crate::fermion::{
    jordan_wigner_sum, FermionOperator, FermionTerm, LadderOp, OperatorError, PauliOperator,
};
use crate::hamio::{hf_occupation, HamiltonianError};
use crate::oracle::{dense_matrix, MAX_DENSE_QUBITS};

#[derive(Debug, Error, PartialEq)]
pub enum PoolError {
    #[error(transparent)]
    Occupation(#[from] HamiltonianError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcitationKind {
    Single,
    Double,
}

/// One anti-Hermitian pool generator.
#[derive(Debug, Clone)]
pub struct PoolOperator {
    /// e.g. `"0,1 -> 4,5"`.
    pub label: String,
    pub kind: ExcitationKind,
    /// Occupied spin orbitals that are emptied, ascending.
    pub occupied: Vec<usize>,
    /// Virtual spin orbitals that are filled, ascending.
    pub virtuals: Vec<usize>,
    pub generator: PauliOperator,
    pub fermionic: FermionOperator,
}

impl PoolOperator {
    /// Builds the generator for `occupied -> virtuals` on `n_so` qubits.
    pub fn excitation(
        occupied: &[usize],
        virtuals: &[usize],
        n_so: usize,
    ) -> Result<Self, OperatorError> {
        let ops: Vec<LadderOp> = virtuals
            .iter()
            .map(|&a| LadderOp::create(a))
            .chain(occupied.iter().rev().map(|&i| LadderOp::annihilate(i)))
            .collect();
        let excite = FermionTerm::new(1.0, ops);
        let deexcite = FermionTerm { coefficient: Complex64::new(-1.0, 0.0), ..excite.adjoint() };
        let fermionic = FermionOperator::new(vec![excite, deexcite]);
        let generator = jordan_wigner_sum(&fermionic, n_so)?;
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        Ok(Self {
            label: format!("{} -> {}", join(occupied), join(virtuals)),
            kind: if occupied.len() == 1 { ExcitationKind::Single } else { ExcitationKind::Double },
            occupied: occupied.to_vec(),
            virtuals: virtuals.to_vec(),
            generator,
            fermionic,
        })
    }
}

/// Builds the pool: singles first, then doubles, each in lexicographic order
/// of `(occupied, virtual)` indices.
pub fn build_uccsd_pool(
    n_so: usize,
    n_electrons: usize,
    ms2: i32,
) -> Result<Vec<PoolOperator>, PoolError> {
    let occ = hf_occupation(n_so, n_electrons, ms2)?;
    let virt: Vec<usize> = (0..n_so).filter(|p| !occ.contains(p)).collect();
    let spin = |p: usize| p % 2;
    let mut pool = Vec::new();
    for &i in &occ {
        for &a in &virt {
            if spin(i) == spin(a) {
                pool.push(PoolOperator::excitation(&[i], &[a], n_so)?);
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in virt.iter().enumerate() {
                for &b in &virt[y + 1..] {
                    let alpha_out = (spin(i) == 0) as u8 + (spin(j) == 0) as u8;
                    let alpha_in = (spin(a) == 0) as u8 + (spin(b) == 0) as u8;
                    if alpha_out == alpha_in {
                        pool.push(PoolOperator::excitation(&[i, j], &[a, b], n_so)?);
                    }
                }
            }
        }
    }
    Ok(pool)
}

/// Checks `tau^3 == -tau` on the dense matrix of the generator (to 1e-10).
///
/// Registers above the dense limit fall back to checking the identity on a
/// fixed pseudo-random vector through the operator algebra.
pub fn generator_cubes_to_minus_self(p: &PoolOperator) -> bool {
    let g = &p.generator;
    if g.is_empty() {
        return true;
    }
    if g.n_qubits() <= MAX_DENSE_QUBITS {
        let Ok(m) = dense_matrix(g) else { return false };
        let cube = &m * &m * &m;
        return (cube + &m).iter().all(|c| c.norm() < 1e-10);
    }
    let cube = &(g * g) * g;
    cube.try_add(g).map(|r| r.is_empty()).unwrap_or(false)
}

/// One line per generator: `index label n_terms`.
pub fn pool_manifest(pool: &[PoolOperator]) -> String {
    pool.iter()
        .enumerate()
        .map(|(k, p)| format!("{k}\t{}\t{}\n", p.label, p.generator.len()))
        .collect()
}
