//! Exact references: dense operator matrices, sector-restricted FCI spectra
//! and the non-interacting dimer used for size-intensivity checks.
//!
//! Nothing here goes through the statevector engine, so these results can
//! be used to check it.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::fermion::{Pauli, PauliOperator};
use crate::hamio::{electron_split, hf_occupation, HamiltonianError, MolecularHamiltonian};

/// Size guard for [`dense_matrix`].
pub const MAX_DENSE_QUBITS: usize = 12;
/// Size guard for [`fci_spectrum`].
pub const MAX_FCI_QUBITS: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{n_qubits} qubits exceeds the dense limit of {limit}")]
    TooLarge { n_qubits: usize, limit: usize },
    #[error("symmetry sector ({n_alpha} alpha, {n_beta} beta) is empty on {n_qubits} qubits")]
    EmptySector { n_alpha: usize, n_beta: usize, n_qubits: usize },
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

fn pauli_matrix(p: Pauli) -> [[Complex64; 2]; 2] {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match p {
        Pauli::I => [[l, o], [o, l]],
        Pauli::X => [[o, l], [l, o]],
        Pauli::Y => [[o, -i], [i, o]],
        Pauli::Z => [[l, o], [o, -l]],
    }
}

/// Explicit `2^n x 2^n` matrix of a Pauli sum.
///
/// Each string contributes the Kronecker product of its single-qubit
/// matrices; element `(r, c)` is the product over qubits of
/// `sigma_q[r_q][c_q]`, with qubit 0 as the least significant index bit.
pub fn dense_matrix(op: &PauliOperator) -> Result<DMatrix<Complex64>, OracleError> {
    let n = op.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(OracleError::TooLarge { n_qubits: n, limit: MAX_DENSE_QUBITS });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (s, coeff) in op.terms() {
        let factors: Vec<[[Complex64; 2]; 2]> = (0..n).map(|q| pauli_matrix(s.get(q))).collect();
        for col in 0..dim {
            let row = col ^ s.x as usize;
            let mut v = *coeff;
            for (q, f) in factors.iter().enumerate() {
                v *= f[(row >> q) & 1][(col >> q) & 1];
            }
            m[(row, col)] += v;
        }
    }
    Ok(m)
}

/// Lowest eigenvalue of the full dense matrix (no symmetry restriction).
pub fn dense_ground_energy(op: &PauliOperator) -> Result<f64, OracleError> {
    let m = dense_matrix(op)?;
    let eig = SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Low-lying spectrum within one `(N_alpha, N_beta)` sector.
#[derive(Debug, Clone)]
pub struct FciSpectrum {
    /// Ascending, truncated to the requested count.
    pub eigenvalues: Vec<f64>,
    pub ground_energy: f64,
    /// Energy of the Hartree-Fock determinant.
    pub hf_energy: f64,
    /// Excited eigenvalues (index >= 1) below `hf_energy`.
    pub excited_below_hf: Vec<f64>,
    /// Sector basis states (computational basis indices).
    pub basis: Vec<u64>,
    /// Eigenvectors over `basis`, one per eigenvalue.
    pub vectors: Vec<Vec<Complex64>>,
}

impl FciSpectrum {
    /// `|<v_k|psi>|^2` for each stored eigenvector, given full-register
    /// amplitudes.
    pub fn overlaps(&self, amplitudes: &[Complex64]) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|v| {
                self.basis
                    .iter()
                    .zip(v)
                    .map(|(&b, c)| c.conj() * amplitudes[b as usize])
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .collect()
    }
}

/// Basis states with `n_alpha` electrons on even qubits and `n_beta` on odd.
pub fn sector_basis(n_qubits: usize, n_alpha: usize, n_beta: usize) -> Vec<u64> {
    let even: u64 = (0..n_qubits).step_by(2).map(|q| 1u64 << q).sum();
    let odd: u64 = (1..n_qubits).step_by(2).map(|q| 1u64 << q).sum();
    (0..1u64 << n_qubits)
        .filter(|b| {
            (b & even).count_ones() as usize == n_alpha && (b & odd).count_ones() as usize == n_beta
        })
        .collect()
}

/// Lowest `k` eigenpairs of `h` restricted to the sector of the
/// Hartree-Fock determinant for `n_electrons` and `ms2`.
pub fn fci_spectrum(
    h: &PauliOperator,
    n_electrons: usize,
    ms2: i32,
    k: usize,
) -> Result<FciSpectrum, OracleError> {
    let n = h.n_qubits();
    if n > MAX_FCI_QUBITS {
        return Err(OracleError::TooLarge { n_qubits: n, limit: MAX_FCI_QUBITS });
    }
    let (n_alpha, n_beta) = electron_split(n_electrons, ms2)?;
    let basis = sector_basis(n, n_alpha, n_beta);
    if basis.is_empty() {
        return Err(OracleError::EmptySector { n_alpha, n_beta, n_qubits: n });
    }
    let hf_index: u64 = hf_occupation(n, n_electrons, ms2)?.iter().map(|&q| 1u64 << q).sum();

    let dim = basis.len();
    let position = |b: u64| basis.binary_search(&b).ok();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (col, &b) in basis.iter().enumerate() {
        for (s, coeff) in h.terms() {
            let (phase, target) = s.apply_to_basis(b);
            if let Some(row) = position(target) {
                m[(row, col)] += coeff * phase;
            }
        }
    }
    let hf_pos = position(hf_index).expect("HF determinant lies in its own sector");
    let hf_energy = m[(hf_pos, hf_pos)].re;

    let (values, vectors) = hermitian_eigen(m);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order.truncate(k.max(1).min(dim));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let vectors = order.iter().map(|&i| vectors.column(i).iter().copied().collect()).collect();
    let excited_below_hf = eigenvalues.iter().skip(1).copied().filter(|&e| e < hf_energy).collect();
    Ok(FciSpectrum {
        ground_energy: eigenvalues[0],
        eigenvalues,
        hf_energy,
        excited_below_hf,
        basis,
        vectors,
    })
}

/// Diagonalizes a Hermitian matrix, using the real solver when the matrix
/// has no imaginary part.
fn hermitian_eigen(m: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    if m.iter().all(|c| c.im.abs() < 1e-14) {
        let real = m.map(|c| c.re);
        let eig = SymmetricEigen::new(real);
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|v| Complex64::new(v, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::new(m);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }
}

/// Spatial-orbital placement of the two monomer copies inside the dimer.
///
/// Occupied orbitals of both copies come first (A then B), followed by the
/// virtual orbitals (A then B), so the dimer Hartree-Fock determinant is the
/// product of the monomer ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DimerLayout {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl DimerLayout {
    pub fn new(monomer: &MolecularHamiltonian) -> Self {
        let n = monomer.n_spatial;
        let n_occ = monomer.n_electrons.div_ceil(2).min(n);
        let n_virt = n - n_occ;
        let place = |p: usize, copy: usize| {
            if p < n_occ {
                copy * n_occ + p
            } else {
                2 * n_occ + copy * n_virt + (p - n_occ)
            }
        };
        Self {
            a: (0..n).map(|p| place(p, 0)).collect(),
            b: (0..n).map(|p| place(p, 1)).collect(),
        }
    }

    /// Dimer spin orbital of monomer spin orbital `so` in copy `copy` (0 = A).
    pub fn spin_orbital(&self, so: usize, copy: usize) -> usize {
        let map = if copy == 0 { &self.a } else { &self.b };
        2 * map[so / 2] + so % 2
    }
}

/// Two copies of `monomer` at infinite separation: block-diagonal integrals
/// with every cross-system integral exactly zero.
pub fn dimer_hamiltonian(monomer: &MolecularHamiltonian) -> MolecularHamiltonian {
    let n = monomer.n_spatial;
    let layout = DimerLayout::new(monomer);
    let mut dimer = MolecularHamiltonian::zeros(2 * n, 2 * monomer.n_electrons, 2 * monomer.ms2);
    dimer.e_nuc = 2.0 * monomer.e_nuc;
    for map in [&layout.a, &layout.b] {
        for p in 0..n {
            for q in 0..n {
                dimer.h[map[p] * 2 * n + map[q]] = monomer.h(p, q);
                for r in 0..n {
                    for s in 0..n {
                        let idx = ((map[p] * 2 * n + map[q]) * 2 * n + map[r]) * 2 * n + map[s];
                        dimer.g[idx] = monomer.g(p, q, r, s);
                    }
                }
            }
        }
    }
    dimer
}
