//! A molecule prepared for simulation: qubit Hamiltonian, UCCSD pool and
//! Hartree-Fock reference built from one set of integrals.

use thiserror::Error;

use crate::fermion::{hamiltonian_to_qubits, PauliOperator};
use crate::hamio::{parse_fcidump, to_spin_orbitals, HamiltonianError, MolecularHamiltonian};
use crate::pool::{build_uccsd_pool, PoolError, PoolOperator};
use crate::statesim::{hf_reference, Simulator, StateError, StateVector};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub molecule: MolecularHamiltonian,
    pub hamiltonian: PauliOperator,
    pub pool: Vec<PoolOperator>,
    pub reference: StateVector,
}

impl Problem {
    pub fn new(molecule: MolecularHamiltonian) -> Result<Self, ProblemError> {
        let so = to_spin_orbitals(&molecule);
        let hamiltonian = hamiltonian_to_qubits(&so);
        let pool = build_uccsd_pool(so.n_so, molecule.n_electrons, molecule.ms2)?;
        let reference = hf_reference(so.n_so, molecule.n_electrons, molecule.ms2)?;
        Ok(Self { molecule, hamiltonian, pool, reference })
    }

    pub fn from_fcidump(text: &str) -> Result<Self, ProblemError> {
        Self::new(parse_fcidump(text)?)
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    pub fn simulator(&self) -> Simulator {
        Simulator::new(&self.hamiltonian, &self.pool, self.reference.clone())
            .expect("pool and reference share the Hamiltonian register")
    }
}
