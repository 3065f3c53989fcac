//! ADAPT-VQE on a dense statevector simulator, with tools for probing the
//! optimization landscape of the grown ansatz.
//!
//! The pipeline runs FCIDUMP integrals ([`hamio`]) through a Jordan-Wigner
//! mapping ([`fermion`]) to a qubit Hamiltonian, builds a UCCSD pool
//! ([`pool`]), grows an ansatz ([`adapt`]) on the simulator ([`statesim`])
//! with BFGS ([`optimizer`]), and then restarts, clusters and samples around
//! the result ([`landscape`]). [`oracle`] holds exact diagonalization used as
//! ground truth.

pub mod adapt;
pub mod fermion;
pub mod hamio;
pub mod landscape;
pub mod optimizer;
pub mod oracle;
pub mod pool;
pub mod problem;
pub mod seeds;
pub mod statesim;
