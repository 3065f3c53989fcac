//! Dense statevector simulation of pool-generator ansatze.
//!
//! Generators satisfy `tau^3 = -tau`, so `exp(theta tau) = 1 + sin(theta) tau
//! + (1 - cos(theta)) tau^2` exactly.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fermion::{CompiledOperator, PauliOperator};
use crate::hamio::{hf_occupation, HamiltonianError};
use crate::pool::PoolOperator;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("dimension mismatch: operator on {expected} qubits, state on {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ansatz references pool index {index} but the pool has {pool_len} operators")]
    IndexOutOfRange { index: usize, pool_len: usize },
    #[error("ansatz has {ops} operators x {repetition} repetitions but {theta} parameters")]
    ThetaLength { ops: usize, repetition: usize, theta: usize },
    #[error("repetition must be at least 1")]
    ZeroRepetition,
    #[error(transparent)]
    Occupation(#[from] HamiltonianError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::default(); 1 << n_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amplitudes }
    }

    /// Panics if the length is not `2^n_qubits`.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        assert_eq!(amplitudes.len(), 1 << n_qubits, "amplitude count must be 2^n");
        Self { n_qubits, amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Hartree-Fock determinant: the `n_electrons` lowest spin orbitals
/// (interleaved alpha/beta) occupied.
pub fn hf_reference(n_qubits: usize, n_electrons: usize, ms2: i32) -> Result<StateVector, StateError> {
    let index: usize = hf_occupation(n_qubits, n_electrons, ms2)?.iter().map(|&q| 1 << q).sum();
    Ok(StateVector::basis(n_qubits, index))
}

/// Operator sequence plus parameters.
///
/// `op_indices` lists the core operators in the order they were added;
/// each is applied after the previous one, so the latest addition is the
/// leftmost factor of the unitary. With `repetition = N > 1` the core
/// sequence is applied as `N` collated blocks, block `b` using parameters
/// `theta[b * K .. (b + 1) * K]` for a core of length `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    pub op_indices: Vec<usize>,
    pub theta: Vec<f64>,
    pub repetition: usize,
}

impl Ansatz {
    pub fn empty(repetition: usize) -> Self {
        Self { op_indices: Vec::new(), theta: Vec::new(), repetition }
    }

    /// All parameters zero.
    pub fn zeros(op_indices: Vec<usize>, repetition: usize) -> Self {
        let theta = vec![0.0; op_indices.len() * repetition];
        Self { op_indices, theta, repetition }
    }

    pub fn n_params(&self) -> usize {
        self.op_indices.len() * self.repetition
    }

    pub fn validate(&self, pool_len: usize) -> Result<(), StateError> {
        validate_layout(&self.op_indices, self.repetition, self.theta.len(), pool_len)
    }

    /// Adds `op` to every block with a zero parameter, keeping the existing
    /// parameters in place.
    pub fn appended(&self, op: usize) -> Ansatz {
        let k = self.op_indices.len();
        let mut op_indices = self.op_indices.clone();
        op_indices.push(op);
        let mut theta = Vec::with_capacity((k + 1) * self.repetition);
        for b in 0..self.repetition {
            theta.extend_from_slice(&self.theta[b * k..(b + 1) * k]);
            theta.push(0.0);
        }
        Ansatz { op_indices, theta, repetition: self.repetition }
    }

    /// Position in `theta` of the parameter of core operator `j` in `block`.
    pub fn param_index(&self, block: usize, j: usize) -> usize {
        block * self.op_indices.len() + j
    }

    /// `(pool index, parameter index)` pairs in application order.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        steps(&self.op_indices, self.repetition)
    }
}

fn steps(ops: &[usize], repetition: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let k = ops.len();
    (0..repetition).flat_map(move |b| ops.iter().enumerate().map(move |(j, &op)| (op, b * k + j)))
}

fn validate_layout(
    ops: &[usize],
    repetition: usize,
    n_theta: usize,
    pool_len: usize,
) -> Result<(), StateError> {
    if repetition == 0 {
        return Err(StateError::ZeroRepetition);
    }
    if let Some(&index) = ops.iter().find(|&&i| i >= pool_len) {
        return Err(StateError::IndexOutOfRange { index, pool_len });
    }
    if n_theta != ops.len() * repetition {
        return Err(StateError::ThetaLength { ops: ops.len(), repetition, theta: n_theta });
    }
    Ok(())
}

/// A compiled generator and the basis states it touches.
#[derive(Debug, Clone)]
struct Kernel {
    op: CompiledOperator,
    rows: Vec<u32>,
}

impl Kernel {
    fn new(op: &PauliOperator) -> Self {
        let op = CompiledOperator::new(op);
        let rows = op.targets();
        Self { op, rows }
    }
}

/// Zero-filled scratch buffers; every routine restores them to zero.
struct Scratch {
    t1: Vec<Complex64>,
    t2: Vec<Complex64>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Self { t1: vec![Complex64::default(); dim], t2: vec![Complex64::default(); dim] }
    }
}

fn exp_in_place(kernel: &Kernel, theta: f64, state: &mut [Complex64], scratch: &mut Scratch) {
    if theta == 0.0 {
        return;
    }
    let (sin, cos) = theta.sin_cos();
    let omc = 1.0 - cos;
    kernel.op.accumulate(state, &mut scratch.t1);
    kernel.op.accumulate(&scratch.t1, &mut scratch.t2);
    for &r in &kernel.rows {
        let r = r as usize;
        state[r] += sin * scratch.t1[r] + omc * scratch.t2[r];
        scratch.t1[r] = Complex64::default();
        scratch.t2[r] = Complex64::default();
    }
}

/// Hamiltonian, pool generators and reference state compiled for repeated
/// energy and gradient evaluation.
#[derive(Debug, Clone)]
pub struct Simulator {
    n_qubits: usize,
    hamiltonian: CompiledOperator,
    generators: Vec<Kernel>,
    reference: StateVector,
}

impl Simulator {
    pub fn new(
        hamiltonian: &PauliOperator,
        pool: &[PoolOperator],
        reference: StateVector,
    ) -> Result<Self, StateError> {
        let n = hamiltonian.n_qubits();
        check_dim(n, reference.n_qubits)?;
        for p in pool {
            check_dim(n, p.generator.n_qubits())?;
        }
        Ok(Self {
            n_qubits: n,
            hamiltonian: CompiledOperator::new(hamiltonian),
            generators: pool.iter().map(|p| Kernel::new(&p.generator)).collect(),
            reference,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn pool_len(&self) -> usize {
        self.generators.len()
    }

    pub fn reference(&self) -> &StateVector {
        &self.reference
    }

    fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// `exp(theta * A_op) s`.
    pub fn apply_exp(&self, op: usize, theta: f64, s: &mut StateVector) -> Result<(), StateError> {
        let kernel = self.generators.get(op).ok_or(StateError::IndexOutOfRange {
            index: op,
            pool_len: self.generators.len(),
        })?;
        check_dim(self.n_qubits, s.n_qubits)?;
        exp_in_place(kernel, theta, &mut s.amplitudes, &mut Scratch::new(self.dim()));
        Ok(())
    }

    pub fn prepare(&self, a: &Ansatz) -> Result<StateVector, StateError> {
        self.prepare_from(&a.op_indices, a.repetition, &a.theta)
    }

    pub fn prepare_from(
        &self,
        ops: &[usize],
        repetition: usize,
        theta: &[f64],
    ) -> Result<StateVector, StateError> {
        validate_layout(ops, repetition, theta.len(), self.generators.len())?;
        let mut state = self.reference.clone();
        let mut scratch = Scratch::new(self.dim());
        for (op, p) in steps(ops, repetition) {
            exp_in_place(&self.generators[op], theta[p], &mut state.amplitudes, &mut scratch);
        }
        Ok(state)
    }

    pub fn apply_hamiltonian(&self, s: &StateVector) -> StateVector {
        let mut out = vec![Complex64::default(); self.dim()];
        self.hamiltonian.apply(&s.amplitudes, &mut out);
        StateVector { n_qubits: self.n_qubits, amplitudes: out }
    }

    /// `Re <s|H|s>`.
    pub fn expectation(&self, s: &StateVector) -> f64 {
        let e = self.hamiltonian.matrix_element(&s.amplitudes, &s.amplitudes);
        debug_assert!(e.im.abs() < 1e-10, "imaginary energy residual {}", e.im);
        e.re
    }

    pub fn energy(&self, a: &Ansatz) -> Result<f64, StateError> {
        Ok(self.expectation(&self.prepare(a)?))
    }

    /// `g_i = <s|[H, A_i]|s> = 2 Re <Hs|A_i s>` for every pool member.
    pub fn pool_gradients(&self, s: &StateVector) -> Vec<f64> {
        let hs = self.apply_hamiltonian(s);
        self.generators
            .par_iter()
            .map(|k| 2.0 * k.op.matrix_element(&hs.amplitudes, &s.amplitudes).re)
            .collect()
    }

    pub fn energy_and_gradient(&self, a: &Ansatz) -> Result<(f64, Vec<f64>), StateError> {
        self.energy_and_gradient_from(&a.op_indices, a.repetition, &a.theta)
    }

    /// Energy and exact parameter gradient via one forward and one adjoint
    /// sweep.
    pub fn energy_and_gradient_from(
        &self,
        ops: &[usize],
        repetition: usize,
        theta: &[f64],
    ) -> Result<(f64, Vec<f64>), StateError> {
        let mut phi = self.prepare_from(ops, repetition, theta)?;
        let mut lambda = self.apply_hamiltonian(&phi);
        let e = phi.inner(&lambda).re;
        let mut grad = vec![0.0; theta.len()];
        let mut scratch = Scratch::new(self.dim());
        let all: Vec<(usize, usize)> = steps(ops, repetition).collect();
        for &(op, p) in all.iter().rev() {
            let k = &self.generators[op];
            grad[p] = 2.0 * k.op.matrix_element(&lambda.amplitudes, &phi.amplitudes).re;
            exp_in_place(k, -theta[p], &mut phi.amplitudes, &mut scratch);
            exp_in_place(k, -theta[p], &mut lambda.amplitudes, &mut scratch);
        }
        Ok((e, grad))
    }
}

fn check_dim(expected: usize, found: usize) -> Result<(), StateError> {
    if expected != found {
        return Err(StateError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `op * s`, term by term.
pub fn apply_pauli_sum(op: &PauliOperator, s: &StateVector) -> Result<StateVector, StateError> {
    check_dim(op.n_qubits(), s.n_qubits)?;
    let mut out = vec![Complex64::default(); s.amplitudes.len()];
    CompiledOperator::new(op).apply(&s.amplitudes, &mut out);
    Ok(StateVector { n_qubits: s.n_qubits, amplitudes: out })
}

/// `exp(theta * tau) s` in closed form.
pub fn apply_generator_exp(
    p: &PoolOperator,
    theta: f64,
    s: &StateVector,
) -> Result<StateVector, StateError> {
    check_dim(p.generator.n_qubits(), s.n_qubits)?;
    let mut out = s.clone();
    let mut scratch = Scratch::new(out.amplitudes.len());
    exp_in_place(&Kernel::new(&p.generator), theta, &mut out.amplitudes, &mut scratch);
    Ok(out)
}

pub fn prepare_state(
    a: &Ansatz,
    pool: &[PoolOperator],
    reference: &StateVector,
) -> Result<StateVector, StateError> {
    a.validate(pool.len())?;
    let mut state = reference.clone();
    let kernels: Vec<Option<Kernel>> = (0..pool.len())
        .map(|i| a.op_indices.contains(&i).then(|| Kernel::new(&pool[i].generator)))
        .collect();
    let mut scratch = Scratch::new(state.amplitudes.len());
    for (op, p) in a.steps() {
        let kernel = kernels[op].as_ref().expect("kernel built for every used index");
        check_dim(pool[op].generator.n_qubits(), state.n_qubits)?;
        exp_in_place(kernel, a.theta[p], &mut state.amplitudes, &mut scratch);
    }
    Ok(state)
}

/// `Re <s|H|s>`.
pub fn energy(h: &PauliOperator, s: &StateVector) -> Result<f64, StateError> {
    check_dim(h.n_qubits(), s.n_qubits)?;
    let e = CompiledOperator::new(h).matrix_element(&s.amplitudes, &s.amplitudes);
    debug_assert!(e.im.abs() < 1e-10, "imaginary energy residual {}", e.im);
    Ok(e.re)
}

pub fn pool_gradients(
    h: &PauliOperator,
    s: &StateVector,
    pool: &[PoolOperator],
) -> Result<Vec<f64>, StateError> {
    Simulator::new(h, pool, s.clone()).map(|sim| sim.pool_gradients(s))
}

pub fn ansatz_gradient(
    h: &PauliOperator,
    a: &Ansatz,
    pool: &[PoolOperator],
    reference: &StateVector,
) -> Result<Vec<f64>, StateError> {
    let sim = Simulator::new(h, pool, reference.clone())?;
    sim.energy_and_gradient(a).map(|(_, g)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::Pauli;
    use crate::pool::build_uccsd_pool;
    use std::f64::consts::PI;

    #[test]
    fn hf_basis_state() {
        let s = hf_reference(4, 2, 0).unwrap();
        assert_eq!(s.amplitudes()[0b0011], Complex64::new(1.0, 0.0));
        assert_eq!(hf_reference(4, 0, 0).unwrap(), StateVector::zero_state(4));
        assert!(hf_reference(4, 3, 0).is_err());
    }

    #[test]
    fn pauli_sum_basics() {
        let s = StateVector::zero_state(3);
        let id = PauliOperator::identity(3, 1.0);
        assert_eq!(apply_pauli_sum(&id, &s).unwrap(), s);
        let x0 = PauliOperator::single(3, 0, Pauli::X, 1.0);
        assert_eq!(apply_pauli_sum(&x0, &s).unwrap(), StateVector::basis(3, 1));
        assert_eq!(
            apply_pauli_sum(&x0, &StateVector::zero_state(2)),
            Err(StateError::DimensionMismatch { expected: 3, found: 2 })
        );
        assert!((energy(&id, &StateVector::basis(3, 5)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn generator_exp_identity_and_period() {
        let pool = build_uccsd_pool(4, 2, 0).unwrap();
        let s = hf_reference(4, 2, 0).unwrap();
        for p in &pool {
            assert_eq!(apply_generator_exp(p, 0.0, &s).unwrap(), s);
            let full = apply_generator_exp(p, 2.0 * PI, &s).unwrap();
            assert!(full.max_abs_diff(&s) < 1e-10);
        }
    }

    #[test]
    fn appended_layout_collates_blocks() {
        let a = Ansatz { op_indices: vec![3, 1], theta: vec![0.1, 0.2, 0.3, 0.4], repetition: 2 };
        let b = a.appended(7);
        assert_eq!(b.op_indices, vec![3, 1, 7]);
        assert_eq!(b.theta, vec![0.1, 0.2, 0.0, 0.3, 0.4, 0.0]);
        let steps: Vec<_> = b.steps().collect();
        assert_eq!(steps, vec![(3, 0), (1, 1), (7, 2), (3, 3), (1, 4), (7, 5)]);
        let first = Ansatz::empty(3).appended(5);
        assert_eq!(first.theta, vec![0.0; 3]);
        assert_eq!(first.op_indices, vec![5]);
    }

    #[test]
    fn layout_validation() {
        let a = Ansatz { op_indices: vec![0, 4], theta: vec![0.0, 0.0], repetition: 1 };
        assert_eq!(a.validate(3), Err(StateError::IndexOutOfRange { index: 4, pool_len: 3 }));
        let b = Ansatz { op_indices: vec![0], theta: vec![0.0], repetition: 2 };
        assert_eq!(b.validate(3), Err(StateError::ThetaLength { ops: 1, repetition: 2, theta: 1 }));
        assert_eq!(Ansatz::zeros(vec![0], 0).validate(3), Err(StateError::ZeroRepetition));
    }

    #[test]
    fn empty_and_zero_ansatz_give_reference() {
        let pool = build_uccsd_pool(4, 2, 0).unwrap();
        let r = hf_reference(4, 2, 0).unwrap();
        assert_eq!(prepare_state(&Ansatz::empty(1), &pool, &r).unwrap(), r);
        assert_eq!(prepare_state(&Ansatz::zeros(vec![2, 0, 1], 2), &pool, &r).unwrap(), r);
        let one = Ansatz { op_indices: vec![2], theta: vec![PI / 7.0], repetition: 1 };
        assert_eq!(
            prepare_state(&one, &pool, &r).unwrap(),
            apply_generator_exp(&pool[2], PI / 7.0, &r).unwrap()
        );
    }
}
