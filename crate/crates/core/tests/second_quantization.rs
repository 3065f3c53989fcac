mod common;

use adaptvqe::fermion::{jordan_wigner, FermionTerm, LadderOp};
use adaptvqe::hamio::{hf_occupation, to_spin_orbitals};
use adaptvqe::oracle::{dense_ground_energy, dense_matrix, fci_spectrum};
use adaptvqe::pool::build_uccsd_pool;
use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn ladder(mode: usize, dagger: bool, n: usize) -> DMatrix<Complex64> {
    let op = if dagger { LadderOp::create(mode) } else { LadderOp::annihilate(mode) };
    dense_matrix(&jordan_wigner(&FermionTerm::new(1.0, vec![op]), n).unwrap()).unwrap()
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[test]
fn ladder_images_match_bitwise_action() {
    let n = 5;
    for p in 0..n {
        for dagger in [false, true] {
            let expected = ladder_matrix(&[(1.0, vec![(p, dagger)])], n);
            assert!(max_abs(&(ladder(p, dagger, n) - expected)) < 1e-15, "mode {p} dagger {dagger}");
        }
    }
}

#[test]
fn canonical_anticommutation() {
    let n = 4;
    let dim = 1 << n;
    let id = DMatrix::<Complex64>::identity(dim, dim);
    for p in 0..n {
        for q in 0..n {
            let (ap, aq) = (ladder(p, false, n), ladder(q, false, n));
            let aqd = ladder(q, true, n);
            let anti = &ap * &aqd + &aqd * &ap;
            let expected = if p == q { id.clone() } else { DMatrix::zeros(dim, dim) };
            assert!(max_abs(&(anti - expected)) < 1e-15);
            assert!(max_abs(&(&ap * &aq + &aq * &ap)) < 1e-15);
        }
    }
}

#[test]
fn qubit_hamiltonians_match_second_quantized_matrices() {
    for name in ["h2", "h4_1a", "h4_3a"] {
        let p = problem(name);
        assert!(p.hamiltonian.is_hermitian(1e-12), "{name}");
        let ours = dense_matrix(&p.hamiltonian).unwrap();
        let oracle = hamiltonian_matrix(&p.molecule);
        assert!(max_abs(&(ours - oracle)) < 1e-12, "{name}");
    }
}

#[test]
fn fixture_energies_match_manifest() {
    for entry in manifest().fixture {
        let p = problem(&entry.name);
        assert_eq!(p.molecule.n_spatial, entry.norb);
        assert_eq!(p.molecule.n_electrons, entry.nelec);
        assert!((p.molecule.e_nuc - entry.e_nuc).abs() < 1e-12);
        let so = to_spin_orbitals(&p.molecule);
        let occ = hf_occupation(so.n_so, entry.nelec, 0).unwrap();
        assert!((so.determinant_energy(&occ) - entry.rhf_energy).abs() < 1e-8, "{} hf", entry.name);
        let spec = fci_spectrum(&p.hamiltonian, entry.nelec, 0, 1).unwrap();
        assert!((spec.ground_energy - entry.fci_energy).abs() < 1e-8, "{} fci", entry.name);
        assert!((spec.hf_energy - entry.rhf_energy).abs() < 1e-8, "{} hf in sector", entry.name);
    }
}

#[test]
fn sector_ground_state_is_global_ground_state() {
    for name in ["h2", "h4_1a"] {
        let p = problem(name);
        let spec = fci_spectrum(&p.hamiltonian, p.molecule.n_electrons, 0, 1).unwrap();
        let dense = dense_ground_energy(&p.hamiltonian).unwrap();
        assert!((spec.ground_energy - dense).abs() < 1e-10, "{name}");
    }
}

#[test]
fn pool_generators_match_ladder_definition() {
    let n = 8;
    for op in build_uccsd_pool(n, 4, 0).unwrap() {
        let up: Vec<(usize, bool)> = op
            .virtuals
            .iter()
            .map(|&a| (a, true))
            .chain(op.occupied.iter().rev().map(|&i| (i, false)))
            .collect();
        let down: Vec<(usize, bool)> = up.iter().rev().map(|&(m, d)| (m, !d)).collect();
        let expected = ladder_matrix(&[(1.0, up), (-1.0, down)], n);
        let ours = dense_matrix(&op.generator).unwrap();
        assert!(max_abs(&(ours - expected)) < 1e-15, "{}", op.label);
    }
}

/// Counts spin-preserving single and double excitations by brute force over
/// all (occupied subset, virtual subset) pairs.
fn brute_force_count(n_so: usize, n_electrons: usize) -> (usize, usize) {
    let occ: Vec<usize> = (0..n_electrons).collect();
    let virt: Vec<usize> = (n_electrons..n_so).collect();
    let mut counts = (0, 0);
    for om in 1u32..1 << occ.len() {
        for vm in 1u32..1 << virt.len() {
            let k = om.count_ones();
            if k != vm.count_ones() || k > 2 {
                continue;
            }
            let spin = |set: &[usize], mask: u32| {
                set.iter().enumerate().filter(|(i, &s)| mask >> i & 1 == 1 && s % 2 == 0).count()
            };
            if spin(&occ, om) == spin(&virt, vm) {
                if k == 1 {
                    counts.0 += 1;
                } else {
                    counts.1 += 1;
                }
            }
        }
    }
    counts
}

#[test]
fn pool_sizes() {
    for (n_so, ne) in [(4, 2), (8, 4), (12, 6), (12, 4), (14, 6)] {
        let pool = build_uccsd_pool(n_so, ne, 0).unwrap();
        let singles = pool.iter().filter(|p| p.occupied.len() == 1).count();
        assert_eq!((singles, pool.len() - singles), brute_force_count(n_so, ne), "{n_so} {ne}");
    }
    assert_eq!(build_uccsd_pool(8, 4, 0).unwrap().len(), 26);
    assert_eq!(build_uccsd_pool(12, 6, 0).unwrap().len(), 117);
}
