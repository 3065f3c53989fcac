//! Landscape probes around an ADAPT-VQE trace: many-restart trap enumeration
//! for each ansatz prefix, and gradient variance over hypercubes centred on
//! an optimum.

use std::f64::consts::TAU;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapt::{optimize, AdaptTrace};
use crate::optimizer::{BfgsOptions, Termination};
use crate::seeds::{derive_seed, task_rng};
use crate::statesim::{Ansatz, Simulator, StateError};

pub const DEFAULT_TRAP_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum LandscapeError {
    #[error("ansatz length {length} outside 1..={available}")]
    Length { length: usize, available: usize },
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Random,
    Recycled,
    Zero,
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitKind::Random => "random",
            InitKind::Recycled => "recycled",
            InitKind::Zero => "zero",
        })
    }
}

/// One optimized initialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub length: usize,
    pub init_kind: InitKind,
    /// Derived RNG seed for random starts, 0 otherwise.
    pub seed: u64,
    pub theta_init: Vec<f64>,
    pub energy_init: f64,
    /// Equals `energy_init` when the optimizer aborted.
    pub energy_opt: f64,
    pub fci_error: f64,
    pub converged: bool,
    /// `None` when the optimizer aborted on a non-finite value.
    pub termination: Option<Termination>,
    pub n_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub n_random: usize,
    pub master_seed: u64,
    pub exact_energy: f64,
    pub optimizer: BfgsOptions,
}

struct Task {
    length: usize,
    kind: InitKind,
    seed: u64,
    restart: usize,
}

/// Restarts every prefix of the trace's operator sequence listed in
/// `lengths`. Per length the records hold `n_random` random starts in
/// restart order, then the recycled start, then the all-zero start.
pub fn scan_ansatz(
    sim: &Simulator,
    trace: &AdaptTrace,
    lengths: &[usize],
    opts: &ScanOptions,
) -> Result<Vec<Vec<RestartRecord>>, LandscapeError> {
    let available = trace.iterations.len();
    let mut tasks = Vec::new();
    for &length in lengths {
        if length == 0 || length > available {
            return Err(LandscapeError::Length { length, available });
        }
        for restart in 0..opts.n_random {
            let seed = derive_seed(opts.master_seed, length as u64, restart as u64);
            tasks.push(Task { length, kind: InitKind::Random, seed, restart });
        }
        tasks.push(Task { length, kind: InitKind::Recycled, seed: 0, restart: 0 });
        tasks.push(Task { length, kind: InitKind::Zero, seed: 0, restart: 0 });
    }
    let records: Vec<RestartRecord> = tasks
        .par_iter()
        .map(|t| run_restart(sim, trace, t, opts))
        .collect::<Result<_, _>>()?;
    let per_length = opts.n_random + 2;
    Ok(records.chunks(per_length).map(<[RestartRecord]>::to_vec).collect())
}

fn run_restart(
    sim: &Simulator,
    trace: &AdaptTrace,
    task: &Task,
    opts: &ScanOptions,
) -> Result<RestartRecord, LandscapeError> {
    let repetition = trace.ansatz.repetition;
    let ops = &trace.ansatz.op_indices[..task.length];
    let n_params = task.length * repetition;
    let theta_init = match task.kind {
        InitKind::Random => {
            let mut rng = task_rng(task.seed, 0, task.restart as u64);
            (0..n_params).map(|_| rng.random_range(0.0..TAU)).collect()
        }
        InitKind::Zero => vec![0.0; n_params],
        InitKind::Recycled => {
            let previous = trace.ansatz_at(task.length - 1).expect("length checked against trace");
            previous.appended(ops[task.length - 1]).theta
        }
    };
    Ansatz { op_indices: ops.to_vec(), theta: theta_init.clone(), repetition }.validate(sim.pool_len())?;
    let (energy_init, _) = sim.energy_and_gradient_from(ops, repetition, &theta_init)?;
    let (energy_opt, converged, termination, n_iterations) =
        match optimize(sim, ops, repetition, &theta_init, &opts.optimizer) {
            Ok(r) => (r.energy, r.converged, Some(r.termination), r.n_iterations),
            Err(_) => (energy_init, false, None, 0),
        };
    Ok(RestartRecord {
        length: task.length,
        init_kind: task.kind,
        seed: task.seed,
        theta_init,
        energy_init,
        energy_opt,
        fci_error: energy_opt - opts.exact_energy,
        converged,
        termination,
        n_iterations,
    })
}

/// A group of optimized energies treated as one minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapCluster {
    /// Lowest member energy.
    pub energy: f64,
    pub count: usize,
    /// Highest minus lowest member energy.
    pub spread: f64,
}

/// Clusters sorted energies: a new cluster opens whenever an energy lies more
/// than `tol` above the lowest member of the current one. This is the
/// minimum-count cover by windows of width `tol`, so spreads never exceed
/// `tol` and adding energies never lowers the count. Non-finite energies are
/// skipped.
pub fn cluster_energies(energies: &[f64], tol: f64) -> Vec<TrapCluster> {
    let mut sorted: Vec<f64> = energies.iter().copied().filter(|e| e.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut clusters: Vec<TrapCluster> = Vec::new();
    for e in sorted {
        match clusters.last_mut() {
            Some(c) if e - c.energy <= tol => {
                c.count += 1;
                c.spread = e - c.energy;
            }
            _ => clusters.push(TrapCluster { energy: e, count: 1, spread: 0.0 }),
        }
    }
    clusters
}

/// Clusters the converged records by optimized energy.
pub fn cluster_traps(records: &[RestartRecord], tol: f64) -> Vec<TrapCluster> {
    let energies: Vec<f64> = records.iter().filter(|r| r.converged).map(|r| r.energy_opt).collect();
    cluster_energies(&energies, tol)
}

/// Median of the optimized energies of random starts, if any.
pub fn median_random_energy(records: &[RestartRecord]) -> Option<f64> {
    let mut e: Vec<f64> =
        records.iter().filter(|r| r.init_kind == InitKind::Random).map(|r| r.energy_opt).collect();
    if e.is_empty() {
        return None;
    }
    e.sort_by(f64::total_cmp);
    let n = e.len();
    Some(if n % 2 == 1 { e[n / 2] } else { 0.5 * (e[n / 2 - 1] + e[n / 2]) })
}

pub fn record_of(records: &[RestartRecord], kind: InitKind) -> Option<&RestartRecord> {
    records.iter().find(|r| r.init_kind == kind)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceScan {
    pub widths: Vec<f64>,
    pub variances: Vec<f64>,
    pub samples_per_width: usize,
    pub center: Vec<f64>,
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

/// For each half-width `w`, samples parameter vectors uniformly from
/// `[theta* - w, theta* + w)` and reports the variance of all gradient
/// components pooled together.
pub fn variance_scan(
    sim: &Simulator,
    ansatz: &Ansatz,
    widths: &[f64],
    samples_per_width: usize,
    master_seed: u64,
) -> Result<VarianceScan, LandscapeError> {
    ansatz.validate(sim.pool_len())?;
    let center = ansatz.theta.clone();
    let variances = widths
        .iter()
        .enumerate()
        .map(|(wi, &w)| {
            let grads: Vec<Vec<f64>> = (0..samples_per_width)
                .into_par_iter()
                .map(|s| {
                    let mut rng = task_rng(master_seed, wi as u64, s as u64);
                    let theta: Vec<f64> = center
                        .iter()
                        .map(|&c| if w > 0.0 { rng.random_range(c - w..c + w) } else { c })
                        .collect();
                    sim.energy_and_gradient_from(&ansatz.op_indices, ansatz.repetition, &theta)
                        .map(|(_, g)| g)
                })
                .collect::<Result<_, _>>()?;
            Ok(sample_variance(&grads.concat()))
        })
        .collect::<Result<Vec<f64>, StateError>>()?;
    Ok(VarianceScan { widths: widths.to_vec(), variances, samples_per_width, center })
}
