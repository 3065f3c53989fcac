//! ADAPT-VQE driver.
//!
//! Each iteration screens the pool at the current state, appends the operator
//! with the largest gradient magnitude (to every block when the repetition
//! factor is above one) with zero-initialized parameters, and reoptimizes all
//! parameters with BFGS.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fermion::PauliOperator;
use crate::optimizer::{minimize, BfgsOptions, OptimizationResult, OptimizeError};
use crate::pool::PoolOperator;
use crate::statesim::{Ansatz, Simulator, StateError, StateVector};

/// Gradients within this of the maximum count as tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Largest pool-gradient magnitude.
    Max,
    /// Euclidean norm of the pool-gradient vector.
    L2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptConfig {
    pub eps: f64,
    pub max_ops: usize,
    pub criterion: Criterion,
    pub repetition: usize,
    /// Start each optimization from the previous optimum (new parameters at
    /// zero). When false every optimization starts from all zeros.
    pub recycle: bool,
    pub optimizer: BfgsOptions,
    /// Exact ground energy used to fill `fci_error`.
    pub exact_energy: Option<f64>,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_ops: 200,
            criterion: Criterion::Max,
            repetition: 1,
            recycle: true,
            optimizer: BfgsOptions::default(),
            exact_energy: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum AdaptError {
    #[error("operator pool is empty")]
    EmptyPool,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("optimizer aborted at iteration {}: {source}", .partial.iterations.len() + 1)]
    Optimizer {
        source: OptimizeError,
        /// Trace up to the last completed iteration.
        partial: Box<AdaptTrace>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxOps,
    /// A fixed operator sequence ran out of operators.
    SequenceExhausted,
}

/// Record of one operator addition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptIteration {
    pub chosen_op: usize,
    /// Signed pool gradient of the chosen operator before it was added.
    pub chosen_gradient: f64,
    /// Largest pool-gradient magnitude before the addition.
    pub max_pool_gradient: f64,
    pub pool_gradient_l2: f64,
    /// Optimized energy after the addition.
    pub energy: f64,
    pub fci_error: Option<f64>,
    /// Optimized parameters after the addition.
    pub theta: Vec<f64>,
    pub optimizer_iterations: usize,
    pub optimizer_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptTrace {
    pub hf_energy: f64,
    pub iterations: Vec<AdaptIteration>,
    pub ansatz: Ansatz,
    /// Pool-gradient statistics at the final state (set once stopped).
    pub final_max_gradient: Option<f64>,
    pub final_gradient_l2: Option<f64>,
    pub stop: Option<StopReason>,
}

impl AdaptTrace {
    pub fn new(hf_energy: f64, repetition: usize) -> Self {
        Self {
            hf_energy,
            iterations: Vec::new(),
            ansatz: Ansatz::empty(repetition),
            final_max_gradient: None,
            final_gradient_l2: None,
            stop: None,
        }
    }

    /// Energy of the current ansatz (the reference energy before any
    /// iteration).
    pub fn energy(&self) -> f64 {
        self.iterations.last().map_or(self.hf_energy, |it| it.energy)
    }

    /// The ansatz after `length` additions, with its optimized parameters.
    pub fn ansatz_at(&self, length: usize) -> Option<Ansatz> {
        if length > self.iterations.len() {
            return None;
        }
        let theta = match length {
            0 => Vec::new(),
            l => self.iterations[l - 1].theta.clone(),
        };
        Some(Ansatz {
            op_indices: self.ansatz.op_indices[..length].to_vec(),
            theta,
            repetition: self.ansatz.repetition,
        })
    }

    pub fn max_gradient_series(&self) -> Vec<f64> {
        self.iterations.iter().map(|it| it.max_pool_gradient).collect()
    }
}

/// Index of the largest `|g_i|`; near-ties go to the lowest index.
pub fn tie_break(g: &[f64]) -> Result<usize, AdaptError> {
    let max = g.iter().map(|v| v.abs()).fold(f64::NEG_INFINITY, f64::max);
    g.iter().position(|v| v.abs() >= max - TIE_TOL).ok_or(AdaptError::EmptyPool)
}

struct Screening {
    gradients: Vec<f64>,
    max: f64,
    l2: f64,
}

fn screen(sim: &Simulator, state: &StateVector) -> Screening {
    let gradients = sim.pool_gradients(state);
    let max = gradients.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let l2 = gradients.iter().map(|v| v * v).sum::<f64>().sqrt();
    Screening { gradients, max, l2 }
}

/// Stepwise ADAPT-VQE runner; a partial trace can be resumed.
pub struct AdaptDriver<'a> {
    sim: &'a Simulator,
    cfg: AdaptConfig,
    trace: AdaptTrace,
}

impl<'a> AdaptDriver<'a> {
    pub fn new(sim: &'a Simulator, cfg: AdaptConfig) -> Result<Self, AdaptError> {
        validate_config(&cfg)?;
        let hf_energy = sim.expectation(sim.reference());
        let trace = AdaptTrace::new(hf_energy, cfg.repetition);
        Ok(Self { sim, cfg, trace })
    }

    /// Continues from a trace written by an earlier (possibly interrupted) run.
    pub fn resume(sim: &'a Simulator, cfg: AdaptConfig, mut trace: AdaptTrace) -> Result<Self, AdaptError> {
        validate_config(&cfg)?;
        if trace.ansatz.repetition != cfg.repetition {
            return Err(AdaptError::InvalidConfig(format!(
                "trace has repetition {} but configuration asks for {}",
                trace.ansatz.repetition, cfg.repetition
            )));
        }
        trace.ansatz.validate(sim.pool_len())?;
        trace.stop = None;
        Ok(Self { sim, cfg, trace })
    }

    pub fn trace(&self) -> &AdaptTrace {
        &self.trace
    }

    pub fn into_trace(self) -> AdaptTrace {
        self.trace
    }

    /// Performs one iteration. Returns `false` once a stopping condition
    /// holds.
    pub fn step(&mut self) -> Result<bool, AdaptError> {
        if self.trace.stop.is_some() {
            return Ok(false);
        }
        let state = self.sim.prepare(&self.trace.ansatz)?;
        let s = screen(self.sim, &state);
        let criterion = match self.cfg.criterion {
            Criterion::Max => s.max,
            Criterion::L2 => s.l2,
        };
        let stop = if criterion < self.cfg.eps {
            Some(StopReason::Converged)
        } else if self.trace.ansatz.op_indices.len() >= self.cfg.max_ops {
            Some(StopReason::MaxOps)
        } else {
            None
        };
        if let Some(reason) = stop {
            self.trace.stop = Some(reason);
            self.trace.final_max_gradient = Some(s.max);
            self.trace.final_gradient_l2 = Some(s.l2);
            return Ok(false);
        }
        let op = tie_break(&s.gradients)?;
        extend(self.sim, &self.cfg, &mut self.trace, op, &s)?;
        Ok(true)
    }

    /// Runs to completion, calling `on_iteration` after every addition.
    pub fn run(mut self, mut on_iteration: impl FnMut(&AdaptTrace)) -> Result<AdaptTrace, AdaptError> {
        while self.step()? {
            on_iteration(&self.trace);
        }
        Ok(self.trace)
    }
}

fn validate_config(cfg: &AdaptConfig) -> Result<(), AdaptError> {
    if cfg.eps.is_nan() || cfg.eps <= 0.0 {
        return Err(AdaptError::InvalidConfig(format!("eps must be positive, got {}", cfg.eps)));
    }
    if cfg.repetition == 0 {
        return Err(AdaptError::InvalidConfig("repetition must be at least 1".into()));
    }
    Ok(())
}

/// Appends `op` and reoptimizes, recording the iteration.
fn extend(
    sim: &Simulator,
    cfg: &AdaptConfig,
    trace: &mut AdaptTrace,
    op: usize,
    s: &Screening,
) -> Result<(), AdaptError> {
    let grown = trace.ansatz.appended(op);
    grown.validate(sim.pool_len())?;
    let theta0 = if cfg.recycle { grown.theta.clone() } else { vec![0.0; grown.n_params()] };
    let result = optimize(sim, &grown.op_indices, grown.repetition, &theta0, &cfg.optimizer)
        .map_err(|source| AdaptError::Optimizer { source, partial: Box::new(trace.clone()) })?;
    trace.iterations.push(AdaptIteration {
        chosen_op: op,
        chosen_gradient: s.gradients[op],
        max_pool_gradient: s.max,
        pool_gradient_l2: s.l2,
        energy: result.energy,
        fci_error: cfg.exact_energy.map(|e| result.energy - e),
        theta: result.theta_opt.clone(),
        optimizer_iterations: result.n_iterations,
        optimizer_converged: result.converged,
    });
    trace.ansatz = Ansatz { theta: result.theta_opt, ..grown };
    Ok(())
}

/// BFGS on the energy of a fixed operator layout. The layout must already be
/// valid for `sim`.
pub fn optimize(
    sim: &Simulator,
    ops: &[usize],
    repetition: usize,
    theta0: &[f64],
    opts: &BfgsOptions,
) -> Result<OptimizationResult, OptimizeError> {
    minimize(
        |theta| {
            sim.energy_and_gradient_from(ops, repetition, theta)
                .expect("ansatz layout validated before optimization")
        },
        theta0,
        opts,
    )
}

/// ADAPT-VQE from the reference state with a freshly compiled simulator.
pub fn run_adapt(
    h: &PauliOperator,
    pool: &[PoolOperator],
    reference: &StateVector,
    cfg: &AdaptConfig,
) -> Result<AdaptTrace, AdaptError> {
    let sim = Simulator::new(h, pool, reference.clone())?;
    AdaptDriver::new(&sim, cfg.clone())?.run(|_| {})
}

/// Grows an ansatz along a prescribed operator order with the same
/// recycling and optimization as ADAPT-VQE, but without gradient selection.
/// `cfg.eps` and `cfg.criterion` are ignored; `cfg.max_ops` caps the length.
pub fn run_fixed_sequence(
    sim: &Simulator,
    ops: &[usize],
    cfg: &AdaptConfig,
) -> Result<AdaptTrace, AdaptError> {
    validate_config(cfg)?;
    let mut trace = AdaptTrace::new(sim.expectation(sim.reference()), cfg.repetition);
    for &op in ops.iter().take(cfg.max_ops) {
        let state = sim.prepare(&trace.ansatz)?;
        let s = screen(sim, &state);
        extend(sim, cfg, &mut trace, op, &s)?;
    }
    let s = screen(sim, &sim.prepare(&trace.ansatz)?);
    trace.final_max_gradient = Some(s.max);
    trace.final_gradient_l2 = Some(s.l2);
    trace.stop = Some(if ops.len() > cfg.max_ops { StopReason::MaxOps } else { StopReason::SequenceExhausted });
    Ok(trace)
}

/// Randomly permutes the operator order of a plain (`repetition = 1`) ansatz
/// and installs `theta` as its parameters. Seed 0 is the identity
/// permutation; other seeds drive a ChaCha8 shuffle.
pub fn shuffle_ansatz(a: &Ansatz, seed: u64, theta: Vec<f64>) -> Result<Ansatz, AdaptError> {
    if a.repetition != 1 {
        return Err(AdaptError::InvalidConfig("only repetition-1 ansatze can be shuffled".into()));
    }
    if theta.len() != a.op_indices.len() {
        return Err(StateError::ThetaLength { ops: a.op_indices.len(), repetition: 1, theta: theta.len() }
            .into());
    }
    let mut op_indices = a.op_indices.clone();
    if seed != 0 {
        op_indices.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    Ok(Ansatz { op_indices, theta, repetition: 1 })
}

/// Inclusive index spans where the max pool gradient sits below a value it
/// reaches again later in the run.
pub fn gradient_troughs(series: &[f64]) -> Vec<(usize, usize)> {
    let n = series.len();
    let mut later_max = vec![f64::NEG_INFINITY; n];
    for k in (0..n.saturating_sub(1)).rev() {
        later_max[k] = later_max[k + 1].max(series[k + 1]);
    }
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for k in 0..n {
        let dipped = series[k] < later_max[k];
        match (dipped, open) {
            (true, None) => open = Some(k),
            (false, Some(start)) => {
                spans.push((start, k - 1));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        spans.push((start, n - 1));
    }
    spans
}

/// Gradient troughs of a trace; fewer than three iterations give none.
pub fn detect_gradient_trough(trace: &AdaptTrace) -> Vec<(usize, usize)> {
    if trace.iterations.len() < 3 {
        return Vec::new();
    }
    gradient_troughs(&trace.max_gradient_series())
}
