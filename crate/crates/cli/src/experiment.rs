use std::path::{Path, PathBuf};

use adaptvqe::adapt::{
    detect_gradient_trough, run_fixed_sequence, shuffle_ansatz, AdaptConfig, AdaptDriver, AdaptTrace,
};
use adaptvqe::landscape::{scan_ansatz, variance_scan, RestartRecord, ScanOptions};
use adaptvqe::optimizer::BfgsOptions;
use adaptvqe::oracle::{fci_spectrum, FciSpectrum};
use adaptvqe::problem::Problem;
use adaptvqe::seeds::derive_seed;
use adaptvqe::statesim::Simulator;
use serde::Serialize;

use crate::config::{ExperimentConfig, Mode};
use crate::output;
use crate::RunError;

/// Stream tag separating reorder-scan seeds from the main scan.
const REORDER_STREAM: u64 = 0x5245_4f52;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    /// Files written, relative to `output_dir`.
    pub files: Vec<String>,
    pub hf_energy: f64,
    pub fci_energy: f64,
    pub final_energy: Option<f64>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    mode: &'static str,
    system: &'a str,
    master_seed: u64,
    fixture: String,
    n_qubits: usize,
    n_electrons: usize,
    pool_size: usize,
    hf_energy: f64,
    fci_energy: f64,
    files: &'a [String],
    config: &'a ExperimentConfig,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    repetition: usize,
    problem: Problem,
    sim: Simulator,
    spectrum: FciSpectrum,
    out: PathBuf,
    files: Vec<String>,
}

impl Context<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.out.join(name)
    }

    fn bfgs(&self) -> BfgsOptions {
        let mut o = BfgsOptions::default();
        if let Some(g) = self.cfg.gtol {
            o.gtol = g;
        }
        o.max_iter = self.cfg.max_iter.or(o.max_iter);
        o
    }

    fn adapt_config(&self, repetition: usize) -> AdaptConfig {
        AdaptConfig {
            eps: self.cfg.eps,
            max_ops: self.cfg.max_ops,
            criterion: self.cfg.criterion,
            repetition,
            recycle: self.cfg.recycle,
            optimizer: self.bfgs(),
            exact_energy: Some(self.spectrum.ground_energy),
        }
    }

    /// Runs (or resumes) ADAPT-VQE, persisting `trace.json` after every
    /// iteration, and writes the trace table.
    fn adapt(&mut self) -> Result<AdaptTrace, RunError> {
        let cfg = self.adapt_config(self.repetition);
        let json = self.path("trace.json");
        let driver = if self.cfg.resume && json.exists() {
            let text = std::fs::read_to_string(&json).map_err(|source| RunError::Io { path: json.clone(), source })?;
            let trace: AdaptTrace = serde_json::from_str(&text)?;
            AdaptDriver::resume(&self.sim, cfg, trace)?
        } else {
            AdaptDriver::new(&self.sim, cfg)?
        };
        let mut persist_err = None;
        let trace = driver.run(|t| {
            if persist_err.is_none() {
                persist_err = output::write_json(&json, t).err();
            }
        });
        let trace = match trace {
            Ok(t) => t,
            Err(adaptvqe::adapt::AdaptError::Optimizer { source, partial }) => {
                output::write_json(&json, &*partial)?;
                return Err(adaptvqe::adapt::AdaptError::Optimizer { source, partial }.into());
            }
            Err(e) => return Err(e.into()),
        };
        if let Some(e) = persist_err {
            return Err(e);
        }
        output::write_json(&json, &trace)?;
        let p = self.path("trace.csv");
        output::write_trace(&p, &trace, &self.problem.pool)?;
        Ok(trace)
    }

    fn lengths(&self, trace: &AdaptTrace) -> Result<Vec<usize>, RunError> {
        let available = trace.iterations.len();
        match &self.cfg.lengths {
            Some(l) => {
                if let Some(bad) = l.iter().find(|&&x| x == 0 || x > available) {
                    return Err(RunError::Config(format!(
                        "ansatz length {bad} outside 1..={available} for this trace"
                    )));
                }
                Ok(l.clone())
            }
            None => Ok((1..=available).collect()),
        }
    }

    fn scan(&mut self, dir: &str, trace: &AdaptTrace, master_seed: u64) -> Result<Vec<Vec<RestartRecord>>, RunError> {
        let opts = ScanOptions {
            n_random: self.cfg.n_random(),
            master_seed,
            exact_energy: self.spectrum.ground_energy,
            optimizer: self.bfgs(),
        };
        let lengths = self.lengths(trace)?;
        let scans = scan_ansatz(&self.sim, trace, &lengths, &opts)?;
        let p = self.path(&format!("{dir}landscape.csv"));
        output::write_landscape(&p, &scans)?;
        let p = self.path(&format!("{dir}clusters.csv"));
        output::write_clusters(&p, &scans, self.cfg.trap_tol)?;
        Ok(scans)
    }

    fn overlay(&mut self, trace: &AdaptTrace) -> Result<(), RunError> {
        let troughs = detect_gradient_trough(trace);
        let p = self.path("overlay.csv");
        output::write_overlay(&p, trace, &self.spectrum, &troughs)
    }
}

fn create_dir(path: &Path) -> Result<(), RunError> {
    std::fs::create_dir_all(path).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

/// Runs one experiment and writes its outputs under `cfg.output`.
pub fn run(cfg: &ExperimentConfig, mode: Mode) -> Result<RunSummary, RunError> {
    let repetition = cfg.validate(mode)?;
    let fixture = cfg.fixture_path();
    let text = std::fs::read_to_string(&fixture)
        .map_err(|e| RunError::Fixture(format!("cannot read {}: {e}", fixture.display())))?;
    let problem = Problem::from_fcidump(&text)?;
    let sim = problem.simulator();
    let k = match mode {
        Mode::Fci => cfg.spectrum_k,
        _ => cfg.overlay_k.max(1),
    };
    let spectrum = fci_spectrum(&problem.hamiltonian, problem.molecule.n_electrons, problem.molecule.ms2, k)?;
    create_dir(&cfg.output)?;
    let mut cx = Context { cfg, repetition, problem, sim, spectrum, out: cfg.output.clone(), files: Vec::new() };

    let mut final_energy = None;
    match mode {
        Mode::Fci => {
            let p = cx.path("spectrum.csv");
            output::write_spectrum(&p, &cx.spectrum, cfg.spectrum_k)?;
        }
        Mode::Adapt => {
            let trace = cx.adapt()?;
            cx.overlay(&trace)?;
            let p = cx.path("spectrum.csv");
            output::write_spectrum(&p, &cx.spectrum, cx.spectrum.eigenvalues.len())?;
            final_energy = Some(trace.energy());
        }
        Mode::Adaptn => {
            let trace = cx.adapt()?;
            if cfg.n_random.is_some() {
                cx.scan("", &trace, cfg.seed)?;
            }
            final_energy = Some(trace.energy());
        }
        Mode::Landscape => {
            let trace = cx.adapt()?;
            cx.scan("", &trace, cfg.seed)?;
            final_energy = Some(trace.energy());
        }
        Mode::Variance => {
            let trace = cx.adapt()?;
            let scan = variance_scan(&cx.sim, &trace.ansatz, &cfg.widths, cfg.samples_per_width, cfg.seed)?;
            let p = cx.path("variance.csv");
            output::write_variance(&p, &scan)?;
            final_energy = Some(trace.energy());
        }
        Mode::Reorder => {
            let trace = cx.adapt()?;
            final_energy = Some(trace.energy());
            for &seed in &cfg.reorder_seeds {
                let theta = vec![0.0; trace.ansatz.op_indices.len()];
                let order = shuffle_ansatz(&trace.ansatz, seed, theta)?;
                let seq_cfg = cx.adapt_config(1);
                let replay = run_fixed_sequence(&cx.sim, &order.op_indices, &seq_cfg)?;
                let dir = format!("reorder_seed{seed}/");
                create_dir(&cx.out.join(&dir))?;
                let p = cx.path(&format!("{dir}trace.csv"));
                output::write_trace(&p, &replay, &cx.problem.pool)?;
                if !replay.iterations.is_empty() {
                    cx.scan(&dir, &replay, derive_seed(cfg.seed, REORDER_STREAM, seed))?;
                }
            }
        }
    }

    let mut files = cx.files.clone();
    files.push("metadata.json".into());
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        mode: mode.name(),
        system: &cfg.system,
        master_seed: cfg.seed,
        fixture: fixture.display().to_string(),
        n_qubits: cx.problem.n_qubits(),
        n_electrons: cx.problem.molecule.n_electrons,
        pool_size: cx.problem.pool.len(),
        hf_energy: cx.spectrum.hf_energy,
        fci_energy: cx.spectrum.ground_energy,
        files: &files,
        config: cfg,
    };
    output::write_json(&cx.out.join("metadata.json"), &meta)?;
    Ok(RunSummary {
        output_dir: cx.out,
        files,
        hf_energy: cx.spectrum.hf_energy,
        fci_energy: cx.spectrum.ground_energy,
        final_energy,
    })
}
