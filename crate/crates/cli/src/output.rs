//! CSV and JSON emission. Floats carry 15 significant digits so that reruns
//! can be compared byte for byte.

use std::path::{Path, PathBuf};

use adaptvqe::adapt::AdaptTrace;
use adaptvqe::landscape::{cluster_traps, RestartRecord, VarianceScan};
use adaptvqe::oracle::FciSpectrum;
use adaptvqe::pool::PoolOperator;
use serde::Serialize;

use crate::RunError;

pub fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

struct Table {
    path: PathBuf,
    writer: csv::Writer<std::fs::File>,
}

impl Table {
    fn create(path: &Path, header: &[&str]) -> Result<Self, RunError> {
        let file = std::fs::File::create(path).map_err(io_err(path))?;
        let mut t = Table { path: path.to_path_buf(), writer: csv::Writer::from_writer(file) };
        t.row(header.iter().map(|s| s.to_string()))?;
        Ok(t)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<(), RunError> {
        let fields: Vec<String> = fields.into_iter().collect();
        self.writer.write_record(&fields).map_err(|source| RunError::Csv { path: self.path.clone(), source })
    }

    fn finish(mut self) -> Result<(), RunError> {
        self.writer.flush().map_err(io_err(&self.path))
    }
}

pub fn write_trace(path: &Path, trace: &AdaptTrace, pool: &[PoolOperator]) -> Result<(), RunError> {
    let mut t = Table::create(
        path,
        &["iteration", "chosen_op", "op_label", "max_pool_grad", "grad_l2", "energy", "fci_error"],
    )?;
    for (k, it) in trace.iterations.iter().enumerate() {
        t.row([
            (k + 1).to_string(),
            it.chosen_op.to_string(),
            pool[it.chosen_op].label.clone(),
            num(it.max_pool_gradient),
            num(it.pool_gradient_l2),
            num(it.energy),
            it.fci_error.map(num).unwrap_or_default(),
        ])?;
    }
    t.finish()
}

pub fn write_landscape(path: &Path, scans: &[Vec<RestartRecord>]) -> Result<(), RunError> {
    let mut t = Table::create(path, &["ansatz_length", "init_kind", "seed", "energy_opt", "fci_error", "converged"])?;
    for r in scans.iter().flatten() {
        t.row([
            r.length.to_string(),
            r.init_kind.to_string(),
            r.seed.to_string(),
            num(r.energy_opt),
            num(r.fci_error),
            r.converged.to_string(),
        ])?;
    }
    t.finish()
}

pub fn write_clusters(path: &Path, scans: &[Vec<RestartRecord>], tol: f64) -> Result<(), RunError> {
    let mut t = Table::create(path, &["ansatz_length", "cluster", "energy", "count", "spread"])?;
    for recs in scans {
        let Some(first) = recs.first() else { continue };
        for (k, c) in cluster_traps(recs, tol).iter().enumerate() {
            t.row([first.length.to_string(), k.to_string(), num(c.energy), c.count.to_string(), num(c.spread)])?;
        }
    }
    t.finish()
}

pub fn write_variance(path: &Path, scan: &VarianceScan) -> Result<(), RunError> {
    let mut t = Table::create(path, &["width", "variance", "n_samples"])?;
    for (w, v) in scan.widths.iter().zip(&scan.variances) {
        t.row([num(*w), num(*v), scan.samples_per_width.to_string()])?;
    }
    t.finish()
}

pub fn write_spectrum(path: &Path, spectrum: &FciSpectrum, k: usize) -> Result<(), RunError> {
    let mut t = Table::create(path, &["index", "energy", "below_hf"])?;
    for (i, e) in spectrum.eigenvalues.iter().take(k).enumerate() {
        let below = i > 0 && *e < spectrum.hf_energy;
        t.row([i.to_string(), num(*e), below.to_string()])?;
    }
    t.finish()
}

/// Per-iteration gradient and energy next to the excited FCI energies below
/// Hartree-Fock (one constant column each), with trough membership.
pub fn write_overlay(
    path: &Path,
    trace: &AdaptTrace,
    spectrum: &FciSpectrum,
    troughs: &[(usize, usize)],
) -> Result<(), RunError> {
    let excited = &spectrum.excited_below_hf;
    let mut header: Vec<String> =
        ["iteration", "max_pool_grad", "energy", "in_trough", "fci_ground"].map(String::from).to_vec();
    header.extend((1..=excited.len()).map(|k| format!("fci_excited_{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::create(path, &header_refs)?;
    for (k, it) in trace.iterations.iter().enumerate() {
        let in_trough = troughs.iter().any(|&(a, b)| (a..=b).contains(&k));
        let mut row =
            vec![(k + 1).to_string(), num(it.max_pool_gradient), num(it.energy), in_trough.to_string()];
        row.push(num(spectrum.ground_energy));
        row.extend(excited.iter().map(|e| num(*e)));
        t.row(row)?;
    }
    t.finish()
}

/// Writes through a temporary file so a crash never leaves a torn file.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let tmp = path.with_extension("json.tmp");
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&tmp, text).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}
