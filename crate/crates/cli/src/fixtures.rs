use std::fmt;
use std::path::Path;

use adaptvqe::oracle::fci_spectrum;
use adaptvqe::problem::Problem;
use serde::Deserialize;

use crate::RunError;

pub const FIXTURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub fixture: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub file: String,
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i32,
    pub e_nuc: f64,
    pub rhf_energy: f64,
    pub fci_energy: f64,
}

pub fn load_manifest(dir: &Path) -> Result<Manifest, RunError> {
    let path = dir.join("manifest.toml");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| RunError::Fixture(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| RunError::Fixture(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureCheck {
    pub name: String,
    pub hf_energy: Option<f64>,
    pub fci_energy: Option<f64>,
    pub problems: Vec<String>,
}

impl FixtureCheck {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<FixtureCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(FixtureCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FixtureCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            if c.passed() {
                writeln!(f, "ok    {}", c.name)?;
            } else {
                writeln!(f, "FAIL  {}: {}", c.name, c.problems.join("; "))?;
            }
        }
        let failed = self.failures().count();
        writeln!(f, "{} fixtures, {} failed", self.checks.len(), failed)
    }
}

/// Recomputes the Hartree-Fock and FCI energies of every manifest entry and
/// compares them with the recorded values.
pub fn verify_fixtures(dir: &Path) -> Result<VerifyReport, RunError> {
    let has_dumps = std::fs::read_dir(dir)
        .map_err(|e| RunError::Fixture(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(Result::ok)
        .any(|e| e.path().extension().is_some_and(|x| x == "fcidump"));
    if !has_dumps && !dir.join("manifest.toml").exists() {
        return Err(RunError::Fixture(format!("no fixtures in {}", dir.display())));
    }
    let manifest = load_manifest(dir)?;
    if manifest.fixture.is_empty() {
        return Err(RunError::Fixture(format!("no fixtures listed in {}", dir.join("manifest.toml").display())));
    }
    Ok(VerifyReport { checks: manifest.fixture.iter().map(|e| check(dir, e)).collect() })
}

fn check(dir: &Path, entry: &ManifestEntry) -> FixtureCheck {
    let mut out = FixtureCheck { name: entry.name.clone(), hf_energy: None, fci_energy: None, problems: Vec::new() };
    let text = match std::fs::read_to_string(dir.join(&entry.file)) {
        Ok(t) => t,
        Err(e) => {
            out.problems.push(format!("cannot read {}: {e}", entry.file));
            return out;
        }
    };
    let problem = match Problem::from_fcidump(&text) {
        Ok(p) => p,
        Err(e) => {
            out.problems.push(format!("invalid FCIDUMP: {e}"));
            return out;
        }
    };
    let m = &problem.molecule;
    if (m.n_spatial, m.n_electrons, m.ms2) != (entry.norb, entry.nelec, entry.ms2) {
        out.problems.push(format!(
            "header NORB={} NELEC={} MS2={} but manifest has {} {} {}",
            m.n_spatial, m.n_electrons, m.ms2, entry.norb, entry.nelec, entry.ms2
        ));
    }
    if (m.e_nuc - entry.e_nuc).abs() > FIXTURE_TOL {
        out.problems.push(format!("nuclear repulsion {} != {}", m.e_nuc, entry.e_nuc));
    }
    let hf = problem.simulator().expectation(&problem.reference);
    out.hf_energy = Some(hf);
    if (hf - entry.rhf_energy).abs() > FIXTURE_TOL {
        out.problems.push(format!("HF energy {hf:.12} != {:.12}", entry.rhf_energy));
    }
    match fci_spectrum(&problem.hamiltonian, m.n_electrons, m.ms2, 1) {
        Ok(s) => {
            out.fci_energy = Some(s.ground_energy);
            if (s.ground_energy - entry.fci_energy).abs() > FIXTURE_TOL {
                out.problems.push(format!("FCI energy {:.12} != {:.12}", s.ground_energy, entry.fci_energy));
            }
        }
        Err(e) => out.problems.push(format!("FCI failed: {e}")),
    }
    out
}
