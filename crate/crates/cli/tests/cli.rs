use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adaptvqe::oracle::fci_spectrum;
use adaptvqe::problem::Problem;
use adaptvqe_cli::{run, ExperimentConfig, Mode, RunError};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn config(system: &str, out: &Path, extra: &str) -> PathBuf {
    let path = out.with_extension("toml");
    let text = format!(
        "system = {system:?}\nfixtures_dir = {:?}\noutput = {:?}\n{extra}\n",
        fixtures().display().to_string(),
        out.display().to_string()
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaptvqe")).args(args).output().unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn fci_mode_writes_the_oracle_ground_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fci");
    let cfg = config("h2", &out, "");
    let o = cli(&["fci", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let rows = csv_rows(&out.join("spectrum.csv"));
    assert_eq!(rows.len(), 1);
    let text = std::fs::read_to_string(fixtures().join("h2.fcidump")).unwrap();
    let p = Problem::from_fcidump(&text).unwrap();
    let e = fci_spectrum(&p.hamiltonian, 2, 0, 1).unwrap().ground_energy;
    let written: f64 = rows[0][1].parse().unwrap();
    assert!((written - e).abs() < 1e-13);
    assert!(out.join("metadata.json").exists());
}

#[test]
fn zero_max_ops_gives_header_only_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zero");
    let cfg = ExperimentConfig::from_toml(&format!(
        "system = \"h4_1a\"\nmax_ops = 0\nfixtures_dir = {:?}\noutput = {:?}",
        fixtures().display().to_string(),
        out.display().to_string()
    ))
    .unwrap();
    let summary = run(&cfg, Mode::Adapt).unwrap();
    let text = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("iteration,chosen_op,op_label,max_pool_grad,grad_l2,energy,fci_error"));
    assert_eq!(summary.final_energy, Some(summary.hf_energy));
}

#[test]
fn landscape_has_n_random_plus_two_records_per_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("land");
    let cfg = config("h4_1a", &out, "n_random = 50\nlengths = [3, 8]\nseed = 11");
    let o = cli(&["landscape", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("landscape.csv"));
    assert_eq!(rows.len(), 2 * 52);
    for (length, chunk) in [3, 8].iter().zip(rows.chunks(52)) {
        assert!(chunk.iter().all(|r| r[0] == length.to_string()));
        assert!(chunk[..50].iter().all(|r| &r[1] == "random"));
        assert_eq!((&chunk[50][1], &chunk[51][1]), ("recycled", "zero"));
    }
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let cfg = config("h4_1a", &out, "n_random = 6\nlengths = [4, 9]\nseed = 5");
        let o = cli(&["landscape", "--config", cfg.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(out);
    }
    for name in ["trace.csv", "landscape.csv", "clusters.csv"] {
        let a = std::fs::read(outputs[0].join(name)).unwrap();
        let b = std::fs::read(outputs[1].join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn seed_flag_changes_random_starts_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let cfg = config("h4_1a", &out, "n_random = 2\nlengths = [2]");
    let read = |seed: &str| {
        let o = cli(&["landscape", "--config", cfg.to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success());
        csv_rows(&out.join("landscape.csv"))
    };
    let (a, b) = (read("1"), read("2"));
    assert_ne!(a[0][2], b[0][2]);
    assert_eq!(a[2], b[2]);
    assert_eq!(a[3], b[3]);
}

#[test]
fn resume_continues_a_truncated_run() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    let part = dir.path().join("part");
    let base = |out: &Path, extra: &str| {
        ExperimentConfig::from_toml(&format!(
            "system = \"h4_1a\"\nfixtures_dir = {:?}\noutput = {:?}\n{extra}",
            fixtures().display().to_string(),
            out.display().to_string()
        ))
        .unwrap()
    };
    run(&base(&full, ""), Mode::Adapt).unwrap();
    run(&base(&part, "max_ops = 6"), Mode::Adapt).unwrap();
    run(&base(&part, "resume = true"), Mode::Adapt).unwrap();
    for name in ["trace.csv", "overlay.csv"] {
        assert_eq!(std::fs::read(full.join(name)).unwrap(), std::fs::read(part.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn reorder_writes_one_directory_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("re");
    let cfg = config("h2", &out, "reorder_seeds = [0, 4]\nn_random = 3");
    let o = cli(&["reorder", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for s in [0, 4] {
        let d = out.join(format!("reorder_seed{s}"));
        assert_eq!(csv_rows(&d.join("trace.csv")).len(), 1);
        assert_eq!(csv_rows(&d.join("landscape.csv")).len(), 5);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let cases = [
        ("system = \"h2\"", Mode::Adaptn),
        ("system = \"h2\"\neps = 0.0", Mode::Adapt),
        ("system = \"h2\"\nrepetition = 0", Mode::Adapt),
        ("system = \"h2\"", Mode::Reorder),
        ("system = \"h2\"\nmode = \"fci\"", Mode::Adapt),
        ("system = \"h2\"\nsamples_per_width = 0", Mode::Variance),
    ];
    for (text, mode) in cases {
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert!(matches!(run(&cfg, mode), Err(RunError::Config(_))), "{text}");
    }
    assert!(ExperimentConfig::from_toml("system = \"h2\"\nbogus = 1").is_err());
    let mut cfg = ExperimentConfig::new("nope");
    cfg.fixtures_dir = fixtures();
    assert!(matches!(run(&cfg, Mode::Fci), Err(RunError::Fixture(_))));
}

#[test]
fn lengths_beyond_the_trace_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("len");
    let cfg = config("h2", &out, "lengths = [2]");
    let o = cli(&["landscape", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("ansatz length 2"));
}

#[test]
fn verify_fixtures_passes_on_checked_in_fixtures() {
    let o = cli(&["verify-fixtures", "--fixtures", fixtures().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn verify_fixtures_names_a_tampered_file() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixtures()).unwrap() {
        let p = entry.unwrap().path();
        std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    let target = dir.path().join("h4_1a.fcidump");
    let text = std::fs::read_to_string(&target).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let i = lines.iter().position(|l| l.trim_start().starts_with(|c: char| c.is_ascii_digit() || c == '-') && !l.contains('=')).unwrap();
    let mut fields: Vec<String> = lines[i].split_whitespace().map(String::from).collect();
    let v: f64 = fields[0].parse().unwrap();
    fields[0] = format!("{:.16e}", v + 0.05);
    lines[i] = fields.join(" ");
    std::fs::write(&target, lines.join("\n") + "\n").unwrap();

    let o = cli(&["verify-fixtures", "--fixtures", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("FAIL  h4_1a"), "{stdout}");
    assert!(stdout.lines().filter(|l| l.starts_with("FAIL")).count() == 1, "{stdout}");
}

#[test]
fn verify_fixtures_on_empty_dir_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["verify-fixtures", "--fixtures", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no fixtures"));
}
