use std::path::PathBuf;
use std::process::ExitCode;

use adaptvqe_cli::{run, verify_fixtures, ExperimentConfig, Mode};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adaptvqe", version, about = "ADAPT-VQE landscape experiments on FCIDUMP fixtures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run ADAPT-VQE and write the trace, trough overlay and spectrum.
    Adapt(RunArgs),
    /// ADAPT-VQE with each operator collated `repetition` times.
    Adaptn(RunArgs),
    /// Run ADAPT-VQE, then restart every ansatz prefix from many points.
    Landscape(RunArgs),
    /// Gradient variance in hypercubes around the final optimum.
    Variance(RunArgs),
    /// Replay the ADAPT operators in shuffled orders and scan each.
    Reorder(RunArgs),
    /// Lowest eigenvalues in the Hartree-Fock particle sector.
    Fci(RunArgs),
    /// Check every fixture against the manifest energies.
    VerifyFixtures {
        #[arg(long, default_value = "fixtures")]
        fixtures: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment TOML file.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(mode: Mode, args: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = args.out {
        cfg.output = o;
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("failed to configure the worker pool")?;
    }
    let summary = run(&cfg, mode)?;
    println!("system      {}", cfg.system);
    println!("hf energy   {:.12}", summary.hf_energy);
    println!("fci energy  {:.12}", summary.fci_energy);
    if let Some(e) = summary.final_energy {
        println!("final       {e:.12}  (error {:.3e})", e - summary.fci_energy);
    }
    for f in &summary.files {
        println!("wrote {}", summary.output_dir.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Adapt(a) => execute(Mode::Adapt, a),
        Command::Adaptn(a) => execute(Mode::Adaptn, a),
        Command::Landscape(a) => execute(Mode::Landscape, a),
        Command::Variance(a) => execute(Mode::Variance, a),
        Command::Reorder(a) => execute(Mode::Reorder, a),
        Command::Fci(a) => execute(Mode::Fci, a),
        Command::VerifyFixtures { fixtures } => verify_fixtures(&fixtures).map_err(Into::into).and_then(|report| {
            print!("{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(anyhow::anyhow!("{} fixture(s) failed verification", report.failures().count()))
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
