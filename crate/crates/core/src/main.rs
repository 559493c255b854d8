use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use holodof::dof::theoretical_dof;
use holodof::runner::{emit_results, lattice_csv, load_config, run_scenario, write_file};
use holodof::spectral::{build_lattice, SpectralFactor};
use holodof::Error;

#[derive(Parser)]
#[command(
    name = "holodof",
    version,
    about = "Spatial degrees of freedom of isotropic fading fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write eigenvalues.csv and report.json.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the master seed from the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Replace existing result files.
        #[arg(long)]
        force: bool,
        #[arg(long, env = "HOLODOF_WORKERS")]
        workers: Option<usize>,
    },
    /// Print the theoretical DoF of a scenario.
    Dof { config: PathBuf },
    /// Dump the wavenumber lattice as CSV (ell, m, gamma, var_plus, var_minus).
    Lattice {
        config: PathBuf,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            force,
            workers,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(k) = workers {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(k.max(1))
                    .build_global()
                    .map_err(|e| Error::InvalidArgument(format!("cannot start {k} workers: {e}")))?;
            }
            let report = run_scenario(&cfg)?;
            let written = emit_results(&report, &out, force)?;
            let eff = report.field.eta_effective;
            println!(
                "N = {}, M = {}, modes = {}, eta_theory = {:.4}, eta_effective = {} (trace fraction), {} (relative floor)",
                report.grid.samples,
                report.field.realizations,
                report.lattice.modes,
                report.eta_theory,
                eff.trace_fraction,
                eff.relative_floor
            );
            for p in written {
                println!("wrote {}", p.display());
            }
        }
        Command::Dof { config } => {
            let cfg = load_config(&config)?;
            let aperture = cfg.aperture()?;
            println!(
                "{}",
                theoretical_dof(&aperture, cfg.dimensionality()?, cfg.half_spaces()?)?
            );
        }
        Command::Lattice { config, out, force } => {
            let cfg = load_config(&config)?;
            let lattice = build_lattice(&cfg.aperture()?, &SpectralFactor::isotropic())?;
            let csv = lattice_csv(&lattice);
            match out {
                Some(p) => write_file(&p, &csv, force)?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}
