//! Runs a shipped scenario file through the whole pipeline and writes
//! eigenvalues.csv and report.json, as `holodof run` does.
//!
//! cargo run --example run_scenario -- scenarios/fig2.toml /tmp/fig2

use std::path::PathBuf;

use holodof::runner::{emit_results, load_config, run_scenario};

fn main() -> holodof::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/fig2.toml"));
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("holodof-example"));

    let report = run_scenario(&load_config(&config)?)?;
    println!(
        "{}: N = {}, M = {}, |E| = {}, eta_theory = {:.3}, effective {:?}",
        report.config.name.as_deref().unwrap_or("scenario"),
        report.grid.samples,
        report.field.realizations,
        report.lattice.modes,
        report.eta_theory,
        report.field.eta_effective
    );
    for path in emit_results(&report, &out, true)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
