//! Scenario files, the end-to-end pipeline and result files.

mod config;
mod emit;
mod report;

pub use config::{load_config, parse_config, ScenarioConfig};
pub use emit::{
    eigenvalues_csv, emit_results, format_decimal, lattice_csv, parse_eigenvalues_csv, write_file, BASELINE_FILE,
    EIGENVALUES_FILE, REPORT_FILE,
};
pub use report::{
    run_scenario, run_scenario_on, run_scenario_with, GridSummary, LatticeSummary, RunReport, SpectrumSummary, Timing,
    Versions,
};
