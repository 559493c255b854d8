use std::time::Instant;

use log::info;
use serde::Serialize;

use super::config::ScenarioConfig;
use crate::dof::{
    baseline_ensemble, build_ensemble_with, effective_dof, gram_spectrum, theoretical_dof, EffectiveDof, EigenSpectrum,
};
use crate::error::{Error, Result};
use crate::spectral::{build_lattice, Branch, SpectralFactor, WavenumberLattice};
use crate::synthesis::SpatialGrid;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeSummary {
    pub modes: usize,
    pub variance_sum: f64,
    pub variance_plus: f64,
    pub variance_minus: f64,
    /// Power moved in from cells whose own index lies outside the lattice.
    pub folded_power: f64,
    pub on_circle: usize,
    pub spectral_factor: String,
}

impl LatticeSummary {
    pub fn of(lattice: &WavenumberLattice) -> Self {
        let [fp, fm] = lattice.folded_power();
        LatticeSummary {
            modes: lattice.len(),
            variance_sum: lattice.total_variance(),
            variance_plus: lattice.branch_variance(Branch::Plus),
            variance_minus: lattice.branch_variance(Branch::Minus),
            folded_power: fp + fm,
            on_circle: lattice.on_circle_count(),
            spectral_factor: lattice.factor_label().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    /// `[Nx, Ny, Nz]`.
    pub counts: [usize; 3],
    pub samples: usize,
    /// Spacing in metres.
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub realizations: usize,
    pub trace: f64,
    pub max_residual: f64,
    pub eta_effective: EffectiveDof,
    pub eigenvalues: Vec<f64>,
}

impl SpectrumSummary {
    fn new(spectrum: EigenSpectrum, realizations: usize, config: &ScenarioConfig) -> Result<Self> {
        Ok(SpectrumSummary {
            realizations,
            trace: spectrum.trace,
            max_residual: spectrum.max_residual,
            eta_effective: effective_dof(&spectrum, &config.policy())?,
            eigenvalues: spectrum.eigenvalues,
        })
    }
}

/// Wall-clock seconds per stage. Not covered by the determinism guarantee.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timing {
    pub lattice: f64,
    pub ensemble: f64,
    pub eigen: f64,
    pub baseline: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Versions {
    pub holodof: &'static str,
    pub report_schema: u32,
    pub rng: &'static str,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            holodof: env!("CARGO_PKG_VERSION"),
            report_schema: 1,
            rng: "chacha20",
        }
    }
}

/// Everything a run produced. `config` alone is enough to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub lattice: LatticeSummary,
    pub grid: GridSummary,
    pub eta_theory: f64,
    pub field: SpectrumSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<SpectrumSummary>,
    pub warnings: Vec<String>,
    pub versions: Versions,
    pub timing: Timing,
}

impl RunReport {
    /// Eigenvalues of the field ensemble, nonincreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.field.eigenvalues
    }

    /// The report as JSON with the timing block zeroed, for comparing runs.
    pub fn deterministic_json(&self) -> String {
        let mut r = self.clone();
        r.timing = Timing::default();
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}

/// Runs the full pipeline for one isotropic scenario on the current rayon
/// pool: lattice, grid, ensemble, Gram spectrum, and optionally the i.i.d.
/// baseline.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    run_scenario_with(config, &SpectralFactor::isotropic())
}

/// [`run_scenario`] with a non-isotropic spectral factor.
pub fn run_scenario_with(config: &ScenarioConfig, factor: &SpectralFactor) -> Result<RunReport> {
    let label = config
        .name
        .clone()
        .unwrap_or_else(|| format!("{}D scenario", config.dim));
    run_inner(config, factor).map_err(|e| e.context(format!("running {label} (seed {})", config.seed)))
}

/// Runs on a dedicated pool of `workers` threads.
pub fn run_scenario_on(config: &ScenarioConfig, workers: usize) -> Result<RunReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| run_scenario(config))
}

fn run_inner(config: &ScenarioConfig, factor: &SpectralFactor) -> Result<RunReport> {
    config.validate(None)?;
    let start = Instant::now();
    let mut timing = Timing::default();
    let scenario = config.scenario_with(factor.clone())?;
    let half_spaces = scenario.half_spaces;

    let t = Instant::now();
    let lattice = build_lattice(&scenario.aperture, factor)?;
    timing.lattice = t.elapsed().as_secs_f64();
    info!(
        "lattice: {} modes, variance {:.6}",
        lattice.len(),
        lattice.total_variance()
    );

    let grid = SpatialGrid::new(&scenario.aperture, scenario.spacing)?;
    let n = grid.len();
    let m = config.realizations(n);
    info!("grid {:?} (N = {n}), M = {m}", grid.counts());

    let t = Instant::now();
    let ensemble = build_ensemble_with(&lattice, &grid, half_spaces, m, config.seed)?;
    timing.ensemble = t.elapsed().as_secs_f64();
    let warnings = ensemble.warnings().to_vec();

    let t = Instant::now();
    let spectrum = gram_spectrum(&ensemble).map_err(|e| e.context("field ensemble spectrum"))?;
    drop(ensemble);
    timing.eigen = t.elapsed().as_secs_f64();

    let baseline = if config.baseline {
        let t = Instant::now();
        let b = baseline_ensemble(n, m, config.seed)?;
        let s = gram_spectrum(&b).map_err(|e| e.context("baseline ensemble spectrum"))?;
        timing.baseline = t.elapsed().as_secs_f64();
        Some(SpectrumSummary::new(s, m, config)?)
    } else {
        None
    };
    timing.total = start.elapsed().as_secs_f64();

    Ok(RunReport {
        config: config.clone(),
        lattice: LatticeSummary::of(&lattice),
        grid: GridSummary {
            counts: grid.counts(),
            samples: n,
            spacing: grid.spacing(),
        },
        eta_theory: theoretical_dof(&scenario.aperture, scenario.dimensionality(), half_spaces)?,
        field: SpectrumSummary::new(spectrum, m, config)?,
        baseline,
        warnings,
        versions: Versions::default(),
        timing,
    })
}
