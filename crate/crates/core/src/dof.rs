//! Degrees-of-freedom analysis: closed-form limits, Monte Carlo ensembles,
//! Gram-matrix eigen-spectra and effective-rank read-off.

use std::f64::consts::PI;

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Namespace, StreamId};
use crate::spectral::{build_lattice, Aperture, Dimensionality, SpectralFactor, WavenumberLattice};
use crate::synthesis::{draw_coefficients_from, iid_rayleigh, HalfSpaces, SpatialGrid, Synthesizer};

/// Smallest accepted realizations-per-sample ratio.
pub const MIN_REALIZATION_FACTOR: usize = 4;
/// Below this ratio the sample Gram matrix is noticeably spread and a
/// warning is attached to the ensemble.
pub const WELL_CONDITIONED_FACTOR: usize = 10;

/// Upper limit on the average number of spatial degrees of freedom:
/// `2 Lx / lambda` on a segment, `pi Lx Ly / lambda^2` on a rectangle and
/// twice that in a volume fed by both half-spaces. Never depends on `Lz`.
pub fn theoretical_dof(aperture: &Aperture, dimensionality: Dimensionality, half_spaces: HalfSpaces) -> Result<f64> {
    if aperture.dimensionality() != dimensionality {
        return Err(Error::invalid(format!(
            "aperture is {} but {} DoF were requested",
            aperture.dimensionality(),
            dimensionality
        )));
    }
    let rx = aperture.x_wavelengths();
    Ok(match dimensionality {
        Dimensionality::Linear => 2.0 * rx,
        Dimensionality::Planar => PI * rx * aperture.y_wavelengths(),
        Dimensionality::Volumetric => f64::from(half_spaces.count()) * PI * rx * aperture.y_wavelengths(),
    })
}

/// Everything needed to generate field realizations.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub aperture: Aperture,
    /// Grid spacing in metres.
    pub spacing: f64,
    pub half_spaces: HalfSpaces,
    pub factor: SpectralFactor,
}

impl Scenario {
    /// Isotropic scattering, both half-spaces.
    pub fn isotropic(aperture: Aperture, spacing: f64) -> Self {
        Scenario {
            aperture,
            spacing,
            half_spaces: HalfSpaces::Two,
            factor: SpectralFactor::isotropic(),
        }
    }

    pub fn with_half_spaces(mut self, half_spaces: HalfSpaces) -> Self {
        self.half_spaces = half_spaces;
        self
    }

    pub fn with_factor(mut self, factor: SpectralFactor) -> Self {
        self.factor = factor;
        self
    }

    pub fn dimensionality(&self) -> Dimensionality {
        self.aperture.dimensionality()
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(&self.aperture, self.spacing)
    }

    pub fn lattice(&self) -> Result<WavenumberLattice> {
        build_lattice(&self.aperture, &self.factor)
    }

    pub fn theoretical_dof(&self) -> Result<f64> {
        theoretical_dof(&self.aperture, self.dimensionality(), self.half_spaces)
    }
}

/// `N x M` matrix of field realizations, one column per realization,
/// stored column-major.
#[derive(Debug, Clone)]
pub struct ChannelEnsemble {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
    seed: Option<(u64, Namespace)>,
    warnings: Vec<String>,
}

impl ChannelEnsemble {
    /// Wraps an explicit column-major matrix.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "ensemble of {rows} x {cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(ChannelEnsemble {
            rows,
            cols,
            data,
            seed: None,
            warnings: Vec::new(),
        })
    }

    /// Number of spatial samples `N`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of realizations `M`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.rows + i]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn seed(&self) -> Option<(u64, Namespace)> {
        self.seed
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Mean of `|h|^2` over all samples and realizations.
    pub fn mean_power(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.data.len() as f64
    }

    fn generated(
        rows: usize,
        cols: usize,
        seed: u64,
        namespace: Namespace,
        fill: impl Fn(usize, &mut [Complex64]) -> Result<()> + Sync,
    ) -> Result<Self> {
        let warnings = check_realizations(rows, cols)?;
        let mut data = vec![Complex64::new(0.0, 0.0); rows * cols];
        data.par_chunks_mut(rows)
            .enumerate()
            .try_for_each(|(j, col)| fill(j, col))?;
        Ok(ChannelEnsemble {
            rows,
            cols,
            data,
            seed: Some((seed, namespace)),
            warnings,
        })
    }
}

fn check_realizations(rows: usize, cols: usize) -> Result<Vec<String>> {
    if cols < MIN_REALIZATION_FACTOR * rows {
        return Err(Error::invalid(format!(
            "{cols} realizations for {rows} samples: need M >= {MIN_REALIZATION_FACTOR} N = {} \
             so the sample Gram matrix resolves the spatial covariance",
            MIN_REALIZATION_FACTOR * rows
        )));
    }
    let mut warnings = Vec::new();
    if cols < WELL_CONDITIONED_FACTOR * rows {
        let msg = format!(
            "M = {cols} is below {WELL_CONDITIONED_FACTOR} N = {}; sample eigenvalues will be spread",
            WELL_CONDITIONED_FACTOR * rows
        );
        warn!("{msg}");
        warnings.push(msg);
    }
    Ok(warnings)
}

/// Generates `realizations` independent field snapshots on the scenario
/// grid. Column `j` is drawn from stream `(master_seed, Field, j)`.
pub fn build_ensemble(scenario: &Scenario, realizations: usize, master_seed: u64) -> Result<ChannelEnsemble> {
    let lattice = scenario.lattice()?;
    let grid = scenario.grid()?;
    build_ensemble_with(&lattice, &grid, scenario.half_spaces, realizations, master_seed)
}

/// [`build_ensemble`] for a lattice and grid that are already built.
pub fn build_ensemble_with(
    lattice: &WavenumberLattice,
    grid: &SpatialGrid,
    half_spaces: HalfSpaces,
    realizations: usize,
    master_seed: u64,
) -> Result<ChannelEnsemble> {
    let synth = Synthesizer::new(lattice, grid)?;
    ChannelEnsemble::generated(grid.len(), realizations, master_seed, Namespace::Field, |j, col| {
        let mut coeffs = draw_coefficients_from(lattice, StreamId::new(master_seed, Namespace::Field, j as u64));
        coeffs.restrict(half_spaces);
        synth.synthesize_into(&coeffs, col)
    })
}

/// i.i.d. unit-variance Rayleigh companion ensemble, drawn from the
/// baseline stream namespace.
pub fn baseline_ensemble(samples: usize, realizations: usize, master_seed: u64) -> Result<ChannelEnsemble> {
    ChannelEnsemble::generated(samples, realizations, master_seed, Namespace::Baseline, |j, col| {
        let mut rng = StreamId::new(master_seed, Namespace::Baseline, j as u64).rng();
        col.copy_from_slice(&iid_rayleigh(col.len(), &mut rng)?);
        Ok(())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Eigenvalues of `H H^H`.
    Raw,
    /// Eigenvalues of `H H^H / M`.
    PerRealization,
}

/// Eigenvalues of the ensemble Gram matrix, nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSpectrum {
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
    pub normalization: Normalization,
    /// Largest `||G v - lambda v|| / lambda_max` over the spot-checked pairs.
    pub max_residual: f64,
}

impl EigenSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// Number of leading eigenpairs whose residual is verified.
pub const RESIDUAL_CHECKED_PAIRS: usize = 10;
/// Residual bound relative to the largest eigenvalue.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Eigenvalues of `H H^H / M`.
pub fn gram_spectrum(ensemble: &ChannelEnsemble) -> Result<EigenSpectrum> {
    gram_spectrum_with(ensemble, Normalization::PerRealization)
}

pub fn gram_spectrum_with(ensemble: &ChannelEnsemble, normalization: Normalization) -> Result<EigenSpectrum> {
    let n = ensemble.rows();
    let h = MatRef::from_column_major_slice(ensemble.as_slice(), n, ensemble.cols());
    let scale = match normalization {
        Normalization::Raw => 1.0,
        Normalization::PerRealization => 1.0 / ensemble.cols() as f64,
    };
    let mut gram = Mat::<Complex64>::zeros(n, n);
    // Sequential kernels keep the result independent of the thread count.
    matmul(
        gram.as_mut(),
        Accum::Replace,
        h,
        h.adjoint(),
        Complex64::new(scale, 0.0),
        Par::Seq,
    );
    hermitian_spectrum(gram.as_ref(), normalization)
}

/// Eigen-decomposition of an explicit Hermitian matrix (lower triangle
/// used), with the residual spot-check and clamping applied.
pub fn hermitian_spectrum(gram: MatRef<'_, Complex64>, normalization: Normalization) -> Result<EigenSpectrum> {
    let n = gram.nrows();
    if n == 0 || gram.ncols() != n {
        return Err(Error::invalid("Gram matrix must be square and non-empty"));
    }
    let trace: f64 = (0..n).map(|i| gram[(i, i)].re).sum();

    let mut s = Diag::<Complex64>::zeros(n);
    let mut u = Mat::<Complex64>::zeros(n, n);
    let par = Par::Seq;
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<Complex64>(
        n,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        gram,
        s.as_mut(),
        Some(u.as_mut()),
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| {
        Error::numerical(
            format!("Hermitian eigen-solver failed: {e:?} (n = {n}, trace = {trace:e})"),
            f64::NAN,
        )
    })?;

    // faer returns ascending order.
    let ascending: Vec<f64> = s.column_vector().iter().map(|v| v.re).collect();
    let lambda_max = ascending.last().copied().unwrap_or(0.0).max(0.0);

    let mut max_residual: f64 = 0.0;
    if lambda_max > 0.0 {
        for k in (0..n).rev().take(RESIDUAL_CHECKED_PAIRS) {
            let v = u.col(k);
            let lambda = ascending[k];
            let mut sq = 0.0;
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let g = if i >= j { gram[(i, j)] } else { gram[(j, i)].conj() };
                    acc += g * v[j];
                }
                sq += (acc - v[i] * lambda).norm_sqr();
            }
            max_residual = max_residual.max(sq.sqrt() / lambda_max);
        }
        if max_residual > RESIDUAL_TOLERANCE {
            return Err(Error::numerical(
                format!(
                    "eigenpair residual {max_residual:e} exceeds {RESIDUAL_TOLERANCE:e} \
                     (lambda_max = {lambda_max:e}, lambda_min = {:e}, n = {n})",
                    ascending[0]
                ),
                max_residual,
            ));
        }
    }

    let floor = -1e-10 * trace.abs().max(f64::MIN_POSITIVE);
    let mut eigenvalues = Vec::with_capacity(n);
    for &v in ascending.iter().rev() {
        if v < floor {
            return Err(Error::numerical(
                format!("Gram matrix has a negative eigenvalue {v:e} (trace {trace:e})"),
                v.abs(),
            ));
        }
        eigenvalues.push(v.max(0.0));
    }
    Ok(EigenSpectrum {
        eigenvalues,
        trace,
        normalization,
        max_residual,
    })
}

/// Thresholds used to read an effective rank off a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DofPolicy {
    /// Fraction of the trace the leading eigenvalues must capture.
    pub tau: f64,
    /// Eigenvalues at or above `rho * lambda_1` count.
    pub rho: f64,
}

impl Default for DofPolicy {
    fn default() -> Self {
        DofPolicy { tau: 0.95, rho: 1e-2 }
    }
}

impl DofPolicy {
    pub fn new(tau: f64, rho: f64) -> Result<Self> {
        let p = DofPolicy { tau, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::invalid(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        Ok(())
    }
}

/// Effective rank under both policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EffectiveDof {
    /// Smallest `k` with `sum_{i <= k} lambda_i >= tau * trace`.
    pub trace_fraction: usize,
    /// Count of `lambda_i >= rho * lambda_1`.
    pub relative_floor: usize,
}

pub fn effective_dof(spectrum: &EigenSpectrum, policy: &DofPolicy) -> Result<EffectiveDof> {
    policy.validate()?;
    let ev = &spectrum.eigenvalues;
    let total: f64 = ev.iter().sum();
    let top = spectrum.largest();
    if total <= 0.0 || top <= 0.0 {
        return Ok(EffectiveDof {
            trace_fraction: 0,
            relative_floor: 0,
        });
    }
    let target = policy.tau * total * (1.0 - 1e-12);
    let mut acc = 0.0;
    let mut trace_fraction = ev.len();
    for (i, &v) in ev.iter().enumerate() {
        acc += v;
        if acc >= target {
            trace_fraction = i + 1;
            break;
        }
    }
    let relative_floor = ev.iter().filter(|&&v| v >= policy.rho * top).count();
    Ok(EffectiveDof {
        trace_fraction,
        relative_floor,
    })
}

/// Theory versus measurement for one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct DofReport {
    pub eta_theory: f64,
    pub eta_effective: EffectiveDof,
    pub policy: DofPolicy,
    pub dimensionality: Dimensionality,
    pub aperture: Aperture,
    pub half_spaces: u8,
}

impl DofReport {
    pub fn new(scenario: &Scenario, spectrum: &EigenSpectrum, policy: DofPolicy) -> Result<Self> {
        Ok(DofReport {
            eta_theory: scenario.theoretical_dof()?,
            eta_effective: effective_dof(spectrum, &policy)?,
            policy,
            dimensionality: scenario.dimensionality(),
            aperture: scenario.aperture,
            half_spaces: scenario.half_spaces.count(),
        })
    }
}

/// `[exp(j gamma z), exp(-j gamma z)]` for a set of z samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringMatrix {
    pub gamma: f64,
    pub z: Vec<f64>,
    /// Rows of the `N_z x 2` matrix.
    pub rows: Vec<[Complex64; 2]>,
    pub rank: u8,
    /// `gamma > 0` and several samples, yet the columns coincide because
    /// every z difference is a multiple of `pi / gamma`.
    pub degenerate: bool,
}

/// Relative singular-value threshold for the numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

impl SteeringMatrix {
    pub fn new(gamma: f64, z: &[f64]) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::invalid("steering matrix needs at least one z sample"));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::invalid(format!(
                "gamma must be finite and non-negative, got {gamma}"
            )));
        }
        let mut sorted = z.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("z samples must be distinct"));
        }
        let rows: Vec<[Complex64; 2]> = z
            .iter()
            .map(|&zi| {
                let (s, c) = (gamma * zi).sin_cos();
                [Complex64::new(c, s), Complex64::new(c, -s)]
            })
            .collect();

        // Singular values from A^H A = [[n, conj(c)], [c, n]],
        // c = sum exp(2 j gamma z): s_max^2 = n + |c|. The determinant
        // comes from Cauchy-Binet, sum over pairs of 4 sin^2(gamma dz),
        // which avoids cancellation in n - |c|.
        let n = z.len() as f64;
        let c: Complex64 = z
            .iter()
            .map(|&zi| {
                let (s, co) = (2.0 * gamma * zi).sin_cos();
                Complex64::new(co, s)
            })
            .sum();
        let s_max_sq = n + c.norm();
        let mut det = 0.0;
        for i in 0..z.len() {
            for k in i + 1..z.len() {
                let s = (gamma * (z[i] - z[k])).sin();
                det += 4.0 * s * s;
            }
        }
        let s_min = det.sqrt() / s_max_sq.sqrt();
        let rank = if s_min > RANK_TOLERANCE * s_max_sq.sqrt() { 2 } else { 1 };
        let degenerate = rank == 1 && gamma > 0.0 && z.len() >= 2;
        Ok(SteeringMatrix {
            gamma,
            z: z.to_vec(),
            rows,
            rank,
            degenerate,
        })
    }
}

/// Numerical rank (1 or 2) of the steering matrix of one mode.
pub fn steering_rank(gamma: f64, z: &[f64]) -> Result<u8> {
    SteeringMatrix::new(gamma, z).map(|s| s.rank)
}
