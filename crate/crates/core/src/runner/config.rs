use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dof::{DofPolicy, Scenario, MIN_REALIZATION_FACTOR};
use crate::error::{Error, Result};
use crate::spectral::{Aperture, Dimensionality, SpectralFactor};
use crate::synthesis::HalfSpaces;

fn default_delta() -> f64 {
    0.25
}

fn default_m_factor() -> f64 {
    10.0
}

fn default_half_spaces() -> u8 {
    2
}

fn default_tau() -> f64 {
    0.95
}

fn default_rho() -> f64 {
    0.01
}

/// One experiment, as written in a scenario file. Lengths are in
/// wavelengths, `lambda` in metres.
///
/// ```toml
/// dim = 2
/// Lx = 8
/// Ly = 8
/// lambda = 0.1
/// seed = 7
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: u8,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly", default)]
    pub ly: f64,
    #[serde(rename = "Lz", default)]
    pub lz: f64,
    pub lambda: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(rename = "M_factor", default = "default_m_factor")]
    pub m_factor: f64,
    pub seed: u64,
    #[serde(default = "default_half_spaces")]
    pub half_spaces: u8,
    #[serde(default)]
    pub baseline: bool,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
}

impl ScenarioConfig {
    /// Checks ranges and cross-field consistency. `text`, when given, is
    /// used to point diagnostics at the offending line.
    pub fn validate(&self, text: Option<&str>) -> Result<()> {
        let fail = |key: &str, msg: String| Err(Error::field(key, text.and_then(|t| key_line(t, key)), msg));

        let dim = match Dimensionality::from_rank(self.dim) {
            Ok(d) => d,
            Err(_) => return fail("dim", format!("must be 1, 2 or 3, got {}", self.dim)),
        };
        for (key, v) in [
            ("Lx", self.lx),
            ("Ly", self.ly),
            ("Lz", self.lz),
            ("lambda", self.lambda),
        ] {
            if !v.is_finite() || v < 0.0 {
                return fail(key, format!("must be finite and non-negative, got {v}"));
            }
        }
        if self.lx <= 0.0 {
            return fail("Lx", "aperture length must be positive".into());
        }
        if self.lambda <= 0.0 {
            return fail("lambda", "wavelength must be positive".into());
        }
        match dim {
            Dimensionality::Linear if self.ly != 0.0 => return fail("Ly", "must be absent for dim = 1".into()),
            Dimensionality::Linear | Dimensionality::Planar if self.lz != 0.0 => {
                return fail("Lz", format!("must be absent for dim = {}", self.dim))
            }
            Dimensionality::Planar | Dimensionality::Volumetric if self.ly <= 0.0 => {
                return fail("Ly", format!("must be positive for dim = {}", self.dim))
            }
            Dimensionality::Volumetric if self.lz <= 0.0 => return fail("Lz", "must be positive for dim = 3".into()),
            Dimensionality::Volumetric if self.lz >= self.lx.min(self.ly) => {
                return fail(
                    "Lz",
                    format!(
                        "must be smaller than min(Lx, Ly) = {}, got {}",
                        self.lx.min(self.ly),
                        self.lz
                    ),
                )
            }
            _ => {}
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return fail("delta", format!("grid spacing must be positive, got {}", self.delta));
        }
        if !(self.m_factor.is_finite() && self.m_factor >= MIN_REALIZATION_FACTOR as f64) {
            return fail(
                "M_factor",
                format!(
                    "must be at least {MIN_REALIZATION_FACTOR}, got {}: the ensemble needs M >= {MIN_REALIZATION_FACTOR} N \
                     realizations for its Gram matrix to resolve the spatial covariance",
                    self.m_factor
                ),
            );
        }
        if HalfSpaces::from_count(self.half_spaces).is_err() {
            return fail("half_spaces", format!("must be 1 or 2, got {}", self.half_spaces));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return fail("tau", format!("must lie in (0, 1), got {}", self.tau));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return fail("rho", format!("must lie in (0, 1), got {}", self.rho));
        }
        // Anything else the aperture constructor rejects.
        if let Err(e) = self.aperture() {
            return fail("Lx", e.to_string());
        }
        Ok(())
    }

    pub fn dimensionality(&self) -> Result<Dimensionality> {
        Dimensionality::from_rank(self.dim)
    }

    pub fn aperture(&self) -> Result<Aperture> {
        Aperture::in_wavelengths(self.lx, self.ly, self.lz, self.lambda)
    }

    pub fn half_spaces(&self) -> Result<HalfSpaces> {
        HalfSpaces::from_count(self.half_spaces)
    }

    pub fn policy(&self) -> DofPolicy {
        DofPolicy {
            tau: self.tau,
            rho: self.rho,
        }
    }

    /// Grid spacing in metres.
    pub fn spacing(&self) -> f64 {
        self.delta * self.lambda
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Ok(Scenario::isotropic(self.aperture()?, self.spacing()).with_half_spaces(self.half_spaces()?))
    }

    /// Scenario with a non-isotropic spectral factor.
    pub fn scenario_with(&self, factor: SpectralFactor) -> Result<Scenario> {
        Ok(self.scenario()?.with_factor(factor))
    }

    /// `M = round(M_factor * N)`.
    pub fn realizations(&self, samples: usize) -> usize {
        (self.m_factor * samples as f64).round() as usize
    }

    /// The configuration as scenario-file text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

/// Parses and validates scenario text. Defaults are filled in and unknown
/// keys are rejected.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_column(text, s.start)).unwrap_or((0, 0));
        Error::ConfigSyntax {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;
    config.validate(Some(text))?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| e.context(format!("reading {}", path.display())))
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}
