//! Wavenumber-domain description of an isotropic (or filtered) monochromatic
//! field: dispersion relation, 2D power spectral density, the lattice of
//! resolvable plane-wave modes and the per-mode variances.

mod lattice;
mod variance;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lattice::{build_lattice, is_member, lattice_indices, LatticeMode, WavenumberLattice};
pub use variance::{cell_kind, cell_variance, mode_variance, CellKind, CELL_TOLERANCE};

/// Tolerance used when deciding whether an aperture side is an integer
/// number of wavelengths.
const INTEGER_SNAP: f64 = 1e-9;

/// Spatial dimensionality of an observation aperture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimensionality {
    Linear,
    Planar,
    Volumetric,
}

impl Dimensionality {
    pub fn from_rank(dim: u8) -> Result<Self> {
        match dim {
            1 => Ok(Dimensionality::Linear),
            2 => Ok(Dimensionality::Planar),
            3 => Ok(Dimensionality::Volumetric),
            other => Err(Error::invalid(format!("dimensionality must be 1, 2 or 3, got {other}"))),
        }
    }

    pub fn rank(self) -> u8 {
        match self {
            Dimensionality::Linear => 1,
            Dimensionality::Planar => 2,
            Dimensionality::Volumetric => 3,
        }
    }
}

impl fmt::Display for Dimensionality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimensionality::Linear => "linear",
            Dimensionality::Planar => "planar",
            Dimensionality::Volumetric => "volumetric",
        };
        f.write_str(s)
    }
}

/// Rectangular observation region `[0, Lx] x [0, Ly] x [0, Lz]` and the
/// operating wavelength. Lengths are in metres.
///
/// `Ly = 0` describes a segment along x, `Lz = 0` a rectangle in the
/// `z = 0` plane. A volume must be thinner along z than along either other
/// side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aperture {
    lx: f64,
    ly: f64,
    lz: f64,
    lambda: f64,
}

impl Aperture {
    pub fn new(lx: f64, ly: f64, lz: f64, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!("wavelength must be positive, got {lambda}")));
        }
        if !(lx.is_finite() && lx > 0.0) {
            return Err(Error::invalid(format!("Lx must be positive, got {lx}")));
        }
        if !(ly.is_finite() && ly >= 0.0) {
            return Err(Error::invalid(format!("Ly must be non-negative, got {ly}")));
        }
        if !(lz.is_finite() && lz >= 0.0) {
            return Err(Error::invalid(format!("Lz must be non-negative, got {lz}")));
        }
        if ly == 0.0 && lz > 0.0 {
            return Err(Error::invalid("a volumetric aperture needs Ly > 0"));
        }
        if ly > 0.0 && lz > 0.0 && lz >= lx.min(ly) {
            return Err(Error::invalid(format!(
                "volumetric aperture requires Lz < min(Lx, Ly); got Lz = {lz}, Lx = {lx}, Ly = {ly}"
            )));
        }
        Ok(Aperture { lx, ly, lz, lambda })
    }

    pub fn linear(lx: f64, lambda: f64) -> Result<Self> {
        Self::new(lx, 0.0, 0.0, lambda)
    }

    pub fn planar(lx: f64, ly: f64, lambda: f64) -> Result<Self> {
        if ly <= 0.0 {
            return Err(Error::invalid("a planar aperture needs Ly > 0"));
        }
        Self::new(lx, ly, 0.0, lambda)
    }

    pub fn volumetric(lx: f64, ly: f64, lz: f64, lambda: f64) -> Result<Self> {
        if ly <= 0.0 || lz <= 0.0 {
            return Err(Error::invalid("a volumetric aperture needs Ly > 0 and Lz > 0"));
        }
        Self::new(lx, ly, lz, lambda)
    }

    /// Builds an aperture from side lengths given in wavelengths.
    pub fn in_wavelengths(lx: f64, ly: f64, lz: f64, lambda: f64) -> Result<Self> {
        Self::new(lx * lambda, ly * lambda, lz * lambda, lambda)
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn lz(&self) -> f64 {
        self.lz
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kappa(&self) -> f64 {
        2.0 * PI / self.lambda
    }

    pub fn dimensionality(&self) -> Dimensionality {
        if self.ly == 0.0 {
            Dimensionality::Linear
        } else if self.lz == 0.0 {
            Dimensionality::Planar
        } else {
            Dimensionality::Volumetric
        }
    }

    /// `Lx / lambda`, snapped to the nearest integer when within rounding
    /// distance of it.
    pub fn x_wavelengths(&self) -> f64 {
        snap(self.lx / self.lambda)
    }

    pub fn y_wavelengths(&self) -> f64 {
        snap(self.ly / self.lambda)
    }

    pub fn z_wavelengths(&self) -> f64 {
        snap(self.lz / self.lambda)
    }
}

fn snap(ratio: f64) -> f64 {
    let r = ratio.round();
    if (ratio - r).abs() <= INTEGER_SNAP * ratio.abs().max(1.0) {
        r
    } else {
        ratio
    }
}

/// Upgoing (`Plus`, `+gamma`) or downgoing (`Minus`, `-gamma`) plane-wave
/// family relative to the z axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];
}

/// `kappa = 2 pi / lambda`.
pub fn wavenumber(lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("wavelength must be positive, got {lambda}")));
    }
    Ok(2.0 * PI / lambda)
}

/// z-component of the wave vector, `sqrt(kappa^2 - kx^2 - ky^2)`.
///
/// Points outside the closed disk of radius `kappa` would describe
/// evanescent waves and are rejected.
pub fn gamma(kx: f64, ky: f64, kappa: f64) -> Result<f64> {
    let radius_sq = kx * kx + ky * ky;
    let kappa_sq = kappa * kappa;
    if radius_sq > kappa_sq {
        return Err(Error::Evanescent { radius_sq, kappa_sq });
    }
    Ok((kappa_sq - radius_sq).max(0.0).sqrt())
}

/// Isotropic 2D power spectral density `(pi / kappa) / gamma(kx, ky)`.
///
/// Zero outside the closed disk. On the circle itself the density is
/// infinite and `f64::INFINITY` is returned.
pub fn isotropic_psd(kx: f64, ky: f64, kappa: f64) -> f64 {
    let radius_sq = kx * kx + ky * ky;
    let kappa_sq = kappa * kappa;
    if radius_sq > kappa_sq {
        0.0
    } else if radius_sq == kappa_sq {
        f64::INFINITY
    } else {
        (PI / kappa) / (kappa_sq - radius_sq).sqrt()
    }
}

/// Spectral-factor amplitude that leaves the isotropic spectrum unchanged.
pub fn isotropic_amplitude(kappa: f64) -> f64 {
    2.0 * PI / kappa.sqrt()
}

type GainFn = dyn Fn(f64, f64, Branch) -> f64 + Send + Sync;

/// Wavenumber-domain filter shaping the isotropic spectrum:
/// `S_h^±(kx, ky) = S_h(kx, ky) * gain(kx, ky, ±)`.
///
/// The gain is expressed relative to the isotropic case, i.e. it equals
/// `A_h(kx, ky, ±gamma)^2 / (4 pi^2 / kappa)`; the isotropic factor is the
/// constant 1.
#[derive(Clone)]
pub struct SpectralFactor {
    label: String,
    gain: Option<Arc<GainFn>>,
}

impl SpectralFactor {
    pub fn isotropic() -> Self {
        SpectralFactor {
            label: "isotropic".to_string(),
            gain: None,
        }
    }

    /// A factor given directly as a power gain relative to isotropic.
    pub fn from_gain<F>(label: impl Into<String>, gain: F) -> Self
    where
        F: Fn(f64, f64, Branch) -> f64 + Send + Sync + 'static,
    {
        SpectralFactor {
            label: label.into(),
            gain: Some(Arc::new(gain)),
        }
    }

    /// A factor given as the amplitude `A_h(kx, ky, ±gamma)`; converted to a
    /// power gain with the wavenumber `kappa`.
    pub fn from_amplitude<F>(label: impl Into<String>, kappa: f64, amplitude: F) -> Self
    where
        F: Fn(f64, f64, Branch) -> f64 + Send + Sync + 'static,
    {
        let scale = kappa / (4.0 * PI * PI);
        Self::from_gain(label, move |kx, ky, b| {
            let a = amplitude(kx, ky, b);
            a * a * scale
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_isotropic(&self) -> bool {
        self.gain.is_none()
    }

    pub fn gain(&self, kx: f64, ky: f64, branch: Branch) -> f64 {
        match &self.gain {
            None => 1.0,
            Some(g) => g(kx, ky, branch),
        }
    }

    /// Filtered spectral density for one branch.
    pub fn psd(&self, kx: f64, ky: f64, kappa: f64, branch: Branch) -> f64 {
        let s = isotropic_psd(kx, ky, kappa);
        if s == 0.0 {
            0.0
        } else {
            s * self.gain(kx, ky, branch)
        }
    }
}

impl Default for SpectralFactor {
    fn default() -> Self {
        Self::isotropic()
    }
}

impl fmt::Debug for SpectralFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralFactor").field("label", &self.label).finish()
    }
}

/// Lebesgue-measure estimate of the lattice size, `pi Lx Ly / lambda^2`.
pub fn cardinality_estimate(aperture: &Aperture) -> Result<f64> {
    if aperture.dimensionality() == Dimensionality::Linear {
        return Err(Error::invalid(
            "cardinality estimate needs a planar or volumetric aperture; a segment has 2 Lx / lambda modes",
        ));
    }
    Ok(PI * aperture.x_wavelengths() * aperture.y_wavelengths())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wavenumber_examples() {
        assert_eq!(wavenumber(1.0).unwrap(), 2.0 * PI);
        assert!((wavenumber(0.1).unwrap() - 62.831_853_071_795_86).abs() < 1e-12);
        assert!((wavenumber(2.0 * PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(wavenumber(0.0), Err(Error::InvalidArgument(_))));
        assert!(wavenumber(-1.0).is_err());
    }

    #[test]
    fn gamma_examples() {
        let k = 3.7;
        assert_eq!(gamma(0.0, 0.0, k).unwrap(), k);
        assert_eq!(gamma(k, 0.0, k).unwrap(), 0.0);
        assert!((gamma(k / 2.0, k / 2.0, k).unwrap() - k / 2f64.sqrt()).abs() < 1e-14);
        assert!(matches!(gamma(k, 0.1, k), Err(Error::Evanescent { .. })));
    }

    #[test]
    fn psd_examples() {
        let k = 2.0 * PI / 0.1;
        assert!((isotropic_psd(0.0, 0.0, k) - PI / (k * k)).abs() < 1e-15);
        assert_eq!(isotropic_psd(2.0 * k, 0.0, k), 0.0);
        let s = isotropic_psd(0.6 * k, 0.0, k);
        assert!((s - 1.25 * PI / (k * k)).abs() < 1e-14 * s);
        assert_eq!(isotropic_psd(k, 0.0, k), f64::INFINITY);
    }

    #[test]
    fn cardinality_examples() {
        let a = Aperture::in_wavelengths(16.0, 16.0, 0.0, 0.1).unwrap();
        assert!((cardinality_estimate(&a).unwrap() - PI * 256.0).abs() < 1e-10);
        let a = Aperture::in_wavelengths(1.0, 1.0, 0.0, 0.1).unwrap();
        assert!((cardinality_estimate(&a).unwrap() - PI).abs() < 1e-12);
        let a = Aperture::in_wavelengths(2.0, 8.0, 0.0, 1.0).unwrap();
        assert!((cardinality_estimate(&a).unwrap() - 16.0 * PI).abs() < 1e-12);
        let a = Aperture::linear(1.0, 0.1).unwrap();
        assert!(cardinality_estimate(&a).is_err());
    }

    #[test]
    fn aperture_validation() {
        assert!(Aperture::new(1.0, 1.0, 1.0, 0.1).is_err());
        assert!(Aperture::new(1.0, 2.0, 0.5, 0.1).is_ok());
        assert!(Aperture::new(1.0, 0.0, 0.5, 0.1).is_err());
        assert!(Aperture::new(0.0, 1.0, 0.0, 0.1).is_err());
        assert!(Aperture::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert_eq!(
            Aperture::linear(1.0, 0.1).unwrap().dimensionality(),
            Dimensionality::Linear
        );
        let a = Aperture::in_wavelengths(16.0, 0.0, 0.0, 0.1).unwrap();
        assert_eq!(a.x_wavelengths(), 16.0);
    }

    #[test]
    fn amplitude_factor_matches_isotropic_constant() {
        let k = 5.0;
        let f = SpectralFactor::from_amplitude("iso", k, move |_, _, _| isotropic_amplitude(k));
        assert!((f.gain(0.3, 0.2, Branch::Minus) - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn dispersion_relation(r in 0.0f64..1.0, t in 0.0f64..std::f64::consts::TAU, k in 0.1f64..100.0) {
            let (kx, ky) = (k * r * t.cos(), k * r * t.sin());
            let g = gamma(kx, ky, k).unwrap();
            prop_assert!(g >= 0.0 && g <= k);
            prop_assert!((g * g + kx * kx + ky * ky - k * k).abs() <= 1e-12 * k * k);
        }

        #[test]
        fn psd_is_radial(r in 0.0f64..0.999, t1 in 0.0f64..std::f64::consts::TAU, t2 in 0.0f64..std::f64::consts::TAU, k in 0.1f64..50.0) {
            let a = isotropic_psd(k * r * t1.cos(), k * r * t1.sin(), k);
            let b = isotropic_psd(k * r * t2.cos(), k * r * t2.sin(), k);
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }
    }
}
