//! Random field synthesis from the plane-wave series
//! `h(x, y, z) = sum_{(l, m)} H_lm(z) exp(j 2 pi (l x / Lx + m y / Ly))`
//! with `H_lm(z) = H+ exp(j gamma z) + H- exp(-j gamma z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamId;
use crate::spectral::{Aperture, Dimensionality, WavenumberLattice};

/// How many half-spaces contribute plane waves. With `One`, every
/// downgoing coefficient is forced to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfSpaces {
    One,
    Two,
}

impl HalfSpaces {
    pub fn from_count(n: u8) -> Result<Self> {
        match n {
            1 => Ok(HalfSpaces::One),
            2 => Ok(HalfSpaces::Two),
            other => Err(Error::invalid(format!("half_spaces must be 1 or 2, got {other}"))),
        }
    }

    pub fn count(self) -> u8 {
        match self {
            HalfSpaces::One => 1,
            HalfSpaces::Two => 2,
        }
    }
}

/// Uniform sample grid anchored at the aperture corner. Points are stored
/// with x varying fastest, then y, then z.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    aperture: Aperture,
    spacing: f64,
    counts: [usize; 3],
    points: Vec<[f64; 3]>,
}

impl SpatialGrid {
    /// Samples every occupied axis at `{0, d, ..., (n - 1) d}` with
    /// `n = round(L / d)` (at least one point).
    pub fn new(aperture: &Aperture, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::invalid(format!("grid spacing must be positive, got {spacing}")));
        }
        let n = |len: f64| {
            if len == 0.0 {
                1
            } else {
                ((len / spacing).round() as usize).max(1)
            }
        };
        let counts = [n(aperture.lx()), n(aperture.ly()), n(aperture.lz())];
        let mut points = Vec::with_capacity(counts.iter().product());
        for iz in 0..counts[2] {
            for iy in 0..counts[1] {
                for ix in 0..counts[0] {
                    points.push([ix as f64 * spacing, iy as f64 * spacing, iz as f64 * spacing]);
                }
            }
        }
        Ok(SpatialGrid {
            aperture: *aperture,
            spacing,
            counts,
            points,
        })
    }

    pub fn aperture(&self) -> &Aperture {
        &self.aperture
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `(Nx, Ny, Nz)`.
    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn dimensionality(&self) -> Dimensionality {
        self.aperture.dimensionality()
    }

    /// Sample coordinates along one axis (0 = x, 1 = y, 2 = z).
    pub fn axis(&self, axis: usize) -> Vec<f64> {
        (0..self.counts[axis]).map(|i| i as f64 * self.spacing).collect()
    }
}

/// One realization of the plane-wave coefficients, in lattice order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
    pub stream: Option<StreamId>,
}

impl ModeCoefficients {
    pub fn zeros(n: usize) -> Self {
        ModeCoefficients {
            plus: vec![Complex64::new(0.0, 0.0); n],
            minus: vec![Complex64::new(0.0, 0.0); n],
            stream: None,
        }
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }

    /// Zeroes the downgoing coefficients when only one half-space radiates.
    pub fn restrict(&mut self, half_spaces: HalfSpaces) {
        if half_spaces == HalfSpaces::One {
            self.minus.fill(Complex64::new(0.0, 0.0));
        }
    }
}

fn circular_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    if variance == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let scale = (variance / 2.0).sqrt();
    Complex64::new(re * scale, im * scale)
}

/// Draws `H+` and `H-` for every mode, in lattice order, as circularly
/// symmetric complex Gaussians with the lattice variances. Each mode
/// consumes four normals (re+, im+, re-, im-) even when a variance is zero.
pub fn draw_coefficients<R: Rng + ?Sized>(lattice: &WavenumberLattice, rng: &mut R) -> ModeCoefficients {
    let n = lattice.len();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for mode in lattice.modes() {
        plus.push(circular_gaussian(rng, mode.var_plus));
        minus.push(circular_gaussian(rng, mode.var_minus));
    }
    ModeCoefficients {
        plus,
        minus,
        stream: None,
    }
}

/// [`draw_coefficients`] on the stream identified by `id`, recording it.
pub fn draw_coefficients_from(lattice: &WavenumberLattice, id: StreamId) -> ModeCoefficients {
    let mut rng = id.rng();
    let mut c = draw_coefficients(lattice, &mut rng);
    c.stream = Some(id);
    c
}

/// `n` independent unit-variance circularly symmetric complex Gaussians.
pub fn iid_rayleigh<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::invalid("i.i.d. Rayleigh vector needs n >= 1"));
    }
    Ok((0..n).map(|_| circular_gaussian(rng, 1.0)).collect())
}

fn cis(phase: f64) -> Complex64 {
    let (s, c) = phase.sin_cos();
    Complex64::new(c, s)
}

/// Precomputed separable phase tables for repeated synthesis of one
/// lattice on one grid.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    counts: [usize; 3],
    z: Vec<f64>,
    ell_min: i64,
    m_min: i64,
    /// `exp(j 2 pi l x / Lx)`, row per distinct `l`.
    ex: Vec<Complex64>,
    /// `exp(j 2 pi m y / Ly)`, row per distinct `m`.
    ey: Vec<Complex64>,
    ells: Vec<i64>,
    ms: Vec<i64>,
    gammas: Vec<f64>,
    /// Half-open ranges of modes sharing the same `l`.
    groups: Vec<(usize, usize)>,
}

impl Synthesizer {
    pub fn new(lattice: &WavenumberLattice, grid: &SpatialGrid) -> Result<Self> {
        let la = lattice.aperture();
        let ga = grid.aperture();
        if la.lx() != ga.lx() || la.ly() != ga.ly() || la.lambda() != ga.lambda() {
            return Err(Error::invalid("lattice and grid were built for different apertures"));
        }
        if (lattice.dimensionality() == Dimensionality::Linear) != (grid.dimensionality() == Dimensionality::Linear) {
            return Err(Error::invalid(format!(
                "dimensionality mismatch: {} lattice on a {} grid",
                lattice.dimensionality(),
                grid.dimensionality()
            )));
        }
        let modes = lattice.modes();
        let ells: Vec<i64> = modes.iter().map(|p| p.ell).collect();
        let ms: Vec<i64> = modes.iter().map(|p| p.m).collect();
        let gammas: Vec<f64> = modes.iter().map(|p| p.gamma).collect();
        let ell_min = *ells.iter().min().expect("lattice is never empty");
        let ell_max = *ells.iter().max().expect("lattice is never empty");
        let m_min = *ms.iter().min().expect("lattice is never empty");
        let m_max = *ms.iter().max().expect("lattice is never empty");

        let xs = grid.axis(0);
        let ys = grid.axis(1);
        let mut ex = Vec::with_capacity((ell_max - ell_min + 1) as usize * xs.len());
        for ell in ell_min..=ell_max {
            ex.extend(xs.iter().map(|&x| cis(2.0 * PI * ell as f64 * x / la.lx())));
        }
        let mut ey = Vec::with_capacity((m_max - m_min + 1) as usize * ys.len());
        for m in m_min..=m_max {
            if la.ly() == 0.0 {
                ey.extend(ys.iter().map(|_| Complex64::new(1.0, 0.0)));
            } else {
                ey.extend(ys.iter().map(|&y| cis(2.0 * PI * m as f64 * y / la.ly())));
            }
        }

        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=ells.len() {
            if i == ells.len() || ells[i] != ells[start] {
                groups.push((start, i));
                start = i;
            }
        }

        Ok(Synthesizer {
            counts: grid.counts(),
            z: grid.axis(2),
            ell_min,
            m_min,
            ex,
            ey,
            ells,
            ms,
            gammas,
            groups,
        })
    }

    /// Number of field samples produced per realization.
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn synthesize(&self, coeffs: &ModeCoefficients) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        self.synthesize_into(coeffs, &mut out)?;
        Ok(out)
    }

    /// Writes one realization into `out` (length = grid size).
    pub fn synthesize_into(&self, coeffs: &ModeCoefficients, out: &mut [Complex64]) -> Result<()> {
        if coeffs.len() != self.ells.len() || coeffs.minus.len() != self.ells.len() {
            return Err(Error::invalid(format!(
                "expected {} coefficient pairs, got {}",
                self.ells.len(),
                coeffs.len()
            )));
        }
        if out.len() != self.len() {
            return Err(Error::invalid("output buffer does not match the grid size"));
        }
        let [nx, ny, _] = self.counts;
        let plane_len = nx * ny;
        let mut at_z = vec![Complex64::new(0.0, 0.0); self.ells.len()];
        let mut row = vec![Complex64::new(0.0, 0.0); ny];
        for (iz, &z) in self.z.iter().enumerate() {
            for (i, c) in at_z.iter_mut().enumerate() {
                *c = if z == 0.0 {
                    coeffs.plus[i] + coeffs.minus[i]
                } else {
                    let g = self.gammas[i] * z;
                    coeffs.plus[i] * cis(g) + coeffs.minus[i] * cis(-g)
                };
            }
            let plane = &mut out[iz * plane_len..(iz + 1) * plane_len];
            plane.fill(Complex64::new(0.0, 0.0));
            for &(lo, hi) in &self.groups {
                row.fill(Complex64::new(0.0, 0.0));
                for (i, &c) in at_z.iter().enumerate().take(hi).skip(lo) {
                    let ey = &self.ey[(self.ms[i] - self.m_min) as usize * ny..][..ny];
                    for (r, &e) in row.iter_mut().zip(ey) {
                        *r += c * e;
                    }
                }
                let ex = &self.ex[(self.ells[lo] - self.ell_min) as usize * nx..][..nx];
                for (iy, &r) in row.iter().enumerate() {
                    let line = &mut plane[iy * nx..(iy + 1) * nx];
                    for (h, &e) in line.iter_mut().zip(ex) {
                        *h += r * e;
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_grid(grid: &SpatialGrid, want: Dimensionality, what: &str) -> Result<()> {
    if grid.dimensionality() != want {
        return Err(Error::invalid(format!(
            "{what} synthesis needs a {want} grid, got {}",
            grid.dimensionality()
        )));
    }
    Ok(())
}

/// Field samples along a segment: `h(x) = sum_l (H+_l + H-_l) exp(j 2 pi l x / Lx)`.
pub fn synthesize_1d(
    lattice: &WavenumberLattice,
    coeffs: &ModeCoefficients,
    grid: &SpatialGrid,
) -> Result<Vec<Complex64>> {
    check_grid(grid, Dimensionality::Linear, "1D")?;
    Synthesizer::new(lattice, grid)?.synthesize(coeffs)
}

/// Field samples on the `z = 0` plane.
pub fn synthesize_2d(
    lattice: &WavenumberLattice,
    coeffs: &ModeCoefficients,
    grid: &SpatialGrid,
) -> Result<Vec<Complex64>> {
    check_grid(grid, Dimensionality::Planar, "2D")?;
    Synthesizer::new(lattice, grid)?.synthesize(coeffs)
}

/// Field samples in a volume, one plane per z sample.
pub fn synthesize_3d(
    lattice: &WavenumberLattice,
    coeffs: &ModeCoefficients,
    grid: &SpatialGrid,
) -> Result<Vec<Complex64>> {
    check_grid(grid, Dimensionality::Volumetric, "3D")?;
    Synthesizer::new(lattice, grid)?.synthesize(coeffs)
}

/// Direct evaluation of the series at an arbitrary point, including points
/// outside the aperture.
pub fn evaluate_at(lattice: &WavenumberLattice, coeffs: &ModeCoefficients, x: f64, y: f64, z: f64) -> Complex64 {
    let a = lattice.aperture();
    let planar = a.ly() > 0.0;
    lattice
        .modes()
        .iter()
        .zip(coeffs.plus.iter().zip(&coeffs.minus))
        .map(|(p, (&hp, &hm))| {
            let mut phase = p.ell as f64 * x / a.lx();
            if planar {
                phase += p.m as f64 * y / a.ly();
            }
            let hz = hp * cis(p.gamma * z) + hm * cis(-p.gamma * z);
            hz * cis(2.0 * PI * phase)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Namespace;
    use crate::spectral::{build_lattice, SpectralFactor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lattice(a: &Aperture) -> WavenumberLattice {
        build_lattice(a, &SpectralFactor::isotropic()).unwrap()
    }

    #[test]
    fn grid_counts_follow_rounding() {
        let a = Aperture::in_wavelengths(16.0, 0.0, 0.0, 0.1).unwrap();
        let g = SpatialGrid::new(&a, 0.025).unwrap();
        assert_eq!(g.counts(), [64, 1, 1]);
        let a = Aperture::in_wavelengths(8.0, 8.0, 1.0, 0.1).unwrap();
        let g = SpatialGrid::new(&a, 0.025).unwrap();
        assert_eq!(g.counts(), [32, 32, 4]);
        assert_eq!(g.len(), 4096);
        for p in g.points() {
            assert!(p[0] <= a.lx() && p[1] <= a.ly() && p[2] <= a.lz());
        }
        assert!(SpatialGrid::new(&a, 0.0).is_err());
    }

    #[test]
    fn zero_variance_gives_exact_zero() {
        let a = Aperture::in_wavelengths(4.0, 4.0, 0.0, 1.0).unwrap();
        let lat = lattice(&a);
        let c = draw_coefficients_from(&lat, StreamId::new(1, Namespace::Field, 0));
        // (4, 0) owns a cell that only touches the disk at one point.
        let i = lat.index_of(4, 0).unwrap();
        assert_eq!(lat.modes()[i].var_plus, 0.0);
        assert_eq!(c.plus[i], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_mode_1d_has_unit_modulus() {
        let a = Aperture::in_wavelengths(4.0, 0.0, 0.0, 1.0).unwrap();
        let lat = lattice(&a);
        let grid = SpatialGrid::new(&a, 0.25).unwrap();
        let mut c = ModeCoefficients::zeros(lat.len());
        c.plus[lat.index_of(3, 0).unwrap()] = Complex64::new(1.0, 0.0);
        let h = synthesize_1d(&lat, &c, &grid).unwrap();
        assert!(h.iter().all(|v| (v.norm() - 1.0).abs() < 1e-13));
        let zero = synthesize_1d(&lat, &ModeCoefficients::zeros(lat.len()), &grid).unwrap();
        assert!(zero.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn central_mode_2d_is_constant() {
        let a = Aperture::in_wavelengths(3.0, 2.0, 0.0, 1.0).unwrap();
        let lat = lattice(&a);
        let grid = SpatialGrid::new(&a, 0.25).unwrap();
        let mut c = ModeCoefficients::zeros(lat.len());
        c.plus[lat.index_of(0, 0).unwrap()] = Complex64::new(1.0, 0.0);
        let h = synthesize_2d(&lat, &c, &grid).unwrap();
        assert!(h.iter().all(|v| (*v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn fast_path_matches_direct_sum() {
        let a = Aperture::in_wavelengths(3.0, 2.5, 1.0, 1.0).unwrap();
        let lat = lattice(&a);
        let grid = SpatialGrid::new(&a, 0.25).unwrap();
        let c = draw_coefficients(&lat, &mut ChaCha8Rng::seed_from_u64(9));
        let h = synthesize_3d(&lat, &c, &grid).unwrap();
        let scale = h.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (p, v) in grid.points().iter().zip(&h) {
            let d = evaluate_at(&lat, &c, p[0], p[1], p[2]);
            assert!((d - v).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn series_is_periodic() {
        let a = Aperture::in_wavelengths(3.0, 2.0, 0.0, 1.0).unwrap();
        let lat = lattice(&a);
        let c = draw_coefficients(&lat, &mut ChaCha8Rng::seed_from_u64(2));
        for &(x, y) in &[(0.3, 0.7), (1.1, 0.0), (2.9, 1.9)] {
            let h0 = evaluate_at(&lat, &c, x, y, 0.0);
            let hx = evaluate_at(&lat, &c, x + a.lx(), y, 0.0);
            let hy = evaluate_at(&lat, &c, x, y + a.ly(), 0.0);
            assert!((h0 - hx).norm() < 1e-10 && (h0 - hy).norm() < 1e-10);
        }
    }

    #[test]
    fn volumetric_single_plane_matches_planar() {
        let planar = Aperture::in_wavelengths(4.0, 3.0, 0.0, 1.0).unwrap();
        let thin = Aperture::in_wavelengths(4.0, 3.0, 0.1, 1.0).unwrap();
        let lat2 = lattice(&planar);
        let lat3 = lattice(&thin);
        let g2 = SpatialGrid::new(&planar, 0.25).unwrap();
        let g3 = SpatialGrid::new(&thin, 0.25).unwrap();
        assert_eq!(g3.counts()[2], 1);
        let id = StreamId::new(11, Namespace::Field, 5);
        let h2 = synthesize_2d(&lat2, &draw_coefficients_from(&lat2, id), &g2).unwrap();
        let h3 = synthesize_3d(&lat3, &draw_coefficients_from(&lat3, id), &g3).unwrap();
        assert_eq!(h2, h3);
    }

    #[test]
    fn plane_wave_advances_along_z() {
        let a = Aperture::in_wavelengths(4.0, 4.0, 2.0, 1.0).unwrap();
        let lat = lattice(&a);
        let grid = SpatialGrid::new(&a, 0.25).unwrap();
        let [nx, ny, nz] = grid.counts();
        let mut c = ModeCoefficients::zeros(lat.len());
        c.plus[lat.index_of(0, 0).unwrap()] = Complex64::new(1.0, 0.0);
        let h = synthesize_3d(&lat, &c, &grid).unwrap();
        let step = cis(a.kappa() * grid.spacing());
        let plane = nx * ny;
        for iz in 1..nz {
            for i in 0..plane {
                assert!((h[iz * plane + i] - h[(iz - 1) * plane + i] * step).norm() < 1e-12);
            }
        }
        // Half a wavelength apart: z = 0 and z = 0.5 (two quarter-wave steps).
        for i in 0..plane {
            assert!((h[2 * plane + i] + h[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn dimensionality_mismatch_is_rejected() {
        let a1 = Aperture::in_wavelengths(4.0, 0.0, 0.0, 1.0).unwrap();
        let a2 = Aperture::in_wavelengths(4.0, 4.0, 0.0, 1.0).unwrap();
        let lat2 = lattice(&a2);
        let g1 = SpatialGrid::new(&a1, 0.25).unwrap();
        let g2 = SpatialGrid::new(&a2, 0.25).unwrap();
        let c = ModeCoefficients::zeros(lat2.len());
        assert!(synthesize_1d(&lat2, &c, &g1).is_err());
        assert!(synthesize_3d(&lat2, &c, &g2).is_err());
        assert!(synthesize_2d(&lat2, &ModeCoefficients::zeros(3), &g2).is_err());
    }

    #[test]
    fn one_half_space_zeroes_minus() {
        let a = Aperture::in_wavelengths(2.0, 2.0, 0.0, 1.0).unwrap();
        let lat = lattice(&a);
        let mut c = draw_coefficients(&lat, &mut ChaCha8Rng::seed_from_u64(4));
        let plus = c.plus.clone();
        c.restrict(HalfSpaces::One);
        assert_eq!(c.plus, plus);
        assert!(c.minus.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn iid_rayleigh_rejects_empty() {
        let mut r = ChaCha8Rng::seed_from_u64(0);
        assert!(iid_rayleigh(0, &mut r).is_err());
        let v = iid_rayleigh(1, &mut r).unwrap();
        assert!(v[0].re.is_finite() && v[0].im.is_finite());
    }
}
