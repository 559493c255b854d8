use rayon::prelude::*;
use serde::Serialize;

use super::variance::{cell_power, Cell};
use super::{Aperture, Branch, CellKind, Dimensionality, SpectralFactor};
use crate::error::Result;

/// Relative slack in the ellipse test, absorbing rounding in `L / lambda`.
const MEMBERSHIP_SLACK: f64 = 1e-12;

/// One resolvable plane-wave mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeMode {
    pub ell: i64,
    pub m: i64,
    /// z wavenumber `gamma(2 pi ell / Lx, 2 pi m / Ly)` in rad/m.
    pub gamma: f64,
    pub var_plus: f64,
    pub var_minus: f64,
    /// The lattice point lies on the circle, so `gamma == 0` and the two
    /// z exponentials coincide.
    pub on_circle: bool,
}

impl LatticeMode {
    pub fn variance(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.var_plus,
            Branch::Minus => self.var_minus,
        }
    }
}

/// The finite set of plane-wave modes an aperture can resolve, sorted by
/// `(ell, m)`.
#[derive(Debug, Clone, Serialize)]
pub struct WavenumberLattice {
    aperture: Aperture,
    dimensionality: Dimensionality,
    factor: String,
    modes: Vec<LatticeMode>,
    folded: [f64; 2],
}

impl WavenumberLattice {
    pub fn aperture(&self) -> &Aperture {
        &self.aperture
    }

    pub fn dimensionality(&self) -> Dimensionality {
        self.dimensionality
    }

    pub fn factor_label(&self) -> &str {
        &self.factor
    }

    pub fn modes(&self) -> &[LatticeMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn index_of(&self, ell: i64, m: i64) -> Option<usize> {
        self.modes.binary_search_by(|p| (p.ell, p.m).cmp(&(ell, m))).ok()
    }

    pub fn get(&self, ell: i64, m: i64) -> Option<&LatticeMode> {
        self.index_of(ell, m).map(|i| &self.modes[i])
    }

    /// Sum of `var_plus + var_minus` over all modes.
    pub fn total_variance(&self) -> f64 {
        self.modes.iter().map(|p| p.var_plus + p.var_minus).sum()
    }

    pub fn branch_variance(&self, branch: Branch) -> f64 {
        self.modes.iter().map(|p| p.variance(branch)).sum()
    }

    /// Power (plus, minus) that came from cells without a lattice point of
    /// their own and was reassigned to a neighbouring mode.
    pub fn folded_power(&self) -> [f64; 2] {
        self.folded
    }

    /// Number of modes whose lattice point lies on the circle.
    pub fn on_circle_count(&self) -> usize {
        self.modes.iter().filter(|p| p.on_circle).count()
    }
}

/// Whether `(ell, m)` belongs to the lattice ellipse of `aperture`.
///
/// For planar and volumetric apertures this is
/// `(ell lambda / Lx)^2 + (m lambda / Ly)^2 <= 1`. A segment keeps
/// `m = 0` and the half-open range `ell in [-floor(Lx/lambda), ceil(Lx/lambda) - 1]`.
pub fn is_member(aperture: &Aperture, ell: i64, m: i64) -> bool {
    let rx = aperture.x_wavelengths();
    match aperture.dimensionality() {
        Dimensionality::Linear => m == 0 && ell >= -(rx.floor() as i64) && ell < rx.ceil() as i64,
        _ => normalized_radius_sq(aperture, ell, m) <= 1.0 + MEMBERSHIP_SLACK,
    }
}

fn normalized_radius_sq(aperture: &Aperture, ell: i64, m: i64) -> f64 {
    let u = ell as f64 / aperture.x_wavelengths();
    let v = match aperture.dimensionality() {
        Dimensionality::Linear => 0.0,
        _ => m as f64 / aperture.y_wavelengths(),
    };
    u * u + v * v
}

fn index_bounds(aperture: &Aperture) -> (i64, i64) {
    let bx = aperture.x_wavelengths().ceil() as i64;
    let by = match aperture.dimensionality() {
        Dimensionality::Linear => 0,
        _ => aperture.y_wavelengths().ceil() as i64,
    };
    (bx, by)
}

/// Lattice indices only, sorted by `(ell, m)`. Never empty: `(0, 0)` is
/// always a member.
pub fn lattice_indices(aperture: &Aperture) -> Vec<(i64, i64)> {
    let (bx, by) = index_bounds(aperture);
    let mut out = Vec::new();
    for ell in -bx..=bx {
        for m in -by..=by {
            if is_member(aperture, ell, m) {
                out.push((ell, m));
            }
        }
    }
    out
}

/// Builds the lattice and computes both branch variances of every mode.
///
/// Each mode first receives the power of its own cell
/// `[ell, ell+1] x [m, m+1]` (clipped to the disk). Cells that overlap the
/// disk but whose corner index is not a lattice member hand their power to
/// the member at the cell corner nearest the origin, so the lattice carries
/// the whole field power.
pub fn build_lattice(aperture: &Aperture, factor: &SpectralFactor) -> Result<WavenumberLattice> {
    let kappa = aperture.kappa();
    let indices = lattice_indices(aperture);

    let powers: Vec<[f64; 2]> = indices
        .par_iter()
        .map(|&(ell, m)| {
            let cell = Cell::for_index(aperture, ell, m);
            let p = cell_power(&cell, kappa, factor, Branch::Plus)
                .map_err(|e| e.context(format!("variance of mode ({ell}, {m})")))?;
            let q = cell_power(&cell, kappa, factor, Branch::Minus)
                .map_err(|e| e.context(format!("variance of mode ({ell}, {m})")))?;
            Ok([p, q])
        })
        .collect::<Result<_>>()?;

    let mut modes: Vec<LatticeMode> = indices
        .iter()
        .zip(&powers)
        .map(|(&(ell, m), &[p, q])| {
            let rsq = normalized_radius_sq(aperture, ell, m);
            let on_circle = rsq >= 1.0 - MEMBERSHIP_SLACK;
            let gamma = if on_circle { 0.0 } else { kappa * (1.0 - rsq).sqrt() };
            LatticeMode {
                ell,
                m,
                gamma,
                var_plus: p,
                var_minus: q,
                on_circle,
            }
        })
        .collect();

    let mut folded = [0.0; 2];
    for (target, power) in orphan_cells(aperture, &modes, factor)? {
        modes[target].var_plus += power[0];
        modes[target].var_minus += power[1];
        folded[0] += power[0];
        folded[1] += power[1];
    }

    Ok(WavenumberLattice {
        aperture: *aperture,
        dimensionality: aperture.dimensionality(),
        factor: factor.label().to_string(),
        modes,
        folded,
    })
}

/// Cells with positive overlap with the disk whose index is not a member,
/// paired with the position of the mode that absorbs them.
fn orphan_cells(aperture: &Aperture, modes: &[LatticeMode], factor: &SpectralFactor) -> Result<Vec<(usize, [f64; 2])>> {
    let kappa = aperture.kappa();
    let (bx, by) = index_bounds(aperture);
    let linear = aperture.dimensionality() == Dimensionality::Linear;
    let q_range = if linear { 0..=0 } else { -by - 1..=by };

    let mut candidates = Vec::new();
    for p in -bx - 1..=bx {
        for q in q_range.clone() {
            if is_member(aperture, p, q) {
                continue;
            }
            let cell = Cell::for_index(aperture, p, q);
            if cell.kind() != CellKind::Outside {
                candidates.push((p, q, cell));
            }
        }
    }

    let find = |ell: i64, m: i64| modes.binary_search_by(|x| (x.ell, x.m).cmp(&(ell, m))).ok();
    candidates
        .into_par_iter()
        .map(|(p, q, cell)| {
            let plus = cell_power(&cell, kappa, factor, Branch::Plus)?;
            let minus = cell_power(&cell, kappa, factor, Branch::Minus)?;
            let toward_origin = |i: i64| if i >= 0 { i } else { i + 1 };
            let (tl, tm) = (toward_origin(p), if linear { 0 } else { toward_origin(q) });
            let target = find(tl, tm).unwrap_or_else(|| nearest_mode(aperture, modes, p, q));
            Ok((target, [plus, minus]))
        })
        .collect()
}

fn nearest_mode(aperture: &Aperture, modes: &[LatticeMode], p: i64, q: i64) -> usize {
    let rx = aperture.x_wavelengths();
    let ry = match aperture.dimensionality() {
        Dimensionality::Linear => 1.0,
        _ => aperture.y_wavelengths(),
    };
    let dist = |x: &LatticeMode| {
        let du = (x.ell - p) as f64 / rx;
        let dv = (x.m - q) as f64 / ry;
        du * du + dv * dv
    };
    modes
        .iter()
        .enumerate()
        .min_by(|a, b| dist(a.1).total_cmp(&dist(b.1)))
        .map(|(i, _)| i)
        .expect("lattice always contains (0, 0)")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::mode_variance;

    #[test]
    fn linear_sixteen_wavelengths() {
        let a = Aperture::in_wavelengths(16.0, 0.0, 0.0, 0.1).unwrap();
        let idx = lattice_indices(&a);
        assert_eq!(idx.len(), 32);
        assert_eq!(idx.first(), Some(&(-16, 0)));
        assert_eq!(idx.last(), Some(&(15, 0)));
    }

    #[test]
    fn linear_non_integer_and_tiny() {
        let a = Aperture::in_wavelengths(16.5, 0.0, 0.0, 1.0).unwrap();
        let idx = lattice_indices(&a);
        assert_eq!((idx[0].0, idx.last().unwrap().0), (-16, 16));
        let a = Aperture::in_wavelengths(0.3, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(lattice_indices(&a), vec![(0, 0)]);
    }

    #[test]
    fn planar_one_wavelength_has_five_modes() {
        let a = Aperture::in_wavelengths(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(lattice_indices(&a), vec![(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)]);
    }

    #[test]
    fn planar_sixteen_wavelengths_brute_force_count() {
        let a = Aperture::in_wavelengths(16.0, 16.0, 0.0, 0.1).unwrap();
        let mut brute = 0;
        for l in -16i64..=16 {
            for m in -16i64..=16 {
                if l * l + m * m <= 256 {
                    brute += 1;
                }
            }
        }
        let n = lattice_indices(&a).len();
        assert_eq!(n, brute);
        let area = std::f64::consts::PI * 256.0;
        assert!((n as f64 / area - 1.0).abs() < 0.02);
    }

    #[test]
    fn tiny_planar_aperture_keeps_origin() {
        let a = Aperture::in_wavelengths(0.2, 0.3, 0.0, 1.0).unwrap();
        let lat = build_lattice(&a, &SpectralFactor::isotropic()).unwrap();
        assert_eq!(lat.len(), 1);
        assert!((lat.total_variance() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn folding_conserves_power_and_keeps_member_cells() {
        let a = Aperture::in_wavelengths(4.0, 4.0, 0.0, 1.0).unwrap();
        let f = SpectralFactor::isotropic();
        let lat = build_lattice(&a, &f).unwrap();
        assert_eq!(lat.len(), 49);
        assert!((lat.total_variance() - 1.0).abs() < 1e-8, "{}", lat.total_variance());
        let folded = lat.folded_power();
        assert!(folded[0] > 0.0 && (folded[0] - folded[1]).abs() < 1e-12);
        // Interior modes away from the third-quadrant rim keep their own cell.
        let own = mode_variance(1, 1, &a, &f, Branch::Plus).unwrap();
        assert_eq!(lat.get(1, 1).unwrap().var_plus, own);
        for p in lat.modes() {
            assert_eq!(p.var_plus, p.var_minus);
        }
    }

    #[test]
    fn on_circle_modes_are_flagged() {
        let a = Aperture::in_wavelengths(5.0, 5.0, 0.0, 1.0).unwrap();
        let lat = build_lattice(&a, &SpectralFactor::isotropic()).unwrap();
        let p = lat.get(3, 4).unwrap();
        assert!(p.on_circle);
        assert_eq!(p.gamma, 0.0);
        assert_eq!(lat.get(0, 0).unwrap().gamma, a.kappa());
        // (±5,0), (0,±5), (±3,±4), (±4,±3)
        assert_eq!(lat.on_circle_count(), 12);
    }
}
