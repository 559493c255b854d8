//! Power carried by one wavenumber cell.
//!
//! All integrals are carried out in coordinates normalised by `kappa`, where
//! the propagating region is the unit disk and the isotropic density (per
//! branch, already divided by `(2 pi)^2`) is `1 / (4 pi sqrt(1 - r^2))`.
//! Over the whole disk this integrates to 1/2 per branch.
//!
//! Cells well inside the disk use nested adaptive Gauss-Kronrod in
//! Cartesian coordinates. Cells that reach the circle are integrated in
//! polar coordinates after the substitution `s = sqrt(1 - r^2)`, which
//! turns `r dr / sqrt(1 - r^2)` into `ds` and removes the singularity.

use std::cell::RefCell;
use std::f64::consts::PI;

use super::{is_member, Aperture, Branch, Dimensionality, SpectralFactor};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureError, Tolerance};

/// Absolute accuracy requested for each cell, in units of total field power.
pub const CELL_TOLERANCE: f64 = 1e-10;

/// Interior cells whose far corner is closer to the circle than this are
/// routed to the polar integrator as well.
const NEAR_CIRCLE: f64 = 1e-3;

const MAX_SEGMENTS: usize = 400;

/// Where a cell sits relative to the propagating disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    /// No overlap of positive area with the closed disk.
    Outside,
    /// Entirely inside the open disk.
    Interior,
    /// Straddles the circle `kx^2 + ky^2 = kappa^2`.
    Boundary,
}

/// Cell rectangle in normalised wavenumber coordinates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cell {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Cell {
    /// Cell `[ell, ell+1] x [m, m+1]` of the rescaled lattice. For a segment
    /// the y extent collapses onto the full disk chord.
    pub(crate) fn for_index(aperture: &Aperture, ell: i64, m: i64) -> Cell {
        let rx = aperture.x_wavelengths();
        let (u0, u1) = (ell as f64 / rx, (ell + 1) as f64 / rx);
        match aperture.dimensionality() {
            Dimensionality::Linear => Cell {
                u0,
                u1,
                v0: -1.0,
                v1: 1.0,
            },
            _ => {
                let ry = aperture.y_wavelengths();
                Cell {
                    u0,
                    u1,
                    v0: m as f64 / ry,
                    v1: (m + 1) as f64 / ry,
                }
            }
        }
    }

    fn nearest_sq(&self) -> f64 {
        let u = 0.0f64.clamp(self.u0, self.u1);
        let v = 0.0f64.clamp(self.v0, self.v1);
        u * u + v * v
    }

    fn farthest_sq(&self) -> f64 {
        let u = self.u0.abs().max(self.u1.abs());
        let v = self.v0.abs().max(self.v1.abs());
        u * u + v * v
    }

    pub(crate) fn kind(&self) -> CellKind {
        if self.nearest_sq() >= 1.0 {
            CellKind::Outside
        } else if self.farthest_sq() < 1.0 {
            CellKind::Interior
        } else {
            CellKind::Boundary
        }
    }
}

/// Classifies the cell of mode `(ell, m)` against the propagating disk.
pub fn cell_kind(aperture: &Aperture, ell: i64, m: i64) -> CellKind {
    Cell::for_index(aperture, ell, m).kind()
}

/// Power of the spectrum `S_h^±` over the cell of index `(ell, m)`, clipped
/// to the propagating disk and divided by `(2 pi)^2`.
///
/// Unlike [`mode_variance`] this accepts any index, including cells whose
/// lattice point lies outside the ellipse.
pub fn cell_variance(ell: i64, m: i64, aperture: &Aperture, factor: &SpectralFactor, branch: Branch) -> Result<f64> {
    if aperture.dimensionality() == Dimensionality::Linear && m != 0 {
        return Err(Error::invalid("a linear aperture only has modes with m = 0"));
    }
    let cell = Cell::for_index(aperture, ell, m);
    cell_power(&cell, aperture.kappa(), factor, branch)
        .map_err(|e| e.context(format!("variance of cell ({ell}, {m}), branch {branch:?}")))
}

/// Variance of the Fourier coefficient of mode `(ell, m)` for one branch.
///
/// The mode must belong to the lattice ellipse of `aperture`.
pub fn mode_variance(ell: i64, m: i64, aperture: &Aperture, factor: &SpectralFactor, branch: Branch) -> Result<f64> {
    if !is_member(aperture, ell, m) {
        return Err(Error::invalid(format!(
            "mode ({ell}, {m}) is outside the lattice ellipse"
        )));
    }
    cell_variance(ell, m, aperture, factor, branch)
}

pub(crate) fn cell_power(cell: &Cell, kappa: f64, factor: &SpectralFactor, branch: Branch) -> Result<f64> {
    let kind = cell.kind();
    let near = kind == CellKind::Interior && cell.farthest_sq() > (1.0 - NEAR_CIRCLE).powi(2);
    let value = match kind {
        CellKind::Outside => return Ok(0.0),
        CellKind::Interior if !near => cartesian(cell, kappa, factor, branch),
        _ => polar(cell, kappa, factor, branch),
    };
    let value = value.map_err(|e| Error::numerical(e.to_string(), e.estimate()))?;
    if value < -CELL_TOLERANCE {
        return Err(Error::numerical(
            "negative cell power: the spectral factor must be non-negative",
            value.abs(),
        ));
    }
    Ok(value.max(0.0))
}

fn checked_gain(factor: &SpectralFactor, kx: f64, ky: f64, branch: Branch) -> f64 {
    let g = factor.gain(kx, ky, branch);
    if g >= 0.0 {
        g
    } else {
        f64::NAN
    }
}

fn cartesian(cell: &Cell, kappa: f64, factor: &SpectralFactor, branch: Branch) -> Result<f64, QuadratureError> {
    let inner_failure: RefCell<Option<QuadratureError>> = RefCell::new(None);
    let inner_tol = Tolerance::absolute(CELL_TOLERANCE / (4.0 * (cell.u1 - cell.u0)));
    let outer = |u: f64| {
        let a_sq = 1.0 - u * u;
        let density = |v: f64| {
            let g = checked_gain(factor, kappa * u, kappa * v, branch);
            g / (4.0 * PI * (a_sq - v * v).sqrt())
        };
        match integrate(density, cell.v0, cell.v1, &[], inner_tol, MAX_SEGMENTS) {
            Ok(r) => r.value,
            Err(e) => {
                inner_failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = integrate(
        outer,
        cell.u0,
        cell.u1,
        &[],
        Tolerance::absolute(CELL_TOLERANCE / 2.0),
        MAX_SEGMENTS,
    );
    if let Some(e) = inner_failure.into_inner() {
        return Err(e);
    }
    result.map(|r| r.value)
}

fn polar(cell: &Cell, kappa: f64, factor: &SpectralFactor, branch: Branch) -> Result<f64, QuadratureError> {
    // Split along the axes so every piece sits in one closed quadrant, then
    // reflect the piece into the first quadrant.
    let mut us = vec![cell.u0];
    if cell.u0 < 0.0 && cell.u1 > 0.0 {
        us.push(0.0);
    }
    us.push(cell.u1);
    let mut vs = vec![cell.v0];
    if cell.v0 < 0.0 && cell.v1 > 0.0 {
        vs.push(0.0);
    }
    vs.push(cell.v1);

    let mut total = 0.0;
    for ux in us.windows(2) {
        for vy in vs.windows(2) {
            let sx = if ux[1] <= 0.0 { -1.0 } else { 1.0 };
            let sy = if vy[1] <= 0.0 { -1.0 } else { 1.0 };
            let (a0, a1) = ordered(sx * ux[0], sx * ux[1]);
            let (b0, b1) = ordered(sy * vy[0], sy * vy[1]);
            total += quadrant_piece(
                a0,
                a1,
                b0,
                b1,
                |u, v| checked_gain(factor, kappa * sx * u, kappa * sy * v, branch),
                factor.is_isotropic(),
            )?;
        }
    }
    Ok(total)
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Integral over `[a0, a1] x [b0, b1]` (first quadrant) clipped to the unit
/// disk, in `(theta, s)` coordinates.
fn quadrant_piece<G: Fn(f64, f64) -> f64>(
    a0: f64,
    a1: f64,
    b0: f64,
    b1: f64,
    gain: G,
    constant_gain: bool,
) -> Result<f64, QuadratureError> {
    if a1 <= a0 || b1 <= b0 || a0 * a0 + b0 * b0 >= 1.0 {
        return Ok(0.0);
    }
    let theta_min = b0.atan2(a1);
    let theta_max = b1.atan2(a0);

    let mut breaks = Vec::with_capacity(8);
    for &a in &[a0, a1] {
        for &b in &[b0, b1] {
            breaks.push(b.atan2(a));
        }
        if a < 1.0 {
            let b = (1.0 - a * a).sqrt();
            if b >= b0 && b <= b1 {
                breaks.push(b.atan2(a));
            }
        }
    }
    for &b in &[b0, b1] {
        if b < 1.0 {
            let a = (1.0 - b * b).sqrt();
            if a >= a0 && a <= a1 {
                breaks.push(b.atan2(a));
            }
        }
    }

    let inner_failure: RefCell<Option<QuadratureError>> = RefCell::new(None);
    let radial = |theta: f64| {
        let (sin, cos) = theta.sin_cos();
        let r_in = {
            let x = if a0 > 0.0 { a0 / cos } else { 0.0 };
            let y = if b0 > 0.0 { b0 / sin } else { 0.0 };
            x.max(y)
        };
        let r_out = {
            let x = if cos > 0.0 { a1 / cos } else { f64::INFINITY };
            let y = if sin > 0.0 { b1 / sin } else { f64::INFINITY };
            x.min(y).min(1.0)
        };
        // Also catches NaN.
        if r_in.partial_cmp(&r_out) != Some(std::cmp::Ordering::Less) {
            return 0.0;
        }
        let s_in = (1.0 - r_in * r_in).max(0.0).sqrt();
        let s_out = (1.0 - r_out * r_out).max(0.0).sqrt();
        if constant_gain {
            return (s_in - s_out) * gain(cos, sin) / (4.0 * PI);
        }
        let along = |s: f64| {
            let r = (1.0 - s * s).max(0.0).sqrt();
            gain(r * cos, r * sin)
        };
        let tol = Tolerance::absolute(CELL_TOLERANCE / (4.0 * (theta_max - theta_min)));
        match integrate(along, s_out, s_in, &[], tol, MAX_SEGMENTS) {
            Ok(r) => r.value / (4.0 * PI),
            Err(e) => {
                inner_failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = integrate(
        radial,
        theta_min,
        theta_max,
        &breaks,
        Tolerance::absolute(CELL_TOLERANCE / 4.0),
        MAX_SEGMENTS,
    );
    if let Some(e) = inner_failure.into_inner() {
        return Err(e);
    }
    result.map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso() -> SpectralFactor {
        SpectralFactor::isotropic()
    }

    /// Independent reference: inner integral in closed form
    /// (`asin`), outer by a fine composite Simpson rule.
    fn reference_cell(cell: &Cell) -> f64 {
        let (lo, hi) = (cell.u0.max(-1.0), cell.u1.min(1.0));
        if lo >= hi {
            return 0.0;
        }
        let f = |u: f64| {
            let a = (1.0 - u * u).max(0.0).sqrt();
            if a == 0.0 {
                let sgn = |v: f64| if v == 0.0 { 0.0 } else { v.signum() };
                return 0.5 * PI * (sgn(cell.v1) - sgn(cell.v0));
            }
            (cell.v1 / a).clamp(-1.0, 1.0).asin() - (cell.v0 / a).clamp(-1.0, 1.0).asin()
        };
        // Split where the inner limits start to clip, so each Simpson
        // panel sees a smooth integrand.
        let mut knots = vec![lo, hi];
        for v in [cell.v0, cell.v1] {
            let w = (1.0 - v * v).max(0.0).sqrt();
            knots.extend([-w, w].into_iter().filter(|&k| k > lo && k < hi));
        }
        knots.sort_by(f64::total_cmp);
        let n = 100_000;
        let mut total = 0.0;
        for k in knots.windows(2) {
            let h = (k[1] - k[0]) / n as f64;
            let mut s = f(k[0]) + f(k[1]);
            for i in 1..n {
                s += f(k[0] + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            total += s * h / 3.0;
        }
        total / (4.0 * PI)
    }

    #[test]
    fn full_disk_is_half_per_branch() {
        let cell = Cell {
            u0: -1.0,
            u1: 1.0,
            v0: -1.0,
            v1: 1.0,
        };
        let p = cell_power(&cell, 1.0, &iso(), Branch::Plus).unwrap();
        assert!((p - 0.5).abs() < 1e-10, "{p}");
    }

    #[test]
    fn interior_and_boundary_cells_match_reference() {
        let cells = [
            Cell {
                u0: 0.1,
                u1: 0.2,
                v0: -0.3,
                v1: -0.2,
            },
            Cell {
                u0: 0.9,
                u1: 1.0,
                v0: 0.0,
                v1: 0.1,
            },
            Cell {
                u0: -1.0,
                u1: -0.95,
                v0: -0.3,
                v1: -0.25,
            },
            Cell {
                u0: 0.68,
                u1: 0.72,
                v0: 0.68,
                v1: 0.72,
            },
            Cell {
                u0: -0.05,
                u1: 0.05,
                v0: -1.0,
                v1: 1.0,
            },
        ];
        for c in &cells {
            let got = cell_power(c, 7.0, &iso(), Branch::Minus).unwrap();
            let want = reference_cell(c);
            assert!((got - want).abs() < 2e-9, "{c:?}: {got} vs {want}");
        }
    }

    #[test]
    fn cell_outside_disk_is_zero() {
        let a = Aperture::in_wavelengths(4.0, 4.0, 0.0, 1.0).unwrap();
        assert_eq!(cell_kind(&a, 4, 0), CellKind::Outside);
        assert_eq!(cell_variance(4, 0, &a, &iso(), Branch::Plus).unwrap(), 0.0);
        assert_eq!(cell_variance(5, 5, &a, &iso(), Branch::Plus).unwrap(), 0.0);
    }

    #[test]
    fn central_mode_matches_midpoint_rule() {
        for r in [32.0, 48.0] {
            let a = Aperture::in_wavelengths(r, r, 0.0, 0.05).unwrap();
            let k = a.kappa();
            let want = PI / (k * k * a.lx() * a.ly());
            let got = mode_variance(0, 0, &a, &iso(), Branch::Plus).unwrap();
            assert!((got / want - 1.0).abs() < 0.01, "{got} vs {want}");
        }
    }

    #[test]
    fn mode_outside_ellipse_is_rejected() {
        let a = Aperture::in_wavelengths(2.0, 2.0, 0.0, 1.0).unwrap();
        assert!(mode_variance(2, 1, &a, &iso(), Branch::Plus).is_err());
    }

    #[test]
    fn linear_strip_matches_flat_collapsed_spectrum() {
        let a = Aperture::in_wavelengths(16.0, 0.0, 0.0, 0.1).unwrap();
        for ell in [-16, -3, 0, 15] {
            let v = mode_variance(ell, 0, &a, &iso(), Branch::Plus).unwrap();
            assert!((v - 1.0 / 64.0).abs() < 1e-10, "{ell}: {v}");
        }
    }

    #[test]
    fn negative_factor_is_a_numerical_failure() {
        let a = Aperture::in_wavelengths(4.0, 4.0, 0.0, 1.0).unwrap();
        let f = SpectralFactor::from_gain("bad", |_, _, _| -1.0);
        let err = cell_variance(0, 0, &a, &f, Branch::Plus).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn directional_factor_splits_branches() {
        let a = Aperture::in_wavelengths(4.0, 4.0, 0.0, 1.0).unwrap();
        let f = SpectralFactor::from_gain("up-only", |_, _, b| match b {
            Branch::Plus => 2.0,
            Branch::Minus => 0.0,
        });
        let p = cell_variance(3, 2, &a, &f, Branch::Plus).unwrap();
        let m = cell_variance(3, 2, &a, &f, Branch::Minus).unwrap();
        let iso_p = cell_variance(3, 2, &a, &iso(), Branch::Plus).unwrap();
        assert_eq!(m, 0.0);
        assert!((p - 2.0 * iso_p).abs() < 1e-9);
    }
}
