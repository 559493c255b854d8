//! One realization of an isotropic field on a 2D grid, and its empirical
//! correlation along x compared with `sinc(kappa d)`.

use std::f64::consts::PI;

use holodof::rng::{Namespace, StreamId};
use holodof::spectral::{build_lattice, Aperture, SpectralFactor};
use holodof::synthesis::{draw_coefficients_from, synthesize_2d, SpatialGrid};
use holodof::Complex64;

fn main() -> holodof::Result<()> {
    let lambda = 0.1;
    let aperture = Aperture::in_wavelengths(8.0, 8.0, 0.0, lambda)?;
    let lattice = build_lattice(&aperture, &SpectralFactor::isotropic())?;
    let grid = SpatialGrid::new(&aperture, lambda / 4.0)?;
    let [nx, ny, _] = grid.counts();
    println!("{} modes, {nx} x {ny} grid", lattice.len());

    let realizations = 200;
    let lags = 12;
    let mut corr = vec![Complex64::new(0.0, 0.0); lags];
    let mut power = 0.0;
    for r in 0..realizations {
        let coeffs = draw_coefficients_from(&lattice, StreamId::new(1, Namespace::Field, r));
        let field = synthesize_2d(&lattice, &coeffs, &grid)?;
        if r == 0 {
            let row: Vec<String> = field[..6].iter().map(|h| format!("{:.3}", h.norm())).collect();
            println!("first realization, |h| along the first row: {}", row.join(" "));
        }
        power += field.iter().map(|h| h.norm_sqr()).sum::<f64>() / field.len() as f64;
        for iy in 0..ny {
            let line = &field[iy * nx..(iy + 1) * nx];
            for (k, c) in corr.iter_mut().enumerate() {
                for i in 0..nx - k {
                    *c += line[i + k] * line[i].conj() / ((nx - k) * ny) as f64;
                }
            }
        }
    }
    println!("mean power {:.4}\n", power / realizations as f64);
    println!("  d/lambda  empirical   sinc");
    let kappa = 2.0 * PI / lambda;
    for (k, c) in corr.iter().enumerate() {
        let d = k as f64 * lambda / 4.0;
        let sinc = if d == 0.0 { 1.0 } else { (kappa * d).sin() / (kappa * d) };
        println!("{:>9.2} {:>10.4} {:>7.4}", d / lambda, c.re / realizations as f64, sinc);
    }
    Ok(())
}
