//! Wavenumber lattice of a square aperture: mode count against the
//! `pi Lx Ly / lambda^2` estimate, and where the field power sits.

use holodof::spectral::{build_lattice, cardinality_estimate, Aperture, SpectralFactor};

fn main() -> holodof::Result<()> {
    for side in [4.0, 8.0, 16.0, 32.0] {
        let aperture = Aperture::in_wavelengths(side, side, 0.0, 0.1)?;
        let lattice = build_lattice(&aperture, &SpectralFactor::isotropic())?;
        let estimate = cardinality_estimate(&aperture)?;
        let [fp, fm] = lattice.folded_power();
        println!(
            "{side:>4} lambda: |E| = {:>5}, estimate {:>8.2}, variance {:.12}, on circle {}, folded {:.4}",
            lattice.len(),
            estimate,
            lattice.total_variance(),
            lattice.on_circle_count(),
            fp + fm
        );
    }

    // The strongest and weakest modes of an 8 x 8 aperture.
    let aperture = Aperture::in_wavelengths(8.0, 8.0, 0.0, 0.1)?;
    let lattice = build_lattice(&aperture, &SpectralFactor::isotropic())?;
    let mut modes: Vec<_> = lattice.modes().iter().collect();
    modes.sort_by(|a, b| (b.var_plus + b.var_minus).total_cmp(&(a.var_plus + a.var_minus)));
    println!("\n  ell    m      gamma [rad/m]   variance");
    for p in modes.iter().take(3).chain(modes.iter().rev().take(3)) {
        println!(
            "{:>5} {:>4} {:>16.6} {:>10.3e}",
            p.ell,
            p.m,
            p.gamma,
            p.var_plus + p.var_minus
        );
    }
    Ok(())
}
