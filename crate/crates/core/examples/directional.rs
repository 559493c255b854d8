//! Non-isotropic scattering: a spectral factor that keeps only waves
//! arriving within 30 degrees of broadside leaves fewer effective DoF.

use holodof::dof::{build_ensemble, effective_dof, gram_spectrum, DofPolicy, Scenario};
use holodof::spectral::{build_lattice, Aperture, SpectralFactor};

fn main() -> holodof::Result<()> {
    let lambda = 0.1;
    let aperture = Aperture::in_wavelengths(4.0, 4.0, 0.0, lambda)?;
    let kappa = aperture.kappa();
    let cutoff = (30f64).to_radians().sin() * kappa;
    let narrow = SpectralFactor::from_gain(
        "30 degree cone",
        move |kx, ky, _| {
            if kx.hypot(ky) <= cutoff {
                1.0
            } else {
                0.0
            }
        },
    );

    for factor in [SpectralFactor::isotropic(), narrow] {
        let lattice = build_lattice(&aperture, &factor)?;
        let scenario = Scenario::isotropic(aperture, lambda / 4.0).with_factor(factor.clone());
        let n = scenario.grid()?.len();
        let spectrum = gram_spectrum(&build_ensemble(&scenario, 8 * n, 6)?)?;
        let dof = effective_dof(&spectrum, &DofPolicy::default())?;
        let active = lattice.modes().iter().filter(|p| p.var_plus > 0.0).count();
        println!(
            "{:<16} variance {:.4}, active modes {:>3}, effective DoF {:>3} / {:>3}",
            factor.label(),
            lattice.total_variance(),
            active,
            dof.trace_fraction,
            dof.relative_floor
        );
    }
    Ok(())
}
