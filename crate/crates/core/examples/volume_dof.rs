//! A thin volume fed from both sides doubles the DoF of its footprint;
//! fed from one side it adds nothing.

use holodof::dof::{build_ensemble, effective_dof, gram_spectrum, DofPolicy, Scenario};
use holodof::spectral::Aperture;
use holodof::synthesis::HalfSpaces;

fn main() -> holodof::Result<()> {
    let lambda = 0.1;
    let cases = [
        (
            "planar 3 x 3",
            Aperture::in_wavelengths(3.0, 3.0, 0.0, lambda)?,
            HalfSpaces::Two,
        ),
        (
            "volume 3 x 3 x 1, both sides",
            Aperture::in_wavelengths(3.0, 3.0, 1.0, lambda)?,
            HalfSpaces::Two,
        ),
        (
            "volume 3 x 3 x 1, one side",
            Aperture::in_wavelengths(3.0, 3.0, 1.0, lambda)?,
            HalfSpaces::One,
        ),
    ];
    for (label, aperture, hs) in cases {
        let scenario = Scenario::isotropic(aperture, lambda / 4.0).with_half_spaces(hs);
        let n = scenario.grid()?.len();
        let spectrum = gram_spectrum(&build_ensemble(&scenario, 8 * n, 4)?)?;
        let dof = effective_dof(&spectrum, &DofPolicy::default())?;
        println!(
            "{label:<30} N = {n:>4}, theory {:>6.2}, effective {:>3} / {:>3} (trace fraction / relative floor)",
            scenario.theoretical_dof()?,
            dof.trace_fraction,
            dof.relative_floor
        );
    }
    Ok(())
}
