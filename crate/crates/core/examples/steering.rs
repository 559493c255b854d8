//! Rank of the two-column steering matrix `[exp(j gamma z), exp(-j gamma z)]`
//! that maps a mode's up- and down-going coefficients onto z samples.

use std::f64::consts::PI;

use holodof::dof::SteeringMatrix;

fn main() -> holodof::Result<()> {
    let kappa = 2.0 * PI;
    let z = [0.0, 0.25, 0.5, 0.75];
    for (label, gamma, z) in [
        ("generic mode", 0.7 * kappa, &z[..]),
        ("grazing mode (gamma = 0)", 0.0, &z[..]),
        ("single plane", kappa, &z[..1]),
        ("normal mode, half-wavelength spacing", kappa, &[0.0, 0.5, 1.0][..]),
    ] {
        let s = SteeringMatrix::new(gamma, z)?;
        println!(
            "{label:<38} rank {}{}",
            s.rank,
            if s.degenerate { " (degenerate spacing)" } else { "" }
        );
    }
    Ok(())
}
