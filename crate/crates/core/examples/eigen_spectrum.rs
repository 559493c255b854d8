//! Gram-matrix eigenvalues of a 16-wavelength segment against the i.i.d.
//! Rayleigh baseline: the field spectrum drops to zero after 2 Lx / lambda.

use holodof::dof::{baseline_ensemble, build_ensemble, effective_dof, gram_spectrum, DofPolicy, Scenario};
use holodof::spectral::Aperture;

fn main() -> holodof::Result<()> {
    let aperture = Aperture::linear(1.6, 0.1)?;
    let scenario = Scenario::isotropic(aperture, 0.025);
    let n = scenario.grid()?.len();
    let m = 100 * n;

    let field = gram_spectrum(&build_ensemble(&scenario, m, 2)?)?;
    let iid = gram_spectrum(&baseline_ensemble(n, m, 2)?)?;
    let policy = DofPolicy::default();
    let dof = effective_dof(&field, &policy)?;
    let iid_dof = effective_dof(&iid, &policy)?;

    println!("N = {n}, M = {m}, theory {}", scenario.theoretical_dof()?);
    println!(
        "field:    trace fraction {}, relative floor {}",
        dof.trace_fraction, dof.relative_floor
    );
    println!(
        "baseline: trace fraction {}, relative floor {}",
        iid_dof.trace_fraction, iid_dof.relative_floor
    );
    println!("\nindex    field      baseline");
    for i in (0..n).step_by(4) {
        println!(
            "{:>5} {:>10.3e} {:>10.4}",
            i + 1,
            field.eigenvalues[i],
            iid.eigenvalues[i]
        );
    }
    Ok(())
}
