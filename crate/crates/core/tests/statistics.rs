use holodof::dof::{baseline_ensemble, build_ensemble, Scenario};
use holodof::rng::{Namespace, StreamId};
use holodof::spectral::{build_lattice, Aperture, SpectralFactor};
use holodof::synthesis::{draw_coefficients, iid_rayleigh, HalfSpaces, SpatialGrid, Synthesizer};
use holodof::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn coefficient_variances_follow_lattice() {
    let a = Aperture::in_wavelengths(4.0, 3.0, 0.0, 1.0).unwrap();
    let lattice = build_lattice(&a, &SpectralFactor::isotropic()).unwrap();
    let draws = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = lattice.len();
    let mut power = vec![[0.0f64; 2]; n];
    let mut pseudo = vec![Complex64::new(0.0, 0.0); n];
    let mut cross = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..draws {
        let c = draw_coefficients(&lattice, &mut rng);
        for i in 0..n {
            power[i][0] += c.plus[i].norm_sqr();
            power[i][1] += c.minus[i].norm_sqr();
            pseudo[i] += c.plus[i] * c.plus[i];
            cross[i] += c.plus[i] * c.minus[i].conj();
        }
    }
    let d = draws as f64;
    for (i, mode) in lattice.modes().iter().enumerate() {
        // |H|^2 / var is exponential: standard error of its mean is 1 / sqrt(draws).
        for (k, var) in [mode.var_plus, mode.var_minus].into_iter().enumerate() {
            if var == 0.0 {
                assert_eq!(power[i][k], 0.0);
                continue;
            }
            let ratio = power[i][k] / d / var;
            assert!((ratio - 1.0).abs() < 5.0 / d.sqrt(), "mode {i} branch {k}: {ratio}");
        }
        if mode.var_plus > 0.0 {
            assert!((pseudo[i] / d).norm() / mode.var_plus < 5.0 / d.sqrt());
            let scale = (mode.var_plus * mode.var_minus).sqrt();
            if scale > 0.0 {
                assert!((cross[i] / d).norm() / scale < 5.0 / d.sqrt());
            }
        }
    }
}

#[test]
fn iid_rayleigh_moments_and_tail() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 200_000;
    let h = iid_rayleigh(n, &mut rng).unwrap();
    let d = n as f64;
    let mean_power = h.iter().map(|v| v.norm_sqr()).sum::<f64>() / d;
    let re_var = h.iter().map(|v| v.re * v.re).sum::<f64>() / d;
    let pseudo: Complex64 = h.iter().map(|v| v * v).sum::<Complex64>() / d;
    assert!((mean_power - 1.0).abs() < 5.0 / d.sqrt());
    assert!((re_var - 0.5).abs() < 5.0 * 0.5 * (2.0 / d).sqrt());
    assert!(pseudo.norm() < 5.0 / d.sqrt());
    // |h|^2 is unit exponential.
    for t in [0.1, 0.5, 1.0, 2.0, 4.0] {
        let frac = h.iter().filter(|v| v.norm_sqr() > t).count() as f64 / d;
        let p: f64 = (-t).exp();
        assert!(
            (frac - p).abs() < 5.0 * (p * (1.0 - p) / d).sqrt(),
            "t = {t}: {frac} vs {p}"
        );
    }
}

#[test]
fn field_is_stationary_with_unit_power() {
    let a = Aperture::in_wavelengths(6.0, 6.0, 0.0, 1.0).unwrap();
    let e = build_ensemble(&Scenario::isotropic(a, 0.25), 4000, 21).unwrap();
    let m = e.cols() as f64;
    for i in 0..e.rows() {
        let p = (0..e.cols()).map(|j| e.get(i, j).norm_sqr()).sum::<f64>() / m;
        // Sum of many independent terms; allow 6 standard errors of an exponential mean.
        assert!((p - 1.0).abs() < 6.0 / m.sqrt(), "sample {i}: {p}");
    }
    assert!((e.mean_power() - 1.0).abs() < 0.02);
}

#[test]
fn one_half_space_halves_power() {
    let a = Aperture::in_wavelengths(3.0, 3.0, 0.5, 1.0).unwrap();
    let s = Scenario::isotropic(a, 0.25).with_half_spaces(HalfSpaces::One);
    let e = build_ensemble(&s, 4000, 5).unwrap();
    assert!((e.mean_power() - 0.5).abs() < 0.02, "{}", e.mean_power());
}

#[test]
fn stream_namespaces_are_disjoint() {
    let a = Aperture::in_wavelengths(2.0, 0.0, 0.0, 1.0).unwrap();
    let s = Scenario::isotropic(a, 0.25);
    let f1 = build_ensemble(&s, 80, 9).unwrap();
    let _ = baseline_ensemble(8, 80, 9).unwrap();
    let f2 = build_ensemble(&s, 80, 9).unwrap();
    assert_eq!(f1.as_slice(), f2.as_slice());

    let b = baseline_ensemble(8, 80, 9).unwrap();
    let mut rng = StreamId::new(9, Namespace::Baseline, 3).rng();
    assert_eq!(b.column(3), iid_rayleigh(8, &mut rng).unwrap().as_slice());
    assert_ne!(b.as_slice(), f1.as_slice());
}

#[test]
fn realization_depends_only_on_its_index() {
    let a = Aperture::in_wavelengths(2.0, 2.0, 0.0, 1.0).unwrap();
    let s = Scenario::isotropic(a, 0.25);
    let small = build_ensemble(&s, 256, 17).unwrap();
    let large = build_ensemble(&s, 400, 17).unwrap();
    for j in 0..256 {
        assert_eq!(small.column(j), large.column(j));
    }
    let lattice = build_lattice(&a, &SpectralFactor::isotropic()).unwrap();
    let grid = SpatialGrid::new(&a, 0.25).unwrap();
    let c = holodof::synthesis::draw_coefficients_from(&lattice, StreamId::new(17, Namespace::Field, 100));
    let direct = Synthesizer::new(&lattice, &grid).unwrap().synthesize(&c).unwrap();
    assert_eq!(direct.as_slice(), small.column(100));
}
