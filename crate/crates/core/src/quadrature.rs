//! Globally adaptive Gauss-Kronrod (7/15 point) quadrature on a finite
//! interval, with optional interior breakpoints.
//!
//! The local error estimate follows the QUADPACK heuristic: the raw
//! Gauss/Kronrod difference is rescaled by `(200 * err / resasc)^1.5`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae on [0, 1]; odd indices are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Requested accuracy: the run stops once the summed error estimate is at
/// most `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureError {
    /// The subdivision budget ran out before the tolerance was met.
    NotConverged { value: f64, abs_error: f64 },
    /// The integrand returned NaN or an infinity.
    NonFinite { at: f64 },
}

impl QuadratureError {
    pub fn estimate(&self) -> f64 {
        match self {
            QuadratureError::NotConverged { abs_error, .. } => *abs_error,
            QuadratureError::NonFinite { .. } => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QuadratureError::NotConverged { value, abs_error } => write!(
                f,
                "quadrature did not converge (value {value:e}, error estimate {abs_error:e})"
            ),
            QuadratureError::NonFinite { at } => {
                write!(f, "integrand is not finite at {at:e}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

#[allow(clippy::needless_range_loop)]
fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFinite { at: x })
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..3 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let error = rescale_error((res_k - res_g) * half, res_abs, res_asc);
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[a, b]`.
///
/// `breakpoints` are extra points (kinks, integrable singularities) that
/// should start out as segment boundaries; values outside `(a, b)` are
/// ignored. `max_segments` bounds the total number of segments.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
    max_segments: usize,
) -> Result<Integral, QuadratureError> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut points: Vec<f64> = std::iter::once(lo)
        .chain(breakpoints.iter().copied().filter(|&p| p > lo && p < hi))
        .chain(std::iter::once(hi))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        let seg = gauss_kronrod_15(&f, w[0], w[1])?;
        evaluations += 15;
        value += seg.value;
        error += seg.error;
        heap.push(seg);
    }

    while error > tol.target(value) {
        if heap.len() >= max_segments.max(1) {
            return Err(QuadratureError::NotConverged {
                value: sign * value,
                abs_error: error,
            });
        }
        let worst = heap.pop().expect("at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(QuadratureError::NotConverged {
                value: sign * value,
                abs_error: error,
            });
        }
        let left = gauss_kronrod_15(&f, worst.a, mid)?;
        let right = gauss_kronrod_15(&f, mid, worst.b)?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to avoid drift from the running updates.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Integral {
        value: sign * value,
        abs_error: error,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(
            |x| x.powi(5) - 3.0 * x * x,
            0.0,
            2.0,
            &[],
            Tolerance { abs: 1e-14, rel: 1e-13 },
            50,
        )
        .unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate(f64::sin, std::f64::consts::PI, 0.0, &[], Tolerance::absolute(1e-12), 50).unwrap();
        assert!((r.value + 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_sqrt_endpoint_singularity() {
        // Singular at x = 1 but never evaluated there.
        let r = integrate(
            |x: f64| 1.0 / (1.0 - x).sqrt(),
            0.0,
            1.0,
            &[],
            Tolerance::absolute(1e-6),
            2000,
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn kink_at_breakpoint() {
        let r = integrate(
            |x: f64| (x - 0.3).abs(),
            0.0,
            1.0,
            &[0.3],
            Tolerance::absolute(1e-14),
            10,
        )
        .unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &[], Tolerance::absolute(1e-15), 3).unwrap_err();
        match err {
            QuadratureError::NotConverged { abs_error, .. } => assert!(abs_error > 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_rejected() {
        let err = integrate(|_| f64::NAN, 0.0, 1.0, &[], Tolerance::absolute(1e-6), 10).unwrap_err();
        assert!(matches!(err, QuadratureError::NonFinite { .. }));
    }
}
