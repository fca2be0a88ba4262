//! Special functions and quadrature.
//!
//! Log-gamma, Beta, the regularized incomplete Beta function and an adaptive
//! Gauss-Kronrod integrator. Every chord-length formula in the crate is built
//! from these.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Lanczos approximation, g = 607/128, fifteen terms.
const LANCZOS_G_HALF: f64 = 5.242_187_5;
const LANCZOS_COEFFS: [f64; 14] = [
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];
const LANCZOS_C0: f64 = 0.999_999_999_999_997_091_82;
const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// Natural logarithm of the Gamma function for positive real arguments.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    let t = x + LANCZOS_G_HALF;
    let head = (x + 0.5) * t.ln() - t;
    let mut series = LANCZOS_C0;
    let mut y = x;
    for c in LANCZOS_COEFFS {
        y += 1.0;
        series += c / y;
    }
    head + (SQRT_TWO_PI * series / x).ln()
}

/// Logarithm of the complete Beta function.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    check_shape(a, b)?;
    Ok(log_beta_unchecked(a, b))
}

pub(crate) fn log_beta_unchecked(a: f64, b: f64) -> f64 {
    log_gamma_unchecked(a) + log_gamma_unchecked(b) - log_gamma_unchecked(a + b)
}

/// Complete Beta function B(a, b).
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_beta(a, b)?.exp())
}

fn check_shape(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!(
            "Beta shape parameters must be positive, got a={a}, b={b}"
        )));
    }
    Ok(())
}

const CF_MAX_ITER: usize = 500;
const CF_TINY: f64 = 1e-300;

/// Regularized incomplete Beta function I_x(a, b).
///
/// Evaluated by the modified Lentz continued fraction, switching to
/// `1 - I_{1-x}(b, a)` when `x > (a + 1) / (a + b + 2)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    check_shape(a, b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!(
            "incomplete Beta argument must lie in [0, 1], got {x}"
        )));
    }
    Ok(inc_beta_unchecked(x, a, b))
}

pub(crate) fn inc_beta_unchecked(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        1.0 - inc_beta_fraction(1.0 - x, b, a)
    } else {
        inc_beta_fraction(x, a, b)
    }
}

/// `I_x(a, b)` given both `x` and `y = 1 - x`, for callers that can form the
/// complement without cancellation.
pub(crate) fn inc_beta_with_complement(x: f64, y: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        1.0 - inc_beta_fraction(y, b, a)
    } else {
        inc_beta_fraction(x, a, b)
    }
}

fn inc_beta_fraction(x: f64, a: f64, b: f64) -> f64 {
    let ln_prefix = a * x.ln() + b * (-x).ln_1p() - log_beta_unchecked(a, b);
    let prefix = ln_prefix.exp() / a;
    if prefix == 0.0 {
        return 0.0;
    }

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + even * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + even / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + odd * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + odd / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    (prefix * h).clamp(0.0, 1.0)
}

/// Tolerance and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            absolute_tolerance: 1e-10,
            max_subdivisions: 1 << 20,
        }
    }
}

impl QuadratureSpec {
    pub fn new(absolute_tolerance: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            absolute_tolerance,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_tolerance(absolute_tolerance: f64) -> Result<Self> {
        Self::new(absolute_tolerance, Self::default().max_subdivisions)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.absolute_tolerance > 0.0 && self.absolute_tolerance.is_finite()) {
            return Err(Error::domain("quadrature tolerance must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("quadrature needs at least one subdivision"));
        }
        Ok(())
    }
}

// Kronrod 15-point abscissae and weights; the odd-indexed abscissae carry the
// embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lower: f64,
    upper: f64,
    estimate: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, lower: f64, upper: f64) -> Panel {
    let center = 0.5 * (lower + upper);
    let half = 0.5 * (upper - lower);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = kronrod * half;
    let abs_result = abs_sum * half.abs();
    let asc_result = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc_result != 0.0 && error != 0.0 {
        error = asc_result * (200.0 * error / asc_result).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * abs_result;
    if roundoff > error {
        error = roundoff;
    }
    Panel {
        lower,
        upper,
        estimate: result,
        error,
    }
}

/// Globally adaptive 15-point Gauss-Kronrod quadrature of `f` over `[lower, upper]`.
///
/// The integrand is never evaluated at the endpoints, so integrable endpoint
/// singularities are tolerated. Fails with [`Error::Accuracy`] if the
/// subdivision budget runs out before the error estimate meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    upper: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    if !(lower.is_finite() && upper.is_finite()) {
        return Err(Error::domain("integration limits must be finite"));
    }
    if lower == upper {
        return Ok(0.0);
    }
    if upper < lower {
        return integrate(f, upper, lower, spec).map(|v| -v);
    }

    let first = kronrod_panel(&f, lower, upper);
    let mut total = first.estimate;
    let mut total_error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0usize;

    while total_error > spec.absolute_tolerance {
        if !total.is_finite() {
            return Err(Error::domain("integrand is not finite on the interval"));
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Accuracy {
                message: "quadrature subdivision budget exhausted".into(),
                estimate: total,
                error_bound: total_error,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.lower + worst.upper);
        if mid <= worst.lower || mid >= worst.upper {
            return Err(Error::Accuracy {
                message: "quadrature panel shrank below floating-point resolution".into(),
                estimate: total,
                error_bound: total_error,
            });
        }
        let left = kronrod_panel(&f, worst.lower, mid);
        let right = kronrod_panel(&f, mid, worst.upper);
        total += left.estimate + right.estimate - worst.estimate;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;

        // Re-sum periodically so incremental updates do not drift.
        if subdivisions % 64 == 0 {
            total = heap.iter().map(|p| p.estimate).sum();
            total_error = heap.iter().map(|p| p.error).sum();
        }
    }
    if !total.is_finite() {
        return Err(Error::domain("integrand is not finite on the interval"));
    }
    Ok(heap.iter().map(|p| p.estimate).sum())
}

/// Like [`integrate`], but first maps `[lower, upper]` through the cubic
/// `x = lower + (upper - lower)(3t^2 - 2t^3)`, whose derivative vanishes at both
/// ends. Square-root type endpoint singularities and kinks become smooth.
pub fn integrate_endpoint_regularized<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    upper: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let width = upper - lower;
    integrate(
        |t| {
            // map each half from its own endpoint so nodes near `upper` keep
            // their distance to it
            let x = if t <= 0.5 {
                lower + width * t * t * (3.0 - 2.0 * t)
            } else {
                let s = 1.0 - t;
                upper - width * s * s * (3.0 - 2.0 * s)
            };
            let jacobian = 6.0 * width * t * (1.0 - t);
            if jacobian == 0.0 || x == lower || x == upper {
                0.0
            } else {
                f(x) * jacobian
            }
        },
        0.0,
        1.0,
        spec,
    )
}

/// Bisection root of an increasing function on `[lo, hi]`, stopping once the
/// bracket is narrower than `x_tolerance`.
pub(crate) fn bisect_increasing<F>(mut lo: f64, mut hi: f64, x_tolerance: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    for _ in 0..200 {
        if hi - lo <= x_tolerance {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
