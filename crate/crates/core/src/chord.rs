//! Chord-length distributions of the N-sphere and the N-hemi-hypersphere.
//!
//! "Dimension" is always the ambient dimension N: an N-sphere of radius R is
//! the set `{x in R^N : |x| = R}`. A chord is the segment between two points
//! drawn independently and uniformly from the surface (or from the half with
//! non-negative last coordinate, for the hemisphere). Both laws are supported
//! on `[0, 2R]`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{
    bisect_increasing, inc_beta_unchecked, inc_beta_with_complement, integrate, integrate_endpoint_regularized,
    log_beta_unchecked, log_gamma_unchecked, QuadratureSpec,
};

/// The surface a pointset lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Sphere,
    Hemisphere,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Sphere => "sphere",
            Geometry::Hemisphere => "hemisphere",
        })
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Geometry::Sphere),
            "hemisphere" => Ok(Geometry::Hemisphere),
            other => Err(Error::domain(format!("unknown geometry '{other}'"))),
        }
    }
}

/// Common surface of the analytic chord-length laws.
pub trait ChordDistribution: Sync {
    fn dimension(&self) -> usize;
    fn radius(&self) -> f64;
    fn geometry(&self) -> Geometry;
    fn cdf(&self, d: f64) -> Result<f64>;
    fn pdf(&self, d: f64) -> Result<f64>;
}

/// `d^2/R^2 - d^4/(4R^4)`, the squared sine of the cap colatitude that a chord
/// of length `d` subtends. Factored to stay accurate near `d = 2R`.
fn chord_beta_argument(d: f64, radius: f64) -> f64 {
    let u = d / radius;
    (u * u * (2.0 - u) * (2.0 + u) / 4.0).clamp(0.0, 1.0)
}

/// `(1 - d^2/(2R^2))^2`, the exact complement of [`chord_beta_argument`].
fn chord_beta_complement(d: f64, radius: f64) -> f64 {
    let u = d / radius;
    let c = 1.0 - u * u / 2.0;
    (c * c).clamp(0.0, 1.0)
}

/// `I_x(a, 1/2)` at the Beta argument of chord `d`.
fn chord_inc_beta(d: f64, radius: f64, a: f64, b: f64) -> f64 {
    inc_beta_with_complement(chord_beta_argument(d, radius), chord_beta_complement(d, radius), a, b)
}

/// Colatitude of the cap swept by chords shorter than `d`.
fn chord_colatitude(d: f64, radius: f64) -> f64 {
    2.0 * (d / (2.0 * radius)).clamp(0.0, 1.0).asin()
}

/// Fraction of the surface of an N-sphere lying within `colatitude` of a pole.
pub fn cap_surface_fraction(dimension: usize, colatitude: f64) -> Result<f64> {
    if dimension < 2 {
        return Err(Error::domain("cap surface fraction needs dimension >= 2"));
    }
    if !(0.0..=PI).contains(&colatitude) {
        return Err(Error::domain(format!(
            "colatitude must lie in [0, pi], got {colatitude}"
        )));
    }
    Ok(cap_fraction_unchecked(dimension, colatitude))
}

fn cap_fraction_unchecked(dimension: usize, colatitude: f64) -> f64 {
    let a = (dimension as f64 - 1.0) / 2.0;
    let (s, c) = colatitude.sin_cos();
    let half = 0.5 * inc_beta_with_complement(s * s, c * c, a, 0.5);
    if colatitude <= FRAC_PI_2 {
        half
    } else {
        1.0 - half
    }
}

/// Inverse of [`cap_surface_fraction`]: the colatitude whose cap covers
/// `fraction` of the sphere.
pub fn cap_colatitude_for_fraction(dimension: usize, fraction: f64) -> Result<f64> {
    if dimension < 2 {
        return Err(Error::domain("cap colatitude needs dimension >= 2"));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::domain(format!("cap fraction must lie in [0, 1], got {fraction}")));
    }
    if fraction == 0.0 {
        return Ok(0.0);
    }
    if fraction == 1.0 {
        return Ok(PI);
    }
    bisect_increasing(0.0, PI, 1e-14, |phi| {
        Ok(cap_fraction_unchecked(dimension, phi) - fraction)
    })
}

/// Chord-length law on the full N-sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereChordDistribution {
    dimension: usize,
    radius: f64,
}

impl SphereChordDistribution {
    pub fn new(dimension: usize, radius: f64) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::domain(format!(
                "sphere chord distribution needs dimension >= 2, got {dimension}"
            )));
        }
        check_radius(radius)?;
        Ok(Self { dimension, radius })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn shape(&self) -> f64 {
        (self.dimension as f64 - 1.0) / 2.0
    }

    /// Surface fraction of a cap with the given colatitude.
    pub fn cap_surface_fraction(&self, colatitude: f64) -> Result<f64> {
        cap_surface_fraction(self.dimension, colatitude)
    }

    /// `P(D <= d)`. Clamps to 0 below the support and 1 above it.
    pub fn cdf(&self, d: f64) -> f64 {
        if d.is_nan() {
            return f64::NAN;
        }
        if d <= 0.0 {
            return 0.0;
        }
        if d >= 2.0 * self.radius {
            return 1.0;
        }
        let half = 0.5 * chord_inc_beta(d, self.radius, self.shape(), 0.5);
        if d < SQRT_2 * self.radius {
            half
        } else {
            1.0 - half
        }
    }

    /// Density of the chord length. Zero outside `(0, 2R]`; for N = 2 the density
    /// diverges at `d = 2R` and `+inf` is returned there.
    pub fn pdf(&self, d: f64) -> f64 {
        let two_r = 2.0 * self.radius;
        if !(d > 0.0 && d <= two_r) {
            return 0.0;
        }
        let x = chord_beta_argument(d, self.radius);
        let exponent = (self.dimension as f64 - 3.0) / 2.0;
        if x == 0.0 {
            return match self.dimension {
                2 => f64::INFINITY,
                3 => d / (self.radius * self.radius * 2.0),
                _ => 0.0,
            };
        }
        let log_norm = log_beta_unchecked(self.shape(), 0.5);
        let log_pdf = d.ln() - 2.0 * self.radius.ln() - log_norm + exponent * x.ln();
        log_pdf.exp()
    }

    /// Raw moment `E(D^k)`, evaluated in log space.
    pub fn moment(&self, k: i64) -> Result<f64> {
        if k < 0 {
            return Err(Error::domain(format!("moment order must be >= 0, got {k}")));
        }
        if k == 0 {
            return Ok(1.0);
        }
        let k = k as f64;
        let a = self.shape();
        let log_m = (k + self.dimension as f64 - 2.0) * std::f64::consts::LN_2
            + log_beta_unchecked((k + self.dimension as f64 - 1.0) / 2.0, a)
            - log_beta_unchecked(a, 0.5)
            + k * self.radius.ln();
        Ok(log_m.exp())
    }

    pub fn mean(&self) -> f64 {
        let n = self.dimension as f64;
        let log_mean = 2.0 * log_gamma_unchecked(n / 2.0)
            + (n - 1.0) * std::f64::consts::LN_2
            - log_gamma_unchecked(n - 0.5)
            - 0.5 * PI.ln();
        log_mean.exp() * self.radius
    }

    /// `E(D^2) - mean^2`, with `E(D^2) = 2R^2` in every dimension.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        2.0 * self.radius * self.radius - m * m
    }

    /// Chord length `d` with `cdf(d) = p`, located by bisection to 1e-10 in `d`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("probability must lie in [0, 1], got {p}")));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        if p == 1.0 {
            return Ok(2.0 * self.radius);
        }
        bisect_increasing(0.0, 2.0 * self.radius, 1e-11, |d| Ok(self.cdf(d) - p))
    }

    /// Probability that a random chord is no longer than the radius.
    pub fn bertrand_probability(&self) -> f64 {
        0.5 * inc_beta_unchecked(0.75, self.shape(), 0.5)
    }
}

impl ChordDistribution for SphereChordDistribution {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn geometry(&self) -> Geometry {
        Geometry::Sphere
    }
    fn cdf(&self, d: f64) -> Result<f64> {
        Ok(SphereChordDistribution::cdf(self, d))
    }
    fn pdf(&self, d: f64) -> Result<f64> {
        Ok(SphereChordDistribution::pdf(self, d))
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

/// Mean, median and variance of a hemisphere chord law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HemisphereStats {
    pub mean: f64,
    pub median: f64,
    pub variance: f64,
}

/// Chord-length law on the hyper-hemisphere `{x : |x| = R, x_N >= 0}`.
///
/// Below `sqrt(2) R` the cdf averages, over the position of the first chord
/// end, the share of the hemisphere inside the cap of chord radius `d` around
/// it. The cap share is integrated ring by ring: each ring of the cap at
/// angular distance `psi` from its centre is an (N-2)-sphere, and the part of
/// it above the equatorial hyperplane is itself a cap of that lower sphere.
/// N = 4 additionally has a closed form. Above `sqrt(2) R`, antipodal
/// reflection relates the law back to the lower branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HemisphereChordDistribution {
    dimension: usize,
    radius: f64,
    quadrature: QuadratureSpec,
}

impl HemisphereChordDistribution {
    pub fn new(dimension: usize, radius: f64) -> Result<Self> {
        Self::with_quadrature(
            dimension,
            radius,
            QuadratureSpec {
                absolute_tolerance: 1e-12,
                max_subdivisions: 4096,
            },
        )
    }

    pub fn with_quadrature(dimension: usize, radius: f64, quadrature: QuadratureSpec) -> Result<Self> {
        if dimension < 3 {
            return Err(Error::domain(format!(
                "hemisphere chord distribution needs dimension >= 3, got {dimension}"
            )));
        }
        check_radius(radius)?;
        quadrature.validate()?;
        Ok(Self {
            dimension,
            radius,
            quadrature,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The full-sphere law of the same dimension and radius.
    pub fn sphere(&self) -> SphereChordDistribution {
        SphereChordDistribution {
            dimension: self.dimension,
            radius: self.radius,
        }
    }

    fn shape(&self) -> f64 {
        (self.dimension as f64 - 1.0) / 2.0
    }

    /// `∫_0^phi sin^{N-2}`, valid for `phi <= pi/2`.
    fn sine_power_integral(&self, phi: f64) -> f64 {
        let a = self.shape();
        let (s, c) = phi.sin_cos();
        0.5 * log_beta_unchecked(a, 0.5).exp() * inc_beta_with_complement(s * s, c * c, a, 0.5)
    }

    /// Share of the (N-2)-sphere ring at angular distance `psi` from a cap
    /// centre at angle `theta` from the pole that lies in the upper half space.
    fn ring_upper_share(&self, psi: f64, theta: f64) -> f64 {
        if psi + theta <= FRAC_PI_2 {
            return 1.0;
        }
        let (sp, st) = (psi.sin(), theta.sin());
        if st == 0.0 || sp == 0.0 {
            return 1.0;
        }
        let s2 = ((psi.cos() * theta.cos()) / (sp * st)).powi(2).min(1.0);
        // 1 - s2, factored when s2 is close to 1
        let y = if s2 > 0.5 {
            (-(psi + theta).cos() * (psi - theta).cos() / (sp * st).powi(2)).clamp(0.0, 1.0)
        } else {
            1.0 - s2
        };
        1.0 - 0.5 * inc_beta_with_complement(y, s2, (self.dimension as f64 - 2.0) / 2.0, 0.5)
    }

    /// Density of the last coordinate `c` of a uniform hemisphere point.
    pub fn chord_end_density(&self, c: f64) -> f64 {
        if !(0.0..=self.radius).contains(&c) {
            return 0.0;
        }
        let a = self.shape();
        let t = 1.0 - (c / self.radius).powi(2);
        2.0 / (self.radius * log_beta_unchecked(a, 0.5).exp()) * t.powf((self.dimension as f64 - 3.0) / 2.0)
    }

    /// Fraction of the cap of chord radius `d` around a point with last
    /// coordinate `c` that lies inside the hemisphere.
    pub fn cap_inside_fraction(&self, d: f64, c: f64) -> Result<f64> {
        let r = self.radius;
        if !(0.0..=SQRT_2 * r).contains(&d) {
            return Err(Error::domain("cap inside fraction needs 0 <= d <= sqrt(2) R"));
        }
        if !(0.0..=r).contains(&c) {
            return Err(Error::domain("chord end coordinate must lie in [0, R]"));
        }
        if d == 0.0 || c >= d * (1.0 - d * d / (4.0 * r * r)).sqrt() {
            return Ok(1.0);
        }
        let phi_d = chord_colatitude(d, r);
        let theta = (c / r).clamp(-1.0, 1.0).acos();
        let n = self.dimension as i32;
        let start = FRAC_PI_2 - theta;
        let partial = integrate_endpoint_regularized(
            |psi| psi.sin().powi(n - 2) * self.ring_upper_share(psi, theta),
            start,
            phi_d,
            &self.quadrature,
        )?;
        Ok((self.sine_power_integral(start) + partial) / self.sine_power_integral(phi_d))
    }

    /// Lower-branch cdf (`d <= sqrt(2) R`) by the ring-by-ring quadrature, valid
    /// in every dimension.
    pub fn cdf_numeric(&self, d: f64) -> Result<f64> {
        let r = self.radius;
        if d <= 0.0 {
            return Ok(0.0);
        }
        if d > SQRT_2 * r * (1.0 + 1e-15) {
            return Err(Error::domain("numeric hemisphere cdf covers d <= sqrt(2) R only"));
        }
        let n = self.dimension as i32;
        let phi_d = chord_colatitude(d, r).min(FRAC_PI_2);
        let theta0 = FRAC_PI_2 - phi_d;
        let full_cap = self.sine_power_integral(phi_d);
        let inner_spec = QuadratureSpec {
            absolute_tolerance: self.quadrature.absolute_tolerance * 0.1,
            ..self.quadrature
        };

        // chord ends close to the pole see their whole cap inside the hemisphere
        let near_pole = self.sine_power_integral(theta0) * full_cap;
        let outer = |theta: f64| -> Result<f64> {
            let start = FRAC_PI_2 - theta;
            let partial = integrate_endpoint_regularized(
                |psi| psi.sin().powi(n - 2) * self.ring_upper_share(psi, theta),
                start,
                phi_d,
                &inner_spec,
            )?;
            Ok(theta.sin().powi(n - 2) * (self.sine_power_integral(start) + partial))
        };
        let failure = std::cell::Cell::new(None);
        let far = integrate_endpoint_regularized(
            |theta| match outer(theta) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            },
            theta0,
            FRAC_PI_2,
            &self.quadrature,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let b = log_beta_unchecked(self.shape(), 0.5).exp();
        Ok((4.0 / (b * b) * (near_pole + far)).clamp(0.0, 1.0))
    }

    /// Closed-form lower-branch cdf for N = 4 (`d <= sqrt(2) R`), `P1 - P2 + P3`.
    pub fn cdf_closed_form_n4(&self, d: f64) -> Result<f64> {
        if self.dimension != 4 {
            return Err(Error::domain("closed-form hemisphere cdf exists for N = 4 only"));
        }
        let r = self.radius;
        if d <= 0.0 {
            return Ok(0.0);
        }
        if d > SQRT_2 * r * (1.0 + 1e-15) {
            return Err(Error::domain("closed-form hemisphere cdf covers d <= sqrt(2) R only"));
        }
        let n = 4.0;
        let x = chord_beta_argument(d, r);
        let cap = chord_inc_beta(d, r, 1.5, 0.5);
        let b = log_beta_unchecked(1.5, 0.5).exp();
        let p1 = cap * (1.0 - 0.5 * chord_inc_beta(d, r, 0.5, 1.5));
        let c = 1.0 - d * d / (2.0 * r * r);
        // The leading I_x((N-1)/2, 1/2) of P2 and P3 cancels the I_x(3/2, 1/2)
        // in their denominators at N = 4.
        let p2 = 2.0 * (c * c - c.powi(4)) / ((n - 2.0) * PI * b);
        let upper = x.sqrt().min(1.0).asin();
        let arc = integrate(|t: f64| t * t.cos().powi(2), 0.0, upper, &self.quadrature)?;
        let p3 = 2.0 * arc / (PI * b);
        Ok((p1 - p2 + p3).clamp(0.0, 1.0))
    }

    fn lower_branch(&self, d: f64) -> Result<f64> {
        if self.dimension == 4 {
            self.cdf_closed_form_n4(d)
        } else {
            self.cdf_numeric(d)
        }
    }

    /// `P(D_H <= d)`, clamped outside `[0, 2R]`.
    pub fn cdf(&self, d: f64) -> Result<f64> {
        let r = self.radius;
        if d.is_nan() {
            return Err(Error::domain("chord length is NaN"));
        }
        if d <= 0.0 {
            return Ok(0.0);
        }
        if d >= 2.0 * r {
            return Ok(1.0);
        }
        if d <= SQRT_2 * r {
            return self.lower_branch(d);
        }
        let mirrored = ((2.0 * r - d) * (2.0 * r + d)).sqrt();
        let upper = 2.0 * self.sphere().cdf(d) + self.lower_branch(mirrored)? - 1.0;
        Ok(upper.clamp(0.0, 1.0))
    }

    /// Central difference of the cdf with step `1e-5 R`.
    pub fn pdf(&self, d: f64) -> Result<f64> {
        let r = self.radius;
        if !(d > 0.0 && d < 2.0 * r) {
            return Ok(0.0);
        }
        let h = 1e-5 * r;
        let slope = (self.cdf(d + h)? - self.cdf(d - h)?) / (2.0 * h);
        Ok(slope.max(0.0))
    }

    /// Median by bisection on the cdf; mean and variance by quadrature of the
    /// survival function, `E(D) = ∫(1-F)` and `E(D^2) = ∫2d(1-F)`.
    pub fn stats(&self) -> Result<HemisphereStats> {
        if !(3..=12).contains(&self.dimension) {
            return Err(Error::domain(format!(
                "hemisphere statistics are supported for 3 <= N <= 12, got {}",
                self.dimension
            )));
        }
        let r = self.radius;
        let spec = QuadratureSpec {
            absolute_tolerance: 1e-9 * r * r,
            ..self.quadrature
        };
        let failure = std::cell::Cell::new(None);
        let survival = |d: f64| match self.cdf(d) {
            Ok(v) => 1.0 - v,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        };
        let seam = SQRT_2 * r;
        let mean = integrate(&survival, 0.0, seam, &spec)? + integrate(&survival, seam, 2.0 * r, &spec)?;
        let second = integrate(|d| 2.0 * d * survival(d), 0.0, seam, &spec)?
            + integrate(|d| 2.0 * d * survival(d), seam, 2.0 * r, &spec)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let median = bisect_increasing(0.0, 2.0 * r, 1e-10 * r, |d| Ok(self.cdf(d)? - 0.5))?;
        Ok(HemisphereStats {
            mean,
            median,
            variance: second - mean * mean,
        })
    }
}

impl ChordDistribution for HemisphereChordDistribution {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn geometry(&self) -> Geometry {
        Geometry::Hemisphere
    }
    fn cdf(&self, d: f64) -> Result<f64> {
        HemisphereChordDistribution::cdf(self, d)
    }
    fn pdf(&self, d: f64) -> Result<f64> {
        HemisphereChordDistribution::pdf(self, d)
    }
}

/// Builds the analytic law for a geometry.
pub fn distribution_for(
    geometry: Geometry,
    dimension: usize,
    radius: f64,
) -> Result<Box<dyn ChordDistribution + Send>> {
    Ok(match geometry {
        Geometry::Sphere => Box::new(SphereChordDistribution::new(dimension, radius)?),
        Geometry::Hemisphere => Box::new(HemisphereChordDistribution::new(dimension, radius)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::integrate_endpoint_regularized;

    fn sphere(n: usize, r: f64) -> SphereChordDistribution {
        SphereChordDistribution::new(n, r).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SphereChordDistribution::new(1, 1.0).is_err());
        assert!(SphereChordDistribution::new(3, 0.0).is_err());
        assert!(SphereChordDistribution::new(3, f64::NAN).is_err());
        assert!(HemisphereChordDistribution::new(2, 1.0).is_err());
        assert!(sphere(3, 1.0).moment(-1).is_err());
        assert!(sphere(3, 1.0).quantile(1.5).is_err());
        assert!(sphere(3, 1.0).cap_surface_fraction(4.0).is_err());
    }

    #[test]
    fn cap_fraction_examples() {
        let s3 = sphere(3, 1.0);
        assert!((s3.cap_surface_fraction(FRAC_PI_2).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(s3.cap_surface_fraction(0.0).unwrap(), 0.0);
        // exact area of a 3-sphere cap: (1 - cos phi) / 2
        assert!((s3.cap_surface_fraction(PI / 3.0).unwrap() - 0.25).abs() < 1e-13);
        for n in 2..10 {
            let f = cap_surface_fraction(n, 2.0).unwrap();
            let g = cap_surface_fraction(n, PI - 2.0).unwrap();
            assert!((f + g - 1.0).abs() < 1e-13);
            let back = cap_colatitude_for_fraction(n, f).unwrap();
            assert!((back - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_cdf_examples() {
        assert!((sphere(3, 1.0).cdf(1.0) - 0.25).abs() < 1e-13);
        assert!((sphere(2, 1.0).cdf(1.0) - 1.0 / 3.0).abs() < 1e-13);
        for n in 2..12 {
            for r in [0.5, 1.0, 3.0] {
                let s = sphere(n, r);
                assert!((s.cdf(SQRT_2 * r) - 0.5).abs() < 1e-12);
                assert_eq!(s.cdf(0.0), 0.0);
                assert_eq!(s.cdf(2.0 * r), 1.0);
                assert_eq!(s.cdf(-1.0), 0.0);
                assert_eq!(s.cdf(5.0 * r), 1.0);
            }
        }
    }

    #[test]
    fn circle_cdf_matches_arccos_form() {
        let s = sphere(2, 1.7);
        for i in 0..=400 {
            let d = 2.0 * 1.7 * i as f64 / 400.0;
            let arccos = (1.0 - d * d / (2.0 * 1.7 * 1.7)).clamp(-1.0, 1.0).acos() / PI;
            assert!((s.cdf(d) - arccos).abs() < 1e-10, "d={d}");
        }
    }

    #[test]
    fn sphere_pdf_examples() {
        assert!((sphere(3, 1.0).pdf(1.0) - 0.5).abs() < 1e-13);
        assert!(sphere(3, 1.0).pdf(1e-9) < 1e-8);
        let expected = 2.0 / (PI * 3f64.sqrt());
        assert!((sphere(2, 1.0).pdf(1.0) - expected).abs() < 1e-13);
        assert_eq!(sphere(2, 1.0).pdf(2.0), f64::INFINITY);
        assert_eq!(sphere(5, 1.0).pdf(2.5), 0.0);
        assert_eq!(sphere(5, 1.0).pdf(0.0), 0.0);
    }

    #[test]
    fn circle_pdf_is_derivative_of_arccos_cdf() {
        let h = 1e-6;
        let cdf = |d: f64| (1.0 - d * d / 2.0).acos() / PI;
        for i in 1..40 {
            let d = 2.0 * i as f64 / 40.0;
            let fd = (cdf(d + h) - cdf(d - h)) / (2.0 * h);
            assert!((sphere(2, 1.0).pdf(d) - fd).abs() < 1e-6 * fd.max(1.0));
        }
    }

    #[test]
    fn moments_and_summary_statistics() {
        let s3 = sphere(3, 1.0);
        assert!((s3.moment(1).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!((s3.moment(4).unwrap() - 16.0 / 3.0).abs() < 1e-11);
        assert_eq!(s3.moment(0).unwrap(), 1.0);
        for n in 2..40 {
            let s = sphere(n, 1.3);
            assert!((s.moment(2).unwrap() - 2.0 * 1.69).abs() < 1e-10);
            assert!((s.moment(1).unwrap() - s.mean()).abs() < 1e-11);
        }
        assert!((sphere(2, 1.0).mean() - 4.0 / PI).abs() < 1e-13);
        assert!((sphere(2, 1.0).variance() - (2.0 - 16.0 / (PI * PI))).abs() < 1e-12);
        assert!((sphere(4, 1.0).mean() - 1.358).abs() < 5e-4);
        assert!((sphere(4, 1.0).variance() - 0.156).abs() < 5e-4);
        // stays finite far beyond where Gamma itself overflows
        let big = sphere(400, 1.0);
        assert!(big.moment(3).unwrap().is_finite());
        assert!(big.mean() < SQRT_2 && big.mean() > 1.41);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for n in [2, 3, 5, 9] {
            let s = sphere(n, 2.0);
            assert!((s.quantile(0.5).unwrap() - 2.0 * SQRT_2).abs() < 1e-10);
            assert_eq!(s.quantile(0.0).unwrap(), 0.0);
            assert_eq!(s.quantile(1.0).unwrap(), 4.0);
        }
        assert!((sphere(3, 1.0).quantile(0.25).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bertrand_probabilities() {
        assert!((sphere(2, 1.0).bertrand_probability() - 1.0 / 3.0).abs() < 1e-13);
        assert!((sphere(3, 1.0).bertrand_probability() - 0.25).abs() < 1e-13);
        assert!((sphere(4, 1.0).bertrand_probability() - 0.196).abs() < 5e-4);
        assert!((sphere(5, 1.0).bertrand_probability() - 0.156).abs() < 5e-4);
        for n in 2..20 {
            let s = sphere(n, 2.5);
            assert!((s.bertrand_probability() - s.cdf(2.5)).abs() < 1e-13);
        }
    }

    #[test]
    fn symmetry_under_antipodal_reflection() {
        for n in 2..=16 {
            let s = sphere(n, 1.0);
            for i in 0..200 {
                let d = SQRT_2 * i as f64 / 199.0;
                let mirrored = ((2.0 - d) * (2.0 + d)).sqrt();
                assert!((s.cdf(mirrored) - (1.0 - s.cdf(d))).abs() < 1e-9, "N={n} d={d}");
            }
        }
    }

    #[test]
    fn cdf_falls_with_dimension_below_the_median_chord() {
        for n in 2..30 {
            let (lo, hi) = (sphere(n, 1.0), sphere(n + 1, 1.0));
            for i in 1..50 {
                let d = SQRT_2 * i as f64 / 50.0;
                assert!(hi.cdf(d) <= lo.cdf(d) + 1e-15);
                let e = 2.0 - (2.0 - SQRT_2) * i as f64 / 50.0;
                assert!(hi.cdf(e) >= lo.cdf(e) - 1e-15);
            }
        }
    }

    #[test]
    fn successive_dimension_differences_shrink() {
        for n in 2..25 {
            let (f0, f1, f2) = (sphere(n, 1.0), sphere(n + 1, 1.0), sphere(n + 2, 1.0));
            for i in 1..40 {
                let d = SQRT_2 * i as f64 / 40.0;
                let ratio = (f2.cdf(d) - f1.cdf(d)) / (f1.cdf(d) - f0.cdf(d));
                if (f1.cdf(d) - f0.cdf(d)).abs() > 1e-12 {
                    assert!(ratio > 0.0 && ratio <= 1.0 + 1e-9, "N={n} d={d} ratio={ratio}");
                }
            }
        }
    }

    #[test]
    fn trigonometric_form_agrees() {
        let spec = QuadratureSpec::default();
        for n in 2..=12 {
            let s = sphere(n, 1.0);
            let p = n as i32 - 2;
            let total =
                integrate_endpoint_regularized(|t: f64| t.sin().powi(p), 0.0, PI, &spec).unwrap();
            for i in 1..20 {
                let d = SQRT_2 * i as f64 / 20.0;
                let phi = 2.0 * (d / 2.0).asin();
                let part =
                    integrate_endpoint_regularized(|t: f64| t.sin().powi(p), 0.0, phi, &spec).unwrap();
                assert!((part / total - s.cdf(d)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn mass_concentrates_around_the_median_chord() {
        let mut previous = 0.0;
        for n in [4, 8, 16, 32, 64] {
            let s = sphere(n, 1.0);
            let mass = s.cdf(SQRT_2 + 0.1) - s.cdf(SQRT_2 - 0.1);
            assert!(mass > previous, "N={n}: {mass} <= {previous}");
            previous = mass;
        }
    }

    fn hemi(n: usize) -> HemisphereChordDistribution {
        HemisphereChordDistribution::new(n, 1.0).unwrap()
    }

    #[test]
    fn hemisphere_n4_at_median_chord() {
        let f = hemi(4).cdf(SQRT_2).unwrap();
        assert!((f - (0.75 - 1.0 / (PI * PI))).abs() < 1e-10);
        assert_eq!(hemi(5).cdf(2.0).unwrap(), 1.0);
    }

    #[test]
    fn hemisphere_closed_form_matches_numeric_construction() {
        let h = hemi(4);
        for i in 1..=50 {
            let d = SQRT_2 * i as f64 / 50.0;
            let closed = h.cdf_closed_form_n4(d).unwrap();
            let numeric = h.cdf_numeric(d).unwrap();
            assert!((closed - numeric).abs() < 1e-9, "d={d}: {closed} vs {numeric}");
        }
        assert!(hemi(5).cdf_closed_form_n4(1.0).is_err());
    }

    #[test]
    fn hemisphere_dominates_sphere_below_median_chord() {
        for n in [3, 5, 8] {
            let h = hemi(n);
            for i in 0..=40 {
                let d = SQRT_2 * i as f64 / 40.0;
                assert!(h.cdf(d).unwrap() >= h.sphere().cdf(d) - 1e-6);
            }
        }
    }

    #[test]
    fn hemisphere_seam_is_consistent() {
        for n in [3, 4, 6] {
            let h = hemi(n);
            let lower = h.cdf(SQRT_2).unwrap();
            let mirrored = ((2.0 - SQRT_2) * (2.0 + SQRT_2)).sqrt();
            let upper = 2.0 * h.sphere().cdf(SQRT_2) + h.cdf(mirrored).unwrap() - 1.0;
            assert!((lower - upper).abs() < 1e-12);
            let just_above = h.cdf(SQRT_2 + 1e-9).unwrap();
            assert!((just_above - lower).abs() < 1e-7);
        }
    }

    #[test]
    fn cap_inside_fraction_bounds() {
        let h = hemi(5);
        for i in 0..=10 {
            let c = i as f64 / 10.0;
            for j in 1..=10 {
                let d = SQRT_2 * j as f64 / 10.0;
                let x = h.cap_inside_fraction(d, c).unwrap();
                assert!((0.5 - 1e-12..=1.0).contains(&x), "d={d} c={c}: {x}");
            }
        }
        // equatorial chord end: exactly half of any cap is inside
        assert!((h.cap_inside_fraction(0.7, 0.0).unwrap() - 0.5).abs() < 1e-10);
        assert_eq!(h.cap_inside_fraction(0.5, 0.9).unwrap(), 1.0);
    }

    #[test]
    fn chord_end_density_integrates_to_one() {
        for n in [3, 4, 7] {
            let h = hemi(n);
            let total = integrate_endpoint_regularized(
                |c| h.chord_end_density(c),
                0.0,
                1.0,
                &QuadratureSpec::default(),
            )
            .unwrap();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hemisphere_pdf_integrates_to_one() {
        let h = hemi(4);
        let spec = QuadratureSpec::with_tolerance(1e-7).unwrap();
        let total = integrate(|d| h.pdf(d).unwrap(), 0.0, SQRT_2, &spec).unwrap()
            + integrate(|d| h.pdf(d).unwrap(), SQRT_2, 2.0, &spec).unwrap();
        assert!((total - 1.0).abs() < 1e-4);
    }

    #[test]
    fn hemisphere_stats_domain() {
        assert!(hemi(13).stats().is_err());
    }
}
