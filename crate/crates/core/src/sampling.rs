//! Seeded point generators and the [`PointSet`] container.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::chord::{cap_colatitude_for_fraction, Geometry};
use crate::error::{Error, Result};

/// Relative tolerance of the norm invariant.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Ground-truth tag attached to generated points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointLabel {
    /// Background point drawn uniformly from the surface.
    Uniform,
    /// Extra point drawn inside the augmented cap.
    Informational,
    /// Member of a lower-dimensional uniform subset.
    Embedded,
    /// Member of the surrounding superset.
    Superset,
    /// Cube draw that fell inside the unit ball before projection.
    InBall,
    /// Cube draw that fell outside the unit ball before projection.
    OutOfBall,
}

/// Seed and stream of a ChaCha8 generator. Equal values give equal sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSeed {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomSeed {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Independent child seed for replicate `index`, sharing the key but on a
    /// different stream.
    pub fn derive(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(1))),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// An ordered set of points on a sphere of the given dimension and radius,
/// stored row-major in one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dimension: usize,
    radius: f64,
    coords: Vec<f64>,
    labels: Option<Vec<PointLabel>>,
}

impl PointSet {
    /// Validates shape and the norm invariant.
    pub fn new(dimension: usize, radius: f64, coords: Vec<f64>) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::domain(format!("point dimension must be >= 2, got {dimension}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("radius must be positive, got {radius}")));
        }
        if coords.len() % dimension != 0 {
            return Err(Error::validation(format!(
                "coordinate buffer of length {} is not a multiple of dimension {dimension}",
                coords.len()
            )));
        }
        let set = Self {
            dimension,
            radius,
            coords,
            labels: None,
        };
        let offenders: Vec<usize> = (0..set.len())
            .filter(|&i| (norm(set.point(i)) - radius).abs() > NORM_TOLERANCE * radius)
            .collect();
        if !offenders.is_empty() {
            return Err(Error::validation(format!(
                "{} point(s) violate |p| = R, first indices {:?}",
                offenders.len(),
                &offenders[..offenders.len().min(10)]
            )));
        }
        Ok(set)
    }

    pub fn from_rows(dimension: usize, radius: f64, rows: &[Vec<f64>]) -> Result<Self> {
        if let Some(bad) = rows.iter().position(|r| r.len() != dimension) {
            return Err(Error::validation(format!(
                "row {bad} has {} coordinates, expected {dimension}",
                rows[bad].len()
            )));
        }
        Self::new(dimension, radius, rows.concat())
    }

    pub fn with_labels(mut self, labels: Vec<PointLabel>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::validation(format!(
                "{} labels for {} points",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.coords[index * self.dimension..(index + 1) * self.dimension]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dimension)
    }

    /// Row-major coordinate buffer.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn labels(&self) -> Option<&[PointLabel]> {
        self.labels.as_deref()
    }

    /// Indices carrying `label`, empty when the set is unlabeled.
    pub fn indices_with_label(&self, label: PointLabel) -> Vec<usize> {
        self.labels()
            .map(|ls| (0..ls.len()).filter(|&i| ls[i] == label).collect())
            .unwrap_or_default()
    }

    /// The points at `indices`, in that order, labels included.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::domain(format!("index {bad} out of range for {} points", self.len())));
        }
        let mut coords = Vec::with_capacity(indices.len() * self.dimension);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Ok(Self {
            dimension: self.dimension,
            radius: self.radius,
            coords,
            labels: self
                .labels
                .as_ref()
                .map(|ls| indices.iter().map(|&i| ls[i]).collect()),
        })
    }

    /// Applies `f` to every point in place (used for rigid motions in tests and
    /// tooling); the norm invariant is re-checked.
    pub fn map_points(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.points() {
            coords.extend(f(p));
        }
        let mut out = Self::new(self.dimension, self.radius, coords)?;
        out.labels = self.labels.clone();
        Ok(out)
    }
}

pub(crate) fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("dimension must be >= 2, got {n}")));
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// Appends one uniform point of the radius-`r` sphere, by normalizing a
/// standard Gaussian vector.
fn push_gaussian_direction<R: Rng>(rng: &mut R, n: usize, r: f64, out: &mut Vec<f64>) {
    let start = out.len();
    loop {
        out.truncate(start);
        out.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let len = norm(&out[start..]);
        if len > 0.0 && len.is_finite() {
            out[start..].iter_mut().for_each(|x| *x *= r / len);
            return;
        }
    }
}

/// `m` i.i.d. uniform points on the radius-`r` sphere in `R^n`.
pub fn sample_sphere_uniform(n: usize, r: f64, m: usize, seed: RandomSeed) -> Result<PointSet> {
    check_dimension(n)?;
    check_radius(r)?;
    let mut rng = seed.rng();
    let mut coords = Vec::with_capacity(n * m);
    for _ in 0..m {
        push_gaussian_direction(&mut rng, n, r, &mut coords);
    }
    Ok(PointSet {
        dimension: n,
        radius: r,
        coords,
        labels: None,
    })
}

/// `m` i.i.d. uniform points on the hemisphere with non-negative last coordinate.
pub fn sample_hemisphere_uniform(n: usize, r: f64, m: usize, seed: RandomSeed) -> Result<PointSet> {
    let mut set = sample_sphere_uniform(n, r, m, seed)?;
    for p in set.coords.chunks_exact_mut(n) {
        p[n - 1] = p[n - 1].abs();
    }
    Ok(set)
}

/// Uniform points of the requested geometry.
pub fn sample_uniform(
    geometry: Geometry,
    n: usize,
    r: f64,
    m: usize,
    seed: RandomSeed,
) -> Result<PointSet> {
    match geometry {
        Geometry::Sphere => sample_sphere_uniform(n, r, m, seed),
        Geometry::Hemisphere => sample_hemisphere_uniform(n, r, m, seed),
    }
}

/// The classic faulty generator: uniform draws in `[-1, 1]^n` pushed radially
/// onto the sphere. Labels record whether each draw was inside the unit ball.
pub fn sample_faulty_cube_projection(n: usize, r: f64, m: usize, seed: RandomSeed) -> Result<PointSet> {
    check_dimension(n)?;
    check_radius(r)?;
    let mut rng = seed.rng();
    let mut coords = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(m);
    let mut v = vec![0.0; n];
    for _ in 0..m {
        let len = loop {
            v.iter_mut().for_each(|x| *x = rng.random_range(-1.0..=1.0));
            let len = norm(&v);
            if len > 0.0 {
                break len;
            }
        };
        labels.push(if len <= 1.0 {
            PointLabel::InBall
        } else {
            PointLabel::OutOfBall
        });
        coords.extend(v.iter().map(|x| x * r / len));
    }
    Ok(PointSet {
        dimension: n,
        radius: r,
        coords,
        labels: Some(labels),
    })
}

/// A cap-augmented mixture and the cap it was built around.
#[derive(Debug, Clone)]
pub struct CapMixture {
    pub points: PointSet,
    /// Unit vector of the cap centre (the last coordinate axis).
    pub axis: Vec<f64>,
    /// Angular radius of the cap.
    pub colatitude: f64,
}

impl CapMixture {
    /// Whether point `index` lies inside the cap, regardless of how it was drawn.
    pub fn in_cap(&self, index: usize) -> bool {
        let p = self.points.point(index);
        let cos_angle = p[p.len() - 1] / self.points.radius();
        cos_angle >= self.colatitude.cos()
    }

    pub fn in_cap_indices(&self) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| self.in_cap(i)).collect()
    }
}

fn push_cap_point<R: Rng>(
    rng: &mut R,
    n: usize,
    r: f64,
    cap_fraction: f64,
    colatitude: f64,
    out: &mut Vec<f64>,
) -> Result<()> {
    if cap_fraction >= 0.01 {
        let cos_cap = colatitude.cos();
        let start = out.len();
        loop {
            push_gaussian_direction(rng, n, r, out);
            if out[out.len() - 1] / r >= cos_cap {
                return Ok(());
            }
            out.truncate(start);
        }
    }
    // the colatitude has cdf cap_fraction(phi) / cap_fraction(colatitude)
    let u: f64 = rng.random();
    let phi = cap_colatitude_for_fraction(n, u * cap_fraction)?.min(colatitude);
    let start = out.len();
    if n == 2 {
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        out.push(side * r * phi.sin());
    } else {
        push_gaussian_direction(rng, n - 1, r * phi.sin(), out);
    }
    out.push(r * phi.cos());
    debug_assert_eq!(out.len() - start, n);
    Ok(())
}

/// Uniform background plus informational points drawn uniformly inside a cap
/// around the last coordinate axis that covers `cap_fraction` of the surface.
///
/// `round(informational_fraction * m_total)` points are informational and the
/// rest are background, so informational points make up the requested share.
pub fn sample_cap_mixture(
    n: usize,
    r: f64,
    m_total: usize,
    cap_fraction: f64,
    informational_fraction: f64,
    seed: RandomSeed,
) -> Result<CapMixture> {
    check_dimension(n)?;
    check_radius(r)?;
    if !(cap_fraction > 0.0 && cap_fraction < 1.0) {
        return Err(Error::domain(format!("cap fraction must lie in (0, 1), got {cap_fraction}")));
    }
    if !(informational_fraction > 0.0 && informational_fraction < 1.0) {
        return Err(Error::domain(format!(
            "informational fraction must lie in (0, 1), got {informational_fraction}"
        )));
    }
    let colatitude = cap_colatitude_for_fraction(n, cap_fraction)?;
    let informational = (informational_fraction * m_total as f64 + 0.5).floor() as usize;
    let background = m_total - informational;

    let mut rng = seed.rng();
    let mut coords = Vec::with_capacity(n * m_total);
    for _ in 0..background {
        push_gaussian_direction(&mut rng, n, r, &mut coords);
    }
    for _ in 0..informational {
        push_cap_point(&mut rng, n, r, cap_fraction, colatitude, &mut coords)?;
    }
    let mut labels = vec![PointLabel::Uniform; background];
    labels.resize(m_total, PointLabel::Informational);
    let mut axis = vec![0.0; n];
    axis[n - 1] = 1.0;
    Ok(CapMixture {
        points: PointSet {
            dimension: n,
            radius: r,
            coords,
            labels: Some(labels),
        },
        axis,
        colatitude,
    })
}

/// `m_sub` uniform points of the great sub-sphere spanned by the first `n_sub`
/// axes (other coordinates zero), followed by `m - m_sub` uniform points of the
/// full `n`-dimensional sphere or hemisphere.
pub fn sample_embedded_uniform(
    n_sub: usize,
    n: usize,
    r: f64,
    m_sub: usize,
    m: usize,
    superset: Geometry,
    seed: RandomSeed,
) -> Result<PointSet> {
    if n_sub < 2 || n_sub >= n {
        return Err(Error::domain(format!(
            "embedding needs 2 <= n_sub < n, got n_sub = {n_sub}, n = {n}"
        )));
    }
    if m_sub > m {
        return Err(Error::domain(format!("subset size {m_sub} exceeds set size {m}")));
    }
    check_radius(r)?;
    let mut rng = seed.rng();
    let mut coords = Vec::with_capacity(n * m);
    for _ in 0..m_sub {
        push_gaussian_direction(&mut rng, n_sub, r, &mut coords);
        coords.extend(std::iter::repeat_n(0.0, n - n_sub));
    }
    for _ in m_sub..m {
        push_gaussian_direction(&mut rng, n, r, &mut coords);
        if superset == Geometry::Hemisphere {
            let last = coords.len() - 1;
            coords[last] = coords[last].abs();
        }
    }
    let mut labels = vec![PointLabel::Embedded; m_sub];
    labels.resize(m, PointLabel::Superset);
    Ok(PointSet {
        dimension: n,
        radius: r,
        coords,
        labels: Some(labels),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chord::cap_surface_fraction;

    fn all_norms_ok(set: &PointSet) -> bool {
        set.points().all(|p| (norm(p) - set.radius()).abs() <= 1e-9 * set.radius())
    }

    #[test]
    fn seeds_are_reproducible_and_streams_differ() {
        let a = sample_sphere_uniform(4, 1.0, 50, RandomSeed::new(7)).unwrap();
        let b = sample_sphere_uniform(4, 1.0, 50, RandomSeed::new(7)).unwrap();
        let c = sample_sphere_uniform(4, 1.0, 50, RandomSeed::with_stream(7, 1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let s = RandomSeed::new(3);
        assert_ne!(s.derive(0), s.derive(1));
        assert_eq!(s.derive(5), s.derive(5));
    }

    #[test]
    fn generators_respect_norms() {
        let seed = RandomSeed::new(11);
        assert!(all_norms_ok(&sample_sphere_uniform(7, 2.5, 300, seed).unwrap()));
        assert!(all_norms_ok(&sample_hemisphere_uniform(3, 0.5, 300, seed).unwrap()));
        assert!(all_norms_ok(&sample_faulty_cube_projection(5, 1.5, 300, seed).unwrap()));
        assert!(all_norms_ok(&sample_cap_mixture(4, 1.0, 300, 0.05, 0.2, seed).unwrap().points));
        assert!(all_norms_ok(&sample_cap_mixture(4, 1.0, 300, 0.001, 0.2, seed).unwrap().points));
        assert!(all_norms_ok(
            &sample_embedded_uniform(2, 5, 3.0, 100, 300, Geometry::Hemisphere, seed).unwrap()
        ));
    }

    #[test]
    fn hemisphere_points_have_non_negative_last_coordinate() {
        let set = sample_hemisphere_uniform(4, 1.0, 1000, RandomSeed::new(1)).unwrap();
        assert!(set.points().all(|p| p[3] >= 0.0));
    }

    #[test]
    fn sphere_sample_moments() {
        let set = sample_sphere_uniform(5, 1.0, 2000, RandomSeed::new(5)).unwrap();
        let mut sq = Vec::new();
        for i in 0..set.len() {
            for j in 0..i {
                let d2: f64 = set.point(i).iter().zip(set.point(j)).map(|(a, b)| (a - b).powi(2)).sum();
                sq.push(d2);
            }
        }
        let mean = sq.iter().sum::<f64>() / sq.len() as f64;
        // pairs share points, so use the per-point standard error as a loose band
        let var = sq.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / sq.len() as f64;
        let sigma = (var / 2000.0).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * sigma, "mean {mean} sigma {sigma}");
        let below = sq.iter().filter(|&&x| x <= 2.0).count() as f64 / sq.len() as f64;
        assert!((below - 0.5).abs() < 3.0 * (0.25 / 2000.0f64).sqrt());
    }

    #[test]
    fn faulty_generator_ball_fraction() {
        let m = 100_000;
        let set = sample_faulty_cube_projection(2, 1.0, m, RandomSeed::new(9)).unwrap();
        let inside = set.indices_with_label(PointLabel::InBall).len() as f64 / m as f64;
        let p = std::f64::consts::FRAC_PI_4;
        assert!((inside - p).abs() < 3.0 * (p * (1.0 - p) / m as f64).sqrt());
    }

    #[test]
    fn cap_mixture_counts_and_geometry() {
        let mix = sample_cap_mixture(6, 1.0, 2500, 0.05, 0.2, RandomSeed::new(2)).unwrap();
        let info = mix.points.indices_with_label(PointLabel::Informational);
        assert_eq!(info.len(), 500);
        assert!(info.iter().all(|&i| mix.in_cap(i)));
        let expected = cap_surface_fraction(6, mix.colatitude).unwrap();
        assert!((expected - 0.05).abs() < 1e-12);
        for frac in [0.001, 0.005] {
            let small = sample_cap_mixture(3, 2.0, 400, frac, 0.5, RandomSeed::new(4)).unwrap();
            let info = small.points.indices_with_label(PointLabel::Informational);
            assert!(info.iter().all(|&i| small.in_cap(i)));
        }
        assert!(sample_cap_mixture(3, 1.0, 100, 0.0, 0.2, RandomSeed::new(1)).is_err());
        assert!(sample_cap_mixture(3, 1.0, 100, 0.05, 1.0, RandomSeed::new(1)).is_err());
    }

    #[test]
    fn small_cap_inverse_cdf_is_uniform_in_cap() {
        // half of the cap area lies inside the cap of half the fraction
        let mix = sample_cap_mixture(4, 1.0, 20_000, 0.004, 0.5, RandomSeed::new(8)).unwrap();
        let inner = cap_colatitude_for_fraction(4, 0.002).unwrap();
        let info = mix.points.indices_with_label(PointLabel::Informational);
        let inside = info.iter().filter(|&&i| mix.points.point(i)[3] >= inner.cos()).count() as f64;
        let share = inside / info.len() as f64;
        assert!((share - 0.5).abs() < 3.0 * (0.25 / info.len() as f64).sqrt(), "{share}");
    }

    #[test]
    fn embedded_points_live_on_the_sub_sphere() {
        let set = sample_embedded_uniform(3, 6, 1.0, 40, 100, Geometry::Sphere, RandomSeed::new(3)).unwrap();
        for i in set.indices_with_label(PointLabel::Embedded) {
            assert!(set.point(i)[3..].iter().all(|&x| x == 0.0));
        }
        assert_eq!(set.indices_with_label(PointLabel::Superset).len(), 60);
        assert!(sample_embedded_uniform(6, 6, 1.0, 1, 2, Geometry::Sphere, RandomSeed::new(0)).is_err());
        assert!(sample_embedded_uniform(2, 6, 1.0, 3, 2, Geometry::Sphere, RandomSeed::new(0)).is_err());
        let full = sample_embedded_uniform(2, 4, 1.0, 10, 10, Geometry::Sphere, RandomSeed::new(0)).unwrap();
        assert_eq!(full.indices_with_label(PointLabel::Embedded).len(), 10);
    }

    #[test]
    fn point_set_validation() {
        assert!(PointSet::new(2, 1.0, vec![1.0, 0.0, 0.0, 1.0]).is_ok());
        assert!(matches!(
            PointSet::new(2, 1.0, vec![1.0, 0.1]),
            Err(Error::Validation(_))
        ));
        assert!(PointSet::new(2, 1.0, vec![1.0, 0.0, 1.0]).is_err());
        assert!(PointSet::new(1, 1.0, vec![1.0]).is_err());
        let set = PointSet::new(2, 1.0, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(set.clone().with_labels(vec![PointLabel::Uniform]).is_err());
        let sub = set.subset(&[1]).unwrap();
        assert_eq!(sub.point(0), &[0.0, 1.0]);
        assert!(set.subset(&[2]).is_err());
    }
}
