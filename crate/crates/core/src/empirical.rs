//! Distance histograms of pointsets and their L1 divergence from the analytic
//! chord-length laws.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chord::ChordDistribution;
use crate::error::{Error, Result};
use crate::sampling::PointSet;

/// Default number of histogram bins on `[0, 2R]`.
pub const DEFAULT_BIN_COUNT: usize = 200;

/// Which point pairs contribute distances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Every unordered pair `i < j`.
    AllPairs,
    /// Distances from one anchor point to every other point.
    FixedPoint { anchor: usize },
    /// An explicit list of index pairs.
    PairList { pairs: Vec<(usize, usize)> },
}

impl DistanceMode {
    /// Number of distances the mode produces on a set of `m` points.
    pub fn pair_count(&self, m: usize) -> u64 {
        match self {
            DistanceMode::AllPairs => (m as u64) * (m as u64).saturating_sub(1) / 2,
            DistanceMode::FixedPoint { .. } => (m as u64).saturating_sub(1),
            DistanceMode::PairList { pairs } => pairs.len() as u64,
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        match self {
            DistanceMode::AllPairs => Ok(()),
            DistanceMode::FixedPoint { anchor } if *anchor < m => Ok(()),
            DistanceMode::FixedPoint { anchor } => Err(Error::domain(format!(
                "anchor index {anchor} out of range for {m} points"
            ))),
            DistanceMode::PairList { pairs } => {
                if pairs.is_empty() {
                    return Err(Error::domain("pair list is empty"));
                }
                match pairs.iter().find(|(i, j)| i == j || *i >= m || *j >= m) {
                    Some((i, j)) => Err(Error::domain(format!("invalid pair ({i}, {j}) for {m} points"))),
                    None => Ok(()),
                }
            }
        }
    }
}

/// Histogram of distances over `[0, 2R]` with equal-width bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistanceDistribution {
    radius: f64,
    bin_mass: Vec<f64>,
    counts: Option<Vec<u64>>,
    pair_count: u64,
    mode: DistanceMode,
}

impl EmpiricalDistanceDistribution {
    /// Builds a histogram from integer bin counts.
    pub fn from_counts(radius: f64, counts: Vec<u64>, mode: DistanceMode) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::domain("histogram needs at least 2 bins"));
        }
        let total: u64 = counts.iter().sum();
        let bin_mass = if total == 0 {
            vec![0.0; counts.len()]
        } else {
            counts.iter().map(|&c| c as f64 / total as f64).collect()
        };
        Ok(Self {
            radius,
            bin_mass,
            counts: Some(counts),
            pair_count: total,
            mode,
        })
    }

    /// Builds a histogram directly from bin masses, which must sum to 1.
    pub fn from_masses(radius: f64, bin_mass: Vec<f64>, pair_count: u64, mode: DistanceMode) -> Result<Self> {
        if bin_mass.len() < 2 {
            return Err(Error::domain("histogram needs at least 2 bins"));
        }
        if bin_mass.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::validation("bin masses must be non-negative"));
        }
        let total: f64 = bin_mass.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!("bin masses sum to {total}, expected 1")));
        }
        Ok(Self {
            radius,
            bin_mass,
            counts: None,
            pair_count,
            mode,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn bin_count(&self) -> usize {
        self.bin_mass.len()
    }

    pub fn bin_mass(&self) -> &[f64] {
        &self.bin_mass
    }

    /// Raw counts, when the histogram was built from distances.
    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    pub fn pair_count(&self) -> u64 {
        self.pair_count
    }

    pub fn mode(&self) -> &DistanceMode {
        &self.mode
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * self.radius / self.bin_count() as f64
    }

    /// `B + 1` bin edges; the last one is exactly `2R`.
    pub fn bin_edges(&self) -> Vec<f64> {
        bin_edges(self.radius, self.bin_count())
    }

    /// Mass divided by bin width, i.e. a piecewise-constant density.
    pub fn density(&self) -> Vec<f64> {
        let w = self.bin_width();
        self.bin_mass.iter().map(|m| m / w).collect()
    }

    /// Cumulative mass at each right bin edge.
    pub fn cumulative(&self) -> Vec<f64> {
        self.bin_mass
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m;
                Some(*acc)
            })
            .collect()
    }
}

fn bin_edges(radius: f64, bins: usize) -> Vec<f64> {
    let mut edges: Vec<f64> = (0..=bins).map(|b| 2.0 * radius * b as f64 / bins as f64).collect();
    edges[bins] = 2.0 * radius;
    edges
}

/// Maps distances to bins; edges go right, `d >= 2R` goes to the last bin.
#[derive(Clone)]
struct Binner {
    scale: f64,
    last: usize,
    edges: Vec<f64>,
}

impl Binner {
    fn new(radius: f64, bins: usize) -> Self {
        Self {
            scale: bins as f64 / (2.0 * radius),
            last: bins - 1,
            edges: bin_edges(radius, bins),
        }
    }

    #[inline(always)]
    fn bin(&self, d: f64) -> usize {
        let mut b = ((d * self.scale) as usize).min(self.last);
        // the scaled guess can be one off next to an edge
        if d < self.edges[b] {
            b -= 1;
        } else if b < self.last && d >= self.edges[b + 1] {
            b += 1;
        }
        b
    }
}

#[inline(always)]
fn distance_dyn(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        let t = a[k] - b[k];
        s += t * t;
    }
    s.sqrt()
}

#[inline(always)]
fn distance_fixed<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    let mut s = 0.0;
    for k in 0..N {
        let t = a[k] - b[k];
        s += t * t;
    }
    s.sqrt()
}

/// Rows handled per parallel task of the AllPairs triangle.
const ROW_BLOCK: usize = 64;

fn all_pairs_fixed<const N: usize>(coords: &[f64], binner: &Binner, bins: usize) -> Vec<u64> {
    let (points, rest) = coords.as_chunks::<N>();
    debug_assert!(rest.is_empty());
    let m = points.len();
    (0..m.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .fold(
            || vec![0u64; bins],
            |mut counts, block| {
                for i in block * ROW_BLOCK..((block + 1) * ROW_BLOCK).min(m) {
                    let p = &points[i];
                    for q in &points[..i] {
                        counts[binner.bin(distance_fixed(p, q))] += 1;
                    }
                }
                counts
            },
        )
        .reduce(|| vec![0u64; bins], merge_counts)
}

fn all_pairs_dyn(set: &PointSet, binner: &Binner, bins: usize) -> Vec<u64> {
    let m = set.len();
    (0..m.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .fold(
            || vec![0u64; bins],
            |mut counts, block| {
                for i in block * ROW_BLOCK..((block + 1) * ROW_BLOCK).min(m) {
                    let p = set.point(i);
                    for j in 0..i {
                        counts[binner.bin(distance_dyn(p, set.point(j)))] += 1;
                    }
                }
                counts
            },
        )
        .reduce(|| vec![0u64; bins], merge_counts)
}

fn merge_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

fn all_pairs_counts(set: &PointSet, binner: Binner, bins: usize) -> Vec<u64> {
    let c = set.coords();
    match set.dimension() {
        2 => all_pairs_fixed::<2>(c, &binner, bins),
        3 => all_pairs_fixed::<3>(c, &binner, bins),
        4 => all_pairs_fixed::<4>(c, &binner, bins),
        5 => all_pairs_fixed::<5>(c, &binner, bins),
        6 => all_pairs_fixed::<6>(c, &binner, bins),
        7 => all_pairs_fixed::<7>(c, &binner, bins),
        8 => all_pairs_fixed::<8>(c, &binner, bins),
        9 => all_pairs_fixed::<9>(c, &binner, bins),
        10 => all_pairs_fixed::<10>(c, &binner, bins),
        11 => all_pairs_fixed::<11>(c, &binner, bins),
        12 => all_pairs_fixed::<12>(c, &binner, bins),
        _ => all_pairs_dyn(set, &binner, bins),
    }
}

/// Bin counts of the distances from `anchor` to every other point.
pub(crate) fn fixed_point_counts(set: &PointSet, anchor: usize, bins: usize) -> Vec<u64> {
    let binner = Binner::new(set.radius(), bins);
    let p = set.point(anchor);
    let mut counts = vec![0u64; bins];
    for (j, q) in set.points().enumerate() {
        if j != anchor {
            counts[binner.bin(distance_dyn(p, q))] += 1;
        }
    }
    counts
}

/// Histogram of the distances selected by `mode`, over `bin_count` bins on `[0, 2R]`.
pub fn distance_distribution(
    set: &PointSet,
    mode: &DistanceMode,
    bin_count: usize,
) -> Result<EmpiricalDistanceDistribution> {
    let m = set.len();
    if m < 2 {
        return Err(Error::domain(format!("distance distribution needs at least 2 points, got {m}")));
    }
    if bin_count < 2 {
        return Err(Error::domain(format!("bin count must be >= 2, got {bin_count}")));
    }
    mode.validate(m)?;
    let binner = Binner::new(set.radius(), bin_count);
    let counts = match mode {
        DistanceMode::AllPairs => all_pairs_counts(set, binner, bin_count),
        DistanceMode::FixedPoint { anchor } => fixed_point_counts(set, *anchor, bin_count),
        DistanceMode::PairList { pairs } => {
            let mut counts = vec![0u64; bin_count];
            for &(i, j) in pairs {
                counts[binner.bin(distance_dyn(set.point(i), set.point(j)))] += 1;
            }
            counts
        }
    };
    EmpiricalDistanceDistribution::from_counts(set.radius(), counts, mode.clone())
}

/// The point whose coordinate sum is the (lower) median, ties to the lower index.
pub fn median_coordinate_sum_anchor(set: &PointSet) -> Result<usize> {
    if set.is_empty() {
        return Err(Error::domain("anchor selection needs a non-empty set"));
    }
    let sums: Vec<f64> = set.points().map(|p| p.iter().sum::<f64>()).collect();
    let mut sorted = sums.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[(sorted.len() - 1) / 2];
    Ok(sums.iter().position(|&s| s == median).expect("median is one of the sums"))
}

/// Analytic bin masses `F(e_{b+1}) - F(e_b)` of a chord law, computed once and
/// reused across many histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBinning {
    radius: f64,
    masses: Vec<f64>,
}

impl AnalyticBinning {
    pub fn new(distribution: &dyn ChordDistribution, bin_count: usize) -> Result<Self> {
        if bin_count < 2 {
            return Err(Error::domain(format!("bin count must be >= 2, got {bin_count}")));
        }
        let radius = distribution.radius();
        let edges = bin_edges(radius, bin_count);
        let cdf: Vec<f64> = edges.iter().map(|&e| distribution.cdf(e)).collect::<Result<_>>()?;
        let masses = cdf.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
        Ok(Self { radius, masses })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn bin_count(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `Σ_b |g_b - f_b|`.
    pub fn l1(&self, emp: &EmpiricalDistanceDistribution) -> Result<f64> {
        if (emp.radius() - self.radius).abs() > 1e-12 * self.radius {
            return Err(Error::domain(format!(
                "support mismatch: histogram radius {} vs analytic radius {}",
                emp.radius(),
                self.radius
            )));
        }
        if emp.bin_count() != self.bin_count() {
            return Err(Error::domain(format!(
                "bin mismatch: histogram has {} bins, analytic binning {}",
                emp.bin_count(),
                self.bin_count()
            )));
        }
        Ok(self.l1_of_masses(emp.bin_mass()))
    }

    pub(crate) fn l1_of_masses(&self, mass: &[f64]) -> f64 {
        mass.iter().zip(&self.masses).map(|(g, f)| (g - f).abs()).sum::<f64>().min(2.0)
    }

    /// L1 of raw counts with total `k`, avoiding an intermediate histogram.
    pub(crate) fn l1_of_counts(&self, counts: &[u64]) -> f64 {
        let total: u64 = counts.iter().sum();
        let inv = 1.0 / total as f64;
        counts
            .iter()
            .zip(&self.masses)
            .map(|(&c, f)| (c as f64 * inv - f).abs())
            .sum::<f64>()
            .min(2.0)
    }
}

/// L1 divergence between a histogram and a chord law on the same support.
pub fn l1_distance(emp: &EmpiricalDistanceDistribution, analytic: &dyn ChordDistribution) -> Result<f64> {
    if (emp.radius() - analytic.radius()).abs() > 1e-12 * analytic.radius() {
        return Err(Error::domain(format!(
            "support mismatch: histogram radius {} vs analytic radius {}",
            emp.radius(),
            analytic.radius()
        )));
    }
    AnalyticBinning::new(analytic, emp.bin_count())?.l1(emp)
}
