//! Decision layer: threshold calibration, uniformity verdicts, the uniform
//! subset bound, Monte-Carlo subset extraction, doubling validation of point
//! generators and detection of embedded lower-dimensional subsets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chord::{distribution_for, Geometry, SphereChordDistribution};
use crate::empirical::{
    distance_distribution, fixed_point_counts, median_coordinate_sum_anchor, AnalyticBinning,
    DistanceMode,
};
use crate::error::{Error, Result};
use crate::sampling::{sample_sphere_uniform, sample_uniform, PointLabel, PointSet, RandomSeed};

pub const DEFAULT_ALPHA_PERCENT: f64 = 1.0;
pub const DEFAULT_REPLICATES: usize = 100;
/// Largest reference set used during calibration.
pub const MAX_REFERENCE_SIZE: usize = 1000;
pub const DEFAULT_REPETITIONS: usize = 100;
pub const DEFAULT_PER_POINT_BINS: usize = 32;
pub const DEFAULT_MAX_DOUBLINGS: usize = 6;
/// Adjacent L1 ratio below which a doubling run is declared buggy.
pub const BUG_RATIO: f64 = 1.3;

/// Distance regime used for the test, without the concrete indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    /// Intra-set distances of `M` points.
    AllPairs,
    /// Distances from the median-coordinate-sum point to the other `M - 1`.
    FixedPoint,
    /// `M` independent pairs, i.e. `2M` points paired consecutively.
    PairList,
}

impl ModeKind {
    /// Pair count `k` of a regime at size `m` (points, or pairs for `PairList`).
    pub fn pair_count(self, m: usize) -> u64 {
        let m = m as u64;
        match self {
            ModeKind::AllPairs => m * m.saturating_sub(1) / 2,
            ModeKind::FixedPoint => m.saturating_sub(1),
            ModeKind::PairList => m,
        }
    }

    /// The concrete mode this regime applies to `set`.
    pub fn resolve(self, set: &PointSet) -> Result<DistanceMode> {
        Ok(match self {
            ModeKind::AllPairs => DistanceMode::AllPairs,
            ModeKind::FixedPoint => DistanceMode::FixedPoint {
                anchor: median_coordinate_sum_anchor(set)?,
            },
            ModeKind::PairList => DistanceMode::PairList {
                pairs: (0..set.len() / 2).map(|i| (2 * i, 2 * i + 1)).collect(),
            },
        })
    }

    fn of(mode: &DistanceMode) -> Self {
        match mode {
            DistanceMode::AllPairs => ModeKind::AllPairs,
            DistanceMode::FixedPoint { .. } => ModeKind::FixedPoint,
            DistanceMode::PairList { .. } => ModeKind::PairList,
        }
    }
}

/// Null distribution of the L1 score for uniform data at a reference size,
/// plus what is needed to extrapolate it to the target size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub dimension: usize,
    pub radius: f64,
    pub geometry: Geometry,
    pub mode: ModeKind,
    pub target_size: usize,
    pub reference_size: usize,
    pub bin_count: usize,
    pub replicate_count: usize,
    pub alpha_percent: f64,
    pub quantile_l1: f64,
    pub median_l1: f64,
    pub seed: RandomSeed,
}

impl CalibrationTable {
    /// `sqrt(k'/k)` for the target size.
    pub fn extrapolation_factor(&self) -> f64 {
        self.factor_for_pairs(self.mode.pair_count(self.target_size))
    }

    fn factor_for_pairs(&self, k: u64) -> f64 {
        (self.mode.pair_count(self.reference_size) as f64 / k as f64).sqrt()
    }

    /// The α%-largest reference L1 extrapolated to the target size.
    pub fn threshold(&self) -> f64 {
        self.quantile_l1 * self.extrapolation_factor()
    }

    /// Median reference L1 extrapolated to the target size.
    pub fn extrapolated_median(&self) -> f64 {
        self.median_l1 * self.extrapolation_factor()
    }

    /// Threshold for a histogram of `k` distances.
    pub fn threshold_for_pairs(&self, k: u64) -> f64 {
        self.quantile_l1 * self.factor_for_pairs(k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicate_count < 20 {
            return Err(Error::domain("calibration needs at least 20 replicates"));
        }
        if !(self.alpha_percent > 0.0 && self.alpha_percent < 50.0) {
            return Err(Error::domain("alpha must lie in (0, 50) percent"));
        }
        if !(self.quantile_l1 >= self.median_l1 && self.median_l1 >= 0.0) {
            return Err(Error::validation("calibration quantile must dominate the median"));
        }
        Ok(())
    }
}

/// Generates `replicates` uniform sets at `min(target_size, 1000)` and records
/// the α%-largest and the median of their L1 scores.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_threshold(
    n: usize,
    r: f64,
    geometry: Geometry,
    target_size: usize,
    mode: ModeKind,
    bin_count: usize,
    replicates: usize,
    alpha_percent: f64,
    seed: RandomSeed,
) -> Result<CalibrationTable> {
    if replicates < 20 {
        return Err(Error::domain(format!("calibration needs at least 20 replicates, got {replicates}")));
    }
    if !(alpha_percent > 0.0 && alpha_percent < 50.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 50) percent, got {alpha_percent}")));
    }
    let min_size = if mode == ModeKind::PairList { 1 } else { 2 };
    if target_size < min_size {
        return Err(Error::domain(format!("target size {target_size} is too small")));
    }
    let reference_size = target_size.min(MAX_REFERENCE_SIZE);
    let law = distribution_for(geometry, n, r)?;
    let binning = AnalyticBinning::new(law.as_ref(), bin_count)?;
    let points_per_set = if mode == ModeKind::PairList {
        2 * reference_size
    } else {
        reference_size
    };

    let mut scores: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|q| {
            let set = sample_uniform(geometry, n, r, points_per_set, seed.derive(q))?;
            let hist = distance_distribution(&set, &mode.resolve(&set)?, bin_count)?;
            binning.l1(&hist)
        })
        .collect::<Result<_>>()?;
    scores.sort_by(|a, b| b.total_cmp(a));
    let rank = ((replicates as f64 * alpha_percent / 100.0).ceil() as usize).max(1) - 1;
    let quantile_l1 = scores[rank];
    let median_l1 = median_of_sorted(&scores);

    let table = CalibrationTable {
        dimension: n,
        radius: r,
        geometry,
        mode,
        target_size,
        reference_size,
        bin_count,
        replicate_count: replicates,
        alpha_percent,
        quantile_l1,
        median_l1,
        seed,
    };
    table.validate()?;
    Ok(table)
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

/// Median of unsorted values.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    median_of_sorted(&v)
}

/// Outcome of comparing an L1 score against the calibrated threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Passing the test does not prove uniformity; it only fails to reject it.
    UniformCompatible,
    NonUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub l1: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub confidence_percent: f64,
    /// Largest share of the set that can be uniform; absent for hemispheres,
    /// where no such bound holds.
    pub max_uniform_fraction: Option<f64>,
    pub max_uniform_count: Option<usize>,
    /// `M - M_u`: points that must be non-uniform.
    pub non_uniform_lower_bound: Option<usize>,
    pub geometry: Geometry,
    pub dimension: usize,
    pub radius: f64,
    pub point_count: usize,
    pub pair_count: u64,
    pub bin_count: usize,
    pub mode: DistanceMode,
    /// Set for fixed-point tests on hemispheres, whose limit law depends on the anchor.
    pub anchor_dependent: bool,
    pub calibration: CalibrationTable,
}

/// Tests `set` in the regime recorded in `calibration`.
pub fn test_uniformity(
    set: &PointSet,
    geometry: Geometry,
    calibration: &CalibrationTable,
) -> Result<UniformityReport> {
    let mode = calibration.mode.resolve(set)?;
    test_uniformity_with_mode(set, geometry, &mode, calibration)
}

/// Like [`test_uniformity`] with an explicit distance mode of the same kind as the calibration.
pub fn test_uniformity_with_mode(
    set: &PointSet,
    geometry: Geometry,
    mode: &DistanceMode,
    calibration: &CalibrationTable,
) -> Result<UniformityReport> {
    calibration.validate()?;
    if geometry != calibration.geometry {
        return Err(Error::domain(format!(
            "set geometry {geometry} does not match calibration geometry {}",
            calibration.geometry
        )));
    }
    if set.dimension() != calibration.dimension
        || (set.radius() - calibration.radius).abs() > 1e-12 * calibration.radius
    {
        return Err(Error::domain(format!(
            "set (N = {}, R = {}) does not match calibration (N = {}, R = {})",
            set.dimension(),
            set.radius(),
            calibration.dimension,
            calibration.radius
        )));
    }
    if ModeKind::of(mode) != calibration.mode {
        return Err(Error::domain("distance mode differs from the calibrated regime"));
    }
    let law = distribution_for(geometry, set.dimension(), set.radius())?;
    let hist = distance_distribution(set, mode, calibration.bin_count)?;
    let l1 = AnalyticBinning::new(law.as_ref(), calibration.bin_count)?.l1(&hist)?;
    let threshold = calibration.threshold_for_pairs(hist.pair_count());
    let m = set.len();
    let (fraction, count) = match geometry {
        Geometry::Sphere => (Some(max_uniform_fraction(l1)?), Some(max_uniform_count(m, l1)?)),
        Geometry::Hemisphere => (None, None),
    };
    Ok(UniformityReport {
        l1,
        threshold,
        verdict: if l1 > threshold {
            Verdict::NonUniform
        } else {
            Verdict::UniformCompatible
        },
        confidence_percent: 100.0 - calibration.alpha_percent,
        max_uniform_fraction: fraction,
        max_uniform_count: count,
        non_uniform_lower_bound: count.map(|c| m - c),
        geometry,
        dimension: set.dimension(),
        radius: set.radius(),
        point_count: m,
        pair_count: hist.pair_count(),
        bin_count: calibration.bin_count,
        mode: mode.clone(),
        anchor_dependent: geometry == Geometry::Hemisphere && matches!(mode, DistanceMode::FixedPoint { .. }),
        calibration: calibration.clone(),
    })
}

/// Upper bound `1 - sqrt(L/2)` on the uniform share of a sphere pointset.
pub fn max_uniform_fraction(l1: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&l1) {
        return Err(Error::domain(format!("L1 must lie in [0, 2], got {l1}")));
    }
    Ok((1.0 - (l1 / 2.0).sqrt()).clamp(0.0, 1.0))
}

/// `M_u = round_half_up(M * (1 - sqrt(L/2)))`.
pub fn max_uniform_count(m: usize, l1: f64) -> Result<usize> {
    let f = max_uniform_fraction(l1)?;
    Ok(((m as f64 * f + 0.5).floor() as usize).min(m))
}

/// Accumulated nearest-neighbour votes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteState {
    pub votes: Vec<u64>,
    pub repetitions_done: usize,
    pub target: usize,
}

impl VoteState {
    pub fn new(m: usize, target: usize) -> Self {
        Self {
            votes: vec![0; m],
            repetitions_done: 0,
            target,
        }
    }

    /// Adds the votes of another batch of complete repetitions.
    pub fn merge(&mut self, votes: &[u64], repetitions: usize) {
        self.votes.iter_mut().zip(votes).for_each(|(a, b)| *a += b);
        self.repetitions_done += repetitions;
    }

    pub fn total(&self) -> u64 {
        self.votes.iter().sum()
    }

    /// Indices by descending votes, ties to the lower index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.votes.len()).collect();
        order.sort_by(|&a, &b| self.votes[b].cmp(&self.votes[a]).then(a.cmp(&b)));
        order
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    /// The `M_u` most-voted points, estimated uniform.
    pub selected: Vec<usize>,
    /// Everything else: the estimated non-uniform part.
    pub rejected: Vec<usize>,
    pub votes: VoteState,
    pub l1: f64,
    pub max_uniform_count: usize,
    /// The vote count at the cut is shared by points on both sides.
    pub tie_at_cut: bool,
    /// `M_u` was zero, so nothing was selected.
    pub empty_selection: bool,
}

#[inline]
fn nearest_fixed<const N: usize>(points: &[[f64; N]], q: &[f64]) -> usize {
    let q: &[f64; N] = q.try_into().expect("query has the set dimension");
    let mut best = 0;
    let mut best_dot = f64::NEG_INFINITY;
    for (i, p) in points.iter().enumerate() {
        let mut dot = 0.0;
        for k in 0..N {
            dot += p[k] * q[k];
        }
        if dot > best_dot {
            best_dot = dot;
            best = i;
        }
    }
    best
}

fn nearest_dyn(set: &PointSet, q: &[f64]) -> usize {
    let mut best = 0;
    let mut best_dot = f64::NEG_INFINITY;
    for (i, p) in set.points().enumerate() {
        let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
        if dot > best_dot {
            best_dot = dot;
            best = i;
        }
    }
    best
}

fn vote_round<const N: usize>(set: &PointSet, generated: &PointSet, votes: &mut [u64]) {
    let (points, _) = set.coords().as_chunks::<N>();
    for q in generated.points() {
        votes[nearest_fixed(points, q)] += 1;
    }
}

fn cast_votes(set: &PointSet, generated: &PointSet, votes: &mut [u64]) {
    match set.dimension() {
        2 => vote_round::<2>(set, generated, votes),
        3 => vote_round::<3>(set, generated, votes),
        4 => vote_round::<4>(set, generated, votes),
        5 => vote_round::<5>(set, generated, votes),
        6 => vote_round::<6>(set, generated, votes),
        7 => vote_round::<7>(set, generated, votes),
        8 => vote_round::<8>(set, generated, votes),
        _ => {
            for q in generated.points() {
                votes[nearest_dyn(set, q)] += 1;
            }
        }
    }
}

/// Monte-Carlo voting: each of `repetitions` rounds draws `M_u` uniform points
/// and every draw votes for its nearest point of `set`. The `M_u` most-voted
/// points form the estimated uniform subset.
pub fn extract_uniform_subset(
    set: &PointSet,
    repetitions: usize,
    bin_count: usize,
    seed: RandomSeed,
) -> Result<Extraction> {
    let m = set.len();
    if m < 2 {
        return Err(Error::domain("extraction needs at least 2 points"));
    }
    let law = SphereChordDistribution::new(set.dimension(), set.radius())?;
    let hist = distance_distribution(set, &DistanceMode::AllPairs, bin_count)?;
    let l1 = AnalyticBinning::new(&law, bin_count)?.l1(&hist)?;
    let target = max_uniform_count(m, l1)?;
    extract_with_target(set, target, l1, repetitions, seed)
}

/// Voting with a caller-supplied subset size.
pub fn extract_with_target(
    set: &PointSet,
    target: usize,
    l1: f64,
    repetitions: usize,
    seed: RandomSeed,
) -> Result<Extraction> {
    let m = set.len();
    if target > m {
        return Err(Error::domain(format!("target {target} exceeds set size {m}")));
    }
    let mut state = VoteState::new(m, target);
    if target == 0 {
        return Ok(Extraction {
            selected: Vec::new(),
            rejected: (0..m).collect(),
            votes: state,
            l1,
            max_uniform_count: 0,
            tie_at_cut: false,
            empty_selection: true,
        });
    }
    let (n, r) = (set.dimension(), set.radius());
    let votes = (0..repetitions as u64)
        .into_par_iter()
        .try_fold(
            || vec![0u64; m],
            |mut votes, round| {
                let generated = sample_sphere_uniform(n, r, target, seed.derive(round))?;
                cast_votes(set, &generated, &mut votes);
                Ok::<_, Error>(votes)
            },
        )
        .try_reduce(|| vec![0u64; m], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            Ok(a)
        })?;
    state.merge(&votes, repetitions);

    let ranking = state.ranking();
    let tie_at_cut = target < m && state.votes[ranking[target - 1]] == state.votes[ranking[target]];
    let mut selected = ranking[..target].to_vec();
    let mut rejected = ranking[target..].to_vec();
    selected.sort_unstable();
    rejected.sort_unstable();
    Ok(Extraction {
        selected,
        rejected,
        votes: state,
        l1,
        max_uniform_count: target,
        tie_at_cut,
        empty_selection: false,
    })
}

/// Precision and recall of `predicted` against `truth` (index sets).
pub fn precision_recall(predicted: &[usize], truth: &[usize]) -> (f64, f64) {
    let truth: std::collections::HashSet<usize> = truth.iter().copied().collect();
    let hits = predicted.iter().filter(|i| truth.contains(i)).count() as f64;
    let precision = if predicted.is_empty() { 0.0 } else { hits / predicted.len() as f64 };
    let recall = if truth.is_empty() { 0.0 } else { hits / truth.len() as f64 };
    (precision, recall)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DoublingVerdict {
    Validated,
    BugDetected,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingStep {
    pub size: usize,
    pub l1: f64,
    /// L1 of the previous (half-size) set divided by this one.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingOutcome {
    pub verdict: DoublingVerdict,
    pub trace: Vec<DoublingStep>,
}

/// Checks a generator by doubling the set size: uniform output should halve
/// the AllPairs L1 at every step until it drops below `l1_floor`, while a
/// biased generator plateaus.
#[allow(clippy::too_many_arguments)]
pub fn doubling_validation<G>(
    generator: G,
    geometry: Geometry,
    n: usize,
    r: f64,
    m_initial: usize,
    l1_floor: f64,
    bin_count: usize,
    max_doublings: usize,
    seed: RandomSeed,
) -> Result<DoublingOutcome>
where
    G: Fn(usize, RandomSeed) -> Result<PointSet>,
{
    if m_initial < 100 {
        return Err(Error::domain(format!("initial size must be >= 100, got {m_initial}")));
    }
    let law = distribution_for(geometry, n, r)?;
    let binning = AnalyticBinning::new(law.as_ref(), bin_count)?;
    let score = |m: usize, step: u64| -> Result<f64> {
        let set = generator(m, seed.derive(step))?;
        if set.dimension() != n || set.len() != m {
            return Err(Error::validation("generator returned a set of the wrong shape"));
        }
        binning.l1(&distance_distribution(&set, &DistanceMode::AllPairs, bin_count)?)
    };

    let mut m = m_initial;
    let mut l1 = score(m, 0)?;
    let mut trace = vec![DoublingStep { size: m, l1, ratio: None }];
    if l1 < l1_floor {
        return Ok(DoublingOutcome {
            verdict: DoublingVerdict::Validated,
            trace,
        });
    }
    for step in 1..=max_doublings as u64 {
        m *= 2;
        let next = score(m, step)?;
        let ratio = l1 / next;
        trace.push(DoublingStep {
            size: m,
            l1: next,
            ratio: Some(ratio),
        });
        if next < l1_floor {
            return Ok(DoublingOutcome {
                verdict: DoublingVerdict::Validated,
                trace,
            });
        }
        if ratio < BUG_RATIO {
            return Ok(DoublingOutcome {
                verdict: DoublingVerdict::BugDetected,
                trace,
            });
        }
        l1 = next;
    }
    Ok(DoublingOutcome {
        verdict: DoublingVerdict::Inconclusive,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    /// All indices by ascending per-point L1, ties to the lower index.
    pub ranked_indices: Vec<usize>,
    pub scores: Vec<f64>,
    /// The first `m_sub` of the ranking.
    pub selected: Vec<usize>,
    /// Share of `selected` that is labelled embedded, when labels exist.
    pub detection_rate: Option<f64>,
}

/// Scores each point by the L1 between its fixed-point distance histogram and
/// the `n_sub`-sphere chord law; the `m_sub` lowest scores are returned as the
/// embedded subset. Deterministic.
pub fn detect_embedded_subset(
    set: &PointSet,
    n_sub: usize,
    m_sub: usize,
    per_point_bins: usize,
) -> Result<DetectionResult> {
    let m = set.len();
    if n_sub < 2 || n_sub >= set.dimension() {
        return Err(Error::domain(format!(
            "subset dimension must satisfy 2 <= n_sub < N = {}, got {n_sub}",
            set.dimension()
        )));
    }
    if !(2..=m).contains(&m_sub) {
        return Err(Error::domain(format!("subset size must lie in [2, {m}], got {m_sub}")));
    }
    let law = SphereChordDistribution::new(n_sub, set.radius())?;
    let binning = AnalyticBinning::new(&law, per_point_bins)?;
    let scores: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| binning.l1_of_counts(&fixed_point_counts(set, i, per_point_bins)))
        .collect();
    let mut ranked_indices: Vec<usize> = (0..m).collect();
    ranked_indices.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let selected = ranked_indices[..m_sub].to_vec();
    let detection_rate = set.labels().map(|labels| {
        selected.iter().filter(|&&i| labels[i] == PointLabel::Embedded).count() as f64 / m_sub as f64
    });
    Ok(DetectionResult {
        ranked_indices,
        scores,
        selected,
        detection_rate,
    })
}
