//! Chord-length distributions on hyperspheres and hyper-hemispheres, and a
//! spatial uniformity toolkit built on them.
//!
//! The distance between two independent uniform points on the surface of an
//! N-sphere follows a closed-form chord-length law. Comparing the empirical
//! distance histogram of a pointset against that law gives an L1 score that
//! vanishes for uniform data at rate `k^{-1/2}` in the number of pairs `k`.
//!
//! Modules, bottom up:
//! - [`special`]: log-gamma, Beta, regularized incomplete Beta, quadrature.
//! - [`chord`]: sphere and hemisphere chord-length distributions.
//! - [`sampling`]: seeded generators for uniform and non-uniform fixtures.
//! - [`empirical`]: distance histograms and the L1 measure.
//! - [`uniformity`]: calibration, tests, subset bounds, extraction, detection.
//! - [`io`]: points CSV and lat/lon ingestion, curve tables.

pub mod chord;
pub mod empirical;
pub mod error;
pub mod io;
pub mod sampling;
pub mod special;
pub mod uniformity;

pub use chord::{ChordDistribution, Geometry, HemisphereChordDistribution, SphereChordDistribution};
pub use empirical::{
    distance_distribution, l1_distance, AnalyticBinning, DistanceMode, EmpiricalDistanceDistribution,
};
pub use error::{Error, Result};
pub use sampling::{PointLabel, PointSet, RandomSeed};
