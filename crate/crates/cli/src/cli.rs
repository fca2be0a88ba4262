use std::path::PathBuf;

use chordlen::uniformity::{
    ModeKind, DEFAULT_ALPHA_PERCENT, DEFAULT_PER_POINT_BINS, DEFAULT_REPETITIONS, DEFAULT_REPLICATES,
};
use chordlen::empirical::DEFAULT_BIN_COUNT;
use chordlen::io::{PointFormat, DEFAULT_CURVE_SAMPLES};
use chordlen::Geometry;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "chordlen", version, about = "Chord-length uniformity tests for points on hyperspheres")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a pointset and write it as points CSV.
    Sample(SampleArgs),
    /// Score a pointset against the chord-length law and write a JSON report.
    Analyze(AnalyzeArgs),
    /// Build a calibration table of uniform L1 scores and write it as JSON.
    Calibrate(CalibrateArgs),
    /// Estimate the largest uniform subset by nearest-point voting.
    Extract(ExtractArgs),
    /// Rank points by how well their distances match a lower-dimensional sphere.
    Detect(DetectArgs),
    /// Write (d, pdf, cdf) samples of a chord-length law as CSV.
    Curves(CurvesArgs),
    /// Rerun one of the bundled experiments and write its table as CSV.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryArg {
    Sphere,
    Hemisphere,
}

impl From<GeometryArg> for Geometry {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Sphere => Geometry::Sphere,
            GeometryArg::Hemisphere => Geometry::Hemisphere,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    AllPairs,
    FixedPoint,
    PairList,
}

impl From<ModeArg> for ModeKind {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::AllPairs => ModeKind::AllPairs,
            ModeArg::FixedPoint => ModeKind::FixedPoint,
            ModeArg::PairList => ModeKind::PairList,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    /// `# dim=N radius=R` header, then one comma-separated point per row,
    /// optionally followed by a label.
    Csv,
    /// Rows `lat_deg,lon_deg[,size]` in geographic degrees, mapped to
    /// (cos lat cos lon, cos lat sin lon, sin lat) on the unit sphere.
    LatlonCsv,
}

impl From<FormatArg> for PointFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => PointFormat::Csv,
            FormatArg::LatlonCsv => PointFormat::LatlonCsv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Sphere,
    Hemisphere,
    /// Cube points projected onto the sphere (deliberately non-uniform).
    FaultyCube,
    /// Uniform background plus extra points inside one cap.
    CapMixture,
    /// Uniform points of a lower-dimensional sphere mixed into a superset.
    Embedded,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeedArgs {
    /// Base random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent stream under the same seed.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Points file.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Keep only lat/lon rows whose size column is at least this value.
    #[arg(long)]
    pub min_size: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub generator: Generator,
    /// Ambient dimension N (points live on the (N-1)-sphere in R^N).
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Number of points.
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Cap area as a share of the sphere (cap-mixture).
    #[arg(long, default_value_t = 0.05)]
    pub cap_fraction: f64,
    /// Share of all points placed inside the cap (cap-mixture).
    #[arg(long, default_value_t = 0.2)]
    pub info_fraction: f64,
    /// Dimension of the embedded sphere (embedded).
    #[arg(long, default_value_t = 2)]
    pub n_sub: usize,
    /// Number of embedded points (embedded); defaults to half of M.
    #[arg(long)]
    pub m_sub: Option<usize>,
    /// Geometry of the background points (embedded).
    #[arg(long, value_enum, default_value_t = GeometryArg::Sphere)]
    pub superset: GeometryArg,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrationArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::AllPairs)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_BIN_COUNT)]
    pub bins: usize,
    /// Number of uniform reference sets.
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    pub replicates: usize,
    /// Significance level in percent.
    #[arg(long, default_value_t = DEFAULT_ALPHA_PERCENT)]
    pub alpha: f64,
    #[command(flatten)]
    pub seed: SeedArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = GeometryArg::Sphere)]
    pub geometry: GeometryArg,
    /// Load a table written by `calibrate` instead of calibrating afresh.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[command(flatten)]
    pub calibrate: CalibrationArgs,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Size of the sets the table will be used for.
    #[arg(long)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = GeometryArg::Sphere)]
    pub geometry: GeometryArg,
    #[command(flatten)]
    pub calibrate: CalibrationArgs,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Voting rounds.
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    pub repetitions: usize,
    #[arg(long, default_value_t = DEFAULT_BIN_COUNT)]
    pub bins: usize,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Dimension of the sought sphere.
    #[arg(long)]
    pub n_sub: usize,
    /// Number of points to select.
    #[arg(long)]
    pub m_sub: usize,
    #[arg(long, default_value_t = DEFAULT_PER_POINT_BINS)]
    pub bins: usize,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurvesArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, value_enum, default_value_t = GeometryArg::Sphere)]
    pub geometry: GeometryArg,
    /// Number of intervals over [0, 2R]; one more row is written.
    #[arg(long, default_value_t = DEFAULT_CURVE_SAMPLES)]
    pub samples: usize,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Cube-projection generator at N=2: L1, bounds and half-size ratio.
    FaultyGen,
    /// Precision and recall of voting extraction on cap mixtures.
    CapMixture,
    /// Detection rate of embedded uniform subsets.
    Embedded,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// Minutes-scale parameters (the default).
    #[arg(long, conflicts_with = "full")]
    pub scaled: bool,
    /// Full-scale parameters; can take hours.
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
