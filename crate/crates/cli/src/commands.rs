use std::fs;
use std::path::Path;

use chordlen::chord::distribution_for;
use chordlen::io::{curve_rows, format_curve_rows, format_points, parse_points, ParseOptions};
use chordlen::sampling::{
    sample_cap_mixture, sample_embedded_uniform, sample_faulty_cube_projection, sample_hemisphere_uniform,
    sample_sphere_uniform,
};
use chordlen::uniformity::{
    calibrate_threshold, detect_embedded_subset, extract_uniform_subset, precision_recall, test_uniformity,
    CalibrationTable, UniformityReport,
};
use chordlen::{Error, Geometry, PointLabel, PointSet, RandomSeed, Result};
use serde::{Deserialize, Serialize};

use crate::cli::*;
use crate::manifest::{write_json, write_text, RunManifest};

#[derive(Debug, Serialize)]
struct AnalyzeOutput {
    manifest: RunManifest,
    #[serde(flatten)]
    report: UniformityReport,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub manifest: RunManifest,
    pub threshold: f64,
    pub extrapolated_median: f64,
    pub table: CalibrationTable,
}

#[derive(Debug, Serialize)]
struct ExtractOutput {
    manifest: RunManifest,
    l1: f64,
    max_uniform_count: usize,
    selected: Vec<usize>,
    rejected: Vec<usize>,
    tie_at_cut: bool,
    empty_selection: bool,
    /// Against points labelled `informational`, when the input carries labels.
    precision: Option<f64>,
    recall: Option<f64>,
}

#[derive(Debug, Serialize)]
struct DetectOutput {
    manifest: RunManifest,
    n_sub: usize,
    m_sub: usize,
    selected: Vec<usize>,
    ranked_indices: Vec<usize>,
    scores: Vec<f64>,
    detection_rate: Option<f64>,
}

fn seed_of(s: &SeedArgs) -> RandomSeed {
    RandomSeed::with_stream(s.seed, s.stream)
}

fn load(input: &InputArgs) -> Result<PointSet> {
    parse_points(
        &input.input,
        input.format.into(),
        ParseOptions {
            min_size: input.min_size,
        },
    )
}

pub fn sample(args: &SampleArgs) -> Result<()> {
    let seed = seed_of(&args.seed);
    let (n, r, m) = (args.n, args.r, args.m);
    let set = match args.generator {
        Generator::Sphere => sample_sphere_uniform(n, r, m, seed)?,
        Generator::Hemisphere => sample_hemisphere_uniform(n, r, m, seed)?,
        Generator::FaultyCube => sample_faulty_cube_projection(n, r, m, seed)?,
        Generator::CapMixture => sample_cap_mixture(n, r, m, args.cap_fraction, args.info_fraction, seed)?.points,
        Generator::Embedded => {
            let m_sub = args.m_sub.unwrap_or(m / 2);
            sample_embedded_uniform(args.n_sub, n, r, m_sub, m, args.superset.into(), seed)?
        }
    };
    write_text(args.out.as_deref(), &format_points(&set))
}

fn calibrate_for(
    n: usize,
    r: f64,
    m: usize,
    geometry: Geometry,
    args: &CalibrationArgs,
) -> Result<CalibrationTable> {
    calibrate_threshold(
        n,
        r,
        geometry,
        m,
        args.mode.into(),
        args.bins,
        args.replicates,
        args.alpha,
        seed_of(&args.seed),
    )
}

pub fn load_calibration(path: &Path) -> Result<CalibrationTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let file: CalibrationFile = serde_json::from_str(&text)
        .map_err(|e| Error::Validation(format!("{}: not a calibration file: {e}", path.display())))?;
    file.table.validate()?;
    Ok(file.table)
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let set = load(&args.input)?;
    let geometry = args.geometry.into();
    let table = match &args.calibration {
        Some(path) => load_calibration(path)?,
        None => calibrate_for(set.dimension(), set.radius(), set.len(), geometry, &args.calibrate)?,
    };
    let report = test_uniformity(&set, geometry, &table)?;
    write_json(
        args.out.as_deref(),
        &AnalyzeOutput {
            manifest: RunManifest::new("analyze", args),
            report,
        },
    )
}

pub fn calibrate(args: &CalibrateArgs) -> Result<()> {
    let table = calibrate_for(args.n, args.r, args.m, args.geometry.into(), &args.calibrate)?;
    write_json(
        args.out.as_deref(),
        &CalibrationFile {
            manifest: RunManifest::new("calibrate", args),
            threshold: table.threshold(),
            extrapolated_median: table.extrapolated_median(),
            table,
        },
    )
}

pub fn extract(args: &ExtractArgs) -> Result<()> {
    let set = load(&args.input)?;
    let out = extract_uniform_subset(&set, args.repetitions, args.bins, seed_of(&args.seed))?;
    let truth = set.indices_with_label(PointLabel::Informational);
    let (precision, recall) = if truth.is_empty() {
        (None, None)
    } else {
        let (p, r) = precision_recall(&out.rejected, &truth);
        (Some(p), Some(r))
    };
    write_json(
        args.out.as_deref(),
        &ExtractOutput {
            manifest: RunManifest::new("extract", args),
            l1: out.l1,
            max_uniform_count: out.max_uniform_count,
            selected: out.selected,
            rejected: out.rejected,
            tie_at_cut: out.tie_at_cut,
            empty_selection: out.empty_selection,
            precision,
            recall,
        },
    )
}

pub fn detect(args: &DetectArgs) -> Result<()> {
    let set = load(&args.input)?;
    let out = detect_embedded_subset(&set, args.n_sub, args.m_sub, args.bins)?;
    write_json(
        args.out.as_deref(),
        &DetectOutput {
            manifest: RunManifest::new("detect", args),
            n_sub: args.n_sub,
            m_sub: args.m_sub,
            selected: out.selected,
            ranked_indices: out.ranked_indices,
            scores: out.scores,
            detection_rate: out.detection_rate,
        },
    )
}

pub fn curves(args: &CurvesArgs) -> Result<()> {
    let law = distribution_for(args.geometry.into(), args.n, args.r)?;
    let rows = curve_rows(law.as_ref(), args.samples)?;
    write_text(args.out.as_deref(), &format_curve_rows(&rows))
}
