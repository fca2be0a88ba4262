//! Text formats: points CSV, geographic lat/lon CSV and `d,pdf,cdf` curve tables.
//!
//! Points CSV starts with a `# dim=N radius=R` header followed by one point per
//! row. A row may carry one trailing label field (see [`PointLabel`]).
//! Coordinates are written with 17 significant digits so that files round-trip
//! exactly.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chord::ChordDistribution;
use crate::empirical::EmpiricalDistanceDistribution;
use crate::error::{Error, Result};
use crate::sampling::{norm, PointLabel, PointSet};

/// Relative norm deviation tolerated (and corrected) on ingestion.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;
/// Default number of intervals of a curve table over `[0, 2R]`.
pub const DEFAULT_CURVE_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointFormat {
    Csv,
    LatlonCsv,
}

impl FromStr for PointFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(PointFormat::Csv),
            "latlon-csv" => Ok(PointFormat::LatlonCsv),
            other => Err(Error::domain(format!("unknown point format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParseOptions {
    /// For lat/lon input: drop rows whose size column is below this value.
    pub min_size: Option<f64>,
}

pub fn parse_points(path: &Path, format: PointFormat, options: ParseOptions) -> Result<PointSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_points_str(&text, format, options)
}

pub fn parse_points_str(text: &str, format: PointFormat, options: ParseOptions) -> Result<PointSet> {
    match format {
        PointFormat::Csv => parse_csv(text),
        PointFormat::LatlonCsv => parse_latlon(text, options),
    }
}

fn parse_header(line: &str) -> Result<(usize, f64)> {
    let mut dim = None;
    let mut radius = None;
    for token in line.trim_start_matches('#').split_whitespace() {
        if let Some(v) = token.strip_prefix("dim=") {
            dim = Some(v.parse::<usize>().map_err(|_| Error::validation(format!("line 1: bad dim '{v}'")))?);
        } else if let Some(v) = token.strip_prefix("radius=") {
            radius = Some(v.parse::<f64>().map_err(|_| Error::validation(format!("line 1: bad radius '{v}'")))?);
        }
    }
    match (dim, radius) {
        (Some(d), Some(r)) => Ok((d, r)),
        _ => Err(Error::validation("line 1: header must read '# dim=N radius=R'")),
    }
}

fn parse_label(field: &str) -> Option<PointLabel> {
    match field {
        "uniform" => Some(PointLabel::Uniform),
        "informational" => Some(PointLabel::Informational),
        "embedded" => Some(PointLabel::Embedded),
        "superset" => Some(PointLabel::Superset),
        "in-ball" => Some(PointLabel::InBall),
        "out-of-ball" => Some(PointLabel::OutOfBall),
        _ => None,
    }
}

pub fn label_name(label: PointLabel) -> &'static str {
    match label {
        PointLabel::Uniform => "uniform",
        PointLabel::Informational => "informational",
        PointLabel::Embedded => "embedded",
        PointLabel::Superset => "superset",
        PointLabel::InBall => "in-ball",
        PointLabel::OutOfBall => "out-of-ball",
    }
}

fn parse_number(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::validation(format!("line {line}: '{}' is not a number", field.trim())))?;
    if !v.is_finite() {
        return Err(Error::validation(format!("line {line}: non-finite value")));
    }
    Ok(v)
}

fn parse_csv(text: &str) -> Result<PointSet> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (dim, radius) = match lines.next() {
        Some((_, l)) if l.trim_start().starts_with('#') => parse_header(l)?,
        _ => return Err(Error::validation("line 1: missing '# dim=N radius=R' header")),
    };
    if dim < 2 || !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!("header declares dim={dim} radius={radius}")));
    }
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    let mut offenders = Vec::new();
    for (line_no, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let label = match fields.len() {
            n if n == dim => None,
            n if n == dim + 1 => Some(parse_label(fields[dim].trim()).ok_or_else(|| {
                Error::validation(format!("line {line_no}: unknown label '{}'", fields[dim].trim()))
            })?),
            n => {
                return Err(Error::validation(format!(
                    "line {line_no}: expected {dim} coordinates, found {n} fields"
                )))
            }
        };
        let start = coords.len();
        for f in &fields[..dim] {
            coords.push(parse_number(f, line_no)?);
        }
        let len = norm(&coords[start..]);
        if (len - radius).abs() > RENORMALIZE_TOLERANCE * radius {
            offenders.push(line_no);
        } else if (len - radius).abs() > 1e-12 * radius {
            coords[start..].iter_mut().for_each(|x| *x *= radius / len);
        }
        labels.push(label);
    }
    if !offenders.is_empty() {
        return Err(Error::validation(format!(
            "{} row(s) deviate from radius {radius} by more than 1e-6 relative, lines {:?}",
            offenders.len(),
            &offenders[..offenders.len().min(20)]
        )));
    }
    let set = PointSet::new(dim, radius, coords)?;
    if labels.iter().all(Option::is_some) && !labels.is_empty() {
        set.with_labels(labels.into_iter().flatten().collect())
    } else if labels.iter().any(Option::is_some) {
        Err(Error::validation("labels must be given on every row or on none"))
    } else {
        Ok(set)
    }
}

/// Geographic degrees to the unit sphere: `(cos φ cos λ, cos φ sin λ, sin φ)`.
pub fn latlon_to_unit(lat_deg: f64, lon_deg: f64) -> [f64; 3] {
    let (sin_lat, cos_lat) = lat_deg.to_radians().sin_cos();
    let (sin_lon, cos_lon) = lon_deg.to_radians().sin_cos();
    let p = [cos_lat * cos_lon, cos_lat * sin_lon, sin_lat];
    let len = norm(&p);
    [p[0] / len, p[1] / len, p[2] / len]
}

fn parse_latlon(text: &str, options: ParseOptions) -> Result<PointSet> {
    let mut coords = Vec::new();
    let mut first_data = true;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        // a first row of column names is a header
        if first_data && fields.iter().all(|f| f.chars().next().is_some_and(char::is_alphabetic)) {
            first_data = false;
            continue;
        }
        first_data = false;
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::validation(format!(
                "line {line_no}: expected 'lat_deg,lon_deg[,size]', found {} fields",
                fields.len()
            )));
        }
        let lat = parse_number(fields[0], line_no)?;
        let lon = parse_number(fields[1], line_no)?;
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::validation(format!("line {line_no}: latitude {lat} outside [-90, 90]")));
        }
        if let Some(min) = options.min_size {
            let size = match fields.get(2) {
                Some(f) => parse_number(f, line_no)?,
                None => {
                    return Err(Error::validation(format!(
                        "line {line_no}: size filter requested but row has no size column"
                    )))
                }
            };
            if size < min {
                continue;
            }
        } else if let Some(f) = fields.get(2) {
            parse_number(f, line_no)?;
        }
        coords.extend(latlon_to_unit(lat, lon));
    }
    PointSet::new(3, 1.0, coords)
}

/// Points CSV text with 17 significant digits per coordinate.
pub fn format_points(set: &PointSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# dim={} radius={:e}", set.dimension(), set.radius());
    for (i, p) in set.points().enumerate() {
        for (k, x) in p.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{x:.16e}");
        }
        if let Some(labels) = set.labels() {
            let _ = write!(out, ",{}", label_name(labels[i]));
        }
        out.push('\n');
    }
    out
}

pub fn write_points(writer: &mut impl Write, set: &PointSet) -> Result<()> {
    writer.write_all(format_points(set).as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub d: f64,
    pub pdf: f64,
    pub cdf: f64,
}

/// `samples + 1` rows at `d = 2R i / samples`, endpoints included.
pub fn curve_rows(distribution: &dyn ChordDistribution, samples: usize) -> Result<Vec<CurveRow>> {
    if samples < 1 {
        return Err(Error::domain("curve table needs at least one interval"));
    }
    let two_r = 2.0 * distribution.radius();
    (0..=samples)
        .map(|i| {
            let d = if i == samples {
                two_r
            } else {
                two_r * i as f64 / samples as f64
            };
            Ok(CurveRow {
                d,
                pdf: distribution.pdf(d)?,
                cdf: distribution.cdf(d)?,
            })
        })
        .collect()
}

pub fn format_curve_rows(rows: &[CurveRow]) -> String {
    let mut out = String::from("d,pdf,cdf\n");
    for r in rows {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", r.d, r.pdf, r.cdf);
    }
    out
}

/// Histogram in the curve layout: bin centre, piecewise density, cumulative
/// mass at the bin's right edge.
pub fn histogram_rows(hist: &EmpiricalDistanceDistribution) -> Vec<CurveRow> {
    let w = hist.bin_width();
    hist.density()
        .into_iter()
        .zip(hist.cumulative())
        .enumerate()
        .map(|(b, (pdf, cdf))| CurveRow {
            d: (b as f64 + 0.5) * w,
            pdf,
            cdf,
        })
        .collect()
}

/// Parses a `d,pdf,cdf` table.
pub fn parse_curve_rows(text: &str) -> Result<Vec<CurveRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(Error::validation(format!("line {line_no}: expected d,pdf,cdf")));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::validation(format!("line {line_no}: '{s}' is not a number")))
        };
        rows.push(CurveRow {
            d: num(f[0])?,
            pdf: num(f[1])?,
            cdf: num(f[2])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chord::SphereChordDistribution;
    use crate::sampling::{sample_cap_mixture, sample_sphere_uniform, RandomSeed};

    #[test]
    fn latlon_convention() {
        let pole = latlon_to_unit(90.0, 0.0);
        assert!(pole[0].abs() < 1e-15 && pole[1].abs() < 1e-15 && pole[2] == 1.0);
        assert_eq!(latlon_to_unit(0.0, 0.0), [1.0, 0.0, 0.0]);
        let east = latlon_to_unit(0.0, 90.0);
        assert!(east[0].abs() < 1e-15 && (east[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn latlon_ingestion() {
        let text = "lat,lon,size\n10.5,20,3.0\n-45,170,0.5\n89.9,-179.9,8\n";
        let set = parse_points_str(text, PointFormat::LatlonCsv, ParseOptions::default()).unwrap();
        assert_eq!(set.len(), 3);
        assert!(set.points().all(|p| (norm(p) - 1.0).abs() < 1e-12));
        let filtered =
            parse_points_str(text, PointFormat::LatlonCsv, ParseOptions { min_size: Some(1.0) }).unwrap();
        assert_eq!(filtered.len(), 2);
        let err = parse_points_str("0,0\n91,0\n", PointFormat::LatlonCsv, ParseOptions::default()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
        let missing = parse_points_str("0,0\n", PointFormat::LatlonCsv, ParseOptions { min_size: Some(1.0) });
        assert!(missing.is_err());
        let bad = parse_points_str("0,0\n1,x\n", PointFormat::LatlonCsv, ParseOptions::default()).unwrap_err();
        assert!(bad.to_string().contains("line 2"));
    }

    #[test]
    fn points_round_trip_exactly() {
        let set = sample_sphere_uniform(5, 2.5, 50, RandomSeed::new(3)).unwrap();
        let back = parse_points_str(&format_points(&set), PointFormat::Csv, ParseOptions::default()).unwrap();
        assert_eq!(set.dimension(), back.dimension());
        assert_eq!(set.radius(), back.radius());
        assert_eq!(set.coords(), back.coords());
        let labeled = sample_cap_mixture(3, 1.0, 40, 0.1, 0.25, RandomSeed::new(1)).unwrap().points;
        let back = parse_points_str(&format_points(&labeled), PointFormat::Csv, ParseOptions::default()).unwrap();
        assert_eq!(back.labels(), labeled.labels());
    }

    #[test]
    fn csv_renormalizes_or_rejects() {
        let ok = "# dim=2 radius=1\n1.0000001,0\n0,1\n";
        let set = parse_points_str(ok, PointFormat::Csv, ParseOptions::default()).unwrap();
        assert_eq!(set.point(0), &[1.0, 0.0]);
        let bad = "# dim=2 radius=1\n1,0\n0.5,0\n0,2\n";
        let err = parse_points_str(bad, PointFormat::Csv, ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("[3, 4]"));
        let short = "# dim=3 radius=1\n1,0,0\n1,0\n";
        assert!(parse_points_str(short, PointFormat::Csv, ParseOptions::default())
            .unwrap_err()
            .to_string()
            .contains("line 3"));
        assert!(parse_points_str("1,0\n", PointFormat::Csv, ParseOptions::default()).is_err());
    }

    #[test]
    fn curve_table_contains_reference_row() {
        let f = SphereChordDistribution::new(3, 1.0).unwrap();
        let rows = curve_rows(&f, DEFAULT_CURVE_SAMPLES).unwrap();
        assert_eq!(rows.len(), 513);
        let mid = rows.iter().find(|r| r.d == 1.0).unwrap();
        assert!((mid.pdf - 0.5).abs() < 1e-12 && (mid.cdf - 0.25).abs() < 1e-12);
        assert_eq!(rows.last().unwrap().d, 2.0);
        let parsed = parse_curve_rows(&format_curve_rows(&rows)).unwrap();
        assert_eq!(parsed, rows);
    }
}
