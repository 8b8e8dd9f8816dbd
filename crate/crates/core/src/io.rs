//! File formats for curves, samples and comparison reports.
//!
//! Tabular data goes to CSV with a JSON sidecar of the same stem, or to a
//! single `<stem>.json` in JSON mode. Every write goes through a temporary
//! file in the target directory followed by a rename.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{LsdError, Result};
use crate::kernels::KernelTag;
use crate::measures::{CurveMethod, LsdCurve, SolverMeta, SpectralMeasure};
use crate::simulate::{EntryDist, EsdSample};
use crate::stats::ComparisonReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = LsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(LsdError::Domain(format!("unknown format '{other}'"))),
        }
    }
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `contents` to `path` through a sibling temporary file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| LsdError::Domain(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Path without a trailing `.csv` or `.json`.
pub fn strip_ext(path: &Path) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("json") => path.with_extension(""),
        _ => path.to_path_buf(),
    }
}

/// Non-finite values become `null`; `null` reads back as `+∞`.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.is_finite().then_some(*x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub c: f64,
    pub kernel: KernelTag,
    pub method: CurveMethod,
    pub point_mass_zero: f64,
    pub support: [f64; 2],
    pub solver: Option<SolverMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_mass_analytic: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct CurveDocument {
    #[serde(flatten)]
    meta: CurveMeta,
    x: Vec<f64>,
    #[serde(with = "nullable")]
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl CurveMeta {
    fn of(curve: &LsdCurve) -> Self {
        Self {
            c: curve.c,
            kernel: curve.kernel,
            method: curve.method,
            point_mass_zero: curve.point_mass_zero,
            support: [curve.support.0, curve.support.1],
            solver: curve.solver,
            point_mass_analytic: curve.point_mass_analytic,
        }
    }

    fn into_curve(self, grid: Vec<f64>, density: Vec<f64>, cdf: Vec<f64>) -> Result<LsdCurve> {
        if grid.len() != density.len() || grid.len() != cdf.len() || grid.len() < 2 {
            return Err(LsdError::Shape("curve columns must have equal length of at least 2".into()));
        }
        Ok(LsdCurve {
            c: self.c,
            kernel: self.kernel,
            method: self.method,
            grid,
            density,
            cdf,
            point_mass_zero: self.point_mass_zero,
            support: (self.support[0], self.support[1]),
            point_mass_analytic: self.point_mass_analytic,
            solver: self.solver,
        })
    }
}

/// Writes a curve under `stem` and returns the files written.
pub fn write_curve(curve: &LsdCurve, stem: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let meta = CurveMeta::of(curve);
    match format {
        Format::Csv => {
            let mut csv = String::from("x,density,cdf\n");
            for ((x, f), g) in curve.grid.iter().zip(&curve.density).zip(&curve.cdf) {
                writeln!(csv, "{x},{f},{g}").unwrap();
            }
            let (data, side) = (with_ext(stem, "csv"), with_ext(stem, "json"));
            write_atomic(&data, csv.as_bytes())?;
            write_atomic(&side, &serde_json::to_vec_pretty(&meta)?)?;
            Ok(vec![data, side])
        }
        Format::Json => {
            let doc = CurveDocument { meta, x: curve.grid.clone(), density: curve.density.clone(), cdf: curve.cdf.clone() };
            let path = with_ext(stem, "json");
            write_atomic(&path, &serde_json::to_vec_pretty(&doc)?)?;
            Ok(vec![path])
        }
    }
}

/// Parses rows of numbers after a header line, which must equal `header`.
fn parse_csv(text: &str, header: &str, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((i, h)) => return Err(LsdError::Parse { line: i + 1, msg: format!("expected header '{header}', got '{h}'") }),
        None => return Err(LsdError::Parse { line: 1, msg: "empty file".into() }),
    }
    lines
        .map(|(i, line)| {
            let row: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| LsdError::Parse { line: i + 1, msg: e.to_string() })?;
            if row.len() != columns {
                return Err(LsdError::Parse { line: i + 1, msg: format!("expected {columns} fields, got {}", row.len()) });
            }
            Ok(row)
        })
        .collect()
}

/// Reads a curve from its CSV, its sidecar, or a JSON-mode document.
pub fn read_curve(path: &Path) -> Result<LsdCurve> {
    let stem = strip_ext(path);
    let json_path = with_ext(&stem, "json");
    let csv_path = with_ext(&stem, "csv");
    if !csv_path.exists() {
        let doc: CurveDocument = serde_json::from_slice(&fs::read(&json_path)?)?;
        return doc.meta.into_curve(doc.x, doc.density, doc.cdf);
    }
    let meta: CurveMeta = serde_json::from_slice(&fs::read(&json_path)?)?;
    let rows = parse_csv(&fs::read_to_string(&csv_path)?, "x,density,cdf", 3)?;
    let (mut x, mut f, mut g) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        x.push(r[0]);
        f.push(r[1]);
        g.push(r[2]);
    }
    meta.into_curve(x, f, g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub p: usize,
    pub n: usize,
    pub c_n: f64,
    pub entry_dist: Option<EntryDist>,
    pub kernel: KernelTag,
    pub seed: Option<u64>,
    #[serde(default)]
    pub fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct SampleDocument {
    #[serde(flatten)]
    meta: SampleMeta,
    coords: Vec<f64>,
}

impl SampleMeta {
    fn of(s: &EsdSample) -> Self {
        Self {
            p: s.p,
            n: s.n,
            c_n: s.c_n,
            entry_dist: s.entry_dist,
            kernel: s.kernel,
            seed: s.seed,
            fingerprint: s.fingerprint.clone(),
        }
    }

    fn into_sample(self, coords: Vec<f64>) -> Result<EsdSample> {
        if coords.len() != self.p {
            return Err(LsdError::Shape(format!("sidecar says p = {}, file has {} coordinates", self.p, coords.len())));
        }
        let mut s = EsdSample::new(coords, self.n, self.kernel)?;
        s.entry_dist = self.entry_dist;
        s.seed = self.seed;
        s.fingerprint = self.fingerprint;
        Ok(s)
    }
}

pub fn write_sample(sample: &EsdSample, stem: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let meta = SampleMeta::of(sample);
    match format {
        Format::Csv => {
            let mut csv = String::from("index,coord\n");
            for (i, x) in sample.coords.iter().enumerate() {
                writeln!(csv, "{i},{x}").unwrap();
            }
            let (data, side) = (with_ext(stem, "csv"), with_ext(stem, "json"));
            write_atomic(&data, csv.as_bytes())?;
            write_atomic(&side, &serde_json::to_vec_pretty(&meta)?)?;
            Ok(vec![data, side])
        }
        Format::Json => {
            let path = with_ext(stem, "json");
            let doc = SampleDocument { meta, coords: sample.coords.clone() };
            write_atomic(&path, &serde_json::to_vec_pretty(&doc)?)?;
            Ok(vec![path])
        }
    }
}

pub fn read_sample(path: &Path) -> Result<EsdSample> {
    let stem = strip_ext(path);
    let json_path = with_ext(&stem, "json");
    let csv_path = with_ext(&stem, "csv");
    if !csv_path.exists() {
        let doc: SampleDocument = serde_json::from_slice(&fs::read(&json_path)?)?;
        return doc.meta.into_sample(doc.coords);
    }
    let meta: SampleMeta = serde_json::from_slice(&fs::read(&json_path)?)?;
    let rows = parse_csv(&fs::read_to_string(&csv_path)?, "index,coord", 2)?;
    meta.into_sample(rows.into_iter().map(|r| r[1]).collect())
}

pub fn write_report(report: &ComparisonReport, path: &Path) -> Result<()> {
    write_atomic(path, &serde_json::to_vec_pretty(report)?)
}

pub fn read_report(path: &Path) -> Result<ComparisonReport> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// One row per replicate.
pub fn write_aggregate_csv(reports: &[ComparisonReport], path: &Path) -> Result<()> {
    let mut csv = String::from("replicate,ks,levy,l1,point_mass_est,support_violation_frac\n");
    for (i, r) in reports.iter().enumerate() {
        writeln!(csv, "{i},{},{},{},{},{}", r.ks, r.levy, r.l1_hist, r.point_mass_est, r.support_violation_frac).unwrap();
    }
    write_atomic(path, csv.as_bytes())
}

pub fn read_measure(path: &Path) -> Result<SpectralMeasure> {
    SpectralMeasure::parse(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::closed_form_curve;

    fn tmpdir(tag: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("clsd-io-{tag}-{}", std::process::id()));
        fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn curve_round_trips_in_both_formats() {
        let grid = LsdCurve::symmetric_grid(6.0, 101);
        let curve = closed_form_curve(2.0, KernelTag::Skew, &grid).unwrap();
        assert!(curve.density[50].is_infinite());
        let dir = tmpdir("curve");
        for (format, name) in [(Format::Csv, "a"), (Format::Json, "b")] {
            let files = write_curve(&curve, &dir.join(name), format).unwrap();
            let back = read_curve(&files[0]).unwrap();
            assert_eq!(back, curve);
        }
        let side: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("a.json")).unwrap()).unwrap();
        assert_eq!(side["method"], "closed_form");
        assert_eq!(side["kernel"], "skew");
        assert!(side["support"].is_array());
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn sample_round_trips() {
        let mut s = EsdSample::new(vec![0.5, -0.25, 1e-300], 7, KernelTag::Hermitian).unwrap();
        s.seed = Some(42);
        s.entry_dist = Some(EntryDist::Mixed);
        let dir = tmpdir("sample");
        for (format, name) in [(Format::Csv, "s"), (Format::Json, "t")] {
            let files = write_sample(&s, &dir.join(name), format).unwrap();
            assert_eq!(read_sample(&files[0]).unwrap(), s);
        }
        let head = fs::read_to_string(dir.join("s.csv")).unwrap();
        assert!(head.starts_with("index,coord\n0,-0.25\n"));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn malformed_csv_is_reported_with_line() {
        let err = parse_csv("x,density,cdf\n1,2,3\n1,oops,3\n", "x,density,cdf", 3).unwrap_err();
        assert!(matches!(err, LsdError::Parse { line: 3, .. }));
        assert!(parse_csv("a,b\n", "x,density,cdf", 3).is_err());
        assert!(parse_csv("x,density,cdf\n1,2\n", "x,density,cdf", 3).is_err());
    }

    #[test]
    fn aggregate_csv_header() {
        let dir = tmpdir("agg");
        let r = ComparisonReport {
            ks: 0.1,
            levy: 0.05,
            l1_hist: 0.2,
            point_mass_est: 0.0,
            support_violation_frac: 0.0,
            atom_window: 0.03,
            p: 10,
            n: 10,
            replicates: 1,
        };
        let path = dir.join("agg.csv");
        write_aggregate_csv(&[r.clone(), r.clone()], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "replicate,ks,levy,l1,point_mass_est,support_violation_frac");
        assert_eq!(text.lines().count(), 3);
        write_report(&r, &dir.join("r.json")).unwrap();
        assert_eq!(read_report(&dir.join("r.json")).unwrap(), r);
        fs::remove_dir_all(dir).unwrap();
    }
}
