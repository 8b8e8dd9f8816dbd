//! Distances between empirical spectra and limiting curves.

use serde::{Deserialize, Serialize};

use crate::error::{LsdError, Result};
use crate::measures::{ks_and_levy, LsdCurve};
use crate::simulate::{esd_cdf, EsdSample};

/// Atoms smaller than this are treated as absent.
const ATOM_PRESENT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub ks: f64,
    pub levy: f64,
    pub l1_hist: f64,
    pub point_mass_est: f64,
    pub support_violation_frac: f64,
    pub atom_window: f64,
    pub p: usize,
    pub n: usize,
    pub replicates: usize,
}

/// Upper support edge of the curve, falling back to the grid extent.
fn upper_edge(curve: &LsdCurve) -> f64 {
    if curve.support.1 > 0.0 {
        curve.support.1
    } else {
        curve.grid.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

pub fn default_atom_window(curve: &LsdCurve) -> f64 {
    1e-2 * upper_edge(curve)
}

/// Compares one sample with a curve. `atom_window` defaults to
/// `10⁻²·U` where `U` is the upper support edge.
pub fn compare(sample: &EsdSample, curve: &LsdCurve, bins: usize, atom_window: Option<f64>) -> Result<ComparisonReport> {
    if sample.kernel != curve.kernel {
        return Err(LsdError::Domain(format!(
            "sample kernel '{}' does not match curve kernel '{}'",
            sample.kernel, curve.kernel
        )));
    }
    if bins < 2 {
        return Err(LsdError::Domain(format!("need at least 2 bins, got {bins}")));
    }
    let window = match atom_window {
        Some(w) if w > 0.0 && w.is_finite() => w,
        Some(w) => return Err(LsdError::Domain(format!("atom window must be positive, got {w}"))),
        None => default_atom_window(curve),
    };
    let upper = upper_edge(curve);
    let (ks, levy) = ks_and_levy(&esd_cdf(sample)?, &curve.cdf_view());
    let p = sample.coords.len() as f64;
    let point_mass_est = sample.coords.iter().filter(|x| x.abs() <= window).count() as f64 / p;
    let support_violation_frac = sample.coords.iter().filter(|x| x.abs() > upper + window).count() as f64 / p;
    Ok(ComparisonReport {
        ks,
        levy,
        l1_hist: histogram_l1(sample, curve, bins, window)?,
        point_mass_est,
        support_violation_frac,
        atom_window: window,
        p: sample.p,
        n: sample.n,
        replicates: 1,
    })
}

/// `Σ |ĥ − f̄|·Δx` over equal bins on `[−U, U]`, where `ĥ` is the histogram
/// density and `f̄` the bin average of the curve's continuous part. Sample
/// mass outside the bins counts in full. When the curve has an atom, the
/// bins meeting `[−w, w]` are left out on both sides.
///
/// Ten or more bins are advisable; fewer are accepted.
pub fn histogram_l1(sample: &EsdSample, curve: &LsdCurve, bins: usize, atom_window: f64) -> Result<f64> {
    if bins < 2 {
        return Err(LsdError::Domain(format!("need at least 2 bins, got {bins}")));
    }
    let upper = upper_edge(curve);
    let width = 2.0 * upper / bins as f64;
    let cdf = curve.cdf_view();
    let has_atom = curve.point_mass_zero > ATOM_PRESENT;
    let excluded = |a: f64, b: f64| has_atom && a <= atom_window && b >= -atom_window;

    let mut counts = vec![0usize; bins];
    let mut outside = 0usize;
    for &x in &sample.coords {
        if has_atom && x.abs() <= atom_window {
            continue;
        }
        if x < -upper || x > upper {
            outside += 1;
            continue;
        }
        let k = (((x + upper) / width) as usize).min(bins - 1);
        let (a, b) = (-upper + k as f64 * width, -upper + (k + 1) as f64 * width);
        if excluded(a, b) {
            continue;
        }
        counts[k] += 1;
    }
    let p = sample.coords.len() as f64;
    let mut total = outside as f64 / p;
    for (k, &count) in counts.iter().enumerate() {
        let (a, b) = (-upper + k as f64 * width, -upper + (k + 1) as f64 * width);
        if excluded(a, b) {
            continue;
        }
        let curve_mass = cdf.continuous_at(b) - cdf.continuous_at(a);
        total += (count as f64 / p - curve_mass).abs();
    }
    // Continuous curve mass beyond ±U.
    total += cdf.continuous_at(-upper) + (1.0 - cdf.atom() - cdf.continuous_at(upper)).max(0.0);
    Ok(total)
}

/// Per-replicate reports folded into one with medians of each metric.
pub fn aggregate(reports: &[ComparisonReport]) -> Option<ComparisonReport> {
    let first = reports.first()?;
    let median = |f: fn(&ComparisonReport) -> f64| {
        let mut v: Vec<f64> = reports.iter().map(f).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        let m = v.len() / 2;
        if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
    };
    Some(ComparisonReport {
        ks: median(|r| r.ks),
        levy: median(|r| r.levy),
        l1_hist: median(|r| r.l1_hist),
        point_mass_est: median(|r| r.point_mass_est),
        support_violation_frac: median(|r| r.support_violation_frac),
        atom_window: first.atom_window,
        p: first.p,
        n: first.n,
        replicates: reports.len(),
    })
}
