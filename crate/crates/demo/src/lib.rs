//! WebAssembly bindings behind `www/index.html`.
//!
//! Each export has a plain Rust counterpart returning [`LsdError`], so the
//! logic is testable off the browser.

use wasm_bindgen::prelude::*;

use commutator_lsd::identity::{self, closed_form_curve};
use commutator_lsd::simulate::{self, EigenPath, EnsembleConfig, EntryDist};
use commutator_lsd::solver::{self, CurveConfig, GridSpec};
use commutator_lsd::stats;
use commutator_lsd::{KernelTag, LsdCurve, LsdError, SpectralMeasure};

/// Browser-side limits so a click cannot freeze the tab.
pub const MAX_POINTS: usize = 4001;
pub const MAX_DIM: usize = 1500;

#[wasm_bindgen]
pub struct Curve {
    inner: LsdCurve,
}

#[wasm_bindgen]
impl Curve {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.inner.grid.clone()
    }

    /// Non-finite values (a cusp at zero) are reported as NaN.
    #[wasm_bindgen(getter)]
    pub fn density(&self) -> Vec<f64> {
        self.inner.density.iter().map(|&f| if f.is_finite() { f } else { f64::NAN }).collect()
    }

    #[wasm_bindgen(getter)]
    pub fn cdf(&self) -> Vec<f64> {
        self.inner.cdf.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn point_mass(&self) -> f64 {
        self.inner.point_mass_zero
    }

    #[wasm_bindgen(getter)]
    pub fn lower(&self) -> f64 {
        self.inner.support.0
    }

    #[wasm_bindgen(getter)]
    pub fn upper(&self) -> f64 {
        self.inner.support.1
    }
}

impl Curve {
    pub fn as_lsd(&self) -> &LsdCurve {
        &self.inner
    }
}

#[wasm_bindgen]
pub struct Histogram {
    centers: Vec<f64>,
    heights: Vec<f64>,
    curve: Curve,
    ks: f64,
    levy: f64,
    zero_fraction: f64,
}

#[wasm_bindgen]
impl Histogram {
    #[wasm_bindgen(getter)]
    pub fn centers(&self) -> Vec<f64> {
        self.centers.clone()
    }

    /// Normalized so the bars integrate to the sample mass inside the range.
    #[wasm_bindgen(getter)]
    pub fn heights(&self) -> Vec<f64> {
        self.heights.clone()
    }

    /// The closed-form curve for the same ratio and kernel.
    pub fn curve(&self) -> Curve {
        Curve { inner: self.curve.inner.clone() }
    }

    #[wasm_bindgen(getter)]
    pub fn ks(&self) -> f64 {
        self.ks
    }

    #[wasm_bindgen(getter)]
    pub fn levy(&self) -> f64 {
        self.levy
    }

    #[wasm_bindgen(getter)]
    pub fn zero_fraction(&self) -> f64 {
        self.zero_fraction
    }
}

fn kernel(name: &str) -> Result<KernelTag, LsdError> {
    name.parse()
}

fn check_points(points: usize) -> Result<(), LsdError> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(LsdError::Domain(format!("points must lie in 2..={MAX_POINTS}, got {points}")));
    }
    Ok(())
}

/// Closed-form curve on `[-1.2U, 1.2U]`.
pub fn identity_curve_native(c: f64, kernel_name: &str, points: usize) -> Result<Curve, LsdError> {
    check_points(points)?;
    let spec = identity::support(c)?;
    let grid = LsdCurve::symmetric_grid(1.2 * spec.upper, points);
    Ok(Curve { inner: closed_form_curve(c, kernel(kernel_name)?, &grid)? })
}

/// Numeric curve for a spectrum given in the text file format.
pub fn general_curve_native(c: f64, spectrum: &str, kernel_name: &str, points: usize) -> Result<Curve, LsdError> {
    check_points(points)?;
    let measure = SpectralMeasure::parse(spectrum)?;
    let grid = GridSpec { points, half_width: None };
    Ok(Curve { inner: solver::lsd_curve(c, &measure, kernel(kernel_name)?, &grid, &CurveConfig::default())? })
}

/// One identity-covariance replicate, binned on the closed-form range.
pub fn simulate_histogram_native(
    p: usize,
    n: usize,
    kernel_name: &str,
    entry_dist: &str,
    seed: u64,
    bins: usize,
) -> Result<Histogram, LsdError> {
    if p > MAX_DIM || n > MAX_DIM {
        return Err(LsdError::Domain(format!("p and n are capped at {MAX_DIM} in the browser")));
    }
    if bins < 2 {
        return Err(LsdError::Domain(format!("need at least 2 bins, got {bins}")));
    }
    let tag = kernel(kernel_name)?;
    let dist: EntryDist = entry_dist.parse()?;
    let cfg = EnsembleConfig::new(p, n, dist, tag, seed);
    cfg.validate()?;
    let sample = simulate::simulate(&cfg, EigenPath::Real)?;
    let curve = identity_curve_native(cfg.ratio(), kernel_name, 801)?;
    let report = stats::compare(&sample, curve.as_lsd(), bins, None)?;

    let w = *curve.inner.grid.last().unwrap();
    let width = 2.0 * w / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &sample.coords {
        if x.abs() <= w {
            counts[(((x + w) / width) as usize).min(bins - 1)] += 1;
        }
    }
    let scale = 1.0 / (sample.p as f64 * width);
    Ok(Histogram {
        centers: (0..bins).map(|k| -w + (k as f64 + 0.5) * width).collect(),
        heights: counts.iter().map(|&k| k as f64 * scale).collect(),
        curve,
        ks: report.ks,
        levy: report.levy,
        zero_fraction: report.point_mass_est,
    })
}

fn js(e: LsdError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn identity_curve(c: f64, kernel: &str, points: usize) -> Result<Curve, JsError> {
    identity_curve_native(c, kernel, points).map_err(js)
}

#[wasm_bindgen]
pub fn general_curve(c: f64, spectrum: &str, kernel: &str, points: usize) -> Result<Curve, JsError> {
    general_curve_native(c, spectrum, kernel, points).map_err(js)
}

#[wasm_bindgen]
pub fn simulate_histogram(
    p: usize,
    n: usize,
    kernel: &str,
    entry_dist: &str,
    seed: u32,
    bins: usize,
) -> Result<Histogram, JsError> {
    simulate_histogram_native(p, n, kernel, entry_dist, u64::from(seed), bins).map_err(js)
}
