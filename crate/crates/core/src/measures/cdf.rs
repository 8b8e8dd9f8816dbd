use serde::{Deserialize, Serialize};

use super::LsdCurve;
use crate::error::{LsdError, Result};

/// A distribution function that is piecewise linear between its break
/// points, possibly with jumps at them. Both the empirical step CDF and the
/// interpolated curve CDF fit this shape, which makes sup-norm and Lévy
/// computations exact when only break points are inspected.
pub trait Cdf {
    fn eval(&self, x: f64) -> f64;
    /// Left limit `F(x−)`.
    fn eval_left(&self, x: f64) -> f64;
    fn breakpoints(&self) -> Vec<f64>;
}

/// Empirical (or any discrete) distribution function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCdf {
    jumps: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepCdf {
    pub fn new(jumps: Vec<f64>, cumulative: Vec<f64>) -> Result<Self> {
        if jumps.len() != cumulative.len() || jumps.is_empty() {
            return Err(LsdError::Shape("jumps and cumulative values must be non-empty and equal length".into()));
        }
        if jumps.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(LsdError::Domain("jump locations must be strictly increasing".into()));
        }
        if cumulative.windows(2).any(|w| w[1] < w[0]) || cumulative[0] < 0.0 {
            return Err(LsdError::Domain("cumulative values must be nondecreasing and >= 0".into()));
        }
        if (cumulative[cumulative.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(LsdError::Domain("final cumulative value must be 1".into()));
        }
        Ok(Self { jumps, cumulative })
    }

    /// Empirical CDF of the given points; equal values merge into one jump.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(LsdError::Shape("empty sample".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let n = sorted.len() as f64;
        let mut jumps = Vec::new();
        let mut cumulative = Vec::new();
        for (i, &x) in sorted.iter().enumerate() {
            if jumps.last() == Some(&x) {
                *cumulative.last_mut().unwrap() = (i + 1) as f64 / n;
            } else {
                jumps.push(x);
                cumulative.push((i + 1) as f64 / n);
            }
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self { jumps, cumulative })
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}

impl Cdf for StepCdf {
    fn eval(&self, x: f64) -> f64 {
        let k = self.jumps.partition_point(|&t| t <= x);
        if k == 0 { 0.0 } else { self.cumulative[k - 1] }
    }

    fn eval_left(&self, x: f64) -> f64 {
        let k = self.jumps.partition_point(|&t| t < x);
        if k == 0 { 0.0 } else { self.cumulative[k - 1] }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.jumps.clone()
    }
}

/// CDF of an [`LsdCurve`]: linear interpolation of the continuous part on the
/// grid plus the atom at zero as a jump.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveCdf {
    grid: Vec<f64>,
    continuous: Vec<f64>,
    atom: f64,
}

impl CurveCdf {
    pub fn new(curve: &LsdCurve) -> Self {
        let atom = curve.point_mass_zero;
        let continuous = curve
            .grid
            .iter()
            .zip(&curve.cdf)
            .map(|(&x, &f)| if x >= 0.0 { f - atom } else { f })
            .collect();
        Self { grid: curve.grid.clone(), continuous, atom }
    }

    /// Continuous part of the CDF, without the atom.
    pub fn continuous_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g[0] {
            return 0.0;
        }
        if x >= g[g.len() - 1] {
            return 1.0 - self.atom;
        }
        let k = g.partition_point(|&t| t <= x);
        let (x0, x1) = (g[k - 1], g[k]);
        let (f0, f1) = (self.continuous[k - 1], self.continuous[k]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    pub fn atom(&self) -> f64 {
        self.atom
    }

    /// Generalized inverse `inf{x : F(x) ≥ u}`.
    pub fn quantile(&self, u: f64) -> f64 {
        let below_zero = self.continuous_at(0.0);
        if self.atom > 0.0 && u > below_zero && u <= below_zero + self.atom {
            return 0.0;
        }
        let (mut lo, mut hi) = (self.grid[0], self.grid[self.grid.len() - 1]);
        if u <= 0.0 {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
                break;
            }
        }
        hi
    }
}

impl Cdf for CurveCdf {
    fn eval(&self, x: f64) -> f64 {
        self.continuous_at(x) + if x >= 0.0 { self.atom } else { 0.0 }
    }

    fn eval_left(&self, x: f64) -> f64 {
        self.continuous_at(x) + if x > 0.0 { self.atom } else { 0.0 }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.grid.clone();
        if self.atom > 0.0 && b.binary_search_by(|t| t.total_cmp(&0.0)).is_err() {
            b.push(0.0);
            b.sort_by(|x, y| x.total_cmp(y));
        }
        b
    }
}

fn merged_points(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = a.iter().chain(b).copied().collect();
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    pts
}

/// Largest violation of `G(x) ≤ F(x + δ) + δ` over all `x`; the maximum of a
/// piecewise linear function sits at a break point or its left limit.
fn upper_violation(f: &dyn Cdf, g: &dyn Cdf, fb: &[f64], gb: &[f64], delta: f64) -> f64 {
    let shifted: Vec<f64> = fb.iter().map(|t| t - delta).collect();
    merged_points(gb, &shifted)
        .into_iter()
        .map(|x| {
            let right = g.eval(x) - f.eval(x + delta);
            let left = g.eval_left(x) - f.eval_left(x + delta);
            right.max(left) - delta
        })
        .fold(f64::MIN, f64::max)
}

/// Sup-norm (Kolmogorov–Smirnov) and Lévy distances between two CDFs.
///
/// The Lévy distance is found by bisection on `δ ∈ [0, ks]`, which keeps
/// `levy ≤ ks` by construction.
pub fn ks_and_levy(f: &dyn Cdf, g: &dyn Cdf) -> (f64, f64) {
    let fb = f.breakpoints();
    let gb = g.breakpoints();
    let ks = merged_points(&fb, &gb)
        .into_iter()
        .map(|x| (f.eval(x) - g.eval(x)).abs().max((f.eval_left(x) - g.eval_left(x)).abs()))
        .fold(0.0, f64::max);

    let ok = |delta: f64| {
        // F(x − δ) − δ ≤ G(x) is the upper condition with the roles swapped.
        upper_violation(f, g, &fb, &gb, delta) <= 1e-12 && upper_violation(g, f, &gb, &fb, delta) <= 1e-12
    };
    if ks == 0.0 || ok(0.0) {
        return (ks, 0.0);
    }
    let (mut lo, mut hi) = (0.0, ks.min(1.0));
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (ks, hi)
}
