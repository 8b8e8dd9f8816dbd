use serde::{Deserialize, Serialize};

use super::CurveCdf;
use crate::kernels::KernelTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMethod {
    ClosedForm,
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub tol: f64,
    pub max_iter: usize,
}

/// A limiting spectral distribution tabulated on a grid of axis coordinates.
///
/// `cdf` includes the atom at zero as a jump (for grid points `x ≥ 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsdCurve {
    pub c: f64,
    pub kernel: KernelTag,
    pub method: CurveMethod,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub cdf: Vec<f64>,
    pub point_mass_zero: f64,
    /// `(L, U)`: the absolutely continuous part lives on `L ≤ |x| ≤ U`.
    pub support: (f64, f64),
    /// Theoretical atom at zero when it is known independently.
    pub point_mass_analytic: Option<f64>,
    pub solver: Option<SolverMeta>,
}

impl LsdCurve {
    /// Trapezoidal mass of the tabulated density. Only finite values count.
    pub fn trapezoid_mass(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .filter(|(_, f)| f[0].is_finite() && f[1].is_finite())
            .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
            .sum()
    }

    /// `|trapezoid mass + atom − 1|`.
    pub fn normalization_error(&self) -> f64 {
        (self.trapezoid_mass() + self.point_mass_zero - 1.0).abs()
    }

    /// Largest `|f(x) − f(−x)|` over mirrored grid pairs. Assumes a grid that
    /// is symmetric about zero.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.density.len();
        (0..n / 2)
            .map(|i| {
                let (a, b) = (self.density[i], self.density[n - 1 - i]);
                if a == b { 0.0 } else { (a - b).abs() }
            })
            .fold(0.0, f64::max)
    }

    pub fn cdf_view(&self) -> CurveCdf {
        CurveCdf::new(self)
    }

    /// Fills `cdf` by cumulative trapezoid of the density plus the atom jump.
    pub fn fill_cdf_by_trapezoid(&mut self) {
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(self.grid.len());
        let mut atom_added = false;
        for i in 0..self.grid.len() {
            if i > 0 {
                let (f0, f1) = (self.density[i - 1], self.density[i]);
                if f0.is_finite() && f1.is_finite() {
                    acc += 0.5 * (self.grid[i] - self.grid[i - 1]) * (f0 + f1);
                }
            }
            if !atom_added && self.grid[i] >= 0.0 {
                acc += self.point_mass_zero;
                atom_added = true;
            }
            cdf.push(acc.min(1.0));
        }
        self.cdf = cdf;
    }

    /// Symmetric grid of `points` coordinates on `[−half_width, half_width]`.
    pub fn symmetric_grid(half_width: f64, points: usize) -> Vec<f64> {
        let n = points.max(2);
        (0..n)
            .map(|k| {
                // Mirror the left half exactly so f(−x) and f(x) see the same |x|.
                let t = -half_width + 2.0 * half_width * k as f64 / (n - 1) as f64;
                let mirror = n - 1 - k;
                if mirror < k {
                    half_width - 2.0 * half_width * mirror as f64 / (n - 1) as f64
                } else if mirror == k {
                    0.0
                } else {
                    t
                }
            })
            .collect()
    }
}
