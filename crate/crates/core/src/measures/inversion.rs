use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{axis_point, boundary_part};
use crate::error::{LsdError, Result};
use crate::kernels::KernelTag;
use crate::quadrature;

/// How the boundary limits `ε ↓ 0` are approximated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    /// Strictly decreasing distances from the axis.
    pub eps_schedule: Vec<f64>,
    /// Polynomial order in `ε` removed by extrapolation; 1 is the classic
    /// two-point Richardson step.
    pub order: usize,
    /// Error estimates above this are flagged.
    pub tol: f64,
    /// Absolute tolerance for the per-ε quadrature in [`cdf_interval`].
    pub quad_tol: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self { eps_schedule: vec![1e-2, 5e-3, 2.5e-3, 1.25e-3], order: 1, tol: 1e-4, quad_tol: 1e-9 }
    }
}

impl InversionConfig {
    pub fn with_schedule(eps_schedule: Vec<f64>) -> Self {
        Self { eps_schedule, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.eps_schedule;
        if s.len() < 2 {
            return Err(LsdError::Domain("eps schedule needs at least two entries".into()));
        }
        if s.iter().any(|&e| !(e > 0.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
            return Err(LsdError::Domain("eps schedule must be positive and strictly decreasing".into()));
        }
        if self.order == 0 || self.order + 1 > s.len() {
            return Err(LsdError::Domain(format!(
                "extrapolation order {} needs at least {} schedule entries",
                self.order,
                self.order + 1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateStatus {
    Ok,
    /// Extrapolation error estimate above tolerance.
    NotConverged,
    /// A quantity that must be nonnegative came out below −1e−8.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionEstimate {
    pub value: f64,
    pub error: f64,
    pub status: EstimateStatus,
}

impl InversionEstimate {
    pub fn is_ok(&self) -> bool {
        self.status == EstimateStatus::Ok
    }
}

/// Neville evaluation at `ε = 0` of the interpolating polynomial through
/// `(eps[i], values[i])`.
pub fn extrapolate_to_zero(eps: &[f64], values: &[f64]) -> f64 {
    let mut p = values.to_vec();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (eps[i] * p[i + 1] - eps[i + k] * p[i]) / (eps[i] - eps[i + k]);
        }
    }
    p[0]
}

/// Extrapolates using the last `order + 1` points; the error estimate is the
/// disagreement with the window shifted one step towards larger `ε`.
fn extrapolate(cfg: &InversionConfig, values: &[f64]) -> (f64, f64) {
    let eps = &cfg.eps_schedule;
    let n = eps.len();
    let k = cfg.order + 1;
    let best = extrapolate_to_zero(&eps[n - k..], &values[n - k..]);
    let error = if n > k {
        (best - extrapolate_to_zero(&eps[n - k - 1..n - 1], &values[n - k - 1..n - 1])).abs()
    } else {
        // Only one window: compare with the raw smallest-ε value.
        (best - values[n - 1]).abs()
    };
    (best, error)
}

fn finish(cfg: &InversionConfig, value: f64, error: f64) -> InversionEstimate {
    let status = if !value.is_finite() || !(error <= cfg.tol) {
        EstimateStatus::NotConverged
    } else {
        EstimateStatus::Ok
    };
    InversionEstimate { value, error, status }
}

/// Density at axis coordinate `x`: `(1/π) lim Re s(−ε + ix)` for skew,
/// `(1/π) lim Im s(x + iε)` for Hermitian.
pub fn invert_density<F>(s_fn: F, axis: KernelTag, x: f64, cfg: &InversionConfig) -> Result<InversionEstimate>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    cfg.validate()?;
    let values = cfg
        .eps_schedule
        .iter()
        .map(|&eps| Ok(boundary_part(axis, s_fn(axis_point(axis, x, eps))?) / PI))
        .collect::<Result<Vec<_>>>()?;
    let (value, error) = extrapolate(cfg, &values);
    Ok(finish(cfg, value, error))
}

/// Atom at axis coordinate `x`: `lim ε·Re s(−ε + ix)` (skew) or
/// `lim ε·Im s(x + iε)` (Hermitian).
///
/// `ε·s` carries the density as a linear term on top of the atom, so one
/// extra order is removed compared with [`invert_density`] when the
/// schedule is long enough.
pub fn invert_point_mass<F>(s_fn: F, axis: KernelTag, x: f64, cfg: &InversionConfig) -> Result<InversionEstimate>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    cfg.validate()?;
    let values = cfg
        .eps_schedule
        .iter()
        .map(|&eps| Ok(eps * boundary_part(axis, s_fn(axis_point(axis, x, eps))?)))
        .collect::<Result<Vec<_>>>()?;
    let bumped = InversionConfig { order: (cfg.order + 1).min(cfg.eps_schedule.len() - 1), ..cfg.clone() };
    let (value, error) = extrapolate(&bumped, &values);
    let mut est = finish(cfg, value, error);
    if value < -1e-8 {
        est.status = EstimateStatus::Negative;
    }
    Ok(est)
}

/// Mass of `[a, b]` (both continuity points) via the smoothed integral
/// `(1/π) ∫ₐᵇ Re s(−ε + ix) dx`, extrapolated in `ε`. Extra `breaks` inside
/// `(a, b)` help the quadrature around known kinks.
pub fn cdf_interval<F>(
    s_fn: F,
    axis: KernelTag,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &InversionConfig,
) -> Result<InversionEstimate>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    cfg.validate()?;
    if a > b {
        return Err(LsdError::Domain(format!("interval [{a}, {b}] is empty")));
    }
    if a == b {
        return Ok(InversionEstimate { value: 0.0, error: 0.0, status: EstimateStatus::Ok });
    }
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    pts.push(b);
    pts.sort_by(|x, y| x.total_cmp(y));

    let mut quad_ok = true;
    let mut values = Vec::with_capacity(cfg.eps_schedule.len());
    for &eps in &cfg.eps_schedule {
        // Errors inside the integrand are surfaced after the fact.
        let failure = std::cell::RefCell::new(None);
        let r = quadrature::integrate_with_breaks(
            |x| match s_fn(axis_point(axis, x, eps)) {
                Ok(s) => boundary_part(axis, s) / PI,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            &pts,
            cfg.quad_tol,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        quad_ok &= r.converged;
        values.push(r.value);
    }
    let (value, error) = extrapolate(cfg, &values);
    let mut est = finish(cfg, value, error);
    if !quad_ok {
        est.status = EstimateStatus::NotConverged;
    }
    Ok(est)
}
