//! Fixed-point solver for the auxiliary transform `h(z)`.
//!
//! For a covariance spectrum `H` and ratio `c = p/n`, `h` is the unique
//! solution in the right half-plane (skew) or upper half-plane (Hermitian)
//! of
//!
//! ```text
//! h = ∫ λ dH(λ) / (−z + λ·k(c·h)),      k = ρ (skew) or σ (Hermitian),
//! ```
//!
//! and the Stieltjes transform of the LSD is an explicit rational function
//! of `h`. The iteration is damped Picard with half-plane backtracking,
//! falling back to Newton on `F(h) = h − G(h)` when Picard stalls.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LsdError, Result};
use crate::kernels::KernelTag;
use crate::measures::{
    axis_point, cdf_interval, half_plane_of, invert_density, InversionEstimate, invert_point_mass, EstimateStatus, HalfPlanePoint, InversionConfig, LsdCurve,
    SolverMeta, SpectralMeasure,
};
use crate::measures::CurveMethod;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointConfig {
    /// Absolute bound on `|h − G(h)|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Picard step `h ← (1 − α)h + αG(h)`.
    pub damping: f64,
    pub newton_fallback: bool,
    /// `None` picks a safe interior starting point.
    pub initial_h: Option<Complex64>,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 2000, damping: 0.5, newton_fallback: true, initial_h: None }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol >= 1e-14) {
            return Err(LsdError::Domain(format!("tol must be >= 1e-14, got {}", self.tol)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(LsdError::Domain(format!("damping must be in (0, 1], got {}", self.damping)));
        }
        if self.max_iter == 0 {
            return Err(LsdError::Domain("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    Picard,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSolution {
    pub z: HalfPlanePoint,
    pub h: Complex64,
    pub s: Complex64,
    pub residual: f64,
    pub iterations: usize,
    /// `c·k₂(ch)·I₂(h, H)`; strictly below 1 at the true solution.
    pub gamma: f64,
    pub i1: f64,
    pub i2: f64,
    pub method: SolveMethod,
}

/// The right-hand side `G` of the fixed-point equation.
struct FixedPointMap<'a> {
    z: Complex64,
    c: f64,
    measure: &'a SpectralMeasure,
    kernel: KernelTag,
}

impl FixedPointMap<'_> {
    fn eval(&self, h: Complex64) -> Result<Complex64> {
        let k = self.kernel.eval(self.c * h)?;
        Ok(self.measure.positive_atoms().map(|(l, w)| w * l / (-self.z + l * k)).sum())
    }

    /// `G(h)` and `G'(h)`.
    fn eval_with_derivative(&self, h: Complex64) -> Result<(Complex64, Complex64)> {
        let k = self.kernel.eval(self.c * h)?;
        let dk = self.kernel.derivative(self.c * h)? * self.c;
        let mut g = Complex64::new(0.0, 0.0);
        let mut dg = Complex64::new(0.0, 0.0);
        for (l, w) in self.measure.positive_atoms() {
            let denom = -self.z + l * k;
            g += w * l / denom;
            dg -= w * l * l * dk / (denom * denom);
        }
        Ok((g, dg))
    }

    /// `(I₁, I₂)` with `I_k = ∫ λ^k dH / |−z + λ k(ch)|²`.
    fn moments(&self, h: Complex64) -> Result<(f64, f64)> {
        let k = self.kernel.eval(self.c * h)?;
        Ok(self.measure.positive_atoms().fold((0.0, 0.0), |(a, b), (l, w)| {
            let d2 = (-self.z + l * k).norm_sqr();
            (a + w * l / d2, b + w * l * l / d2)
        }))
    }

    fn admissible(&self, h: Complex64) -> bool {
        h.is_finite() && self.kernel.in_value_half_plane(self.c * h)
    }

    fn residual(&self, h: Complex64) -> Option<f64> {
        self.eval(h).ok().map(|g| (h - g).norm()).filter(|r| r.is_finite())
    }

    /// One un-damped step from `h = 1` (skew) or `h = i` (Hermitian).
    fn auto_start(&self) -> Result<Complex64> {
        let interior = match self.kernel {
            KernelTag::Skew => Complex64::new(1.0, 0.0),
            KernelTag::Hermitian => I,
        };
        self.eval(interior)
    }
}

fn check_inputs(z: &HalfPlanePoint, c: f64, measure: &SpectralMeasure, kernel: KernelTag) -> Result<()> {
    if measure.is_degenerate() {
        return Err(LsdError::DegenerateSpectrum);
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(LsdError::Domain(format!("c must be positive, got {c}")));
    }
    if z.half_plane() != half_plane_of(kernel) {
        return Err(LsdError::Domain(format!("z = {} is not in the {kernel} domain", z.value())));
    }
    Ok(())
}

struct Iterate {
    h: Complex64,
    residual: f64,
    iterations: usize,
    method: SolveMethod,
    converged: bool,
}

const STALL_WINDOW: usize = 25;

/// Damped Picard from `h`. Stops early when the residual fails to halve
/// over a window and `stall_exit` is set.
fn picard(map: &FixedPointMap<'_>, mut h: Complex64, cfg: &FixedPointConfig, budget: usize, stall_exit: bool) -> Result<Iterate> {
    let mut best = (h, f64::INFINITY);
    let mut window_start = f64::INFINITY;
    let mut iterations = 0;
    loop {
        let g = map.eval(h)?;
        let res = (h - g).norm();
        if res < best.1 {
            best = (h, res);
        }
        if res <= cfg.tol {
            return Ok(Iterate { h, residual: res, iterations, method: SolveMethod::Picard, converged: true });
        }
        if iterations >= budget {
            break;
        }
        if iterations % STALL_WINDOW == 0 {
            if stall_exit && iterations > 0 && res > 0.5 * window_start {
                break;
            }
            window_start = res;
        }
        // Backtrack the damping until the step stays in the half-plane.
        let mut alpha = cfg.damping;
        let mut next = h + alpha * (g - h);
        while !map.admissible(next) && alpha > 1e-12 {
            alpha *= 0.5;
            next = h + alpha * (g - h);
        }
        if !map.admissible(next) {
            break;
        }
        h = next;
        iterations += 1;
    }
    let res = map.residual(h).unwrap_or(f64::INFINITY);
    let (h, residual) = if stall_exit { (h, res) } else { best };
    Ok(Iterate { h, residual, iterations, method: SolveMethod::Picard, converged: false })
}

/// Newton on `F(h) = h − G(h)` with a residual-decrease line search.
fn newton(map: &FixedPointMap<'_>, mut h: Complex64, cfg: &FixedPointConfig) -> Result<Iterate> {
    let mut res = map.residual(h).unwrap_or(f64::INFINITY);
    let mut iterations = 0;
    while res > cfg.tol && iterations < 100 {
        iterations += 1;
        let (g, dg) = map.eval_with_derivative(h)?;
        let step = -(h - g) / (1.0 - dg);
        if !step.is_finite() {
            break;
        }
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-10 {
            let cand = h + t * step;
            if map.admissible(cand) {
                if let Some(r) = map.residual(cand) {
                    if r < res {
                        accepted = Some((cand, r));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some((cand, r)) = accepted else { break };
        h = cand;
        res = r;
    }
    Ok(Iterate { h, residual: res, iterations, method: SolveMethod::Newton, converged: res <= cfg.tol })
}

/// Picard, then Newton from wherever Picard stalled, then plain Picard with
/// the remaining budget if Newton gets stuck.
fn solve_from(map: &FixedPointMap<'_>, h0: Complex64, cfg: &FixedPointConfig) -> Result<Iterate> {
    let first = picard(map, h0, cfg, cfg.max_iter, cfg.newton_fallback)?;
    if first.converged || !cfg.newton_fallback {
        return Ok(first);
    }
    let mut total = first.iterations;
    let second = newton(map, first.h, cfg)?;
    total += second.iterations;
    if second.converged {
        return Ok(Iterate { iterations: total, ..second });
    }
    let start = if second.residual < first.residual { second.h } else { first.h };
    let budget = cfg.max_iter.saturating_sub(first.iterations).max(STALL_WINDOW);
    let third = picard(map, start, cfg, budget, false)?;
    total += third.iterations;
    let best = [first, second, third].into_iter().min_by(|a, b| a.residual.total_cmp(&b.residual)).unwrap();
    Ok(Iterate { iterations: total, converged: best.residual <= cfg.tol, ..best })
}

/// Newton first from a warm start, the full scheme otherwise.
fn solve_warm(map: &FixedPointMap<'_>, h0: Complex64, cfg: &FixedPointConfig) -> Result<Iterate> {
    if cfg.newton_fallback {
        let it = newton(map, h0, cfg)?;
        if it.converged {
            return Ok(it);
        }
        let rest = solve_from(map, h0, cfg)?;
        return Ok(Iterate { iterations: rest.iterations + it.iterations, ..rest });
    }
    solve_from(map, h0, cfg)
}

/// Distance from the boundary axis where the cold start is used directly.
const COLD_START_DISTANCE: f64 = 0.5;

/// Solves for `h(z)` and evaluates `s(z)`.
///
/// Without an explicit `initial_h`, points close to the axis are reached by
/// continuation: the distance to the axis is halved from `1` down to the
/// target, warm-starting each solve from the previous one.
pub fn solve_h(
    z: HalfPlanePoint,
    c: f64,
    measure: &SpectralMeasure,
    kernel: KernelTag,
    cfg: &FixedPointConfig,
) -> Result<FixedPointSolution> {
    check_inputs(&z, c, measure, kernel)?;
    cfg.validate()?;
    let target = z.value();
    let map = FixedPointMap { z: target, c, measure, kernel };

    let (h0, mut iterations, warm) = match cfg.initial_h {
        Some(h0) if map.admissible(h0) => (h0, 0, false),
        Some(h0) => return Err(LsdError::Domain(format!("initial h {h0} is outside the admissible half-plane"))),
        None => continuation_start(target, c, measure, kernel, cfg)?,
    };
    let it = if warm { solve_warm(&map, h0, cfg)? } else { solve_from(&map, h0, cfg)? };
    iterations += it.iterations;
    if !it.converged {
        return Err(LsdError::NoConvergence { best: it.h, residual: it.residual, iterations });
    }
    let h = it.h;
    let (i1, i2) = map.moments(h)?;
    let gamma = c * kernel.modulus(c * h)? * i2;
    Ok(FixedPointSolution {
        z,
        h,
        s: stieltjes_s(target, c, h, kernel),
        residual: it.residual,
        iterations,
        gamma,
        i1,
        i2,
        method: it.method,
    })
}

/// Axis coordinate and distance of `z`.
fn split_axis(z: Complex64, kernel: KernelTag) -> (f64, f64) {
    match kernel {
        KernelTag::Skew => (z.im, -z.re),
        KernelTag::Hermitian => (z.re, z.im),
    }
}

fn continuation_start(
    target: Complex64,
    c: f64,
    measure: &SpectralMeasure,
    kernel: KernelTag,
    cfg: &FixedPointConfig,
) -> Result<(Complex64, usize, bool)> {
    let (x, dist) = split_axis(target, kernel);
    let mut eps = 1.0_f64.max(dist);
    let far = axis_point(kernel, x, eps);
    let mut map = FixedPointMap { z: far, c, measure, kernel };
    let mut h = map.auto_start()?;
    if dist >= COLD_START_DISTANCE {
        return Ok((h, 0, false));
    }
    let mut iterations = 0;
    while eps > 2.0 * dist {
        map.z = axis_point(kernel, x, eps);
        let it = if iterations == 0 { solve_from(&map, h, cfg)? } else { solve_warm(&map, h, cfg)? };
        iterations += it.iterations;
        if !it.converged {
            return Err(LsdError::NoConvergence { best: it.h, residual: it.residual, iterations });
        }
        h = it.h;
        eps *= 0.5;
    }
    Ok((h, iterations, true))
}

/// Stieltjes transform of the LSD from a solved `h`.
///
/// Skew: `s = (1/z)(2/c − 1) + (1/(icz))(1/(i + ch) − 1/(−i + ch))`.
/// Hermitian: `s = (1/z)(2/c − 1) + (1/(cz))(1/(−1 + ch) − 1/(1 + ch))`.
pub fn stieltjes_s(z: Complex64, c: f64, h: Complex64, kernel: KernelTag) -> Complex64 {
    let ch = c * h;
    let base = (2.0 / c - 1.0) / z;
    match kernel {
        KernelTag::Skew => base + (1.0 / (I + ch) - 1.0 / (-I + ch)) / (I * c * z),
        KernelTag::Hermitian => base + (1.0 / (ch - 1.0) - 1.0 / (ch + 1.0)) / (c * z),
    }
}

/// `s(z)` for a spectrum `H`, solving for `h` on the way.
pub fn stieltjes_general(
    z: Complex64,
    c: f64,
    measure: &SpectralMeasure,
    kernel: KernelTag,
    cfg: &FixedPointConfig,
) -> Result<Complex64> {
    let z = HalfPlanePoint::for_kernel(z, kernel)?;
    Ok(solve_h(z, c, measure, kernel, cfg)?.s)
}

/// Atom at zero for `H = (1 − β)δ₀ + βH₁`: `1 − β` if `c < 2/β`, else
/// `1 − 2/c`.
pub fn point_mass_zero_analytic(beta: f64, c: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(LsdError::DegenerateSpectrum);
    }
    if beta > 1.0 || !(c > 0.0) {
        return Err(LsdError::Domain(format!("need 0 < beta <= 1 and c > 0, got beta = {beta}, c = {c}")));
    }
    Ok(if c < 2.0 / beta { 1.0 - beta } else { 1.0 - 2.0 / c })
}

/// `lim_{ε↓0} h(−ε)`: `√(β/(c(2 − cβ)))` below the threshold `c = 2/β`,
/// `+∞` at or above it.
pub fn h_limit_at_zero(beta: f64, c: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(LsdError::DegenerateSpectrum);
    }
    if c * beta >= 2.0 {
        return Ok(f64::INFINITY);
    }
    Ok((beta / (c * (2.0 - c * beta))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    /// `None` brackets automatically.
    pub half_width: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: 2001, half_width: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub solver: FixedPointConfig,
    pub inversion: InversionConfig,
    /// Density below this counts as outside the support.
    pub support_threshold: f64,
    /// Auto-bracketing stops once the density at the grid edge is below this.
    pub tail_threshold: f64,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            solver: FixedPointConfig::default(),
            inversion: InversionConfig::default(),
            support_threshold: 1e-6,
            tail_threshold: 1e-8,
        }
    }
}

#[cfg(feature = "parallel")]
fn map_grid<F: Fn(f64) -> Result<f64> + Sync + Send>(grid: &[f64], f: F) -> Vec<Result<f64>> {
    use rayon::prelude::*;
    grid.par_iter().map(|&x| f(x)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_grid<F: Fn(f64) -> Result<f64>>(grid: &[f64], f: F) -> Vec<Result<f64>> {
    grid.iter().map(|&x| f(x)).collect()
}

/// Numeric LSD for a general spectrum: solve on approach points `−ε + ix`
/// (or `x + iε`), invert, and tabulate.
///
/// The atom at zero is estimated first and its Poisson kernel is removed
/// from the transform before the density inversion.
pub fn lsd_curve(
    c: f64,
    measure: &SpectralMeasure,
    kernel: KernelTag,
    grid: &GridSpec,
    cfg: &CurveConfig,
) -> Result<LsdCurve> {
    if measure.is_degenerate() {
        return Err(LsdError::DegenerateSpectrum);
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(LsdError::Domain(format!("c must be positive, got {c}")));
    }
    cfg.inversion.validate()?;
    cfg.solver.validate()?;

    let s_fn = |z: Complex64| stieltjes_general(z, c, measure, kernel, &cfg.solver);
    let pm_est = invert_point_mass(s_fn, kernel, 0.0, &cfg.inversion)?;
    if pm_est.status == EstimateStatus::Negative {
        return Err(LsdError::Domain(format!("negative point mass estimate {}", pm_est.value)));
    }
    let pm = if pm_est.value.abs() < 1e-8 { 0.0 } else { pm_est.value.clamp(0.0, 1.0) };
    let continuous = move |z: Complex64| Ok(s_fn(z)? + pm / z);
    let density_at = |x: f64| invert_density(continuous, kernel, x, &cfg.inversion).map(|e| e.value.max(0.0));

    let half_width = match grid.half_width {
        Some(w) if w > 0.0 => w,
        Some(w) => return Err(LsdError::Domain(format!("grid half width must be positive, got {w}"))),
        None => {
            let mut w = 2.0 * (1.0 + c.sqrt()).powi(2) * measure.lambda_max();
            for _ in 0..20 {
                if density_at(w)? < cfg.tail_threshold {
                    break;
                }
                w *= 1.5;
            }
            w
        }
    };
    let xs = LsdCurve::symmetric_grid(half_width, grid.points);

    let results = map_grid(&xs, density_at);
    let mut failed = Vec::new();
    let mut density = Vec::with_capacity(xs.len());
    for (x, r) in xs.iter().zip(results) {
        match r {
            Ok(f) => density.push(f),
            Err(LsdError::NoConvergence { .. }) | Err(LsdError::Domain(_)) => {
                failed.push(*x);
                density.push(f64::NAN);
            }
            Err(e) => return Err(e),
        }
    }
    if !failed.is_empty() {
        return Err(LsdError::GridFailure { xs: failed });
    }

    let above: Vec<f64> =
        xs.iter().zip(&density).filter(|(x, f)| **x >= 0.0 && **f > cfg.support_threshold).map(|(x, _)| *x).collect();
    let (lower, upper) = match (above.first(), above.last()) {
        (Some(&lo), Some(&hi)) => {
            let step = 2.0 * half_width / (xs.len() - 1) as f64;
            (if lo <= step { 0.0 } else { lo }, hi)
        }
        _ => (0.0, 0.0),
    };
    for (x, f) in xs.iter().zip(density.iter_mut()) {
        if x.abs() > upper || x.abs() < lower {
            *f = 0.0;
        }
    }

    let mut curve = LsdCurve {
        c,
        kernel,
        method: CurveMethod::FixedPoint,
        grid: xs,
        density,
        cdf: vec![],
        point_mass_zero: pm,
        support: (lower, upper),
        point_mass_analytic: point_mass_zero_analytic(measure.beta(), c).ok(),
        solver: Some(SolverMeta { tol: cfg.solver.tol, max_iter: cfg.solver.max_iter }),
    };
    curve.fill_cdf_by_trapezoid();
    Ok(curve)
}

/// Mass of `[a, b]` for the continuous part, with the atom `point_mass` at
/// zero removed, by adaptive quadrature of the smoothed transform at each
/// `ε` followed by extrapolation.
pub fn continuous_mass_numeric(
    c: f64,
    measure: &SpectralMeasure,
    kernel: KernelTag,
    a: f64,
    b: f64,
    point_mass: f64,
    cfg: &CurveConfig,
) -> Result<InversionEstimate> {
    let continuous = |z: Complex64| Ok(stieltjes_general(z, c, measure, kernel, &cfg.solver)? + point_mass / z);
    cdf_interval(continuous, kernel, a, b, &[0.0], &cfg.inversion)
}
