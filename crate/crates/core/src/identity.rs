//! Closed-form LSD for identity covariance (`H = δ₁`).
//!
//! For `Σ = I` the auxiliary transform `h` coincides with the Stieltjes
//! transform `s`, which is the unique root with positive real part of
//!
//! ```text
//! c²z m³ + (c² − 2c) m² + z m + 1 = 0.
//! ```
//!
//! Cardano's method gives all three roots; the density on the support
//! `S_c = (−U, −L) ∪ (L, U)` is `(√3/2π)(V₊^{1/3} − V₋^{1/3})` with
//! `V± = |r(x)| ± √(−d(x))`, and the atom at zero is `max(0, 1 − 2/c)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LsdError, Result};
use crate::kernels::KernelTag;
use crate::measures::{CurveMethod, HalfPlane, HalfPlanePoint, LsdCurve};
use crate::quadrature;

/// Threshold on `Re m` used when picking the Stieltjes root.
pub const ROOT_SELECTION_EPS: f64 = 1e-10;

/// The `c`-dependent constants of the depressed cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardanoCoefficients {
    pub c: f64,
    pub q0: f64,
    pub q2: f64,
    pub r1: f64,
    pub r3: f64,
    pub d0: f64,
    pub d2: f64,
    pub d4: f64,
}

impl CardanoCoefficients {
    pub fn new(c: f64) -> Result<Self> {
        check_c(c)?;
        let c2 = c * c;
        let c3 = c2 * c;
        let c6 = c3 * c3;
        let cm2 = c - 2.0;
        Ok(Self {
            c,
            q0: 1.0 / (3.0 * c2),
            q2: -(cm2 * cm2) / (9.0 * c2),
            r1: -(c + 1.0) / (3.0 * c3),
            r3: -(cm2 * cm2 * cm2) / (27.0 * c3),
            d0: 1.0 / (27.0 * c6),
            d2: (2.0 * c2 + 10.0 * c - 1.0) / (27.0 * c6),
            d4: (1.0 - 2.0 / c).powi(3) / (27.0 * c2),
        })
    }

    /// `Q(z) = q₀ + q₂/z²`.
    pub fn q_at(&self, z: Complex64) -> Complex64 {
        self.q0 + self.q2 / (z * z)
    }

    /// `R(z) = r₁/z + r₃/z³`.
    pub fn r_at(&self, z: Complex64) -> Complex64 {
        self.r1 / z + self.r3 / (z * z * z)
    }

    /// `d₂² − 4d₀d₄`.
    pub fn discriminant(&self) -> f64 {
        self.d2 * self.d2 - 4.0 * self.d0 * self.d4
    }
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(LsdError::Domain(format!("c must be positive and finite, got {c}")));
    }
    Ok(())
}

/// Support and atom of the identity-covariance LSD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportSpec {
    pub c: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    pub lower: f64,
    pub upper: f64,
    pub point_mass_zero: f64,
}

/// Roots `R±` of `y² − D₂y + D₄` where, after scaling `d` by `27c⁶`,
/// `D₂ = 2c² + 10c − 1`, `D₄ = c(c − 2)³`, and the discriminant is exactly
/// `(4c + 1)³`. The pairing avoids cancellation in the smaller root.
fn support_roots(c: f64) -> (f64, f64) {
    let big_d2 = 2.0 * c * c + 10.0 * c - 1.0;
    let big_d4 = c * (c - 2.0).powi(3);
    let sq = (4.0 * c + 1.0).powf(1.5);
    if big_d2 >= 0.0 {
        let r_plus = 0.5 * (big_d2 + sq);
        (r_plus, big_d4 / r_plus)
    } else {
        let r_minus = 0.5 * (big_d2 - sq);
        (big_d4 / r_minus, r_minus)
    }
}

pub fn support(c: f64) -> Result<SupportSpec> {
    check_c(c)?;
    let (r_plus, r_minus) = support_roots(c);
    let lower = if r_minus > 0.0 { r_minus.sqrt() } else { 0.0 };
    Ok(SupportSpec {
        c,
        r_plus,
        r_minus,
        lower,
        upper: r_plus.sqrt(),
        point_mass_zero: (1.0 - 2.0 / c).max(0.0),
    })
}

/// Boundary values of the Cardano quantities at `x ≠ 0`, plus the density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEval {
    pub x: f64,
    pub r_abs: f64,
    pub q: f64,
    pub d: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    pub f: f64,
}

/// `(|r(x)|, q(x), d(x))` with `r(x) = i·sgn(x)(−r₁/|x| + r₃/|x|³)` purely
/// imaginary, so that `d = r² + q³ = −|r|² + q³`.
pub fn rqd_at(x: f64, coeffs: &CardanoCoefficients) -> Result<(f64, f64, f64)> {
    if x == 0.0 || !x.is_finite() {
        return Err(LsdError::Domain(format!("rqd_at needs a finite nonzero x, got {x}")));
    }
    let ax = x.abs();
    let x2 = x * x;
    let r_abs = (-coeffs.r1 / ax + coeffs.r3 / (ax * x2)).abs();
    let q = coeffs.q0 - coeffs.q2 / x2;
    // Factored as (x² − R₊)(x² − R₋)/(27c⁶x⁴) to stay accurate near ±L, ±U.
    let (r_plus, r_minus) = support_roots(coeffs.c);
    let d = coeffs.d0 * ((x2 - r_plus) / x2) * ((x2 - r_minus) / x2);
    Ok((r_abs, q, d))
}

pub fn density_eval(x: f64, c: f64) -> Result<DensityEval> {
    let coeffs = CardanoCoefficients::new(c)?;
    let (r_abs, q, d) = rqd_at(x, &coeffs)?;
    let spec = support(c)?;
    let inside = x.abs() > spec.lower && x.abs() < spec.upper && d < 0.0;
    if !inside {
        return Ok(DensityEval { x, r_abs, q, d, v_plus: 0.0, v_minus: 0.0, f: 0.0 });
    }
    let v_plus = r_abs + (-d).sqrt();
    // V₊V₋ = q³; dividing avoids the cancellation in |r| − √(−d).
    let v_minus = (q * q * q / v_plus).max(0.0);
    let f = (3.0f64.sqrt() / (2.0 * PI)) * (v_plus.cbrt() - v_minus.cbrt()).max(0.0);
    Ok(DensityEval { x, r_abs, q, d, v_plus, v_minus, f })
}

/// Density of the identity LSD at axis coordinate `x`.
///
/// At `x = 0`: `1/(π√(2c − c²))` for `c < 2`, `+∞` for `c = 2` (the density
/// blows up), `0` for `c > 2` (the mass there is the atom).
pub fn density(x: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    if x == 0.0 {
        return Ok(if c < 2.0 {
            1.0 / (PI * (2.0 * c - c * c).sqrt())
        } else if c == 2.0 {
            f64::INFINITY
        } else {
            0.0
        });
    }
    Ok(density_eval(x, c)?.f)
}

fn cbrt_principal(w: Complex64) -> Complex64 {
    if w == Complex64::new(0.0, 0.0) {
        return w;
    }
    Complex64::from_polar(w.norm().cbrt(), w.arg() / 3.0)
}

fn cubic_value(z: Complex64, c: f64, m: Complex64) -> Complex64 {
    ((c * c * z * m + (c * c - 2.0 * c)) * m + z) * m + 1.0
}

fn cubic_derivative(z: Complex64, c: f64, m: Complex64) -> Complex64 {
    (3.0 * c * c * z * m + 2.0 * (c * c - 2.0 * c)) * m + z
}

/// `|c²zm³ + (c² − 2c)m² + zm + 1|`.
pub fn cubic_residual(z: Complex64, c: f64, m: Complex64) -> f64 {
    cubic_value(z, c, m).norm()
}

/// All three roots of the cubic in `m` at `z ≠ 0`, via Cardano with the
/// principal cube root, each polished by a couple of Newton steps.
pub fn cardano_roots(z: Complex64, c: f64) -> Result<[Complex64; 3]> {
    if z.norm() == 0.0 || !z.is_finite() {
        return Err(LsdError::Domain("cardano_roots needs z != 0".into()));
    }
    let k = CardanoCoefficients::new(c)?;
    let q = k.q_at(z);
    let r = k.r_at(z);
    let sq = (r * r + q * q * q).sqrt();
    let cube = if (r + sq).norm() >= (r - sq).norm() { r + sq } else { r - sq };
    let s = cbrt_principal(cube);
    let t = if s.norm() > 0.0 { -q / s } else { Complex64::new(0.0, 0.0) };
    let shift = -(1.0 - 2.0 / c) / (3.0 * z);
    let w1 = Complex64::new(-0.5, 0.75f64.sqrt());
    let w2 = w1.conj();
    let mut roots = [shift + s + t, shift + w1 * s + w2 * t, shift + w2 * s + w1 * t];
    for m in roots.iter_mut() {
        for _ in 0..2 {
            let dp = cubic_derivative(z, c, *m);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *m - cubic_value(z, c, *m) / dp;
            if next.is_finite() && cubic_residual(z, c, next) < cubic_residual(z, c, *m) {
                *m = next;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}

/// Picks the unique root with positive real part.
pub fn select_stieltjes_root(roots: &[Complex64; 3], z: HalfPlanePoint) -> Result<Complex64> {
    if z.half_plane() != HalfPlane::Left {
        return Err(LsdError::Domain("root selection is defined for z in the left half-plane".into()));
    }
    let mut positive = roots.iter().filter(|m| m.re > ROOT_SELECTION_EPS);
    match (positive.next(), positive.next()) {
        (Some(&m), None) => Ok(m),
        (None, _) => Err(LsdError::RootSelectionAmbiguity { count: 0 }),
        (Some(_), Some(_)) => Err(LsdError::RootSelectionAmbiguity { count: 2 + positive.count() }),
    }
}

/// Stieltjes transform of the identity LSD on the imaginary axis, `z ∈ ℂ_L`.
pub fn stieltjes(z: HalfPlanePoint, c: f64) -> Result<Complex64> {
    select_stieltjes_root(&cardano_roots(z.value(), c)?, z)
}

/// Stieltjes transform of the same law placed on the real axis (the
/// anticommutator LSD), `z ∈ ℂ⁺`: `s⁺(z) = i·s(iz)`.
pub fn stieltjes_hermitian(z: HalfPlanePoint, c: f64) -> Result<Complex64> {
    if z.half_plane() != HalfPlane::Upper {
        return Err(LsdError::Domain("hermitian transform is defined for z in the upper half-plane".into()));
    }
    let rotated = HalfPlanePoint::new(Complex64::new(0.0, 1.0) * z.value(), HalfPlane::Left)?;
    Ok(Complex64::new(0.0, 1.0) * stieltjes(rotated, c)?)
}

/// Transform for either kernel, taking a raw complex point.
pub fn stieltjes_for(kernel: KernelTag, z: Complex64, c: f64) -> Result<Complex64> {
    match kernel {
        KernelTag::Skew => stieltjes(HalfPlanePoint::new(z, HalfPlane::Left)?, c),
        KernelTag::Hermitian => stieltjes_hermitian(HalfPlanePoint::new(z, HalfPlane::Upper)?, c),
    }
}

fn continuous_breaks(spec: &SupportSpec, a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a];
    for t in [-spec.upper, -spec.lower, 0.0, spec.lower, spec.upper] {
        if t > a && t < b && pts.last() != Some(&t) {
            pts.push(t);
        }
    }
    pts.push(b);
    pts
}

/// `∫ₐᵇ f_c` of the absolutely continuous part.
pub fn continuous_mass(a: f64, b: f64, c: f64, tol: f64) -> Result<f64> {
    let spec = support(c)?;
    let (a, b) = (a.max(-spec.upper), b.min(spec.upper));
    if a >= b {
        return Ok(0.0);
    }
    let r = quadrature::integrate_with_breaks(|x| density(x, c).unwrap_or(0.0), &continuous_breaks(&spec, a, b), tol);
    Ok(r.value)
}

/// Distribution function of the identity LSD (atom included).
pub fn cdf(x: f64, c: f64) -> Result<f64> {
    let spec = support(c)?;
    let atom = if x >= 0.0 { spec.point_mass_zero } else { 0.0 };
    Ok((continuous_mass(-spec.upper, x, c, 1e-12)? + atom).min(1.0))
}

/// Tabulates the closed-form LSD on `grid` (sorted). CDF values come from
/// per-cell adaptive quadrature rather than the trapezoid rule.
pub fn closed_form_curve(c: f64, kernel: KernelTag, grid: &[f64]) -> Result<LsdCurve> {
    let spec = support(c)?;
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.is_empty() {
        return Err(LsdError::Domain("grid must be non-empty and strictly increasing".into()));
    }
    let density = grid.iter().map(|&x| density(x, c)).collect::<Result<Vec<_>>>()?;
    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = continuous_mass(-spec.upper, grid[0], c, 1e-12)?;
    let mut atom_added = false;
    for (i, &x) in grid.iter().enumerate() {
        if i > 0 {
            acc += continuous_mass(grid[i - 1], x, c, 1e-12)?;
        }
        if !atom_added && x >= 0.0 {
            acc += spec.point_mass_zero;
            atom_added = true;
        }
        cdf.push(acc.min(1.0));
    }
    Ok(LsdCurve {
        c,
        kernel,
        method: CurveMethod::ClosedForm,
        grid: grid.to_vec(),
        density,
        cdf,
        point_mass_zero: spec.point_mass_zero,
        support: (spec.lower, spec.upper),
        point_mass_analytic: Some(spec.point_mass_zero),
        solver: None,
    })
}
