//! Spectral measures: the covariance spectrum `H`, discrete measures on the
//! real or imaginary axis, their Stieltjes transforms, boundary-value
//! inversion, and distances between distribution functions.

mod cdf;
mod curve;
mod inversion;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LsdError, Result};
use crate::kernels::KernelTag;

pub use cdf::{ks_and_levy, Cdf, CurveCdf, StepCdf};
pub use curve::{CurveMethod, LsdCurve, SolverMeta};
pub use inversion::{
    cdf_interval, extrapolate_to_zero, invert_density, invert_point_mass, EstimateStatus,
    InversionConfig, InversionEstimate,
};

/// Tolerance on `zero_mass + Σ weights = 1`.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// A covariance spectrum `H = (1 − β)δ₀ + Σ wⱼ δ_{λⱼ}` on `[0, ∞)`.
///
/// The mass at zero is declared explicitly through `zero_mass` and is never
/// inferred from small atom locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
    zero_mass: f64,
}

impl SpectralMeasure {
    pub fn new(atoms: Vec<Atom>, zero_mass: f64) -> Result<Self> {
        if !(0.0..1.0 + MASS_TOL).contains(&zero_mass) || !zero_mass.is_finite() {
            return Err(LsdError::InvalidMeasure(format!("zero_mass {zero_mass} outside [0, 1]")));
        }
        for a in &atoms {
            if !(a.location >= 0.0) || !a.location.is_finite() {
                return Err(LsdError::InvalidMeasure(format!("atom location {} is not >= 0", a.location)));
            }
            if !(a.weight > 0.0) || a.weight > 1.0 + MASS_TOL {
                return Err(LsdError::InvalidMeasure(format!("atom weight {} outside (0, 1]", a.weight)));
            }
        }
        let total = zero_mass + atoms.iter().map(|a| a.weight).sum::<f64>();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(LsdError::InvalidMeasure(format!("total mass {total} != 1")));
        }
        Ok(Self { atoms, zero_mass })
    }

    /// `δ_λ`.
    pub fn point(location: f64) -> Result<Self> {
        Self::new(vec![Atom { location, weight: 1.0 }], 0.0)
    }

    /// `(1 − β)δ₀ + βδ_λ`.
    pub fn with_zero_mass(beta: f64, location: f64) -> Result<Self> {
        if beta >= 1.0 {
            return Self::point(location);
        }
        if beta <= 0.0 {
            return Self::new(vec![], 1.0);
        }
        Self::new(vec![Atom { location, weight: beta }], 1.0 - beta)
    }

    /// Discretizes an absolutely continuous spectrum by its quantiles at the
    /// midpoints `(k + ½)/n`, each carrying weight `β/n`.
    pub fn from_quantiles<Q: Fn(f64) -> f64>(n: usize, zero_mass: f64, quantile: Q) -> Result<Self> {
        if n == 0 {
            return Err(LsdError::InvalidMeasure("need at least one quantile".into()));
        }
        let beta = 1.0 - zero_mass;
        let w = beta / n as f64;
        let atoms = (0..n)
            .map(|k| Atom { location: quantile((k as f64 + 0.5) / n as f64), weight: w })
            .collect();
        Self::new(atoms, zero_mass)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn zero_mass(&self) -> f64 {
        self.zero_mass
    }

    /// Mass carried away from zero (`β`). Atoms placed exactly at 0 count
    /// towards the zero part.
    pub fn beta(&self) -> f64 {
        1.0 - self.zero_mass - self.atoms.iter().filter(|a| a.location == 0.0).map(|a| a.weight).sum::<f64>()
    }

    /// `H = δ₀`.
    pub fn is_degenerate(&self) -> bool {
        self.atoms.iter().all(|a| a.location == 0.0)
    }

    pub fn lambda_max(&self) -> f64 {
        self.atoms.iter().map(|a| a.location).fold(0.0, f64::max)
    }

    /// `Σ wⱼ f(λⱼ)` over atoms with `λⱼ > 0`; the zero part contributes
    /// nothing to any `∫ λ^k … dH` with `k ≥ 1`.
    pub fn positive_atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().filter(|a| a.location > 0.0).map(|a| (a.location, a.weight))
    }

    /// Parses the plain-text format: one `location weight` pair per line,
    /// optional `zero_mass <v>` header, `#` comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut zero_mass = 0.0;
        let mut seen_atom = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(LsdError::Parse { line: line_no, msg: format!("expected two fields, got `{line}`") });
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| LsdError::Parse { line: line_no, msg: format!("`{s}`: {e}") })
            };
            if fields[0] == "zero_mass" {
                if seen_atom {
                    return Err(LsdError::Parse { line: line_no, msg: "zero_mass must precede atoms".into() });
                }
                zero_mass = num(fields[1])?;
                continue;
            }
            seen_atom = true;
            atoms.push(Atom { location: num(fields[0])?, weight: num(fields[1])? });
        }
        Self::new(atoms, zero_mass)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.zero_mass > 0.0 {
            out.push_str(&format!("zero_mass {}\n", self.zero_mass));
        }
        for a in &self.atoms {
            out.push_str(&format!("{} {}\n", a.location, a.weight));
        }
        out
    }
}

impl std::str::FromStr for SpectralMeasure {
    type Err = LsdError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalfPlane {
    /// `Re z < 0`.
    Left,
    /// `Im z > 0`.
    Upper,
}

/// A point strictly inside an open half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlanePoint {
    value: Complex64,
    half_plane: HalfPlane,
}

impl HalfPlanePoint {
    pub fn new(value: Complex64, half_plane: HalfPlane) -> Result<Self> {
        let inside = match half_plane {
            HalfPlane::Left => value.re < 0.0,
            HalfPlane::Upper => value.im > 0.0,
        };
        if !inside || !value.is_finite() {
            return Err(LsdError::Domain(format!("{value} is not inside the {half_plane:?} half-plane")));
        }
        Ok(Self { value, half_plane })
    }

    pub fn left(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im), HalfPlane::Left)
    }

    pub fn upper(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im), HalfPlane::Upper)
    }

    /// The natural domain for a kernel: `ℂ_L` for skew, `ℂ⁺` for Hermitian.
    pub fn for_kernel(value: Complex64, kernel: KernelTag) -> Result<Self> {
        Self::new(value, half_plane_of(kernel))
    }

    /// Boundary approach point at distance `eps` from axis coordinate `x`.
    pub fn near_axis(kernel: KernelTag, x: f64, eps: f64) -> Result<Self> {
        Self::for_kernel(axis_point(kernel, x, eps), kernel)
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn half_plane(&self) -> HalfPlane {
        self.half_plane
    }

    pub fn conj(&self) -> Self {
        match self.half_plane {
            HalfPlane::Left => Self { value: self.value.conj(), half_plane: HalfPlane::Left },
            // Reflection across the imaginary axis keeps ℂ⁺.
            HalfPlane::Upper => Self { value: -self.value.conj(), half_plane: HalfPlane::Upper },
        }
    }
}

pub fn half_plane_of(kernel: KernelTag) -> HalfPlane {
    match kernel {
        KernelTag::Skew => HalfPlane::Left,
        KernelTag::Hermitian => HalfPlane::Upper,
    }
}

/// `−ε + ix` for skew, `x + iε` for Hermitian.
pub fn axis_point(kernel: KernelTag, x: f64, eps: f64) -> Complex64 {
    match kernel {
        KernelTag::Skew => Complex64::new(-eps, x),
        KernelTag::Hermitian => Complex64::new(x, eps),
    }
}

/// The part of `s(z)` whose boundary limit gives π × density: `Re s` on the
/// imaginary axis, `Im s` on the real axis.
pub fn boundary_part(kernel: KernelTag, s: Complex64) -> f64 {
    match kernel {
        KernelTag::Skew => s.re,
        KernelTag::Hermitian => s.im,
    }
}

/// A finitely supported probability measure on the imaginary axis (skew;
/// atom at coordinate `t` means the point `it`) or on the real axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisMeasure {
    pub points: Vec<(f64, f64)>,
    pub axis: KernelTag,
}

impl AxisMeasure {
    pub fn new(points: Vec<(f64, f64)>, axis: KernelTag) -> Result<Self> {
        let total: f64 = points.iter().map(|p| p.1).sum();
        if points.iter().any(|p| !(p.1 > 0.0)) || (total - 1.0).abs() > 1e-10 {
            return Err(LsdError::InvalidMeasure(format!("weights must be positive and sum to 1 (got {total})")));
        }
        Ok(Self { points, axis })
    }

    /// Uniform measure on the given coordinates (an ESD).
    pub fn empirical(coords: &[f64], axis: KernelTag) -> Result<Self> {
        let w = 1.0 / coords.len() as f64;
        Self::new(coords.iter().map(|&t| (t, w)).collect(), axis)
    }
}

/// Stieltjes transform `Σ wⱼ/(i tⱼ − z)` (skew) or `Σ wⱼ/(tⱼ − z)`
/// (Hermitian).
pub fn stieltjes_eval(measure: &AxisMeasure, z: HalfPlanePoint) -> Result<Complex64> {
    let z = z.value();
    let off_axis = match measure.axis {
        KernelTag::Skew => z.re != 0.0,
        KernelTag::Hermitian => z.im != 0.0,
    };
    if !off_axis {
        return Err(LsdError::Domain(format!("{z} lies on the support axis")));
    }
    Ok(measure
        .points
        .iter()
        .map(|&(t, w)| {
            let atom = match measure.axis {
                KernelTag::Skew => Complex64::new(0.0, t),
                KernelTag::Hermitian => Complex64::new(t, 0.0),
            };
            w / (atom - z)
        })
        .sum())
}
