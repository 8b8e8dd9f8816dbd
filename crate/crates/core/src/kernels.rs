//! The rational kernels that drive the fixed-point equations.
//!
//! The skew-Hermitian case uses `ρ(z) = 1/(i+z) + 1/(−i+z)` together with its
//! modulus companion `ρ₂(z) = |i+z|⁻² + |−i+z|⁻²`; the Hermitian case swaps
//! the poles `±i` for `±1` and uses `σ`, `σ₂`. The companions satisfy
//! `Re ρ(z) = ρ₂(z)·Re z` and `Im σ(z) = −σ₂(z)·Im z`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LsdError, Result};

/// Distance to a pole below which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which of the two matrix models is being described.
///
/// `Skew` is the commutator `S⁻` (imaginary spectrum, transforms live on the
/// open left half-plane); `Hermitian` is the anticommutator `S⁺` (real
/// spectrum, open upper half-plane).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelTag {
    Skew,
    Hermitian,
}

impl KernelTag {
    fn pole(self) -> Complex64 {
        match self {
            KernelTag::Skew => I,
            KernelTag::Hermitian => ONE,
        }
    }

    fn check_poles(self, z: Complex64) -> Result<()> {
        let a = self.pole();
        if (z - a).norm() < POLE_GUARD || (z + a).norm() < POLE_GUARD {
            return Err(LsdError::Domain(format!(
                "{z} is within {POLE_GUARD:e} of a pole of the {} kernel",
                self.as_str()
            )));
        }
        Ok(())
    }

    /// `ρ` for skew, `σ` for Hermitian.
    pub fn eval(self, z: Complex64) -> Result<Complex64> {
        self.check_poles(z)?;
        let a = self.pole();
        Ok(1.0 / (a + z) + 1.0 / (z - a))
    }

    /// `ρ₂` for skew, `σ₂` for Hermitian.
    pub fn modulus(self, z: Complex64) -> Result<f64> {
        self.check_poles(z)?;
        let a = self.pole();
        Ok(1.0 / (a + z).norm_sqr() + 1.0 / (z - a).norm_sqr())
    }

    /// Complex derivative of [`KernelTag::eval`].
    pub fn derivative(self, z: Complex64) -> Result<Complex64> {
        self.check_poles(z)?;
        let a = self.pole();
        let p = a + z;
        let m = z - a;
        Ok(-1.0 / (p * p) - 1.0 / (m * m))
    }

    /// True if `w` lies in the open half-plane this kernel's transforms
    /// take values in (right half-plane for skew, upper for Hermitian).
    pub fn in_value_half_plane(self, w: Complex64) -> bool {
        match self {
            KernelTag::Skew => w.re > 0.0,
            KernelTag::Hermitian => w.im > 0.0,
        }
    }

    /// Signed distance of `w` into the value half-plane.
    pub fn value_depth(self, w: Complex64) -> f64 {
        match self {
            KernelTag::Skew => w.re,
            KernelTag::Hermitian => w.im,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KernelTag::Skew => "skew",
            KernelTag::Hermitian => "hermitian",
        }
    }
}

impl std::fmt::Display for KernelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for KernelTag {
    type Err = LsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skew" | "minus" => Ok(KernelTag::Skew),
            "hermitian" | "plus" => Ok(KernelTag::Hermitian),
            other => Err(LsdError::Domain(format!("unknown kernel tag `{other}`"))),
        }
    }
}

pub fn rho(z: Complex64) -> Result<Complex64> {
    KernelTag::Skew.eval(z)
}

pub fn rho2(z: Complex64) -> Result<f64> {
    KernelTag::Skew.modulus(z)
}

pub fn sigma(z: Complex64) -> Result<Complex64> {
    KernelTag::Hermitian.eval(z)
}

pub fn sigma2(z: Complex64) -> Result<f64> {
    KernelTag::Hermitian.modulus(z)
}
