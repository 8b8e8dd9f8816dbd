//! Random commutator and anticommutator ensembles and their spectra.
//!
//! `S∓ = n⁻¹ Σ^{1/2}(Z₁Z₂ᵀ ∓ Z₂Z₁ᵀ)Σ^{1/2}` with `Z₁, Z₂` independent `p × n`
//! matrices of i.i.d. standardized entries and `Σ` diagonal.

pub mod eigen;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LsdError, Result};
use crate::kernels::KernelTag;
use crate::measures::{SpectralMeasure, StepCdf};

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryDist {
    Gaussian,
    /// Uniform on `(−√3, √3)`.
    Uniform,
    Rademacher,
    /// A seeded random half of the rows Gaussian, the rest uniform.
    Mixed,
}

impl EntryDist {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Uniform => "uniform",
            Self::Rademacher => "rademacher",
            Self::Mixed => "mixed",
        }
    }
}

impl fmt::Display for EntryDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntryDist {
    type Err = LsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "uniform" => Ok(Self::Uniform),
            "rademacher" => Ok(Self::Rademacher),
            "mixed" => Ok(Self::Mixed),
            other => Err(LsdError::Domain(format!("unknown entry distribution '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSpec {
    Identity,
    /// Diagonal with multiplicities proportional to the atom weights.
    Measure(SpectralMeasure),
}

impl SigmaSpec {
    /// Diagonal of `Σ^{1/2}` for dimension `p`.
    pub fn sqrt_diagonal(&self, p: usize) -> DVector<f64> {
        match self {
            Self::Identity => DVector::from_element(p, 1.0),
            Self::Measure(m) => {
                let mut support: Vec<(f64, f64)> =
                    m.atoms().iter().map(|a| (a.location, a.weight)).collect();
                if m.zero_mass() > 0.0 {
                    support.push((0.0, m.zero_mass()));
                }
                support.sort_by(|a, b| a.0.total_cmp(&b.0));
                let counts = largest_remainder(&support.iter().map(|a| a.1).collect::<Vec<_>>(), p);
                DVector::from_iterator(
                    p,
                    support.iter().zip(counts).flat_map(|(&(l, _), k)| std::iter::repeat_n(l.sqrt(), k)),
                )
            }
        }
    }

    pub fn lambda_max(&self) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Measure(m) => m.lambda_max(),
        }
    }
}

/// Integer counts summing to `total`, proportional to `weights`.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub p: usize,
    pub n: usize,
    pub entry_dist: EntryDist,
    pub sigma: SigmaSpec,
    pub seed: u64,
    pub kernel: KernelTag,
}

impl EnsembleConfig {
    pub fn new(p: usize, n: usize, entry_dist: EntryDist, kernel: KernelTag, seed: u64) -> Self {
        Self { p, n, entry_dist, sigma: SigmaSpec::Identity, seed, kernel }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return Err(LsdError::Domain(format!("p and n must be positive, got p = {}, n = {}", self.p, self.n)));
        }
        Ok(())
    }

    pub fn ratio(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    /// Same ensemble with the seed of replicate `r`.
    pub fn replicate(&self, r: u64) -> Self {
        Self { seed: replicate_seed(self.seed, r), ..self.clone() }
    }
}

/// Seed for replicate `r`; replicate 0 keeps the base seed.
pub fn replicate_seed(seed: u64, r: u64) -> u64 {
    if r == 0 {
        return seed;
    }
    // SplitMix64 finalizer.
    let mut z = seed.wrapping_add(r.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub z1: DMatrix<f64>,
    pub z2: DMatrix<f64>,
    pub sigma_half: DVector<f64>,
    /// Rows drawn from the Gaussian law under [`EntryDist::Mixed`].
    pub gaussian_rows: Option<Vec<usize>>,
}

const PERMUTATION_STREAM: u64 = 2;

/// One independent ChaCha stream per `(matrix, row)`.
fn row_rng(seed: u64, matrix: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((matrix << 32) | row as u64);
    rng
}

fn draw(rng: &mut ChaCha8Rng, gaussian: bool, dist: EntryDist) -> f64 {
    match dist {
        EntryDist::Gaussian => rng.sample(StandardNormal),
        EntryDist::Uniform => (2.0 * rng.random::<f64>() - 1.0) * SQRT3,
        EntryDist::Rademacher => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        EntryDist::Mixed if gaussian => rng.sample(StandardNormal),
        EntryDist::Mixed => (2.0 * rng.random::<f64>() - 1.0) * SQRT3,
    }
}

pub fn sample_ensemble(cfg: &EnsembleConfig) -> Result<Ensemble> {
    cfg.validate()?;
    let (p, n) = (cfg.p, cfg.n);
    let mut is_gaussian = vec![false; p];
    let gaussian_rows = (cfg.entry_dist == EntryDist::Mixed).then(|| {
        let mut rows: Vec<usize> = (0..p).collect();
        rows.shuffle(&mut row_rng(cfg.seed, PERMUTATION_STREAM, 0));
        let mut chosen = rows[..p.div_ceil(2)].to_vec();
        chosen.sort_unstable();
        chosen.iter().for_each(|&r| is_gaussian[r] = true);
        chosen
    });
    let fill = |matrix: u64| {
        let mut z = DMatrix::zeros(p, n);
        for i in 0..p {
            let mut rng = row_rng(cfg.seed, matrix, i);
            for j in 0..n {
                z[(i, j)] = draw(&mut rng, is_gaussian[i], cfg.entry_dist);
            }
        }
        z
    };
    let z1 = fill(0);
    let z2 = fill(1);
    Ok(Ensemble { z1, z2, sigma_half: cfg.sigma.sqrt_diagonal(p), gaussian_rows })
}

/// `S∓` from the factors. The result is exactly skew-symmetric (minus) or
/// exactly symmetric (plus).
pub fn assemble(kernel: KernelTag, z1: &DMatrix<f64>, z2: &DMatrix<f64>, sigma_half: &DVector<f64>) -> Result<DMatrix<f64>> {
    let (p, n) = z1.shape();
    if z2.shape() != (p, n) || sigma_half.len() != p {
        return Err(LsdError::Shape(format!(
            "Z1 is {p}x{n}, Z2 is {}x{}, Sigma^(1/2) has length {}",
            z2.nrows(),
            z2.ncols(),
            sigma_half.len()
        )));
    }
    if n == 0 {
        return Err(LsdError::Shape("n must be positive".into()));
    }
    let x1 = DMatrix::from_fn(p, n, |i, j| sigma_half[i] * z1[(i, j)]);
    let x2 = DMatrix::from_fn(p, n, |i, j| sigma_half[i] * z2[(i, j)]);
    let mut a = &x1 * x2.transpose();
    a /= n as f64;
    let mut s = DMatrix::zeros(p, p);
    for j in 0..p {
        for i in 0..p {
            s[(i, j)] = match kernel {
                KernelTag::Skew => a[(i, j)] - a[(j, i)],
                KernelTag::Hermitian => a[(i, j)] + a[(j, i)],
            };
        }
    }
    Ok(s)
}

pub fn assemble_ensemble(kernel: KernelTag, ens: &Ensemble) -> Result<DMatrix<f64>> {
    assemble(kernel, &ens.z1, &ens.z2, &ens.sigma_half)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenPath {
    /// Complex Hermitian solve on `−iS` (skew) or on `S` (plus).
    Canonical,
    /// Real arithmetic throughout.
    #[default]
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsdSample {
    /// Ascending; imaginary parts of the eigenvalues for `S⁻`.
    pub coords: Vec<f64>,
    pub p: usize,
    pub n: usize,
    pub c_n: f64,
    pub kernel: KernelTag,
    pub fingerprint: String,
    pub entry_dist: Option<EntryDist>,
    pub seed: Option<u64>,
}

impl EsdSample {
    pub fn new(mut coords: Vec<f64>, n: usize, kernel: KernelTag) -> Result<Self> {
        if coords.is_empty() || n == 0 {
            return Err(LsdError::Shape("a sample needs p >= 1 coordinates and n >= 1".into()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(LsdError::Domain("sample coordinates must be finite".into()));
        }
        coords.sort_by(|a, b| a.total_cmp(b));
        let p = coords.len();
        Ok(Self {
            coords,
            p,
            n,
            c_n: p as f64 / n as f64,
            kernel,
            fingerprint: String::new(),
            entry_dist: None,
            seed: None,
        })
    }
}

/// Spectrum of `S` in the coordinates matching `kernel`.
pub fn eigenvalues(s: &DMatrix<f64>, kernel: KernelTag, n: usize, path: EigenPath) -> Result<EsdSample> {
    let coords = match (kernel, path) {
        (KernelTag::Skew, EigenPath::Real) => eigen::skew_spectrum(s)?,
        (KernelTag::Skew, EigenPath::Canonical) => eigen::hermitian_eigen(&eigen::skew_to_hermitian(s), false)?.values,
        (KernelTag::Hermitian, EigenPath::Real) => eigen::hermitian_eigen(s, false)?.values,
        (KernelTag::Hermitian, EigenPath::Canonical) => {
            eigen::hermitian_eigen(&s.map(|v| num_complex::Complex64::new(v, 0.0)), false)?.values
        }
    };
    let mut sample = EsdSample::new(coords, n, kernel)?;
    sample.fingerprint = eigen::fingerprint(s);
    Ok(sample)
}

/// Sample, assemble and diagonalize one replicate.
pub fn simulate(cfg: &EnsembleConfig, path: EigenPath) -> Result<EsdSample> {
    let ens = sample_ensemble(cfg)?;
    let s = assemble_ensemble(cfg.kernel, &ens)?;
    let mut sample = eigenvalues(&s, cfg.kernel, cfg.n, path)?;
    sample.entry_dist = Some(cfg.entry_dist);
    sample.seed = Some(cfg.seed);
    Ok(sample)
}

/// Replicates `0..count`, in parallel when available.
pub fn simulate_replicates(cfg: &EnsembleConfig, count: usize, path: EigenPath) -> Result<Vec<EsdSample>> {
    let run = |r: usize| simulate(&cfg.replicate(r as u64), path);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(run).collect()
    }
}

pub fn esd_cdf(sample: &EsdSample) -> Result<StepCdf> {
    StepCdf::from_samples(&sample.coords)
}
