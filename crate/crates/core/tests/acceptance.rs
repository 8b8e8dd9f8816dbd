//! Acceptance suite. Each criterion prints one PASS/FAIL line with its
//! measured values and runtime; the process exits non-zero if any fails.

use std::time::{Duration, Instant};

use commutator_lsd::identity::{self, CardanoCoefficients, ROOT_SELECTION_EPS};
use commutator_lsd::kernels::KernelTag;
use commutator_lsd::measures::{
    invert_point_mass, ks_and_levy, Atom, HalfPlanePoint, InversionConfig, LsdCurve, SpectralMeasure, StepCdf,
};
use commutator_lsd::simulate::eigen::{frobenius, hermitian_eigen, max_residual};
use commutator_lsd::simulate::{simulate, simulate_replicates, EigenPath, EnsembleConfig, EntryDist};
use commutator_lsd::solver::{
    continuous_mass_numeric, lsd_curve, solve_h, stieltjes_general, CurveConfig, FixedPointConfig, GridSpec,
};
use commutator_lsd::stats::compare;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

const RATIOS: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 5.0];

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn identity_spectrum() -> SpectralMeasure {
    SpectralMeasure::point(1.0).unwrap()
}

/// `|x| ≤ U − m` below `c = 2`, `L + m ≤ |x| ≤ U − m` from `c = 2` on, with
/// `m = 0.05·U`.
fn interior(x: f64, c: f64, spec: &identity::SupportSpec) -> bool {
    let m = 0.05 * spec.upper;
    let a = x.abs();
    a <= spec.upper - m && (c < 2.0 || a >= spec.lower + m)
}

fn cardano_coefficients() -> Outcome {
    let k = CardanoCoefficients::new(2.0).map_err(|e| e.to_string())?;
    let exact = k.q0 == 1.0 / 12.0 && k.q2 == 0.0 && k.r1 == -1.0 / 8.0 && k.r3 == 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c = 0.05 + rng.random::<f64>() * 9.95;
        let k = CardanoCoefficients::new(c).map_err(|e| e.to_string())?;
        let want = ((4.0 * c + 1.0) / (9.0 * c.powi(4))).powi(3);
        worst = worst.max((k.discriminant() - want).abs() / want);
    }
    Ok((exact && worst <= 1e-12, format!("c=2 exact: {exact}; max relative discriminant error {worst:.2e}")))
}

fn root_residuals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut ambiguous = 0;
    for _ in 0..10_000 {
        let u = log_uniform(&mut rng, 1e-4, 5.0);
        let v = -15.0 + 30.0 * rng.random::<f64>();
        let c = log_uniform(&mut rng, 0.05, 10.0);
        let z = HalfPlanePoint::left(-u, v).unwrap();
        let roots = identity::cardano_roots(z.value(), c).map_err(|e| e.to_string())?;
        if roots.iter().filter(|m| m.re > ROOT_SELECTION_EPS).count() != 1 {
            ambiguous += 1;
            continue;
        }
        let m = identity::select_stieltjes_root(&roots, z).map_err(|e| e.to_string())?;
        worst = worst.max(identity::cubic_residual(z.value(), c, m) / (1.0 + z.value().norm()));
    }
    Ok((
        worst <= 1e-10 && ambiguous == 0,
        format!("max residual/(1+|z|) {worst:.2e}; points without a unique root {ambiguous}"),
    ))
}

fn closed_form_vs_solver() -> Outcome {
    let h = identity_spectrum();
    let cfg = FixedPointConfig::default();
    let mut worst_h: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for c in RATIOS {
        let spec = identity::support(c).map_err(|e| e.to_string())?;
        for i in 0..20 {
            let v = -1.5 * spec.upper + 3.0 * spec.upper * i as f64 / 19.0;
            for j in 0..10 {
                let u = 10f64.powf(-3.0 + 4.0 * j as f64 / 9.0);
                let z = HalfPlanePoint::left(-u, v).unwrap();
                let exact = identity::stieltjes(z, c).map_err(|e| e.to_string())?;
                let numeric = solve_h(z, c, &h, KernelTag::Skew, &cfg).map_err(|e| e.to_string())?.h;
                worst_h = worst_h.max((exact - numeric).norm());
            }
        }
        let curve = lsd_curve(c, &h, KernelTag::Skew, &GridSpec::default(), &CurveConfig::default())
            .map_err(|e| e.to_string())?;
        for (x, f) in curve.grid.iter().zip(&curve.density) {
            if interior(*x, c, &spec) {
                worst_f = worst_f.max((f - identity::density(*x, c).unwrap()).abs());
            }
        }
    }
    Ok((
        worst_h <= 1e-8 && worst_f <= 1e-4,
        format!("max |root − h| {worst_h:.2e} over 1000 points; interior density L∞ {worst_f:.2e}"),
    ))
}

fn density_at_zero() -> Outcome {
    let mut worst_closed: f64 = 0.0;
    let mut worst_numeric: f64 = 0.0;
    for c in [0.5_f64, 1.0, 1.5] {
        let want = 1.0 / (std::f64::consts::PI * (2.0 * c - c * c).sqrt());
        worst_closed = worst_closed.max((identity::density(0.0, c).unwrap() - want).abs());
        let grid = GridSpec { points: 401, half_width: None };
        let curve = lsd_curve(c, &identity_spectrum(), KernelTag::Skew, &grid, &CurveConfig::default())
            .map_err(|e| e.to_string())?;
        worst_numeric = worst_numeric.max((curve.density[200] - want).abs());
    }
    Ok((
        worst_closed <= 1e-6 && worst_numeric <= 1e-4,
        format!("closed form error {worst_closed:.2e}; numeric inversion error {worst_numeric:.2e}"),
    ))
}

fn normalization() -> Outcome {
    let mut worst_closed: f64 = 0.0;
    let mut worst_numeric: f64 = 0.0;
    let mut worst_quadrature: f64 = 0.0;
    let h = identity_spectrum();
    let cfg = CurveConfig::default();
    for c in RATIOS {
        let spec = identity::support(c).map_err(|e| e.to_string())?;
        let mass = identity::continuous_mass(-spec.upper, spec.upper, c, 1e-12).map_err(|e| e.to_string())?;
        worst_closed = worst_closed.max((mass + spec.point_mass_zero - 1.0).abs());
        let curve = lsd_curve(c, &h, KernelTag::Skew, &GridSpec::default(), &cfg).map_err(|e| e.to_string())?;
        worst_numeric = worst_numeric.max(curve.normalization_error());
        let w = *curve.grid.last().unwrap();
        let q = continuous_mass_numeric(c, &h, KernelTag::Skew, -w, w, curve.point_mass_zero, &cfg)
            .map_err(|e| e.to_string())?;
        worst_quadrature = worst_quadrature.max((q.value + curve.point_mass_zero - 1.0).abs());
    }
    Ok((
        worst_closed <= 1e-6 && worst_numeric <= 1e-3,
        format!(
            "closed form {worst_closed:.2e}; numeric curve trapezoid {worst_numeric:.2e} \
             (adaptive quadrature of the inversion {worst_quadrature:.2e})"
        ),
    ))
}

fn point_mass_law() -> Outcome {
    let beta = 0.7;
    let h = SpectralMeasure::new(vec![Atom { location: 1.0, weight: beta }], 1.0 - beta).unwrap();
    let solver = FixedPointConfig::default();
    let inv = InversionConfig::default();
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for c in [0.5, 1.0, 2.0, 3.0, 4.0, 6.0] {
        let want = if c < 2.0 / beta { 1.0 - beta } else { 1.0 - 2.0 / c };
        let s_fn = |z: Complex64| stieltjes_general(z, c, &h, KernelTag::Skew, &solver);
        let est = invert_point_mass(s_fn, KernelTag::Skew, 0.0, &inv).map_err(|e| e.to_string())?;
        worst = worst.max((est.value - want).abs());
        details.push(format!("{c}:{:.4}", est.value));
    }
    let z = HalfPlanePoint::left(-1e-4, 0.0).unwrap();
    let h0 = solve_h(z, 1.0, &identity_spectrum(), KernelTag::Skew, &solver).map_err(|e| e.to_string())?.h;
    let h_err = (h0 - 1.0).norm();
    Ok((
        worst <= 1e-3 && h_err <= 1e-2,
        format!("max atom error {worst:.2e} [{}]; |h(−1e−4) − 1| {h_err:.2e}", details.join(" ")),
    ))
}

fn symmetry() -> Outcome {
    let h = SpectralMeasure::parse("zero_mass 0.2\n0.5 0.3\n2 0.5\n").unwrap();
    let mut worst: f64 = 0.0;
    for kernel in [KernelTag::Skew, KernelTag::Hermitian] {
        for c in [0.7, 2.0, 4.0] {
            let u = identity::support(c).unwrap().upper;
            let closed = identity::closed_form_curve(c, kernel, &LsdCurve::symmetric_grid(1.2 * u, 1001))
                .map_err(|e| e.to_string())?;
            worst = worst.max(closed.symmetry_error());
        }
        let numeric = lsd_curve(1.5, &h, kernel, &GridSpec { points: 601, half_width: None }, &CurveConfig::default())
            .map_err(|e| e.to_string())?;
        worst = worst.max(numeric.symmetry_error());
    }
    Ok((worst <= 1e-10, format!("max |f(−x) − f(x)| {worst:.2e}")))
}

fn monte_carlo_identity() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for kernel in [KernelTag::Skew, KernelTag::Hermitian] {
        let u = identity::support(1.0).unwrap().upper;
        let curve = identity::closed_form_curve(1.0, kernel, &LsdCurve::symmetric_grid(1.1 * u, 4001))
            .map_err(|e| e.to_string())?;
        let cfg = EnsembleConfig::new(2000, 2000, EntryDist::Mixed, kernel, 20_240_601);
        let samples = simulate_replicates(&cfg, 5, EigenPath::Real).map_err(|e| e.to_string())?;
        let mut ks: Vec<f64> = samples
            .iter()
            .map(|s| compare(s, &curve, 50, None).map(|r| r.ks))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ks.sort_by(|a, b| a.total_cmp(b));
        let median = ks[2];
        ok &= ks[4] <= 0.04 && median <= 0.025;
        details.push(format!(
            "{kernel}: ks [{}] median {median:.4}",
            ks.iter().map(|k| format!("{k:.4}")).collect::<Vec<_>>().join(", ")
        ));
    }
    Ok((ok, details.join("; ")))
}

fn monte_carlo_point_mass() -> Outcome {
    let u = identity::support(4.0).unwrap().upper;
    let curve = identity::closed_form_curve(4.0, KernelTag::Skew, &LsdCurve::symmetric_grid(1.1 * u, 4001))
        .map_err(|e| e.to_string())?;
    let cfg = EnsembleConfig::new(2000, 500, EntryDist::Mixed, KernelTag::Skew, 4);
    let sample = simulate(&cfg, EigenPath::Real).map_err(|e| e.to_string())?;
    let r = compare(&sample, &curve, 50, Some(1e-2 * u)).map_err(|e| e.to_string())?;
    Ok((
        (r.point_mass_est - 0.5).abs() <= 0.03 && r.support_violation_frac <= 0.01,
        format!(
            "mass near zero {:.4} (want 0.5); support violations {:.4}; ks {:.4}",
            r.point_mass_est, r.support_violation_frac, r.ks
        ),
    ))
}

fn eigensolver_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for k in 1..=50usize {
        let p = 10 * k;
        let h = if k % 2 == 0 {
            let a = DMatrix::from_fn(p, p, |_, _| Complex64::new(rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal)));
            (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
        } else {
            let a = DMatrix::from_fn(p, p, |_, _| rng.random::<f64>() - 0.5);
            let a = (&a + a.transpose()) * 0.5;
            a.map(|v| Complex64::new(v, 0.0))
        };
        let eig = hermitian_eigen(&h, true).map_err(|e| e.to_string())?;
        worst = worst.max(max_residual(&h, &eig).unwrap() / frobenius(&h));
    }
    let mut pairing: f64 = 0.0;
    for (i, p) in [50usize, 199, 500].into_iter().enumerate() {
        let cfg = EnsembleConfig::new(p, p / 2 + 3, EntryDist::Mixed, KernelTag::Skew, 100 + i as u64);
        let s = simulate(&cfg, EigenPath::Real).map_err(|e| e.to_string())?;
        for j in 0..p {
            pairing = pairing.max((s.coords[j] + s.coords[p - 1 - j]).abs());
        }
    }
    Ok((
        worst <= 1e-9 && pairing <= 1e-8,
        format!("max residual/‖H‖_F {worst:.2e}; skew pairing defect {pairing:.2e}"),
    ))
}

fn levy_below_ks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0;
    let mut max_gap = f64::MIN;
    let step = |rng: &mut ChaCha8Rng| {
        let k = rng.random_range(1..40);
        let pts: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        StepCdf::from_samples(&pts).unwrap()
    };
    for _ in 0..1000 {
        let f = step(&mut rng);
        let g = step(&mut rng);
        let (ks, levy) = ks_and_levy(&f, &g);
        if levy > ks {
            violations += 1;
        }
        max_gap = max_gap.max(levy - ks);
    }
    Ok((violations == 0, format!("violations {violations}; max levy − ks {max_gap:.2e}")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("cardano coefficients and discriminant", cardano_coefficients, Duration::from_secs(1)),
        ("cubic root residual and uniqueness", root_residuals, Duration::from_secs(5)),
        ("closed form vs fixed-point solver", closed_form_vs_solver, Duration::from_secs(30)),
        ("density at zero", density_at_zero, Duration::from_secs(10)),
        ("normalization", normalization, Duration::from_secs(30)),
        ("point mass law", point_mass_law, Duration::from_secs(10)),
        ("density symmetry", symmetry, Duration::from_secs(5)),
        ("monte carlo identity covariance", monte_carlo_identity, Duration::from_secs(300)),
        ("monte carlo point mass", monte_carlo_point_mass, Duration::from_secs(120)),
        ("eigensolver contract", eigensolver_contract, Duration::from_secs(60)),
        ("levy below ks", levy_below_ks, Duration::from_secs(5)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && elapsed <= *limit, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.2}s, limit {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
