//! `clsd`: curves, simulations and comparisons from the command line.
//!
//! Exit codes: 0 ok, 2 usage or input error, 3 degenerate spectrum,
//! 4 solver or eigensolver failure, 5 `--fail-above` threshold exceeded.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use commutator_lsd::identity::{self, closed_form_curve};
use commutator_lsd::io::{self, Format};
use commutator_lsd::measures::InversionConfig;
use commutator_lsd::simulate::{self, EigenPath, EnsembleConfig, EntryDist, SigmaSpec};
use commutator_lsd::solver::{self, CurveConfig, FixedPointConfig, GridSpec};
use commutator_lsd::stats;
use commutator_lsd::{KernelTag, LsdCurve, LsdError};

use manifest::Manifest;

#[derive(Debug, Parser)]
#[command(name = "clsd", version, about = "Limiting spectra of random commutators and anticommutators")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct Global {
    /// Output directory, created if missing [default: out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    format: Format,
    /// Worker threads for grid sweeps and replicates.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

impl Global {
    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form curve for identity covariance.
    LsdIdentity(IdentityArgs),
    /// Numeric curve for a covariance spectrum read from a file.
    LsdGeneral(GeneralArgs),
    /// Monte Carlo spectra, one file per replicate.
    Simulate(SimulateArgs),
    /// Distances between simulated spectra and a curve.
    Compare(CompareArgs),
    /// Mass of the atom at zero for zero-weight `beta` and ratio `c`.
    Pointmass(PointmassArgs),
    /// Repeat the run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct IdentityArgs {
    #[arg(long)]
    c: f64,
    #[arg(long, default_value = "minus", value_parser = parse_kernel)]
    kernel: KernelTag,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    /// Grid covers `[-w, w]`; defaults to 1.2 times the upper support edge.
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long, default_value = "curve")]
    name: String,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
    /// Disable the Newton fallback.
    #[arg(long)]
    no_newton: bool,
    /// Distances to the axis used for inversion, comma separated.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Extrapolation order in the distance to the axis.
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct GeneralArgs {
    #[arg(long)]
    c: f64,
    /// Spectrum file: `location weight` per line, optional `zero_mass v` header.
    #[arg(long)]
    spectrum: PathBuf,
    #[arg(long, default_value = "minus", value_parser = parse_kernel)]
    kernel: KernelTag,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    /// Grid covers `[-w, w]`; bracketed automatically when absent.
    #[arg(long)]
    half_width: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value = "curve")]
    name: String,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
enum PathArg {
    Real,
    Canonical,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct SimulateArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "gaussian", value_parser = parse_entry_dist)]
    entry_dist: EntryDist,
    /// `identity` or a spectrum file.
    #[arg(long, default_value = "identity")]
    sigma: String,
    #[arg(long, default_value = "minus", value_parser = parse_kernel)]
    kernel: KernelTag,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, value_enum, default_value = "real")]
    path: PathArg,
    #[arg(long, default_value = "sample")]
    name: String,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct CompareArgs {
    /// Sample files written by `simulate`.
    #[arg(long, num_args = 1.., required = true)]
    samples: Vec<PathBuf>,
    #[arg(long)]
    curve: PathBuf,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Half-width of the strip around zero treated as the atom.
    #[arg(long)]
    atom_window: Option<f64>,
    /// Exit with code 5 when any KS distance exceeds this.
    #[arg(long)]
    fail_above: Option<f64>,
    #[arg(long, default_value = "compare")]
    name: String,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct PointmassArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    c: f64,
}

#[derive(Debug, Clone, Args)]
struct RerunArgs {
    manifest: PathBuf,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: LsdError| e.to_string())
}

fn parse_kernel(s: &str) -> Result<KernelTag, String> {
    s.parse().map_err(|e: LsdError| e.to_string())
}

fn parse_entry_dist(s: &str) -> Result<EntryDist, String> {
    s.parse().map_err(|e: LsdError| e.to_string())
}

enum Failure {
    Lsd(LsdError),
    Usage(String),
    Threshold(String),
}

impl From<LsdError> for Failure {
    fn from(e: LsdError) -> Self {
        Failure::Lsd(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Threshold(_) => 5,
            Failure::Lsd(e) => match e {
                LsdError::DegenerateSpectrum => 3,
                LsdError::NoConvergence { .. }
                | LsdError::GridFailure { .. }
                | LsdError::RootSelectionAmbiguity { .. }
                | LsdError::EigenNoConvergence { .. } => 4,
                _ => 2,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lsd(LsdError::DegenerateSpectrum) => "degenerate: LSD is δ0".into(),
            Failure::Lsd(e) => e.to_string(),
            Failure::Usage(m) | Failure::Threshold(m) => m.clone(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("clsd: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli, argv: Vec<String>) -> Outcome {
    if let Command::Rerun(r) = &cli.command {
        return rerun(&r.manifest, &cli.global);
    }
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let g = &cli.global;
    let out = g.out_dir();
    let mut m = Manifest::new(argv, g.seed, g.format, g.threads);
    match &cli.command {
        Command::LsdIdentity(a) => lsd_identity(a, g, &mut m)?,
        Command::LsdGeneral(a) => lsd_general(a, g, &mut m)?,
        Command::Simulate(a) => simulate_cmd(a, g, &mut m)?,
        Command::Compare(a) => {
            let threshold = compare_cmd(a, g, &mut m)?;
            m.save(&out)?;
            return threshold;
        }
        Command::Pointmass(a) => {
            let v = solver::point_mass_zero_analytic(a.beta, a.c)?;
            println!("{v}");
            m.record("pointmass", a);
            m.result = Some(serde_json::json!({ "point_mass_zero": v }));
            ensure_dir(&out)?;
        }
        Command::Rerun(_) => unreachable!(),
    }
    m.save(&out)?;
    Ok(())
}

/// Replays the recorded argv, writing into `--out` when given explicitly.
fn rerun(path: &Path, g: &Global) -> Outcome {
    let m = Manifest::load(path)?;
    let mut cli = Cli::try_parse_from(&m.argv).map_err(|e| Failure::Usage(format!("manifest argv: {e}")))?;
    if matches!(cli.command, Command::Rerun(_)) {
        return Err(Failure::Usage("a manifest cannot record a rerun".into()));
    }
    let mut argv = m.argv.clone();
    if let Some(out) = &g.out {
        cli.global.out = Some(out.clone());
        retarget_out(&mut argv, out);
    }
    run(cli, argv)
}

fn retarget_out(argv: &mut Vec<String>, out: &Path) {
    let out = out.to_string_lossy().into_owned();
    if let Some(i) = argv.iter().position(|a| a == "--out") {
        if i + 1 < argv.len() {
            argv[i + 1] = out;
            return;
        }
    }
    argv.retain(|a| !a.starts_with("--out="));
    argv.push(format!("--out={out}"));
}

fn ensure_dir(dir: &Path) -> Result<(), LsdError> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn check_points(points: usize) -> Outcome {
    if points < 2 {
        return Err(Failure::Usage(format!("--points must be at least 2, got {points}")));
    }
    Ok(())
}

fn report_curve(curve: &LsdCurve) {
    println!(
        "c = {}  kernel = {}  support = [{}, {}]  point_mass_zero = {}  normalization_error = {:.3e}",
        curve.c,
        curve.kernel,
        curve.support.0,
        curve.support.1,
        curve.point_mass_zero,
        curve.normalization_error()
    );
}

fn lsd_identity(a: &IdentityArgs, g: &Global, m: &mut Manifest) -> Outcome {
    check_points(a.points)?;
    let spec = identity::support(a.c)?;
    let w = a.half_width.unwrap_or(1.2 * spec.upper);
    if !(w > 0.0) || !w.is_finite() {
        return Err(Failure::Usage(format!("--half-width must be positive, got {w}")));
    }
    let curve = closed_form_curve(a.c, a.kernel, &LsdCurve::symmetric_grid(w, a.points))?;
    ensure_dir(&g.out_dir())?;
    let files = io::write_curve(&curve, &g.out_dir().join(&a.name), g.format)?;
    report_curve(&curve);
    m.record("lsd-identity", a);
    m.artifacts.extend(files);
    Ok(())
}

fn curve_config(s: &SolverArgs) -> CurveConfig {
    let mut inversion = match &s.eps {
        Some(eps) => InversionConfig::with_schedule(eps.clone()),
        None => InversionConfig::default(),
    };
    if let Some(order) = s.order {
        inversion.order = order;
    }
    CurveConfig {
        solver: FixedPointConfig {
            tol: s.tol,
            max_iter: s.max_iter,
            damping: s.damping,
            newton_fallback: !s.no_newton,
            initial_h: None,
        },
        inversion,
        ..CurveConfig::default()
    }
}

fn lsd_general(a: &GeneralArgs, g: &Global, m: &mut Manifest) -> Outcome {
    check_points(a.points)?;
    let measure = io::read_measure(&a.spectrum)?;
    let grid = GridSpec { points: a.points, half_width: a.half_width };
    let curve = solver::lsd_curve(a.c, &measure, a.kernel, &grid, &curve_config(&a.solver))?;
    ensure_dir(&g.out_dir())?;
    let files = io::write_curve(&curve, &g.out_dir().join(&a.name), g.format)?;
    report_curve(&curve);
    m.record("lsd-general", a);
    m.inputs.push(a.spectrum.clone());
    m.artifacts.extend(files);
    Ok(())
}

fn simulate_cmd(a: &SimulateArgs, g: &Global, m: &mut Manifest) -> Outcome {
    if a.replicates == 0 {
        return Err(Failure::Usage("--replicates must be at least 1".into()));
    }
    let sigma = if a.sigma == "identity" {
        SigmaSpec::Identity
    } else {
        m.inputs.push(PathBuf::from(&a.sigma));
        SigmaSpec::Measure(io::read_measure(Path::new(&a.sigma))?)
    };
    let mut cfg = EnsembleConfig::new(a.p, a.n, a.entry_dist, a.kernel, g.seed);
    cfg.sigma = sigma;
    cfg.validate()?;
    let path = match a.path {
        PathArg::Real => EigenPath::Real,
        PathArg::Canonical => EigenPath::Canonical,
    };
    let samples = simulate::simulate_replicates(&cfg, a.replicates, path)?;
    ensure_dir(&g.out_dir())?;
    for (r, s) in samples.iter().enumerate() {
        let files = io::write_sample(s, &g.out_dir().join(format!("{}_r{r:03}", a.name)), g.format)?;
        m.artifacts.extend(files);
        m.replicate_seeds.push(s.seed.unwrap_or(g.seed));
    }
    println!("wrote {} replicate(s) of p = {}, n = {}", samples.len(), a.p, a.n);
    m.record("simulate", a);
    Ok(())
}

/// Returns the threshold outcome separately so that reports and the
/// manifest are written before exiting with code 5.
fn compare_cmd(a: &CompareArgs, g: &Global, m: &mut Manifest) -> Result<Outcome, Failure> {
    let curve = io::read_curve(&a.curve)?;
    m.inputs.push(a.curve.clone());
    let mut reports = Vec::with_capacity(a.samples.len());
    ensure_dir(&g.out_dir())?;
    for path in &a.samples {
        let sample = io::read_sample(path)?;
        let report = stats::compare(&sample, &curve, a.bins, a.atom_window)?;
        let stem = io::strip_ext(path);
        let base = stem.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let out = g.out_dir().join(format!("{base}_report.json"));
        io::write_report(&report, &out)?;
        println!(
            "{base}: ks = {:.5}  levy = {:.5}  l1 = {:.5}  point_mass = {:.4}  outside = {:.4}",
            report.ks, report.levy, report.l1_hist, report.point_mass_est, report.support_violation_frac
        );
        m.inputs.push(path.clone());
        m.artifacts.push(out);
        reports.push(report);
    }
    let csv = g.out_dir().join(format!("{}_aggregate.csv", a.name));
    io::write_aggregate_csv(&reports, &csv)?;
    m.artifacts.push(csv);
    if let Some(med) = stats::aggregate(&reports) {
        let summary = g.out_dir().join(format!("{}_summary.json", a.name));
        io::write_report(&med, &summary)?;
        m.artifacts.push(summary);
    }
    m.record("compare", a);
    if let Some(t) = a.fail_above {
        let worst = reports.iter().map(|r| r.ks).fold(0.0_f64, f64::max);
        if worst > t {
            return Ok(Err(Failure::Threshold(format!("ks {worst:.5} exceeds --fail-above {t}"))));
        }
    }
    Ok(Ok(()))
}
