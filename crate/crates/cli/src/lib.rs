//! Experiment driver: argument types, subcommand runners and run manifests.

pub mod manifest;
mod report;

use std::f64::consts::TAU;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use tdbie::charfun::{default_truncation, CircleModes, DiscreteCircle, ModeFamily, SeriesControl};
use tdbie::geometry::{build_mesh, CustomCurve, Shape};
use tdbie::marching::{assemble_mot_with, march, Formulation, IncidentWave, KernelStore, Materials, SolutionHistory};
use tdbie::reference::{synthesise, PulseOptions, ReferenceProblem, SpectralPulse};
use tdbie::ssm::{default_region, scan_strip, Rect, RootSet, ScanConfig};

pub use manifest::RunManifest;
pub use report::stability_table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] tdbie::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Clap(#[from] clap::Error),
}

impl CliError {
    /// Exit status: 2 for usage errors, 1 otherwise.
    pub fn status(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Clap(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "tdbie", version, about = "Stability experiments for time-domain boundary integral equations")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// March a formulation in time and classify the history
    Solve(SolveArgs),
    /// Scan the characteristic roots of the circle mode problems
    Roots(RootsArgs),
    /// Scan the characteristic roots of the discretised circle operator
    RootsDiscrete(DiscreteArgs),
    /// Closed-form reference history on the unit circle
    Reference(ReferenceArgs),
    /// Relative L2 differences between two history CSVs
    Compare(CompareArgs),
    /// Markdown stability table from the manifests in a directory
    Report(ReportArgs),
    /// Re-run the command recorded in a manifest
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// out1, out2, out2_5, out3, out4, pmchwt, mueller, bm, standard or a `_mod` variant
    #[arg(long, short = 'f')]
    pub formulation: String,
    /// coupling of out4
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = TAU / 100.0)]
    pub dt: f64,
    #[arg(long)]
    pub s1: Option<f64>,
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long)]
    pub s2: Option<f64>,
    #[arg(long)]
    pub rho2: Option<f64>,
}

impl ProblemArgs {
    pub fn formulation(&self) -> Result<Formulation> {
        let f: Formulation = self.formulation.parse().map_err(|e: tdbie::Error| CliError::Usage(e.to_string()))?;
        match (f, self.alpha) {
            (Formulation::Out4 { .. }, Some(alpha)) => Ok(Formulation::Out4 { alpha }),
            (_, Some(_)) => Err(CliError::Usage("--alpha only applies to out4".into())),
            (f, None) => Ok(f),
        }
    }

    /// Unit medium for Dirichlet problems, the default pair for transmission; flags override.
    pub fn materials(&self, f: Formulation) -> Result<Materials> {
        let base = if f.is_transmission() {
            Materials::default_transmission()
        } else {
            if self.s2.is_some() || self.rho2.is_some() {
                return Err(CliError::Usage(format!("{f} has no interior medium; drop --s2/--rho2")));
            }
            Materials::unit()
        };
        Ok(Materials::new(
            self.s1.unwrap_or(base.s[0]),
            self.rho1.unwrap_or(base.rho[0]),
            self.s2.unwrap_or(base.s[1]),
            self.rho2.unwrap_or(base.rho[1]),
        )?)
    }

    fn check(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CliError::Usage(format!("--dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args)]
pub struct MeshArgs {
    /// circle, star, kite or a CSV file with columns theta,x,y
    #[arg(long, default_value = "circle")]
    pub shape: String,
    /// number of boundary elements
    #[arg(long, short = 'n', default_value_t = 100)]
    pub n: usize,
}

impl MeshArgs {
    pub fn shape(&self) -> Result<Shape> {
        Ok(match self.shape.as_str() {
            "circle" => Shape::unit_circle(),
            "star" => Shape::Star,
            "kite" => Shape::Kite,
            path => Shape::Custom(CustomCurve::from_csv_path(Path::new(path))?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum WaveKind {
    Quadratic,
    SmoothedLinear,
}

#[derive(Debug, Clone, Args)]
pub struct WaveArgs {
    #[arg(long, value_enum, default_value = "quadratic")]
    pub wave: WaveKind,
    /// arrival delay; `1 + 2 dt` by default
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
}

impl WaveArgs {
    pub fn wave(&self, c1: f64, dt: f64) -> IncidentWave {
        let mut w = match self.wave {
            WaveKind::Quadratic => IncidentWave::quadratic(c1, dt),
            WaveKind::SmoothedLinear => IncidentWave::smoothed_linear(c1, dt),
        };
        if let Some(t) = self.t0 {
            match &mut w {
                IncidentWave::Quadratic { t0, .. } | IncidentWave::SmoothedLinear { t0, .. } => *t0 = t,
                IncidentWave::Zero => {}
            }
        }
        w
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// output directory, created if missing
    #[arg(long, short = 'o', default_value = ".")]
    pub out: PathBuf,
    /// file name stem; derived from the run by default
    #[arg(long)]
    pub stem: Option<String>,
}

impl OutputArgs {
    fn paths(&self, default_stem: &str, ext: &str) -> Result<(PathBuf, PathBuf, String)> {
        std::fs::create_dir_all(&self.out)?;
        let stem = self.stem.clone().unwrap_or_else(|| default_stem.to_string());
        let data = format!("{stem}.{ext}");
        Ok((self.out.join(&data), self.out.join(format!("{stem}.manifest.json")), data))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    /// `re0,re1,im0,im1`; `[0, pi/dt] x [-2, 2]` by default
    #[arg(long)]
    pub region: Option<String>,
    /// tiles as `NXxNY`
    #[arg(long, default_value = "10x4")]
    pub grid: String,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    /// lattice-sum terms
    #[arg(long, default_value_t = 100)]
    pub terms: usize,
    /// probe seed of the eigensolver
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ScanArgs {
    pub fn region(&self, dt: f64) -> Result<Rect> {
        let Some(text) = &self.region else {
            return Ok(default_region(dt));
        };
        let v: Vec<f64> = text
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| CliError::Usage(format!("--region needs four numbers, got `{text}`")))?;
        match v[..] {
            [re0, re1, im0, im1] if re0 < re1 && im0 < im1 => Ok(Rect { re0, re1, im0, im1 }),
            _ => Err(CliError::Usage(format!("--region needs re0 < re1 and im0 < im1, got `{text}`"))),
        }
    }

    pub fn config(&self) -> Result<ScanConfig> {
        let grid = self
            .grid
            .split_once('x')
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
            .filter(|(a, b): &(usize, usize)| *a > 0 && *b > 0)
            .ok_or_else(|| CliError::Usage(format!("--grid needs `NXxNY`, got `{}`", self.grid)))?;
        let mut cfg = ScanConfig {
            grid,
            max_depth: self.depth,
            ..Default::default()
        };
        cfg.ssm.nodes = self.nodes;
        if let Some(seed) = self.seed {
            cfg.ssm.seed = seed;
        }
        cfg.ssm.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[command(flatten)]
    pub wave: WaveArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RootsArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// highest Fourier mode
    #[arg(long, default_value_t = 60)]
    pub n_max: usize,
    #[command(flatten)]
    pub scan: ScanArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DiscreteArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// number of boundary elements
    #[arg(long, short = 'n', default_value_t = 100)]
    pub n: usize,
    /// Fourier truncation; `10 N + N / 2` by default
    #[arg(long)]
    pub truncation: Option<usize>,
    #[command(flatten)]
    pub scan: ScanArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReferenceArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, short = 'n', default_value_t = 100)]
    pub n: usize,
    #[command(flatten)]
    pub wave: WaveArgs,
    /// FFT window as a multiple of the run
    #[arg(long, default_value_t = 4)]
    pub padding: usize,
    #[arg(long, default_value_t = 2)]
    pub oversample: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// history CSV under test
    pub history: PathBuf,
    /// reference history CSV
    pub reference: PathBuf,
    #[arg(long, default_value_t = TAU / 100.0)]
    pub dt: f64,
    /// first step of the window
    #[arg(long, default_value_t = 200)]
    pub from: usize,
    /// last step of the window
    #[arg(long, default_value_t = 900)]
    pub to: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// directory scanned for `*.manifest.json`
    #[arg(default_value = ".")]
    pub inputs: PathBuf,
    /// write the table here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// write the outputs here instead of the recorded directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the command. Returns the lines
/// printed to stdout.
pub fn run_from<I, T>(argv: I) -> Result<Vec<String>>
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&argv)?;
    run(cli, &argv)
}

pub fn run(cli: Cli, argv: &[String]) -> Result<Vec<String>> {
    match cli.command {
        Command::Solve(a) => solve(&a, argv),
        Command::Roots(a) => roots(&a, argv),
        Command::RootsDiscrete(a) => roots_discrete(&a, argv),
        Command::Reference(a) => reference(&a, argv),
        Command::Compare(a) => compare(&a, argv),
        Command::Report(a) => report(&a),
        Command::Replay(a) => replay(&a),
    }
}

fn problem_manifest(m: &mut RunManifest, f: Formulation, p: &ProblemArgs, mat: Materials) {
    m.formulation = Some(f.name().into());
    m.dt = Some(p.dt);
    m.materials = Some(mat);
    if let Formulation::Out4 { alpha } = f {
        m.alpha = Some(alpha);
    }
}

fn write_history(h: &SolutionHistory, path: &Path) -> Result<()> {
    h.write_csv(BufWriter::new(File::create(path)?))?;
    Ok(())
}

fn solve(a: &SolveArgs, argv: &[String]) -> Result<Vec<String>> {
    a.problem.check()?;
    let f = a.problem.formulation()?;
    let mat = a.problem.materials(f)?;
    let shape = a.mesh.shape()?;
    if a.wave.steps == 0 {
        return Err(CliError::Usage("--steps must be positive".into()));
    }
    let mesh = build_mesh(&shape, a.mesh.n)?;
    let dt = a.problem.dt;
    let wave = a.wave.wave(mat.speed(0), dt);
    let store = KernelStore::from_env()?;
    let op = assemble_mot_with(&store, f, &mesh, &mat, dt, a.wave.steps)?;
    let hist = march(&op, &wave, a.wave.steps)?;
    let growth = hist.growth.expect("march attaches the diagnostic");

    let stem = format!("solve_{}_{}_n{}", f.name(), shape.name(), a.mesh.n);
    let (data, man_path, name) = a.output.paths(&stem, "csv")?;
    write_history(&hist, &data)?;
    let mut m = RunManifest::new("solve", &name, argv);
    problem_manifest(&mut m, f, &a.problem, mat);
    m.shape = Some(a.mesh.shape.clone());
    m.n = Some(a.mesh.n);
    m.steps = Some(a.wave.steps);
    m.wave = Some(wave.name().into());
    m.t0 = Some(wave.t0());
    m.source = Some(hist.source.clone());
    m.outcome = json!({
        "verdict": growth.verdict,
        "rate": growth.rate,
        "late_ratio": growth.late_ratio,
        "steps_completed": hist.steps(),
    });
    m.write(&man_path)?;
    Ok(vec![
        format!("verdict: {}", growth.verdict),
        format!("rate per step: {:.3e}", growth.rate),
        format!("wrote {}", data.display()),
    ])
}

fn scan_outcome(set: &RootSet) -> serde_json::Value {
    json!({
        "verdict": set.verdict,
        "max_im": set.max_im(),
        "roots": set.roots.len(),
        "zero_modes": set.zero_modes,
        "uncovered": set.uncovered.len(),
        "failures": set.failures.len(),
    })
}

fn scan_lines(set: &RootSet, data: &Path) -> Vec<String> {
    let mut lines = vec![
        format!("verdict: {}", set.verdict),
        format!(
            "roots: {} (max Im {:?}), zero-root modes {:?}",
            set.roots.len(),
            set.max_im(),
            set.zero_modes
        ),
    ];
    if !set.failures.is_empty() || !set.uncovered.is_empty() {
        lines.push(format!(
            "warning: {} failed tiles, {} uncovered slivers",
            set.failures.len(),
            set.uncovered.len()
        ));
    }
    lines.push(format!("wrote {}", data.display()));
    lines
}

fn run_scan(
    family: &dyn ModeFamily,
    subcommand: &str,
    stem: String,
    f: Formulation,
    p: &ProblemArgs,
    mat: Materials,
    scan: &ScanArgs,
    output: &OutputArgs,
    argv: &[String],
    n: Option<usize>,
) -> Result<Vec<String>> {
    let cfg = scan.config()?;
    let region = scan.region(p.dt)?;
    let set = scan_strip(family, region, p.dt, &cfg)?;
    let (data, man_path, name) = output.paths(&stem, "csv")?;
    set.write_csv(BufWriter::new(File::create(&data)?))?;
    let mut m = RunManifest::new(subcommand, &name, argv);
    problem_manifest(&mut m, f, p, mat);
    m.shape = Some("circle".into());
    m.n = n;
    m.ssm = Some(cfg);
    m.seed = Some(cfg.ssm.seed);
    m.outcome = scan_outcome(&set);
    m.outcome["region"] = json!(region);
    m.write(&man_path)?;
    Ok(scan_lines(&set, &data))
}

fn roots(a: &RootsArgs, argv: &[String]) -> Result<Vec<String>> {
    a.problem.check()?;
    let f = a.problem.formulation()?;
    let mat = a.problem.materials(f)?;
    let family = CircleModes::new(f, mat, a.problem.dt, a.n_max, SeriesControl::Fixed(a.scan.terms))?;
    let stem = format!("roots_{}", f.name());
    run_scan(&family, "roots", stem, f, &a.problem, mat, &a.scan, &a.output, argv, None)
}

fn roots_discrete(a: &DiscreteArgs, argv: &[String]) -> Result<Vec<String>> {
    a.problem.check()?;
    let f = a.problem.formulation()?;
    let mat = a.problem.materials(f)?;
    let m = a.truncation.unwrap_or_else(|| default_truncation(a.n));
    let family = DiscreteCircle::new(f, mat, a.problem.dt, a.n, m, SeriesControl::Fixed(a.scan.terms))?;
    let stem = format!("roots_discrete_{}_n{}", f.name(), a.n);
    run_scan(&family, "roots-discrete", stem, f, &a.problem, mat, &a.scan, &a.output, argv, Some(a.n))
}

fn reference(a: &ReferenceArgs, argv: &[String]) -> Result<Vec<String>> {
    a.problem.check()?;
    let f = a.problem.formulation()?;
    let mat = a.problem.materials(f)?;
    let dt = a.problem.dt;
    let steps = a.wave.steps;
    let wave = a.wave.wave(mat.speed(0), dt);
    let opts = PulseOptions {
        padding: a.padding,
        oversample: a.oversample,
        ..Default::default()
    };
    let pulse = SpectralPulse::new(wave, steps, dt, opts)?;
    let mesh = build_mesh(&Shape::unit_circle(), a.n)?;
    let problem = ReferenceProblem::for_formulation(f, mat);
    let run = synthesise(&pulse, problem, &mesh, steps, dt)?;

    let stem = format!("reference_{}_n{}", problem.name(), a.n);
    let (data, man_path, name) = a.output.paths(&stem, "csv")?;
    write_history(&run.history, &data)?;
    let mut m = RunManifest::new("reference", &name, argv);
    problem_manifest(&mut m, f, &a.problem, mat);
    m.shape = Some("circle".into());
    m.n = Some(a.n);
    m.steps = Some(steps);
    m.wave = Some(wave.name().into());
    m.t0 = Some(wave.t0());
    m.source = Some(run.history.source.clone());
    m.outcome = json!({
        "problem": problem.name(),
        "unknowns": problem.unknowns(),
        "padding": pulse.padding,
        "damping": pulse.damping,
        "taper": pulse.taper,
        "precursor": run.precursor,
        "wraparound": run.wraparound,
        "last_untapered_step": last_untapered_step(&pulse, mat.speed(0)),
    });
    m.write(&man_path)?;
    Ok(vec![
        format!("wraparound {:.2e}, precursor {:.2e}", run.wraparound, run.precursor),
        format!("wrote {}", data.display()),
    ])
}

/// Last step whose values are unaffected by the taper anywhere on the unit circle.
pub fn last_untapered_step(pulse: &SpectralPulse, c1: f64) -> usize {
    let start = (1.0 - pulse.taper) * pulse.window - 2.0 / c1;
    (start / pulse.dt).floor().max(0.0) as usize
}

/// `||a - b|| / ||b||` per unknown column over steps `from..=to`.
pub fn relative_l2(a: &SolutionHistory, b: &SolutionHistory, from: usize, to: usize) -> Result<Vec<f64>> {
    if a.n != b.n || a.unknowns.len() != b.unknowns.len() {
        return Err(CliError::Usage(format!(
            "histories differ in shape: {} x {} vs {} x {}",
            a.n,
            a.unknowns.len(),
            b.n,
            b.unknowns.len()
        )));
    }
    if from == 0 || from > to || to > a.steps().min(b.steps()) {
        return Err(CliError::Usage(format!(
            "window {from}..={to} not inside steps 1..={}",
            a.steps().min(b.steps())
        )));
    }
    Ok((0..a.unknowns.len())
        .map(|k| {
            let (mut d, mut r) = (0.0, 0.0);
            for l in from..=to {
                for (x, y) in a.unknown(l, k).iter().zip(b.unknown(l, k)) {
                    d += (x - y) * (x - y);
                    r += y * y;
                }
            }
            (d / r).sqrt()
        })
        .collect())
}

fn compare(a: &CompareArgs, argv: &[String]) -> Result<Vec<String>> {
    let h = SolutionHistory::read_csv(File::open(&a.history)?, a.dt)?;
    let r = SolutionHistory::read_csv(File::open(&a.reference)?, a.dt)?;
    let errs = relative_l2(&h, &r, a.from, a.to)?;
    let (data, man_path, name) = a.output.paths("compare", "json")?;
    let metrics = json!({
        "history": a.history,
        "reference": a.reference,
        "from": a.from,
        "to": a.to,
        "relative_l2": errs,
    });
    std::fs::write(&data, serde_json::to_string_pretty(&metrics)? + "\n")?;
    let mut m = RunManifest::new("compare", &name, argv);
    m.dt = Some(a.dt);
    m.n = Some(h.n);
    m.outcome = metrics;
    m.write(&man_path)?;
    let mut lines: Vec<String> = errs
        .iter()
        .enumerate()
        .map(|(k, e)| format!("unknown {}: relative L2 {e:.4e}", k + 1))
        .collect();
    lines.push(format!("wrote {}", data.display()));
    Ok(lines)
}

fn report(a: &ReportArgs) -> Result<Vec<String>> {
    let mut manifests = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&a.inputs)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".manifest.json"))
        .collect();
    entries.sort();
    for p in entries {
        manifests.push(RunManifest::read(&p)?);
    }
    let table = stability_table(&manifests);
    match &a.out {
        Some(path) => {
            std::fs::write(path, &table)?;
            Ok(vec![format!("wrote {}", path.display())])
        }
        None => Ok(table.lines().map(String::from).collect()),
    }
}

fn replay(a: &ReplayArgs) -> Result<Vec<String>> {
    let m = RunManifest::read(&a.manifest)?;
    let mut argv = m.argv.clone();
    if argv.get(1).map(String::as_str) == Some("replay") {
        return Err(CliError::Usage("manifest records a replay; refusing to recurse".into()));
    }
    if let Some(out) = &a.out {
        argv.push("--out".into());
        argv.push(out.to_string_lossy().into_owned());
    }
    run_from(argv)
}
