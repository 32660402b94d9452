//! `qskyrm`: file-based pipeline for hybrid entangled states.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use manifest::RunManifest;
use qskyrm::io;
use qskyrm::topology::DEFAULT_CELLS;
use qskyrm::{
    analyze, auto_grid, born_probabilities, build_pure_state, concurrence, default_alphas, fidelity,
    metric_report, normalize_local, purity, reconstruct_with, run_decay_sweep, simulate_counts, stokes_field,
    Grid2D, HybridStateSpec, Noise, ReconstructOptions, TopologyReport,
};

#[derive(Parser)]
#[command(name = "qskyrm", version, about = "Hybrid entangled states: tomography, Stokes fields and skyrme numbers")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "QSKYRM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a state spec and its pure density matrix.
    Generate(GenerateArgs),
    /// Born probabilities or Poisson counts for the 36 tomography settings.
    SimulateQst(SimulateArgs),
    /// Density matrix from a counts CSV.
    Reconstruct(ReconstructArgs),
    /// Conditional Stokes field on a grid.
    Stokes(StokesArgs),
    /// Skyrme number and sphere coverage of a Stokes field.
    Skyrme(SkyrmeArgs),
    /// Fidelity, concurrence and purity.
    Metrics(MetricsArgs),
    /// F, C and N along the decay α → 1.
    SweepDecay(SweepArgs),
    /// Stereographic projection of a Stokes field's sample points.
    Project(ProjectArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, allow_hyphen_values = true)]
    l1: i32,
    #[arg(long, allow_hyphen_values = true)]
    l2: i32,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    w0: f64,
    #[arg(long, default_value = "spec.json")]
    spec_out: PathBuf,
    #[arg(long, default_value = "rho.json")]
    rho_out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    rho: PathBuf,
    /// Shots per setting; 0 writes exact probabilities.
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "counts.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    counts: PathBuf,
    /// Reference state for the fidelity in the metrics sidecar.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Keep the raw least-squares matrix even if it is not positive.
    #[arg(long)]
    no_project: bool,
    #[arg(long, default_value = "rho_reconstructed.json")]
    out: PathBuf,
}

#[derive(Args)]
struct StokesArgs {
    #[arg(long)]
    rho: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 257)]
    grid_n: usize,
    /// Half-width in units of w0.
    #[arg(long, default_value_t = 8.0)]
    half_width: f64,
    /// Widen the grid to hold the full wrap (crossover-radius rule).
    #[arg(long)]
    auto_grid: bool,
    /// Apply the quarter-wave-plate frame rotation.
    #[arg(long)]
    qwp: bool,
    #[arg(long, default_value = "stokes.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SkyrmeArgs {
    #[arg(long)]
    field: PathBuf,
    /// Spec for the closed form; defaults to the one in the field's sidecar.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CELLS)]
    cells: usize,
    #[arg(long, default_value = "topology.json")]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    rho: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value = "metrics.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Comma-separated α values; default is the geometric ladder towards 1.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Shots per setting; 0 means noiseless.
    #[arg(long, default_value_t = 0)]
    noise_shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 257)]
    grid_n: usize,
    #[arg(long, default_value_t = 8.0)]
    half_width: f64,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long)]
    field: PathBuf,
    /// Length unit for the projection; defaults to w0 from the field's sidecar, else 1.
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, default_value = "projection.csv")]
    out: PathBuf,
}

/// Non-physical or otherwise unusable numerical result.
#[derive(Debug)]
struct NumericalFailure(String);

impl std::fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<NumericalFailure>().is_some() {
            return 3;
        }
        if let Some(q) = cause.downcast_ref::<qskyrm::Error>() {
            return match q {
                qskyrm::Error::Numerical(_) => 3,
                _ => 2,
            };
        }
    }
    2
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::SimulateQst(a) => simulate(a),
        Command::Reconstruct(a) => reconstruct_cmd(a),
        Command::Stokes(a) => stokes(a),
        Command::Skyrme(a) => skyrme(a),
        Command::Metrics(a) => metrics(a),
        Command::SweepDecay(a) => sweep(a),
        Command::Project(a) => project(a),
    }
}

fn read_rho(p: &Path) -> anyhow::Result<qskyrm::DensityMatrix> {
    io::read_density(p).with_context(|| format!("reading {}", p.display()))
}

fn read_spec(p: &Path) -> anyhow::Result<HybridStateSpec> {
    io::read_spec(p).with_context(|| format!("reading {}", p.display()))
}

fn generate(a: GenerateArgs) -> anyhow::Result<()> {
    let spec = HybridStateSpec::new(a.l1, a.l2, a.alpha, a.gamma, a.w0)?;
    let rho = build_pure_state(&spec);
    io::write_spec(&a.spec_out, &spec)?;
    io::write_density(&a.rho_out, &rho)?;
    let m = RunManifest::new("generate", 0)
        .param("l1", a.l1)
        .param("l2", a.l2)
        .param("alpha", a.alpha)
        .param("gamma", a.gamma)
        .param("w0", a.w0);
    m.write_for(&a.spec_out)?;
    m.write_for(&a.rho_out)?;
    println!("wrote {} and {}", a.spec_out.display(), a.rho_out.display());
    Ok(())
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let rho = read_rho(&a.rho)?;
    let exact = born_probabilities(&rho)?;
    let records = if a.shots == 0 { exact } else { simulate_counts(&exact, a.shots, a.seed)? };
    io::write_counts(&a.out, &records)?;
    RunManifest::new("simulate-qst", a.seed).input(&a.rho).param("shots", a.shots).write_for(&a.out)?;
    println!("wrote {} ({} settings)", a.out.display(), records.len());
    Ok(())
}

#[derive(Serialize)]
struct ReconstructSidecar {
    fidelity: Option<f64>,
    concurrence: f64,
    purity: f64,
    residual: f64,
    residual_unconstrained: f64,
    projected: bool,
    physical: bool,
}

fn reconstruct_cmd(a: ReconstructArgs) -> anyhow::Result<()> {
    let records = io::read_counts(&a.counts).with_context(|| format!("reading {}", a.counts.display()))?;
    let target = a.target.as_deref().map(read_rho).transpose()?;
    let r = reconstruct_with(&records, ReconstructOptions { project: !a.no_project })?;
    let physical = r.rho.is_physical();
    io::write_density(&a.out, &r.rho)?;
    let side = ReconstructSidecar {
        fidelity: target.as_ref().filter(|_| physical).map(|t| fidelity(t, &r.rho)),
        concurrence: if physical { concurrence(&r.rho) } else { f64::NAN },
        purity: purity(&r.rho),
        residual: r.residual,
        residual_unconstrained: r.residual_unconstrained,
        projected: r.projected,
        physical,
    };
    let side_path = io::sidecar(&a.out, ".metrics.json");
    io::write_report(&side_path, &side)?;
    let mut m = RunManifest::new("reconstruct", 0).input(&a.counts).param("project", !a.no_project);
    if let Some(t) = &a.target {
        m = m.input(t);
    }
    m.write_for(&a.out)?;
    if !physical {
        return Err(NumericalFailure(format!(
            "raw reconstruction written to {} has a negative eigenvalue; rerun without --no-project for a physical state",
            a.out.display()
        ))
        .into());
    }
    match side.fidelity {
        Some(f) => println!("wrote {}: F = {f:.6}, C = {:.6}", a.out.display(), side.concurrence),
        None => println!("wrote {}: C = {:.6}", a.out.display(), side.concurrence),
    }
    Ok(())
}

fn stokes(a: StokesArgs) -> anyhow::Result<()> {
    let rho = read_rho(&a.rho)?;
    let spec = read_spec(&a.spec)?;
    let mut grid = Grid2D::new(a.half_width * spec.w0, a.grid_n)?;
    if a.auto_grid {
        grid = auto_grid(&spec, &grid)?;
    }
    let field = stokes_field(&rho, &spec, &grid, a.qwp)?;
    io::write_stokes(&a.out, &field)?;
    RunManifest::new("stokes", 0)
        .input(&a.rho)
        .input(&a.spec)
        .param("grid_n", a.grid_n)
        .param("half_width", grid.half_width)
        .param("auto_grid", a.auto_grid)
        .param("qwp", a.qwp)
        .write_for(&a.out)?;
    println!("wrote {} ({}^2 samples, half-width {:.4})", a.out.display(), a.grid_n, grid.half_width);
    Ok(())
}

#[derive(Serialize)]
struct TopologyDocument {
    #[serde(flatten)]
    report: TopologyReport,
    grid: Grid2D,
    qwp: bool,
    spec: Option<HybridStateSpec>,
    field: PathBuf,
}

fn skyrme(a: SkyrmeArgs) -> anyhow::Result<()> {
    let field = io::read_stokes(&a.field).with_context(|| format!("reading {}", a.field.display()))?;
    let spec = match &a.spec {
        Some(p) => Some(read_spec(p)?),
        None => field.spec,
    };
    let report = analyze(&normalize_local(&field), spec.as_ref(), a.cells)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if !report.n_numeric.is_finite() {
        return Err(NumericalFailure("skyrme number is not finite".into()).into());
    }
    println!(
        "N = {:.6} (closed form {}, theory {}), coverage {:.4}",
        report.n_numeric,
        report.n_closed_form.map_or("n/a".to_string(), |c| format!("{c}")),
        report.n_theory,
        report.coverage_total
    );
    let doc = TopologyDocument { report, grid: field.grid, qwp: field.qwp, spec, field: a.field.clone() };
    io::write_report(&a.out, &doc)?;
    let mut m = RunManifest::new("skyrme", 0).input(&a.field).param("cells", a.cells);
    if let Some(p) = &a.spec {
        m = m.input(p);
    }
    m.write_for(&a.out)?;
    Ok(())
}

fn metrics(a: MetricsArgs) -> anyhow::Result<()> {
    let rho = read_rho(&a.rho)?;
    let target = read_rho(&a.target)?;
    let r = metric_report(&target, &rho);
    io::write_report(&a.out, &r)?;
    RunManifest::new("metrics", 0).input(&a.rho).input(&a.target).write_for(&a.out)?;
    println!("F = {:.9}, C = {:.9}, purity = {:.9}", r.fidelity, r.concurrence, r.purity);
    Ok(())
}

fn sweep(a: SweepArgs) -> anyhow::Result<()> {
    let spec = read_spec(&a.spec)?;
    let grid = Grid2D::new(a.half_width * spec.w0, a.grid_n)?;
    let alphas = a.alphas.clone().unwrap_or_else(default_alphas);
    let noise = (a.noise_shots > 0).then_some(Noise { shots: a.noise_shots, seed: a.seed });
    let rows = run_decay_sweep(&spec, &alphas, &grid, noise)?;
    if rows.iter().any(|r| !r.n_numeric.is_finite()) {
        return Err(anyhow!(NumericalFailure("non-finite skyrme number in sweep".into())));
    }
    io::write_sweep(&a.out, &rows)?;
    RunManifest::new("sweep-decay", a.seed)
        .input(&a.spec)
        .param("alphas", alphas.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .param("noise_shots", a.noise_shots)
        .param("grid_n", a.grid_n)
        .param("half_width", a.half_width)
        .write_for(&a.out)?;
    println!("wrote {} ({} rows)", a.out.display(), rows.len());
    Ok(())
}

fn project(a: ProjectArgs) -> anyhow::Result<()> {
    let field = io::read_stokes(&a.field).with_context(|| format!("reading {}", a.field.display()))?;
    let scale = a.scale.or(field.spec.map(|s| s.w0)).unwrap_or(1.0);
    io::write_stereographic(&a.out, &field, scale)?;
    RunManifest::new("project", 0).input(&a.field).param("scale", scale).write_for(&a.out)?;
    println!("wrote {} ({} points)", a.out.display(), field.s0.len());
    Ok(())
}
