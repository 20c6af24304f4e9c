mod config;

use clap::{Args, Parser, Subcommand};
use config::RunFile;
use fracdg_core::analysis::Rate;
use fracdg_core::cases::{build_mesh, run_checks, run_study, CaseName, MeshKind, MeshOptions, StudyResult};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fracdg", version, about = "Staggered DG solver for Darcy flow in fractured media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write CSV and plot data.
    Run(RunArgs),
    /// Generate a mesh and save it as JSON.
    Mesh(MeshArgs),
    /// Run the invariant suite.
    Check,
}

#[derive(Args)]
struct RunArgs {
    /// TOML or JSON file with the same keys as the flags (flags win).
    #[arg(long)]
    config: Option<PathBuf>,
    /// ex1-iso, ex1-aniso, ex3, fivespot-permeable or fivespot-impermeable.
    #[arg(long)]
    case: Option<CaseName>,
    /// tri, rect, cvt, perturbed, mapped-rect, mapped-cvt or unfitted.
    #[arg(long)]
    mesh: Option<MeshKind>,
    /// Polynomial degrees, comma separated [default: 1,2,3].
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Refinement levels 1..=n [default: 4].
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Short-edge length relative to h on perturbed meshes [default: 0.001].
    #[arg(long)]
    d_ratio: Option<f64>,
    /// Voronoi seed [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Lloyd iterations for Voronoi meshes [default: 30].
    #[arg(long)]
    lloyd_iters: Option<usize>,
}

#[derive(Args)]
struct MeshArgs {
    /// tri, rect, cvt, perturbed, mapped-rect, mapped-cvt or unfitted.
    #[arg(long = "gen")]
    kind: MeshKind,
    /// Case whose fracture geometry and boundary tags are used.
    #[arg(long, default_value = "ex1-iso")]
    case: CaseName,
    #[arg(long, default_value_t = 1)]
    level: usize,
    #[arg(long, default_value_t = MeshOptions::default().d_ratio)]
    d_ratio: f64,
    #[arg(long, default_value_t = MeshOptions::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = MeshOptions::default().lloyd_iters)]
    lloyd_iters: usize,
    #[arg(long)]
    out: PathBuf,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("FRACDG_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| format!("FRACDG_THREADS={v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    log::debug!("using {n} threads");
    Ok(())
}

fn fmt_rate(r: Option<Rate>) -> String {
    match r {
        Some(Rate::Value(v)) => format!("{v:6.2}"),
        Some(Rate::Exact) => " exact".into(),
        None => "     -".into(),
    }
}

fn print_summary(r: &StudyResult) {
    // a closed pipe (e.g. `| head`) must not abort the run
    let mut w = std::io::stdout().lock();
    let _ = writeln!(w, "{:>2} {:>5} {:>10} {:>8} {:>11} {:>11} {:>11} {:>6} {:>6} {:>6}", "k", "level", "h", "ndof", "err_u", "err_p", "err_pG", "r_u", "r_p", "r_pG");
    for row in &r.rows {
        let ndof = row.ndof_u + row.ndof_p + row.ndof_pg;
        let e = |f: fn(&fracdg_core::analysis::ErrorReport) -> f64| row.errors.as_ref().map_or("-".to_string(), |e| format!("{:.4e}", f(e)));
        let rate = |i: usize| fmt_rate(row.rates.map(|x| x[i]));
        let _ = writeln!(
            w,
            "{:>2} {:>5} {:>10.4e} {:>8} {:>11} {:>11} {:>11} {} {} {}",
            row.k,
            row.level,
            row.h,
            ndof,
            e(|e| e.err_u),
            e(|e| e.err_p),
            e(|e| e.err_pg),
            rate(0),
            rate(1),
            rate(2)
        );
    }
    for f in &r.failures {
        eprintln!("failed: k={} level={} stage={}: {}", f.k, f.level, f.stage, f.reason);
    }
    for f in &r.files {
        let _ = writeln!(w, "wrote {}", f.display());
    }
}

fn run(args: RunArgs) -> Result<ExitCode, String> {
    let file = match &args.config {
        Some(p) => RunFile::load(p)?,
        None => RunFile::default(),
    };
    let flags = RunFile {
        case: args.case,
        mesh: args.mesh,
        k: args.k,
        levels: args.levels,
        out: args.out,
        d_ratio: args.d_ratio,
        seed: args.seed,
        lloyd_iters: args.lloyd_iters,
    };
    let cfg = file.overlay(flags).into_study()?;
    let result = run_study(&cfg).map_err(|e| format!("writing results: {e}"))?;
    print_summary(&result);
    Ok(if result.ok() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn mesh(args: MeshArgs) -> Result<ExitCode, String> {
    let opts = MeshOptions { d_ratio: args.d_ratio, seed: args.seed, lloyd_iters: args.lloyd_iters };
    let m = build_mesh(&args.case.definition(), args.kind, args.level, &opts).map_err(|e| e.to_string())?;
    m.save(&args.out).map_err(|e| e.to_string())?;
    println!("{}: {} vertices, {} cells, {} fracture edges -> {}", args.kind, m.vertices().len(), m.num_cells(), m.fracture().len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn check() -> ExitCode {
    let results = run_checks();
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} checks pass", results.len() - failed, results.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let out = match cli.command {
        Command::Run(a) => run(a),
        Command::Mesh(a) => mesh(a),
        Command::Check => Ok(check()),
    };
    out.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
