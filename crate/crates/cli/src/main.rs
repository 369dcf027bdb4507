use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use lrcone::bounds::ConstantMode;
use lrcone::harness::config::ModeSelection;
use lrcone::harness::emit::{bound_rows_table, fit_json, front_table, report_table, sweep_table, write_json, Cell, Table};
use lrcone::harness::{
    bound_table, default_front_threshold, front_from_sweep, parse_config, run_sweep, verify_all, RunConfig,
    SweepOptions, System,
};
use lrcone::lightcone::{exponents, fit_power_law, ConeParameters};
use lrcone::{Error, Result};

/// Exact small-system checks of Lieb-Robinson bounds for power-law spin models.
#[derive(Parser)]
#[command(name = "lrcone", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Constant mode: paper_form, numeric_tight or both.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Use the D-1 exponent and shell counts in the third term.
    #[arg(long, global = true)]
    refined: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print f(R), C0, v and the growth certificate.
    Model,
    /// Sweep exact commutator norms against the bound.
    Simulate,
    /// Tabulate the bound alone, without dynamics.
    Bound,
    /// Light-cone exponents, r_max and v_g curves, empirical front and fit.
    Lightcone,
    /// Run every check; exit 1 if any fails.
    Verify,
}

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("lrcone: {e}");
            let usage = e.is_usage_error() || matches!(e, Error::ResourceLimit(_) | Error::Io { .. });
            ExitCode::from(if usage { EXIT_USAGE } else { EXIT_RUNTIME })
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    if let Some(mode) = &common.mode {
        config.bound.mode = ModeSelection::from_name(mode).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown mode `{mode}`; expected paper_form, numeric_tight or both"))
        })?;
    }
    if common.refined {
        config.bound.refined_exponent = true;
    }
    if let Ok(cap) = std::env::var("LRCONE_DIM_CAP") {
        config.limits.dim_cap = cap
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("LRCONE_DIM_CAP = `{cap}` is not a positive integer")))?;
    }
    if common.workers == Some(0) {
        return Err(Error::InvalidArgument("--workers must be positive".into()));
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(common: &Common, config: &RunConfig) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir))
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let config = load_config(&cli.common)?;
    let system = System::build(&config)?;
    let dir = out_dir(&cli.common, &config);
    match cli.command {
        Command::Model => model(&system, cli.common.out.as_deref()),
        Command::Simulate => simulate(&system, &cli.common, &dir),
        Command::Bound => bound(&system, &dir),
        Command::Lightcone => lightcone(&system, &cli.common, &dir),
        Command::Verify => verify(&system, &cli.common, &dir),
    }
}

fn model(system: &System, out: Option<&Path>) -> Result<u8> {
    let tail: Vec<_> = lrcone::model::EmpiricalTail::new(&system.interaction)
        .steps()
        .iter()
        .map(|&(d, f)| json!({"R": d, "f": f}))
        .collect();
    let summary = json!({
        "sites": system.space.len(),
        "terms": system.interaction.terms().len(),
        "dimension": system.dimension,
        "C0": system.c0,
        "velocity": system.velocity,
        "growth": {"C": system.growth.c, "D": system.growth.dimension, "shell_C": system.growth.shell_c},
        "f_table": tail,
        "profile": system.profile,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
    if let Some(dir) = out {
        print_paths(&[write_json(dir, "model.json", &summary)?]);
    }
    Ok(0)
}

fn simulate(system: &System, common: &Common, dir: &Path) -> Result<u8> {
    let options = SweepOptions {
        workers: common.workers,
        ..SweepOptions::for_config(system)
    };
    let records = run_sweep(system, &options)?;
    let min_margin = records.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    println!("{} rows, minimum margin {min_margin:e}", records.len());
    print_paths(&sweep_table(&records).write(dir, "sweep", &system.config.output.formats)?);
    Ok(0)
}

fn bound(system: &System, dir: &Path) -> Result<u8> {
    let modes: Vec<ConstantMode> = system.config.bound.mode.modes();
    let rows = bound_table(system, &modes)?;
    println!("{} rows", rows.len());
    print_paths(&bound_rows_table(&rows).write(dir, "bound", &system.config.output.formats)?);
    Ok(0)
}

fn lightcone(system: &System, common: &Common, dir: &Path) -> Result<u8> {
    let alpha = system
        .config
        .alpha()
        .ok_or_else(|| Error::InvalidArgument("lightcone needs a power-law interaction".into()))?;
    let e = exponents(system.dimension, alpha)?;
    let params = ConeParameters::new(system.dimension, alpha, system.config.bound.lambda, system.velocity)?;
    let formats = &system.config.output.formats;

    let curve = Table {
        columns: vec!["t", "r_max", "v_g", "v_g_paper"],
        rows: system
            .times()
            .into_iter()
            .filter(|&t| t > 0.0)
            .map(|t| {
                vec![
                    Cell::Num(t),
                    Cell::Num(params.r_max(t)),
                    Cell::Num(params.v_g(t)),
                    Cell::Num(params.v_g_paper(t)),
                ]
            })
            .collect(),
    };
    let mut paths = curve.write(dir, "lightcone", formats)?;

    let options = SweepOptions {
        workers: common.workers,
        ..SweepOptions::for_config(system)
    };
    let records = run_sweep(system, &options)?;
    let epsilon = default_front_threshold(system);
    let front = front_from_sweep(&records, epsilon)?;
    paths.extend(front_table(&front).write(dir, "front", formats)?);
    let fit = match fit_power_law(&front) {
        Ok(fit) => fit_json(&fit),
        Err(e) => json!({"exponent": null, "prefactor": null, "residual": null, "points_used": 0, "note": e.to_string()}),
    };
    paths.push(write_json(dir, "fit.json", &fit)?);

    let summary = json!({
        "kappa": e.kappa,
        "eta": e.eta,
        "gamma": e.gamma,
        "kappa_below_one": e.kappa_below_one,
        "lambda": params.lambda,
        "velocity": params.velocity,
        "front_epsilon": epsilon,
        "fit": fit,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
    print_paths(&paths);
    Ok(0)
}

fn verify(system: &System, common: &Common, dir: &Path) -> Result<u8> {
    let report = verify_all(system, common.workers)?;
    for f in report.failures() {
        eprintln!(
            "FAIL {} [{}]: measured {:e} bound {:e} margin {:e}",
            f.check, f.point, f.measured, f.bound, f.margin
        );
    }
    for c in &report.summary.checks {
        let status = if c.failed == 0 { "ok" } else { "FAILED" };
        println!("{:<34} {:>6} rows  min margin {:>12.4e}  {status}", c.check, c.total, c.min_margin);
    }
    println!(
        "{} checks, {} failed, {:.1} s",
        report.summary.total, report.summary.failed, report.summary.wall_time_s
    );
    let mut paths = report_table(&report).write(dir, "report", &system.config.output.formats)?;
    paths.push(write_json(dir, "summary.json", &serde_json::to_value(&report.summary).expect("json"))?);
    print_paths(&paths);
    Ok(if report.passed() { 0 } else { EXIT_VERIFY_FAILED })
}
