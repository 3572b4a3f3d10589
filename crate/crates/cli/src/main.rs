use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coupled_fv::flux::FluxKind;
use coupled_fv::io::config::{validate_snapshots, MeshSource};
use coupled_fv::io::{
    parse_config, serialize_config, write_diagnostics, write_snapshot, CellFields, OutputFormat, RunConfig,
};
use coupled_fv::presets::{preset, NAMES};
use coupled_fv::scheme::{Problem, RunError, RunOutput};
use coupled_fv::verify::{run_suite, Suite, DEFAULT_SEED};

const USAGE: u8 = 1;
const SOLVER: u8 = 2;
const VERIFY: u8 = 3;

/// Finite volume solver for coupled multi-component scalar conservation laws.
#[derive(Debug, Parser)]
#[command(name = "coupled-fv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a configured or preset experiment and write fields and diagnostics.
    Run(RunArgs),
    /// Run a seeded property suite and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Configuration file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(NAMES))]
    preset: Option<String>,
    /// Cartesian resolution, e.g. 200x200.
    #[arg(long, value_name = "NxM", value_parser = parse_resolution)]
    mesh: Option<(usize, usize)>,
    #[arg(long, value_name = "X")]
    cfl: Option<f64>,
    #[arg(long, value_name = "T")]
    tend: Option<f64>,
    /// Comma-separated snapshot times.
    #[arg(long, value_name = "t1,t2,...", value_delimiter = ',', num_args = 0..)]
    snapshots: Option<Vec<f64>>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["rusanov", "godunov"]))]
    flux: Option<String>,
    /// Output directory (default: the config's `output_dir`, else `output`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(Suite::ALL.map(Suite::name)))]
    suite: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got `{s}`"))?;
    let n: usize = a.trim().parse().map_err(|_| format!("bad cell count `{a}`"))?;
    let m: usize = b.trim().parse().map_err(|_| format!("bad cell count `{b}`"))?;
    if n == 0 || m == 0 {
        return Err("cell counts must be positive".into());
    }
    Ok((n, m))
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Solver(String),
}

/// Loads the config and applies flag overrides.
fn effective_config(args: &RunArgs) -> Result<RunConfig, Failure> {
    let mut c = match (&args.config, &args.preset) {
        (Some(path), None) => parse_config(path).map_err(|e| Failure::Usage(e.to_string()))?,
        (None, Some(name)) => preset(name).map_err(|e| Failure::Usage(e.to_string()))?,
        _ => return Err(Failure::Usage("exactly one of --config and --preset is required".into())),
    };
    if let Some((nx, ny)) = args.mesh {
        match c.mesh.source {
            MeshSource::Cartesian { bbox, .. } => c.mesh.source = MeshSource::Cartesian { nx, ny, bbox },
            MeshSource::File(_) => return Err(Failure::Usage("--mesh conflicts with a mesh file".into())),
        }
    }
    if let Some(x) = args.cfl {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Failure::Usage(format!("--cfl {x} out of (0,1]")));
        }
        c.scheme.cfl_number = x;
    }
    if let Some(t) = args.tend {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Failure::Usage(format!("--tend {t} must be finite and non-negative")));
        }
        c.run.t_end = t;
        if args.snapshots.is_none() {
            c.run.snapshots.retain(|&s| s <= t);
        }
    }
    if let Some(s) = &args.snapshots {
        c.run.snapshots = s.clone();
    }
    validate_snapshots(&c.run.snapshots, c.run.t_end).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(f) = &args.flux {
        c.scheme.flux = f.parse::<FluxKind>().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(dir) = &args.out {
        c.run.output_dir = Some(dir.clone());
    }
    Ok(c)
}

fn write_outputs(dir: &Path, config: &RunConfig, problem: &Problem, out: &RunOutput) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    std::fs::write(dir.join("run.cfg"), serialize_config(config)).map_err(|e| e.to_string())?;
    for (i, snap) in out.snapshots.iter().enumerate() {
        let fields = CellFields::new(&problem.mesh, &problem.dual, &problem.color, &problem.flux.model, &snap.u);
        for &format in &config.run.formats {
            let ext = match format {
                OutputFormat::Csv => "csv",
                OutputFormat::VtkLegacy => "vtk",
            };
            let path = dir.join(format!("snapshot_{i:03}.{ext}"));
            write_snapshot(&problem.mesh, &fields, &path, format).map_err(|e| e.to_string())?;
        }
    }
    write_diagnostics(&out.log, dir.join("diagnostics.csv")).map_err(|e| e.to_string())
}

fn summarize(out: &RunOutput) {
    for (i, s) in out.snapshots.iter().enumerate() {
        let (lo, hi) = s
            .u
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        println!("snapshot {i:03}  t = {:<10.6}  u in [{lo:.6}, {hi:.6}]", s.t);
    }
    println!("steps: {}", out.steps);
    if let Some(e) = out.log.max_entropy_residual() {
        println!("max entropy residual: {e:.3e}");
    }
    println!("max conservation residual: {:.3e}", out.log.max_conservation_residual());
    let margin = out.log.steps.iter().map(|s| s.max_principle_margin).fold(f64::INFINITY, f64::min);
    if margin.is_finite() {
        println!("worst max-principle margin: {margin:.3e}");
    }
    println!("oscillation sum: {:.6e}", out.log.oscillation_sum());
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let config = effective_config(args)?;
    let problem = Problem::from_config(&config).map_err(|e| match e {
        // a bad geometry or coupling is a problem with the inputs
        RunError::Step { .. } => Failure::Solver(e.to_string()),
        _ => Failure::Usage(e.to_string()),
    })?;
    let dir = config.run.output_dir.clone().unwrap_or_else(|| PathBuf::from("output"));
    match coupled_fv::scheme::run_problem(&problem) {
        Ok(out) => {
            write_outputs(&dir, &config, &problem, &out).map_err(Failure::Solver)?;
            summarize(&out);
            println!("output written to {}", dir.display());
            Ok(())
        }
        Err(RunError::Step {
            step,
            t,
            source,
            partial,
        }) => {
            // keep what was computed so the failure can be inspected
            let _ = write_outputs(&dir, &config, &problem, &partial);
            Err(Failure::Solver(format!("step {step} at t = {t}: {source}")))
        }
        Err(e) => Err(Failure::Solver(e.to_string())),
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, Failure> {
    let suite: Suite = args.suite.parse().map_err(|e: coupled_fv::verify::UnknownSuite| Failure::Usage(e.to_string()))?;
    println!("seed {}", args.seed);
    let report = run_suite(suite, args.seed).map_err(|e| Failure::Solver(e.to_string()))?;
    println!("{report}");
    Ok(report.pass())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a).map(|()| true),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(VERIFY),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver error: {m}");
            ExitCode::from(SOLVER)
        }
    }
}
