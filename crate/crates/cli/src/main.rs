use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand as ClapSubcommand};
use washboard_cli::spec::Num;
use washboard_cli::{parse_run_spec, run, RawSpec, RunError};

#[derive(Parser)]
#[command(name = "washboard", version, about = "Tilted washboard potentials of frustrated Josephson-junction arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Write a cell definition and its validation report
    Cell(Flags),
    /// Target matrix, transform D and exactness report
    Derive(Flags),
    /// Two-dimensional cut through the potential
    Slice(Flags),
    /// Fixed points, critical current and barrier height
    Stationary(Flags),
    /// Pinned-phase boundary of the f = 1/2 cell
    Boundary(Flags),
    /// Langevin or Hamiltonian trajectories
    Simulate(Flags),
    /// Execute a TOML run specification
    Run {
        config: PathBuf,
    },
}

#[derive(Args, Default)]
struct Flags {
    /// Frustration of a built-in cell: 1/2, 1/3 or single_junction
    #[arg(long)]
    f: Option<String>,
    /// Custom cell definition file
    #[arg(long)]
    cell_file: Option<PathBuf>,
    /// Current along x per cell, units of I_c
    #[arg(long = "Ix", allow_hyphen_values = true)]
    i_x: Option<String>,
    /// Current along y per cell, units of I_c
    #[arg(long = "Iy", allow_hyphen_values = true)]
    i_y: Option<String>,
    /// Noise strength Ω = sqrt(2 k_B T / E_J)
    #[arg(long)]
    omega: Option<String>,
    /// Stewart–McCumber parameter
    #[arg(long)]
    beta_c: Option<String>,
    /// Time step in units of τ
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    /// Number of integration steps
    #[arg(long)]
    steps: Option<i64>,
    /// First seed
    #[arg(long)]
    seed: Option<i64>,
    /// Number of seeds, run as seed, seed+1, ...
    #[arg(long)]
    seeds: Option<i64>,
    /// Record every stride-th step
    #[arg(long)]
    stride: Option<i64>,
    /// underdamped, overdamped or hamiltonian
    #[arg(long)]
    scheme: Option<String>,
    /// as_written or isotropic
    #[arg(long)]
    noise: Option<String>,
    /// Initial point, comma separated
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    /// Trailing fraction used for mean voltages
    #[arg(long)]
    window: Option<String>,
    /// Number of R points on [0, 1]
    #[arg(long)]
    r_grid: Option<i64>,
    /// Newton seeds per axis for the stationary scan
    #[arg(long)]
    seed_grid: Option<i64>,
    /// Slice preset for figures 3-8
    #[arg(long)]
    figure: Option<i64>,
    /// Held axis, e.g. z=-pi/2; repeatable
    #[arg(long, allow_hyphen_values = true)]
    fix: Vec<String>,
    /// Free axes, e.g. x,y
    #[arg(long)]
    free: Option<String>,
    /// Range of a free axis as lo:hi; give twice
    #[arg(long, allow_hyphen_values = true)]
    range: Vec<String>,
    /// Grid points per free axis
    #[arg(long)]
    resolution: Option<i64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

fn num(s: Option<String>) -> Option<Num> {
    s.map(Num::Expr)
}

fn raw_from_flags(subcommand: &str, f: Flags) -> anyhow::Result<RawSpec> {
    let mut fix = std::collections::BTreeMap::new();
    for item in f.fix {
        let (k, v) = item.split_once('=').with_context(|| format!("--fix expects axis=value, got {item:?}"))?;
        fix.insert(k.trim().to_string(), Num::Expr(v.trim().to_string()));
    }
    let range = if f.range.is_empty() {
        None
    } else {
        Some(
            f.range
                .iter()
                .map(|r| {
                    let (lo, hi) = r.split_once(':').with_context(|| format!("--range expects lo:hi, got {r:?}"))?;
                    Ok(vec![Num::Expr(lo.to_string()), Num::Expr(hi.to_string())])
                })
                .collect::<anyhow::Result<Vec<_>>>()?,
        )
    };
    Ok(RawSpec {
        subcommand: Some(subcommand.to_string()),
        f: f.f,
        cell_file: f.cell_file,
        i_x: num(f.i_x),
        i_y: num(f.i_y),
        omega: num(f.omega),
        beta_c: num(f.beta_c),
        dt: num(f.dt),
        steps: f.steps,
        seed: f.seed,
        seeds: f.seeds,
        stride: f.stride,
        scheme: f.scheme,
        noise: f.noise,
        init: f.init.map(|s| s.split(',').map(|c| Num::Expr(c.trim().to_string())).collect()),
        window: num(f.window),
        r_grid: f.r_grid,
        seed_grid: f.seed_grid,
        figure: f.figure,
        fix: (!fix.is_empty()).then_some(fix),
        free: f.free.map(|s| s.split(',').map(|c| c.trim().to_string()).collect()),
        range,
        resolution: f.resolution,
        out: f.out,
    })
}

fn execute(cli: Cli) -> anyhow::Result<String> {
    let spec = match cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            parse_run_spec(&text)?
        }
        Command::Cell(f) => raw_from_flags("cell", f)?.validate().map_err(RunError::from)?,
        Command::Derive(f) => raw_from_flags("derive", f)?.validate().map_err(RunError::from)?,
        Command::Slice(f) => raw_from_flags("slice", f)?.validate().map_err(RunError::from)?,
        Command::Stationary(f) => raw_from_flags("stationary", f)?.validate().map_err(RunError::from)?,
        Command::Boundary(f) => raw_from_flags("boundary", f)?.validate().map_err(RunError::from)?,
        Command::Simulate(f) => raw_from_flags("simulate", f)?.validate().map_err(RunError::from)?,
    };
    let manifest = run(&spec)?;
    Ok(washboard_cli::run::describe(&manifest))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<RunError>().map_or(1, RunError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
