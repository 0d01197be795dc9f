//! Subcommand execution: build the model, compute, write artifacts.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::fs;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use washboard_core::cell::{parse_cell, validate_cell, write_cell};
use washboard_core::dynamics::{mean_voltage, Scheme, simulate_with_retry, SimulationConfig, State, Trajectory};
use washboard_core::potential::{slice_grid, SliceSpec};
use washboard_core::stationary::boundary::uniform_r_grid;
use washboard_core::stationary::{
    barrier_height, critical_current_uniaxial, pinned_boundary, pinned_boundary_continuation, scan_fixed_points,
    seed_grid, Classification, NewtonOptions,
};
use washboard_core::transform::{compute_target, factor_transform, verify_exactness};
use washboard_core::{build_potential_with, builtin_cell, CellId, FrustrationCell, TiltedPotential};

use crate::error::{RunError, ValidationError};
use crate::manifest::{Manifest, Outputs};
use crate::spec::{CellSource, RunSpec, Subcommand};

pub fn load_cell(source: &CellSource) -> Result<FrustrationCell, RunError> {
    match source {
        CellSource::Builtin(f) => Ok(builtin_cell(f.parse()?)),
        CellSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
            Ok(parse_cell(&text)?)
        }
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn potential(spec: &RunSpec, cell: &FrustrationCell) -> Result<TiltedPotential, RunError> {
    let target = compute_target(cell)?;
    let t = factor_transform(&target, cell.canonical_d.as_ref())?;
    Ok(build_potential_with(cell, &t, spec.i_x, spec.i_y, spec.omega, spec.noise)?)
}

fn axis(cell: &FrustrationCell, key: &str, name: &str) -> Result<usize, RunError> {
    cell.axis_index(name)
        .ok_or_else(|| ValidationError::new(key, format!("no axis {name:?} in cell {}", cell.name)).into())
}

/// Execute a validated spec. Artifacts and `manifest.json` land in
/// `spec.out`; on failure the manifest stays incomplete and `error.json`
/// describes the error.
pub fn run(spec: &RunSpec) -> Result<Manifest, RunError> {
    let start = Instant::now();
    let mut out = Outputs::create(spec)?;
    match dispatch(spec, &mut out) {
        Ok(()) => out.finish(start.elapsed().as_secs_f64()),
        Err(e) => {
            out.fail(&e, start.elapsed().as_secs_f64());
            Err(e)
        }
    }
}

fn dispatch(spec: &RunSpec, out: &mut Outputs) -> Result<(), RunError> {
    let cell = load_cell(&spec.cell)?;
    match spec.subcommand {
        Subcommand::Cell => run_cell(&cell, out),
        Subcommand::Derive => run_derive(&cell, out),
        Subcommand::Slice => run_slice(spec, &cell, out),
        Subcommand::Stationary => run_stationary(spec, &cell, out),
        Subcommand::Boundary => run_boundary(spec, out),
        Subcommand::Simulate => run_simulate(spec, &cell, out),
    }
}

fn run_cell(cell: &FrustrationCell, out: &mut Outputs) -> Result<(), RunError> {
    out.write("cell.txt", write_cell(cell).as_bytes())?;
    out.write_json("validation.json", &validate_cell(cell))
}

#[derive(Serialize)]
struct TargetRecord {
    cell: String,
    coupling: f64,
    s: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct TransformRecord {
    cell: String,
    source: String,
    d: Vec<Vec<f64>>,
    d_inv: Vec<Vec<f64>>,
    target_residual: f64,
    inverse_residual: f64,
}

fn run_derive(cell: &FrustrationCell, out: &mut Outputs) -> Result<(), RunError> {
    let target = compute_target(cell)?;
    let t = factor_transform(&target, cell.canonical_d.as_ref())?;
    out.write_json("target.json", &TargetRecord { cell: cell.name.clone(), coupling: target.coupling, s: rows(&target.s) })?;
    out.write_json(
        "transform.json",
        &TransformRecord {
            cell: cell.name.clone(),
            source: format!("{:?}", t.source).to_lowercase(),
            d: rows(&t.d),
            d_inv: rows(&t.d_inv),
            target_residual: t.target_residual(&target),
            inverse_residual: t.inverse_residual(),
        },
    )?;
    out.write_json("exactness.json", &verify_exactness(cell, &t))
}

#[derive(Serialize)]
struct SliceSidecar<'a> {
    #[serde(flatten)]
    meta: washboard_core::potential::SliceMetadata,
    figure: Option<u8>,
    csv: &'a str,
}

fn run_slice(spec: &RunSpec, cell: &FrustrationCell, out: &mut Outputs) -> Result<(), RunError> {
    let p = potential(spec, cell)?;
    let req = &spec.slice;
    let fixed = req
        .fix
        .iter()
        .map(|(name, v)| Ok((axis(cell, "fix", name)?, *v)))
        .collect::<Result<Vec<_>, RunError>>()?;
    let free = match &req.free {
        Some([a, b]) => [axis(cell, "free", a)?, axis(cell, "free", b)?],
        None => {
            let open: Vec<usize> = (0..cell.n_vars()).filter(|i| !fixed.iter().any(|f| f.0 == *i)).take(2).collect();
            match open.as_slice() {
                [a, b] => [*a, *b],
                _ => return Err(ValidationError::new("free", "fewer than two axes left free").into()),
            }
        }
    };
    let slice = SliceSpec { free, fixed, ranges: req.range, resolution: [req.resolution, req.resolution] };
    let grid = slice_grid(&p, &slice)?;
    let mut csv = Vec::new();
    grid.write_csv(&p.axis_names, &mut csv).map_err(|e| RunError::io(out.dir().join("slice.csv"), e))?;
    out.write("slice.csv", &csv)?;
    out.write_json("slice.json", &SliceSidecar { meta: grid.metadata(&p.axis_names), figure: req.figure, csv: "slice.csv" })
}

#[derive(Serialize)]
struct FixedPointsRecord<'a> {
    cell: String,
    currents: (f64, f64),
    seeds: usize,
    points: &'a [washboard_core::stationary::FixedPoint],
}

#[derive(Serialize)]
struct CriticalRecord {
    cell: String,
    currents: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    uniaxial: Option<washboard_core::stationary::CriticalCurrent>,
    lowest_minimum: Option<Vec<f64>>,
    lowest_minimum_energy: Option<f64>,
    barrier: Option<f64>,
}

fn run_stationary(spec: &RunSpec, cell: &FrustrationCell, out: &mut Outputs) -> Result<(), RunError> {
    let p = potential(spec, cell)?;
    let mut seeds = seed_grid(&p, spec.seed_grid);
    if let Some(init) = &spec.init {
        if init.len() != p.n_vars() {
            return Err(ValidationError::new("init", format!("needs {} components", p.n_vars())).into());
        }
        seeds.push(init.clone());
    }
    let points = scan_fixed_points(&p, &seeds, &NewtonOptions::default());
    out.write_json(
        "fixed_points.json",
        &FixedPointsRecord { cell: cell.name.clone(), currents: p.currents, seeds: seeds.len(), points: &points },
    )?;
    let minimum = points.iter().find(|f| f.classification == Classification::Minimum);
    let is_half = spec.cell.builtin() == Some(CellId::Half);
    out.write_json(
        "critical.json",
        &CriticalRecord {
            cell: cell.name.clone(),
            currents: p.currents,
            uniaxial: is_half.then(critical_current_uniaxial),
            lowest_minimum: minimum.map(|m| m.x.clone()),
            lowest_minimum_energy: minimum.map(|m| m.energy),
            barrier: minimum.and_then(|m| barrier_height(&p, m, &points)),
        },
    )
}

#[derive(Serialize)]
struct BoundarySummary {
    r_points: usize,
    i_max_at_0: f64,
    i_max_at_1: f64,
    monotone: bool,
    max_method_gap: f64,
}

fn run_boundary(spec: &RunSpec, out: &mut Outputs) -> Result<(), RunError> {
    if spec.cell.builtin() != Some(CellId::Half) {
        return Err(ValidationError::new("f", "the pinned boundary is available for f = 1/2 only").into());
    }
    let grid = uniform_r_grid(spec.r_grid);
    let disc = pinned_boundary(&grid)?;
    let cont = pinned_boundary_continuation(&grid)?;
    let mut csv = Vec::new();
    let path = out.dir().join("boundary.csv");
    disc.write_csv(&mut csv, true).map_err(|e| RunError::io(&path, e))?;
    cont.write_csv(&mut csv, false).map_err(|e| RunError::io(&path, e))?;
    out.write("boundary.csv", &csv)?;
    let gap = disc.samples.iter().zip(&cont.samples).map(|(a, b)| (a.i_max - b.i_max).abs()).fold(0.0, f64::max);
    out.write_json(
        "boundary.json",
        &BoundarySummary {
            r_points: grid.len(),
            i_max_at_0: disc.samples[0].i_max,
            i_max_at_1: disc.samples[disc.samples.len() - 1].i_max,
            monotone: disc.is_monotone(0.0),
            max_method_gap: gap,
        },
    )
}

#[derive(Serialize)]
struct SeedSummary {
    seed: u64,
    file: String,
    mean_voltage: Vec<f64>,
    dt_used: f64,
    retries: u32,
}

#[derive(Serialize)]
struct SimulationSummary {
    cell: String,
    scheme: Scheme,
    window: f64,
    runs: Vec<SeedSummary>,
    ensemble_mean_voltage: Vec<f64>,
}

fn run_simulate(spec: &RunSpec, cell: &FrustrationCell, out: &mut Outputs) -> Result<(), RunError> {
    let p = potential(spec, cell)?;
    let n = p.n_vars();
    let init = match &spec.init {
        Some(v) if v.len() != n => return Err(ValidationError::new("init", format!("needs {n} components")).into()),
        Some(v) => v.clone(),
        None if spec.cell.builtin() == Some(CellId::Half) => vec![0.0, 0.0, -FRAC_PI_2],
        None => vec![0.0; n],
    };
    let seeds: Vec<u64> = (0..spec.seeds as u64).map(|k| spec.seed + k).collect();
    out.manifest.seeds = seeds.clone();
    let state = State::at_rest(init);
    let results: Vec<Result<Trajectory, washboard_core::Error>> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = SimulationConfig {
                scheme: spec.scheme,
                beta_c: spec.beta_c,
                dt: spec.dt,
                n_steps: spec.steps,
                seed,
                record_stride: spec.stride,
            };
            simulate_with_retry(&p, &cfg, &state, 3)
        })
        .collect();

    let mut runs = Vec::with_capacity(seeds.len());
    for (seed, result) in seeds.iter().zip(results) {
        let traj = result?;
        let file = format!("traj_seed_{seed:04}.csv");
        let mut csv = Vec::new();
        traj.write_csv(&p.axis_names, &mut csv).map_err(|e| RunError::io(out.dir().join(&file), e))?;
        out.write(&file, &csv)?;
        runs.push(SeedSummary {
            seed: *seed,
            mean_voltage: mean_voltage(&traj, spec.window)?,
            dt_used: traj.dt_used,
            retries: traj.retries,
            file,
        });
    }
    let ensemble = (0..n).map(|i| runs.iter().map(|r| r.mean_voltage[i]).sum::<f64>() / runs.len() as f64).collect();
    out.write_json(
        "summary.json",
        &SimulationSummary { cell: cell.name.clone(), scheme: spec.scheme, window: spec.window, runs, ensemble_mean_voltage: ensemble },
    )
}

/// One-line human summary of a finished run.
pub fn describe(manifest: &Manifest) -> String {
    let name = format!("{:?}", manifest.spec.subcommand).to_lowercase();
    let mut s = format!("{name}: wrote {} files to {}", manifest.files.len(), manifest.spec.out.display());
    if let Some(t) = manifest.wall_time_s {
        let _ = write!(s, " in {t:.2}s");
    }
    s
}
