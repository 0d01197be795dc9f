//! Run specification: a strict TOML document or the equivalent CLI flags.
//!
//! Units: currents per cell in units of the junction critical current,
//! angles in radians, time in units of τ, `omega` is `Ω = sqrt(2 k_B T/E_J)`.
//! Numbers may be written as expressions such as `"-pi/2"`.
//!
//! ```toml
//! subcommand = "slice"        # cell | derive | slice | stationary | boundary | simulate
//! f = "1/2"                   # 1/2, 1/3 or single_junction; or cell_file = "my.cell"
//! I_x = 0.849942
//! I_y = 0.3999
//! omega = 0.0
//! beta_c = 0.0
//! dt = 1e-3
//! steps = 10000
//! seed = 0                    # first seed; seeds = 10 runs seed..seed+9
//! seeds = 1
//! stride = 10                 # record every stride-th step
//! scheme = "overdamped"       # underdamped | overdamped | hamiltonian
//! noise = "as_written"        # as_written | isotropic
//! init = [0.0, 0.0, "-pi/2"]
//! window = 0.5                # trailing fraction for mean voltages
//! r_grid = 101                # boundary: number of R points on [0, 1]
//! seed_grid = 5               # stationary: Newton seeds per axis
//! figure = 7                  # slice presets for figures 3-8
//! fix = { z = "-pi" }
//! free = ["x", "y"]
//! range = [[-4.44, 4.44], [-4.44, 4.44]]
//! resolution = 101
//! out = "out"
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use washboard_core::dynamics::Scheme;
use washboard_core::{expr, CellId, NoiseModel};

use crate::error::{ParseError, RunError, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Cell,
    Derive,
    Slice,
    Stationary,
    Boundary,
    Simulate,
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "cell" => Subcommand::Cell,
            "derive" => Subcommand::Derive,
            "slice" => Subcommand::Slice,
            "stationary" => Subcommand::Stationary,
            "boundary" => Subcommand::Boundary,
            "simulate" => Subcommand::Simulate,
            _ => return Err(format!("unknown subcommand {s:?}")),
        })
    }
}

/// A number or an expression string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Expr(String),
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num::Float(v)
    }
}

impl Num {
    fn value(&self, key: &str) -> Result<f64, ValidationError> {
        match self {
            Num::Int(i) => Ok(*i as f64),
            Num::Float(f) => Ok(*f),
            Num::Expr(s) => expr::eval(s).map_err(|e| ValidationError::new(key, e.to_string())),
        }
    }
}

/// Document as written, before defaults and validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    pub subcommand: Option<String>,
    pub f: Option<String>,
    pub cell_file: Option<PathBuf>,
    #[serde(rename = "I_x")]
    pub i_x: Option<Num>,
    #[serde(rename = "I_y")]
    pub i_y: Option<Num>,
    pub omega: Option<Num>,
    pub beta_c: Option<Num>,
    pub dt: Option<Num>,
    pub steps: Option<i64>,
    pub seed: Option<i64>,
    pub seeds: Option<i64>,
    pub stride: Option<i64>,
    pub scheme: Option<String>,
    pub noise: Option<String>,
    pub init: Option<Vec<Num>>,
    pub window: Option<Num>,
    pub r_grid: Option<i64>,
    pub seed_grid: Option<i64>,
    pub figure: Option<i64>,
    pub fix: Option<BTreeMap<String, Num>>,
    pub free: Option<Vec<String>>,
    pub range: Option<Vec<Vec<Num>>>,
    pub resolution: Option<i64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellSource {
    Builtin(String),
    File(PathBuf),
}

impl CellSource {
    pub fn builtin(&self) -> Option<CellId> {
        match self {
            CellSource::Builtin(s) => s.parse().ok(),
            CellSource::File(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRequest {
    /// Axis names or 1-based indices; resolved against the cell.
    pub fix: Vec<(String, f64)>,
    pub free: Option<[String; 2]>,
    pub range: Option<[(f64, f64); 2]>,
    pub resolution: usize,
    pub figure: Option<u8>,
}

/// Validated specification with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub subcommand: Subcommand,
    pub cell: CellSource,
    pub i_x: f64,
    pub i_y: f64,
    pub omega: f64,
    pub beta_c: f64,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub seeds: usize,
    pub stride: usize,
    pub scheme: Scheme,
    pub noise: NoiseModel,
    pub init: Option<Vec<f64>>,
    pub window: f64,
    pub r_grid: usize,
    pub seed_grid: usize,
    pub slice: SliceRequest,
    pub out: PathBuf,
}

/// Slice presets: fixed axis, free axes and currents of the landscape
/// figures for the f = 1/2 cell.
pub fn figure_preset(n: u8) -> Option<(&'static str, f64, [&'static str; 2], f64, f64)> {
    Some(match n {
        3 => ("z", PI / 2.0, ["x", "y"], 0.292893, 0.0),
        4 => ("y", 0.0, ["x", "z"], 0.8485, 0.0),
        5 => ("y", 0.0, ["x", "z"], 0.4142, 0.0),
        6 => ("z", -PI / 2.0, ["x", "y"], 0.828429, 0.0),
        7 => ("z", -PI, ["x", "y"], 0.849942, 0.3999),
        8 => ("z", -PI / 4.0, ["x", "y"], 0.8499, 0.3999),
        _ => return None,
    })
}

fn count(key: &str, v: Option<i64>, default: usize, min: i64) -> Result<usize, ValidationError> {
    match v {
        None => Ok(default),
        Some(n) if n >= min => Ok(n as usize),
        Some(n) => Err(ValidationError::new(key, format!("must be at least {min}, got {n}"))),
    }
}

fn real(key: &str, v: &Option<Num>, default: f64) -> Result<f64, ValidationError> {
    let x = match v {
        Some(n) => n.value(key)?,
        None => default,
    };
    if !x.is_finite() {
        return Err(ValidationError::new(key, "must be finite"));
    }
    Ok(x)
}

impl RawSpec {
    /// Fill defaults and check ranges.
    pub fn validate(&self) -> Result<RunSpec, ValidationError> {
        let subcommand = match &self.subcommand {
            Some(s) => s.parse().map_err(|e: String| ValidationError::new("subcommand", e))?,
            None => return Err(ValidationError::new("subcommand", "is required")),
        };
        let cell = match (&self.f, &self.cell_file) {
            (Some(_), Some(_)) => return Err(ValidationError::new("cell_file", "give either f or cell_file, not both")),
            (_, Some(path)) => CellSource::File(path.clone()),
            (f, None) => {
                let f = f.clone().unwrap_or_else(|| "1/2".into());
                CellId::from_str(&f).map_err(|e| ValidationError::new("f", e.to_string()))?;
                CellSource::Builtin(f)
            }
        };

        let figure = match self.figure {
            None => None,
            Some(n) => {
                let n = u8::try_from(n).ok().filter(|n| figure_preset(*n).is_some());
                match n {
                    Some(n) if cell.builtin() == Some(CellId::Half) => Some(n),
                    Some(_) => return Err(ValidationError::new("figure", "figure presets need f = 1/2")),
                    None => return Err(ValidationError::new("figure", "must be one of 3, 4, 5, 6, 7, 8")),
                }
            }
        };
        let preset = figure.and_then(figure_preset);

        let i_x = real("I_x", &self.i_x, preset.map_or(0.0, |p| p.3))?;
        let i_y = real("I_y", &self.i_y, preset.map_or(0.0, |p| p.4))?;
        let omega = real("omega", &self.omega, 0.0)?;
        if omega < 0.0 {
            return Err(ValidationError::new("omega", "must be non-negative"));
        }
        let beta_c = real("beta_c", &self.beta_c, 0.0)?;
        if beta_c < 0.0 {
            return Err(ValidationError::new("beta_c", "must be non-negative"));
        }
        let dt = real("dt", &self.dt, 1e-3)?;
        if dt <= 0.0 {
            return Err(ValidationError::new("dt", format!("must be positive, got {dt}")));
        }
        let scheme = match self.scheme.as_deref() {
            None => Scheme::Overdamped,
            Some(s) => s.parse().map_err(|_| ValidationError::new("scheme", format!("unknown scheme {s:?}")))?,
        };
        if scheme != Scheme::Overdamped && beta_c == 0.0 {
            return Err(ValidationError::new("beta_c", "underdamped and hamiltonian schemes need beta_c > 0"));
        }
        if scheme == Scheme::Hamiltonian && omega != 0.0 {
            return Err(ValidationError::new("omega", "hamiltonian scheme needs omega = 0"));
        }
        let noise = match self.noise.as_deref() {
            None | Some("as_written") => NoiseModel::AsWritten,
            Some("isotropic") => NoiseModel::Isotropic,
            Some(s) => return Err(ValidationError::new("noise", format!("expected as_written or isotropic, got {s:?}"))),
        };
        let seed = match self.seed {
            None => 0,
            Some(s) => u64::try_from(s).map_err(|_| ValidationError::new("seed", "must be non-negative"))?,
        };
        let window = real("window", &self.window, 0.5)?;
        if !(window > 0.0 && window <= 1.0) {
            return Err(ValidationError::new("window", "must lie in (0, 1]"));
        }
        let init = match &self.init {
            None => None,
            Some(v) => Some(v.iter().map(|n| n.value("init")).collect::<Result<Vec<_>, _>>()?),
        };

        let mut fix: Vec<(String, f64)> = match preset {
            Some((axis, value, ..)) => vec![(axis.to_string(), value)],
            None => Vec::new(),
        };
        if let Some(map) = &self.fix {
            for (k, v) in map {
                let value = v.value(&format!("fix.{k}"))?;
                fix.retain(|(a, _)| a != k);
                fix.push((k.clone(), value));
            }
        }
        let free = match &self.free {
            None => preset.map(|p| [p.2[0].to_string(), p.2[1].to_string()]),
            Some(v) if v.len() == 2 => Some([v[0].clone(), v[1].clone()]),
            Some(_) => return Err(ValidationError::new("free", "needs exactly two axes")),
        };
        let range = match &self.range {
            None => None,
            Some(r) => {
                let pair = |row: &Vec<Num>| -> Result<(f64, f64), ValidationError> {
                    if row.len() != 2 {
                        return Err(ValidationError::new("range", "each range is [lo, hi]"));
                    }
                    let (lo, hi) = (row[0].value("range")?, row[1].value("range")?);
                    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                        return Err(ValidationError::new("range", "needs lo < hi"));
                    }
                    Ok((lo, hi))
                };
                match r.as_slice() {
                    [a, b] => Some([pair(a)?, pair(b)?]),
                    _ => return Err(ValidationError::new("range", "needs one range per free axis")),
                }
            }
        };

        Ok(RunSpec {
            subcommand,
            cell,
            i_x,
            i_y,
            omega,
            beta_c,
            dt,
            steps: count("steps", self.steps, 10_000, 1)?,
            seed,
            seeds: count("seeds", self.seeds, 1, 1)?,
            stride: count("stride", self.stride, 10, 1)?,
            scheme,
            noise,
            init,
            window,
            r_grid: count("r_grid", self.r_grid, 101, 2)?,
            seed_grid: count("seed_grid", self.seed_grid, 5, 1)?,
            slice: SliceRequest { fix, free, range, resolution: count("resolution", self.resolution, 101, 2)?, figure },
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Parse and validate a TOML run specification.
pub fn parse_run_spec(text: &str) -> Result<RunSpec, RunError> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        RunError::Parse(ParseError { line, column, message: e.message().to_string() })
    })?;
    Ok(raw.validate()?)
}
