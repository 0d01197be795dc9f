//! Time integration of the phase dynamics in the transformed variables.
//!
//! * underdamped: `β_c x″ = −x′ − ∇U + η`, stochastic Heun on `(x, v)`;
//! * overdamped: `x′ = −∇U + η`, Euler–Maruyama;
//! * hamiltonian: `β_c x″ = −∇U`, velocity Verlet.
//!
//! `η` is white noise with covariance `noise_cov`, applied as increments
//! `L √dt N(0, I)` with `L Lᵀ = noise_cov`. Time is in units of `τ`.
//! Every trajectory owns its own ChaCha stream seeded from the config, so
//! runs are bit-for-bit reproducible independent of scheduling.

mod observables;

use std::io::{self, Write};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::potential::TiltedPotential;

pub use observables::{energy_series, mean_voltage};

const BLOWUP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Underdamped,
    Overdamped,
    Hamiltonian,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "underdamped" => Ok(Scheme::Underdamped),
            "overdamped" => Ok(Scheme::Overdamped),
            "hamiltonian" => Ok(Scheme::Hamiltonian),
            other => Err(Error::InvalidConfig(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub scheme: Scheme,
    /// Stewart–McCumber parameter; ignored by the overdamped scheme.
    pub beta_c: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub seed: u64,
    pub record_stride: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { scheme: Scheme::Overdamped, beta_c: 0.0, dt: 1e-3, n_steps: 10_000, seed: 0, record_stride: 1 }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if self.record_stride == 0 {
            return bad("record_stride must be at least 1");
        }
        if !(self.beta_c.is_finite() && self.beta_c >= 0.0) {
            return bad("beta_c must be non-negative");
        }
        if self.scheme != Scheme::Overdamped && self.beta_c == 0.0 {
            return bad("underdamped and hamiltonian schemes need beta_c > 0");
        }
        Ok(())
    }

    /// Number of recorded frames, including the initial state.
    pub fn n_frames(&self) -> usize {
        self.n_steps / self.record_stride + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: Vec<f64>,
    /// `dx/dτ`; absent means start at rest.
    pub v: Option<Vec<f64>>,
}

impl State {
    pub fn at_rest(x: Vec<f64>) -> Self {
        State { x, v: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub scheme: Scheme,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    /// Recorded for the underdamped and hamiltonian schemes.
    pub velocities: Option<Vec<Vec<f64>>>,
    /// `H = Σ β_c v²/2 + U` per frame where velocities exist.
    pub energy: Option<Vec<f64>>,
    pub seed_used: u64,
    pub dt_used: f64,
    /// Number of step halvings that were needed.
    pub retries: u32,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Columns `t, x…, v…`, full precision.
    pub fn write_csv<W: Write>(&self, axis_names: &[String], mut w: W) -> io::Result<()> {
        let n = self.positions.first().map_or(0, Vec::len);
        let name = |i: usize| axis_names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
        let mut head = vec!["t".to_string()];
        head.extend((0..n).map(name));
        if self.velocities.is_some() {
            head.extend((0..n).map(|i| format!("v_{}", name(i))));
        }
        if self.energy.is_some() {
            head.push("H".into());
        }
        writeln!(w, "{}", head.join(","))?;
        let mut line = String::new();
        for (f, t) in self.times.iter().enumerate() {
            use std::fmt::Write as _;
            line.clear();
            let _ = write!(line, "{t:.16e}");
            for v in &self.positions[f] {
                let _ = write!(line, ",{v:.16e}");
            }
            if let Some(vel) = &self.velocities {
                for v in &vel[f] {
                    let _ = write!(line, ",{v:.16e}");
                }
            }
            if let Some(e) = &self.energy {
                let _ = write!(line, ",{:.16e}", e[f]);
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// Deterministic force field for the integrators.
pub trait ForceField {
    fn dim(&self) -> usize;
    fn energy(&self, x: &[f64]) -> f64;
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);
}

impl ForceField for TiltedPotential {
    fn dim(&self) -> usize {
        self.n_vars()
    }

    fn energy(&self, x: &[f64]) -> f64 {
        self.energy_unchecked(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        TiltedPotential::gradient_into(self, x, out)
    }
}

/// `U ≡ 0`, leaving pure diffusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroForce {
    pub dim: usize,
}

impl ForceField for ZeroForce {
    fn dim(&self) -> usize {
        self.dim
    }

    fn energy(&self, _: &[f64]) -> f64 {
        0.0
    }

    fn gradient_into(&self, _: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// `L` with `L Lᵀ = cov`; lower triangular, and the elementwise square
/// root for diagonal input.
pub fn noise_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    linalg::cholesky_psd(cov)
}

pub fn simulate(p: &TiltedPotential, cfg: &SimulationConfig, init: &State) -> Result<Trajectory> {
    if cfg.scheme == Scheme::Hamiltonian && p.noise_cov.iter().any(|c| *c != 0.0) {
        return Err(Error::InvalidConfig("hamiltonian scheme needs zero noise".into()));
    }
    simulate_field(p, &p.noise_cov, cfg, init)
}

/// Retry with `dt` halved (steps and stride doubled, so frame times are
/// kept) after a blowup, at most `max_retries` times.
pub fn simulate_with_retry(p: &TiltedPotential, cfg: &SimulationConfig, init: &State, max_retries: u32) -> Result<Trajectory> {
    let mut cfg = cfg.clone();
    let mut attempt = 0;
    loop {
        match simulate(p, &cfg, init) {
            Err(Error::NumericalBlowup { .. }) if attempt < max_retries => {
                attempt += 1;
                cfg.dt /= 2.0;
                cfg.n_steps *= 2;
                cfg.record_stride *= 2;
            }
            Ok(mut t) => {
                t.retries = attempt;
                return Ok(t);
            }
            Err(e) => return Err(e),
        }
    }
}

fn blown(v: &[f64]) -> bool {
    v.iter().any(|c| !c.is_finite() || c.abs() > BLOWUP)
}

struct Noise {
    factor: Option<DMatrix<f64>>,
    rng: ChaCha8Rng,
    z: Vec<f64>,
}

impl Noise {
    fn new(cov: &DMatrix<f64>, dt: f64, seed: u64) -> Result<Self> {
        let factor = if cov.iter().all(|c| *c == 0.0) { None } else { Some(noise_factor(cov)? * dt.sqrt()) };
        Ok(Noise { z: vec![0.0; cov.nrows()], factor, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    /// Writes one increment `L √dt N(0, I)` into `out`.
    fn sample(&mut self, out: &mut [f64]) {
        let Some(l) = &self.factor else {
            out.fill(0.0);
            return;
        };
        for z in self.z.iter_mut() {
            *z = StandardNormal.sample(&mut self.rng);
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..=i).map(|j| l[(i, j)] * self.z[j]).sum();
        }
    }
}

/// Integrate an arbitrary force field with the given noise covariance.
pub fn simulate_field<F: ForceField>(field: &F, cov: &DMatrix<f64>, cfg: &SimulationConfig, init: &State) -> Result<Trajectory> {
    cfg.validate()?;
    let n = field.dim();
    if init.x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: init.x.len() });
    }
    if let Some(v) = &init.v {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
    }
    if cov.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: cov.nrows() });
    }
    let mut noise = Noise::new(cov, cfg.dt, cfg.seed)?;
    let dt = cfg.dt;
    let with_v = cfg.scheme != Scheme::Overdamped;
    let frames = cfg.n_frames();

    let mut x = init.x.clone();
    let mut v = init.v.clone().unwrap_or_else(|| vec![0.0; n]);
    let mut times = Vec::with_capacity(frames);
    let mut positions = Vec::with_capacity(frames);
    let mut velocities = with_v.then(|| Vec::with_capacity(frames));
    let record = |t: f64, x: &[f64], v: &[f64], times: &mut Vec<f64>, pos: &mut Vec<Vec<f64>>, vel: &mut Option<Vec<Vec<f64>>>| {
        times.push(t);
        pos.push(x.to_vec());
        if let Some(vel) = vel {
            vel.push(v.to_vec());
        }
    };
    record(0.0, &x, &v, &mut times, &mut positions, &mut velocities);

    let mut g = vec![0.0; n];
    let mut g2 = vec![0.0; n];
    let mut dw = vec![0.0; n];
    let mut xp = vec![0.0; n];
    let mut vp = vec![0.0; n];
    let beta = cfg.beta_c;
    if cfg.scheme == Scheme::Hamiltonian {
        field.gradient_into(&x, &mut g);
    }

    for step in 1..=cfg.n_steps {
        match cfg.scheme {
            Scheme::Overdamped => {
                field.gradient_into(&x, &mut g);
                noise.sample(&mut dw);
                for i in 0..n {
                    x[i] += -dt * g[i] + dw[i];
                }
            }
            Scheme::Underdamped => {
                // Heun predictor-corrector; the additive noise increment is
                // shared by both stages.
                field.gradient_into(&x, &mut g);
                noise.sample(&mut dw);
                for i in 0..n {
                    xp[i] = x[i] + dt * v[i];
                    vp[i] = v[i] + dt * (-v[i] - g[i]) / beta + dw[i] / beta;
                }
                field.gradient_into(&xp, &mut g2);
                for i in 0..n {
                    let a0 = (-v[i] - g[i]) / beta;
                    let a1 = (-vp[i] - g2[i]) / beta;
                    x[i] += 0.5 * dt * (v[i] + vp[i]);
                    v[i] += 0.5 * dt * (a0 + a1) + dw[i] / beta;
                }
            }
            Scheme::Hamiltonian => {
                // g holds ∇U at the current x on entry.
                for i in 0..n {
                    v[i] -= 0.5 * dt * g[i] / beta;
                    x[i] += dt * v[i];
                }
                field.gradient_into(&x, &mut g);
                for i in 0..n {
                    v[i] -= 0.5 * dt * g[i] / beta;
                }
            }
        }
        if blown(&x) || (with_v && blown(&v)) {
            return Err(Error::NumericalBlowup { step });
        }
        if step % cfg.record_stride == 0 {
            record(step as f64 * dt, &x, &v, &mut times, &mut positions, &mut velocities);
        }
    }

    let energy = velocities.as_ref().map(|vel| {
        positions
            .iter()
            .zip(vel)
            .map(|(x, v)| kinetic(v, beta) + field.energy(x))
            .collect()
    });
    Ok(Trajectory {
        scheme: cfg.scheme,
        times,
        positions,
        velocities,
        energy,
        seed_used: cfg.seed,
        dt_used: dt,
        retries: 0,
    })
}

fn kinetic(v: &[f64], beta_c: f64) -> f64 {
    0.5 * beta_c * v.iter().map(|c| c * c).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{builtin_cell, CellId};
    use crate::potential::build_potential;
    use crate::transform::derive_transform;

    fn potential(id: CellId, ix: f64, iy: f64, omega: f64) -> TiltedPotential {
        let cell = builtin_cell(id);
        let (_, t) = derive_transform(&cell).unwrap();
        build_potential(&cell, &t, ix, iy, omega).unwrap()
    }

    #[test]
    fn noise_factor_examples() {
        let l = noise_factor(&(DMatrix::identity(3, 3) * 0.04)).unwrap();
        assert!(linalg::max_abs(&(l - DMatrix::identity(3, 3) * 0.2)) < 1e-15);
        let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 2.0, 2.0 / 3.0]));
        let l = noise_factor(&cov).unwrap();
        let expect = [1.0, 1.0, 2f64.sqrt(), (2.0f64 / 3.0).sqrt()];
        for i in 0..4 {
            assert!((l[(i, i)] - expect[i]).abs() < 1e-15);
        }
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(noise_factor(&bad), Err(Error::NotPsd));
        let corr = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let l = noise_factor(&corr).unwrap();
        assert!(linalg::max_abs(&(&l * l.transpose() - corr)) < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut c = SimulationConfig { dt: -1.0, ..Default::default() };
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        c.dt = 1e-3;
        c.scheme = Scheme::Underdamped;
        assert!(c.validate().is_err());
        c.beta_c = 1.0;
        assert!(c.validate().is_ok());
        c.record_stride = 0;
        assert!(c.validate().is_err());
        let p = potential(CellId::Half, 0.0, 0.0, 0.1);
        let cfg = SimulationConfig { scheme: Scheme::Hamiltonian, beta_c: 1.0, ..Default::default() };
        assert!(matches!(simulate(&p, &cfg, &State::at_rest(vec![0.0; 3])), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn frames_follow_stride() {
        let p = potential(CellId::Half, 0.1, 0.0, 0.1);
        let cfg = SimulationConfig { n_steps: 100, record_stride: 7, ..Default::default() };
        let t = simulate(&p, &cfg, &State::at_rest(vec![0.0; 3])).unwrap();
        assert_eq!(t.len(), 15);
        assert!((t.times[14] - 98e-3).abs() < 1e-15);
        assert!(t.velocities.is_none() && t.energy.is_none());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let p = potential(CellId::Third, 0.3, 0.1, 0.5);
        let cfg = SimulationConfig { scheme: Scheme::Underdamped, beta_c: 0.5, n_steps: 2000, seed: 42, record_stride: 10, ..Default::default() };
        let init = State::at_rest(vec![0.1; 4]);
        let a = simulate(&p, &cfg, &init).unwrap();
        let b = simulate(&p, &cfg, &init).unwrap();
        assert_eq!(a, b);
        let c = simulate(&p, &SimulationConfig { seed: 43, ..cfg }, &init).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn at_rest_in_minimum_stays_put() {
        let p = potential(CellId::SingleJunction, 0.0, 0.0, 0.0);
        let cfg = SimulationConfig { scheme: Scheme::Underdamped, beta_c: 2.0, n_steps: 500, ..Default::default() };
        let t = simulate(&p, &cfg, &State::at_rest(vec![0.0])).unwrap();
        let e = t.energy.unwrap();
        assert!(e.iter().all(|h| *h == e[0]));
    }

    #[test]
    fn blowup_is_reported_and_retried() {
        // The tilt moves x by 1e7 per step, crossing the 1e8 bound at step 10.
        let p = potential(CellId::SingleJunction, 1e7, 0.0, 0.0);
        let cfg = SimulationConfig { dt: 1.0, n_steps: 100, ..Default::default() };
        let err = simulate(&p, &cfg, &State::at_rest(vec![0.0])).unwrap_err();
        assert!(matches!(err, Error::NumericalBlowup { step: 10 }), "{err:?}");
        assert!(matches!(simulate_with_retry(&p, &cfg, &State::at_rest(vec![0.0]), 3), Err(Error::NumericalBlowup { .. })));

        let p = potential(CellId::SingleJunction, 0.5, 0.0, 0.0);
        let ok = simulate_with_retry(&p, &SimulationConfig { n_steps: 10, ..Default::default() }, &State::at_rest(vec![0.0]), 3).unwrap();
        assert_eq!(ok.retries, 0);
    }

    #[test]
    fn dimension_checked() {
        let p = potential(CellId::Half, 0.0, 0.0, 0.0);
        let r = simulate(&p, &SimulationConfig::default(), &State::at_rest(vec![0.0; 2]));
        assert_eq!(r, Err(Error::DimensionMismatch { expected: 3, found: 2 }));
    }

    #[test]
    fn csv_columns() {
        let p = potential(CellId::Half, 0.0, 0.0, 0.0);
        let cfg = SimulationConfig { scheme: Scheme::Hamiltonian, beta_c: 1.0, n_steps: 3, ..Default::default() };
        let t = simulate(&p, &cfg, &State::at_rest(vec![0.1, 0.0, -1.0])).unwrap();
        let mut out = Vec::new();
        t.write_csv(&p.axis_names, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,x,y,z,v_x,v_y,v_z,H");
        assert_eq!(text.lines().count(), 5);
    }
}
