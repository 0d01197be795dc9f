use super::{kinetic, Trajectory};
use crate::error::{Error, Result};
use crate::potential::TiltedPotential;

/// Time-averaged `dx/dτ` over the trailing `window` fraction of the
/// frames. Uses recorded velocities when present, otherwise the net
/// displacement across the window.
pub fn mean_voltage(traj: &Trajectory, window: f64) -> Result<Vec<f64>> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidArgument(format!("window {window} outside (0, 1]")));
    }
    let frames = traj.len();
    if frames < 2 {
        return Err(Error::EmptyTrajectory);
    }
    let span = ((window * frames as f64).ceil() as usize).clamp(2, frames);
    let start = frames - span;
    let n = traj.positions[0].len();
    Ok(match &traj.velocities {
        Some(vel) => (0..n)
            .map(|i| vel[start..].iter().map(|v| v[i]).sum::<f64>() / span as f64)
            .collect(),
        None => {
            let dt = traj.times[frames - 1] - traj.times[start];
            (0..n)
                .map(|i| (traj.positions[frames - 1][i] - traj.positions[start][i]) / dt)
                .collect()
        }
    })
}

/// `H(t) = Σ β_c v²/2 + U(x(t))` per recorded frame.
pub fn energy_series(traj: &Trajectory, p: &TiltedPotential, beta_c: f64) -> Result<Vec<f64>> {
    let vel = traj.velocities.as_ref().ok_or(Error::MissingVelocities)?;
    traj.positions
        .iter()
        .zip(vel)
        .map(|(x, v)| Ok(kinetic(v, beta_c) + p.energy(x)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, Scheme, SimulationConfig, State};
    use crate::{build_potential, builtin_cell, derive_transform, CellId};

    fn single(i: f64) -> TiltedPotential {
        let cell = builtin_cell(CellId::SingleJunction);
        let (_, t) = derive_transform(&cell).unwrap();
        build_potential(&cell, &t, i, 0.0, 0.0).unwrap()
    }

    #[test]
    fn window_and_length_checks() {
        let p = single(0.0);
        let t = simulate(&p, &SimulationConfig { n_steps: 0, ..Default::default() }, &State::at_rest(vec![0.0])).unwrap();
        assert_eq!(mean_voltage(&t, 0.5), Err(Error::EmptyTrajectory));
        assert!(mean_voltage(&t, 0.0).is_err());
        assert!(mean_voltage(&t, 1.5).is_err());
        assert_eq!(energy_series(&t, &p, 1.0), Err(Error::MissingVelocities));
    }

    #[test]
    fn pinned_junction_has_no_voltage() {
        let p = single(0.5);
        let cfg = SimulationConfig { n_steps: 100_000, record_stride: 100, ..Default::default() };
        let t = simulate(&p, &cfg, &State::at_rest(vec![0.0])).unwrap();
        assert!((t.positions.last().unwrap()[0] - 0.5f64.asin()).abs() < 1e-6);
        assert!(mean_voltage(&t, 0.5).unwrap()[0].abs() < 1e-8);
    }

    #[test]
    fn energy_series_matches_recorded() {
        let p = single(0.2);
        let cfg = SimulationConfig { scheme: Scheme::Underdamped, beta_c: 3.0, n_steps: 1000, record_stride: 50, ..Default::default() };
        let t = simulate(&p, &cfg, &State { x: vec![1.0], v: Some(vec![0.5]) }).unwrap();
        assert_eq!(energy_series(&t, &p, 3.0).unwrap(), t.energy.clone().unwrap());
        assert!(mean_voltage(&t, 1.0).unwrap()[0].is_finite());
    }
}
