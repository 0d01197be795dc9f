use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{phase_map_y, FrustrationCell};
use crate::linalg;

const FLUX_POINTS: usize = 100;
const FLUX_TOL: f64 = 1e-12;
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`validate_cell`]. Failures are reported, never raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub cell: String,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckResult { name: name.to_string(), passed, detail: detail.into() });
    }
}

fn dimension_problems(cell: &FrustrationCell) -> Vec<String> {
    let (nv, np) = (cell.n_vars(), cell.n_phases());
    let mut out = Vec::new();
    if cell.phi_dy.shape() != (nv, np) {
        out.push(format!("phi_dy is {:?}, expected {:?}", cell.phi_dy.shape(), (nv, np)));
    }
    if cell.phase_offsets_y.len() != np {
        out.push(format!("{} phase offsets for {np} phases", cell.phase_offsets_y.len()));
    }
    if cell.labels.len() != np {
        out.push(format!("{} labels for {np} phases", cell.labels.len()));
    }
    if cell.axis_names.len() != nv {
        out.push(format!("{} axis names for {nv} variables", cell.axis_names.len()));
    }
    if cell.noise_incidence.nrows() != nv {
        out.push(format!("noise incidence has {} rows for {nv} variables", cell.noise_incidence.nrows()));
    }
    if let Some(d) = &cell.canonical_d {
        if d.shape() != (nv, nv) {
            out.push(format!("canonical D is {:?}, expected {:?}", d.shape(), (nv, nv)));
        }
    }
    if cell.drive_index_x >= nv || cell.drive_index_y.is_some_and(|j| j >= nv) {
        out.push("drive index out of range".to_string());
    }
    for (i, id) in cell.flux_identities.iter().enumerate() {
        if id.coefficients.len() != np {
            out.push(format!("flux identity {i} has {} coefficients", id.coefficients.len()));
        }
    }
    if !(cell.coupling.is_finite() && cell.coupling > 0.0) {
        out.push(format!("coupling {} must be positive", cell.coupling));
    }
    out
}

/// Structural checks on a cell: dimensions, entry ranges, invertibility of
/// `ωωᵀ`, and every flux identity at 100 pseudo-random points.
pub fn validate_cell(cell: &FrustrationCell) -> ValidationReport {
    let mut report = ValidationReport { cell: cell.name.clone(), checks: Vec::new() };

    let problems = dimension_problems(cell);
    let dims_ok = problems.is_empty();
    report.push("dimensions", dims_ok, if dims_ok { "consistent".to_string() } else { problems.join("; ") });

    if cell.f_den >= 2 {
        let n = cell.f_den as usize;
        let ok = cell.n_vars() == n + 1 && cell.n_phases() == 2 * n;
        report.push(
            "variable counts",
            ok,
            format!("n_vars = {} (want {}), n_phases = {} (want {})", cell.n_vars(), n + 1, cell.n_phases(), 2 * n),
        );
    }

    let bad_entries = cell.omega.iter().filter(|v| ![-1.0, 0.0, 1.0].contains(*v)).count();
    report.push("omega entries", bad_entries == 0, format!("{bad_entries} entries outside {{-1, 0, 1}}"));

    let gram = &cell.omega * cell.omega.transpose();
    let cond = linalg::spd_condition(&gram);
    report.push("omega omega^T invertible", cond <= MAX_CONDITION, format!("condition number {cond:.3e}"));

    if !dims_ok {
        for i in 0..cell.flux_identities.len() {
            report.push(&format!("flux identity {i}"), false, "skipped: inconsistent dimensions");
        }
        return report;
    }

    let map = phase_map_y(cell);
    let mut rng = ChaCha8Rng::seed_from_u64(0x00c0_ffee);
    let points: Vec<Vec<f64>> = (0..FLUX_POINTS)
        .map(|_| (0..cell.n_vars()).map(|_| rng.random_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI)).collect())
        .collect();
    for (i, id) in cell.flux_identities.iter().enumerate() {
        let worst = points
            .iter()
            .map(|y| {
                let phi = map.apply(y);
                let lhs: f64 = id.coefficients.iter().zip(&phi).map(|(w, p)| w * p).sum();
                (lhs - id.constant).abs()
            })
            .fold(0.0, f64::max);
        report.push(&format!("flux identity {i}"), worst < FLUX_TOL, format!("max residual {worst:.3e} over {FLUX_POINTS} points"));
    }
    report
}
