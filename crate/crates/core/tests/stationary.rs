mod common;

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use washboard_core::stationary::cubic::boundary_cubic;
use washboard_core::stationary::half::{auxiliary_check, critical_current_closed_form, uniaxial_relation};
use washboard_core::stationary::{
    classify, find_fixed_point, find_minimum, scan_fixed_points, seed_grid, Classification, NewtonOptions,
};
use washboard_core::linalg::sym_eigenvalues;
use washboard_core::{CellId, Error, TiltedPotential};

use common::{inf_norm, potential};

fn has_minimum(p: &TiltedPotential, seeds: &[Vec<f64>]) -> bool {
    seeds.iter().any(|s| matches!(find_minimum(p, s), Ok(m) if m.classification != Classification::Saddle))
}

#[test]
fn no_minimum_above_critical_current() {
    let p = potential(CellId::Half, 0.9, 0.0, 0.0);
    let seeds = seed_grid(&p, 5);
    for s in &seeds {
        assert!(matches!(find_minimum(&p, s), Err(Error::NoConvergence { .. })));
    }
    // Newton still finds fixed points here, but none of them is stable.
    let points = scan_fixed_points(&p, &seeds, &NewtonOptions::default());
    assert!(!points.is_empty());
    assert!(points.iter().all(|f| f.classification != Classification::Minimum));
}

#[test]
fn island_of_stability_along_x() {
    let ic = critical_current_closed_form();
    let probe = potential(CellId::Half, 0.0, 0.0, 0.0);
    let seeds = seed_grid(&probe, 5);
    for i in [0.2, 0.5, 0.8, ic - 1e-3] {
        assert!(has_minimum(&probe.with_currents(i, 0.0), &seeds), "I = {i}");
    }
    for i in [ic + 1e-3, 0.85, 1.0] {
        assert!(!has_minimum(&probe.with_currents(i, 0.0), &seeds), "I = {i}");
    }
}

#[test]
fn swapped_drive_has_same_critical_current() {
    let ic = critical_current_closed_form();
    let probe = potential(CellId::Half, 0.0, 0.0, 0.0);
    let seeds = seed_grid(&probe, 5);
    assert!(has_minimum(&probe.with_currents(0.0, ic - 1e-3), &seeds));
    assert!(!has_minimum(&probe.with_currents(0.0, ic + 1e-3), &seeds));
}

#[test]
fn uniaxial_minima_satisfy_current_relation() {
    for i in [0.1, 0.3, 0.4142, 0.6, 0.8] {
        let p = potential(CellId::Half, i, 0.0, 0.0);
        let m = find_minimum(&p, &[0.0, 0.0, -FRAC_PI_2]).unwrap();
        assert_eq!(m.classification, Classification::Minimum);
        assert!(m.residual < 1e-10);
        assert!(m.x[1].abs() < 1e-10);
        assert!((uniaxial_relation(m.x[0]) - i).abs() < 1e-8, "I = {i}");
        let aux = auxiliary_check(&[m.x[0], m.x[1], m.x[2]], i, 0.0);
        assert!(aux.tan_relation.abs() < 1e-10);
        assert!(aux.current_relation.unwrap().abs() < 1e-8);
    }
}

#[test]
fn biaxial_minima_satisfy_ratio_relation() {
    for (ix, iy) in [(0.5, 0.2), (0.7, 0.35), (0.6, 0.6)] {
        let p = potential(CellId::Half, ix, iy, 0.0);
        let m = find_minimum(&p, &[0.0, 0.0, -FRAC_PI_2]).unwrap();
        let aux = auxiliary_check(&[m.x[0], m.x[1], m.x[2]], ix, iy);
        assert!(aux.current_ratio.abs() < 1e-9);
        assert!(aux.current_relation.unwrap().abs() < 1e-8);
        // The squared-ratio form does not hold at genuine fixed points,
        // except trivially on the diagonal.
        if ix != iy {
            assert!(aux.squared_ratio_form.abs() > 1e-3);
        }
    }
}

#[test]
fn cubic_vanishes_at_uniaxial_critical_point() {
    let ic = critical_current_closed_form();
    assert!(boundary_cubic(ic, 0.0).eval(2.0 * SQRT_2 - 3.0).abs() < 1e-10);
}

#[test]
fn fixed_points_are_certified() {
    for (id, ix, iy) in [(CellId::Half, 0.3, 0.1), (CellId::Third, 0.2, 0.1)] {
        let p = potential(id, ix, iy, 0.0);
        let points = scan_fixed_points(&p, &seed_grid(&p, 3), &NewtonOptions::default());
        assert!(!points.is_empty());
        for f in points {
            assert!(f.residual < 1e-10);
            assert!(inf_norm(&p.gradient(&f.x).unwrap()) < 1e-10);
            let eig = sym_eigenvalues(&p.hessian(&f.x).unwrap());
            assert_eq!(f.classification, classify(&eig, 1e-6));
        }
    }
}

#[test]
fn third_cell_ground_state_at_origin() {
    let p = potential(CellId::Third, 0.0, 0.0, 0.0);
    let f = find_fixed_point(&p, &[0.1, -0.1, 0.05, 0.1]).unwrap();
    assert!(f.x.iter().all(|v| v.abs() < 1e-10), "{:?}", f.x);
    assert_eq!(f.classification, Classification::Minimum);
}
