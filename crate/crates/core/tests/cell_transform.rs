use washboard_core::cell::{parse_cell, validate_cell, write_cell};
use washboard_core::linalg::max_abs;
use washboard_core::transform::{compute_target, factor_transform, verify_exactness, TransformSource};
use washboard_core::{build_potential, builtin_cell, derive_transform, CellId, Error};

const ALL: [CellId; 3] = [CellId::Half, CellId::Third, CellId::SingleJunction];

#[test]
fn builtins_survive_text_round_trip() {
    for id in ALL {
        let cell = builtin_cell(id);
        let back = parse_cell(&write_cell(&cell)).unwrap();
        assert_eq!(back, cell);
        assert!(validate_cell(&back).all_passed(), "{}", cell.name);
    }
}

#[test]
fn custom_cell_without_canonical_matrix_uses_cholesky() {
    // A two-junction loop written by hand: one variable per junction pair.
    let text = "
        name = ladder
        frustration = 1/2
        coupling = 1
        drive_x = 1
        drive_y = none
        labels = a b
        offsets = 0 pi/2

        [omega]
        1 0
        0 1
        [phi_dy]
        1 0
        0 1
        [noise]
        1 0
        0 1
    ";
    let cell = parse_cell(text).unwrap();
    let (s, t) = derive_transform(&cell).unwrap();
    assert_eq!(t.source, TransformSource::Cholesky);
    assert!(max_abs(&(t.d.transpose() * &t.d - &s.s)) < 1e-14);
    assert!(verify_exactness(&cell, &t).passed);
    let p = build_potential(&cell, &t, 0.3, 0.0, 0.0).unwrap();
    assert_eq!(p.n_vars(), 2);
    assert_eq!(p.axis_names, vec!["x1".to_string(), "x2".to_string()]);
}

#[test]
fn malformed_cell_reports_line() {
    let err = parse_cell("name = bad\nfrustration = 1/2\n[omega]\n1 0\n0 x\n").unwrap_err();
    assert!(matches!(err, Error::CellFormat { line: 5, .. }), "{err:?}");
}

#[test]
fn sign_flip_passes_validation_but_fails_the_transform() {
    let mut cell = builtin_cell(CellId::Half);
    cell.omega[(0, 0)] = 1.0;
    let report = validate_cell(&cell);
    assert!(report.check("omega omega^T invertible").unwrap().passed);
    assert!(report.check("flux identity 0").unwrap().passed);
    let s = compute_target(&cell).unwrap();
    assert!(factor_transform(&s, cell.canonical_d.as_ref()).is_err());
    assert!(derive_transform(&cell).is_err());
}
