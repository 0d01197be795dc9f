//! Plain-text cell schema.
//!
//! ```text
//! # comments start with '#'
//! name        = my-cell
//! frustration = 1/2            # f_num/f_den
//! coupling    = 1/2            # κ, optional (default 1/2)
//! drive_x     = 1              # 1-based variable receiving I_χ
//! drive_y     = 2              # 1-based, or `none`
//! labels      = alpha beta gamma kappa
//! axes        = x y z          # optional names of the x-variables
//! offsets     = pi/2 0 pi/2 0  # c_k, radians
//!
//! [omega]          # n_vars rows × n_phases columns
//! -1 0 1 0
//! ...
//! [phi_dy]         # same shape as omega
//! [noise]          # n_vars rows × n_noise columns
//! [canonical_d]    # optional, n_vars × n_vars
//! [flux]           # optional, one identity per line: w_1 ... w_n = constant
//! 1 1 1 1 = pi
//! ```
//!
//! Every number may be an expression understood by [`crate::expr::eval`].

use std::collections::BTreeMap;
use std::fmt::Write;

use nalgebra::DMatrix;

use super::{FluxIdentity, FrustrationCell};
use crate::error::{Error, Result};
use crate::expr;

fn fmt_err(line: usize, message: impl Into<String>) -> Error {
    Error::CellFormat { line, message: message.into() }
}

fn numbers(line: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| expr::eval(tok).map_err(|e| fmt_err(line, e.to_string())))
        .collect()
}

fn to_matrix(line: usize, name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(fmt_err(line, format!("section [{name}] is empty")));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(fmt_err(line, format!("section [{name}] has rows of unequal length")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

const KEYS: [&str; 8] = ["name", "frustration", "coupling", "drive_x", "drive_y", "labels", "axes", "offsets"];
const SECTIONS: [&str; 5] = ["omega", "phi_dy", "noise", "canonical_d", "flux"];

/// Parse a cell definition. Line numbers in errors are 1-based.
pub fn parse_cell(text: &str) -> Result<FrustrationCell> {
    let mut keys: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut sections: BTreeMap<&str, (usize, Vec<Vec<f64>>)> = BTreeMap::new();
    let mut flux = Vec::new();
    let mut current: Option<&str> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| fmt_err(lineno, "unterminated section header"))?.trim();
            let name = SECTIONS
                .iter()
                .find(|s| **s == name)
                .ok_or_else(|| fmt_err(lineno, format!("unknown section [{name}]")))?;
            if sections.contains_key(name) || (*name == "flux" && current == Some("flux")) {
                return Err(fmt_err(lineno, format!("duplicate section [{name}]")));
            }
            if *name != "flux" {
                sections.insert(name, (lineno, Vec::new()));
            }
            current = Some(name);
            continue;
        }
        match current {
            None => {
                let (k, v) = line.split_once('=').ok_or_else(|| fmt_err(lineno, "expected `key = value`"))?;
                let k = k.trim();
                let key = KEYS.iter().find(|s| **s == k).ok_or_else(|| fmt_err(lineno, format!("unknown key `{k}`")))?;
                if keys.insert(key, (lineno, v.trim())).is_some() {
                    return Err(fmt_err(lineno, format!("duplicate key `{k}`")));
                }
            }
            Some("flux") => {
                let (lhs, rhs) = line.split_once('=').ok_or_else(|| fmt_err(lineno, "flux identity needs `= constant`"))?;
                let coefficients = numbers(lineno, lhs)?;
                let constant = expr::eval(rhs.trim()).map_err(|e| fmt_err(lineno, e.to_string()))?;
                flux.push(FluxIdentity { coefficients, constant });
            }
            Some(name) => {
                let row = numbers(lineno, line)?;
                sections.get_mut(name).expect("section registered").1.push(row);
            }
        }
    }

    let required = |k: &str| keys.get(k).copied().ok_or_else(|| fmt_err(0, format!("missing key `{k}`")));
    let matrix = |name: &str| -> Result<DMatrix<f64>> {
        let (line, rows) = sections.get(name).ok_or_else(|| fmt_err(0, format!("missing section [{name}]")))?;
        to_matrix(*line, name, rows)
    };
    let index = |line: usize, v: &str| -> Result<usize> {
        match v.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i - 1),
            _ => Err(fmt_err(line, format!("`{v}` is not a 1-based index"))),
        }
    };

    let (fl, fv) = required("frustration")?;
    let (f_num, f_den) = {
        let (n, d) = fv.split_once('/').unwrap_or((fv, "1"));
        match (n.trim().parse::<u32>(), d.trim().parse::<u32>()) {
            (Ok(n), Ok(d)) if d > 0 => (n, d),
            _ => return Err(fmt_err(fl, format!("frustration `{fv}` must be `M/N`"))),
        }
    };
    let coupling = match keys.get("coupling") {
        Some((l, v)) => expr::eval(v).map_err(|e| fmt_err(*l, e.to_string()))?,
        None => 0.5,
    };
    let (dl, dv) = required("drive_x")?;
    let drive_index_x = index(dl, dv)?;
    let drive_index_y = match keys.get("drive_y") {
        None => None,
        Some((_, "none")) => None,
        Some((l, v)) => Some(index(*l, v)?),
    };
    let (ol, ov) = required("offsets")?;
    let phase_offsets_y = numbers(ol, ov)?;

    let omega = matrix("omega")?;
    let phi_dy = matrix("phi_dy")?;
    let noise_incidence = matrix("noise")?;
    let canonical_d = if sections.contains_key("canonical_d") { Some(matrix("canonical_d")?) } else { None };

    let labels = match keys.get("labels") {
        Some((_, v)) => v.split_whitespace().map(str::to_string).collect(),
        None => (1..=omega.ncols()).map(|k| format!("phi{k}")).collect(),
    };
    let axis_names = match keys.get("axes") {
        Some((_, v)) => v.split_whitespace().map(str::to_string).collect(),
        None => (1..=omega.nrows()).map(|i| format!("x{i}")).collect(),
    };

    Ok(FrustrationCell {
        name: keys.get("name").map_or_else(|| "custom".to_string(), |(_, v)| v.to_string()),
        f_num,
        f_den,
        coupling,
        omega,
        phi_dy,
        phase_offsets_y,
        flux_identities: flux,
        drive_index_x,
        drive_index_y,
        noise_incidence,
        canonical_d,
        labels,
        axis_names,
    })
}

fn write_row(out: &mut String, row: impl Iterator<Item = f64>) {
    let toks: Vec<String> = row.map(|v| format!("{v:?}")).collect();
    out.push_str(&toks.join(" "));
    out.push('\n');
}

fn write_matrix(out: &mut String, name: &str, m: &DMatrix<f64>) {
    let _ = writeln!(out, "\n[{name}]");
    for r in 0..m.nrows() {
        write_row(out, (0..m.ncols()).map(|c| m[(r, c)]));
    }
}

/// Serialize a cell; `parse_cell(&write_cell(c))` reproduces `c` exactly.
pub fn write_cell(cell: &FrustrationCell) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name = {}", cell.name);
    let _ = writeln!(out, "frustration = {}/{}", cell.f_num, cell.f_den);
    let _ = writeln!(out, "coupling = {:?}", cell.coupling);
    let _ = writeln!(out, "drive_x = {}", cell.drive_index_x + 1);
    match cell.drive_index_y {
        Some(j) => {
            let _ = writeln!(out, "drive_y = {}", j + 1);
        }
        None => out.push_str("drive_y = none\n"),
    }
    let _ = writeln!(out, "labels = {}", cell.labels.join(" "));
    let _ = writeln!(out, "axes = {}", cell.axis_names.join(" "));
    out.push_str("offsets = ");
    write_row(&mut out, cell.phase_offsets_y.iter().copied());
    write_matrix(&mut out, "omega", &cell.omega);
    write_matrix(&mut out, "phi_dy", &cell.phi_dy);
    write_matrix(&mut out, "noise", &cell.noise_incidence);
    if let Some(d) = &cell.canonical_d {
        write_matrix(&mut out, "canonical_d", d);
    }
    if !cell.flux_identities.is_empty() {
        out.push_str("\n[flux]\n");
        for id in &cell.flux_identities {
            let toks: Vec<String> = id.coefficients.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{} = {:?}", toks.join(" "), id.constant);
        }
    }
    out
}
