//! Two-dimensional cuts through the potential: two free axes on a regular
//! grid, every other axis held at a fixed value.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::TiltedPotential;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    /// Indices of the two free axes, in output order.
    pub free: [usize; 2],
    /// Values of held axes. Axes not listed are held at zero.
    pub fixed: Vec<(usize, f64)>,
    /// Range per free axis; `None` means `[−a_i/2, a_i/2]`.
    pub ranges: Option<[(f64, f64); 2]>,
    pub resolution: [usize; 2],
}

impl SliceSpec {
    pub fn new(free: [usize; 2], fixed: Vec<(usize, f64)>) -> Self {
        SliceSpec { free, fixed, ranges: None, resolution: [101, 101] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceAxis {
    pub index: usize,
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceGrid {
    pub axes: [SliceAxis; 2],
    /// Full point used for every grid node, before the free axes are set.
    pub base_point: Vec<f64>,
    /// `U` at node `(i, j)` is `values[i * n_1 + j]`.
    pub values: Vec<f64>,
    pub currents: (f64, f64),
    pub cell_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceMetadata {
    pub cell: String,
    pub free_axes: [String; 2],
    pub fixed: Vec<(String, f64)>,
    pub ranges: [(f64, f64); 2],
    pub resolution: [usize; 2],
    pub currents: (f64, f64),
    pub min: f64,
    pub max: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

pub fn slice_grid(p: &TiltedPotential, spec: &SliceSpec) -> Result<SliceGrid> {
    let n = p.n_vars();
    let bad = |m: String| Err(Error::BadSliceSpec(m));
    let [a, b] = spec.free;
    if a >= n || b >= n {
        return bad(format!("free axis out of range for a {n}-variable potential"));
    }
    if a == b {
        return bad(format!("free axes must differ, both are {}", p.axis_names[a]));
    }
    let mut base = vec![0.0; n];
    let mut seen = vec![false; n];
    for &(i, v) in &spec.fixed {
        if i >= n {
            return bad(format!("fixed axis {} out of range for a {n}-variable potential", i + 1));
        }
        if i == a || i == b {
            return bad(format!("axis {} is both free and fixed", p.axis_names[i]));
        }
        if seen[i] {
            return bad(format!("axis {} fixed twice", p.axis_names[i]));
        }
        if !v.is_finite() {
            return bad(format!("axis {} fixed at a non-finite value", p.axis_names[i]));
        }
        seen[i] = true;
        base[i] = v;
    }
    let ranges = spec.ranges.unwrap_or([
        (-p.period[a] / 2.0, p.period[a] / 2.0),
        (-p.period[b] / 2.0, p.period[b] / 2.0),
    ]);
    for (k, &(lo, hi)) in ranges.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("range for axis {} must satisfy lo < hi", p.axis_names[spec.free[k]]));
        }
        if spec.resolution[k] < 2 {
            return bad(format!("resolution for axis {} must be at least 2", p.axis_names[spec.free[k]]));
        }
    }

    let va = linspace(ranges[0].0, ranges[0].1, spec.resolution[0]);
    let vb = linspace(ranges[1].0, ranges[1].1, spec.resolution[1]);
    let mut values = Vec::with_capacity(va.len() * vb.len());
    let mut point = base.clone();
    for &u in &va {
        point[a] = u;
        for &v in &vb {
            point[b] = v;
            values.push(p.energy_unchecked(&point));
        }
    }
    Ok(SliceGrid {
        axes: [
            SliceAxis { index: a, name: p.axis_names[a].clone(), values: va },
            SliceAxis { index: b, name: p.axis_names[b].clone(), values: vb },
        ],
        base_point: base,
        values,
        currents: p.currents,
        cell_name: p.cell_name.clone(),
    })
}

impl SliceGrid {
    pub fn shape(&self) -> [usize; 2] {
        [self.axes[0].values.len(), self.axes[1].values.len()]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axes[1].values.len() + j]
    }

    /// Full coordinate vector of node `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> Vec<f64> {
        let mut x = self.base_point.clone();
        x[self.axes[0].index] = self.axes[0].values[i];
        x[self.axes[1].index] = self.axes[1].values[j];
        x
    }

    fn fixed_axes(&self, names: &[String]) -> Vec<(String, f64)> {
        (0..self.base_point.len())
            .filter(|&i| i != self.axes[0].index && i != self.axes[1].index)
            .map(|i| (names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1)), self.base_point[i]))
            .collect()
    }

    pub fn metadata(&self, axis_names: &[String]) -> SliceMetadata {
        let [n0, n1] = self.shape();
        let a0 = &self.axes[0].values;
        let a1 = &self.axes[1].values;
        SliceMetadata {
            cell: self.cell_name.clone(),
            free_axes: [self.axes[0].name.clone(), self.axes[1].name.clone()],
            fixed: self.fixed_axes(axis_names),
            ranges: [(a0[0], a0[n0 - 1]), (a1[0], a1[n1 - 1])],
            resolution: [n0, n1],
            currents: self.currents,
            min: self.values.iter().copied().fold(f64::INFINITY, f64::min),
            max: self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// CSV with `#` header lines, one row per node, full precision.
    pub fn write_csv<W: Write>(&self, axis_names: &[String], mut w: W) -> io::Result<()> {
        let mut head = String::new();
        let _ = writeln!(head, "# cell: {}", self.cell_name);
        let _ = writeln!(head, "# currents: I_x={:.16e} I_y={:.16e}", self.currents.0, self.currents.1);
        for (name, v) in self.fixed_axes(axis_names) {
            let _ = writeln!(head, "# fixed: {name}={v:.16e}");
        }
        let _ = writeln!(head, "{},{},U", self.axes[0].name, self.axes[1].name);
        w.write_all(head.as_bytes())?;
        let mut line = String::new();
        for (i, u) in self.axes[0].values.iter().enumerate() {
            for (j, v) in self.axes[1].values.iter().enumerate() {
                line.clear();
                let _ = writeln!(line, "{u:.16e},{v:.16e},{:.16e}", self.value(i, j));
                w.write_all(line.as_bytes())?;
            }
        }
        Ok(())
    }
}
