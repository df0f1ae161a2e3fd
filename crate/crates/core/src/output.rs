//! CSV tables and legacy VTK export.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Mesh;

/// `x` with 15 significant digits, in fixed notation for moderate magnitudes and
/// scientific notation otherwise; trailing zeros are dropped.
pub fn sig15(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        let s = format!("{x:.14e}");
        let (mantissa, e) = s.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

/// A header plus string-formatted rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Splits CSV text into its header and rows; every row must match the header width.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .enumerate()
        .map(|(i, l)| {
            let row: Vec<String> = l.split(',').map(str::to_string).collect();
            if row.len() != header.len() {
                return Err(Error::Parse(format!("row {} has {} fields, header has {}", i + 1, row.len(), header.len())));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

pub const EIGEN_HEADER: &[&str] = &["theta", "j", "lambda", "residual", "iterations", "n_dofs", "mesh_level", "degree"];
pub const ASYMPTOTIC_HEADER: &[&str] = &["theta", "j", "two_term", "bo_value", "fem_value", "gap"];
pub const DECAY_HEADER: &[&str] = &["theta", "lambda", "predicted_rate", "fitted_rate", "fit_residual", "n_slices"];
pub const BOUNDS_HEADER: &[&str] = &["theta", "Z_root", "J_min", "fem_count", "certificate_value"];
pub const FIELD_HEADER: &[&str] = &["u", "v", "value"];
pub const CONVERGENCE_HEADER: &[&str] = &["level", "degree", "n_dofs", "log10_sqrt_n", "j", "lambda", "error"];

/// Empty cell for missing optional values.
pub fn opt(x: Option<f64>) -> String {
    x.map(sig15).unwrap_or_default()
}

/// Legacy ASCII VTK unstructured grid with one scalar per mesh vertex.
pub fn vtk_unstructured(mesh: &Mesh, name: &str, vertex_values: &[f64]) -> Result<String> {
    if vertex_values.len() != mesh.n_vertices() {
        return Err(Error::InvalidParameter(format!(
            "{} vertex values for a mesh with {} vertices",
            vertex_values.len(),
            mesh.n_vertices()
        )));
    }
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nbrokenguide field\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", mesh.n_vertices());
    for p in &mesh.vertices {
        let _ = writeln!(out, "{:.16e} {:.16e} 0", p[0], p[1]);
    }
    let _ = writeln!(out, "CELLS {} {}", mesh.n_triangles(), 4 * mesh.n_triangles());
    for t in &mesh.triangles {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {}", mesh.n_triangles());
    for _ in &mesh.triangles {
        out.push_str("5\n");
    }
    let _ = writeln!(out, "POINT_DATA {}\nSCALARS {name} double 1\nLOOKUP_TABLE default", mesh.n_vertices());
    for v in vertex_values {
        let _ = writeln!(out, "{v:.16e}");
    }
    Ok(out)
}
