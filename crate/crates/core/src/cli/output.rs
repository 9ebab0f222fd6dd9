//! Results CSV, marker tables, and legacy VTK dumps.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::mesh::Mesh;
use crate::solve::SolutionField;
use crate::surrogate::{Marker, SurrogateBoundary};

pub const RESULTS_HEADER: &str = "experiment,geometry,level,h,lambda,metric,value,wall_time_s";

/// One `(level, λ, metric)` measurement. Level, `h`, and λ are empty for
/// rows that summarize several runs, such as fitted slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub geometry: String,
    pub level: Option<u32>,
    pub h: Option<f64>,
    pub lambda: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub wall_time_s: f64,
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(RESULTS_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>, csv::Error> {
    csv::Reader::from_path(path)?.deserialize().collect()
}

#[derive(Serialize)]
struct MarkerRow {
    element: usize,
    i: u32,
    j: u32,
    k: u32,
    x: f64,
    y: f64,
    z: f64,
    marker: &'static str,
    exterior_fraction: f64,
}

/// Per-element tags with cell indices and centres.
pub fn write_markers(path: &Path, mesh: &Mesh, boundary: &SurrogateBoundary) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    let dim = mesh.dim();
    for (e, el) in mesh.elements().iter().enumerate() {
        let c = el.center(dim);
        w.serialize(MarkerRow {
            element: e,
            i: el.coords[0],
            j: el.coords[1],
            k: el.coords[2],
            x: c[0],
            y: c[1],
            z: c[2],
            marker: boundary.markers.tags[e].name(),
            exterior_fraction: boundary.markers.exterior_fraction[e],
        })?;
    }
    w.flush()?;
    Ok(())
}

fn marker_code(m: Marker) -> usize {
    Marker::ALL.iter().position(|&x| x == m).expect("listed")
}

/// Legacy ASCII unstructured grid: every element as a pixel (2D) or voxel
/// (3D), its marker as cell data, and the solution as point data. Nodes
/// outside the active domain carry zeros and `active = 0`.
pub fn write_vtk(path: &Path, mesh: &Mesh, boundary: &SurrogateBoundary, field: Option<&SolutionField>) -> std::io::Result<()> {
    let dim = mesh.dim();
    let npe = mesh.nodes_per_element();
    let (ne, nn) = (mesh.n_elements(), mesh.n_nodes());
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nshifted boundary grid\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {nn} double");
    for p in mesh.nodes() {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }
    let _ = writeln!(s, "CELLS {ne} {}", ne * (npe + 1));
    for e in 0..ne {
        let ids: Vec<String> = mesh.element_nodes(e).iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "{npe} {}", ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    let code = if dim == 2 { 8 } else { 11 };
    for _ in 0..ne {
        let _ = writeln!(s, "{code}");
    }
    let _ = writeln!(s, "CELL_DATA {ne}\nSCALARS marker int 1\nLOOKUP_TABLE default");
    for t in &boundary.markers.tags {
        let _ = writeln!(s, "{}", marker_code(*t));
    }
    if let Some(f) = field {
        let nc = f.components();
        let _ = writeln!(s, "POINT_DATA {nn}\nFIELD solution 2");
        let name = if nc == 1 { "u" } else { "displacement" };
        let _ = writeln!(s, "{name} {nc} {nn} double");
        for n in 0..nn {
            let vals: Vec<String> = (0..nc)
                .map(|c| f.dofs.dof(n, c).map_or(0.0, |d| f.values[d]).to_string())
                .collect();
            let _ = writeln!(s, "{}", vals.join(" "));
        }
        let _ = writeln!(s, "active 1 {nn} int");
        for n in 0..nn {
            let _ = writeln!(s, "{}", u8::from(f.dofs.dof(n, 0).is_some()));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(s.as_bytes())?;
    w.flush()
}

/// Surrogate faces as lines (2D) or pixels (3D) with their normals.
pub fn write_boundary_vtk(path: &Path, mesh: &Mesh, boundary: &SurrogateBoundary) -> std::io::Result<()> {
    let dim = mesh.dim();
    let nf = boundary.faces.len();
    let per = 1 << (dim - 1);
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nsurrogate boundary\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", nf * per);
    for f in &boundary.faces {
        for &n in f.face.nodes() {
            let p = mesh.node(n);
            let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
        }
    }
    let _ = writeln!(s, "CELLS {nf} {}", nf * (per + 1));
    for i in 0..nf {
        let ids: Vec<String> = (0..per).map(|k| (i * per + k).to_string()).collect();
        let _ = writeln!(s, "{per} {}", ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {nf}");
    let code = if dim == 2 { 3 } else { 8 };
    for _ in 0..nf {
        let _ = writeln!(s, "{code}");
    }
    let _ = writeln!(s, "CELL_DATA {nf}\nVECTORS normal double");
    for f in &boundary.faces {
        let _ = writeln!(s, "{} {} {}", f.normal[0], f.normal[1], f.normal[2]);
    }
    std::fs::write(path, s)
}
