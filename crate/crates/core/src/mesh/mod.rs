//! Uniform-level incomplete quadtree/octree grids.
//!
//! Elements are indexed by Morton code and stored in Z-order. Adjacency is
//! never stored: [`Mesh::neighbor`] recovers it from code arithmetic plus a
//! hash lookup, which also answers "was this cell carved away?".
//!
//! Node ids follow lexicographic grid order (first axis fastest) restricted
//! to nodes touched by a retained element, so two identical meshes number
//! their nodes identically.

pub mod basis;
pub mod morton;
pub mod quadrature;

use std::collections::HashMap;

use rayon::prelude::*;

pub use basis::{shape_eval, ShapeValues};
pub use quadrature::{gauss_rule, QuadratureRule};

use crate::bbox::{BoundingBox, BoxError};
use crate::geometry::{Geometry, GeometryError};
use crate::Vec3;

/// Default cap on the number of grid nodes of the complete grid.
pub const DEFAULT_MAX_NODES: usize = 1 << 27;

const ABSENT: u32 = u32::MAX;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("refinement level must be in 1..={max}, got {level}")]
    Level { level: u32, max: u32 },
    #[error("grid at level {level} needs {requested} nodes, above the cap of {cap}")]
    TooManyNodes {
        level: u32,
        requested: u128,
        cap: usize,
    },
    #[error("geometry dimension {geometry} does not match bounding box dimension {bbox}")]
    DimensionMismatch { geometry: usize, bbox: usize },
    #[error("geometry bounds are not contained in the grid bounding box")]
    GeometryOutsideBox,
    #[error(transparent)]
    Box(#[from] BoxError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Which side of an element along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Minus, Side::Plus];

    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }

    fn bit(self) -> usize {
        match self {
            Side::Minus => 0,
            Side::Plus => 1,
        }
    }
}

/// An axis-aligned cell of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    /// Morton locational code.
    pub code: u64,
    pub level: u32,
    /// Integer cell coordinates.
    pub coords: [u32; 3],
    /// Lower corner.
    pub anchor: Vec3,
    /// Edge lengths (equal on cubic boxes).
    pub size: Vec3,
}

impl Element {
    pub fn to_physical(&self, local: &[f64; 3], dim: usize) -> Vec3 {
        let mut x = Vec3::zeros();
        for i in 0..dim {
            x[i] = self.anchor[i] + 0.5 * (local[i] + 1.0) * self.size[i];
        }
        x
    }

    pub fn to_local(&self, x: &Vec3, dim: usize) -> [f64; 3] {
        let mut l = [0.0; 3];
        for i in 0..dim {
            l[i] = 2.0 * (x[i] - self.anchor[i]) / self.size[i] - 1.0;
        }
        l
    }

    pub fn center(&self, dim: usize) -> Vec3 {
        self.to_physical(&[0.0; 3], dim)
    }

    pub fn volume(&self, dim: usize) -> f64 {
        (0..dim).map(|i| self.size[i]).product()
    }

    /// Jacobian determinant of the reference-to-physical map.
    pub fn jacobian(&self, dim: usize) -> f64 {
        (0..dim).map(|i| 0.5 * self.size[i]).product()
    }
}

/// One face of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub owner: usize,
    pub axis: usize,
    pub side: Side,
    nodes: [usize; 4],
    n_nodes: usize,
}

impl Face {
    pub fn nodes(&self) -> &[usize] {
        &self.nodes[..self.n_nodes]
    }
}

/// Local node indices lying on face (`axis`, `side`).
pub fn local_face_nodes(axis: usize, side: Side, dim: usize) -> impl Iterator<Item = usize> {
    (0..1usize << dim).filter(move |a| (a >> axis) & 1 == side.bit())
}

/// A uniform-level grid, possibly with exterior cells carved away.
#[derive(Debug, Clone)]
pub struct Mesh {
    bbox: BoundingBox,
    level: u32,
    cells: u32,
    h: Vec3,
    elements: Vec<Element>,
    lookup: HashMap<u64, usize>,
    nodes: Vec<Vec3>,
    node_coords: Vec<[u32; 3]>,
    node_ids: Vec<u32>,
    connectivity: Vec<usize>,
    carved: bool,
}

impl Mesh {
    /// Builds the complete grid, or the incomplete one with every element
    /// whose nodes all lie outside `carve`'s domain removed.
    pub fn build(bbox: &BoundingBox, level: u32, carve: Option<&Geometry>) -> Result<Self, MeshError> {
        Self::build_with_cap(bbox, level, carve, DEFAULT_MAX_NODES)
    }

    pub fn build_with_cap(
        bbox: &BoundingBox,
        level: u32,
        carve: Option<&Geometry>,
        max_nodes: usize,
    ) -> Result<Self, MeshError> {
        let dim = bbox.dim;
        let max = morton::max_level(dim).min(30);
        if level < 1 || level > max {
            return Err(MeshError::Level { level, max });
        }
        let cells = 1u32 << level;
        let per_axis = cells as u128 + 1;
        let requested = per_axis.pow(dim as u32);
        if requested > max_nodes as u128 {
            return Err(MeshError::TooManyNodes {
                level,
                requested,
                cap: max_nodes,
            });
        }
        if let Some(g) = carve {
            if g.dim() != dim {
                return Err(MeshError::DimensionMismatch {
                    geometry: g.dim(),
                    bbox: dim,
                });
            }
            if !bbox.contains_box(&g.bounds()) {
                return Err(MeshError::GeometryOutsideBox);
            }
        }

        let mut h = Vec3::zeros();
        for i in 0..dim {
            h[i] = bbox.extent(i) / cells as f64;
        }
        let np = cells as usize + 1;
        let total_nodes = requested as usize;
        let grid_point = |flat: usize| -> ([u32; 3], Vec3) {
            let mut c = [0u32; 3];
            let mut rem = flat;
            for ci in c.iter_mut().take(dim) {
                *ci = (rem % np) as u32;
                rem /= np;
            }
            (c, node_position(bbox, &h, c, cells, dim))
        };

        let inside: Option<Vec<bool>> = match carve {
            Some(g) => Some(
                (0..total_nodes)
                    .into_par_iter()
                    .map(|flat| g.inside(&grid_point(flat).1))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };

        let flat_of = |c: [u32; 3]| -> usize {
            let mut f = 0usize;
            for i in (0..dim).rev() {
                f = f * np + c[i] as usize;
            }
            f
        };
        let npe = 1usize << dim;
        let n_cells = (cells as u64).pow(dim as u32);
        let mut elements = Vec::new();
        let mut used = vec![false; total_nodes];
        let mut corner_flats = Vec::new();
        for code in 0..n_cells {
            let coords = morton::decode(code, dim);
            let mut flats = [0usize; 8];
            for (a, f) in flats.iter_mut().enumerate().take(npe) {
                let mut c = coords;
                for (i, ci) in c.iter_mut().enumerate().take(dim) {
                    *ci += ((a >> i) & 1) as u32;
                }
                *f = flat_of(c);
            }
            if let Some(inside) = &inside {
                if !flats[..npe].iter().any(|&f| inside[f]) {
                    continue;
                }
            }
            for &f in &flats[..npe] {
                used[f] = true;
            }
            corner_flats.push(flats);
            let mut anchor = Vec3::zeros();
            for i in 0..dim {
                anchor[i] = bbox.lo[i] + coords[i] as f64 * h[i];
            }
            elements.push(Element {
                code,
                level,
                coords,
                anchor,
                size: h,
            });
        }

        let mut node_ids = vec![ABSENT; total_nodes];
        let mut nodes = Vec::new();
        let mut node_coords = Vec::new();
        for flat in 0..total_nodes {
            if used[flat] {
                node_ids[flat] = nodes.len() as u32;
                let (c, x) = grid_point(flat);
                nodes.push(x);
                node_coords.push(c);
            }
        }
        let mut connectivity = Vec::with_capacity(elements.len() * npe);
        for flats in &corner_flats {
            connectivity.extend(flats[..npe].iter().map(|&f| node_ids[f] as usize));
        }
        let lookup = elements.iter().enumerate().map(|(i, e)| (e.code, i)).collect();

        Ok(Self {
            bbox: *bbox,
            level,
            cells,
            h,
            elements,
            lookup,
            nodes,
            node_coords,
            node_ids,
            connectivity,
            carved: carve.is_some(),
        })
    }

    pub fn dim(&self) -> usize {
        self.bbox.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    /// Element edge lengths.
    pub fn h(&self) -> Vec3 {
        self.h
    }

    pub fn cells_per_axis(&self) -> u32 {
        self.cells
    }

    pub fn is_carved(&self) -> bool {
        self.carved
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, id: usize) -> &Element {
        &self.elements[id]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Vec3 {
        &self.nodes[id]
    }

    pub fn node_grid_coords(&self, id: usize) -> [u32; 3] {
        self.node_coords[id]
    }

    pub fn nodes_per_element(&self) -> usize {
        1 << self.dim()
    }

    pub fn element_nodes(&self, id: usize) -> &[usize] {
        let n = self.nodes_per_element();
        &self.connectivity[id * n..(id + 1) * n]
    }

    /// Element id of a Morton code, if present.
    pub fn find(&self, code: u64) -> Option<usize> {
        self.lookup.get(&code).copied()
    }

    pub fn element_at(&self, coords: [u32; 3]) -> Option<usize> {
        let dim = self.dim();
        if coords[..dim].iter().any(|&c| c >= self.cells) {
            return None;
        }
        self.find(morton::encode(coords, dim))
    }

    /// Node id at integer grid coordinates, if that node is retained.
    pub fn node_at(&self, coords: [u32; 3]) -> Option<usize> {
        let dim = self.dim();
        let np = self.cells as usize + 1;
        if coords[..dim].iter().any(|&c| c as usize >= np) {
            return None;
        }
        let mut f = 0usize;
        for i in (0..dim).rev() {
            f = f * np + coords[i] as usize;
        }
        match self.node_ids[f] {
            ABSENT => None,
            id => Some(id as usize),
        }
    }

    /// Integer coordinates of the cell containing `p` (points on the upper
    /// box faces belong to the last cell), or `None` outside the box.
    pub fn cell_of(&self, p: &Vec3) -> Option<[u32; 3]> {
        if !self.bbox.contains(p) {
            return None;
        }
        let mut c = [0u32; 3];
        for i in 0..self.dim() {
            let t = ((p[i] - self.bbox.lo[i]) / self.h[i]).floor();
            c[i] = (t.max(0.0) as u32).min(self.cells - 1);
        }
        Some(c)
    }

    /// Retained element containing `p`.
    pub fn locate(&self, p: &Vec3) -> Option<usize> {
        self.cell_of(p).and_then(|c| self.element_at(c))
    }

    /// Face-adjacent element across (`axis`, `side`), or `None` when that
    /// cell is outside the grid or was carved.
    pub fn neighbor(&self, id: usize, axis: usize, side: Side) -> Option<usize> {
        let mut c = self.elements[id].coords;
        match side {
            Side::Minus => {
                if c[axis] == 0 {
                    return None;
                }
                c[axis] -= 1;
            }
            Side::Plus => {
                c[axis] += 1;
            }
        }
        self.element_at(c)
    }

    pub fn face(&self, id: usize, axis: usize, side: Side) -> Face {
        let dim = self.dim();
        let en = self.element_nodes(id);
        let mut nodes = [0usize; 4];
        let mut n_nodes = 0;
        for a in local_face_nodes(axis, side, dim) {
            nodes[n_nodes] = en[a];
            n_nodes += 1;
        }
        Face {
            owner: id,
            axis,
            side,
            nodes,
            n_nodes,
        }
    }

    /// All `2 dim` faces of an element, ordered (axis 0 −, axis 0 +, axis 1 −, …).
    pub fn faces(&self, id: usize) -> impl Iterator<Item = Face> + '_ {
        (0..self.dim()).flat_map(move |axis| Side::BOTH.into_iter().map(move |s| self.face(id, axis, s)))
    }
}

fn node_position(bbox: &BoundingBox, h: &Vec3, c: [u32; 3], cells: u32, dim: usize) -> Vec3 {
    let mut x = Vec3::zeros();
    for i in 0..dim {
        // pin the last node to `hi` exactly
        x[i] = if c[i] == cells {
            bbox.hi[i]
        } else {
            bbox.lo[i] + c[i] as f64 * h[i]
        };
    }
    x
}
