//! Surrogate face extraction.
//!
//! A face of an active element belongs to the surrogate boundary when the
//! element across it is inactive, carved, or outside the grid. Wherever a
//! neighbor exists this is the same face set the node rules select
//! (Intercepted: all face nodes exterior; NeighborsFalseIntercepted: each
//! face node exterior or FalseIntercepted), and it also closes the boundary
//! where the domain touches the bounding box.

use rayon::prelude::*;

use super::markers::{mark_neighbors_of_false_intercepted, Marker, MarkerField};
use super::{SurrogateError, SurrogateOptions};
use crate::geometry::Geometry;
use crate::mesh::quadrature::gauss_legendre_1d;
use crate::mesh::{Face, Mesh, Side};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateFace {
    pub face: Face,
    /// Unit outward normal, `side · e_axis`.
    pub normal: Vec3,
    pub points: Vec<Vec3>,
    /// Physical surface weights.
    pub weights: Vec<f64>,
    /// Closest point on Γ minus the quadrature point, per point.
    pub d: Vec<Vec3>,
}

impl SurrogateFace {
    pub fn owner(&self) -> usize {
        self.face.owner
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct SurrogateBoundary {
    pub lambda: f64,
    pub faces: Vec<SurrogateFace>,
    /// Final markers; the active elements form Ω̃_h.
    pub markers: MarkerField,
    /// Elements re-tagged FalseIntercepted because two opposite faces qualified.
    pub cycle_fixes: usize,
}

impl SurrogateBoundary {
    pub fn is_active(&self, element: usize) -> bool {
        self.markers.is_active(element)
    }

    pub fn active_elements(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.markers.tags.len()).filter(|&e| self.is_active(e))
    }
}

fn closes_boundary(mesh: &Mesh, tags: &[Marker], e: usize, axis: usize, side: Side) -> bool {
    mesh.neighbor(e, axis, side).is_none_or(|n| !tags[n].is_active())
}

/// Active elements with boundary faces on both sides along some axis.
fn sandwiched(mesh: &Mesh, tags: &[Marker]) -> Vec<usize> {
    (0..mesh.n_elements())
        .filter(|&e| {
            tags[e].is_active()
                && (0..mesh.dim()).any(|axis| {
                    Side::BOTH
                        .iter()
                        .all(|&s| closes_boundary(mesh, tags, e, axis, s))
                })
        })
        .collect()
}

/// Runs the cycle fix to a fixed point, then emits faces with quadrature
/// points and distance vectors.
pub fn extract_boundary(
    mesh: &Mesh,
    markers: &MarkerField,
    geometry: &Geometry,
    lambda: f64,
    opts: &SurrogateOptions,
) -> Result<SurrogateBoundary, SurrogateError> {
    let mut markers = markers.clone();
    let mut cycle_fixes = 0;
    let bound = mesh.n_elements() + 1;
    let mut rounds = 0;
    loop {
        let bad = sandwiched(mesh, &markers.tags);
        if bad.is_empty() {
            break;
        }
        rounds += 1;
        if rounds > bound {
            return Err(SurrogateError::NoFixedPoint { rounds });
        }
        cycle_fixes += bad.len();
        for e in bad {
            markers.tags[e] = Marker::FalseIntercepted;
        }
        markers = mark_neighbors_of_false_intercepted(mesh, &markers);
    }
    if cycle_fixes > 0 {
        log::debug!("cycle fix re-tagged {cycle_fixes} elements in {rounds} rounds");
    }

    let dim = mesh.dim();
    let mut faces = Vec::new();
    for e in 0..mesh.n_elements() {
        if !markers.tags[e].is_active() {
            continue;
        }
        for axis in 0..dim {
            for side in Side::BOTH {
                if closes_boundary(mesh, &markers.tags, e, axis, side) {
                    faces.push(mesh.face(e, axis, side));
                }
            }
        }
    }

    let (gp, gw) = gauss_legendre_1d(opts.face_points);
    let faces = faces
        .into_par_iter()
        .map(|face| face_quadrature(mesh, geometry, face, &gp, &gw))
        .collect();

    Ok(SurrogateBoundary {
        lambda,
        faces,
        markers,
        cycle_fixes,
    })
}

fn face_quadrature(mesh: &Mesh, geometry: &Geometry, face: Face, gp: &[f64], gw: &[f64]) -> SurrogateFace {
    let dim = mesh.dim();
    let el = mesh.element(face.owner);
    let tangential: Vec<usize> = (0..dim).filter(|&i| i != face.axis).collect();
    let n = gp.len();
    let count = n.pow(tangential.len() as u32);
    let mut points = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let mut d = Vec::with_capacity(count);
    for k in 0..count {
        let mut local = [0.0; 3];
        local[face.axis] = face.side.sign();
        let mut w = 1.0;
        let mut rest = k;
        for &t in &tangential {
            let i = rest % n;
            rest /= n;
            local[t] = gp[i];
            w *= gw[i] * 0.5 * el.size[t];
        }
        let x = el.to_physical(&local, dim);
        let r = geometry.distance(&x);
        if r.degenerate {
            log::warn!("undefined closest-point direction at {:?}", x.as_slice());
        }
        points.push(x);
        weights.push(w);
        d.push(r.d);
    }
    let mut normal = Vec3::zeros();
    normal[face.axis] = face.side.sign();
    SurrogateFace {
        face,
        normal,
        points,
        weights,
        d,
    }
}
