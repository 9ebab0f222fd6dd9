//! Surrogate boundary identification.
//!
//! [`identify_surrogate`] classifies elements against the true domain,
//! ejects intercepted elements whose exterior volume fraction exceeds λ,
//! marks their neighbors, and extracts the grid-aligned boundary of what
//! remains. λ = 0 inscribes the domain, λ = 1 circumscribes it.

pub mod boundary;
pub mod markers;

use std::collections::HashMap;

pub use boundary::{extract_boundary, SurrogateBoundary, SurrogateFace};
pub use markers::{generate_markers, mark_neighbors_of_false_intercepted, FractionRule, Marker, MarkerField, NodalFlags};

use crate::geometry::{Geometry, GeometryError};
use crate::mesh::{Mesh, Side};
use crate::Vec3;

#[derive(Debug, thiserror::Error)]
pub enum SurrogateError {
    #[error("threshold λ = {0} is outside [0, 1]")]
    Lambda(f64),
    #[error("cycle fix did not settle after {rounds} rounds")]
    NoFixedPoint { rounds: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateOptions {
    /// Gauss points per axis for the volume fraction.
    pub fraction_points: usize,
    pub fraction_rule: FractionRule,
    /// Gauss points per tangential axis on surrogate faces.
    pub face_points: usize,
}

impl Default for SurrogateOptions {
    fn default() -> Self {
        Self {
            fraction_points: 5,
            fraction_rule: FractionRule::Weighted,
            face_points: 2,
        }
    }
}

pub fn identify_surrogate(
    mesh: &Mesh,
    geometry: &Geometry,
    lambda: f64,
    opts: &SurrogateOptions,
) -> Result<SurrogateBoundary, SurrogateError> {
    let m1 = generate_markers(mesh, geometry, lambda, opts)?;
    let m2 = mark_neighbors_of_false_intercepted(mesh, &m1);
    extract_boundary(mesh, &m2, geometry, lambda, opts)
}

/// Whether the RMS gap weighs quadrature points by their surface weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapMode {
    #[default]
    Weighted,
    Unweighted,
}

impl SurrogateBoundary {
    /// Root mean square of the normal gap `d · ñ` over all surface
    /// quadrature points; `None` for an empty boundary.
    pub fn rms_gap(&self, mode: GapMode) -> Option<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for f in &self.faces {
            for (d, w) in f.d.iter().zip(&f.weights) {
                let w = match mode {
                    GapMode::Weighted => *w,
                    GapMode::Unweighted => 1.0,
                };
                num += w * d.dot(&f.normal).powi(2);
                den += w;
            }
        }
        (den > 0.0).then(|| (num / den).sqrt())
    }

    /// `Σ area · ñ`; zero for a closed boundary.
    pub fn divergence_residual(&self) -> Vec3 {
        self.faces.iter().map(|f| f.normal * f.area()).sum()
    }

    /// Total volume of the active elements.
    pub fn active_volume(&self, mesh: &Mesh) -> f64 {
        self.active_elements().map(|e| mesh.element(e).volume(mesh.dim())).sum()
    }

    /// Active volume by the divergence theorem, `∮ x · ñ / dim`.
    pub fn enclosed_volume(&self, mesh: &Mesh) -> f64 {
        let dim = mesh.dim();
        self.faces
            .iter()
            .map(|f| {
                let plane = mesh.node(f.face.nodes()[0])[f.face.axis];
                f.face.side.sign() * plane * f.area()
            })
            .sum::<f64>()
            / dim as f64
    }

    /// Number of boundary vertices (2D) or face edges (3D) with odd
    /// incidence. A closed, non-self-intersecting boundary has none.
    pub fn single_cycle_violations(&self, mesh: &Mesh) -> usize {
        let mut incidence: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            let n = f.face.nodes();
            if mesh.dim() == 2 {
                for &v in n {
                    *incidence.entry((v, v)).or_default() += 1;
                }
            } else {
                // face nodes are ordered with the lower tangential axis fastest
                for (a, b) in [(0, 1), (2, 3), (0, 2), (1, 3)] {
                    *incidence.entry((n[a].min(n[b]), n[a].max(n[b]))).or_default() += 1;
                }
            }
        }
        incidence.values().filter(|&&c| c % 2 == 1).count()
    }

    /// Faces whose midpoint stepped by `±h/10 · ñ` does not land outside
    /// (`+`) and inside (`−`) the active domain.
    pub fn orientation_violations(&self, mesh: &Mesh) -> usize {
        let active_at = |p: &Vec3| mesh.locate(p).is_some_and(|e| self.is_active(e));
        self.faces
            .iter()
            .filter(|f| {
                let n = f.face.nodes();
                let mid = n.iter().map(|&v| mesh.node(v)).sum::<Vec3>() / n.len() as f64;
                let eps = mesh.h()[f.face.axis] / 10.0;
                let outward = mid + f.normal * eps;
                let inward = mid - f.normal * eps;
                active_at(&outward) || !active_at(&inward)
            })
            .count()
    }

    /// Emitted faces that have a neighbor across them but fail the node
    /// rule for their owner's tag.
    pub fn node_rule_violations(&self, mesh: &Mesh) -> usize {
        let flags = &self.markers.flags;
        self.faces
            .iter()
            .filter(|f| mesh.neighbor(f.owner(), f.face.axis, f.face.side).is_some())
            .filter(|f| {
                let nodes = f.face.nodes();
                let ok = match self.markers.tags[f.owner()] {
                    Marker::Intercepted => nodes.iter().all(|&v| !flags.interior[v]),
                    Marker::NeighborsFalseIntercepted => nodes
                        .iter()
                        .all(|&v| !flags.interior[v] || flags.false_intercepted[v]),
                    _ => false,
                };
                !ok
            })
            .count()
    }

    /// Active elements with boundary faces on both sides along one axis.
    pub fn sandwiched_elements(&self, mesh: &Mesh) -> usize {
        self.active_elements()
            .filter(|&e| {
                (0..mesh.dim()).any(|axis| {
                    Side::BOTH.iter().all(|&s| {
                        mesh.neighbor(e, axis, s).is_none_or(|n| !self.is_active(n))
                    })
                })
            })
            .count()
    }
}
