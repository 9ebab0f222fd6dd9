//! Element classification and the λ threshold.

use rayon::prelude::*;

use super::{SurrogateError, SurrogateOptions};
use crate::geometry::Geometry;
use crate::mesh::{gauss_rule, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Marker {
    Interior,
    Exterior,
    Intercepted,
    FalseIntercepted,
    NeighborsFalseIntercepted,
}

impl Marker {
    pub const ALL: [Marker; 5] = [
        Marker::Interior,
        Marker::Exterior,
        Marker::Intercepted,
        Marker::FalseIntercepted,
        Marker::NeighborsFalseIntercepted,
    ];

    /// Part of the surrogate domain.
    pub fn is_active(self) -> bool {
        matches!(
            self,
            Marker::Interior | Marker::Intercepted | Marker::NeighborsFalseIntercepted
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Marker::Interior => "Interior",
            Marker::Exterior => "Exterior",
            Marker::Intercepted => "Intercepted",
            Marker::FalseIntercepted => "FalseIntercepted",
            Marker::NeighborsFalseIntercepted => "NeighborsFalseIntercepted",
        }
    }
}

impl std::fmt::Display for Marker {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the interior fraction λ_c of an intercepted element is estimated
/// from its Gauss points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FractionRule {
    /// Quadrature estimate of the interior volume (weights of interior points).
    #[default]
    Weighted,
    /// Share of Gauss points that are interior, regardless of weight.
    Count,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodalFlags {
    /// Node lies in Ω (boundary included).
    pub interior: Vec<bool>,
    /// Node belongs to at least one FalseIntercepted element.
    pub false_intercepted: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkerField {
    pub tags: Vec<Marker>,
    pub flags: NodalFlags,
    /// Estimated exterior volume fraction per element: 0 for Interior, 1 for
    /// Exterior, the Gauss estimate for elements that were Intercepted.
    pub exterior_fraction: Vec<f64>,
}

impl MarkerField {
    pub fn count(&self, m: Marker) -> usize {
        self.tags.iter().filter(|&&t| t == m).count()
    }

    pub fn histogram(&self) -> [(Marker, usize); 5] {
        Marker::ALL.map(|m| (m, self.count(m)))
    }

    pub fn is_active(&self, element: usize) -> bool {
        self.tags[element].is_active()
    }

    pub fn n_active(&self) -> usize {
        self.tags.iter().filter(|t| t.is_active()).count()
    }
}

/// Node classification, element classification by interior-node count, and
/// ejection of intercepted elements whose exterior fraction exceeds `lambda`.
pub fn generate_markers(
    mesh: &Mesh,
    geometry: &Geometry,
    lambda: f64,
    opts: &SurrogateOptions,
) -> Result<MarkerField, SurrogateError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(SurrogateError::Lambda(lambda));
    }
    let dim = mesh.dim();
    let interior = mesh
        .nodes()
        .par_iter()
        .map(|p| geometry.inside(p))
        .collect::<Result<Vec<_>, _>>()?;
    let rule = gauss_rule(opts.fraction_points, dim);
    let total_weight: f64 = rule.weights.iter().sum();

    let classified = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let nodes = mesh.element_nodes(e);
            let inside = nodes.iter().filter(|&&n| interior[n]).count();
            if inside == nodes.len() {
                return Ok((Marker::Interior, 0.0));
            }
            if inside == 0 {
                return Ok((Marker::Exterior, 1.0));
            }
            let el = mesh.element(e);
            let mut in_weight = 0.0;
            let mut in_count = 0usize;
            for (q, w) in rule.iter() {
                if geometry.inside(&el.to_physical(q, dim))? {
                    in_weight += w;
                    in_count += 1;
                }
            }
            let lambda_c = match opts.fraction_rule {
                FractionRule::Weighted => in_weight / total_weight,
                FractionRule::Count => in_count as f64 / rule.len() as f64,
            };
            // An exterior node means a strictly positive exterior volume even
            // when every Gauss point falls inside.
            let exterior = (1.0 - lambda_c).max(f64::MIN_POSITIVE);
            let tag = if exterior > lambda {
                Marker::FalseIntercepted
            } else {
                Marker::Intercepted
            };
            Ok((tag, exterior))
        })
        .collect::<Result<Vec<_>, SurrogateError>>()?;

    let (tags, exterior_fraction) = classified.into_iter().unzip();
    Ok(MarkerField {
        tags,
        flags: NodalFlags {
            false_intercepted: vec![false; interior.len()],
            interior,
        },
        exterior_fraction,
    })
}

/// Scatter FalseIntercepted membership onto nodes, then gather: every active
/// element touching a flagged node becomes NeighborsFalseIntercepted.
pub fn mark_neighbors_of_false_intercepted(mesh: &Mesh, markers: &MarkerField) -> MarkerField {
    let mut flagged = vec![false; mesh.n_nodes()];
    for (e, t) in markers.tags.iter().enumerate() {
        if *t == Marker::FalseIntercepted {
            for &n in mesh.element_nodes(e) {
                flagged[n] = true;
            }
        }
    }
    let tags = markers
        .tags
        .iter()
        .enumerate()
        .map(|(e, &t)| {
            if t.is_active() && mesh.element_nodes(e).iter().any(|&n| flagged[n]) {
                Marker::NeighborsFalseIntercepted
            } else {
                t
            }
        })
        .collect();
    MarkerField {
        tags,
        flags: NodalFlags {
            interior: markers.flags.interior.clone(),
            false_intercepted: flagged,
        },
        exterior_fraction: markers.exterior_fraction.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbox::BoundingBox;

    fn disk_markers(level: u32, lambda: f64) -> (Mesh, MarkerField) {
        let g = Geometry::circle([0.5, 0.5], 0.5).unwrap();
        let mesh = Mesh::build(&BoundingBox::unit(2), level, None).unwrap();
        let m = generate_markers(&mesh, &g, lambda, &SurrogateOptions::default()).unwrap();
        (mesh, m)
    }

    #[test]
    fn quarter_grid_disk_tags() {
        let (mesh, m) = disk_markers(2, 1.0);
        let at = |x: u32, y: u32| m.tags[mesh.element_at([x, y, 0]).unwrap()];
        assert_eq!(at(1, 1), Marker::Interior);
        assert_eq!(at(0, 0), Marker::Intercepted);
    }

    #[test]
    fn threshold_endpoints() {
        let (_, m0) = disk_markers(5, 0.0);
        let (_, m1) = disk_markers(5, 1.0);
        assert_eq!(m0.count(Marker::Intercepted), 0);
        assert!(m0.count(Marker::FalseIntercepted) > 0);
        assert_eq!(m1.count(Marker::FalseIntercepted), 0);
        assert_eq!(m0.count(Marker::FalseIntercepted), m1.count(Marker::Intercepted));
    }

    #[test]
    fn false_intercepted_set_shrinks_with_lambda() {
        let mut prev = usize::MAX;
        for i in 0..=10 {
            let (_, m) = disk_markers(5, i as f64 / 10.0);
            let fi = m.count(Marker::FalseIntercepted);
            assert!(fi <= prev);
            prev = fi;
        }
    }

    #[test]
    fn lambda_out_of_range() {
        let g = Geometry::circle([0.5, 0.5], 0.5).unwrap();
        let mesh = Mesh::build(&BoundingBox::unit(2), 2, None).unwrap();
        assert!(matches!(
            generate_markers(&mesh, &g, 1.5, &SurrogateOptions::default()),
            Err(SurrogateError::Lambda(_))
        ));
    }

    fn all_interior(mesh: &Mesh) -> MarkerField {
        MarkerField {
            tags: vec![Marker::Interior; mesh.n_elements()],
            flags: NodalFlags {
                interior: vec![true; mesh.n_nodes()],
                false_intercepted: vec![false; mesh.n_nodes()],
            },
            exterior_fraction: vec![0.0; mesh.n_elements()],
        }
    }

    #[test]
    fn no_false_intercepted_is_a_no_op() {
        let mesh = Mesh::build(&BoundingBox::unit(2), 2, None).unwrap();
        let m = all_interior(&mesh);
        let out = mark_neighbors_of_false_intercepted(&mesh, &m);
        assert_eq!(out.tags, m.tags);
        assert!(out.flags.false_intercepted.iter().all(|f| !f));
    }

    #[test]
    fn single_false_intercepted_tags_its_ring() {
        let mesh = Mesh::build(&BoundingBox::unit(2), 2, None).unwrap();
        let mut m = all_interior(&mesh);
        let centre = mesh.element_at([1, 1, 0]).unwrap();
        m.tags[centre] = Marker::FalseIntercepted;
        let out = mark_neighbors_of_false_intercepted(&mesh, &m);
        // hand enumeration: the 3×3 block around (1,1), minus the centre
        for x in 0..4u32 {
            for y in 0..4u32 {
                let e = mesh.element_at([x, y, 0]).unwrap();
                let expect = if (x, y) == (1, 1) {
                    Marker::FalseIntercepted
                } else if x <= 2 && y <= 2 {
                    Marker::NeighborsFalseIntercepted
                } else {
                    Marker::Interior
                };
                assert_eq!(out.tags[e], expect, "element ({x},{y})");
            }
        }
        assert_eq!(out.flags.false_intercepted.iter().filter(|&&f| f).count(), 4);
    }

    #[test]
    fn adjacent_false_intercepted_pair_is_idempotent() {
        let mesh = Mesh::build(&BoundingBox::unit(2), 2, None).unwrap();
        let mut m = all_interior(&mesh);
        let a = mesh.element_at([1, 1, 0]).unwrap();
        let b = mesh.element_at([2, 1, 0]).unwrap();
        m.tags[a] = Marker::FalseIntercepted;
        m.tags[b] = Marker::FalseIntercepted;
        let once = mark_neighbors_of_false_intercepted(&mesh, &m);
        let twice = mark_neighbors_of_false_intercepted(&mesh, &once);
        assert_eq!(once, twice);
        // set-union oracle over the two 3×3 rings
        let expected: usize = (0..4u32)
            .flat_map(|x| (0..4u32).map(move |y| (x, y)))
            .filter(|&(x, y)| (x <= 3 && y <= 2) && !((x == 1 || x == 2) && y == 1))
            .count();
        assert_eq!(once.count(Marker::NeighborsFalseIntercepted), expected);
    }
}
