//! Point-to-triangle closest point queries.
//!
//! The query first projects onto the triangle's plane; if the foot lies in
//! the triangle that is the answer. Otherwise the point is projected onto
//! the three edges (clamped to the segments) and the nearest of those wins,
//! which is either an edge-interior foot or a vertex.

use super::{DistanceCase, DistanceResult};
use crate::Vec3;

/// Triangles with `|n| <= DEGENERACY_TOLERANCE * (longest edge)²` are dropped.
pub const DEGENERACY_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub a: Vec3,
    pub b: Vec3,
    pub c: Vec3,
    /// `(B - A) × (C - A)`, not normalized.
    pub normal: Vec3,
    pub centroid: Vec3,
}

impl Triangle {
    /// Returns `None` for (near) zero-area triangles.
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Option<Self> {
        if is_degenerate(&a, &b, &c) {
            return None;
        }
        Some(Self {
            a,
            b,
            c,
            normal: (b - a).cross(&(c - a)),
            centroid: (a + b + c) / 3.0,
        })
    }

    pub fn vertices(&self) -> [Vec3; 3] {
        [self.a, self.b, self.c]
    }

    pub fn area(&self) -> f64 {
        0.5 * self.normal.norm()
    }

    /// Barycentric coordinates of `p` with respect to (A, B, C), computed in
    /// the triangle's plane.
    pub fn barycentric(&self, p: &Vec3) -> [f64; 3] {
        let n2 = self.normal.norm_squared();
        let wa = (self.c - self.b).cross(&(p - self.b)).dot(&self.normal) / n2;
        let wb = (self.a - self.c).cross(&(p - self.c)).dot(&self.normal) / n2;
        [wa, wb, 1.0 - wa - wb]
    }

    /// Distance from the centroid to the farthest vertex.
    pub fn circumradius_from_centroid(&self) -> f64 {
        self.vertices()
            .iter()
            .map(|v| (v - self.centroid).norm())
            .fold(0.0, f64::max)
    }
}

pub fn is_degenerate(a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let n = (b - a).cross(&(c - a));
    let longest = (b - a)
        .norm_squared()
        .max((c - b).norm_squared())
        .max((a - c).norm_squared());
    if !(longest > 0.0) || !longest.is_finite() {
        return true;
    }
    n.norm() <= DEGENERACY_TOLERANCE * longest
}

/// Same-side test: every edge cross product must agree with the triangle
/// normal. Points on an edge or a vertex count as inside.
pub fn check_inside_3d_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let n = (b - a).cross(&(c - a));
    let u = (b - a).cross(&(p - a));
    let v = (c - b).cross(&(p - b));
    let w = (a - c).cross(&(p - c));
    u.dot(&n) >= 0.0 && v.dot(&n) >= 0.0 && w.dot(&n) >= 0.0
}

/// Exact closest point on the closed triangle, tagged with the branch taken.
pub fn closest_point_triangle(p: &Vec3, tri: &Triangle) -> DistanceResult {
    let n = &tri.normal;
    let to_plane = n * ((tri.a - p).dot(n) / n.norm_squared());
    let foot = p + to_plane;
    if check_inside_3d_triangle(&foot, &tri.a, &tri.b, &tri.c) {
        return DistanceResult {
            d: to_plane,
            closest: foot,
            source: 0,
            case: DistanceCase::Projection,
            degenerate: false,
        };
    }

    let edges = [(tri.a, tri.b), (tri.b, tri.c), (tri.c, tri.a)];
    let mut best: Option<(f64, Vec3, f64)> = None;
    for (s, e) in edges {
        let (q, t) = closest_on_segment(p, &s, &e);
        let dist2 = (q - p).norm_squared();
        if best.is_none_or(|(bd, _, _)| dist2 < bd) {
            best = Some((dist2, q, t));
        }
    }
    let (_, q, t) = best.expect("three edges");
    let case = if t > 0.0 && t < 1.0 {
        DistanceCase::Edge
    } else {
        DistanceCase::Vertex
    };
    DistanceResult {
        d: q - p,
        closest: q,
        source: 0,
        case,
        degenerate: false,
    }
}

/// Closest point on segment `[s, e]` and its clamped parameter. Clamped
/// endpoints are returned exactly.
pub fn closest_on_segment(p: &Vec3, s: &Vec3, e: &Vec3) -> (Vec3, f64) {
    let se = e - s;
    let len2 = se.norm_squared();
    let t = if len2 > 0.0 { (p - s).dot(&se) / len2 } else { 0.0 };
    if t <= 0.0 {
        (*s, 0.0)
    } else if t >= 1.0 {
        (*e, 1.0)
    } else {
        (s + se * t, t)
    }
}
