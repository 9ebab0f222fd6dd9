//! Closed-form 2D shapes: circles and simple polygons.

use std::path::Path;

use super::triangle::closest_on_segment;
use super::{DistanceCase, DistanceResult, GeometryError};
use crate::bbox::BoundingBox;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct Circle {
    pub center: Vec3,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: [f64; 2], radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0) || !radius.is_finite() || !center.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::InvalidShape(format!(
                "circle needs a finite positive radius, got {radius}"
            )));
        }
        Ok(Self {
            center: Vec3::new(center[0], center[1], 0.0),
            radius,
        })
    }

    pub fn inside(&self, p: &Vec3) -> bool {
        planar(p, &self.center).norm() <= self.radius
    }

    pub fn bounds(&self) -> BoundingBox {
        let c = self.center;
        let r = self.radius;
        BoundingBox::new(&[c[0] - r, c[1] - r], &[c[0] + r, c[1] + r]).expect("positive radius")
    }

    pub fn distance(&self, p: &Vec3) -> DistanceResult {
        let v = planar(p, &self.center);
        let len = v.norm();
        let (closest, degenerate) = if len > 0.0 {
            (self.center + v * (self.radius / len), false)
        } else {
            (self.center + Vec3::new(self.radius, 0.0, 0.0), true)
        };
        DistanceResult {
            d: closest - Vec3::new(p[0], p[1], 0.0),
            closest,
            source: 0,
            case: DistanceCase::Projection,
            degenerate,
        }
    }
}

fn planar(p: &Vec3, c: &Vec3) -> Vec3 {
    Vec3::new(p[0] - c[0], p[1] - c[1], 0.0)
}

/// A simple polygon given by its vertex loop, stored counterclockwise.
/// The closing edge from the last vertex back to the first is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec3>,
    on_boundary_tol: f64,
}

impl Polygon {
    /// Validates the loop. Clockwise input is reversed; a repeated closing
    /// vertex is dropped.
    pub fn new(points: &[[f64; 2]]) -> Result<Self, GeometryError> {
        let mut vertices: Vec<Vec3> = points.iter().map(|p| Vec3::new(p[0], p[1], 0.0)).collect();
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidShape("polygon needs at least 3 vertices".into()));
        }
        if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(GeometryError::InvalidShape("polygon has non-finite vertices".into()));
        }
        let area = signed_area(&vertices);
        if area == 0.0 {
            return Err(GeometryError::InvalidShape("polygon has zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(&a, &b, &c, &d) {
                    return Err(GeometryError::InvalidShape(format!(
                        "polygon edges {i} and {j} intersect"
                    )));
                }
            }
        }
        let bounds = BoundingBox::around(vertices.iter(), 2).expect("non-empty");
        Ok(Self {
            on_boundary_tol: 1e-14 * bounds.diagonal(),
            vertices,
        })
    }

    /// Square of side `side` centred at `center`, rotated counterclockwise
    /// by `angle_deg` degrees.
    pub fn rotated_square(center: [f64; 2], side: f64, angle_deg: f64) -> Result<Self, GeometryError> {
        let (s, c) = angle_deg.to_radians().sin_cos();
        let h = 0.5 * side;
        let corners = [[-h, -h], [h, -h], [h, h], [-h, h]];
        let pts: Vec<[f64; 2]> = corners
            .iter()
            .map(|&[x, y]| [center[0] + c * x - s * y, center[1] + s * x + c * y])
            .collect();
        Self::new(&pts)
    }

    /// Star with `points` tips at radius `outer` and notches at `inner`, the
    /// first tip pointing along +y.
    pub fn star(center: [f64; 2], outer: f64, inner: f64, points: usize) -> Result<Self, GeometryError> {
        if points < 2 || !(inner > 0.0 && inner < outer) {
            return Err(GeometryError::InvalidShape(format!(
                "star needs >= 2 points and 0 < inner < outer, got {points}, {inner}, {outer}"
            )));
        }
        let pts: Vec<[f64; 2]> = (0..2 * points)
            .map(|k| {
                let r = if k % 2 == 0 { outer } else { inner };
                let t = std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI / points as f64;
                [center[0] + r * t.cos(), center[1] + r * t.sin()]
            })
            .collect();
        Self::new(&pts)
    }

    /// Reads a loop of whitespace-separated `x y` lines. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn from_file(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path).map_err(|source| GeometryError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let mut pts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| GeometryError::InvalidShape(format!("line {}: {e}", lineno + 1)))?;
            if vals.len() != 2 {
                return Err(GeometryError::InvalidShape(format!(
                    "line {}: expected `x y`, found {} values",
                    lineno + 1,
                    vals.len()
                )));
            }
            pts.push([vals[0], vals[1]]);
        }
        Self::new(&pts)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn bounds(&self) -> BoundingBox {
        BoundingBox::around(self.vertices.iter(), 2).expect("non-empty")
    }

    /// Crossing-number test; points within a tiny tolerance of an edge count
    /// as inside.
    pub fn inside(&self, p: &Vec3) -> bool {
        let q = Vec3::new(p[0], p[1], 0.0);
        let mut crossings = false;
        for (a, b) in self.segments() {
            let (f, _) = closest_on_segment(&q, &a, &b);
            if (f - q).norm() <= self.on_boundary_tol {
                return true;
            }
            if (a[1] > q[1]) != (b[1] > q[1]) {
                let x = a[0] + (q[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if q[0] < x {
                    crossings = !crossings;
                }
            }
        }
        crossings
    }

    pub fn distance(&self, p: &Vec3) -> DistanceResult {
        let q = Vec3::new(p[0], p[1], 0.0);
        let mut best: Option<(f64, Vec3, f64, usize)> = None;
        for (i, (a, b)) in self.segments().enumerate() {
            let (f, t) = closest_on_segment(&q, &a, &b);
            let d2 = (f - q).norm_squared();
            if best.is_none_or(|(bd, ..)| d2 < bd) {
                best = Some((d2, f, t, i));
            }
        }
        let (_, closest, t, source) = best.expect("polygon has edges");
        DistanceResult {
            d: closest - q,
            closest,
            source,
            case: if t > 0.0 && t < 1.0 {
                DistanceCase::Edge
            } else {
                DistanceCase::Vertex
            },
            degenerate: false,
        }
    }
}

fn signed_area(v: &[Vec3]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn orient(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: &Vec3, b: &Vec3, p: &Vec3) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}
