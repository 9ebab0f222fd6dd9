#![allow(dead_code)]

pub mod oracles;

use sbm::bbox::BoundingBox;
use sbm::geometry::soup::icosphere;
use sbm::geometry::{Geometry, Polygon, Shape, TriangleSoup, DEFAULT_CANDIDATES};
use sbm::Vec3;

pub fn disk() -> Geometry {
    Geometry::circle([0.5, 0.5], 0.5).unwrap()
}

pub fn star() -> (Geometry, BoundingBox) {
    let g = Geometry::from_shape(Shape::Polygon(Polygon::star([0.0, 0.0], 1.0, 0.5, 5).unwrap()));
    (g, BoundingBox::new(&[-1.2, -1.2], &[1.2, 1.2]).unwrap())
}

pub fn rotated_square(angle: f64) -> Geometry {
    Geometry::from_shape(Shape::Polygon(Polygon::rotated_square([0.5, 0.5], 0.5, angle).unwrap()))
}

pub fn sphere() -> (Geometry, BoundingBox) {
    let tris = icosphere(Vec3::new(0.5, 0.5, 0.5), 0.45, 2);
    let (soup, _) = TriangleSoup::from_vertices(&tris).unwrap();
    let g = Geometry::soup(soup, DEFAULT_CANDIDATES);
    let bb = g.bounds().padded_cube(0.05);
    (g, bb)
}

/// xorshift points in `bbox`.
pub fn points_in(bbox: &BoundingBox, n: usize, seed: u64) -> Vec<Vec3> {
    let mut s = seed.max(1);
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n)
        .map(|_| {
            let mut p = Vec3::zeros();
            for i in 0..bbox.dim {
                p[i] = bbox.lo[i] + next() * bbox.extent(i);
            }
            p
        })
        .collect()
}
