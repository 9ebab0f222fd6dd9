//! Implicit geometry: membership and closest-point queries.
//!
//! [`Geometry`] wraps an analytic 2D shape or a 3D triangle soup and
//! memoizes distance queries on coordinates quantized to `1e-12` of the
//! shape's bounding-box diagonal.

pub mod analytic;
pub mod kdtree;
pub mod soup;
pub mod stl;
pub mod triangle;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::RwLock;

pub use analytic::{Circle, Polygon};
pub use kdtree::CentroidKdTree;
pub use soup::{SoupShape, TriangleSoup, DEFAULT_CANDIDATES};
pub use stl::{load_stl, LoadedStl};
pub use triangle::{check_inside_3d_triangle, closest_point_triangle, Triangle};

use crate::bbox::BoundingBox;
use crate::Vec3;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("malformed STL at byte {offset}: {message}")]
    Stl { offset: usize, message: String },
    #[error("triangle soup is empty ({dropped} degenerate triangles dropped)")]
    EmptySoup { dropped: usize },
    #[error("ray parity did not stabilize at {point:?}; surface is not watertight there")]
    NotWatertight { point: [f64; 3] },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Which branch produced a closest point.
///
/// `Projection` is the orthogonal foot inside the primitive (case A);
/// `Edge` an edge-interior foot after the projection fell outside (B → C);
/// `Vertex` a vertex after the edge feet fell outside too (B → D → E).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceCase {
    Projection,
    Edge,
    Vertex,
}

impl DistanceCase {
    /// Flowchart branches visited on the way to this result.
    pub fn branches(self) -> &'static [char] {
        match self {
            DistanceCase::Projection => &['A'],
            DistanceCase::Edge => &['B', 'C'],
            DistanceCase::Vertex => &['B', 'D', 'E'],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DistanceCase::Projection => "A",
            DistanceCase::Edge => "B-C",
            DistanceCase::Vertex => "B-D-E",
        }
    }
}

/// Displacement from a query point to its closest boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceResult {
    /// `closest - query`.
    pub d: Vec3,
    pub closest: Vec3,
    /// Triangle or segment index the closest point lies on.
    pub source: usize,
    pub case: DistanceCase,
    /// The direction was undefined (query at a circle's centre).
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub enum Shape {
    Circle(Circle),
    Polygon(Polygon),
    Soup(Box<SoupShape>),
}

#[derive(Debug)]
pub struct Geometry {
    shape: Shape,
    bounds: BoundingBox,
    quantum: f64,
    cache: RwLock<HashMap<[i64; 3], DistanceResult>>,
}

impl Clone for Geometry {
    fn clone(&self) -> Self {
        Self::from_shape(self.shape.clone())
    }
}

impl Geometry {
    pub fn from_shape(shape: Shape) -> Self {
        let bounds = match &shape {
            Shape::Circle(c) => c.bounds(),
            Shape::Polygon(p) => p.bounds(),
            Shape::Soup(s) => *s.soup().bbox(),
        };
        Self {
            quantum: 1e-12 * bounds.diagonal(),
            bounds,
            shape,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn circle(center: [f64; 2], radius: f64) -> Result<Self, GeometryError> {
        Ok(Self::from_shape(Shape::Circle(Circle::new(center, radius)?)))
    }

    pub fn polygon(points: &[[f64; 2]]) -> Result<Self, GeometryError> {
        Ok(Self::from_shape(Shape::Polygon(Polygon::new(points)?)))
    }

    pub fn soup(soup: TriangleSoup, candidates: usize) -> Self {
        Self::from_shape(Shape::Soup(Box::new(SoupShape::new(soup, candidates))))
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match self.shape {
            Shape::Circle(_) | Shape::Polygon(_) => 2,
            Shape::Soup(_) => 3,
        }
    }

    pub fn bounds(&self) -> BoundingBox {
        self.bounds
    }

    /// Membership; points on the boundary count as inside.
    pub fn inside(&self, p: &Vec3) -> Result<bool, GeometryError> {
        match &self.shape {
            Shape::Circle(c) => Ok(c.inside(p)),
            Shape::Polygon(poly) => Ok(poly.inside(p)),
            Shape::Soup(s) => s.inside(p),
        }
    }

    pub fn distance_uncached(&self, p: &Vec3) -> DistanceResult {
        match &self.shape {
            Shape::Circle(c) => c.distance(p),
            Shape::Polygon(poly) => poly.distance(p),
            Shape::Soup(s) => s.distance(p),
        }
    }

    fn key(&self, p: &Vec3) -> [i64; 3] {
        [0, 1, 2].map(|i| (p[i] / self.quantum).round() as i64)
    }

    /// Closest boundary point, memoized per quantized query point.
    pub fn distance(&self, p: &Vec3) -> DistanceResult {
        let key = self.key(p);
        if let Some(hit) = self.cache.read().expect("distance cache poisoned").get(&key) {
            return *hit;
        }
        let r = self.distance_uncached(p);
        *self
            .cache
            .write()
            .expect("distance cache poisoned")
            .entry(key)
            .or_insert(r)
    }

    pub fn cached_queries(&self) -> usize {
        self.cache.read().expect("distance cache poisoned").len()
    }

    pub fn clear_cache(&self) {
        self.cache.write().expect("distance cache poisoned").clear();
    }
}
