//! Triangle soups: membership by ray parity, distance by nearest triangles.

use super::kdtree::{CentroidKdTree, DEFAULT_LEAF_SIZE};
use super::triangle::{closest_on_segment, closest_point_triangle, Triangle};
use super::{DistanceResult, GeometryError};
use crate::bbox::BoundingBox;
use crate::Vec3;

/// Default number of nearest-centroid candidates examined per query.
pub const DEFAULT_CANDIDATES: usize = 32;

/// Jittered retries after all three axis-aligned rays hit degenerately.
const MAX_JITTER_RETRIES: usize = 6;

#[derive(Debug, Clone)]
pub struct TriangleSoup {
    triangles: Vec<Triangle>,
    bbox: BoundingBox,
}

impl TriangleSoup {
    /// Builds a soup, dropping degenerate triangles. Returns the soup and the
    /// number of triangles dropped.
    pub fn from_vertices(tris: &[[Vec3; 3]]) -> Result<(Self, usize), GeometryError> {
        if let Some(bad) = tris.iter().flatten().find(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::InvalidShape(format!("non-finite vertex {bad:?}")));
        }
        let triangles: Vec<Triangle> = tris.iter().filter_map(|t| Triangle::new(t[0], t[1], t[2])).collect();
        let dropped = tris.len() - triangles.len();
        if triangles.is_empty() {
            return Err(GeometryError::EmptySoup { dropped });
        }
        let bbox = BoundingBox::around(triangles.iter().flat_map(|t| [&t.a, &t.b, &t.c]), 3)
            .ok_or(GeometryError::EmptySoup { dropped })?;
        if (0..3).any(|i| bbox.extent(i) <= 0.0) {
            return Err(GeometryError::InvalidShape("triangle soup is flat".into()));
        }
        Ok((Self { triangles, bbox }, dropped))
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    /// Closest point over every triangle.
    pub fn exhaustive_distance(&self, p: &Vec3) -> DistanceResult {
        self.best_of(p, 0..self.triangles.len())
    }

    fn best_of(&self, p: &Vec3, ids: impl IntoIterator<Item = usize>) -> DistanceResult {
        let mut best: Option<(f64, DistanceResult)> = None;
        for id in ids {
            let mut r = closest_point_triangle(p, &self.triangles[id]);
            r.source = id;
            let d2 = r.d.norm_squared();
            let better = match &best {
                None => true,
                Some((bd, br)) => d2 < *bd || (d2 == *bd && id < br.source),
            };
            if better {
                best = Some((d2, r));
            }
        }
        best.expect("soup is non-empty").1
    }
}

/// Buckets of triangles by their footprint in the plane orthogonal to one
/// axis, for casting rays along that axis.
#[derive(Debug, Clone)]
struct RayCaster {
    axis: usize,
    plane: [usize; 2],
    lo: [f64; 2],
    cell: [f64; 2],
    n: usize,
    offsets: Vec<usize>,
    items: Vec<u32>,
}

enum RayHit {
    Parity(bool),
    OnSurface,
    Degenerate,
}

impl RayCaster {
    fn new(soup: &TriangleSoup, axis: usize) -> Self {
        let plane = [(axis + 1) % 3, (axis + 2) % 3];
        let bb = soup.bbox();
        let n = ((soup.len() as f64).sqrt().ceil() as usize).clamp(1, 256);
        let lo = [bb.lo[plane[0]], bb.lo[plane[1]]];
        let cell = [bb.extent(plane[0]) / n as f64, bb.extent(plane[1]) / n as f64];
        let clamp = |v: f64, k: usize| (((v - lo[k]) / cell[k]).floor().max(0.0) as usize).min(n - 1);
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); n * n];
        for (id, t) in soup.triangles().iter().enumerate() {
            let (mut a0, mut a1) = (f64::INFINITY, f64::NEG_INFINITY);
            let (mut b0, mut b1) = (f64::INFINITY, f64::NEG_INFINITY);
            for v in t.vertices() {
                a0 = a0.min(v[plane[0]]);
                a1 = a1.max(v[plane[0]]);
                b0 = b0.min(v[plane[1]]);
                b1 = b1.max(v[plane[1]]);
            }
            for i in clamp(a0, 0)..=clamp(a1, 0) {
                for j in clamp(b0, 1)..=clamp(b1, 1) {
                    buckets[i * n + j].push(id as u32);
                }
            }
        }
        let mut offsets = Vec::with_capacity(n * n + 1);
        let mut items = Vec::new();
        offsets.push(0);
        for b in buckets {
            items.extend(b);
            offsets.push(items.len());
        }
        Self {
            axis,
            plane,
            lo,
            cell,
            n,
            offsets,
            items,
        }
    }

    /// Casts a ray from `p` towards +axis and counts crossings.
    fn cast(&self, soup: &TriangleSoup, p: &Vec3, eps_area: f64, eps_len: f64) -> RayHit {
        let [u, v] = self.plane;
        let q = [p[u], p[v]];
        let mut idx = [0usize; 2];
        for k in 0..2 {
            let t = (q[k] - self.lo[k]) / self.cell[k];
            if t < -1e-9 || t > self.n as f64 + 1e-9 {
                return RayHit::Parity(false);
            }
            idx[k] = (t.floor().max(0.0) as usize).min(self.n - 1);
        }
        let bucket = idx[0] * self.n + idx[1];
        let mut inside = false;
        for &id in &self.items[self.offsets[bucket]..self.offsets[bucket + 1]] {
            let t = &soup.triangles()[id as usize];
            let a = [t.a[u], t.a[v]];
            let b = [t.b[u], t.b[v]];
            let c = [t.c[u], t.c[v]];
            let area = orient2(&a, &b, &c);
            if area.abs() <= eps_area {
                // edge-on: the ray grazes it only if q lies on its footprint
                let q3 = Vec3::new(q[0], q[1], 0.0);
                let on = [(a, b), (b, c), (c, a)].iter().any(|(s, e)| {
                    let (f, _) = closest_on_segment(&q3, &Vec3::new(s[0], s[1], 0.0), &Vec3::new(e[0], e[1], 0.0));
                    (f - q3).norm() <= eps_len
                });
                if on {
                    return RayHit::Degenerate;
                }
                continue;
            }
            let sign = area.signum();
            let w = [
                sign * orient2(&b, &c, &q),
                sign * orient2(&c, &a, &q),
                sign * orient2(&a, &b, &q),
            ];
            if w.iter().any(|&wi| wi < -eps_area) {
                continue;
            }
            let depth = (w[0] * t.a[self.axis] + w[1] * t.b[self.axis] + w[2] * t.c[self.axis]) / area.abs()
                - p[self.axis];
            if depth.abs() <= eps_len {
                return RayHit::OnSurface;
            }
            if w.iter().any(|&wi| wi <= eps_area) {
                return RayHit::Degenerate;
            }
            if depth > 0.0 {
                inside = !inside;
            }
        }
        RayHit::Parity(inside)
    }
}

fn orient2(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// A soup with its acceleration structures.
#[derive(Debug, Clone)]
pub struct SoupShape {
    soup: TriangleSoup,
    tree: CentroidKdTree,
    candidates: usize,
    casters: [RayCaster; 3],
    eps_area: f64,
    eps_len: f64,
}

impl SoupShape {
    pub fn new(soup: TriangleSoup, candidates: usize) -> Self {
        let tree = CentroidKdTree::build(
            soup.triangles().iter().map(|t| t.centroid).collect(),
            3,
            DEFAULT_LEAF_SIZE,
        );
        let casters = [RayCaster::new(&soup, 2), RayCaster::new(&soup, 0), RayCaster::new(&soup, 1)];
        let diag = soup.bbox().diagonal();
        Self {
            tree,
            candidates: candidates.max(1),
            casters,
            eps_area: 1e-13 * diag * diag,
            eps_len: 1e-12 * diag,
            soup,
        }
    }

    pub fn soup(&self) -> &TriangleSoup {
        &self.soup
    }

    pub fn tree(&self) -> &CentroidKdTree {
        &self.tree
    }

    pub fn candidates(&self) -> usize {
        self.candidates
    }

    /// Ray parity along +z, +x, +y; degenerate hits fall through to the next
    /// axis and then to slightly jittered copies of `p`.
    pub fn inside(&self, p: &Vec3) -> Result<bool, GeometryError> {
        if !self.soup.bbox().contains(p) {
            return Ok(false);
        }
        let diag = self.soup.bbox().diagonal();
        let jitter_dir = Vec3::new(0.3170, 0.5293, 0.7137).normalize();
        for attempt in 0..=MAX_JITTER_RETRIES {
            let q = p + jitter_dir * (attempt as f64 * 1e-9 * diag);
            for caster in &self.casters {
                match caster.cast(&self.soup, &q, self.eps_area, self.eps_len) {
                    RayHit::Parity(b) => return Ok(b),
                    RayHit::OnSurface => return Ok(true),
                    RayHit::Degenerate => {}
                }
            }
        }
        Err(GeometryError::NotWatertight { point: [p[0], p[1], p[2]] })
    }

    /// Best closest point among the `k` triangles with nearest centroids.
    pub fn nearest_triangle_distance(&self, p: &Vec3, k: usize) -> DistanceResult {
        let ids = self.tree.nearest(p, k.max(1)).into_iter().map(|(_, id)| id);
        self.soup.best_of(p, ids)
    }

    pub fn distance(&self, p: &Vec3) -> DistanceResult {
        self.nearest_triangle_distance(p, self.candidates)
    }
}

/// Icosphere obtained by `subdivisions` rounds of 4-way splitting of an
/// icosahedron; `20 * 4^subdivisions` outward-oriented triangles.
pub fn icosphere(center: Vec3, radius: f64, subdivisions: u32) -> Vec<[Vec3; 3]> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let verts = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let faces: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let unit = |v: Vec3| v.normalize();
    let mut tris: Vec<[Vec3; 3]> = faces
        .iter()
        .map(|f| f.map(|i| unit(Vec3::new(verts[i][0], verts[i][1], verts[i][2]))))
        .collect();
    for _ in 0..subdivisions {
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = unit((a + b) * 0.5);
            let bc = unit((b + c) * 0.5);
            let ca = unit((c + a) * 0.5);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        tris = next;
    }
    tris.into_iter().map(|t| t.map(|v| center + v * radius)).collect()
}

/// Twelve outward-oriented triangles of the box `[lo, hi]`.
pub fn box_triangles(lo: Vec3, hi: Vec3) -> Vec<[Vec3; 3]> {
    let c = |i: usize| {
        Vec3::new(
            if i & 1 == 1 { hi[0] } else { lo[0] },
            if i & 2 == 2 { hi[1] } else { lo[1] },
            if i & 4 == 4 { hi[2] } else { lo[2] },
        )
    };
    // quads as corner-index loops, clockwise seen from outside
    let quads = [
        [0, 2, 6, 4], // x = lo
        [1, 5, 7, 3], // x = hi
        [0, 4, 5, 1], // y = lo
        [2, 3, 7, 6], // y = hi
        [0, 1, 3, 2], // z = lo
        [4, 6, 7, 5], // z = hi
    ];
    quads
        .iter()
        .flat_map(|q| [[c(q[0]), c(q[2]), c(q[1])], [c(q[0]), c(q[3]), c(q[2])]])
        .collect()
}
