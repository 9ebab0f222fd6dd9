//! Reference checks shared by the focused suites and the acceptance report.
//! Each returns the measured quantity so callers pick their own bound.

use std::collections::{HashMap, HashSet};

use sbm::assembly::{assemble_elasticity, assemble_poisson, AssemblyOptions, ElasticTensor};
use sbm::bbox::BoundingBox;
use sbm::geometry::{Geometry, Shape, TriangleSoup, DEFAULT_CANDIDATES};
use sbm::mesh::Mesh;
use sbm::solve::{solve_dense, SolutionField};
use sbm::surrogate::{identify_surrogate, Marker, SurrogateOptions};
use sbm::Vec3;

pub fn linear(p: &Vec3) -> f64 {
    1.0 + 2.0 * p[0] + 3.0 * p[1] + 4.0 * p[2]
}

/// Worst nodal error and L2N when a linear field is the exact solution.
pub fn poisson_patch(mesh: &Mesh, geometry: &Geometry, lambda: f64) -> (f64, f64) {
    let boundary = identify_surrogate(mesh, geometry, lambda, &SurrogateOptions::default()).unwrap();
    let sys = assemble_poisson(mesh, &boundary, 400.0, &|_| 0.0, &linear, &AssemblyOptions::default()).unwrap();
    let x = solve_dense(&sys).unwrap();
    let field = SolutionField::new(mesh, &boundary, sys.dofs.clone(), x.values.clone());
    let nodal = sys
        .dofs
        .nodes
        .iter()
        .zip(&x.values)
        .map(|(&n, v)| (v - linear(mesh.node(n))).abs())
        .fold(0.0, f64::max);
    let report = field
        .l2_error(&|p| Vec3::new(linear(p), 0.0, 0.0), geometry, 5)
        .unwrap();
    (nodal, report.l2n[0])
}

/// Worst nodal error over λ ∈ {0, 0.5, 1} for a displacement the space contains.
pub fn elastic_patch(u: &(dyn Fn(&Vec3) -> Vec3 + Send + Sync)) -> f64 {
    let g = super::disk();
    let tensor = ElasticTensor::plane_stress(1.0, 0.3);
    let mesh = Mesh::build(&BoundingBox::unit(2), 4, Some(&g)).unwrap();
    let mut worst: f64 = 0.0;
    for lambda in [0.0, 0.5, 1.0] {
        let boundary = identify_surrogate(&mesh, &g, lambda, &SurrogateOptions::default()).unwrap();
        let sys = assemble_elasticity(
            &mesh,
            &boundary,
            &tensor,
            400.0,
            &|_| Vec3::zeros(),
            u,
            &AssemblyOptions::default(),
        )
        .unwrap();
        let x = solve_dense(&sys).unwrap();
        for (k, &n) in sys.dofs.nodes.iter().enumerate() {
            let exact = u(mesh.node(n));
            for c in 0..2 {
                worst = worst.max((x.values[2 * k + c] - exact[c]).abs());
            }
        }
    }
    worst
}

/// Closest point on a triangle by Voronoi-region classification, written
/// independently of the library's projection-then-edges query.
pub fn reference_closest(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(&ap), ac.dot(&ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(&bp), ac.dot(&bp));
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(&cp), ac.dot(&cp));
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Largest gap over 10⁴ points around `tris` between the accelerated
/// distance, the library's exhaustive search, and an independent
/// reference. Collects the case branches taken.
pub fn distance_gap(tris: &[[Vec3; 3]], seed: u64, seen: &mut HashSet<char>) -> f64 {
    let (soup, dropped) = TriangleSoup::from_vertices(tris).unwrap();
    assert_eq!(dropped, 0);
    let g = Geometry::soup(soup, DEFAULT_CANDIDATES);
    let Shape::Soup(s) = g.shape() else { unreachable!() };
    let region = g.bounds().padded_cube(0.25);
    let mut worst: f64 = 0.0;
    for p in super::points_in(&region, 10_000, seed) {
        let fast = g.distance_uncached(&p);
        let slow = s.soup().exhaustive_distance(&p);
        let reference = tris
            .iter()
            .map(|t| (reference_closest(&p, &t[0], &t[1], &t[2]) - p).norm())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((fast.d.norm() - slow.d.norm()).abs());
        worst = worst.max((slow.d.norm() - reference).abs());
        // the reported point realizes the distance
        worst = worst.max(((fast.closest - p) - fast.d).norm());
        seen.extend(fast.case.branches());
    }
    worst
}

/// Watertightness and marking invariants over λ ∈ {0, ¼, ½, ¾, 1}.
pub fn surrogate_invariants(name: &str, g: &Geometry, bb: &BoundingBox, levels: &[u32], carve: bool) -> Result<(), String> {
    for &level in levels {
        let mesh = Mesh::build(bb, level, carve.then_some(g)).unwrap();
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let b = identify_surrogate(&mesh, g, lambda, &SurrogateOptions::default()).unwrap();
            let tag = format!("{name} level {level} λ={lambda}");
            let div = b.divergence_residual().norm();
            if div > 1e-12 {
                return Err(format!("{tag}: divergence residual {div:.3e}"));
            }
            let (active, enclosed) = (b.active_volume(&mesh), b.enclosed_volume(&mesh));
            if (active - enclosed).abs() > 1e-10 {
                return Err(format!("{tag}: volume {active} vs {enclosed}"));
            }
            let counts = [
                b.single_cycle_violations(&mesh),
                b.orientation_violations(&mesh),
                b.sandwiched_elements(&mesh),
            ];
            if counts != [0, 0, 0] {
                return Err(format!("{tag}: cycle/orientation/sandwich violations {counts:?}"));
            }
            // every face separates an active owner from a non-active side
            for f in &b.faces {
                let inner = mesh.neighbor(f.owner(), f.face.axis, f.face.side).is_some_and(|n| b.is_active(n));
                if !b.is_active(f.owner()) || inner {
                    return Err(format!("{tag}: face between two active elements"));
                }
            }
            if b.markers.count(Marker::Intercepted) + b.markers.count(Marker::Interior) == 0 {
                return Err(format!("{tag}: empty surrogate domain"));
            }
        }
    }
    Ok(())
}

// A grid-aligned square makes the surrogate coincide with the true boundary,
// so d ≡ 0 and the shifted form must equal plain Nitsche. The reference is
// written from scratch: its own bilinear basis, its own Gauss rule, and its
// own walk over the square's edges.

const LO: f64 = 0.25;
const HI: f64 = 0.75;

fn g(p: &Vec3) -> f64 {
    (2.0 * p[0]).exp() * (3.0 * p[1]).cos()
}

/// Bilinear shape values and gradients on `[x0, x0+h] × [y0, y0+h]`, corners
/// ordered (x0,y0), (x1,y0), (x0,y1), (x1,y1).
fn shape(x0: f64, y0: f64, h: f64, x: f64, y: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    let (s, t) = ((x - x0) / h, (y - y0) / h);
    let v = [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t];
    let gr = [
        [-(1.0 - t) / h, -(1.0 - s) / h],
        [(1.0 - t) / h, -s / h],
        [-t / h, (1.0 - s) / h],
        [t / h, s / h],
    ];
    (v, gr)
}

/// Largest entry-wise difference between the shifted system and the
/// reference, and the largest entry magnitude.
pub fn nitsche_gap(alpha: f64) -> (f64, f64) {
    let level = 3;
    let n = 1usize << level;
    let h = 1.0 / n as f64;
    let geometry = Geometry::polygon(&[[LO, LO], [HI, LO], [HI, HI], [LO, HI]]).unwrap();
    let mesh = Mesh::build(&BoundingBox::unit(2), level, Some(&geometry)).unwrap();
    let boundary = identify_surrogate(&mesh, &geometry, 0.5, &SurrogateOptions::default()).unwrap();
    assert!(boundary.faces.iter().flat_map(|f| &f.d).all(|d| d.norm() < 1e-15));
    let sys = assemble_poisson(&mesh, &boundary, alpha, &|_| 1.0, &g, &AssemblyOptions::default()).unwrap();

    // reference: grid node (i, j) ↦ dof, only nodes of the square
    let lo = (LO / h).round() as usize;
    let hi = (HI / h).round() as usize;
    let mut dof = HashMap::new();
    for j in lo..=hi {
        for i in lo..=hi {
            let node = mesh.node_at([i as u32, j as u32, 0]).expect("grid node");
            dof.insert((i, j), sys.dofs.dof(node, 0).expect("square node is a dof"));
        }
    }
    assert_eq!(dof.len(), sys.dofs.n_dofs());
    let size = dof.len();
    let mut k = vec![vec![0.0; size]; size];
    let mut f = vec![0.0; size];
    let gp = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];

    for ej in lo..hi {
        for ei in lo..hi {
            let (x0, y0) = (ei as f64 * h, ej as f64 * h);
            let ids = [(ei, ej), (ei + 1, ej), (ei, ej + 1), (ei + 1, ej + 1)].map(|c| dof[&c]);
            // exact bilinear stiffness and constant load
            let kref = [
                [4.0, -1.0, -1.0, -2.0],
                [-1.0, 4.0, -2.0, -1.0],
                [-1.0, -2.0, 4.0, -1.0],
                [-2.0, -1.0, -1.0, 4.0],
            ];
            for a in 0..4 {
                f[ids[a]] += h * h / 4.0;
                for b in 0..4 {
                    k[ids[a]][ids[b]] += kref[a][b] / 6.0;
                }
            }
            // edges lying on the square
            let mut edges = Vec::new();
            if ei == lo {
                edges.push(([-1.0, 0.0], [(x0, y0 + gp[0] * h), (x0, y0 + gp[1] * h)]));
            }
            if ei + 1 == hi {
                edges.push(([1.0, 0.0], [(x0 + h, y0 + gp[0] * h), (x0 + h, y0 + gp[1] * h)]));
            }
            if ej == lo {
                edges.push(([0.0, -1.0], [(x0 + gp[0] * h, y0), (x0 + gp[1] * h, y0)]));
            }
            if ej + 1 == hi {
                edges.push(([0.0, 1.0], [(x0 + gp[0] * h, y0 + h), (x0 + gp[1] * h, y0 + h)]));
            }
            for (nrm, pts) in edges {
                for (x, y) in pts {
                    let w = h / 2.0;
                    let (v, gr) = shape(x0, y0, h, x, y);
                    let dn: Vec<f64> = gr.iter().map(|q| q[0] * nrm[0] + q[1] * nrm[1]).collect();
                    let gv = g(&Vec3::new(x, y, 0.0));
                    for a in 0..4 {
                        f[ids[a]] += w * (-gv * dn[a] + alpha / h * gv * v[a]);
                        for b in 0..4 {
                            k[ids[a]][ids[b]] +=
                                w * (-dn[b] * v[a] - v[b] * dn[a] + alpha / h * v[b] * v[a]);
                        }
                    }
                }
            }
        }
    }

    let dense = sys.matrix.to_dense();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..size {
        for j in 0..size {
            worst = worst.max((dense[(i, j)] - k[i][j]).abs());
            scale = scale.max(k[i][j].abs());
        }
        worst = worst.max((sys.rhs[i] - f[i]).abs());
        scale = scale.max(f[i].abs());
    }
    (worst, scale)
}
