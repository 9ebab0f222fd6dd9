mod common;

use sbm::assembly::{assemble_poisson, AssemblyOptions, Csr, ElasticTensor, SparseSystem, Terms};
use sbm::bbox::BoundingBox;
use sbm::geometry::Geometry;
use sbm::mesh::Mesh;
use sbm::solve::{manufactured_library, solve, solve_dense, Manufactured, SolverOptions};
use sbm::surrogate::{identify_surrogate, SurrogateBoundary, SurrogateOptions};
use sbm::Vec3;

fn disk_setup(level: u32, lambda: f64) -> (Mesh, SurrogateBoundary) {
    let g = common::disk();
    let mesh = Mesh::build(&BoundingBox::unit(2), level, Some(&g)).unwrap();
    let b = identify_surrogate(&mesh, &g, lambda, &SurrogateOptions::default()).unwrap();
    (mesh, b)
}

fn smooth(p: &Vec3) -> f64 {
    (p[0] * 3.0).sin() + p[1] * p[1]
}

fn assemble(mesh: &Mesh, b: &SurrogateBoundary, alpha: f64, terms: Terms) -> SparseSystem {
    let opts = AssemblyOptions {
        terms,
        ..Default::default()
    };
    assemble_poisson(mesh, b, alpha, &|p| 1.0 + p[0], &smooth, &opts).unwrap()
}

#[test]
fn element_load_vector() {
    // 2 × 2 grid inside the circle: every element is active
    let g = Geometry::circle([0.5, 0.5], 1.0).unwrap();
    let mesh = Mesh::build(&BoundingBox::unit(2), 1, None).unwrap();
    let b = identify_surrogate(&mesh, &g, 0.5, &SurrogateOptions::default()).unwrap();
    let opts = AssemblyOptions {
        terms: Terms {
            volume: true,
            ..Terms::NONE
        },
        ..Default::default()
    };
    let sys = assemble_poisson(&mesh, &b, 400.0, &|_| 1.0, &|_| 0.0, &opts).unwrap();
    assert_eq!(sys.rhs.len(), 9);
    // corners see one element (h²/4), edge midpoints two, the centre four
    let h2 = 0.25;
    let expect = [1.0, 2.0, 1.0, 2.0, 4.0, 2.0, 1.0, 2.0, 1.0].map(|m| m * h2 / 4.0);
    for (v, e) in sys.rhs.iter().zip(expect) {
        assert!((v - e).abs() < 1e-15, "{v} vs {e}");
    }
    // bilinear square stiffness is scale-free in 2D
    let k = sys.matrix.to_dense();
    assert!((k[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
    assert!((k[(0, 4)] + 1.0 / 3.0).abs() < 1e-15);
    assert!((k[(0, 1)] + 1.0 / 6.0).abs() < 1e-15);
}

fn add(a: &Csr, b: &Csr) -> nalgebra::DMatrix<f64> {
    a.to_dense() + b.to_dense()
}

#[test]
fn term_families_add_up() {
    let (mesh, b) = disk_setup(4, 0.5);
    let one = |t: Terms| assemble(&mesh, &b, 400.0, t);
    let all = one(Terms::ALL);
    let parts = [
        Terms { volume: true, ..Terms::NONE },
        Terms { consistency: true, ..Terms::NONE },
        Terms { adjoint: true, ..Terms::NONE },
        Terms { penalty: true, ..Terms::NONE },
    ]
    .map(one);
    let sum = add(&parts[0].matrix, &parts[1].matrix) + add(&parts[2].matrix, &parts[3].matrix);
    let diff = (sum - all.matrix.to_dense()).abs().max();
    assert!(diff < 1e-10, "{diff}");
    for i in 0..all.rhs.len() {
        let s: f64 = parts.iter().map(|p| p.rhs[i]).sum();
        assert!((s - all.rhs[i]).abs() < 1e-10);
    }
    // consistency carries no load
    assert!(parts[1].rhs.iter().all(|&v| v == 0.0));
}

#[test]
fn penalty_is_linear_in_alpha() {
    let (mesh, b) = disk_setup(4, 0.5);
    let t = Terms { penalty: true, ..Terms::NONE };
    let a = assemble(&mesh, &b, 100.0, t);
    let c = assemble(&mesh, &b, 300.0, t);
    let diff = (a.matrix.to_dense() * 3.0 - c.matrix.to_dense()).abs().max();
    assert!(diff <= 1e-12 * c.matrix.values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    for (x, y) in a.rhs.iter().zip(&c.rhs) {
        assert!((3.0 * x - y).abs() <= 1e-12 * y.abs().max(1.0));
    }
    // the penalty block is symmetric positive semidefinite
    let k = c.matrix.to_dense();
    assert!((&k - k.transpose()).abs().max() < 1e-10);
    assert!(k.symmetric_eigenvalues().iter().all(|&l| l > -1e-8));
}

#[test]
fn assembly_and_solve_are_thread_count_independent() {
    let (mesh, b) = disk_setup(6, 0.5);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let sys = assemble(&mesh, &b, 400.0, Terms::ALL);
            let x = solve(&sys, &SolverOptions::default()).unwrap();
            (sys, x)
        })
    };
    let (s1, x1) = run(1);
    let (s4, x4) = run(4);
    assert_eq!(s1.matrix, s4.matrix);
    assert_eq!(s1.rhs, s4.rhs);
    assert_eq!(x1.values, x4.values);
    assert_eq!(x1.iterations, x4.iterations);
}

#[test]
fn iterative_and_dense_solves_agree() {
    let Manufactured::Scalar(u) = manufactured_library("disk", &ElasticTensor::plane_stress(1.0, 0.3)).unwrap() else {
        unreachable!()
    };
    for lambda in [0.0, 0.5, 1.0] {
        let (mesh, b) = disk_setup(5, lambda);
        let sys = assemble_poisson(&mesh, &b, 400.0, &*u.forcing, &*u.exact, &AssemblyOptions::default()).unwrap();
        assert!(sys.dofs.n_dofs() < 2000);
        let it = solve(&sys, &SolverOptions::default()).unwrap();
        let lu = solve_dense(&sys).unwrap();
        assert!(it.residual <= 1e-12);
        let worst = it.values.iter().zip(&lu.values).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-9, "λ={lambda}: {worst:.3e}");
    }
}
