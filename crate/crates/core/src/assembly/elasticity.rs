//! Plane-stress linear elasticity `∇·σ + b = 0` with shifted Dirichlet data.
//!
//! ```text
//! (Cε(u), ∇ˢw) − ⟨σ(u)ñ, w⟩ + ⟨S u, σ(w)ñ⟩ + γ/h ⟨S u, S w⟩
//!     = (b, w) + ⟨u_D, σ(w)ñ⟩ + γ/h ⟨u_D, S w⟩
//! ```
//!
//! Strains are in Voigt form `(ε_xx, ε_yy, γ_xy)` with engineering shear.
//! Degrees of freedom are interleaved per node: `(u_x, u_y)`.

use nalgebra::{Matrix3, SMatrix};
use rayon::prelude::*;

use super::{
    check_owners, physical_shape, scatter, AssemblyError, AssemblyOptions, DofMap, LocalBlock, PhysicalShape,
    SparseSystem, VectorFn,
};
use crate::mesh::{gauss_rule, Mesh};
use crate::surrogate::SurrogateBoundary;
use crate::Vec3;

type Strain = SMatrix<f64, 3, 8>;
type Trace = SMatrix<f64, 2, 8>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticTensor {
    pub youngs: f64,
    pub poisson: f64,
    pub c: Matrix3<f64>,
}

impl ElasticTensor {
    pub fn plane_stress(youngs: f64, poisson: f64) -> Self {
        let k = youngs / (1.0 - poisson * poisson);
        let c = Matrix3::new(
            k,
            k * poisson,
            0.0,
            k * poisson,
            k,
            0.0,
            0.0,
            0.0,
            k * (1.0 - poisson) / 2.0,
        );
        Self { youngs, poisson, c }
    }

    /// Stress `(σ_xx, σ_yy, σ_xy)` from displacement gradient rows.
    pub fn stress(&self, grad_ux: &Vec3, grad_uy: &Vec3) -> Vec3 {
        let eps = Vec3::new(grad_ux[0], grad_uy[1], grad_ux[1] + grad_uy[0]);
        self.c * eps
    }
}

fn strain_matrix(s: &PhysicalShape) -> Strain {
    let mut b = Strain::zeros();
    for a in 0..4 {
        let g = s.grads[a];
        b[(0, 2 * a)] = g[0];
        b[(1, 2 * a + 1)] = g[1];
        b[(2, 2 * a)] = g[1];
        b[(2, 2 * a + 1)] = g[0];
    }
    b
}

/// `[[n_x, 0, n_y], [0, n_y, n_x]]`, mapping Voigt stress to traction.
fn normal_projection(n: &Vec3) -> SMatrix<f64, 2, 3> {
    SMatrix::<f64, 2, 3>::new(n[0], 0.0, n[1], 0.0, n[1], n[0])
}

fn value_matrix(v: &[f64; 8]) -> Trace {
    let mut m = Trace::zeros();
    for a in 0..4 {
        m[(0, 2 * a)] = v[a];
        m[(1, 2 * a + 1)] = v[a];
    }
    m
}

pub fn assemble_elasticity(
    mesh: &Mesh,
    boundary: &SurrogateBoundary,
    tensor: &ElasticTensor,
    gamma: f64,
    body_force: &VectorFn,
    dirichlet: &VectorFn,
    opts: &AssemblyOptions,
) -> Result<SparseSystem, AssemblyError> {
    let dim = mesh.dim();
    if dim != 2 {
        return Err(AssemblyError::Dimension(dim));
    }
    if !(gamma > 0.0) {
        return Err(AssemblyError::Penalty(gamma));
    }
    check_owners(boundary)?;
    let dofs = DofMap::new(mesh, boundary, 2);
    let rule = gauss_rule(opts.volume_points, dim);
    let terms = opts.terms;
    let c = tensor.c;

    let local_dofs = |e: usize| -> Vec<usize> {
        mesh.element_nodes(e)
            .iter()
            .flat_map(|&n| (0..2).map(move |k| (n, k)))
            .map(|(n, k)| dofs.dof(n, k).expect("node of an active element"))
            .collect()
    };
    let block = |dofs: Vec<usize>, k: &SMatrix<f64, 8, 8>, f: &SMatrix<f64, 8, 1>| LocalBlock {
        dofs,
        // row-major
        k: (0..64).map(|i| k[(i / 8, i % 8)]).collect(),
        f: f.iter().copied().collect(),
    };

    let active: Vec<usize> = boundary.active_elements().collect();
    let volume: Vec<LocalBlock> = active
        .par_iter()
        .map(|&e| {
            let el = mesh.element(e);
            let jac = el.jacobian(dim);
            let mut k = SMatrix::<f64, 8, 8>::zeros();
            let mut f = SMatrix::<f64, 8, 1>::zeros();
            if terms.volume {
                for (q, w) in rule.iter() {
                    let s = physical_shape(el, q, dim);
                    let b = strain_matrix(&s);
                    k += b.transpose() * c * b * (w * jac);
                    let bx = body_force(&el.to_physical(q, dim));
                    f += value_matrix(&s.values).transpose() * nalgebra::Vector2::new(bx[0], bx[1]) * (w * jac);
                }
            }
            block(local_dofs(e), &k, &f)
        })
        .collect();

    let faces: Vec<LocalBlock> = boundary
        .faces
        .par_iter()
        .map(|face| {
            let el = mesh.element(face.owner());
            let h = el.size[face.face.axis];
            let proj = normal_projection(&face.normal);
            let mut k = SMatrix::<f64, 8, 8>::zeros();
            let mut f = SMatrix::<f64, 8, 1>::zeros();
            for ((x, w), d) in face.points.iter().zip(&face.weights).zip(&face.d) {
                let s = physical_shape(el, &el.to_local(x, dim), dim);
                let traction = proj * c * strain_matrix(&s);
                let values = value_matrix(&s.values);
                let mut shifted = [0.0; 8];
                for (a, v) in shifted.iter_mut().enumerate().take(4) {
                    *v = s.values[a] + s.grads[a].dot(d);
                }
                let shift = value_matrix(&shifted);
                let g = dirichlet(&(x + d));
                let ud = nalgebra::Vector2::new(g[0], g[1]);
                if terms.consistency {
                    k -= values.transpose() * traction * *w;
                }
                if terms.adjoint {
                    k += traction.transpose() * shift * *w;
                    f += traction.transpose() * ud * *w;
                }
                if terms.penalty {
                    k += shift.transpose() * shift * (gamma / h * w);
                    f += shift.transpose() * ud * (gamma / h * w);
                }
            }
            block(local_dofs(face.owner()), &k, &f)
        })
        .collect();

    let (matrix, rhs) = scatter(volume.iter().chain(&faces), dofs.n_dofs());
    Ok(SparseSystem { matrix, rhs, dofs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_stress_tensor() {
        let t = ElasticTensor::plane_stress(1.0, 0.3);
        let k = 1.0 / 0.91;
        assert!((t.c[(0, 0)] - k).abs() < 1e-15);
        assert!((t.c[(0, 1)] - 0.3 * k).abs() < 1e-15);
        assert!((t.c[(2, 2)] - 0.35 * k).abs() < 1e-15);
        assert_eq!(t.c, t.c.transpose());
        assert!(t.c.symmetric_eigenvalues().iter().all(|&l| l > 0.0));
    }

    #[test]
    fn rigid_rotation_is_stress_free() {
        let t = ElasticTensor::plane_stress(1.0, 0.3);
        let s = t.stress(&Vec3::new(0.0, -1.0, 0.0), &Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(s, Vec3::zeros());
    }
}
