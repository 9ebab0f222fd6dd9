//! `−Δu = f` with shifted Dirichlet data.
//!
//! Bilinear form over Ω̃_h and its surrogate faces:
//!
//! ```text
//! (∇u, ∇w) − ⟨∇u·ñ, w⟩ − ⟨S u, ∇w·ñ⟩ + α/h ⟨S u, S w⟩
//!     = (f, w) − ⟨u_D, ∇w·ñ⟩ + α/h ⟨u_D, S w⟩
//! ```

use rayon::prelude::*;

use super::{check_owners, physical_shape, scatter, AssemblyError, AssemblyOptions, DofMap, LocalBlock, ScalarFn, SparseSystem};
use crate::mesh::{gauss_rule, Mesh};
use crate::surrogate::SurrogateBoundary;

pub fn assemble_poisson(
    mesh: &Mesh,
    boundary: &SurrogateBoundary,
    alpha: f64,
    forcing: &ScalarFn,
    dirichlet: &ScalarFn,
    opts: &AssemblyOptions,
) -> Result<SparseSystem, AssemblyError> {
    if !(alpha > 0.0) {
        return Err(AssemblyError::Penalty(alpha));
    }
    check_owners(boundary)?;
    let dim = mesh.dim();
    let dofs = DofMap::new(mesh, boundary, 1);
    let rule = gauss_rule(opts.volume_points, dim);
    let terms = opts.terms;
    let nn = 1 << dim;

    let local_dofs = |e: usize| -> Vec<usize> {
        mesh.element_nodes(e)
            .iter()
            .map(|&n| dofs.dof(n, 0).expect("node of an active element"))
            .collect()
    };

    let active: Vec<usize> = boundary.active_elements().collect();
    let volume: Vec<LocalBlock> = active
        .par_iter()
        .map(|&e| {
            let el = mesh.element(e);
            let jac = el.jacobian(dim);
            let mut k = vec![0.0; nn * nn];
            let mut f = vec![0.0; nn];
            if terms.volume {
                for (q, w) in rule.iter() {
                    let s = physical_shape(el, q, dim);
                    let wj = w * jac;
                    let fx = forcing(&el.to_physical(q, dim));
                    for a in 0..nn {
                        for b in 0..nn {
                            k[a * nn + b] += wj * s.grads[a].dot(&s.grads[b]);
                        }
                        f[a] += wj * fx * s.values[a];
                    }
                }
            }
            LocalBlock {
                dofs: local_dofs(e),
                k,
                f,
            }
        })
        .collect();

    let faces: Vec<LocalBlock> = boundary
        .faces
        .par_iter()
        .map(|face| {
            let el = mesh.element(face.owner());
            let h = el.size[face.face.axis];
            let n = &face.normal;
            let mut k = vec![0.0; nn * nn];
            let mut f = vec![0.0; nn];
            for ((x, w), d) in face.points.iter().zip(&face.weights).zip(&face.d) {
                let s = physical_shape(el, &el.to_local(x, dim), dim);
                let dn: Vec<f64> = (0..nn).map(|a| s.grads[a].dot(n)).collect();
                let sh: Vec<f64> = (0..nn).map(|a| s.values[a] + s.grads[a].dot(d)).collect();
                let ud = dirichlet(&(x + d));
                for a in 0..nn {
                    for b in 0..nn {
                        let mut v = 0.0;
                        if terms.consistency {
                            v -= s.values[a] * dn[b];
                        }
                        if terms.adjoint {
                            v -= dn[a] * sh[b];
                        }
                        if terms.penalty {
                            v += alpha / h * sh[a] * sh[b];
                        }
                        k[a * nn + b] += w * v;
                    }
                    if terms.adjoint {
                        f[a] -= w * ud * dn[a];
                    }
                    if terms.penalty {
                        f[a] += w * alpha / h * ud * sh[a];
                    }
                }
            }
            LocalBlock {
                dofs: local_dofs(face.owner()),
                k,
                f,
            }
        })
        .collect();

    let (matrix, rhs) = scatter(volume.iter().chain(&faces), dofs.n_dofs());
    Ok(SparseSystem { matrix, rhs, dofs })
}
