//! Shifted-boundary Galerkin systems.
//!
//! Both problems are assembled over the active elements of a
//! [`SurrogateBoundary`]. Dirichlet data enters weakly on the surrogate
//! faces through the shift `S v = v + ∇v · d`, with the data evaluated at
//! the mapped point `x̃ + d` on the true boundary.

pub mod elasticity;
pub mod poisson;
pub mod sparse;

pub use elasticity::{assemble_elasticity, ElasticTensor};
pub use poisson::assemble_poisson;
pub use sparse::{Csr, Triplets};

use crate::mesh::{shape_eval, Element, Mesh};
use crate::surrogate::SurrogateBoundary;
use crate::Vec3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AssemblyError {
    #[error("surrogate face owned by inactive element {0}")]
    InactiveOwner(usize),
    #[error("elasticity is implemented in 2D only (got dim = {0})")]
    Dimension(usize),
    #[error("penalty must be positive (got {0})")]
    Penalty(f64),
}

/// Scalar field `x ↦ f(x)`.
pub type ScalarFn<'a> = dyn Fn(&Vec3) -> f64 + Send + Sync + 'a;
/// Vector field `x ↦ f(x)`; components beyond the spatial dimension are ignored.
pub type VectorFn<'a> = dyn Fn(&Vec3) -> Vec3 + Send + Sync + 'a;

/// `value + gradient · d`.
pub fn shift_scalar(value: f64, gradient: &Vec3, d: &Vec3) -> f64 {
    value + gradient.dot(d)
}

/// Component-wise shift of a vector field given its Jacobian rows.
pub fn shift_vector(value: &Vec3, gradients: &[Vec3], d: &Vec3) -> Vec3 {
    let mut out = *value;
    for (c, g) in gradients.iter().enumerate() {
        out[c] += g.dot(d);
    }
    out
}

/// Which term families to include.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terms {
    pub volume: bool,
    pub consistency: bool,
    pub adjoint: bool,
    pub penalty: bool,
}

impl Terms {
    pub const ALL: Terms = Terms {
        volume: true,
        consistency: true,
        adjoint: true,
        penalty: true,
    };
    pub const NONE: Terms = Terms {
        volume: false,
        consistency: false,
        adjoint: false,
        penalty: false,
    };
}

impl Default for Terms {
    fn default() -> Self {
        Terms::ALL
    }
}

/// Degrees of freedom on the nodes of active elements, numbered by
/// increasing node id, `per_node` interleaved components each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub per_node: usize,
    /// Base dof of each mesh node, `None` for nodes of inactive elements only.
    node_base: Vec<Option<usize>>,
    /// Mesh node of each base dof.
    pub nodes: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, boundary: &SurrogateBoundary, per_node: usize) -> Self {
        let mut used = vec![false; mesh.n_nodes()];
        for e in boundary.active_elements() {
            for &n in mesh.element_nodes(e) {
                used[n] = true;
            }
        }
        let mut node_base = vec![None; mesh.n_nodes()];
        let mut nodes = Vec::new();
        for (n, &u) in used.iter().enumerate() {
            if u {
                node_base[n] = Some(nodes.len() * per_node);
                nodes.push(n);
            }
        }
        Self {
            per_node,
            node_base,
            nodes,
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.nodes.len() * self.per_node
    }

    pub fn dof(&self, node: usize, component: usize) -> Option<usize> {
        self.node_base[node].map(|b| b + component)
    }
}

#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: Csr,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Gauss points per axis for volume integrals.
    pub volume_points: usize,
    pub terms: Terms,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            volume_points: 2,
            terms: Terms::ALL,
        }
    }
}

/// Dense element or face contribution on `dofs`, `k` row-major.
pub(crate) struct LocalBlock {
    pub dofs: Vec<usize>,
    pub k: Vec<f64>,
    pub f: Vec<f64>,
}

/// Sums local blocks in iteration order into a CSR matrix and load vector.
pub(crate) fn scatter<'a>(blocks: impl Iterator<Item = &'a LocalBlock>, n: usize) -> (Csr, Vec<f64>) {
    let mut t = Triplets::new();
    let mut rhs = vec![0.0; n];
    for b in blocks {
        let m = b.dofs.len();
        for i in 0..m {
            rhs[b.dofs[i]] += b.f[i];
            for j in 0..m {
                t.push(b.dofs[i], b.dofs[j], b.k[i * m + j]);
            }
        }
    }
    (t.to_csr(n, n), rhs)
}

/// Shape values and physical gradients at a reference point.
pub(crate) struct PhysicalShape {
    pub values: [f64; 8],
    pub grads: [Vec3; 8],
}

pub(crate) fn physical_shape(el: &Element, local: &[f64; 3], dim: usize) -> PhysicalShape {
    let s = shape_eval(local, dim);
    let n = 1 << dim;
    let mut grads = [Vec3::zeros(); 8];
    for (a, g) in grads.iter_mut().enumerate().take(n) {
        for i in 0..dim {
            g[i] = s.gradients[a][i] * 2.0 / el.size[i];
        }
    }
    PhysicalShape {
        values: s.values,
        grads,
    }
}

pub(crate) fn check_owners(boundary: &SurrogateBoundary) -> Result<(), AssemblyError> {
    match boundary.faces.iter().find(|f| !boundary.is_active(f.owner())) {
        Some(f) => Err(AssemblyError::InactiveOwner(f.owner())),
        None => Ok(()),
    }
}
