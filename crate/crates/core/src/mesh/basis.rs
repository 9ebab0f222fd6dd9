//! Multilinear (p = 1) Lagrange basis on the reference cube.
//!
//! Local node `a` sits at the corner whose coordinate along axis `i` is
//! `-1` when bit `i` of `a` is clear and `+1` when it is set, so in 2D the
//! order is (−1,−1), (1,−1), (−1,1), (1,1).

/// Maximum number of nodes per element (hexahedron).
pub const MAX_NODES: usize = 8;

/// Shape function values and reference-space gradients at one point.
///
/// Only the first `2^dim` entries are meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeValues {
    pub values: [f64; MAX_NODES],
    pub gradients: [[f64; 3]; MAX_NODES],
}

/// Corner sign of local node `a` along `axis`.
#[inline]
pub fn corner_sign(a: usize, axis: usize) -> f64 {
    if (a >> axis) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Evaluates the `2^dim` bilinear/trilinear shape functions at `local`.
///
/// Gradients are with respect to reference coordinates; multiply by `2/h`
/// along each axis for physical gradients.
pub fn shape_eval(local: &[f64; 3], dim: usize) -> ShapeValues {
    debug_assert!((1..=3).contains(&dim));
    let n = 1 << dim;
    let mut values = [0.0; MAX_NODES];
    let mut gradients = [[0.0; 3]; MAX_NODES];
    for a in 0..n {
        // 1D factors (1 + s ξ)/2 and their derivatives s/2
        let mut f = [1.0; 3];
        let mut df = [0.0; 3];
        for i in 0..dim {
            let s = corner_sign(a, i);
            f[i] = 0.5 * (1.0 + s * local[i]);
            df[i] = 0.5 * s;
        }
        values[a] = f[0] * f[1] * f[2];
        for i in 0..dim {
            let others: f64 = f.iter().take(dim).enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).product();
            gradients[a][i] = df[i] * others;
        }
    }
    ShapeValues { values, gradients }
}
