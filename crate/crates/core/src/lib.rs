//! Shifted boundary method on uniform Cartesian quadtree/octree grids.

// `!(x > 0.0)` is how NaN gets rejected alongside non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod bbox;
pub mod cli;
pub mod geometry;
pub mod mesh;
pub mod pipeline;
pub mod solve;
pub mod surrogate;

pub type Vec3 = nalgebra::Vector3<f64>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/grids.md")]
    struct Grids;
    #[doc = include_str!("../../../book/src/geometry.md")]
    struct Geometry;
    #[doc = include_str!("../../../book/src/surrogate.md")]
    struct Surrogate;
    #[doc = include_str!("../../../book/src/assembly.md")]
    struct Assembly;
    #[doc = include_str!("../../../book/src/solving.md")]
    struct Solving;
    #[doc = include_str!("../../../book/src/running.md")]
    struct Running;
}
