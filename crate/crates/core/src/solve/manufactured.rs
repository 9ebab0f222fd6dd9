//! Closed-form exact solutions with their forcing terms.
//!
//! Forcings are hand-derived (`f = −Δu`, `b = −∇·(Cε(u))`) and checked
//! against central differences in the tests.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::assembly::ElasticTensor;
use crate::Vec3;

pub type Scalar = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;
pub type Vector = Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;
pub type Jacobian = Arc<dyn Fn(&Vec3) -> [Vec3; 2] + Send + Sync>;

#[derive(Clone)]
pub struct ScalarSolution {
    pub name: String,
    pub exact: Scalar,
    pub gradient: Vector,
    /// `−Δu`.
    pub forcing: Scalar,
}

impl ScalarSolution {
    /// Dirichlet data; the exact field itself.
    pub fn dirichlet(&self) -> Scalar {
        self.exact.clone()
    }
}

#[derive(Clone)]
pub struct VectorSolution {
    pub name: String,
    /// Displacement `(u_x, u_y, 0)`.
    pub exact: Vector,
    /// Rows `∇u_x`, `∇u_y`.
    pub gradient: Jacobian,
    /// `−∇·(Cε(u))` for the tensor given at lookup.
    pub body_force: Vector,
}

#[derive(Clone)]
pub enum Manufactured {
    Scalar(ScalarSolution),
    Vector(VectorSolution),
}

impl Manufactured {
    pub fn name(&self) -> &str {
        match self {
            Manufactured::Scalar(s) => &s.name,
            Manufactured::Vector(v) => &v.name,
        }
    }
}

impl std::fmt::Debug for Manufactured {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Manufactured({})", self.name())
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("unknown manufactured solution `{0}` (known: {names})", names = NAMES.join(", "))]
pub struct UnknownSolution(pub String);

pub const NAMES: [&str; 7] = ["disk", "bunny", "moai", "eiffel", "armadillo", "star", "linear"];

/// Disk solution `0.25 (R² − r²) + u₀` about `center`; `f = 1`.
pub fn disk(center: [f64; 2], radius: f64, u0: f64) -> ScalarSolution {
    let c = Vec3::new(center[0], center[1], 0.0);
    ScalarSolution {
        name: "disk".into(),
        exact: Arc::new(move |p| {
            let r2 = (p - c).xy().norm_squared();
            0.25 * (radius * radius - r2) + u0
        }),
        gradient: Arc::new(move |p| {
            let q = p - c;
            Vec3::new(-0.5 * q[0], -0.5 * q[1], 0.0)
        }),
        forcing: Arc::new(|_| 1.0),
    }
}

/// `1 + 2x + 3y + 4z`; harmonic, so `f = 0`.
pub fn linear() -> ScalarSolution {
    ScalarSolution {
        name: "linear".into(),
        exact: Arc::new(|p| 1.0 + 2.0 * p[0] + 3.0 * p[1] + 4.0 * p[2]),
        gradient: Arc::new(|_| Vec3::new(2.0, 3.0, 4.0)),
        forcing: Arc::new(|_| 0.0),
    }
}

/// `cos(πx) y sin(πz)`, `f = 2π² u`.
pub fn bunny() -> ScalarSolution {
    let u = |p: &Vec3| (PI * p[0]).cos() * p[1] * (PI * p[2]).sin();
    ScalarSolution {
        name: "bunny".into(),
        exact: Arc::new(u),
        gradient: Arc::new(|p| {
            let (sx, cx) = (PI * p[0]).sin_cos();
            let (sz, cz) = (PI * p[2]).sin_cos();
            Vec3::new(-PI * sx * p[1] * sz, cx * sz, PI * cx * p[1] * cz)
        }),
        forcing: Arc::new(move |p| 2.0 * PI * PI * u(p)),
    }
}

/// `(1 − x)(1 − y) cos(3πz)`, `f = 9π² u`.
fn moai_like(name: &str) -> ScalarSolution {
    let u = |p: &Vec3| (1.0 - p[0]) * (1.0 - p[1]) * (3.0 * PI * p[2]).cos();
    ScalarSolution {
        name: name.into(),
        exact: Arc::new(u),
        gradient: Arc::new(|p| {
            let (s, c) = (3.0 * PI * p[2]).sin_cos();
            Vec3::new(
                -(1.0 - p[1]) * c,
                -(1.0 - p[0]) * c,
                -3.0 * PI * (1.0 - p[0]) * (1.0 - p[1]) * s,
            )
        }),
        forcing: Arc::new(move |p| 9.0 * PI * PI * u(p)),
    }
}

pub fn moai() -> ScalarSolution {
    moai_like("moai")
}

pub fn eiffel() -> ScalarSolution {
    moai_like("eiffel")
}

/// `cos(πx)(1 − y) sin(πz)`, `f = 2π² u`.
pub fn armadillo() -> ScalarSolution {
    let u = |p: &Vec3| (PI * p[0]).cos() * (1.0 - p[1]) * (PI * p[2]).sin();
    ScalarSolution {
        name: "armadillo".into(),
        exact: Arc::new(u),
        gradient: Arc::new(|p| {
            let (sx, cx) = (PI * p[0]).sin_cos();
            let (sz, cz) = (PI * p[2]).sin_cos();
            Vec3::new(-PI * sx * (1.0 - p[1]) * sz, -cx * sz, PI * cx * (1.0 - p[1]) * cz)
        }),
        forcing: Arc::new(move |p| 2.0 * PI * PI * u(p)),
    }
}

/// `u_x = sin(πx) cos(πy) / 10`, `u_y = cos(πx) sin(πy) / 10`.
///
/// Both strain components equal `π cos(πx) cos(πy) / 10`, so for plane
/// stress with `k = E / (1 − ν²)` the body force is `b = 2kπ² u`.
pub fn star(tensor: &ElasticTensor) -> VectorSolution {
    let k = tensor.youngs / (1.0 - tensor.poisson * tensor.poisson);
    let u = |p: &Vec3| {
        let (sx, cx) = (PI * p[0]).sin_cos();
        let (sy, cy) = (PI * p[1]).sin_cos();
        Vec3::new(sx * cy / 10.0, cx * sy / 10.0, 0.0)
    };
    VectorSolution {
        name: "star".into(),
        exact: Arc::new(u),
        gradient: Arc::new(|p| {
            let (sx, cx) = (PI * p[0]).sin_cos();
            let (sy, cy) = (PI * p[1]).sin_cos();
            [
                Vec3::new(PI * cx * cy / 10.0, -PI * sx * sy / 10.0, 0.0),
                Vec3::new(-PI * sx * sy / 10.0, PI * cx * cy / 10.0, 0.0),
            ]
        }),
        body_force: Arc::new(move |p| u(p) * (2.0 * k * PI * PI)),
    }
}

/// Looks up a library solution. The disk uses the unit-square setup:
/// centre (0.5, 0.5), R = 0.5, u₀ = 0.01.
pub fn manufactured_library(name: &str, tensor: &ElasticTensor) -> Result<Manufactured, UnknownSolution> {
    Ok(match name {
        "disk" => Manufactured::Scalar(disk([0.5, 0.5], 0.5, 0.01)),
        "bunny" => Manufactured::Scalar(bunny()),
        "moai" => Manufactured::Scalar(moai()),
        "eiffel" => Manufactured::Scalar(eiffel()),
        "armadillo" => Manufactured::Scalar(armadillo()),
        "linear" => Manufactured::Scalar(linear()),
        "star" => Manufactured::Vector(star(tensor)),
        other => return Err(UnknownSolution(other.to_string())),
    })
}
