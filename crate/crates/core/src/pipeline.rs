//! One shifted-boundary solve from grid to error report.

use std::time::Instant;

use crate::assembly::{assemble_elasticity, assemble_poisson, AssemblyError, AssemblyOptions, ElasticTensor};
use crate::bbox::BoundingBox;
use crate::geometry::Geometry;
use crate::mesh::{Mesh, MeshError};
use crate::solve::{solve, ErrorReport, EvalError, Manufactured, SolutionField, SolveError, SolverOptions};
use crate::surrogate::{identify_surrogate, GapMode, SurrogateBoundary, SurrogateError, SurrogateOptions};
use crate::Vec3;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("active domain is empty")]
    EmptyDomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// α for Poisson, γ for elasticity.
    pub penalty: f64,
    pub tensor: ElasticTensor,
    pub carve: bool,
    pub surrogate: SurrogateOptions,
    pub assembly: AssemblyOptions,
    pub solver: SolverOptions,
    /// Gauss points per axis for the error integral.
    pub error_points: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            penalty: 400.0,
            tensor: ElasticTensor::plane_stress(1.0, 0.3),
            carve: true,
            surrogate: SurrogateOptions::default(),
            assembly: AssemblyOptions::default(),
            solver: SolverOptions::default(),
            error_points: 5,
        }
    }
}

/// Wall time per stage, seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timings {
    pub grid: f64,
    pub surrogate: f64,
    pub assembly: f64,
    pub solve: f64,
    pub error: f64,
}

impl Timings {
    pub fn total(&self) -> f64 {
        self.grid + self.surrogate + self.assembly + self.solve + self.error
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: ErrorReport,
    pub timings: Timings,
    pub n_dofs: usize,
    pub iterations: usize,
    pub residual: f64,
    pub rms_gap: Option<f64>,
    pub cycle_fixes: usize,
}

/// Grid and surrogate for one `(level, λ)`.
pub fn surrogate_case(
    bbox: &BoundingBox,
    level: u32,
    geometry: &Geometry,
    lambda: f64,
    params: &Params,
    timings: &mut Timings,
) -> Result<(Mesh, SurrogateBoundary), PipelineError> {
    let t = Instant::now();
    let mesh = Mesh::build(bbox, level, params.carve.then_some(geometry))?;
    timings.grid = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let boundary = identify_surrogate(&mesh, geometry, lambda, &params.surrogate)?;
    timings.surrogate = t.elapsed().as_secs_f64();
    if boundary.markers.n_active() == 0 {
        return Err(PipelineError::EmptyDomain);
    }
    Ok((mesh, boundary))
}

/// Assembles and solves on a prepared surrogate, returning nodal values.
pub fn solve_on<'a>(
    mesh: &'a Mesh,
    boundary: &'a SurrogateBoundary,
    problem: &Manufactured,
    params: &Params,
    timings: &mut Timings,
) -> Result<(SolutionField<'a>, usize, f64), PipelineError> {
    let t = Instant::now();
    let system = match problem {
        Manufactured::Scalar(s) => assemble_poisson(
            mesh,
            boundary,
            params.penalty,
            &*s.forcing,
            &*s.exact,
            &params.assembly,
        )?,
        Manufactured::Vector(v) => assemble_elasticity(
            mesh,
            boundary,
            &params.tensor,
            params.penalty,
            &*v.body_force,
            &*v.exact,
            &params.assembly,
        )?,
    };
    timings.assembly = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let sol = solve(&system, &params.solver)?;
    timings.solve = t.elapsed().as_secs_f64();
    log::info!(
        "level {} λ={} dofs {} iterations {} residual {:.2e}",
        mesh.level(),
        boundary.lambda,
        system.dofs.n_dofs(),
        sol.iterations,
        sol.residual
    );
    let field = SolutionField::new(mesh, boundary, system.dofs, sol.values);
    Ok((field, sol.iterations, sol.residual))
}

pub fn exact_vector(problem: &Manufactured) -> Box<dyn Fn(&Vec3) -> Vec3 + Send + Sync> {
    match problem {
        Manufactured::Scalar(s) => {
            let u = s.exact.clone();
            Box::new(move |p| Vec3::new(u(p), 0.0, 0.0))
        }
        Manufactured::Vector(v) => {
            let u = v.exact.clone();
            Box::new(move |p| u(p))
        }
    }
}

/// Full run: grid, surrogate, assembly, solve, and the L2 error on Ω.
pub fn run_case(
    bbox: &BoundingBox,
    level: u32,
    geometry: &Geometry,
    lambda: f64,
    problem: &Manufactured,
    params: &Params,
) -> Result<Outcome, PipelineError> {
    let mut timings = Timings::default();
    let (mesh, boundary) = surrogate_case(bbox, level, geometry, lambda, params, &mut timings)?;
    let (field, iterations, residual) = solve_on(&mesh, &boundary, problem, params, &mut timings)?;
    let t = Instant::now();
    let report = field.l2_error(&*exact_vector(problem), geometry, params.error_points)?;
    timings.error = t.elapsed().as_secs_f64();
    Ok(Outcome {
        report,
        timings,
        n_dofs: field.values.len(),
        iterations,
        residual,
        rms_gap: boundary.rms_gap(GapMode::Weighted),
        cycle_fixes: boundary.cycle_fixes,
    })
}
