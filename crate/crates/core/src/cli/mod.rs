//! Configuration-driven experiment runner.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::geometry::GeometryError;
use crate::pipeline::{exact_vector, solve_on, surrogate_case, PipelineError, Timings};
use crate::solve::{improvement_factor, ConvergenceTable, ErrorReport, EvalError, Manufactured};
use crate::surrogate::{GapMode, SurrogateError};

pub use config::{ConfigError, Experiment, RunConfig};
pub use output::{read_results, write_results, ResultRow, RESULTS_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("{0}")]
    Failed(String),
    #[error("writing {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(_) => 3,
            RunError::Geometry(_) => 4,
            RunError::Failed(_) | RunError::Output { .. } => 1,
        }
    }
}

impl From<GeometryError> for RunError {
    fn from(e: GeometryError) -> Self {
        RunError::Geometry(e.to_string())
    }
}

impl From<PipelineError> for RunError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Solve(s) => RunError::Solver(s.to_string()),
            PipelineError::Surrogate(SurrogateError::Geometry(g)) | PipelineError::Eval(EvalError::Geometry(g)) => {
                RunError::Geometry(g.to_string())
            }
            PipelineError::Mesh(m) => RunError::Config(ConfigError::Invalid(m.to_string())),
            other => RunError::Failed(other.to_string()),
        }
    }
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Metric suffixes per solution component.
fn component_names(problem: &Manufactured) -> Vec<&'static str> {
    match problem {
        Manufactured::Scalar(_) => vec![""],
        Manufactured::Vector(_) => vec!["_ux", "_uy"],
    }
}

struct Rows<'a> {
    experiment: &'a str,
    geometry: &'a str,
    rows: Vec<ResultRow>,
}

impl Rows<'_> {
    fn push(&mut self, level: Option<u32>, h: Option<f64>, lambda: Option<f64>, metric: String, value: f64, wall: f64) {
        self.rows.push(ResultRow {
            experiment: self.experiment.into(),
            geometry: self.geometry.into(),
            level,
            h,
            lambda,
            metric,
            value,
            wall_time_s: wall,
        });
    }

    fn timings(&mut self, level: u32, h: f64, lambda: f64, t: &Timings, solved: bool) {
        let mut stages = vec![("grid", t.grid), ("surrogate", t.surrogate)];
        if solved {
            stages.extend([("assembly", t.assembly), ("solve", t.solve), ("error", t.error)]);
        }
        for (name, secs) in stages {
            self.push(Some(level), Some(h), Some(lambda), format!("time_{name}"), secs, secs);
        }
    }
}

/// Runs every case of `cfg`, writing artifacts under `out` and returning
/// the rows written to `results.csv`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<Vec<ResultRow>, RunError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| output_error(out, e))?;
    let eff = out.join("config.effective.toml");
    std::fs::write(&eff, cfg.to_toml()).map_err(|e| output_error(&eff, e))?;

    let params = cfg.params();
    let problem = cfg.problem();
    let mut all = Vec::new();
    for case in cfg.cases()? {
        if cfg.pde == config::Pde::Elasticity && case.geometry.dim() != 2 {
            return Err(ConfigError::Invalid("elasticity runs are 2D only".into()).into());
        }
        let mut rows = Rows {
            experiment: cfg.experiment.name(),
            geometry: &case.label,
            rows: Vec::new(),
        };
        let mut reports: Vec<ErrorReport> = Vec::new();
        for &level in &cfg.levels {
            for &lambda in &cfg.lambdas {
                let start = Instant::now();
                let mut t = Timings::default();
                let (mesh, boundary) = surrogate_case(&case.bbox, level, &case.geometry, lambda, &params, &mut t)?;
                let h = mesh.h()[0];
                let tag = format!("{}_L{level}_lam{lambda}", case.label);
                if cfg.write_markers {
                    let p = out.join(format!("markers_{tag}.csv"));
                    output::write_markers(&p, &mesh, &boundary).map_err(|e| output_error(&p, e))?;
                }
                if let Some(gap) = boundary.rms_gap(GapMode::Weighted) {
                    rows.push(Some(level), Some(h), Some(lambda), "rms_gap".into(), gap, t.surrogate);
                }
                rows.push(
                    Some(level),
                    Some(h),
                    Some(lambda),
                    "surrogate_faces".into(),
                    boundary.faces.len() as f64,
                    t.surrogate,
                );
                let Some(problem) = problem.as_ref().filter(|_| cfg.experiment != Experiment::RmsGap) else {
                    rows.timings(level, h, lambda, &t, false);
                    if cfg.write_vtk {
                        let p = out.join(format!("boundary_{tag}.vtk"));
                        output::write_boundary_vtk(&p, &mesh, &boundary).map_err(|e| output_error(&p, e))?;
                    }
                    continue;
                };
                let (field, iterations, residual) = solve_on(&mesh, &boundary, problem, &params, &mut t)?;
                let te = Instant::now();
                let report = field
                    .l2_error(&*exact_vector(problem), &case.geometry, params.error_points)
                    .map_err(PipelineError::from)?;
                t.error = te.elapsed().as_secs_f64();
                let wall = start.elapsed().as_secs_f64();
                for (c, suffix) in component_names(problem).iter().enumerate() {
                    rows.push(Some(level), Some(h), Some(lambda), format!("l2n{suffix}"), report.l2n[c], wall);
                    rows.push(Some(level), Some(h), Some(lambda), format!("l2{suffix}"), report.l2[c], wall);
                }
                rows.push(Some(level), Some(h), Some(lambda), "dofs".into(), field.values.len() as f64, wall);
                rows.push(Some(level), Some(h), Some(lambda), "iterations".into(), iterations as f64, wall);
                rows.push(Some(level), Some(h), Some(lambda), "residual".into(), residual, wall);
                rows.timings(level, h, lambda, &t, true);
                if cfg.write_vtk {
                    let p = out.join(format!("field_{tag}.vtk"));
                    output::write_vtk(&p, &mesh, &boundary, Some(&field)).map_err(|e| output_error(&p, e))?;
                    let p = out.join(format!("boundary_{tag}.vtk"));
                    output::write_boundary_vtk(&p, &mesh, &boundary).map_err(|e| output_error(&p, e))?;
                }
                log::info!("{tag}: L2N {:?} in {wall:.2}s", report.l2n);
                reports.push(report);
            }
        }
        if let Some(problem) = &problem {
            summarize(cfg, problem, &reports, &mut rows)?;
        }
        if cfg.experiment == Experiment::RmsGap {
            argmin_rows(cfg, &mut rows);
        }
        all.extend(rows.rows);
    }
    let p = out.join("results.csv");
    write_results(&p, &all).map_err(|e| output_error(&p, e))?;
    Ok(all)
}

/// Slopes per λ for convergence runs; improvement factors against λ = 1.
fn summarize(cfg: &RunConfig, problem: &Manufactured, reports: &[ErrorReport], rows: &mut Rows) -> Result<(), RunError> {
    let comps = component_names(problem);
    if cfg.experiment == Experiment::Convergence {
        for &lambda in &cfg.lambdas {
            let mut series: Vec<ErrorReport> = reports.iter().filter(|r| r.lambda == lambda).cloned().collect();
            series.sort_by_key(|r| r.level);
            let table = ConvergenceTable::new(series).map_err(|e| RunError::Failed(e.to_string()))?;
            for (c, suffix) in comps.iter().enumerate() {
                let slope = table.slope(c).map_err(|e| RunError::Failed(e.to_string()))?;
                rows.push(None, None, Some(lambda), format!("slope{suffix}"), slope, 0.0);
            }
        }
    }
    if matches!(cfg.experiment, Experiment::Convergence | Experiment::LambdaSweep) && cfg.lambdas.contains(&1.0) {
        for r in reports {
            let Some(reference) = reports.iter().find(|q| q.level == r.level && q.lambda == 1.0) else {
                continue;
            };
            for (c, suffix) in comps.iter().enumerate() {
                if let Ok(i) = improvement_factor(r, reference, c) {
                    rows.push(Some(r.level), Some(r.h), Some(r.lambda), format!("improvement{suffix}"), i, 0.0);
                }
            }
        }
    }
    Ok(())
}

/// λ minimizing the RMS gap at each level.
fn argmin_rows(cfg: &RunConfig, rows: &mut Rows) {
    for &level in &cfg.levels {
        let best = rows
            .rows
            .iter()
            .filter(|r| r.level == Some(level) && r.metric == "rms_gap")
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .map(|r| (r.lambda, r.h));
        if let Some((Some(lambda), h)) = best {
            rows.push(Some(level), h, None, "argmin_lambda".into(), lambda, 0.0);
        }
    }
}

/// Loads `path` and runs it; the entry point behind `sbm run`.
pub fn run_file(path: &Path, out: &Path, seed: Option<u64>) -> Result<Vec<ResultRow>, RunError> {
    let mut cfg = RunConfig::load(path)?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    run(&cfg, out)
}

