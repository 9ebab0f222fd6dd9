//! Flat TOML run configuration.
//!
//! ```toml
//! experiment = "convergence"   # solve | convergence | lambda-sweep | rms-gap
//! geometry = "circle"          # circle | polygon | rotated-square | star | icosphere | stl
//! center = [0.5, 0.5]
//! radius = 0.5
//! bbox_lo = [0.0, 0.0]
//! bbox_hi = [1.0, 1.0]
//! levels = [5, 6, 7, 8]
//! lambdas = [0.0, 0.5, 1.0]
//! solution = "disk"
//! ```
//!
//! Every other key has a default; see [`RunConfig`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::{AssemblyOptions, ElasticTensor, Terms};
use crate::bbox::BoundingBox;
use crate::geometry::soup::icosphere;
use crate::geometry::{load_stl, Geometry, GeometryError, Polygon, Shape, TriangleSoup};
use crate::pipeline::Params;
use crate::solve::manufactured::NAMES;
use crate::solve::{manufactured_library, Manufactured, SolverOptions};
use crate::surrogate::{FractionRule, SurrogateOptions};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    Convergence,
    LambdaSweep,
    RmsGap,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::Convergence => "convergence",
            Experiment::LambdaSweep => "lambda-sweep",
            Experiment::RmsGap => "rms-gap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    Circle,
    Polygon,
    RotatedSquare,
    Star,
    Icosphere,
    Stl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Pde {
    #[default]
    Poisson,
    Elasticity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FractionKind {
    #[default]
    Weighted,
    Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub geometry: GeometryKind,

    /// Circle, rotated square, star, or icosphere centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    /// Circle or icosphere radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default = "defaults::side")]
    pub side: f64,
    /// Rotated-square angles in degrees; each is a separate geometry.
    #[serde(default = "defaults::angles")]
    pub angles: Vec<f64>,
    #[serde(default = "defaults::outer")]
    pub outer_radius: f64,
    #[serde(default = "defaults::inner")]
    pub inner_radius: f64,
    #[serde(default = "defaults::star_points")]
    pub star_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
    /// STL file, or a polygon vertex file. Relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default = "defaults::subdivisions")]
    pub subdivisions: u32,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox_lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox_hi: Option<Vec<f64>>,
    /// Fraction of the largest extent added on every side of the geometry
    /// bounds when no explicit box is given.
    #[serde(default = "defaults::padding")]
    pub padding: f64,
    #[serde(default = "defaults::carve")]
    pub carve: bool,

    pub levels: Vec<u32>,
    #[serde(default = "defaults::lambdas")]
    pub lambdas: Vec<f64>,

    #[serde(default)]
    pub pde: Pde,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<String>,
    /// α for Poisson, γ for elasticity.
    #[serde(default = "defaults::penalty")]
    pub penalty: f64,
    #[serde(default = "defaults::youngs")]
    pub youngs: f64,
    #[serde(default = "defaults::poisson_ratio")]
    pub poisson_ratio: f64,

    #[serde(default = "defaults::tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default = "defaults::candidates")]
    pub candidates: usize,
    #[serde(default)]
    pub fraction_rule: FractionKind,
    #[serde(default = "defaults::fraction_points")]
    pub fraction_points: usize,
    #[serde(default = "defaults::face_points")]
    pub face_points: usize,
    #[serde(default = "defaults::volume_points")]
    pub volume_points: usize,
    #[serde(default = "defaults::error_points")]
    pub error_points: usize,

    #[serde(default)]
    pub write_markers: bool,
    #[serde(default)]
    pub write_vtk: bool,
    /// Recorded in the effective config; every stage is deterministic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

mod defaults {
    pub fn side() -> f64 {
        0.5
    }
    pub fn angles() -> Vec<f64> {
        vec![15.0]
    }
    pub fn outer() -> f64 {
        1.0
    }
    pub fn inner() -> f64 {
        0.5
    }
    pub fn star_points() -> usize {
        5
    }
    pub fn subdivisions() -> u32 {
        2
    }
    pub fn padding() -> f64 {
        0.05
    }
    pub fn carve() -> bool {
        true
    }
    pub fn lambdas() -> Vec<f64> {
        vec![0.5]
    }
    pub fn penalty() -> f64 {
        400.0
    }
    pub fn youngs() -> f64 {
        1.0
    }
    pub fn poisson_ratio() -> f64 {
        0.3
    }
    pub fn tolerance() -> f64 {
        1e-12
    }
    pub fn candidates() -> usize {
        crate::geometry::DEFAULT_CANDIDATES
    }
    pub fn fraction_points() -> usize {
        5
    }
    pub fn face_points() -> usize {
        2
    }
    pub fn volume_points() -> usize {
        2
    }
    pub fn error_points() -> usize {
        5
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// One geometry instance of a run with its label and grid box.
pub struct Case {
    pub label: String,
    pub geometry: Geometry,
    pub bbox: BoundingBox,
}

impl RunConfig {
    /// Parses a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(p), Some(dir)) = (&cfg.path, path.parent()) {
            if p.is_relative() {
                cfg.path = Some(dir.join(p));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.levels.is_empty() {
            return Err(invalid("`levels` is empty"));
        }
        if self.lambdas.is_empty() {
            return Err(invalid("`lambdas` is empty"));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(invalid(format!("λ = {l} is outside [0, 1]")));
        }
        if self.experiment == Experiment::Convergence && self.levels.len() < 3 {
            return Err(invalid("convergence needs at least three levels"));
        }
        if self.experiment == Experiment::LambdaSweep && !self.lambdas.contains(&1.0) {
            return Err(invalid("lambda-sweep needs λ = 1 as the reference"));
        }
        let needs_path = matches!(self.geometry, GeometryKind::Stl)
            || (self.geometry == GeometryKind::Polygon && self.vertices.is_none());
        if needs_path {
            match &self.path {
                None => return Err(invalid("geometry needs `path`")),
                Some(p) if !p.is_file() => return Err(invalid(format!("{} does not exist", p.display()))),
                _ => {}
            }
        }
        if matches!(self.geometry, GeometryKind::Circle) && (self.center.is_none() || self.radius.is_none()) {
            return Err(invalid("circle needs `center` and `radius`"));
        }
        if self.bbox_lo.is_some() != self.bbox_hi.is_some() {
            return Err(invalid("give both `bbox_lo` and `bbox_hi` or neither"));
        }
        if !(self.padding >= 0.0) {
            return Err(invalid("`padding` must be non-negative"));
        }
        if self.experiment != Experiment::RmsGap {
            let name = self.solution.as_deref().ok_or_else(|| invalid("`solution` is required"))?;
            match (self.pde, manufactured_library(name, &self.tensor())) {
                (_, Err(e)) => return Err(invalid(e.to_string())),
                (Pde::Poisson, Ok(Manufactured::Vector(_))) => {
                    return Err(invalid(format!("`{name}` is an elasticity solution")))
                }
                (Pde::Elasticity, Ok(Manufactured::Scalar(_))) => {
                    return Err(invalid(format!("`{name}` is a Poisson solution; known: {}", NAMES.join(", "))))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn tensor(&self) -> ElasticTensor {
        ElasticTensor::plane_stress(self.youngs, self.poisson_ratio)
    }

    pub fn problem(&self) -> Option<Manufactured> {
        manufactured_library(self.solution.as_deref()?, &self.tensor()).ok()
    }

    pub fn params(&self) -> Params {
        Params {
            penalty: self.penalty,
            tensor: self.tensor(),
            carve: self.carve,
            surrogate: SurrogateOptions {
                fraction_points: self.fraction_points,
                fraction_rule: match self.fraction_rule {
                    FractionKind::Weighted => FractionRule::Weighted,
                    FractionKind::Count => FractionRule::Count,
                },
                face_points: self.face_points,
            },
            assembly: AssemblyOptions {
                volume_points: self.volume_points,
                terms: Terms::ALL,
            },
            solver: SolverOptions {
                tolerance: self.tolerance,
                max_iterations: self.max_iterations,
            },
            error_points: self.error_points,
        }
    }

    fn center2(&self, default: [f64; 2]) -> Result<[f64; 2], GeometryError> {
        match self.center.as_deref() {
            None => Ok(default),
            Some([x, y]) => Ok([*x, *y]),
            Some(c) => Err(GeometryError::InvalidShape(format!("2D centre expected, got {c:?}"))),
        }
    }

    /// Builds the geometries of this run, one per rotated-square angle and
    /// one otherwise.
    pub fn cases(&self) -> Result<Vec<Case>, GeometryError> {
        let one = |label: String, geometry: Geometry| -> Result<Vec<Case>, GeometryError> {
            let bbox = self.bbox(&geometry)?;
            Ok(vec![Case { label, geometry, bbox }])
        };
        match self.geometry {
            GeometryKind::Circle => {
                let g = Geometry::circle(self.center2([0.5, 0.5])?, self.radius.unwrap_or(0.5))?;
                one("circle".into(), g)
            }
            GeometryKind::Polygon => {
                let poly = match &self.vertices {
                    Some(v) => Polygon::new(v)?,
                    None => Polygon::from_file(self.path.as_deref().expect("validated"))?,
                };
                one("polygon".into(), Geometry::from_shape(Shape::Polygon(poly)))
            }
            GeometryKind::Star => {
                let poly = Polygon::star(
                    self.center2([0.0, 0.0])?,
                    self.outer_radius,
                    self.inner_radius,
                    self.star_points,
                )?;
                one("star".into(), Geometry::from_shape(Shape::Polygon(poly)))
            }
            GeometryKind::RotatedSquare => self
                .angles
                .iter()
                .map(|&a| {
                    let poly = Polygon::rotated_square(self.center2([0.5, 0.5])?, self.side, a)?;
                    let g = Geometry::from_shape(Shape::Polygon(poly));
                    Ok(Case {
                        label: format!("rotated-square-{a}"),
                        bbox: self.bbox(&g)?,
                        geometry: g,
                    })
                })
                .collect(),
            GeometryKind::Icosphere => {
                let c = match self.center.as_deref() {
                    None => Vec3::repeat(0.5),
                    Some([x, y, z]) => Vec3::new(*x, *y, *z),
                    Some(c) => return Err(GeometryError::InvalidShape(format!("3D centre expected, got {c:?}"))),
                };
                let tris = icosphere(c, self.radius.unwrap_or(0.45), self.subdivisions);
                let (soup, _) = TriangleSoup::from_vertices(&tris)?;
                one("icosphere".into(), Geometry::soup(soup, self.candidates))
            }
            GeometryKind::Stl => {
                let path = self.path.as_deref().expect("validated");
                let loaded = load_stl(path)?;
                if loaded.dropped > 0 {
                    log::warn!("{}: dropped {} degenerate triangles", path.display(), loaded.dropped);
                }
                let label = path.file_stem().map_or("stl".into(), |s| s.to_string_lossy().into_owned());
                one(label, Geometry::soup(loaded.soup, self.candidates))
            }
        }
    }

    fn bbox(&self, g: &Geometry) -> Result<BoundingBox, GeometryError> {
        match (&self.bbox_lo, &self.bbox_hi) {
            (Some(lo), Some(hi)) => {
                if lo.len() != g.dim() || hi.len() != g.dim() {
                    return Err(GeometryError::InvalidShape(format!(
                        "bounding box must have {} coordinates",
                        g.dim()
                    )));
                }
                let bb = BoundingBox::new(lo, hi).map_err(|e| GeometryError::InvalidShape(e.to_string()))?;
                if !bb.contains_box(&g.bounds()) {
                    log::warn!("bounding box does not contain the whole geometry");
                }
                Ok(bb)
            }
            _ => Ok(g.bounds().padded_cube(self.padding)),
        }
    }
}
