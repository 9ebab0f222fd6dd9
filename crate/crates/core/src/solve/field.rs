//! Evaluating a solved field and measuring its error on the true domain.

use rayon::prelude::*;

use crate::assembly::DofMap;
use crate::geometry::{Geometry, GeometryError};
use crate::mesh::{gauss_rule, shape_eval, Mesh};
use crate::surrogate::{Marker, SurrogateBoundary};
use crate::Vec3;

/// Initial half-width, in cells, of the window searched for extension
/// faces. The window doubles until the nearest face found is provably the
/// global nearest: a face owned `r + 1` cells away is at least `r h` off.
const SEARCH_CELLS: i64 = 3;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("point {0:?} is outside the grid")]
    Outside([f64; 3]),
    #[error("no surrogate face to extend from at {0:?}")]
    NoSurrogateFace([f64; 3]),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Nodal values over the active degrees of freedom.
#[derive(Debug, Clone)]
pub struct SolutionField<'a> {
    pub mesh: &'a Mesh,
    pub boundary: &'a SurrogateBoundary,
    pub dofs: DofMap,
    pub values: Vec<f64>,
    faces_by_owner: std::collections::HashMap<usize, Vec<usize>>,
}

fn arr(p: &Vec3) -> [f64; 3] {
    [p[0], p[1], p[2]]
}

impl<'a> SolutionField<'a> {
    pub fn new(mesh: &'a Mesh, boundary: &'a SurrogateBoundary, dofs: DofMap, values: Vec<f64>) -> Self {
        assert_eq!(dofs.n_dofs(), values.len());
        let mut faces_by_owner: std::collections::HashMap<usize, Vec<usize>> = Default::default();
        for (i, f) in boundary.faces.iter().enumerate() {
            faces_by_owner.entry(f.owner()).or_default().push(i);
        }
        Self {
            mesh,
            boundary,
            dofs,
            values,
            faces_by_owner,
        }
    }

    pub fn components(&self) -> usize {
        self.dofs.per_node
    }

    /// Value and gradient of `component` of the element polynomial of active
    /// element `e` at `p` (which may lie outside the element).
    pub fn element_polynomial(&self, e: usize, p: &Vec3, component: usize) -> (f64, Vec3) {
        let dim = self.mesh.dim();
        let el = self.mesh.element(e);
        let s = shape_eval(&el.to_local(p, dim), dim);
        let mut value = 0.0;
        let mut grad = Vec3::zeros();
        for (a, &n) in self.mesh.element_nodes(e).iter().enumerate() {
            let u = self.values[self.dofs.dof(n, component).expect("active element node")];
            value += s.values[a] * u;
            for i in 0..dim {
                grad[i] += s.gradients[a][i] * 2.0 / el.size[i] * u;
            }
        }
        (value, grad)
    }

    /// Faces owned by elements within `radius` cells of `cell`.
    fn candidates(&self, cell: [u32; 3], radius: i64) -> Vec<usize> {
        let dim = self.mesh.dim();
        let n = self.mesh.cells_per_axis() as i64;
        let mut out = Vec::new();
        let range = -radius..=radius;
        let zr = if dim == 3 { range.clone() } else { 0..=0 };
        for dz in zr {
            for dy in range.clone() {
                for dx in range.clone() {
                    let c = [cell[0] as i64 + dx, cell[1] as i64 + dy, cell[2] as i64 + dz];
                    if c[..dim].iter().any(|&v| v < 0 || v >= n) {
                        continue;
                    }
                    if let Some(e) = self.mesh.element_at([c[0] as u32, c[1] as u32, c[2] as u32]) {
                        if let Some(fs) = self.faces_by_owner.get(&e) {
                            out.extend_from_slice(fs);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Nearest point on one of `candidates` to `p`, with its face index.
    fn nearest_on_faces(&self, p: &Vec3, candidates: &[usize]) -> Option<(usize, Vec3, f64)> {
        let dim = self.mesh.dim();
        let mut best: Option<(usize, Vec3, f64)> = None;
        for &i in candidates {
            let f = &self.boundary.faces[i].face;
            let el = self.mesh.element(f.owner);
            let mut q = *p;
            for k in 0..dim {
                let lo = el.anchor[k];
                let hi = el.anchor[k] + el.size[k];
                q[k] = if k == f.axis {
                    if f.side.sign() > 0.0 {
                        hi
                    } else {
                        lo
                    }
                } else {
                    p[k].clamp(lo, hi)
                };
            }
            let dist = (q - p).norm();
            if best.is_none_or(|(_, _, bd)| dist < bd) {
                best = Some((i, q, dist));
            }
        }
        best
    }

    fn evaluate_with(
        &self,
        p: &Vec3,
        component: usize,
        candidates: &mut Option<([u32; 3], i64, Vec<usize>)>,
    ) -> Result<(f64, Vec3), EvalError> {
        let cell = self.mesh.cell_of(p).ok_or(EvalError::Outside(arr(p)))?;
        if let Some(e) = self.mesh.element_at(cell) {
            if self.boundary.is_active(e) {
                return Ok(self.element_polynomial(e, p, component));
            }
        }
        let h = (0..self.mesh.dim()).map(|i| self.mesh.h()[i]).fold(f64::INFINITY, f64::min);
        let n = self.mesh.cells_per_axis() as i64;
        let mut radius = match candidates {
            Some((c, r, _)) if *c == cell => *r,
            _ => SEARCH_CELLS,
        };
        loop {
            if candidates.as_ref().is_none_or(|(c, r, _)| *c != cell || *r != radius) {
                *candidates = Some((cell, radius, self.candidates(cell, radius)));
            }
            let list = &candidates.as_ref().expect("just filled").2;
            let found = self.nearest_on_faces(p, list);
            let exhausted = radius >= n;
            match found {
                Some((face, q, dist)) if exhausted || dist <= radius as f64 * h => {
                    let owner = self.boundary.faces[face].owner();
                    let (value, grad) = self.element_polynomial(owner, &q, component);
                    return Ok((value + grad.dot(&(p - q)), grad));
                }
                None if exhausted => return Err(EvalError::NoSurrogateFace(arr(p))),
                _ => radius = (radius * 2).min(n),
            }
        }
    }

    /// Value and gradient of `component` at `p`: interpolation inside the
    /// active domain, first-order Taylor extension from the nearest
    /// surrogate-boundary point elsewhere.
    pub fn evaluate(&self, p: &Vec3, component: usize) -> Result<(f64, Vec3), EvalError> {
        self.evaluate_with(p, component, &mut None)
    }

    /// L2 error against `exact` over Ω, one entry per component. Integrates
    /// with `points`^dim Gauss points over every element that is not
    /// Exterior, keeping only points inside the geometry.
    pub fn l2_error(
        &self,
        exact: &(dyn Fn(&Vec3) -> Vec3 + Send + Sync),
        geometry: &Geometry,
        points: usize,
    ) -> Result<ErrorReport, EvalError> {
        let dim = self.mesh.dim();
        let nc = self.components();
        let rule = gauss_rule(points, dim);
        let tags = &self.boundary.markers.tags;
        let parts = (0..self.mesh.n_elements())
            .into_par_iter()
            .filter(|&e| tags[e] != Marker::Exterior)
            .map(|e| {
                let el = self.mesh.element(e);
                let jac = el.jacobian(dim);
                let mut err = [0.0; 3];
                let mut measure = 0.0;
                let mut cache = None;
                for (q, w) in rule.iter() {
                    let x = el.to_physical(q, dim);
                    if !geometry.inside(&x)? {
                        continue;
                    }
                    let wj = w * jac;
                    measure += wj;
                    let u = exact(&x);
                    for (c, slot) in err.iter_mut().enumerate().take(nc) {
                        let (uh, _) = self.evaluate_with(&x, c, &mut cache)?;
                        *slot += wj * (uh - u[c]).powi(2);
                    }
                }
                Ok((err, measure))
            })
            .collect::<Result<Vec<_>, EvalError>>()?;

        let mut err2 = vec![0.0; nc];
        let mut measure = 0.0;
        for (e, m) in &parts {
            for c in 0..nc {
                err2[c] += e[c];
            }
            measure += m;
        }
        let l2: Vec<f64> = err2.iter().map(|v| v.sqrt()).collect();
        let l2n = l2.iter().map(|v| v / measure.sqrt()).collect();
        Ok(ErrorReport {
            level: self.mesh.level(),
            h: self.mesh.h()[0],
            lambda: self.boundary.lambda,
            l2,
            measure,
            l2n,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub level: u32,
    pub h: f64,
    pub lambda: f64,
    /// `‖u_h − u‖` per component.
    pub l2: Vec<f64>,
    /// `∫_Ω dΩ` from the same quadrature points.
    pub measure: f64,
    /// `‖u_h − u‖ / √∫_Ω dΩ` per component.
    pub l2n: Vec<f64>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AnalysisError {
    #[error("reference error is zero")]
    ZeroDenominator,
    #[error("need at least {needed} levels, got {got}")]
    TooFewLevels { needed: usize, got: usize },
    #[error("levels must be strictly increasing")]
    Unordered,
}

/// `L2N(λ) / L2N(λ = 1)` for one component.
pub fn improvement_factor(report: &ErrorReport, reference: &ErrorReport, component: usize) -> Result<f64, AnalysisError> {
    let den = reference.l2n[component];
    if den == 0.0 {
        return Err(AnalysisError::ZeroDenominator);
    }
    Ok(report.l2n[component] / den)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub reports: Vec<ErrorReport>,
}

impl ConvergenceTable {
    pub fn new(reports: Vec<ErrorReport>) -> Result<Self, AnalysisError> {
        if reports.windows(2).any(|w| w[1].level <= w[0].level) {
            return Err(AnalysisError::Unordered);
        }
        Ok(Self { reports })
    }

    /// Least-squares slope of `log L2N` against `log h`.
    pub fn slope(&self, component: usize) -> Result<f64, AnalysisError> {
        let pts: Vec<(f64, f64)> = self
            .reports
            .iter()
            .map(|r| (r.h.ln(), r.l2n[component].ln()))
            .collect();
        fit_slope(&pts)
    }
}

/// Least-squares slope through `(x, y)` pairs; needs three or more.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<f64, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::TooFewLevels {
            needed: 3,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
