//! Jacobi-preconditioned BiCGSTAB and a dense LU oracle.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::assembly::{Csr, SparseSystem};

/// Reductions are summed per fixed-size chunk and then in chunk order, so
/// results do not depend on the thread count.
const CHUNK: usize = 4096;

/// Restarts allowed after a breakdown or a drifted recursive residual.
const MAX_RESTARTS: usize = 8;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SolveError {
    #[error("Krylov breakdown after {iterations} iterations (relative residual {residual:.3e})")]
    Breakdown { iterations: usize, residual: f64 },
    #[error("no convergence in {iterations} iterations (relative residual {residual:.3e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("matrix is singular")]
    Singular,
    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative residual target `‖b − Ax‖ / ‖b‖`.
    pub tolerance: f64,
    /// Defaults to `50 √n`.
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Relative residual of the returned iterate, recomputed from scratch.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let parts: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    parts.iter().sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(a: &Csr, x: &[f64], b: &[f64], r: &mut [f64]) {
    a.mul_vec(x, r);
    r.par_iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
}

/// BiCGSTAB first; restarted GMRES if it breaks down or stalls.
pub fn solve(system: &SparseSystem, opts: &SolverOptions) -> Result<Solution, SolveError> {
    match bicgstab(&system.matrix, &system.rhs, opts) {
        Ok(s) => Ok(s),
        Err(SolveError::ZeroDiagonal(i)) => Err(SolveError::ZeroDiagonal(i)),
        Err(e) => {
            log::info!("{e}; falling back to GMRES({GMRES_RESTART})");
            gmres(&system.matrix, &system.rhs, opts)
        }
    }
}

fn default_cap(n: usize) -> usize {
    ((50.0 * (n as f64).sqrt()).ceil() as usize).max(50)
}

fn jacobi(a: &Csr) -> Result<Vec<f64>, SolveError> {
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| d == 0.0) {
        return Err(SolveError::ZeroDiagonal(i));
    }
    Ok(diag.iter().map(|d| 1.0 / d).collect())
}

pub fn bicgstab(a: &Csr, b: &[f64], opts: &SolverOptions) -> Result<Solution, SolveError> {
    let n = b.len();
    let max_iter = opts.max_iterations.unwrap_or_else(|| default_cap(n));
    let inv = jacobi(a)?;
    let precondition = |src: &[f64], dst: &mut [f64]| {
        dst.par_iter_mut()
            .zip(src.par_iter().zip(&inv))
            .for_each(|(o, (s, m))| *o = s * m);
    };

    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(Solution {
            values: x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let target = opts.tolerance * bnorm;

    let mut r = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut iterations = 0;
    let mut restarts = 0;

    'restart: loop {
        residual(a, &x, b, &mut r);
        let mut rnorm = norm(&r);
        if rnorm <= target {
            return Ok(Solution {
                values: x,
                iterations,
                residual: rnorm / bnorm,
            });
        }
        let r_hat = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        p.iter_mut().for_each(|e| *e = 0.0);
        v.iter_mut().for_each(|e| *e = 0.0);

        while iterations < max_iter {
            iterations += 1;
            let rho_new = dot(&r_hat, &r);
            if rho_new == 0.0 || omega == 0.0 {
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            p.par_iter_mut()
                .zip(r.par_iter().zip(&v))
                .for_each(|(pi, (ri, vi))| *pi = ri + beta * (*pi - omega * vi));
            precondition(&p, &mut y);
            a.mul_vec(&y, &mut v);
            let rv = dot(&r_hat, &v);
            if rv == 0.0 {
                break;
            }
            alpha = rho / rv;
            s.par_iter_mut()
                .zip(r.par_iter().zip(&v))
                .for_each(|(si, (ri, vi))| *si = ri - alpha * vi);
            if norm(&s) <= target {
                x.par_iter_mut().zip(&y).for_each(|(xi, yi)| *xi += alpha * yi);
                continue 'restart;
            }
            precondition(&s, &mut z);
            a.mul_vec(&z, &mut t);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            x.par_iter_mut()
                .zip(y.par_iter().zip(&z))
                .for_each(|(xi, (yi, zi))| *xi += alpha * yi + omega * zi);
            r.par_iter_mut()
                .zip(s.par_iter().zip(&t))
                .for_each(|(ri, (si, ti))| *ri = si - omega * ti);
            rnorm = norm(&r);
            if rnorm <= target {
                // confirm against the true residual before accepting
                continue 'restart;
            }
        }

        residual(a, &x, b, &mut r);
        let rel = norm(&r) / bnorm;
        if iterations >= max_iter {
            return Err(SolveError::MaxIterations {
                iterations,
                residual: rel,
            });
        }
        restarts += 1;
        if restarts > MAX_RESTARTS {
            return Err(SolveError::Breakdown {
                iterations,
                residual: rel,
            });
        }
        log::debug!("BiCGSTAB restart {restarts} at iteration {iterations}, residual {rel:.3e}");
    }
}

/// Krylov dimension between GMRES restarts.
pub const GMRES_RESTART: usize = 200;

/// Right-Jacobi-preconditioned GMRES(m) with modified Gram-Schmidt.
/// Restart cycles are capped by the same iteration budget as BiCGSTAB,
/// counted in inner steps and multiplied by the restart length.
pub fn gmres(a: &Csr, b: &[f64], opts: &SolverOptions) -> Result<Solution, SolveError> {
    let n = b.len();
    let m = GMRES_RESTART.min(n.max(1));
    let max_iter = opts.max_iterations.unwrap_or_else(|| default_cap(n) * 4);
    let inv = jacobi(a)?;
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(Solution {
            values: x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let target = opts.tolerance * bnorm;
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut iterations = 0;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut hess = vec![vec![0.0; m]; m + 1];
    let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);

    loop {
        residual(a, &x, b, &mut r);
        let beta = norm(&r);
        if beta <= target {
            return Ok(Solution {
                values: x,
                iterations,
                residual: beta / bnorm,
            });
        }
        if iterations >= max_iter {
            return Err(SolveError::MaxIterations {
                iterations,
                residual: beta / bnorm,
            });
        }
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && iterations < max_iter {
            iterations += 1;
            z.par_iter_mut()
                .zip(basis[k].par_iter().zip(&inv))
                .for_each(|(o, (v, d))| *o = v * d);
            let mut w = vec![0.0; n];
            a.mul_vec(&z, &mut w);
            for (j, v) in basis.iter().enumerate() {
                let hj = dot(&w, v);
                hess[j][k] = hj;
                w.par_iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hj * vi);
            }
            let hn = norm(&w);
            hess[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            let rho = hess[k][k].hypot(hess[k + 1][k]);
            if rho == 0.0 {
                return Err(SolveError::Breakdown {
                    iterations,
                    residual: g[k].abs() / bnorm,
                });
            }
            cs[k] = hess[k][k] / rho;
            sn[k] = hess[k + 1][k] / rho;
            hess[k][k] = rho;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k += 1;
            if hn == 0.0 || g[k].abs() <= target {
                break;
            }
            w.iter_mut().for_each(|e| *e /= hn);
            basis.push(w);
        }
        // back substitution, then x += M⁻¹ V y
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| hess[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / hess[i][i];
        }
        let mut update = vec![0.0; n];
        for (v, yi) in basis.iter().zip(&y) {
            update.par_iter_mut().zip(v).for_each(|(u, vi)| *u += yi * vi);
        }
        x.par_iter_mut()
            .zip(update.par_iter().zip(&inv))
            .for_each(|(xi, (u, d))| *xi += u * d);
    }
}

/// Dense LU solve; meant for small systems and as a test oracle.
pub fn solve_dense(system: &SparseSystem) -> Result<Solution, SolveError> {
    let a = system.matrix.to_dense();
    let b = DVector::from_column_slice(&system.rhs);
    let x = a.clone().lu().solve(&b).ok_or(SolveError::Singular)?;
    let bnorm = b.norm();
    let res = (&b - &a * &x).norm();
    Ok(Solution {
        values: x.iter().copied().collect(),
        iterations: 0,
        residual: if bnorm > 0.0 { res / bnorm } else { res },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Triplets;

    #[test]
    fn one_by_one() {
        let mut t = Triplets::new();
        t.push(0, 0, 2.0);
        let a = t.to_csr(1, 1);
        let x = bicgstab(&a, &[4.0], &SolverOptions::default()).unwrap();
        assert_eq!(x.values, vec![2.0]);
    }

    fn convection_diffusion(n: usize) -> Csr {
        let mut t = Triplets::new();
        for i in 0..n {
            t.push(i, i, 4.0);
            if i > 0 {
                t.push(i, i - 1, -1.5);
            }
            if i + 1 < n {
                t.push(i, i + 1, -0.5);
            }
        }
        t.to_csr(n, n)
    }

    #[test]
    fn nonsymmetric_tridiagonal_matches_dense() {
        let n = 200;
        let a = convection_diffusion(n);
        let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let it = bicgstab(&a, &b, &SolverOptions::default()).unwrap();
        assert!(it.residual <= 1e-12);
        let dense = a.to_dense().lu().solve(&DVector::from_column_slice(&b)).unwrap();
        let worst = it
            .values
            .iter()
            .zip(dense.iter())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let a = convection_diffusion(50);
        let b = vec![1.0; 50];
        let opts = SolverOptions {
            tolerance: 1e-14,
            max_iterations: Some(1),
        };
        assert!(matches!(
            bicgstab(&a, &b, &opts),
            Err(SolveError::MaxIterations { iterations: 1, .. })
        ));
    }

    #[test]
    fn gmres_matches_bicgstab() {
        let n = 300;
        let a = convection_diffusion(n);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let opts = SolverOptions::default();
        let g = gmres(&a, &b, &opts).unwrap();
        let c = bicgstab(&a, &b, &opts).unwrap();
        assert!(g.residual <= 1e-12);
        let worst = g.values.iter().zip(&c.values).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = convection_diffusion(5);
        let x = bicgstab(&a, &[0.0; 5], &SolverOptions::default()).unwrap();
        assert_eq!(x.values, vec![0.0; 5]);
    }
}
