//! Iterative solvers for the assembled difference system.
//!
//! Both solvers stop when `||b - A x||_2 <= tol ||b||_2` and report the
//! recomputed true residual, never a running estimate.

use std::fmt;
use std::str::FromStr;

use crate::assembly::SparseSystem;
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
const BREAKDOWN: f64 = 1e-30;
const MAX_RESTARTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    BiCgStab,
    Sor,
}

impl fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMethod::BiCgStab => "bicgstab",
            SolverMethod::Sor => "sor",
        })
    }
}

impl FromStr for SolverMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "bicgstab" => Ok(SolverMethod::BiCgStab),
            "sor" => Ok(SolverMethod::Sor),
            other => Err(format!("unknown solver '{other}' (expected bicgstab or sor)")),
        }
    }
}

/// Solver choice and stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub method: SolverMethod,
    pub tol: f64,
    /// Defaults to `10 N` when unset.
    pub max_iter: Option<usize>,
    /// SOR relaxation factor in (0, 2).
    pub omega: f64,
    /// Diagonal (Jacobi) preconditioning for BiCGSTAB.
    pub jacobi: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            method: SolverMethod::BiCgStab,
            tol: DEFAULT_TOLERANCE,
            max_iter: None,
            omega: 1.0,
            jacobi: false,
        }
    }
}

impl SolverSettings {
    pub fn solve(&self, system: &SparseSystem) -> Result<SolveReport> {
        let max_iter = self.max_iter.unwrap_or(10 * system.len());
        match self.method {
            SolverMethod::BiCgStab => {
                if self.jacobi {
                    bicgstab_jacobi(system, self.tol, max_iter)
                } else {
                    bicgstab(system, self.tol, max_iter)
                }
            }
            SolverMethod::Sor => sor(system, self.omega, self.tol, max_iter),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `||A U - b||_2 / ||b||_2`, recomputed from the returned solution.
    pub final_residual: f64,
    pub converged: bool,
    pub method: SolverMethod,
    pub restarts: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Unpreconditioned BiCGSTAB from a zero initial guess.
pub fn bicgstab(system: &SparseSystem, tol: f64, max_iter: usize) -> Result<SolveReport> {
    bicgstab_with(system, tol, max_iter, None)
}

/// BiCGSTAB right-preconditioned by the inverse diagonal.
pub fn bicgstab_jacobi(system: &SparseSystem, tol: f64, max_iter: usize) -> Result<SolveReport> {
    let diag = system.matrix.diagonal();
    if let Some(row) = diag.iter().position(|d| *d == 0.0) {
        return Err(Error::ZeroDiagonal { row });
    }
    let inv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    bicgstab_with(system, tol, max_iter, Some(&inv))
}

fn bicgstab_with(
    system: &SparseSystem,
    tol: f64,
    max_iter: usize,
    inv_diag: Option<&[f64]>,
) -> Result<SolveReport> {
    check_tolerance(tol)?;
    let a = &system.matrix;
    let b = &system.rhs;
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(SolveReport {
            solution: x,
            iterations: 0,
            final_residual: 0.0,
            converged: true,
            method: SolverMethod::BiCgStab,
            restarts: 0,
        });
    }
    let target = tol * b_norm;
    let precondition = |src: &[f64], dst: &mut [f64]| match inv_diag {
        Some(inv) => {
            for ((d, s), m) in dst.iter_mut().zip(src).zip(inv) {
                *d = s * m;
            }
        }
        None => dst.copy_from_slice(src),
    };

    let mut r = b.clone();
    let mut r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut rho_prev, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut restarts = 0;
    let mut iterations = 0;
    let mut converged = false;

    let restart = |x: &[f64], r: &mut Vec<f64>, r_hat: &mut Vec<f64>, p: &mut [f64], v: &mut [f64]| {
        let ax = a.mul_vec(x);
        for ((ri, bi), axi) in r.iter_mut().zip(b).zip(&ax) {
            *ri = bi - axi;
        }
        r_hat.copy_from_slice(r);
        p.fill(0.0);
        v.fill(0.0);
    };

    while iterations < max_iter {
        let rho = dot(&r_hat, &r);
        if rho.abs() < BREAKDOWN {
            if restarts == MAX_RESTARTS {
                break;
            }
            restarts += 1;
            restart(&x, &mut r, &mut r_hat, &mut p, &mut v);
            (rho_prev, alpha, omega) = (1.0, 1.0, 1.0);
            if norm(&r) <= target {
                converged = true;
                break;
            }
            continue;
        }
        iterations += 1;
        let beta = (rho / rho_prev) * (alpha / omega);
        for ((pi, ri), vi) in p.iter_mut().zip(&r).zip(&v) {
            *pi = ri + beta * (*pi - omega * vi);
        }
        precondition(&p, &mut p_hat);
        a.mul_vec_into(&p_hat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.abs() < BREAKDOWN {
            if restarts == MAX_RESTARTS {
                break;
            }
            restarts += 1;
            restart(&x, &mut r, &mut r_hat, &mut p, &mut v);
            (rho_prev, alpha, omega) = (1.0, 1.0, 1.0);
            continue;
        }
        alpha = rho / denom;
        for ((si, ri), vi) in s.iter_mut().zip(&r).zip(&v) {
            *si = ri - alpha * vi;
        }
        if norm(&s) <= target {
            for (xi, pi) in x.iter_mut().zip(&p_hat) {
                *xi += alpha * pi;
            }
            if system.relative_residual(&x) <= tol {
                converged = true;
                break;
            }
            if restarts == MAX_RESTARTS {
                break;
            }
            restarts += 1;
            restart(&x, &mut r, &mut r_hat, &mut p, &mut v);
            (rho_prev, alpha, omega) = (1.0, 1.0, 1.0);
            continue;
        }
        precondition(&s, &mut s_hat);
        a.mul_vec_into(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for ((xi, pi), si) in x.iter_mut().zip(&p_hat).zip(&s_hat) {
            *xi += alpha * pi + omega * si;
        }
        for ((ri, si), ti) in r.iter_mut().zip(&s).zip(&t) {
            *ri = si - omega * ti;
        }
        rho_prev = rho;
        if norm(&r) <= target {
            if system.relative_residual(&x) <= tol {
                converged = true;
                break;
            }
            if restarts == MAX_RESTARTS {
                break;
            }
            restarts += 1;
            restart(&x, &mut r, &mut r_hat, &mut p, &mut v);
            (rho_prev, alpha, omega) = (1.0, 1.0, 1.0);
            continue;
        }
        if omega.abs() < BREAKDOWN {
            if restarts == MAX_RESTARTS {
                break;
            }
            restarts += 1;
            restart(&x, &mut r, &mut r_hat, &mut p, &mut v);
            (rho_prev, alpha, omega) = (1.0, 1.0, 1.0);
        }
    }

    let final_residual = system.relative_residual(&x);
    Ok(SolveReport {
        solution: x,
        iterations,
        final_residual,
        converged: converged && final_residual <= tol,
        method: SolverMethod::BiCgStab,
        restarts,
    })
}

/// Forward successive over-relaxation from a zero initial guess.
pub fn sor(system: &SparseSystem, omega: f64, tol: f64, max_iter: usize) -> Result<SolveReport> {
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::InvalidArgument(format!(
            "relaxation factor must lie in (0, 2), got {omega}"
        )));
    }
    check_tolerance(tol)?;
    let a = &system.matrix;
    let b = &system.rhs;
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|d| *d == 0.0) {
        return Err(Error::ZeroDiagonal { row });
    }
    let mut x = vec![0.0; b.len()];
    let mut iterations = 0;
    let mut residual = system.relative_residual(&x);
    if norm(b) == 0.0 {
        residual = 0.0;
    }
    while residual > tol && iterations < max_iter && residual.is_finite() {
        for i in 0..b.len() {
            let (cols, vals) = a.row(i);
            let off: f64 = cols
                .iter()
                .zip(vals)
                .filter(|(&j, _)| j != i)
                .map(|(&j, aij)| aij * x[j])
                .sum();
            x[i] = (1.0 - omega) * x[i] + omega * (b[i] - off) / diag[i];
        }
        iterations += 1;
        residual = system.relative_residual(&x);
    }
    Ok(SolveReport {
        solution: x,
        iterations,
        final_residual: residual,
        converged: residual <= tol,
        method: SolverMethod::Sor,
        restarts: 0,
    })
}
