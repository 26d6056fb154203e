//! Jacobi-preconditioned Krylov solvers and Dirichlet elimination.

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Relative residual target for every linear solve.
///
/// There is no absolute floor: late-time solutions with `γ` near 1 reach
/// magnitudes around 1e-30, and any fixed floor would accept `x = 0`.
pub const RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(a: &SparseMatrix, x: &[f64], b: &[f64], r: &mut [f64]) {
    a.mul_vec_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

fn jacobi(a: &SparseMatrix) -> Vec<f64> {
    a.diagonal().into_iter().map(|d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect()
}

fn target(b: &[f64]) -> f64 {
    RTOL * norm2(b)
}

/// Preconditioned conjugate gradients for symmetric positive definite `a`.
/// `x` holds the initial guess on entry and the solution on success.
pub fn conjugate_gradient(a: &SparseMatrix, b: &[f64], x: &mut [f64]) -> Result<SolveStats> {
    let n = b.len();
    let tol = target(b);
    let max_iter = 10 * n + 100;
    let inv_diag = jacobi(a);

    let mut r = vec![0.0; n];
    residual(a, x, b, &mut r);
    let mut res = norm2(&r);
    if res <= tol {
        return Ok(SolveStats { iterations: 0, residual: res });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, d)| ri * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure {
                method: "cg",
                iterations: it,
                residual: res,
                target: tol,
                reason: "non-positive curvature",
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm2(&r);
        if res <= tol {
            // Confirm against the true residual; recurrences drift.
            residual(a, x, b, &mut r);
            res = norm2(&r);
            if res <= tol {
                return Ok(SolveStats { iterations: it, residual: res });
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure {
        method: "cg",
        iterations: max_iter,
        residual: res,
        target: tol,
        reason: "iteration limit",
    })
}

/// Jacobi right-preconditioned BiCGStab for general nonsingular `a`.
/// Breakdowns restart the iteration from the current iterate.
pub fn bicgstab(a: &SparseMatrix, b: &[f64], x: &mut [f64]) -> Result<SolveStats> {
    const MAX_RESTARTS: usize = 20;
    let n = b.len();
    let tol = target(b);
    let max_iter = 10 * n + 100;
    let inv_diag = jacobi(a);

    let mut r = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];

    let mut iterations = 0;
    let mut res = f64::INFINITY;
    for _restart in 0..=MAX_RESTARTS {
        residual(a, x, b, &mut r);
        res = norm2(&r);
        if res <= tol {
            return Ok(SolveStats { iterations, residual: res });
        }
        let r_hat = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        v.fill(0.0);
        p.fill(0.0);

        while iterations < max_iter {
            iterations += 1;
            let rho_new = dot(&r_hat, &r);
            if rho_new.abs() <= f64::EPSILON * f64::EPSILON * dot(&r_hat, &r_hat) {
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
                p_hat[i] = p[i] * inv_diag[i];
            }
            a.mul_vec_into(&p_hat, &mut v);
            let denom = dot(&r_hat, &v);
            if denom == 0.0 || !denom.is_finite() {
                break;
            }
            alpha = rho / denom;
            for i in 0..n {
                s[i] = r[i] - alpha * v[i];
            }
            if norm2(&s) <= tol {
                for i in 0..n {
                    x[i] += alpha * p_hat[i];
                }
                break;
            }
            for i in 0..n {
                s_hat[i] = s[i] * inv_diag[i];
            }
            a.mul_vec_into(&s_hat, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 {
                for i in 0..n {
                    x[i] += alpha * p_hat[i];
                }
                break;
            }
            omega = dot(&t, &s) / tt;
            for i in 0..n {
                x[i] += alpha * p_hat[i] + omega * s_hat[i];
                r[i] = s[i] - omega * t[i];
            }
            res = norm2(&r);
            if res <= tol || omega == 0.0 || !res.is_finite() {
                break;
            }
        }

        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverFailure {
                method: "bicgstab",
                iterations,
                residual: f64::NAN,
                target: tol,
                reason: "non-finite iterate",
            });
        }
        if iterations >= max_iter {
            residual(a, x, b, &mut r);
            res = norm2(&r);
            if res <= tol {
                return Ok(SolveStats { iterations, residual: res });
            }
            return Err(Error::SolverFailure {
                method: "bicgstab",
                iterations,
                residual: res,
                target: tol,
                reason: "iteration limit",
            });
        }
    }
    residual(a, x, b, &mut r);
    let final_res = norm2(&r);
    if final_res <= tol {
        return Ok(SolveStats { iterations, residual: final_res });
    }
    Err(Error::SolverFailure {
        method: "bicgstab",
        iterations,
        residual: final_res.min(res),
        target: tol,
        reason: "repeated breakdown",
    })
}

/// Solves `A x = b` with `x` prescribed on `boundary`.
///
/// The boundary unknowns are eliminated: the interior block
/// `A_II x_I = b_I - A_IB g_B` is solved and `x_B = g_B` is copied through.
/// Symmetric interior blocks go to conjugate gradients, anything else to
/// BiCGStab.
pub fn solve_dirichlet_system(
    a: &SparseMatrix,
    b: &[f64],
    boundary: &[usize],
    boundary_values: &[f64],
) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: a.ncols() });
    }
    for len in [b.len(), boundary_values.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, actual: len });
        }
    }

    let mut is_boundary = vec![false; n];
    for &k in boundary {
        if k >= n {
            return Err(Error::InvalidConfig(format!("boundary index {k} out of range")));
        }
        is_boundary[k] = true;
    }
    let interior: Vec<usize> = (0..n).filter(|&k| !is_boundary[k]).collect();

    let mut x = vec![0.0; n];
    for &k in boundary {
        x[k] = boundary_values[k];
    }
    if interior.is_empty() {
        return Ok(x);
    }

    let rhs: Vec<f64> = interior
        .iter()
        .map(|&g| {
            let coupling: f64 = a.row(g).filter(|&(c, _)| is_boundary[c]).map(|(c, v)| v * x[c]).sum();
            b[g] - coupling
        })
        .collect();
    let reduced = a.principal_submatrix(&interior);

    let mut xi = vec![0.0; interior.len()];
    if reduced.max_asymmetry() == 0.0 {
        conjugate_gradient(&reduced, &rhs, &mut xi)?;
    } else {
        bicgstab(&reduced, &rhs, &mut xi)?;
    }
    for (&g, v) in interior.iter().zip(xi) {
        x[g] = v;
    }
    Ok(x)
}
