//! The stationary profile `f > 0` solving `-Δf^γ = f/(γ-1)`, `f = 0` on the
//! boundary, and the separable solutions `(τ+t)^{-1/(γ-1)} f` built from it.
//!
//! The discrete problem is solved for `v = f^γ` by the fixed-point map
//! `v ↦ (-Δ_h)^{-1}(v^{1/γ}/(γ-1))`, starting from `(-Δ_h)^{-1} 1`. The map is
//! order preserving and homogeneous of degree `1/γ`, so it contracts in the
//! relative (Thompson) sense and the amplitude of `f` is fixed by the
//! nonlinearity alone.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{assemble_lumped_mass, assemble_stiffness, norm_of_values, Norm, PoissonSolver, ScalarField};
use crate::mesh::Mesh;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub struct ProfileResult {
    pub f: ScalarField,
    pub gamma: f64,
    pub iterations: usize,
    /// Relative lumped-L² size of `-Δ_h f^γ - f/(γ-1)` on interior nodes.
    pub residual: f64,
    /// Relative L∞ change of `v = f^γ` in the last iteration.
    pub last_change: f64,
}

fn source_from(v: &[f64], gamma: f64) -> Vec<f64> {
    let inv_gamma = 1.0 / gamma;
    let scale = 1.0 / (gamma - 1.0);
    v.iter().map(|&x| x.max(0.0).powf(inv_gamma) * scale).collect()
}

fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let diff = new.iter().zip(old).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = new.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Relative discrete defect `‖M^{-1}(K v) - f/(γ-1)‖ / ‖f/(γ-1)‖` in the
/// lumped L² norm over interior nodes.
pub fn profile_defect(mesh: &Mesh, f: &[f64], gamma: f64) -> f64 {
    let stiffness = assemble_stiffness(mesh);
    let mass = assemble_lumped_mass(mesh);
    let v: Vec<f64> = f.iter().map(|x| x.powf(gamma)).collect();
    let kv = stiffness.mul_vec(&v);
    let w = mass.weights();
    let mut defect = vec![0.0; f.len()];
    let mut rhs = vec![0.0; f.len()];
    for i in mesh.interior_nodes() {
        rhs[i] = f[i] / (gamma - 1.0);
        defect[i] = kv[i] / w[i] - rhs[i];
    }
    let denom = norm_of_values(&rhs, &mass, Norm::L2);
    let num = norm_of_values(&defect, &mass, Norm::L2);
    if denom == 0.0 {
        num
    } else {
        num / denom
    }
}

/// Solves the discrete eigenproblem on `mesh`.
///
/// Stops when the relative L∞ change of `v` drops to `tol`.
pub fn solve_profile(mesh: &Arc<Mesh>, gamma: f64, tol: f64, max_iter: usize) -> Result<ProfileResult> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::InvalidConfig(format!("gamma must exceed 1, got {gamma}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }

    let poisson = PoissonSolver::new(mesh.clone());
    let mut v = poisson.solve_values(&vec![1.0; mesh.node_count()])?;
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let next = poisson.solve_values(&source_from(&v, gamma))?;
        last_change = relative_change(&next, &v);
        v = next;
        if last_change <= tol {
            break;
        }
    }
    if !(last_change <= tol) {
        return Err(Error::NonConvergence { iterations, last_change });
    }

    let f_values: Vec<f64> = v.iter().map(|&x| x.max(0.0).powf(1.0 / gamma)).collect();
    let residual = profile_defect(mesh, &f_values, gamma);
    let f = ScalarField::new(mesh.clone(), f_values)?;
    Ok(ProfileResult { f, gamma, iterations, residual, last_change })
}

/// Applies the fixed-point map once to `f^γ`; used to check fixed-point consistency.
pub fn fixed_point_step(mesh: &Arc<Mesh>, f: &ScalarField, gamma: f64) -> Result<ScalarField> {
    let poisson = PoissonSolver::new(mesh.clone());
    let v: Vec<f64> = f.values().iter().map(|x| x.powf(gamma)).collect();
    let next = poisson.solve_values(&source_from(&v, gamma))?;
    ScalarField::new(mesh.clone(), next)
}

/// `(τ+t)^{-1/(γ-1)} f`.
pub fn separation_solution(profile: &ProfileResult, tau: f64, t: f64) -> Result<ScalarField> {
    if !(tau > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidConfig(format!("need tau > 0 and t >= 0, got tau={tau}, t={t}")));
    }
    Ok(profile.f.scaled(time_factor(profile.gamma, tau + t)))
}

/// `s^{-1/(γ-1)}`.
pub fn time_factor(gamma: f64, s: f64) -> f64 {
    s.powf(-1.0 / (gamma - 1.0))
}
