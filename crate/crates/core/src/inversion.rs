//! Recovery of the exponent `γ` from a late-time measurement `u_T`.
//!
//! With `w = (-Δ)^{-1} u_T`, the objective
//!
//! ```text
//! F(α) = (α-1)(1+T) u_T^α - w
//! ```
//!
//! is asymptotically small in norm at `α = γ`. The minimizer over
//! `α ∈ [alpha_min, gamma_c]` is located by a uniform coarse scan followed by
//! golden-section refinement inside the bracket around the best sample.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{norm_of_values, LumpedMass, Norm, PoissonSolver, ScalarField};

/// Coarse samples within this fraction of the largest sample above the
/// minimum count as ties.
const TIE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct InversionConfig {
    pub alpha_min: f64,
    pub gamma_c: f64,
    pub grid_step: f64,
    pub refine_tol: f64,
    pub norm: Norm,
    pub clamp_negative_measurements: bool,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            alpha_min: 1.001,
            gamma_c: 20.0,
            grid_step: 0.05,
            refine_tol: 1e-4,
            norm: Norm::L1,
            clamp_negative_measurements: true,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha_min > 1.0
            && self.alpha_min < self.gamma_c
            && self.gamma_c.is_finite()
            && self.grid_step > 0.0
            && self.refine_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "need 1 < alpha_min < gamma_c, grid_step > 0, refine_tol > 0; got {self:?}"
            )))
        }
    }

    /// Coarse scan abscissae `alpha_min + k·grid_step`, closed by `gamma_c`.
    pub fn coarse_grid(&self) -> Vec<f64> {
        let mut grid = Vec::new();
        let mut k = 0usize;
        loop {
            let a = self.alpha_min + k as f64 * self.grid_step;
            if a >= self.gamma_c - 1e-12 * self.gamma_c {
                break;
            }
            grid.push(a);
            k += 1;
        }
        grid.push(self.gamma_c);
        grid
    }
}

#[derive(Debug, Clone)]
pub struct InversionReport {
    pub gamma_m: f64,
    pub objective_at_min: f64,
    /// Coarse scan samples `(α, ‖F(α)‖)`.
    pub curve: Vec<(f64, f64)>,
    /// Golden-section evaluations, in evaluation order.
    pub probes: Vec<(f64, f64)>,
    pub w_field: ScalarField,
    pub norm: Norm,
    pub t_final: f64,
    /// Set when `w ≡ 0`, i.e. the measurement carries no information.
    pub degenerate: bool,
}

impl InversionReport {
    /// Every recorded evaluation, coarse and refinement.
    pub fn evaluations(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.curve.iter().chain(&self.probes)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("alpha must exceed 1, got {alpha}")))
    }
}

fn check_nonnegative(u_t: &ScalarField) -> Result<()> {
    match u_t.values().iter().position(|&v| v < 0.0) {
        Some(node) => Err(Error::NegativeMeasurement { node, value: u_t.values()[node] }),
        None => Ok(()),
    }
}

/// Replaces negative nodal values by zero.
pub fn clamp_measurement(u_t: &ScalarField) -> ScalarField {
    u_t.map(|v| v.max(0.0))
}

fn objective_values(alpha: f64, u_t: &[f64], w: &[f64], t_final: f64) -> Vec<f64> {
    let coef = (alpha - 1.0) * (1.0 + t_final);
    u_t.iter().zip(w).map(|(&u, &w)| coef * u.powf(alpha) - w).collect()
}

/// Nodal field `(α-1)(1+T) u_T^α - w`.
pub fn objective_field(alpha: f64, u_t: &ScalarField, w: &ScalarField, t_final: f64) -> Result<ScalarField> {
    check_alpha(alpha)?;
    check_nonnegative(u_t)?;
    w.check_mesh(u_t.mesh())?;
    ScalarField::new(u_t.mesh().clone(), objective_values(alpha, u_t.values(), w.values(), t_final))
}

/// `‖F(α)‖` in the chosen vertex-quadrature norm.
pub fn objective_norm(
    alpha: f64,
    u_t: &ScalarField,
    w: &ScalarField,
    t_final: f64,
    mass: &LumpedMass,
    norm: Norm,
) -> Result<f64> {
    let f = objective_field(alpha, u_t, w, t_final)?;
    Ok(norm_of_values(f.values(), mass, norm))
}

/// `‖F(α)‖` at each of `alphas`, order preserved.
pub fn sample_curve(
    u_t: &ScalarField,
    w: &ScalarField,
    t_final: f64,
    alphas: &[f64],
    mass: &LumpedMass,
    norm: Norm,
) -> Result<Vec<(f64, f64)>> {
    alphas.iter().try_for_each(|&a| check_alpha(a))?;
    check_nonnegative(u_t)?;
    w.check_mesh(u_t.mesh())?;
    Ok(alphas
        .par_iter()
        .map(|&a| (a, norm_of_values(&objective_values(a, u_t.values(), w.values(), t_final), mass, norm)))
        .collect())
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`; returns every
/// evaluation. Ties keep the left part of the bracket.
pub fn golden_section(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut probes = Vec::new();
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    probes.push((c, fc));
    probes.push((d, fd));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
            probes.push((c, fc));
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
            probes.push((d, fd));
        }
    }
    probes
}

/// Algorithm: `w = (-Δ)^{-1} u_T`, coarse scan over the configured grid,
/// golden-section refinement around the best coarse sample.
pub fn recover_gamma(u_t: &ScalarField, t_final: f64, config: &InversionConfig) -> Result<InversionReport> {
    config.validate()?;
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidConfig(format!("T must be positive, got {t_final}")));
    }
    let u_t = if config.clamp_negative_measurements {
        clamp_measurement(u_t)
    } else {
        check_nonnegative(u_t)?;
        u_t.clone()
    };

    let poisson = PoissonSolver::new(u_t.mesh().clone());
    let w = poisson.solve(&u_t)?;
    let mass = poisson.mass();
    let degenerate = w.values().iter().all(|&v| v == 0.0);

    let grid = config.coarse_grid();
    let curve = sample_curve(&u_t, &w, t_final, &grid, mass, config.norm)?;

    let best = curve.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let scale = curve.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    let idx = curve.iter().position(|&(_, v)| v - best <= TIE_TOL * scale).expect("non-empty grid");
    if idx == curve.len() - 1 {
        return Err(Error::GammaCTooSmall { gamma_c: config.gamma_c });
    }
    // Just above 1 the term (α-1)(1+T)u_T^α grows quickly before decaying,
    // so a best sample at alpha_min means the interior minimum was not captured.
    if idx == 0 && !degenerate {
        return Err(Error::MinimumAtAlphaMin { alpha_min: config.alpha_min });
    }
    let lo = grid[idx.saturating_sub(1)];
    let hi = grid[idx + 1];

    let eval = |a: f64| norm_of_values(&objective_values(a, u_t.values(), w.values(), t_final), mass, config.norm);
    let probes = golden_section(lo, hi, config.refine_tol, eval);

    // Minimum over every evaluation; ties go to the smaller α.
    let (gamma_m, objective_at_min) =
        curve.iter().chain(&probes).copied().fold((f64::NAN, f64::INFINITY), |(ba, bv), (a, v)| {
            if v < bv || (v == bv && a < ba) {
                (a, v)
            } else {
                (ba, bv)
            }
        });

    Ok(InversionReport { gamma_m, objective_at_min, curve, probes, w_field: w, norm: config.norm, t_final, degenerate })
}
