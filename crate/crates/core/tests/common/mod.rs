#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use porous_inverse::forward::{solve_forward, ForwardConfig, ForwardResult, InitialData};
use porous_inverse::mesh::Mesh;
use porous_inverse::profile::{self, solve_profile, ProfileResult};
use porous_inverse::ScalarField;

pub fn mesh(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::unit_square(n).unwrap())
}

/// Forward run with the reference setup: N = 10, dt = 0.1, u0 = 10xy(1-x)(1-y).
pub fn table_forward(gamma: f64, t: f64) -> ForwardResult {
    let cfg = ForwardConfig::new(gamma, 10, t, InitialData::PolyBump { c: 10.0 }).with_dt(0.1);
    solve_forward(&cfg).unwrap()
}

pub fn profile(n: usize, gamma: f64) -> ProfileResult {
    solve_profile(&mesh(n), gamma, 1e-12, profile::DEFAULT_MAX_ITER).unwrap()
}

/// Separable measurement `(τ+T)^{-1/(γ-1)} f_h`.
pub fn separable_measurement(p: &ProfileResult, tau: f64, t: f64) -> ScalarField {
    p.f.scaled(profile::time_factor(p.gamma, tau + t))
}

/// Solution of -Δw = 1 on the unit square with zero boundary data, by the
/// double sine series over odd modes.
pub fn unit_source_series(x: f64, y: f64, modes: usize) -> f64 {
    let mut sum = 0.0;
    for m in (1..=modes).step_by(2) {
        for n in (1..=modes).step_by(2) {
            let (mf, nf) = (m as f64, n as f64);
            let coef = 16.0 / (PI.powi(4) * mf * nf * (mf * mf + nf * nf));
            sum += coef * (mf * PI * x).sin() * (nf * PI * y).sin();
        }
    }
    sum
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of log(max u) against log(1+t) over the steps with t in [t_lo, t_hi].
pub fn decay_slope(max_history: &[f64], dt: f64, t_lo: f64, t_hi: f64) -> f64 {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (k, &m) in max_history.iter().enumerate() {
        let t = k as f64 * dt;
        if t >= t_lo - 1e-12 && t <= t_hi + 1e-12 {
            xs.push((1.0 + t).ln());
            ys.push(m.ln());
        }
    }
    slope(&xs, &ys)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}
