//! Exponent recovery on forward-solver and separable fixtures.

mod common;

use porous_inverse::fem::{assemble_lumped_mass, field_norm, solve_poisson, Norm};
use porous_inverse::inversion::{objective_norm, recover_gamma, sample_curve, InversionConfig};

use common::*;

#[test]
fn exact_separable_measurement() {
    let p = profile(10, 2.0);
    let t = 1e4;
    let u = separable_measurement(&p, 1.0, t);
    let r = recover_gamma(&u, t, &InversionConfig::default()).unwrap();
    assert!((r.gamma_m - 2.0).abs() <= 5e-3, "{}", r.gamma_m);
}

#[test]
fn recovery_error_decays_like_one_over_t() {
    // τ ≠ 1 leaves an O(1/T) mismatch between (1+T) and (τ+T).
    let p = profile(10, 2.0);
    let cfg = InversionConfig { refine_tol: 1e-10, ..Default::default() };
    let products: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&t| {
            let r = recover_gamma(&separable_measurement(&p, 5.0, t), t, &cfg).unwrap();
            (r.gamma_m - 2.0).abs() * (1.0 + t)
        })
        .collect();
    let max = products.iter().cloned().fold(0.0, f64::max);
    let min = products.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > 0.0 && max / min <= 20.0, "{products:?}");
}

#[test]
fn objective_at_gamma_decays_with_the_asymptotic_order() {
    let gamma = 2.0;
    let p = profile(10, gamma);
    let m = p.f.mesh().clone();
    let mass = assemble_lumped_mass(&m);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for t in [1e2, 1e3, 1e4] {
        let u = separable_measurement(&p, 5.0, t);
        let w = solve_poisson(&m, &u).unwrap();
        let v = objective_norm(gamma, &u, &w, t, &mass, Norm::L1).unwrap();
        xs.push((1.0 + t).ln());
        ys.push(v.ln());
    }
    let order = -slope(&xs, &ys);
    assert!(order >= 1.0 + 1.0 / (gamma - 1.0) - 0.1, "order {order}");
}

#[test]
fn table_fixture_curve_shape() {
    let t = 1000.0;
    let r = table_forward(3.5, t);
    let report = recover_gamma(&r.u_t, t, &InversionConfig::default()).unwrap();
    let m = r.u_t.mesh().clone();
    let mass = assemble_lumped_mass(&m);
    let w_norm = field_norm(&report.w_field, &mass, Norm::L1);

    for &(_, v) in report.evaluations() {
        assert!(report.objective_at_min <= v);
    }
    let tail: Vec<f64> = report.curve.iter().filter(|(a, _)| *a > report.gamma_m).map(|&(_, v)| v).collect();
    assert!(tail.windows(2).all(|p| p[1] >= p[0]), "tail not monotone");
    assert!(tail.iter().all(|&v| v <= w_norm * (1.0 + 1e-12)));
    for &(a, v) in &report.curve {
        if a >= 6.0 {
            assert!((v - w_norm).abs() <= 0.01 * w_norm, "alpha {a}: {v} vs {w_norm}");
        }
    }

    // α → 1 with (α-1)(1+T) → 0 recovers ‖w‖.
    let near_one = objective_norm(1.0 + 1e-9, &r.u_t, &report.w_field, t, &mass, Norm::L1).unwrap();
    assert!((near_one - w_norm).abs() <= 1e-3 * w_norm);

    let single = sample_curve(&r.u_t, &report.w_field, t, &[report.gamma_m], &mass, Norm::L1).unwrap();
    assert_eq!(single[0].1, report.objective_at_min);
}

#[test]
fn endpoint_values_on_an_early_measurement() {
    // γ = 1.1, T = 1: max u_T < 1 and (α-1)(1+T) is small at alpha_min.
    let t = 1.0;
    let r = table_forward(1.1, t);
    assert!(r.u_t.max() < 1.0);
    let report = recover_gamma(&r.u_t, t, &InversionConfig::default()).unwrap();
    let mass = assemble_lumped_mass(r.u_t.mesh());
    let w_norm = field_norm(&report.w_field, &mass, Norm::L1);
    let first = report.curve.first().unwrap().1;
    let last = report.curve.last().unwrap().1;
    assert!((last - w_norm).abs() <= 0.01 * w_norm);
    assert!((first - w_norm).abs() <= 0.05 * w_norm, "{first} vs {w_norm}");
}

#[test]
fn all_norms_agree_on_the_table_fixture() {
    let t = 1000.0;
    let r = table_forward(3.5, t);
    for norm in [Norm::L1, Norm::L2, Norm::Linf] {
        let cfg = InversionConfig { norm, ..Default::default() };
        let gm = recover_gamma(&r.u_t, t, &cfg).unwrap().gamma_m;
        assert!((gm - 3.504).abs() <= 0.05, "{norm}: {gm}");
    }
}
