use freenormal_core::curve::solve_h;
use freenormal_core::ode_oracle::*;
use freenormal_core::series;
use freenormal_core::transforms::g_tilde;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

fn anchor() -> &'static AnchorPoint {
    static A: OnceLock<AnchorPoint> = OnceLock::new();
    A.get_or_init(|| make_anchor(2.0).unwrap())
}

#[test]
fn anchor_agrees_with_newton() {
    let a = anchor();
    let p = solve_h(2.0).unwrap();
    assert!((a.state.g - p.g).abs() <= 1e-10 && (a.state.h - p.h).abs() <= 1e-10);
    assert!(a.residual <= 1e-12 * 2.0);
    assert!(a.state.g * a.state.h < FRAC_PI_2);
    assert_eq!(a.x0, 2.0);
}

#[test]
fn anchor_scan_endpoints_have_opposite_signs() {
    let c = anchor().state.g;
    assert!(g_tilde(Complex64::new(c, 0.0)).im() < 0.0);
    assert!(g_tilde(Complex64::new(c, -FRAC_PI_2 / c)).im() > 0.0);
}

#[test]
fn anchors_across_band() {
    for x0 in [0.5, 1.0, 3.0, 4.0] {
        let a = make_anchor(x0).unwrap();
        let p = solve_h(x0).unwrap();
        assert!((a.state.g - p.g).abs() <= 1e-10, "x0 = {x0}");
    }
    assert!(matches!(make_anchor(0.1), Err(OdeError::Domain(_))));
    assert!(matches!(make_anchor(5.0), Err(OdeError::Domain(_))));
}

#[test]
fn zero_length_integration() {
    let a = anchor();
    assert_eq!(integrate(a, 2.0, 1e-10).unwrap(), a.state);
}

#[test]
fn rejects_bad_arguments() {
    let a = anchor();
    assert!(integrate(a, 0.0, 1e-10).is_err());
    assert!(integrate(a, 1.0, 0.0).is_err());
}

#[test]
fn agrees_with_newton_solver() {
    let a = anchor();
    for x in [0.01, 0.1, 0.5, 1.0, 3.0, 5.0] {
        let s = integrate(a, x, 1e-10).unwrap();
        let p = solve_h(x).unwrap();
        assert!((s.g - p.g).abs() <= 1e-6, "g at {x}");
        assert!((s.h - p.h).abs() <= 1e-6 * p.h, "h at {x}");
    }
}

#[test]
fn reaches_large_x_law() {
    let s = integrate(anchor(), 6.0, 1e-10).unwrap();
    let h = series::eval_h_asym_infinity(6.0, 3).re();
    assert!((s.h - h).abs() <= 0.03 * h);
    let s = integrate(anchor(), 10.0, 1e-10).unwrap();
    assert!((s.g - 10.0 - 0.1).abs() < 2e-3);
}

/// `ln` of the factor by which a perturbation of `g` at `x` grows when
/// integrating back down to 2: `exp(int_2^x ds / (s ((g - s)^2 + h^2)))`.
fn ln_backward_amplification(x: f64) -> f64 {
    let n = 400;
    let ds = (x - 2.0) / n as f64;
    (0..n)
        .map(|i| {
            let s = 2.0 + ds * (i as f64 + 0.5);
            let p = solve_h(s).unwrap();
            ds / (s * ((p.g - s).powi(2) + p.h * p.h))
        })
        .sum()
}

#[test]
fn round_trip_returns_to_anchor() {
    let a = anchor();
    let tol = 1e-10;
    // above the anchor the backward leg amplifies errors by ln_backward_amplification
    for x in [1e-4, 0.01, 0.7, 3.0, 4.0, 4.5] {
        let there = integrate(a, x, tol).unwrap();
        let (back, _) = integrate_from(&there, 2.0, tol).unwrap();
        assert!((back.g - a.state.g).abs() <= 10.0 * tol * a.state.g, "via {x}: dg {:e} dh {:e}", back.g - a.state.g, back.h - a.state.h);
        assert!((back.h - a.state.h).abs() <= 10.0 * tol * a.state.h, "via {x}: dh {:e}", (back.h - a.state.h) / a.state.h);
    }
}

#[test]
fn round_trip_from_far_out_is_ill_conditioned() {
    let a = anchor();
    let tol = 1e-10;
    for x in [7.0, 9.0] {
        // one ulp of g at x already comes back larger than 10 tol
        let floor = ln_backward_amplification(x).exp() * f64::EPSILON * x;
        assert!(floor > 10.0 * tol * a.state.g, "x = {x}: {floor:e}");
        let there = integrate(a, x, tol).unwrap();
        let (back, _) = integrate_from(&there, 2.0, tol).unwrap();
        let err = (back.g - a.state.g).abs();
        assert!(err > 10.0 * tol * a.state.g && err < 1e3 * floor, "x = {x}: {err:e} vs {floor:e}");
    }
}

#[test]
fn product_tends_to_quarter_turn() {
    let xs: Vec<f64> = (0..=12).map(|i| 10f64.powf(-0.5 * i as f64)).collect();
    let path = integrate_path(anchor(), &xs, 1e-10).unwrap();
    let prods: Vec<f64> = path.iter().map(|s| s.g * s.h).collect();
    for w in prods.windows(2) {
        assert!(w[1] > w[0] && w[1] < FRAC_PI_2);
    }
}

fn discrepancy(tol: f64) -> f64 {
    [0.01, 0.5, 5.0]
        .iter()
        .map(|&x| {
            let s = integrate(anchor(), x, tol).unwrap();
            let p = solve_h(x).unwrap();
            (s.g - p.g).abs().max(((s.h - p.h) / p.h).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn discrepancy_shrinks_with_tolerance() {
    // each stage is three halvings; a single halving is within controller noise
    let mut tol = 1e-5;
    let mut prev = discrepancy(tol);
    while tol > 1e-10 {
        tol /= 8.0;
        let d = discrepancy(tol);
        if prev < 1e-10 {
            break;
        }
        assert!(d <= 0.5 * prev, "tol {tol:e}: {d:e} after {prev:e}");
        prev = d;
    }
}

#[test]
fn certificate_on_trace() {
    let xs: Vec<f64> = (0..60).map(|i| 0.01 * 1000f64.powf(i as f64 / 59.0)).collect();
    let path = integrate_path(anchor(), &xs, 1e-10).unwrap();
    let report = monotonicity_certificate(&path);
    assert_eq!(report.checked, 60);
    assert!(report.is_certified(), "{:?}", report.violations);
}

#[test]
fn certificate_flags_bad_states() {
    let good = OdeState { x: 1.0, g: 1.7, h: 0.5 };
    assert!(good.derivatives().1 < 0.0);
    assert!(monotonicity_certificate(&[good]).is_certified());
    let behind = OdeState { x: 2.0, g: 1.5, h: 0.5 };
    let report = monotonicity_certificate(&[good, behind]);
    assert_eq!(report.violations.len(), 1);
    assert_eq!(report.violations[0].x, 2.0);
    let broken = OdeState { x: 1.0, g: 1.0, h: 0.0 };
    assert!(!monotonicity_certificate(&[broken]).is_certified());
}
