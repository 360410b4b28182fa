use freenormal_core::curve::*;
use freenormal_core::series;
use freenormal_core::transforms::{f_tilde, g_tilde};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{E, FRAC_PI_2, PI};

// roots of 1/G~(z) = x found at 40 digits: (x, g, h)
const REFERENCE: [(f64, f64, f64); 12] = [
    (1e-6, 0.30872142877793034113, 5.0880696682197299971),
    (1e-5, 0.3403226370950692337, 4.6156032194561767423),
    (1e-4, 0.38402716662087993615, 4.0902660821713714295),
    (1e-3, 0.45000958603598565102, 3.4899974573085493533),
    (0.01, 0.56526662469483395057, 2.7732511013750908328),
    (0.1, 0.82648550984660338091, 1.8507298236161104367),
    (0.5, 1.3188444335255705901, 0.99290612666671792671),
    (1.0, 1.7689349024912310048, 0.56569589364980772131),
    (2.0, 2.5771836146056974039, 0.17016436285743908548),
    (3.0, 3.3926437215867213296, 0.030465959015689647615),
    (5.0, 5.2098990026501173998, 0.000038104974452745395287),
    (8.0, 8.1270903403306754348, 3.5854984696333712525e-13),
];

#[test]
fn solver_matches_reference_roots() {
    for (x, g, h) in REFERENCE {
        let p = solve_h(x).unwrap();
        assert!((p.g - g).abs() <= 1e-12 * g, "g({x}) = {}", p.g);
        assert!((p.h - h).abs() <= 1e-9 * h, "h({x}) = {}", p.h);
        assert!(p.residual <= 1e-10 * x.max(1.0));
        assert!(p.g * p.h < FRAC_PI_2);
    }
    let p = solve_h(12.0).unwrap();
    assert!((p.g - 12.083928917934578101).abs() < 1e-13);
    assert!((p.h / 3.5091252814341081512e-30 - 1.0).abs() < 1e-9);
}

#[test]
fn limits_at_both_ends() {
    // g(1e-6) = 0.3087..., so g tends to 0 only logarithmically
    let small = solve_h(1e-6).unwrap();
    assert!(small.g < 0.31 && small.h > 4.0);
    assert!(small.g < solve_h(1e-4).unwrap().g);
    let large = solve_h(12.0).unwrap();
    assert!(large.g > 11.0 && large.h < 1e-20);
}

#[test]
fn small_x_matches_closed_forms() {
    let x = 1e-5;
    let p = solve_h(x).unwrap();
    assert!((p.g - series::eval_g_asym_zero(x).unwrap()).abs() <= x.sqrt());
    assert!((p.h - series::eval_h_asym_zero(x).unwrap()).abs() <= x.sqrt());
}

#[test]
fn large_x_window() {
    let x = 12.0;
    let p = solve_h(x).unwrap();
    let lead = (FRAC_PI_2.sqrt() / E) * x * x * (-0.5 * x * x).exp();
    let r = p.h / lead;
    assert!(r >= 1.0 - 5.0 / (x * x) - 0.01 && r <= 1.01, "{r}");
}

#[test]
fn beyond_cutoff_uses_series() {
    let p = solve_h(35.0).unwrap();
    assert_eq!(p.regime, series::AsymptoticRegime::NearInfinity);
    assert_eq!(p.iterations, 0);
    assert_eq!(p.g, series::eval_g_asym_infinity(35.0, 3));
}

#[test]
fn rejects_nonpositive() {
    assert!(matches!(solve_h(0.0), Err(CurveError::Domain(_))));
    assert!(matches!(solve_h(-1.0), Err(CurveError::Domain(_))));
    assert!(solve_h(f64::NAN).is_err());
}

#[test]
fn trace_is_monotone() {
    let t = trace_p0(0.01, 10.0, 100).unwrap();
    assert_eq!(t.points.len(), 100);
    assert_eq!(t.solver_stats.solves, 100);
    for w in t.points.windows(2) {
        assert!(w[1].x > w[0].x && w[1].g > w[0].g && w[1].h < w[0].h);
    }
    assert!((t.points[0].x - 0.01).abs() < 1e-16 && t.points[99].x == 10.0);
}

#[test]
fn degenerate_trace() {
    let x = 0.7;
    let t = trace_p0(x, x * (1.0 + 1e-9), 2).unwrap();
    assert_eq!(t.points.len(), 2);
    let (a, b) = (t.points[0], t.points[1]);
    assert!((a.g - b.g).abs() < 1e-8 && (a.h - b.h).abs() < 1e-8);
    assert!(a.residual <= 1e-10 && b.residual <= 1e-10);
    assert!(trace_p0(1.0, 0.5, 10).is_err());
    assert!(trace_p0(0.5, 1.0, 1).is_err());
}

#[test]
fn product_near_zero() {
    let t = trace_p0(1e-4, 1e-2, 20).unwrap();
    let first = t.points.first().unwrap();
    let last = t.points.last().unwrap();
    let gap = |p: &CurvePoint| (p.g * p.h - FRAC_PI_2).abs();
    assert!(gap(first) < 0.02);
    assert!(gap(last) > gap(first));
}

#[test]
fn finite_differences_follow_ode() {
    let curve = Curve::default();
    for x in [0.02f64, 0.3, 1.0, 2.5, 4.0, 7.0] {
        let d = 1e-3 * x.min(1.0);
        let lo = curve.solve_h(x - d).unwrap();
        let mid = curve.solve_h(x).unwrap();
        let hi = curve.solve_h(x + d).unwrap();
        let den = x * ((mid.g - x).powi(2) + mid.h * mid.h);
        let dg = (mid.g - x) / den;
        let dh = -mid.h / den;
        assert!(((hi.g - lo.g) / (2.0 * d) - dg).abs() <= 1e-4 * dg.abs(), "g' at {x}");
        assert!(((hi.h - lo.h) / (2.0 * d) - dh).abs() <= 1e-4 * dh.abs(), "h' at {x}");
    }
}

/// Bisection on the sign of Im G~(x + iy) over (-pi/(2x), 0).
fn boundary_by_bisection(x: f64) -> f64 {
    let (mut lo, mut hi) = (-FRAC_PI_2 / x * (1.0 - 1e-14), 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g_tilde(Complex64::new(x, mid)).im() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn boundary_function_values() {
    let f3 = f_of(3.0).unwrap();
    assert!((f3 - boundary_by_bisection(3.0)).abs() <= 1e-13);
    assert!((f3 + 0.075816570049377067403).abs() <= 1e-14);
    assert!((f_of(1.0).unwrap() + 1.4725158712210729043).abs() <= 1e-13);
    assert!((f_of(-3.0).unwrap() - f3).abs() == 0.0);
    assert!(f_of(0.0).is_err());
}

#[test]
fn boundary_function_near_zero() {
    let curve = Curve::default();
    // relative gaps 1 + 2x f(x)/pi from a 300-digit computation
    for (x, gap) in [(0.2, 1.3080244936001318486e-15), (0.1, 4.267246816479210772e-56), (0.05, 3.9084689699848322166e-217)] {
        let got = curve.f_relative_gap(x).unwrap();
        assert!((got - gap).abs() <= 1e-12 * gap, "x = {x}: {got:e}");
        assert!((f_of(x).unwrap() * x + FRAC_PI_2).abs() <= 1e-14);
    }
    for x in [0.3, 0.5, 1.0] {
        // forming the gap from f cancels, so compare in absolute terms
        let via_f = 1.0 + 2.0 * x * f_of(x).unwrap() / PI;
        assert!((curve.f_relative_gap(x).unwrap() - via_f).abs() <= 1e-15, "x = {x}");
    }
}

#[test]
fn omega_membership() {
    assert!(in_omega(Complex64::new(0.0, 1.0)));
    assert!(in_omega(Complex64::new(0.0, -0.5)));
    assert!(!in_omega(Complex64::new(3.0, -1.0)));
    assert!(in_omega(Complex64::new(3.0, -0.05)));
    assert!(!in_omega(Complex64::new(-3.0, -0.1)));
    assert!(!in_omega(Complex64::new(2.0, -2.0)));
}

#[test]
fn inverse_on_random_upper_points() {
    let curve = Curve::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let w = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(0.01..5.0));
        let z = curve.inverse(w).unwrap();
        assert!(in_omega(z), "{w} -> {z}");
        assert!((f_tilde(z).unwrap().to_complex() - w).norm() <= 1e-10 * w.norm().max(1.0));
    }
}

fn figure_box() -> BoundingBox {
    BoundingBox { re_min: -4.0, re_max: 4.0, im_min: -4.0, im_max: 3.0 }
}

#[test]
fn zero_level_set_is_the_curve() {
    let traces = trace_level_set(0.0, figure_box(), 0.05).unwrap();
    assert!(traces.iter().any(|t| t.branch == Branch::Left));
    let right: Vec<_> = traces.iter().filter(|t| t.branch == Branch::Right).collect();
    assert!(!right.is_empty());
    let mut checked = 0;
    for t in right {
        for z in &t.points {
            let x = f_tilde(*z).unwrap().re();
            if x < 1e-3 {
                continue;
            }
            let p = solve_h(x).unwrap();
            assert!((z - p.z()).norm() <= 1e-8, "{z} vs {}", p.z());
            checked += 1;
        }
    }
    assert!(checked > 20);
}

#[test]
fn level_sets_satisfy_their_equation() {
    let step = 0.05;
    for t in [0.1, 0.4, 1.0] {
        let traces = trace_level_set(t, figure_box(), step).unwrap();
        for tr in &traces {
            assert_eq!(tr.t, t);
            for z in &tr.points {
                let v = f_tilde(*z).unwrap().im();
                assert!((v - t).abs() <= LEVEL_SET_TOL * t.max(1.0), "t = {t} at {z}");
                assert!(z.im >= 0.0 || z.re.abs() * -z.im <= FRAC_PI_2 * (1.0 + 1e-15));
            }
            for w in tr.points.windows(2) {
                assert!((w[1] - w[0]).norm() <= step * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn unit_level_set_passes_through_preimage_of_i() {
    let target = Curve::default().inverse(Complex64::new(0.0, 1.0)).unwrap();
    let step = 0.05;
    let traces = trace_level_set(1.0, figure_box(), step).unwrap();
    let nearest = traces.iter().flat_map(|t| t.points.iter()).map(|z| (z - target).norm()).fold(f64::INFINITY, f64::min);
    assert!(nearest <= step, "{nearest}");
}

#[test]
fn level_set_heights_rise_away_from_axis() {
    let traces = trace_level_set(0.4, figure_box(), 0.05).unwrap();
    for tr in traces.iter().filter(|t| t.branch == Branch::Right) {
        let mut pts = tr.points.clone();
        pts.sort_by(|a, b| a.re.total_cmp(&b.re));
        for w in pts.windows(2) {
            assert!(w[1].im >= w[0].im - 1e-12);
        }
    }
}

#[test]
fn level_set_without_crossings() {
    let bbox = BoundingBox { re_min: 1.0, re_max: 2.0, im_min: 5.0, im_max: 6.0 };
    assert!(matches!(trace_level_set(0.1, bbox, 0.1), Err(CurveError::SeedNotFound { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solution_contract(e in -5.0f64..1.5) {
        let x = 10f64.powf(e);
        let p = solve_h(x).unwrap();
        prop_assert!(p.residual <= 1e-10 * x.max(1.0));
        prop_assert!(p.g > 0.0 && p.h > 0.0 && p.g * p.h < FRAC_PI_2);
        prop_assert!(p.g > x);
    }

    #[test]
    fn solver_is_monotone(e in -4.0f64..1.0, ratio in 1.001f64..2.0) {
        let x = 10f64.powf(e);
        let a = solve_h(x).unwrap();
        let b = solve_h(x * ratio).unwrap();
        prop_assert!(b.g > a.g && b.h < a.h);
    }

    #[test]
    fn boundary_function_is_even_and_bounded(x in 0.15f64..8.0) {
        let f = f_of(x).unwrap();
        prop_assert_eq!(f, f_of(-x).unwrap());
        prop_assert!(f < 0.0 && f >= -FRAC_PI_2 / x);
        // below x ~ 0.25 the gap to -pi/(2x) is under one ulp of f, so check it directly
        if x <= 1.0 {
            prop_assert!(Curve::default().f_relative_gap(x).unwrap() > 0.0);
        }
        if x >= 0.25 {
            prop_assert!(f > -FRAC_PI_2 / x);
        }
    }
}
