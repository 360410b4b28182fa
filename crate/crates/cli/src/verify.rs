//! The twelve verification criteria, each timed against its runtime budget.

use crate::commands::{self, Grid, Table};
use crate::Format;
use freenormal_core::curve::{BoundingBox, Branch, ContinuationCache, Curve, CurvePoint, LEVEL_SET_TOL};
use freenormal_core::levy;
use freenormal_core::ode_oracle::{self, OdeState};
use freenormal_core::series::{self, eval_h_asym_zero};
use freenormal_core::transforms::{classify_domain, f_tilde, f_tilde_with_prime, g_tilde, g_tilde_contour_oracle, in_d_epsilon, SQRT_PI_2};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::f64::consts::{E, FRAC_PI_2, PI};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Criteria at their stated sizes.
    Fast,
    /// Denser samples and extra abscissas on top of `fast`.
    Full,
}

/// `(id, key, runtime budget in seconds)`.
pub const CRITERIA: [(u8, &str, f64); 12] = [
    (1, "cumulant_tables", 1.0),
    (2, "stieltjes_identity", 1.0),
    (3, "ode_identity", 1.0),
    (4, "contour_oracle", 30.0),
    (5, "ode_newton_crosscheck", 10.0),
    (6, "monotonicity", 20.0),
    (7, "h_infinity_convergence", 5.0),
    (8, "zero_regime_convergence", 10.0),
    (9, "f_zero_sandwich", 5.0),
    (10, "tau_mass_consistency", 60.0),
    (11, "semicircular_component", 1.0),
    (12, "figure_regeneration", 60.0),
];

/// Level-set figure settings shared with the CLI defaults.
pub const FIGURE_LEVELS: [f64; 6] = [0.0, 0.1, 0.4, 0.7, 1.0, 1.3];
pub const FIGURE_BOX: BoundingBox = BoundingBox { re_min: -4.0, re_max: 4.0, im_min: -4.0, im_max: 3.0 };
pub const FIGURE_GRID: Grid = Grid { xmin: 0.01, xmax: 10.0, n: 400 };

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub key: &'static str,
    /// Numerical check and runtime budget both met.
    pub passed: bool,
    pub within_budget: bool,
    pub elapsed_s: f64,
    pub budget_s: f64,
    pub measured: Value,
}

impl CriterionReport {
    pub fn summary_line(&self) -> String {
        format!(
            "[{}] {:02} {:<24} {:>8.3} s (budget {} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.key,
            self.elapsed_s,
            self.budget_s
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub profile: Profile,
    pub passed: bool,
    pub criteria: Vec<CriterionReport>,
}

impl VerifyReport {
    pub fn to_json(&self) -> Value {
        let mut criteria = Map::new();
        for c in &self.criteria {
            criteria.insert(c.key.to_string(), serde_json::to_value(c).expect("serializable"));
        }
        json!({ "profile": self.profile, "passed": self.passed, "criteria": criteria })
    }
}

type Check = Result<(bool, Value), String>;

pub fn run_criterion(id: u8, profile: Profile) -> CriterionReport {
    let &(id, key, budget) = CRITERIA.iter().find(|c| c.0 == id).expect("criterion id in 1..=12");
    let start = Instant::now();
    let outcome = match id {
        1 => cumulant_tables(),
        2 => stieltjes_identity(profile),
        3 => ode_identity(profile),
        4 => contour_oracle(),
        5 => ode_newton_crosscheck(profile),
        6 => monotonicity(profile),
        7 => h_infinity_convergence(),
        8 => zero_regime_convergence(),
        9 => f_zero_sandwich(),
        10 => tau_mass_consistency(),
        11 => semicircular_component(),
        _ => figure_regeneration(profile),
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    let (ok, measured) = outcome.unwrap_or_else(|e| (false, json!({ "error": e })));
    let within_budget = elapsed_s <= budget;
    CriterionReport { id, key, passed: ok && within_budget, within_budget, elapsed_s, budget_s: budget, measured }
}

pub fn run_all(profile: Profile) -> VerifyReport {
    let criteria: Vec<CriterionReport> = CRITERIA.iter().map(|c| run_criterion(c.0, profile)).collect();
    VerifyReport { profile, passed: criteria.iter().all(|c| c.passed), criteria }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

fn cumulant_tables() -> Check {
    let free = series::free_cumulants(4);
    let h_inf = series::h_infinity_coefficients(3);
    let free_ok = free.coefficients == [1, 1, 4, 27].map(|v| q(v, 1));
    let h_ok = h_inf.coefficients == vec![q(-5, 2), q(-43, 8), q(-579, 16)];
    Ok((free_ok && h_ok, json!({ "free_cumulants": free.to_strings(), "h_infinity_coefficients": h_inf.to_strings() })))
}

fn stieltjes_identity(profile: Profile) -> Check {
    let n = match profile {
        Profile::Fast => 1000,
        Profile::Full => 20_000,
    };
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..n {
        let x = -8.0 + 16.0 * i as f64 / (n - 1) as f64;
        let want = -SQRT_PI_2 * (-0.5 * x * x).exp();
        let r = ((g_tilde(Complex64::new(x, 0.0)).im() - want) / want).abs();
        if !(r <= worst.0) {
            worst = (r, x);
        }
    }
    Ok((worst.0 <= 1e-12, json!({ "points": n, "max_rel_err": worst.0, "at_x": worst.1, "tol": 1e-12 })))
}

/// Uniform points of the disc of radius 10 that lie in the upper half-plane or the pole-free region.
fn admissible_samples(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = Complex64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        if z.norm() <= 10.0 && classify_domain(z).is_admissible() {
            out.push(z);
        }
    }
    out
}

fn ode_identity(profile: Profile) -> Check {
    let n = match profile {
        Profile::Fast => 200,
        Profile::Full => 5000,
    };
    let mut worst = (0.0f64, Complex64::new(0.0, 0.0));
    let mut below = 0;
    for z in admissible_samples(n, 2024) {
        below += usize::from(z.im < 0.0);
        let (f, fp) = f_tilde_with_prime(z).map_err(err)?;
        let (f, fp) = (f.to_complex(), fp.to_complex());
        let r = (fp - f * (z - f)).norm() / fp.norm().max(1.0);
        if !(r <= worst.0) {
            worst = (r, z);
        }
    }
    Ok((
        worst.0 <= 1e-9,
        json!({ "samples": n, "below_axis": below, "max_rel_residual": worst.0, "at": [worst.1.re, worst.1.im], "tol": 1e-9 }),
    ))
}

pub fn contour_points() -> Vec<Complex64> {
    let mut pts = Vec::new();
    for r in [0.5, 2.0, 4.0] {
        for k in 0..5 {
            pts.push(Complex64::from_polar(r, PI * k as f64 / 4.0));
        }
    }
    for (r, a) in [(1.0, -PI / 8.0), (3.0, -PI / 8.0), (5.0, -PI / 10.0), (2.0, PI + PI / 8.0), (4.0, PI + PI / 10.0)] {
        pts.push(Complex64::from_polar(r, a));
    }
    pts
}

fn contour_oracle() -> Check {
    let eta = PI / 32.0;
    let radius = 30.0;
    let pts = contour_points();
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    let mut inside = true;
    for z in &pts {
        inside &= in_d_epsilon(*z, PI / 16.0);
        let oracle = g_tilde_contour_oracle(*z, eta, radius).map_err(err)?;
        let d = (oracle - g_tilde(*z).to_complex()).norm();
        worst = worst.max(d);
        rows.push(json!({ "z": [z.re, z.im], "abs_diff": d }));
    }
    let lower = pts.iter().filter(|z| z.im < 0.0).count();
    Ok((
        inside && lower == 5 && pts.len() == 20 && worst <= 1e-10,
        json!({ "points": pts.len(), "lower_half_plane": lower, "eta": eta, "radius": radius, "max_abs_diff": worst, "tol": 1e-10, "samples": rows }),
    ))
}

const ODE_TOL: f64 = 1e-10;

fn ode_newton_crosscheck(profile: Profile) -> Check {
    let mut xs = vec![0.01, 0.1, 0.5, 1.0, 3.0, 5.0];
    if profile == Profile::Full {
        xs.extend([1e-6, 1e-3, 6.0]);
    }
    let anchor = ode_oracle::make_anchor(2.0).map_err(err)?;
    let curve = Curve::default();
    let mut ok = true;
    let mut rows = Vec::new();
    for &x in &xs {
        let s = ode_oracle::integrate(&anchor, x, ODE_TOL).map_err(err)?;
        let p = curve.solve_h(x).map_err(err)?;
        let dg = (s.g - p.g).abs();
        let dh = ((s.h - p.h) / p.h).abs();
        ok &= dg <= 1e-6 && dh <= 1e-6;
        rows.push(json!({
            "x_target": x, "ode_g": s.g, "ode_h": s.h, "newton_g": p.g, "newton_h": p.h,
            "discrepancy": dg.max(dh), "abs_g": dg, "rel_h": dh,
        }));
    }
    Ok((ok, json!({ "anchor_x0": 2.0, "anchor_residual": anchor.residual, "ode_tol": ODE_TOL, "tol": 1e-6, "points": rows })))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    Grid { xmin: lo, xmax: hi, n }.points()
}

fn monotonicity(profile: Profile) -> Check {
    let xs = log_grid(1e-3, 12.0, 400);
    let curve = Curve::default();
    let mut cache = ContinuationCache::new(&curve);
    let pts: Vec<CurvePoint> = xs.iter().map(|&x| cache.solve(x)).collect::<Result<_, _>>().map_err(err)?;
    let (mut g_bad, mut h_bad, mut k_bad) = (0, 0, 0);
    for w in pts.windows(2) {
        g_bad += usize::from(!(w[1].g > w[0].g));
        h_bad += usize::from(!(w[1].h < w[0].h));
        k_bad += usize::from(!(commands::k_of(w[1].x, w[1].h) < commands::k_of(w[0].x, w[0].h)));
    }
    let states: Vec<OdeState> = pts.iter().map(|p| OdeState { x: p.x, g: p.g, h: p.h }).collect();
    let cert = ode_oracle::monotonicity_certificate(&states);
    let mut measured = json!({
        "points": pts.len(), "g_violations": g_bad, "h_violations": h_bad, "k_violations": k_bad,
        "derivative_sign_violations": cert.violations.len(),
    });
    let mut ok = g_bad + h_bad + k_bad == 0 && cert.is_certified();
    if profile == Profile::Full {
        let anchor = ode_oracle::make_anchor(2.0).map_err(err)?;
        let path = ode_oracle::integrate_path(&anchor, &xs, ODE_TOL).map_err(err)?;
        let ode_cert = ode_oracle::monotonicity_certificate(&path);
        measured["ode_path_violations"] = json!(ode_cert.violations.len());
        ok &= ode_cert.is_certified();
    }
    Ok((ok, measured))
}

/// `(1/e) sqrt(pi/2) x^2 exp(-x^2/2)`.
fn h_lead(x: f64) -> f64 {
    SQRT_PI_2 / E * x * x * (-0.5 * x * x).exp()
}

fn h_infinity_convergence() -> Check {
    let a = series::h_infinity_coefficients(3).to_f64();
    let curve = Curve::default();
    let mut ok = true;
    let mut rows = Vec::new();
    for x in [6.0, 8.0, 10.0] {
        let p = curve.solve_h(x).map_err(err)?;
        let ratio = p.h / h_lead(x);
        let x2 = x * x;
        let dev = (ratio - (1.0 + a[0] / x2 + a[1] / (x2 * x2))).abs();
        let bound = 5.0 * a[2].abs() / (x2 * x2 * x2);
        ok &= dev <= bound;
        rows.push(json!({ "x": x, "ratio": ratio, "deviation": dev, "bound": bound }));
    }
    let x = 8.0;
    let h = curve.solve_h(x).map_err(err)?.h;
    let errs: Vec<f64> = (1..=3).map(|n| (h - series::eval_h_asym_infinity(x, n).re()).abs() / h).collect();
    let shrinking = errs.windows(2).all(|w| w[1] < w[0]);
    Ok((ok && shrinking, json!({ "window": rows, "order_errors_at_8": errs, "orders_shrink": shrinking })))
}

fn zero_regime_convergence() -> Check {
    let curve = Curve::default();
    let xs = [1e-3, 1e-4, 1e-5, 1e-6];
    let mut c_fit = 0.0f64;
    let mut gaps = Vec::new();
    let mut rows = Vec::new();
    for x in xs {
        let p = curve.solve_h(x).map_err(err)?;
        let d = (p.h - eval_h_asym_zero(x).map_err(err)?).abs();
        c_fit = c_fit.max(d / x.sqrt());
        let gap = (p.g * p.h - FRAC_PI_2).abs();
        gaps.push(gap);
        rows.push(json!({ "x": x, "h_diff": d, "gh_gap": gap }));
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let last = *gaps.last().unwrap();
    Ok((c_fit < 10.0 && decreasing && last < 1e-2, json!({ "fitted_c": c_fit, "gh_gap_decreasing": decreasing, "points": rows })))
}

fn f_zero_sandwich() -> Check {
    let curve = Curve::default();
    let mut ok = true;
    let mut rows = Vec::new();
    for x in [0.2, 0.1, 0.05] {
        // -x f(x) = (pi/2)(1 - gap)
        let gap = curve.f_relative_gap(x).map_err(err)?;
        let bound = 1e3 * (-PI * PI / (16.0 * x * x)).exp();
        let f = curve.f_of(x).map_err(err)?;
        ok &= gap > 0.0 && gap < bound && -x * f <= FRAC_PI_2;
        rows.push(json!({ "x": x, "relative_gap": gap, "gap_bound": bound, "minus_x_f": -x * f }));
    }
    Ok((ok, json!({ "points": rows })))
}

fn tau_mass_consistency() -> Check {
    let r = levy::tau_mass_report(1e-8).map_err(err)?;
    let phi_i = levy::voiculescu(Complex64::new(0.0, 1.0)).map_err(err)?;
    Ok((
        r.discrepancy <= 1e-6 && phi_i.re.abs() <= 1e-9,
        json!({ "mass": r.mass, "im_phi_i": r.im_phi_i, "re_phi_i": phi_i.re, "discrepancy": r.discrepancy, "tol": 1e-6 }),
    ))
}

fn semicircular_component() -> Check {
    let ts = [3.0, 4.0, 5.0, 6.0];
    let vals: Vec<f64> = ts.iter().map(|&t| levy::semicircular_component_check(t)).collect();
    let decreasing = vals.windows(2).all(|w| w[1] < w[0]);
    Ok((vals[3] <= 1e-7 && decreasing, json!({ "t": ts, "value": vals, "decreasing": decreasing })))
}

/// Checks on a rendered curve CSV; returns a summary or the first violation.
pub fn check_curve_csv(text: &str, n: usize) -> Result<Value, String> {
    let t = Table::from_csv(text)?;
    if t.columns != ["x", "g", "h", "residual"] || t.rows.len() != n {
        return Err(format!("curve table shape {:?} x {}", t.columns, t.rows.len()));
    }
    let (x, g, h, res) = (t.column("x").unwrap(), t.column("g").unwrap(), t.column("h").unwrap(), t.column("residual").unwrap());
    for i in 1..n {
        if !(x[i] > x[i - 1] && g[i] > g[i - 1] && h[i] < h[i - 1]) {
            return Err(format!("curve not monotone at row {i}"));
        }
    }
    if let Some(i) = (0..n).find(|&i| !(res[i] <= 1e-10 * x[i].max(1.0))) {
        return Err(format!("residual {} at row {i}", res[i]));
    }
    let gap = (g[0] * h[0] - FRAC_PI_2).abs();
    if gap >= 0.05 {
        return Err(format!("g h is {gap} from pi/2 at the smallest x"));
    }
    Ok(json!({ "rows": n, "gh_gap_at_xmin": gap }))
}

pub fn check_density_csv(text: &str, n: usize) -> Result<Value, String> {
    let t = Table::from_csv(text)?;
    if t.rows.len() != n {
        return Err(format!("density table has {} rows", t.rows.len()));
    }
    let (d, k) = (t.column("density").ok_or("no density column")?, t.column("k").ok_or("no k column")?);
    if d.iter().any(|v| !(*v > 0.0)) {
        return Err("nonpositive density".into());
    }
    if let Some(i) = (1..n).find(|&i| !(k[i] < k[i - 1])) {
        return Err(format!("k not decreasing at row {i}"));
    }
    Ok(json!({ "rows": n }))
}

/// Parses a level-set CSV into its points and checks `Im F = t` on every one.
pub fn check_level_csv(text: &str, t: f64) -> Result<(Vec<(Branch, Complex64)>, f64), String> {
    let mut pts = Vec::new();
    let mut worst = 0.0f64;
    for (i, line) in text.lines().enumerate().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let [tt, branch, _, re, im] = cells[..] else {
            return Err(format!("line {i} has {} cells", cells.len()));
        };
        let parse = |s: &str| s.parse::<f64>().map_err(|_| format!("line {i}: bad number {s:?}"));
        if parse(tt)? != t {
            return Err(format!("line {i}: level {tt} in file for {t}"));
        }
        let branch = match branch {
            "left" => Branch::Left,
            "right" => Branch::Right,
            b => return Err(format!("line {i}: unknown branch {b}")),
        };
        let z = Complex64::new(parse(re)?, parse(im)?);
        let dev = (f_tilde(z).map_err(err)?.im() - t).abs();
        worst = worst.max(dev);
        if dev > LEVEL_SET_TOL * t.max(1.0) {
            return Err(format!("line {i}: Im F off by {dev:e}"));
        }
        pts.push((branch, z));
    }
    if pts.is_empty() {
        return Err(format!("no points for t = {t}"));
    }
    Ok((pts, worst))
}

/// Largest distance from the zero level set to the boundary curve solver,
/// over points whose image lies in the trace range.
pub fn zero_level_vs_curve(pts: &[(Branch, Complex64)], trace: &[CurvePoint]) -> Result<(f64, usize), String> {
    let curve = Curve::default();
    let (lo, hi) = (trace.first().unwrap().x, trace.last().unwrap().x);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for &(branch, z) in pts {
        let z = if branch == Branch::Left { -z.conj() } else { z };
        let x = f_tilde(z).map_err(err)?.re();
        if !(x >= lo && x <= hi) {
            continue;
        }
        let near = trace.iter().min_by(|a, b| (a.x.ln() - x.ln()).abs().total_cmp(&(b.x.ln() - x.ln()).abs())).unwrap();
        let p = curve.solve_h_near(x, near).map_err(err)?;
        worst = worst.max((z - p.z()).norm());
        compared += 1;
    }
    Ok((worst, compared))
}

fn figure_regeneration(profile: Profile) -> Check {
    let step = match profile {
        Profile::Fast => 0.05,
        Profile::Full => 0.02,
    };
    let curve_csv = commands::curve(FIGURE_GRID, Format::Csv, "verify").map_err(err)?;
    let curve_summary = check_curve_csv(&curve_csv, FIGURE_GRID.n)?;
    let curve_svg = commands::curve(FIGURE_GRID, Format::Svg, "verify").map_err(err)?;
    let density_csv = commands::density(FIGURE_GRID, Format::Csv, "verify").map_err(err)?;
    let density_summary = check_density_csv(&density_csv, FIGURE_GRID.n)?;
    let artifacts = commands::levelsets(&FIGURE_LEVELS, FIGURE_BOX, step, Format::Csv, "verify").map_err(err)?;
    let trace = freenormal_core::curve::trace_p0(FIGURE_GRID.xmin, FIGURE_GRID.xmax, FIGURE_GRID.n).map_err(err)?;
    let mut levels = Vec::new();
    let mut zero_match = (f64::INFINITY, 0);
    for (t, a) in FIGURE_LEVELS.iter().zip(&artifacts) {
        let (pts, worst) = check_level_csv(&a.contents, *t)?;
        if *t == 0.0 {
            zero_match = zero_level_vs_curve(&pts, &trace.points)?;
        }
        levels.push(json!({ "t": t, "file": a.name, "points": pts.len(), "max_level_dev": worst }));
    }
    let ok = zero_match.0 <= 1e-8 && zero_match.1 > 0 && curve_svg.contains("<polyline");
    Ok((
        ok,
        json!({
            "curve": curve_summary, "density": density_summary, "level_step": step, "level_sets": levels,
            "zero_level_max_distance": zero_match.0, "zero_level_points_compared": zero_match.1,
        }),
    ))
}
