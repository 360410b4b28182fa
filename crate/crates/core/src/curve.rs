//! The boundary curve `H(x) = g(x) - i h(x)` solving `F~(H(x)) = x`, the
//! function `f` bounding the univalence domain, and level sets of `Im F~`.

use crate::series::{self, AsymptoticRegime, RegimeThresholds};
use crate::transforms::{classify_domain, f_tilde, f_tilde_with_prime, g_tilde, rho, DomainTag, TransformError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("{0}")]
    Domain(String),
    #[error("Newton iteration did not converge for x = {x}")]
    NoConvergence { x: f64 },
    #[error("monotonicity violated between x = {x0} and x = {x1}: {what}")]
    Monotonicity { x0: f64, x1: f64, what: String },
    #[error("no sign change of Im F - {t} on the scan lines")]
    SeedNotFound { t: f64 },
    #[error("at x = {x}: {source}")]
    At {
        x: f64,
        #[source]
        source: Box<CurveError>,
    },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub thresholds: RegimeThresholds,
    /// Beyond this the asymptotic laws are returned directly.
    pub asymptotic_cutoff: f64,
    pub asymptotic_order: usize,
    pub max_iterations: usize,
    pub max_halvings: u32,
    pub residual_tol: f64,
    /// Largest ratio between consecutive abscissas in a continuation walk.
    pub continuation_ratio: f64,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig {
            thresholds: RegimeThresholds::default(),
            asymptotic_cutoff: 30.0,
            asymptotic_order: 3,
            max_iterations: 60,
            max_halvings: 8,
            residual_tol: 1e-10,
            continuation_ratio: 1.3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub g: f64,
    pub h: f64,
    pub residual: f64,
    pub regime: AsymptoticRegime,
    pub iterations: usize,
}

impl CurvePoint {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.g, -self.h)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub solves: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
}

impl SolverStats {
    fn record(&mut self, iterations: usize) {
        self.solves += 1;
        self.total_iterations += iterations;
        self.max_iterations = self.max_iterations.max(iterations);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveTrace {
    pub points: Vec<CurvePoint>,
    pub solver_stats: SolverStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl BoundingBox {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetTrace {
    pub t: f64,
    pub branch: Branch,
    pub points: Vec<Complex64>,
}

/// Tolerance on `|Im F~ - t|` for level-set points.
pub const LEVEL_SET_TOL: f64 = 1e-12;

fn wrap_angle(a: f64) -> f64 {
    if a > PI {
        a - 2.0 * PI
    } else if a <= -PI {
        a + 2.0 * PI
    } else {
        a
    }
}

fn at(x: f64, e: CurveError) -> CurveError {
    match e {
        CurveError::At { .. } => e,
        other => CurveError::At { x, source: Box::new(other) },
    }
}

/// Solver for everything on or around the curve; holds only read-only configuration.
#[derive(Clone, Copy, Debug, Default)]
pub struct Curve {
    pub config: CurveConfig,
}

impl Curve {
    pub fn new(config: CurveConfig) -> Self {
        Curve { config }
    }

    /// Damped Newton on `ln F~(z) = target`, confined to the upper half-plane
    /// and the closure of the pole-free region. Returns the root and iteration count.
    ///
    /// The logarithmic form has derivative `F~'/F~ = z - F~`, and keeps the
    /// iteration scale-free when the target is tiny.
    pub fn log_newton(&self, target: Complex64, seed: Complex64) -> Option<(Complex64, usize)> {
        let phi = |z: Complex64| -> Option<(Complex64, Complex64)> {
            if !classify_domain(z).is_admissible() {
                return None;
            }
            let f = f_tilde(z).ok()?;
            let d = f.ln() - target;
            let r = Complex64::new(d.re, wrap_angle(d.im));
            r.is_finite().then(|| (r, f.to_complex()))
        };
        let mut z = seed;
        let (mut r, mut f) = phi(z)?;
        for it in 1..=self.config.max_iterations {
            if r.norm() <= 1e-15 {
                return Some((z, it - 1));
            }
            let slope = z - f;
            let step = -r / slope;
            if !step.is_finite() {
                return None;
            }
            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..=self.config.max_halvings {
                let cand = z + step * scale;
                if let Some((rc, fc)) = phi(cand) {
                    if rc.norm() < r.norm() {
                        accepted = Some((cand, rc, fc));
                        break;
                    }
                }
                scale *= 0.5;
            }
            match accepted {
                Some((c, rc, fc)) => {
                    let moved = (c - z).norm();
                    z = c;
                    r = rc;
                    f = fc;
                    if moved <= 4.0 * f64::EPSILON * z.norm() {
                        return Some((z, it));
                    }
                }
                None => return (r.norm() <= 1e-12).then_some((z, it)),
            }
        }
        (r.norm() <= 1e-12).then_some((z, self.config.max_iterations))
    }

    fn finish(&self, x: f64, z: Complex64, iterations: usize) -> Result<CurvePoint, CurveError> {
        let (g, h) = (z.re, -z.im);
        let f = f_tilde(z)?.to_complex();
        let residual = (f - x).norm();
        // below x ~ 1e-16 the product g h is within rounding of pi/2
        let ok = g > 0.0 && h > 0.0 && g * h <= FRAC_PI_2 * (1.0 + 4.0 * f64::EPSILON) && residual <= self.config.residual_tol * x.max(1.0);
        if !ok {
            return Err(CurveError::NoConvergence { x });
        }
        Ok(CurvePoint { x, g, h, residual, regime: self.config.thresholds.classify(x), iterations })
    }

    fn asymptotic_point(&self, x: f64) -> Result<CurvePoint, CurveError> {
        let g = series::eval_g_asym_infinity(x, self.config.asymptotic_order);
        let h = series::eval_h_asym_infinity(x, self.config.asymptotic_order).re();
        let residual = (f_tilde(Complex64::new(g, -h))?.to_complex() - x).norm();
        Ok(CurvePoint { x, g, h, residual, regime: AsymptoticRegime::NearInfinity, iterations: 0 })
    }

    /// Zero of `Im G~(c + iy)` for `y` in `(-pi/(2c), 0)`: the value `f(c)`.
    ///
    /// Newton with a sign bracket; the sign is positive on the hyperbola and
    /// negative on the real axis.
    pub fn boundary_height(&self, c: f64) -> Result<f64, CurveError> {
        if c <= 0.0 {
            return Err(CurveError::Domain(format!("abscissa {c} must be positive")));
        }
        let mut lo = -FRAC_PI_2 / c;
        let mut hi = 0.0;
        let g0 = g_tilde(Complex64::new(c, 0.0)).to_complex();
        let gp0 = 1.0 - c * g0.re;
        let mut y = -g0.im / gp0;
        if !(y > lo && y < hi) {
            y = 0.5 * lo;
        }
        for _ in 0..200 {
            let z = Complex64::new(c, y);
            let g = g_tilde(z).to_complex();
            let val = g.im;
            if val == 0.0 {
                return Ok(y);
            }
            if val > 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let der = (Complex64::new(1.0, 0.0) - z * g).re;
            let mut next = y - val / der;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() <= 2.0 * f64::EPSILON * y.abs() || hi - lo <= 2.0 * f64::EPSILON * y.abs() {
                return Ok(next);
            }
            y = next;
        }
        Err(CurveError::NoConvergence { x: c })
    }

    /// Large-x solve: for a trial abscissa `c`, the height `y = f(c)` makes
    /// `F~(c + iy)` real; then Newton on `c` for `Re F~ = x`.
    fn split_solve(&self, x: f64) -> Result<CurvePoint, CurveError> {
        let mut c = series::eval_g_asym_infinity(x, self.config.asymptotic_order);
        let mut best = (f64::INFINITY, c);
        for it in 1..=self.config.max_iterations {
            let y = self.boundary_height(c)?;
            let z = Complex64::new(c, y);
            let g = g_tilde(z).to_complex();
            let gp = Complex64::new(1.0, 0.0) - z * g;
            let (f, fp) = f_tilde_with_prime(z)?;
            let dy = -gp.im / gp.re;
            let slope = (fp.to_complex() * Complex64::new(1.0, dy)).re;
            let r = f.re() - x;
            if r.abs() < best.0 {
                best = (r.abs(), c);
            }
            if r.abs() <= 2.0 * f64::EPSILON * x {
                return self.finish(x, z, it);
            }
            let dc = -r / slope;
            c += dc;
            if dc.abs() <= 8.0 * f64::EPSILON * c {
                let y = self.boundary_height(c)?;
                return self.finish(x, Complex64::new(c, y), it);
            }
        }
        let y = self.boundary_height(best.1)?;
        self.finish(x, Complex64::new(best.1, y), self.config.max_iterations)
    }

    fn zero_seed(ln_x: f64) -> Complex64 {
        Complex64::new(series::g_asym_zero_ln(ln_x), -series::h_asym_zero_ln(ln_x))
    }

    /// One continuation step along the curve from `(x0, z0)` to `x1 <= x_hi`.
    fn step_to(&self, x0_ln: f64, x0: f64, z0: Complex64, x1_ln: f64) -> Option<(Complex64, usize)> {
        // dH/d(ln x) = 1/(H - x)
        let seed = z0 + (x1_ln - x0_ln) / (z0 - x0);
        self.log_newton(Complex64::new(x1_ln, 0.0), seed)
    }

    /// Walks from `(x0, z0)` to `x1` by geometric steps, halving on failure.
    fn walk(&self, mut x0_ln: f64, mut z0: Complex64, x1_ln: f64) -> Option<(Complex64, usize)> {
        let max_step = self.config.continuation_ratio.ln();
        let mut iterations = 0;
        let mut h = max_step;
        while (x1_ln - x0_ln).abs() > 0.0 {
            let dist = x1_ln - x0_ln;
            let next_ln = if dist.abs() <= h { x1_ln } else { x0_ln + h.copysign(dist) };
            match self.step_to(x0_ln, x0_ln.exp(), z0, next_ln) {
                Some((z, it)) => {
                    iterations += it;
                    x0_ln = next_ln;
                    z0 = z;
                    h = (2.0 * h).min(max_step);
                }
                None => {
                    h *= 0.25;
                    if h < 1e-6 {
                        return None;
                    }
                }
            }
        }
        Some((z0, iterations))
    }

    /// The point `H(x)` with `F~(H(x)) = x`.
    pub fn solve_h(&self, x: f64) -> Result<CurvePoint, CurveError> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(CurveError::Domain(format!("x = {x} must be positive and finite")));
        }
        if x > self.config.asymptotic_cutoff {
            return self.asymptotic_point(x);
        }
        let th = self.config.thresholds;
        match th.classify(x) {
            AsymptoticRegime::NearInfinity => self.split_solve(x),
            AsymptoticRegime::NearZero => {
                let ln_x = x.ln();
                let (z, it) = self
                    .log_newton(Complex64::new(ln_x, 0.0), Self::zero_seed(ln_x))
                    .ok_or(CurveError::NoConvergence { x })?;
                self.finish(x, z, it)
            }
            AsymptoticRegime::Bulk => {
                let ln_x = x.ln();
                let from_top = th.x_hi.ln() - ln_x <= ln_x - th.x_lo.ln();
                let start = if from_top { self.split_solve(th.x_hi)? } else { self.solve_h(th.x_lo)? };
                let (z, it) = self
                    .walk(start.x.ln(), start.z(), ln_x)
                    .ok_or(CurveError::NoConvergence { x })?;
                self.finish(x, z, it + start.iterations)
            }
        }
    }

    /// Solves at `x` starting from a nearby solved point; falls back to [`Curve::solve_h`].
    pub fn solve_h_near(&self, x: f64, near: &CurvePoint) -> Result<CurvePoint, CurveError> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(CurveError::Domain(format!("x = {x} must be positive and finite")));
        }
        if x >= self.config.thresholds.x_hi || near.x >= self.config.thresholds.x_hi || near.x > self.config.asymptotic_cutoff {
            return self.solve_h(x);
        }
        match self.walk(near.x.ln(), near.z(), x.ln()) {
            Some((z, it)) => self.finish(x, z, it).or_else(|_| self.solve_h(x)),
            None => self.solve_h(x),
        }
    }

    /// `n` points on a log-uniform grid, solved by continuation: downward from
    /// the top through the bulk, then upward from `x_min` below `x_lo`.
    pub fn trace_p0(&self, x_min: f64, x_max: f64, n: usize) -> Result<CurveTrace, CurveError> {
        if !(x_min > 0.0 && x_min < x_max && x_max.is_finite()) || n < 2 {
            return Err(CurveError::Domain(format!(
                "need 0 < x_min < x_max and n >= 2, got ({x_min}, {x_max}, {n})"
            )));
        }
        let ratio = (x_max / x_min).ln();
        let xs: Vec<f64> = (0..n)
            .map(|i| if i + 1 == n { x_max } else { x_min * (ratio * i as f64 / (n - 1) as f64).exp() })
            .collect();
        let pivot = xs.iter().position(|&x| x >= self.config.thresholds.x_lo).unwrap_or(n);
        let mut points: Vec<Option<CurvePoint>> = vec![None; n];
        let mut stats = SolverStats::default();
        for i in (pivot..n).rev() {
            let p = match points.get(i + 1).and_then(|p| p.as_ref()) {
                Some(prev) => self.solve_h_near(xs[i], prev),
                None => self.solve_h(xs[i]),
            }
            .map_err(|e| at(xs[i], e))?;
            stats.record(p.iterations);
            points[i] = Some(p);
        }
        for i in 0..pivot {
            let p = match i.checked_sub(1).and_then(|j| points[j].as_ref()) {
                Some(prev) => self.solve_h_near(xs[i], prev),
                None => self.solve_h(xs[i]),
            }
            .map_err(|e| at(xs[i], e))?;
            stats.record(p.iterations);
            points[i] = Some(p);
        }
        let points: Vec<CurvePoint> = points.into_iter().map(|p| p.expect("every grid point solved")).collect();
        if n >= 3 {
            check_monotone(&points)?;
        }
        Ok(CurveTrace { points, solver_stats: stats })
    }

    /// `z = H(e^u)`, accepting abscissas too small for binary64.
    fn solve_ln(&self, u: f64, seed: Option<Complex64>) -> Result<Complex64, CurveError> {
        let s = u.exp();
        if s >= self.config.thresholds.x_hi && s.is_finite() {
            return Ok(self.solve_h(s)?.z());
        }
        if let Some(seed) = seed {
            if let Some((z, _)) = self.log_newton(Complex64::new(u, 0.0), seed) {
                if z.re > 0.0 && z.im < 0.0 {
                    return Ok(z);
                }
            }
        }
        if s <= self.config.thresholds.x_lo {
            let (z, _) = self
                .log_newton(Complex64::new(u, 0.0), Self::zero_seed(u))
                .ok_or(CurveError::NoConvergence { x: s })?;
            Ok(z)
        } else {
            Ok(self.solve_h(s)?.z())
        }
    }

    /// `f(x) = -h(g^{-1}(|x|))`, by safeguarded Newton on `ln s` for `g(s) = |x|`.
    pub fn f_of(&self, x: f64) -> Result<f64, CurveError> {
        let t = x.abs();
        if !(t > 0.0 && t.is_finite()) {
            return Err(CurveError::Domain(format!("x = {x} must be nonzero and finite")));
        }
        let u_small = |t: f64| (t.powi(4) - PI * PI / 4.0) / (2.0 * t * t) - crate::transforms::SQRT_2PI.ln();
        let u_large = |t: f64| (t - 1.0 / t).ln();
        let u0 = if t <= 0.8 {
            u_small(t)
        } else if t >= 1.5 {
            u_large(t)
        } else {
            let w = (t - 0.8) / 0.7;
            (1.0 - w) * u_small(0.8) + w * u_large(1.5)
        };
        let mut seed = None;
        let eval = |u: f64, seed: &mut Option<Complex64>| -> Result<(f64, Complex64), CurveError> {
            let z = self.solve_ln(u, *seed)?;
            *seed = Some(z);
            Ok((z.re - t, z))
        };
        let (r0, z0) = eval(u0, &mut seed)?;
        let (mut lo, mut hi);
        let (mut u, mut r, mut z) = (u0, r0, z0);
        {
            let mut width = 0.25;
            if r0 < 0.0 {
                lo = u0;
                loop {
                    let cand = u0 + width;
                    let (rc, _) = eval(cand, &mut seed)?;
                    if rc >= 0.0 {
                        hi = cand;
                        break;
                    }
                    lo = cand;
                    width *= 2.0;
                    if width > 4096.0 {
                        return Err(CurveError::NoConvergence { x });
                    }
                }
            } else {
                hi = u0;
                loop {
                    let cand = u0 - width;
                    let (rc, _) = eval(cand, &mut seed)?;
                    if rc <= 0.0 {
                        lo = cand;
                        break;
                    }
                    hi = cand;
                    width *= 2.0;
                    if width > 4096.0 {
                        return Err(CurveError::NoConvergence { x });
                    }
                }
            }
        }
        seed = Some(z0);
        for _ in 0..200 {
            if r.abs() <= 4.0 * f64::EPSILON * t {
                return Ok(clamp_to_hyperbola(z.im, t));
            }
            let s = u.exp();
            let (g, h) = (z.re, -z.im);
            // d g / d(ln s) = s g'(s) = (g - s)/((g - s)^2 + h^2)
            let slope = (g - s) / ((g - s).powi(2) + h * h);
            let mut next = u - r / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() <= 4.0 * f64::EPSILON * u.abs().max(1.0) {
                return Ok(clamp_to_hyperbola(z.im, t));
            }
            let (rn, zn) = eval(next, &mut seed)?;
            if rn < 0.0 {
                lo = next;
            } else {
                hi = next;
            }
            u = next;
            r = rn;
            z = zn;
        }
        Err(CurveError::NoConvergence { x })
    }

    /// `1 + 2|x| f(x)/pi`, the relative distance of `f(x)` above `-pi/(2|x|)`,
    /// computed without cancellation. Meaningful for `|x|` up to about 1.
    ///
    /// With `y = -(pi/(2x))(1 - d)` the condition `Im G~(x + iy) = 0` becomes
    /// `sin(pi d / 2) = -Im G(x - iy) exp((x^2 - y^2)/2) / sqrt(2 pi)`, solved by
    /// fixed-point iteration on `d`.
    pub fn f_relative_gap(&self, x: f64) -> Result<f64, CurveError> {
        let x = x.abs();
        if !(x > 0.0 && x <= 1.0) {
            return Err(CurveError::Domain(format!("|x| = {x} must lie in (0, 1]")));
        }
        let mut d = 0.0;
        for _ in 0..500 {
            let y = -FRAC_PI_2 / x * (1.0 - d);
            let upper = g_tilde(Complex64::new(x, -y)).to_complex();
            let q = -upper.im * ((x - y) * (x + y) / 2.0).exp() / crate::transforms::SQRT_2PI;
            if !(0.0..=1.0).contains(&q) {
                return Err(CurveError::NoConvergence { x });
            }
            let next = 2.0 / PI * q.asin();
            if (next - d).abs() <= 1e-15 * next {
                return Ok(next);
            }
            d = next;
        }
        Err(CurveError::NoConvergence { x })
    }

    /// Membership in `{ Im z > f(Re z) } union iR`.
    pub fn in_omega(&self, z: Complex64) -> bool {
        if z.re == 0.0 || z.im >= 0.0 {
            return true;
        }
        if classify_domain(z) != DomainTag::XiInterior {
            return false;
        }
        match self.f_of(z.re) {
            Ok(f) => z.im > f,
            Err(_) => g_tilde(z).im() < 0.0,
        }
    }

    /// `F~^{-1}(w)` for `w` in the upper half-plane: confined Newton from
    /// `w + 1/w`, falling back to `w`; the root must lie in the univalence domain.
    pub fn inverse(&self, w: Complex64) -> Result<Complex64, CurveError> {
        if !(w.im > 0.0) {
            return Err(CurveError::Domain(format!("{w} is not in the upper half-plane")));
        }
        let accept = |z: Complex64| -> bool {
            f_tilde(z).map(|f| (f.to_complex() - w).norm() <= 1e-10 * w.norm()).unwrap_or(false) && self.in_omega(z)
        };
        let target = w.ln();
        for seed in [w + w.inv(), w] {
            if let Some((z, _)) = self.log_newton(target, seed) {
                if accept(z) {
                    return Ok(z);
                }
            }
        }
        // continuation along the arc |w| e^{i theta} from the imaginary axis
        let r = w.norm();
        let mut z = Complex64::new(0.0, axis_preimage(r));
        let (mut theta, end) = (FRAC_PI_2, w.arg());
        let mut dtheta: f64 = 0.1;
        while theta != end {
            let next = if (end - theta).abs() <= dtheta { end } else { theta + dtheta.copysign(end - theta) };
            let t = Complex64::from_polar(r, next);
            match self.log_newton(Complex64::new(r.ln(), next), z) {
                Some((zn, _)) if (f_tilde(zn)?.to_complex() - t).norm() <= 1e-10 * r => {
                    z = zn;
                    theta = next;
                    dtheta = (2.0 * dtheta).min(0.1);
                }
                _ => {
                    dtheta *= 0.25;
                    if dtheta < 1e-9 {
                        return Err(CurveError::NoConvergence { x: r });
                    }
                }
            }
        }
        if accept(z) {
            Ok(z)
        } else {
            Err(CurveError::NoConvergence { x: r })
        }
    }

    /// Traces `Im F~ = t` inside `bbox`, restricted to the upper half-plane and
    /// the pole-free region below it. Curves are traced on the right half and mirrored.
    pub fn trace_level_set(&self, t: f64, bbox: BoundingBox, step: f64) -> Result<Vec<LevelSetTrace>, CurveError> {
        if !(t >= 0.0 && step > 0.0 && bbox.re_min < bbox.re_max && bbox.im_min < bbox.im_max) {
            return Err(CurveError::Domain("level set needs t >= 0, step > 0 and a non-empty box".into()));
        }
        let tracer = LevelTracer { t, bbox, step };
        let re_lo = bbox.re_min.max(0.0);
        if re_lo >= bbox.re_max {
            return Err(CurveError::SeedNotFound { t });
        }
        let columns = (((bbox.re_max - re_lo) / step).ceil() as usize).clamp(1, 48);
        let dx = (bbox.re_max - re_lo) / columns as f64;
        let rows = (((bbox.im_max - bbox.im_min) / (0.5 * step)).ceil() as usize).clamp(2, 480);
        let dy = (bbox.im_max - bbox.im_min) / rows as f64;

        let mut right: Vec<Vec<Complex64>> = Vec::new();
        let mut any_seed = false;
        for j in 0..columns {
            let x = re_lo + (j as f64 + 0.5) * dx;
            let mut ys: Vec<f64> = (0..=rows).map(|i| bbox.im_max - i as f64 * dy).collect();
            if bbox.im_min < 0.0 && bbox.im_max > 0.0 {
                ys.push(0.0);
                ys.sort_by(|a, b| b.total_cmp(a));
            }
            let vals: Vec<Option<f64>> = ys.iter().map(|&y| tracer.value(Complex64::new(x, y))).collect();
            for i in 0..ys.len() - 1 {
                let (Some(a), Some(b)) = (vals[i], vals[i + 1]) else { continue };
                if a == 0.0 || a.signum() == b.signum() {
                    continue;
                }
                let Some(seed) = tracer.bisect(x, ys[i], ys[i + 1], a) else { continue };
                any_seed = true;
                let known = right.iter().flatten().any(|p| (p - seed).norm() < 2.0 * step);
                if known {
                    continue;
                }
                let pts = tracer.trace_from(seed);
                if pts.len() >= 2 {
                    right.push(pts);
                }
            }
        }
        if !any_seed {
            return Err(CurveError::SeedNotFound { t });
        }
        let mut out = Vec::new();
        for pts in right {
            let left: Vec<Complex64> = pts.iter().rev().map(|z| -z.conj()).collect();
            out.push(LevelSetTrace { t, branch: Branch::Left, points: left });
            out.push(LevelSetTrace { t, branch: Branch::Right, points: pts });
        }
        Ok(out)
    }
}

struct LevelTracer {
    t: f64,
    bbox: BoundingBox,
    step: f64,
}

impl LevelTracer {
    fn value(&self, z: Complex64) -> Option<f64> {
        if !classify_domain(z).is_admissible() {
            return None;
        }
        let v = f_tilde(z).ok()?.to_complex().im - self.t;
        v.is_finite().then_some(v)
    }

    fn bisect(&self, x: f64, mut y_hi: f64, mut y_lo: f64, v_hi: f64) -> Option<Complex64> {
        for _ in 0..200 {
            let mid = 0.5 * (y_hi + y_lo);
            if mid == y_hi || mid == y_lo {
                break;
            }
            let v = self.value(Complex64::new(x, mid))?;
            if v.signum() == v_hi.signum() {
                y_hi = mid;
            } else {
                y_lo = mid;
            }
        }
        self.correct(Complex64::new(x, 0.5 * (y_hi + y_lo)))
    }

    /// Newton transverse to the level curve: `dz = -i (Im F~ - t) / F~'`.
    fn correct(&self, mut z: Complex64) -> Option<Complex64> {
        let tol = LEVEL_SET_TOL * self.t.max(1.0);
        for _ in 0..12 {
            if !classify_domain(z).is_admissible() {
                return None;
            }
            let (f, fp) = f_tilde_with_prime(z).ok()?;
            let u = f.to_complex().im - self.t;
            if u.abs() <= tol {
                return Some(z);
            }
            let dz = Complex64::new(0.0, -u) / fp.to_complex();
            if !dz.is_finite() {
                return None;
            }
            z += dz;
        }
        let u = self.value(z)?;
        (u.abs() <= tol).then_some(z)
    }

    fn tangent(&self, z: Complex64) -> Option<Complex64> {
        let (_, fp) = f_tilde_with_prime(z).ok()?;
        let d = fp.to_complex().conj();
        let n = d.norm();
        (n > 0.0 && n.is_finite()).then(|| d / n)
    }

    fn trace_from(&self, seed: Complex64) -> Vec<Complex64> {
        let forward = self.march(seed, 1.0);
        let backward = self.march(seed, -1.0);
        let mut pts: Vec<Complex64> = backward.into_iter().rev().collect();
        pts.push(seed);
        pts.extend(forward);
        if pts.first().map(|z| z.re) > pts.last().map(|z| z.re) {
            pts.reverse();
        }
        pts
    }

    fn axis_point(&self) -> Option<Complex64> {
        (self.t > 0.0).then(|| Complex64::new(0.0, axis_preimage(self.t)))
    }

    fn march(&self, seed: Complex64, orientation: f64) -> Vec<Complex64> {
        let max_step = 0.9 * self.step;
        let mut out = Vec::new();
        let mut z = seed;
        let Some(mut tau) = self.tangent(z).map(|d| d * orientation) else { return out };
        let mut h = max_step;
        while out.len() < 20_000 {
            let pred = z + tau * h;
            let accepted = self.correct(pred).and_then(|zc| {
                let tn = self.tangent(zc)?;
                let tn = if (tn * tau.conj()).re < 0.0 { -tn } else { tn };
                let turn = (tn * tau.conj()).arg().abs();
                ((zc - z).norm() <= self.step && turn <= 0.3).then_some((zc, tn, turn))
            });
            let Some((zc, tn, turn)) = accepted else {
                h *= 0.5;
                if h < 1e-3 * self.step {
                    break;
                }
                continue;
            };
            if zc.re < 0.0 {
                if let Some(a) = self.axis_point() {
                    if (a - z).norm() <= self.step && self.bbox.contains(a) {
                        out.push(a);
                    }
                }
                break;
            }
            if !self.bbox.contains(zc) {
                break;
            }
            out.push(zc);
            if out.len() > 10 && (zc - seed).norm() < 0.5 * self.step {
                break;
            }
            z = zc;
            tau = tn;
            if turn < 0.1 {
                h = (1.5 * h).min(max_step);
            }
        }
        out
    }
}

/// `y` kept on the pole-free side of the rounded hyperbola `|x| y = -pi/2`;
/// for small `|x|` the true gap is below one ulp.
fn clamp_to_hyperbola(y: f64, x: f64) -> f64 {
    y.max(-FRAC_PI_2 / x)
}

/// The `y` with `F~(iy) = i r`, using `F~(iy) = i/rho(y)` with `rho` decreasing.
pub fn axis_preimage(r: f64) -> f64 {
    let target = -r.ln();
    let (mut lo, mut hi) = (-40.0, 40.0f64.max(2.0 * r));
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rho(mid).ln_abs() > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_monotone(points: &[CurvePoint]) -> Result<(), CurveError> {
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if !(b.g > a.g) {
            return Err(CurveError::Monotonicity { x0: a.x, x1: b.x, what: format!("g: {} then {}", a.g, b.g) });
        }
        if !(b.h < a.h) {
            return Err(CurveError::Monotonicity { x0: a.x, x1: b.x, what: format!("h: {} then {}", a.h, b.h) });
        }
    }
    Ok(())
}

/// [`Curve::solve_h`] with the default configuration.
pub fn solve_h(x: f64) -> Result<CurvePoint, CurveError> {
    Curve::default().solve_h(x)
}

/// [`Curve::trace_p0`] with the default configuration.
pub fn trace_p0(x_min: f64, x_max: f64, n: usize) -> Result<CurveTrace, CurveError> {
    Curve::default().trace_p0(x_min, x_max, n)
}

/// [`Curve::f_of`] with the default configuration.
pub fn f_of(x: f64) -> Result<f64, CurveError> {
    Curve::default().f_of(x)
}

/// [`Curve::in_omega`] with the default configuration.
pub fn in_omega(z: Complex64) -> bool {
    Curve::default().in_omega(z)
}

/// [`Curve::trace_level_set`] with the default configuration.
pub fn trace_level_set(t: f64, bbox: BoundingBox, step: f64) -> Result<Vec<LevelSetTrace>, CurveError> {
    Curve::default().trace_level_set(t, bbox, step)
}

/// Solves points in arbitrary order, seeding each from the nearest one already solved.
pub struct ContinuationCache<'a> {
    curve: &'a Curve,
    points: Vec<CurvePoint>,
}

impl<'a> ContinuationCache<'a> {
    pub fn new(curve: &'a Curve) -> Self {
        ContinuationCache { curve, points: Vec::new() }
    }

    pub fn solve(&mut self, x: f64) -> Result<CurvePoint, CurveError> {
        let pos = self.points.partition_point(|p| p.x < x);
        if let Some(p) = self.points.get(pos) {
            if p.x == x {
                return Ok(*p);
            }
        }
        let lx = x.ln();
        let nearest = [pos.checked_sub(1), Some(pos)]
            .into_iter()
            .flatten()
            .filter_map(|i| self.points.get(i))
            .min_by(|a, b| (a.x.ln() - lx).abs().total_cmp(&(b.x.ln() - lx).abs()))
            .copied();
        let p = match nearest {
            Some(n) if (n.x.ln() - lx).abs() < 1.0 => self.curve.solve_h_near(x, &n)?,
            _ => self.curve.solve_h(x)?,
        };
        self.points.insert(pos, p);
        Ok(p)
    }
}
