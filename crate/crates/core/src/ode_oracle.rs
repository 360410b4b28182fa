//! Independent check on the curve solver: integrate `H'(x) = 1/(x(H - x))`
//! from an anchor found by bisection.

use crate::transforms::{f_tilde, f_tilde_with_prime, g_tilde, TransformError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("{0}")]
    Domain(String),
    #[error("no sign change of {what} while building the anchor at x0 = {x0}")]
    NoSignChange { x0: f64, what: &'static str },
    #[error("anchor residual {residual:e} above 1e-12 at x0 = {x0}")]
    AnchorResidual { x0: f64, residual: f64 },
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("state left the pole-free region at x = {x}: g = {g}, h = {h}")]
    LeftRegion { x: f64, g: f64, h: f64 },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeState {
    pub x: f64,
    pub g: f64,
    pub h: f64,
}

impl OdeState {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.g, -self.h)
    }

    fn from_z(x: f64, z: Complex64) -> Self {
        OdeState { x, g: z.re, h: -z.im }
    }

    fn admissible(&self) -> bool {
        self.g > 0.0 && self.h > 0.0 && self.g * self.h < FRAC_PI_2 && self.g.is_finite() && self.h.is_finite()
    }

    /// Right-hand sides of the real system: `(g', h')`.
    pub fn derivatives(&self) -> (f64, f64) {
        let d = self.x * ((self.g - self.x).powi(2) + self.h * self.h);
        ((self.g - self.x) / d, -self.h / d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorMethod {
    Bisection,
    Newton,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorPoint {
    pub x0: f64,
    pub state: OdeState,
    pub method: AnchorMethod,
    pub residual: f64,
}

/// Bisection for the zero of `Im G~(c + iy)` on `y in (-pi/(2c), 0)`.
fn height_by_bisection(c: f64) -> Option<f64> {
    let im = |y: f64| g_tilde(Complex64::new(c, y)).im();
    let (mut lo, mut hi) = (-FRAC_PI_2 / c * (1.0 - 1e-15), 0.0);
    if !(im(lo) > 0.0 && im(hi) < 0.0) {
        return None;
    }
    for _ in 0..1100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if im(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// The curve point over `x0` found without Newton: bisection in `y` for each
/// trial abscissa, bisection in the abscissa on `Re F~ = x0`, and a final
/// complex Newton polish only if the residual demands it.
pub fn make_anchor(x0: f64) -> Result<AnchorPoint, OdeError> {
    if !(0.5..=4.0).contains(&x0) {
        return Err(OdeError::Domain(format!("anchor abscissa {x0} outside [0.5, 4]")));
    }
    let value = |c: f64| -> Option<(Complex64, f64)> {
        let y = height_by_bisection(c)?;
        let z = Complex64::new(c, y);
        Some((z, f_tilde(z).ok()?.re() - x0))
    };
    let (mut lo, mut hi) = (0.2, 10.0);
    let (Some((_, r_lo)), Some((_, r_hi))) = (value(lo), value(hi)) else {
        return Err(OdeError::NoSignChange { x0, what: "Im G~ along a vertical segment" });
    };
    if !(r_lo < 0.0 && r_hi > 0.0) {
        return Err(OdeError::NoSignChange { x0, what: "Re F~ - x0 along the curve" });
    }
    let mut z = Complex64::new(lo, 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (zm, r) = value(mid).ok_or(OdeError::NoSignChange { x0, what: "Im G~ along a vertical segment" })?;
        z = zm;
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tol = 1e-12 * x0.max(1.0);
    let mut residual = (f_tilde(z)?.to_complex() - x0).norm();
    let mut method = AnchorMethod::Bisection;
    if residual > tol {
        method = AnchorMethod::Newton;
        for _ in 0..10 {
            let (f, fp) = f_tilde_with_prime(z)?;
            z -= (f.to_complex() - x0) / fp.to_complex();
            residual = (f_tilde(z)?.to_complex() - x0).norm();
            if residual <= tol {
                break;
            }
        }
    }
    let state = OdeState::from_z(x0, z);
    if residual > tol || !state.admissible() {
        return Err(OdeError::AnchorResidual { x0, residual });
    }
    Ok(AnchorPoint { x0, state, method, residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
}

// Dormand-Prince 5(4)
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const ATOL: f64 = 1e-300;
/// Local error is held at this fraction of the requested tolerance so that
/// accumulated error over long paths in `ln x` stays within `tol`.
const LOCAL_SHARE: f64 = 0.1;

/// Independent variable: `x` itself or `s = ln x`.
#[derive(Clone, Copy)]
enum Variable {
    Linear,
    Log,
}

impl Variable {
    fn x(self, t: f64) -> f64 {
        match self {
            Variable::Linear => t,
            Variable::Log => t.exp(),
        }
    }

    fn rhs(self, t: f64, z: Complex64) -> Complex64 {
        let x = self.x(t);
        match self {
            Variable::Linear => 1.0 / (x * (z - x)),
            Variable::Log => 1.0 / (z - x),
        }
    }
}

fn drive(
    var: Variable,
    t0: f64,
    z0: Complex64,
    t1: f64,
    tol: f64,
    stats: &mut IntegrationStats,
) -> Result<Complex64, OdeError> {
    let tol = tol * LOCAL_SHARE;
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut z = z0;
    let mut h = (span * 0.01).min(0.05);
    let mut k1 = var.rhs(t, z);
    while (t1 - t) * dir > 0.0 {
        let x = var.x(t);
        let min_step = match var {
            Variable::Linear => 1e-14 * x,
            Variable::Log => 1e-14,
        };
        let last = h >= (t1 - t).abs();
        let step = if last { (t1 - t).abs() } else { h };
        if step < min_step && !last {
            return Err(OdeError::StepUnderflow { x });
        }
        let dt = dir * step;
        let mut k = [Complex64::new(0.0, 0.0); 7];
        k[0] = k1;
        for s in 1..7 {
            let mut acc = z;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += *kj * (dt * A[s][j]);
            }
            k[s] = var.rhs(t + C[s] * dt, acc);
        }
        let mut z5 = z;
        let mut z4 = z;
        for s in 0..7 {
            z5 += k[s] * (dt * B5[s]);
            z4 += k[s] * (dt * B4[s]);
        }
        let e = z5 - z4;
        let err_g = e.re.abs() / (ATOL + tol * z5.re.abs().max(z.re.abs()));
        let err_h = e.im.abs() / (ATOL + tol * z5.im.abs().max(z.im.abs()));
        let err = err_g.max(err_h);
        let trial = OdeState::from_z(var.x(t + dt), z5);
        if err.is_finite() && err <= 1.0 && trial.admissible() {
            stats.accepted += 1;
            t = if last { t1 } else { t + dt };
            z = z5;
            k1 = k[6];
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !last {
                h = step * grow;
            }
        } else {
            stats.rejected += 1;
            if err <= 1.0 && !trial.admissible() && step <= min_step {
                return Err(OdeError::LeftRegion { x: trial.x, g: trial.g, h: trial.h });
            }
            let shrink = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
            h = step * shrink;
            if h < min_step {
                return Err(OdeError::StepUnderflow { x });
            }
        }
    }
    Ok(z)
}

/// Integrates from the anchor to `x_target` with relative tolerance `tol`
/// per component of `(g, h)`.
pub fn integrate(anchor: &AnchorPoint, x_target: f64, tol: f64) -> Result<OdeState, OdeError> {
    integrate_with_stats(anchor, x_target, tol).map(|(s, _)| s)
}

pub fn integrate_with_stats(
    anchor: &AnchorPoint,
    x_target: f64,
    tol: f64,
) -> Result<(OdeState, IntegrationStats), OdeError> {
    integrate_from(&anchor.state, x_target, tol)
}

/// Integrates from an arbitrary admissible state.
pub fn integrate_from(start: &OdeState, x_target: f64, tol: f64) -> Result<(OdeState, IntegrationStats), OdeError> {
    if !(x_target > 0.0 && x_target.is_finite() && tol > 0.0) {
        return Err(OdeError::Domain(format!("need x_target > 0 and tol > 0, got {x_target}, {tol}")));
    }
    let mut stats = IntegrationStats { accepted: 0, rejected: 0 };
    if x_target == start.x {
        return Ok((*start, stats));
    }
    let z = if x_target < start.x / 4.0 {
        drive(Variable::Log, start.x.ln(), start.z(), x_target.ln(), tol, &mut stats)?
    } else {
        drive(Variable::Linear, start.x, start.z(), x_target, tol, &mut stats)?
    };
    Ok((OdeState::from_z(x_target, z), stats))
}

/// States at each of `xs` (in order), integrating leg by leg from the anchor.
pub fn integrate_path(anchor: &AnchorPoint, xs: &[f64], tol: f64) -> Result<Vec<OdeState>, OdeError> {
    let mut out = Vec::with_capacity(xs.len());
    let mut cur = anchor.state;
    for &x in xs {
        let (s, _) = integrate_from(&cur, x, tol)?;
        out.push(s);
        cur = s;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub x: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub checked: usize,
    pub violations: Vec<MonotonicityViolation>,
}

impl MonotonicityReport {
    pub fn is_certified(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Pointwise signs of `g'` and `h'` from the real system.
pub fn monotonicity_certificate(states: &[OdeState]) -> MonotonicityReport {
    let mut violations = Vec::new();
    for s in states {
        let (dg, dh) = s.derivatives();
        if !(dg.is_finite() && dh.is_finite()) {
            violations.push(MonotonicityViolation { x: s.x, reason: "non-finite derivative".into() });
            continue;
        }
        if !(s.g > s.x) {
            violations.push(MonotonicityViolation { x: s.x, reason: format!("g = {} does not exceed x", s.g) });
        }
        if !(dh < 0.0) {
            violations.push(MonotonicityViolation { x: s.x, reason: format!("h' = {dh} is not negative") });
        }
    }
    MonotonicityReport { checked: states.len(), violations }
}
