//! The free Levy measure of the standard Gaussian, the finite measure `tau`
//! of its Pick-Nevanlinna representation, and the Voiculescu transform.

use crate::curve::{ContinuationCache, Curve, CurveError};
use crate::quadrature::{integrate, QuadratureError};
use crate::series;
use crate::transforms::{rho, TransformError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevySample {
    pub x: f64,
    pub density: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauSample {
    pub x: f64,
    pub tau_density: f64,
}

fn nonzero(x: f64) -> Result<f64, LevyError> {
    if x != 0.0 && x.is_finite() {
        Ok(x.abs())
    } else {
        Err(LevyError::Domain(format!("x = {x} must be nonzero and finite")))
    }
}

/// `h(|x|)/(pi x^2)`.
pub fn levy_density(x: f64) -> Result<f64, LevyError> {
    let a = nonzero(x)?;
    Ok(Curve::default().solve_h(a)?.h / (PI * a * a))
}

/// `h(|x|)/(pi (1 + x^2))`.
pub fn tau_density(x: f64) -> Result<f64, LevyError> {
    let a = nonzero(x)?;
    Ok(Curve::default().solve_h(a)?.h / (PI * (1.0 + a * a)))
}

/// Density samples on the given abscissas, solved by continuation.
pub fn levy_table(xs: &[f64]) -> Result<Vec<LevySample>, LevyError> {
    let curve = Curve::default();
    let mut cache = ContinuationCache::new(&curve);
    xs.iter()
        .map(|&x| {
            let a = nonzero(x)?;
            Ok(LevySample { x, density: cache.solve(a)?.h / (PI * a * a) })
        })
        .collect()
}

/// `F~^{-1}(w) - w` on the closed upper half-plane minus the origin.
pub fn voiculescu(w: Complex64) -> Result<Complex64, LevyError> {
    if w.re == 0.0 && w.im == 0.0 {
        return Err(LevyError::Domain("the transform is not defined at 0".into()));
    }
    if !(w.im >= 0.0) || !w.is_finite() {
        return Err(LevyError::Domain(format!("{w} is not in the closed upper half-plane")));
    }
    let curve = Curve::default();
    if w.im == 0.0 {
        let p = curve.solve_h(w.re.abs())?;
        return Ok(Complex64::new(p.g.copysign(w.re) - w.re, -p.h));
    }
    Ok(curve.inverse(w)? - w)
}

/// `tau(R)`: twice the integral of `h(x)/(pi (1 + x^2))` over the positive axis.
///
/// Pieces: `(0, x_lo]` in the variable `u = -ln x`, `[x_lo, x_hi]` on solver
/// values, and `[x_hi, 40]` on the large-x series; beyond 40 the integrand is below `e^-800`.
pub fn tau_total_mass(quad_tol: f64) -> Result<f64, LevyError> {
    if !(quad_tol > 0.0) {
        return Err(LevyError::Domain(format!("quad_tol = {quad_tol} must be positive")));
    }
    let curve = Curve::default();
    let th = curve.config.thresholds;
    let tol = quad_tol / 8.0;
    let rel = 1e-13;

    let u_lo = -th.x_lo.ln();
    let u_hi = 40.0;
    let mut err = None;
    let near_zero = integrate(
        |u: f64| {
            let x = (-u).exp();
            match curve.solve_h(x) {
                Ok(p) => p.h * x / (PI * (1.0 + x * x)),
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        u_lo,
        u_hi,
        tol,
        rel,
    );
    if let Some(e) = err {
        return Err(e.into());
    }
    // h is slowly varying there, so the remaining integral is h(e^-40) e^-40 / pi to leading order
    let zero_tail = series::h_asym_zero_ln(-u_hi) * (-u_hi).exp() / PI;

    let mut cache = ContinuationCache::new(&curve);
    let mut err = None;
    let bulk = integrate(
        |x: f64| match cache.solve(x) {
            Ok(p) => p.h / (PI * (1.0 + x * x)),
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        th.x_lo,
        th.x_hi,
        tol,
        rel,
    );
    if let Some(e) = err {
        return Err(e.into());
    }

    let far = integrate(
        |x: f64| series::eval_h_asym_infinity(x, 3).re() / (PI * (1.0 + x * x)),
        th.x_hi,
        40.0,
        tol,
        rel,
    )?;
    Ok(2.0 * (near_zero?.value + zero_tail + bulk?.value + far.value))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauMassReport {
    pub mass: f64,
    pub im_phi_i: f64,
    pub discrepancy: f64,
}

/// Compares `tau(R)` with `-Im phi(i)`.
pub fn tau_mass_report(quad_tol: f64) -> Result<TauMassReport, LevyError> {
    let mass = tau_total_mass(quad_tol)?;
    let im_phi_i = voiculescu(Complex64::new(0.0, 1.0))?.im;
    Ok(TauMassReport { mass, im_phi_i, discrepancy: (mass + im_phi_i).abs() })
}

/// `|F~(-iT) (-iT)| = T / rho(-T)`; tends to zero, so `tau` has no atom at 0.
pub fn semicircular_component_check(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    (t.abs().ln() - rho(-t).ln_abs()).exp()
}
