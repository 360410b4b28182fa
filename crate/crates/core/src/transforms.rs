//! The entire continuation of the Gaussian Cauchy transform and its reciprocal.
//!
//! `g_tilde(z) = exp(-z^2/2) * (-i sqrt(pi/2) + sqrt(2) * int_0^{z/sqrt 2} exp(t^2) dt)`
//!
//! Evaluation is split by region:
//!
//! * on the real axis the real part is a Dawson integral and the imaginary part
//!   is `-sqrt(pi/2) exp(-x^2/2)` exactly;
//! * in a thin strip around the real axis with `|Re z| >= 5`, a Taylor expansion
//!   of the Dawson part in `i Im z` plus the explicit Gaussian term, so that the
//!   tiny imaginary part keeps full relative accuracy;
//! * inside a disc (and a wider strip near the axis) the Maclaurin series in
//!   double-double arithmetic, which absorbs the `exp(|z|^2/2)` cancellation;
//! * elsewhere in the upper half-plane the Jacobi continued fraction of the
//!   Hermite weight;
//! * elsewhere below the axis, reflection plus the scaled Gaussian term.

use crate::dd::{Dd, DdComplex};
use crate::quadrature::{self, QuadratureError};
use crate::scaled::{ScaledComplex, FLUSH_GAP};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use thiserror::Error;

pub type ComplexValue = Complex64;

pub const SQRT_PI_2: f64 = 1.253_314_137_315_500_3;
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
const SQRT_PI_2_DD: Dd = Dd::new(1.253_314_137_315_500_3, -9.164_289_990_229_583e-17);

/// Region boundaries and thresholds of the evaluator, all in one place.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EvaluatorConstants {
    /// Maclaurin series is used for `|z|` up to this radius.
    pub maclaurin_radius: f64,
    /// ... and for `|z|` up to this radius when `|Im z| <= strip_half_width`.
    pub strip_radius: f64,
    pub strip_half_width: f64,
    /// Near-axis Taylor expansion applies for `|Im z| <= near_axis_half_width`
    /// and `|Re z| >= near_axis_min_abs_re`.
    pub near_axis_half_width: f64,
    pub near_axis_min_abs_re: f64,
    /// Real Dawson integral switches from its positive series to the asymptotic series here.
    pub dawson_asymptotic_from: f64,
    /// `ln |G|` below this counts as a pole of the reciprocal.
    pub pole_ln_threshold: f64,
    pub flush_gap: f64,
}

pub const EVALUATOR: EvaluatorConstants = EvaluatorConstants {
    maclaurin_radius: 6.0,
    strip_radius: 8.7,
    strip_half_width: 1.0,
    near_axis_half_width: 0.1,
    near_axis_min_abs_re: 5.0,
    dawson_asymptotic_from: 9.0,
    pole_ln_threshold: -690.775_527_898_213_7,
    flush_gap: FLUSH_GAP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("G vanishes to within 1e-300 near {re}{im:+}i; the reciprocal is not defined there")]
    PoleProximity { re: f64, im: f64 },
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainTag {
    UpperHalfPlane,
    RealAxis,
    XiInterior,
    XiBoundary,
    OutsideXi,
}

impl DomainTag {
    /// Upper half-plane, real axis, or the closure of the pole-free region below it.
    pub fn is_admissible(self) -> bool {
        !matches!(self, DomainTag::OutsideXi)
    }
}

fn neg_half_square(z: Complex64) -> Complex64 {
    let re = Dd::from_prod(z.im, z.im).sub(Dd::from_prod(z.re, z.re));
    Complex64::new(0.5 * re.hi + 0.5 * re.lo, -z.re * z.im)
}

/// `exp(-x^2/2)` with the square carried in double-double.
fn gauss(x: f64) -> f64 {
    let sq = Dd::from_prod(x, x);
    (-0.5 * sq.hi).exp() * (1.0 - 0.5 * sq.lo)
}

/// `exp(-z^2/2)` for moderate arguments, with the real exponent carried exactly.
fn gauss_complex(z: Complex64) -> Complex64 {
    let re = Dd::from_prod(z.im, z.im).sub(Dd::from_prod(z.re, z.re));
    let modulus = (0.5 * re.hi).exp() * (1.0 + 0.5 * re.lo);
    Complex64::from_polar(modulus, -z.re * z.im)
}

/// `R(x) = Re g_tilde(x)`, the Dawson part on the real line.
pub fn real_dawson(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return 0.0;
    }
    let v = if a < EVALUATOR.dawson_asymptotic_from {
        dawson_positive_series(a)
    } else {
        dawson_asymptotic_derivatives(a, 0)[0]
    };
    v.copysign(x)
}

fn dawson_positive_series(a: f64) -> f64 {
    // R(a) = a e^{-a^2/2} sum_n (a^2/2)^n / (n! (2n+1)); every term is positive
    let q = 0.5 * a * a;
    let mut t = 1.0;
    let mut sum = 1.0;
    let mut n = 1.0;
    loop {
        t *= q / n;
        let term = t / (2.0 * n + 1.0);
        sum += term;
        if n > q && term < 1e-17 * sum {
            break;
        }
        n += 1.0;
    }
    a * gauss(a) * sum
}

/// Derivatives `R^(k)(a)`, `k = 0..=order`, from the optimally truncated
/// asymptotic series `sum_n (2n-1)!! a^{-2n-1}`; valid for `a >= 9`.
fn dawson_asymptotic_derivatives(a: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    let inv_a2 = 1.0 / (a * a);
    let n_max = (0.5 * a * a).floor() as usize;
    let mut base = 1.0 / a;
    let mut first = 0.0;
    for n in 0..=n_max {
        if n > 0 {
            base *= (2 * n - 1) as f64 * inv_a2;
        }
        let mut term = base;
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                term *= -((2 * n + k) as f64) / a;
            }
            *slot += term;
        }
        if n == 0 {
            first = base;
        } else if base < 1e-18 * first {
            break;
        }
    }
    out
}

fn near_axis(x: f64, y: f64) -> Complex64 {
    let a = x.abs();
    let ratio = (a / y.abs()).log10();
    let order = ((18.0 / ratio).ceil() as usize + 2).clamp(3, 30);
    let mut derivs = if a >= EVALUATOR.dawson_asymptotic_from {
        dawson_asymptotic_derivatives(a, order)
    } else {
        let mut d = vec![0.0; order + 1];
        d[0] = dawson_positive_series(a);
        d[1] = 1.0 - a * d[0];
        for k in 1..order {
            d[k + 1] = -a * d[k] - k as f64 * d[k - 1];
        }
        d
    };
    if x < 0.0 {
        // R is odd, so R^(k)(-a) = (-1)^(k+1) R^(k)(a)
        for (k, d) in derivs.iter_mut().enumerate() {
            if k % 2 == 0 {
                *d = -*d;
            }
        }
    }
    let step = Complex64::new(0.0, y);
    let mut p = Complex64::new(1.0, 0.0);
    let mut dawson = Complex64::new(0.0, 0.0);
    for (k, d) in derivs.iter().enumerate() {
        dawson += p * *d;
        p = p * step / (k + 1) as f64;
    }
    dawson + Complex64::new(0.0, -SQRT_PI_2) * gauss_complex(Complex64::new(x, y))
}

fn maclaurin(x: f64, y: f64) -> Complex64 {
    let sq_re = Dd::from_prod(x, x).sub(Dd::from_prod(y, y));
    let sq_im = Dd::from_prod(x, y);
    let neg_sq = DdComplex {
        re: sq_re.neg(),
        im: Dd::new(-2.0 * sq_im.hi, -2.0 * sq_im.lo),
    };
    let half_mod = 0.5 * (x * x + y * y);
    // even part: sum (-z^2/2)^m / m!, odd part: sum (-z^2)^m / (2m+1)!!
    let mut even = DdComplex::ONE;
    let mut odd = DdComplex::ONE;
    let mut even_sum = DdComplex::ONE;
    let mut odd_sum = DdComplex::ONE;
    let mut m = 1usize;
    loop {
        even = even.mul(neg_sq).div_f64((2 * m) as f64);
        odd = odd.mul(neg_sq).div_f64((2 * m + 1) as f64);
        even_sum = even_sum.add(even);
        odd_sum = odd_sum.add(odd);
        let size = even.magnitude_hint() + odd.magnitude_hint();
        let scale = even_sum.magnitude_hint() + odd_sum.magnitude_hint();
        if (m as f64 > half_mod && size <= 1e-34 * scale) || m > 4000 {
            break;
        }
        m += 1;
    }
    let z = DdComplex { re: Dd::new(x, 0.0), im: Dd::new(y, 0.0) };
    let dawson = z.mul(odd_sum);
    let re = dawson.re.add(SQRT_PI_2_DD.mul(even_sum.im));
    let im = dawson.im.sub(SQRT_PI_2_DD.mul(even_sum.re));
    Complex64::new(re.to_f64(), im.to_f64())
}

/// Jacobi fraction `1/(z - 1/(z - 2/(z - 3/(z - ...))))` for `Im z > 0`.
fn jacobi_fraction(z: Complex64) -> Complex64 {
    let eval = |depth: usize| {
        let mut t = z;
        for k in (1..=depth).rev() {
            t = z - (k as f64) / t;
        }
        t.inv()
    };
    let mut depth = 32;
    let mut prev = eval(depth);
    loop {
        depth *= 2;
        let cur = eval(depth);
        if (cur - prev).norm() <= 2e-16 * cur.norm() || depth >= 16384 {
            return cur;
        }
        prev = cur;
    }
}

/// The entire continuation `G~(z)`.
pub fn g_tilde(z: Complex64) -> ScaledComplex {
    let (x, y) = (z.re, z.im);
    let c = &EVALUATOR;
    if y == 0.0 {
        return ScaledComplex::from_complex(Complex64::new(real_dawson(x), -SQRT_PI_2 * gauss(x)));
    }
    if y.abs() <= c.near_axis_half_width && x.abs() >= c.near_axis_min_abs_re {
        return ScaledComplex::from_complex(near_axis(x, y));
    }
    let r = z.norm();
    if r <= c.maclaurin_radius || (y.abs() <= c.strip_half_width && r <= c.strip_radius) {
        return ScaledComplex::from_complex(maclaurin(x, y));
    }
    if y > 0.0 {
        return ScaledComplex::from_complex(jacobi_fraction(z));
    }
    // below the axis: conj(G(conj z)) - i sqrt(2 pi) exp(-z^2/2)
    let reflected = ScaledComplex::from_complex(jacobi_fraction(z.conj()).conj());
    let gaussian = ScaledComplex::exp(neg_half_square(z)).scale(Complex64::new(0.0, -SQRT_2PI));
    reflected + gaussian
}

fn g_tilde_prime_from(z: Complex64, g: ScaledComplex) -> ScaledComplex {
    ScaledComplex::ONE - g.scale(z)
}

/// `G~'(z) = 1 - z G~(z)`.
pub fn g_tilde_prime(z: Complex64) -> ScaledComplex {
    g_tilde_prime_from(z, g_tilde(z))
}

fn checked_g(z: Complex64) -> Result<ScaledComplex, TransformError> {
    let g = g_tilde(z);
    if g.ln_abs() < EVALUATOR.pole_ln_threshold {
        return Err(TransformError::PoleProximity { re: z.re, im: z.im });
    }
    Ok(g)
}

/// `F~ = 1/G~`.
pub fn f_tilde(z: Complex64) -> Result<ScaledComplex, TransformError> {
    Ok(checked_g(z)?.recip())
}

/// `F~' = -G~'/G~^2`.
pub fn f_tilde_prime(z: Complex64) -> Result<ScaledComplex, TransformError> {
    Ok(f_tilde_with_prime(z)?.1)
}

/// `(F~(z), F~'(z))` from a single evaluation of `G~`.
pub fn f_tilde_with_prime(z: Complex64) -> Result<(ScaledComplex, ScaledComplex), TransformError> {
    let g = checked_g(z)?;
    let f = g.recip();
    let gp = g_tilde_prime_from(z, g);
    Ok((f, -(gp * f * f)))
}

/// `G~` at `x - i pi/(2|x|)`, the point of the pole-free boundary over `x`.
///
/// There `x y = -sign(x) pi/2`, so the Gaussian term is real. Evaluating it
/// with that phase exactly keeps the sign of the small imaginary part, which a
/// rounded point cannot resolve once `pi/(2x)` exceeds about 8.
pub fn g_tilde_on_xi_boundary(x: f64) -> ScaledComplex {
    assert!(x != 0.0 && x.is_finite(), "boundary abscissa must be nonzero and finite");
    let y = -FRAC_PI_2 / x.abs();
    let upper = g_tilde(Complex64::new(x, -y)).conj();
    let ln_mod = 0.5 * (y - x) * (y + x);
    upper + ScaledComplex::exp(Complex64::new(ln_mod, 0.0)) * Complex64::new(SQRT_2PI.copysign(x), 0.0)
}

/// `rho(x) = i G~(ix)`, real and positive.
pub fn rho(x: f64) -> ScaledComplex {
    g_tilde(Complex64::new(0.0, x)).scale(Complex64::new(0.0, 1.0)).real_part()
}

/// Exact on the real axis; below it, compares `|x| |y|` with `pi/2` inside a 4-ulp band.
pub fn classify_domain(z: Complex64) -> DomainTag {
    if z.im > 0.0 {
        return DomainTag::UpperHalfPlane;
    }
    if z.im == 0.0 {
        return DomainTag::RealAxis;
    }
    let p = z.re.abs() * -z.im;
    let band = 4.0 * f64::EPSILON;
    if (p - FRAC_PI_2).abs() <= band {
        DomainTag::XiBoundary
    } else if p < FRAC_PI_2 {
        DomainTag::XiInterior
    } else {
        DomainTag::OutsideXi
    }
}

/// Argument in `(-pi/2, 3pi/2]`, the natural range for the sectors `D_eps`.
fn sector_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -FRAC_PI_2 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Membership in the open sector `{ -pi/4 + eps < arg z < 5pi/4 - eps }`.
pub fn in_d_epsilon(z: Complex64, eps: f64) -> bool {
    if z.re == 0.0 && z.im == 0.0 {
        return false;
    }
    let a = sector_arg(z);
    a > -FRAC_PI_4 + eps && a < 5.0 * FRAC_PI_4 - eps
}

/// Independent evaluation of `G~(z)` by quadrature along the two rays bounding
/// `D_eta`, truncated at `radius`. Intended as a test oracle.
pub fn g_tilde_contour_oracle(z: Complex64, eta: f64, radius: f64) -> Result<Complex64, TransformError> {
    if !(eta > 0.0 && eta < FRAC_PI_4) {
        return Err(TransformError::InvalidContour(format!("eta = {eta} must lie in (0, pi/4)")));
    }
    if !in_d_epsilon(z, eta) {
        return Err(TransformError::InvalidContour(format!(
            "{z} is not strictly inside the sector of half-opening eta = {eta}"
        )));
    }
    let decay = 0.5 * radius * radius * (2.0 * eta).sin();
    if decay < 10.0 * std::f64::consts::LN_10 + 3.0 || radius < 2.0 * z.norm() {
        return Err(TransformError::InvalidContour(format!(
            "radius {radius} leaves a tail above 1e-10 for eta = {eta}"
        )));
    }
    let ray = |alpha: f64| -> Result<Complex64, TransformError> {
        let dir = Complex64::from_polar(1.0, alpha);
        let integrand = |r: f64| {
            let w = dir * r;
            let phi = (-0.5 * w * w).exp() / SQRT_2PI;
            phi / (z - w) * dir
        };
        let foot = (z * dir.conj()).re;
        let mut cuts = vec![0.0];
        if foot > 0.0 && foot < radius {
            cuts.push(foot);
        }
        cuts.push(radius);
        let mut total = Complex64::new(0.0, 0.0);
        for pair in cuts.windows(2) {
            total += quadrature::integrate(integrand, pair[0], pair[1], 1e-16, 1e-14)?.value;
        }
        Ok(total)
    };
    // the left ray runs inward, the right ray outward
    let left = ray(5.0 * FRAC_PI_4 - eta)?;
    let right = ray(-FRAC_PI_4 + eta)?;
    Ok(right - left)
}
