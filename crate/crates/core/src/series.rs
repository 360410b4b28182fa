//! Exact moment/cumulant tables and the closed-form asymptotic evaluators.
//!
//! Laurent series in `z^-1` with only odd or only even powers are handled as
//! power series in `v = z^-2`, truncated at a fixed order.

use crate::scaled::ScaledComplex;
use crate::transforms::{SQRT_2PI, SQRT_PI_2};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("{0}")]
    Domain(String),
}

/// Exact coefficients; entry `n` multiplies `z^(offset - 2n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSeries {
    pub coefficients: Vec<BigRational>,
    pub offset: i32,
}

impl RationalSeries {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// `"p/q"` strings, or `"p"` for integers.
    pub fn to_strings(&self) -> Vec<String> {
        self.coefficients.iter().map(|c| c.to_string()).collect()
    }
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Truncated power series arithmetic; index = power of `v`.
mod fps {
    use super::*;

    pub fn mul(a: &[BigRational], b: &[BigRational], order: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); order + 1];
        for (i, ai) in a.iter().enumerate().take(order + 1) {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate().take(order + 1 - i) {
                out[i + j] += ai * bj;
            }
        }
        out
    }

    pub fn recip(a: &[BigRational], order: usize) -> Vec<BigRational> {
        let a0 = a[0].clone();
        let mut out = vec![BigRational::zero(); order + 1];
        out[0] = a0.recip();
        for n in 1..=order {
            let mut s = BigRational::zero();
            for k in 1..=n.min(a.len() - 1) {
                s += &a[k] * &out[n - k];
            }
            out[n] = -s / &a0;
        }
        out
    }

    /// `exp(a)` for a series without constant term, via `E' = a' E`.
    pub fn exp(a: &[BigRational], order: usize) -> Vec<BigRational> {
        debug_assert!(a.first().is_none_or(|c| c.is_zero()));
        let mut out = vec![BigRational::zero(); order + 1];
        out[0] = BigRational::one();
        for n in 1..=order {
            let mut s = BigRational::zero();
            for k in 1..=n.min(a.len() - 1) {
                s += int(k as i64) * &a[k] * &out[n - k];
            }
            out[n] = s / int(n as i64);
        }
        out
    }

    pub fn pad(mut a: Vec<BigRational>, order: usize) -> Vec<BigRational> {
        a.resize(order + 1, BigRational::zero());
        a.truncate(order + 1);
        a
    }
}

/// `m_0, m_2, ..., m_{2(N-1)}`, the even moments `(2n-1)!!`.
pub fn moments(n: usize) -> RationalSeries {
    assert!(n >= 1, "need at least one moment");
    let mut c = Vec::with_capacity(n);
    let mut m = int(1);
    for k in 0..n {
        if k > 0 {
            m *= int(2 * k as i64 - 1);
        }
        c.push(m.clone());
    }
    RationalSeries { coefficients: c, offset: -1 }
}

fn moment_power_series(order: usize) -> Vec<BigRational> {
    moments(order + 1).coefficients
}

/// `b_2, ..., b_{2N}` with `1/G(z) = z - sum b_{2n} z^{1-2n}`.
pub fn boolean_cumulants(n: usize) -> RationalSeries {
    assert!(n >= 1);
    let inv = fps::recip(&moment_power_series(n), n);
    let c = inv[1..=n].iter().map(|c| -c).collect();
    RationalSeries { coefficients: c, offset: -1 }
}

/// `kappa_2, ..., kappa_{2N}` with `F^{-1}(w) = w + sum kappa_{2n} w^{1-2n}`,
/// by repeated substitution into `K = w + sum b_{2n} K^{1-2n}`.
pub fn free_cumulants(n: usize) -> RationalSeries {
    assert!(n >= 1);
    let b = boolean_cumulants(n).coefficients;
    // K(w) = w k(v); each pass fixes one more coefficient of k
    let mut k = fps::pad(vec![int(1)], n);
    for _ in 0..n {
        let kinv = fps::recip(&k, n);
        let kinv2 = fps::mul(&kinv, &kinv, n);
        let mut power = kinv.clone();
        let mut next = fps::pad(vec![int(1)], n);
        for (j, bj) in b.iter().enumerate() {
            let shift = j + 1;
            if j > 0 {
                power = fps::mul(&power, &kinv2, n);
            }
            for (i, p) in power.iter().enumerate() {
                if i + shift > n {
                    break;
                }
                next[i + shift] += bj * p;
            }
        }
        k = next;
    }
    RationalSeries { coefficients: k[1..=n].to_vec(), offset: -1 }
}

/// `a_2, ..., a_{2N}`: `1 + sum a_{2n} x^{-2n} = K'(x) exp(-(K(x)^2 - x^2 - 2)/2)`
/// where `K` is the inverse of the reciprocal Cauchy transform.
pub fn h_infinity_coefficients(n: usize) -> RationalSeries {
    assert!(n >= 1);
    let kappa = free_cumulants(n + 1).coefficients;
    // T(v) = sum_{j>=2} kappa_{2j} v^{j-1}
    let mut t = vec![BigRational::zero(); n + 1];
    t[1..=n].clone_from_slice(&kappa[1..=n]);
    let mut one_plus_t = t.clone();
    one_plus_t[0] += int(1);
    let sq = fps::mul(&one_plus_t, &one_plus_t, n);
    // exponent = -T - (v/2)(1+T)^2
    let mut exponent = t.iter().map(|c| -c).collect::<Vec<_>>();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    for i in 0..n {
        exponent[i + 1] -= &half * &sq[i];
    }
    let e = fps::exp(&exponent, n);
    // K'(x) = 1 - sum (2j-1) kappa_{2j} v^j
    let mut dk = vec![BigRational::zero(); n + 1];
    dk[0] = int(1);
    for j in 1..=n {
        dk[j] = -int(2 * j as i64 - 1) * &kappa[j - 1];
    }
    let a = fps::mul(&dk, &e, n);
    RationalSeries { coefficients: a[1..=n].to_vec(), offset: -2 }
}

/// `c_2, ..., c_{2N}`: `1 + sum c_{2n} x^{-2n} = (1 - sum b_{2n} v^n)^2 / (1 + sum (2n-1) b_{2n} v^n)`.
pub fn f_infinity_coefficients(n: usize) -> RationalSeries {
    assert!(n >= 1);
    let b = boolean_cumulants(n).coefficients;
    let mut num = vec![int(1)];
    let mut den = vec![int(1)];
    for (j, bj) in b.iter().enumerate() {
        num.push(-bj.clone());
        den.push(int(2 * j as i64 + 1) * bj);
    }
    let sq = fps::mul(&num, &num, n);
    let c = fps::mul(&sq, &fps::recip(&den, n), n);
    RationalSeries { coefficients: c[1..=n].to_vec(), offset: -2 }
}

const CACHED_ORDER: usize = 12;

struct FloatTables {
    kappa: Vec<f64>,
    a: Vec<f64>,
}

fn tables() -> &'static FloatTables {
    static TABLES: OnceLock<FloatTables> = OnceLock::new();
    TABLES.get_or_init(|| FloatTables {
        kappa: free_cumulants(CACHED_ORDER).to_f64(),
        a: h_infinity_coefficients(CACHED_ORDER).to_f64(),
    })
}

fn coefficient_list(cached: &[f64], n: usize, exact: impl Fn(usize) -> RationalSeries) -> Vec<f64> {
    if n <= cached.len() {
        cached[..n].to_vec()
    } else {
        exact(n).to_f64()
    }
}

/// `x + sum_{n=1}^{N} kappa_{2n} x^{1-2n}`.
pub fn eval_g_asym_infinity(x: f64, order: usize) -> f64 {
    let kappa = coefficient_list(&tables().kappa, order, free_cumulants);
    let inv2 = 1.0 / (x * x);
    let mut p = 1.0 / x;
    let mut s = x;
    for k in kappa {
        s += k * p;
        p *= inv2;
    }
    s
}

/// `(1/e) sqrt(pi/2) x^2 exp(-x^2/2) (1 + sum_{n=1}^{N} a_{2n} x^{-2n})`,
/// kept in scaled form since it underflows beyond `x ~ 37`.
pub fn eval_h_asym_infinity(x: f64, order: usize) -> ScaledComplex {
    let a = coefficient_list(&tables().a, order, h_infinity_coefficients);
    let inv2 = 1.0 / (x * x);
    let mut p = inv2;
    let mut s = 1.0;
    for c in a {
        s += c * p;
        p *= inv2;
    }
    let log_lead = -1.0 + SQRT_PI_2.ln() + 2.0 * x.ln() - 0.5 * x * x;
    ScaledComplex::exp(Complex64::new(log_lead, 0.0)) * ScaledComplex::from_real(s)
}

/// Leading factor `(1/e) sqrt(pi/2) x^2 exp(-x^2/2)` of the large-x law, in log form.
pub fn ln_h_infinity_lead(x: f64) -> f64 {
    -1.0 + SQRT_PI_2.ln() + 2.0 * x.ln() - 0.5 * x * x
}

/// `(L, S)` with `L = ln(1/(sqrt(2 pi) x))`, `S = sqrt(L^2 + pi^2/4)`, from `ln x`.
fn zero_regime_ls(ln_x: f64) -> (f64, f64) {
    let l = -SQRT_2PI.ln() - ln_x;
    (l, l.hypot(PI / 2.0))
}

fn zero_regime_check(x: f64) -> Result<(), SeriesError> {
    if x > 0.0 && x < 1.0 / SQRT_2PI {
        Ok(())
    } else {
        Err(SeriesError::Domain(format!("x = {x} is outside (0, 1/sqrt(2 pi))")))
    }
}

/// `g ~ sqrt(-L + S)`, written as `sqrt((pi^2/4)/(L + S))` to avoid cancellation.
pub fn eval_g_asym_zero(x: f64) -> Result<f64, SeriesError> {
    zero_regime_check(x)?;
    Ok(g_asym_zero_ln(x.ln()))
}

/// `h ~ sqrt(L + S)`.
pub fn eval_h_asym_zero(x: f64) -> Result<f64, SeriesError> {
    zero_regime_check(x)?;
    Ok(h_asym_zero_ln(x.ln()))
}

/// Zero-regime `g` from `ln x`; usable where `x` itself underflows.
pub fn g_asym_zero_ln(ln_x: f64) -> f64 {
    let (l, s) = zero_regime_ls(ln_x);
    (PI * PI / 4.0 / (l + s)).sqrt()
}

/// Zero-regime `h` from `ln x`.
pub fn h_asym_zero_ln(ln_x: f64) -> f64 {
    let (l, s) = zero_regime_ls(ln_x);
    (l + s).sqrt()
}

/// `f ~ -pi/(2x)`.
pub fn eval_f_asym_zero(x: f64) -> Result<f64, SeriesError> {
    if x > 0.0 {
        Ok(-PI / (2.0 * x))
    } else {
        Err(SeriesError::Domain(format!("x = {x} must be positive")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AsymptoticRegime {
    NearZero,
    Bulk,
    NearInfinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub x_lo: f64,
    pub x_hi: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds { x_lo: 0.05, x_hi: 6.0 }
    }
}

impl RegimeThresholds {
    pub fn new(x_lo: f64, x_hi: f64) -> Result<Self, SeriesError> {
        if x_lo > 0.0 && x_lo < x_hi {
            Ok(RegimeThresholds { x_lo, x_hi })
        } else {
            Err(SeriesError::Domain(format!("thresholds must satisfy 0 < {x_lo} < {x_hi}")))
        }
    }

    pub fn classify(&self, x: f64) -> AsymptoticRegime {
        if x <= self.x_lo {
            AsymptoticRegime::NearZero
        } else if x >= self.x_hi {
            AsymptoticRegime::NearInfinity
        } else {
            AsymptoticRegime::Bulk
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(d))
    }

    #[test]
    fn series_exp_of_v_is_exponential_series() {
        let e = fps::exp(&[int(0), int(1)], 4);
        assert_eq!(e, vec![int(1), int(1), q(1, 2), q(1, 6), q(1, 24)]);
    }

    #[test]
    fn reciprocal_of_geometric() {
        let r = fps::recip(&[int(1), int(-1)], 3);
        assert_eq!(r, vec![int(1), int(1), int(1), int(1)]);
    }
}
