//! Complex numbers with a detached natural-log scale.
//!
//! A value is `mantissa * exp(log_scale)`. The scale is kept integral so that
//! renormalising never perturbs it; the mantissa then sits in
//! `[e^-0.5, e^0.5)`, inside the required `[0.5, 2)` band.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scale gaps beyond this make the smaller summand invisible in binary64.
pub const FLUSH_GAP: f64 = 750.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledComplex {
    mantissa: Complex64,
    log_scale: f64,
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex { mantissa: Complex64::new(0.0, 0.0), log_scale: 0.0 };
    pub const ONE: ScaledComplex = ScaledComplex { mantissa: Complex64::new(1.0, 0.0), log_scale: 0.0 };

    pub fn new(mantissa: Complex64, log_scale: f64) -> Self {
        let mut s = ScaledComplex { mantissa, log_scale };
        s.normalize();
        s
    }

    pub fn from_complex(c: Complex64) -> Self {
        Self::new(c, 0.0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), 0.0)
    }

    /// `exp(w)` without overflow for any finite `w`.
    pub fn exp(w: Complex64) -> Self {
        let k = w.re.round();
        let frac = w.re - k;
        let m = Complex64::from_polar(frac.exp(), w.im);
        ScaledComplex { mantissa: m, log_scale: k }
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    fn normalize(&mut self) {
        if self.is_zero() {
            self.log_scale = 0.0;
            return;
        }
        let a = self.mantissa.norm();
        if !a.is_finite() {
            // mantissa overflowed in an intermediate product; rescale componentwise
            let big = self.mantissa.re.abs().max(self.mantissa.im.abs());
            if big.is_finite() {
                self.mantissa /= big;
                self.log_scale += big.ln();
                self.normalize();
            }
            return;
        }
        if (0.6..1.6).contains(&a) {
            return;
        }
        let k = a.ln().round();
        if k != 0.0 {
            self.mantissa *= (-k).exp();
            self.log_scale += k;
        }
    }

    /// Nearest binary64 value; overflows to infinity or underflows to zero.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        if self.log_scale > 700.0 {
            let half = (self.log_scale / 2.0).exp();
            return self.mantissa * half * half;
        }
        if self.log_scale < -700.0 {
            let half = (self.log_scale / 2.0).exp();
            return self.mantissa * half * half;
        }
        self.mantissa * self.log_scale.exp()
    }

    pub fn re(&self) -> f64 {
        self.to_complex().re
    }

    pub fn im(&self) -> f64 {
        self.to_complex().im
    }

    /// `ln |value|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.log_scale + self.mantissa.norm().ln()
        }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.ln_abs(), self.mantissa.arg())
    }

    pub fn abs(&self) -> f64 {
        self.ln_abs().exp()
    }

    pub fn conj(&self) -> Self {
        ScaledComplex { mantissa: self.mantissa.conj(), log_scale: self.log_scale }
    }

    /// Reciprocal; the caller must rule out zero.
    pub fn recip(&self) -> Self {
        debug_assert!(!self.is_zero());
        Self::new(self.mantissa.inv(), -self.log_scale)
    }

    /// Keeps only the real part (used where the exact value is known to be real).
    pub fn real_part(&self) -> Self {
        Self::new(Complex64::new(self.mantissa.re, 0.0), self.log_scale)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.mantissa * c, self.log_scale)
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(c: Complex64) -> Self {
        Self::from_complex(c)
    }
}

impl Mul for ScaledComplex {
    type Output = ScaledComplex;
    fn mul(self, o: ScaledComplex) -> ScaledComplex {
        ScaledComplex::new(self.mantissa * o.mantissa, self.log_scale + o.log_scale)
    }
}

impl Mul<Complex64> for ScaledComplex {
    type Output = ScaledComplex;
    fn mul(self, o: Complex64) -> ScaledComplex {
        self.scale(o)
    }
}

impl Div for ScaledComplex {
    type Output = ScaledComplex;
    fn div(self, o: ScaledComplex) -> ScaledComplex {
        ScaledComplex::new(self.mantissa / o.mantissa, self.log_scale - o.log_scale)
    }
}

impl Add for ScaledComplex {
    type Output = ScaledComplex;
    fn add(self, o: ScaledComplex) -> ScaledComplex {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (big, small) = if self.log_scale >= o.log_scale { (self, o) } else { (o, self) };
        let gap = small.log_scale - big.log_scale;
        if gap < -FLUSH_GAP {
            return big;
        }
        ScaledComplex::new(big.mantissa + small.mantissa * gap.exp(), big.log_scale)
    }
}

impl Neg for ScaledComplex {
    type Output = ScaledComplex;
    fn neg(self) -> ScaledComplex {
        ScaledComplex { mantissa: -self.mantissa, log_scale: self.log_scale }
    }
}

impl Sub for ScaledComplex {
    type Output = ScaledComplex;
    fn sub(self, o: ScaledComplex) -> ScaledComplex {
        self + (-o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mantissa_stays_in_band() {
        for v in [1e-300, 3.0, 0.1, 1e250, 7.5e-12] {
            let s = ScaledComplex::from_real(v);
            let a = s.mantissa().norm();
            assert!((0.5..2.0).contains(&a), "{v}: {a}");
            assert!((s.re() - v).abs() <= 1e-15 * v);
        }
    }

    #[test]
    fn exp_beyond_binary64_range() {
        let e = ScaledComplex::exp(Complex64::new(1000.0, 0.3));
        assert!((e.ln_abs() - 1000.0).abs() < 1e-12);
        assert!((e.mantissa().arg() - 0.3).abs() < 1e-15);
        let p = e * ScaledComplex::exp(Complex64::new(-1000.0, -0.3));
        assert!((p.to_complex() - Complex64::new(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn addition_flushes_negligible_summand() {
        let big = ScaledComplex::exp(Complex64::new(900.0, 0.0));
        let one = ScaledComplex::ONE;
        assert_eq!(big + one, big);
        let sum = ScaledComplex::from_real(2.0) + ScaledComplex::from_real(3.0);
        assert!((sum.re() - 5.0).abs() < 1e-15);
    }
}
