use freenormal_core::scaled::ScaledComplex;
use num_complex::Complex64;
use std::f64::consts::LN_10;

/// Fixed CSV cell: 17 significant digits.
pub fn csv(v: f64) -> String {
    format!("{v:.16e}")
}

/// Up to 15 significant digits, trailing zeros dropped, plain decimal when
/// the exponent is moderate.
pub fn short(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.14e}", v.abs());
    let (mant, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if v < 0.0 { "-" } else { "" };
    let body = if (-5..15).contains(&exp) {
        if exp >= 0 {
            let e = exp as usize;
            if digits.len() <= e + 1 {
                format!("{digits}{}", "0".repeat(e + 1 - digits.len()))
            } else {
                format!("{}.{}", &digits[..=e], &digits[e + 1..])
            }
        } else {
            format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
        }
    } else if digits.len() == 1 {
        format!("{digits}e{exp}")
    } else {
        format!("{}.{}e{exp}", &digits[..1], &digits[1..])
    };
    format!("{sign}{body}")
}

/// `a + bi` / `a - bi`.
pub fn complex(z: Complex64) -> String {
    let im = if z.im < 0.0 { "-" } else { "+" };
    format!("{} {im} {}i", short(z.re), short(z.im.abs()))
}

/// Plain complex when representable, otherwise `(a + bi)e<k>` with a decimal exponent.
pub fn scaled(v: &ScaledComplex) -> String {
    if v.is_zero() || v.log_scale().abs() <= 700.0 {
        return complex(v.to_complex());
    }
    let ln_abs = v.ln_abs();
    let k = (ln_abs / LN_10).floor();
    let m = v.mantissa() * (v.log_scale() - k * LN_10).exp();
    format!("({})e{}", complex(m), k as i64)
}

/// Parses `a+bi`, `a-bi`, `a`, `bi` (whitespace ignored; `i` or `j` suffix).
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number {text:?}; expected a+bi");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&p| (bytes[p] == b'+' || bytes[p] == b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
    let coef = |t: &str| -> Result<f64, String> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(p) => Ok(Complex64::new(body[..p].parse::<f64>().map_err(|_| bad())?, coef(&body[p..])?)),
        None => Ok(Complex64::new(0.0, coef(body)?)),
    }
}

/// Comma-separated reals.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("cannot parse {t:?} in list {text:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_forms() {
        assert_eq!(short(0.797_884_560_802_865_4), "0.797884560802865");
        assert_eq!(short(-0.760_173), "-0.760173");
        assert_eq!(short(1200.0), "1200");
        assert_eq!(short(1.5e-7), "1.5e-7");
        assert_eq!(short(2.5e20), "2.5e20");
        assert_eq!(short(3.0), "3");
        assert_eq!(short(0.001), "0.001");
    }

    #[test]
    fn complex_forms() {
        assert_eq!(complex(Complex64::new(0.0, 0.797_884_560_802_865_4)), "0 + 0.797884560802865i");
        assert_eq!(complex(Complex64::new(1.0, -2.0)), "1 - 2i");
        assert_eq!(complex(Complex64::new(-0.0, 0.0)), "0 + 0i");
    }

    #[test]
    fn huge_values_get_decimal_exponent() {
        let v = ScaledComplex::exp(Complex64::new(1000.0 * LN_10, 0.0)) * Complex64::new(2.0, -3.0);
        assert_eq!(scaled(&v), "(2 - 3i)e1000");
    }

    #[test]
    fn parses_complex() {
        assert_eq!(parse_complex("0+0i").unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(parse_complex("0-2i").unwrap(), Complex64::new(0.0, -2.0));
        assert_eq!(parse_complex("-1.5e-3+2E+1i").unwrap(), Complex64::new(-1.5e-3, 20.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1 - i").unwrap(), Complex64::new(1.0, -1.0));
        assert_eq!(parse_complex("2.5i").unwrap(), Complex64::new(0.0, 2.5));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }
}
