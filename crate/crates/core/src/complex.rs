//! Complex scalar type and small numeric helpers shared by every module.

use crate::error::{Error, Result};

pub use num_complex::Complex64 as ComplexValue;

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Largest real part accepted by `exp` before we refuse to evaluate.
pub const EXP_GUARD: f64 = 700.0;

#[inline]
pub fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

#[inline]
pub fn is_finite(z: ComplexValue) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn ensure_finite(z: ComplexValue, what: &str) -> Result<()> {
    if is_finite(z) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} = {z}")))
    }
}

/// `exp` with the overflow guard applied to the real part.
pub fn guarded_exp(z: ComplexValue) -> Result<ComplexValue> {
    ensure_finite(z, "exponent")?;
    if z.re > EXP_GUARD {
        return Err(Error::Overflow(z.re));
    }
    Ok(z.exp())
}

/// Principal branch of `log(1 + u)`, accurate for small `u`.
pub fn log1p(u: ComplexValue) -> ComplexValue {
    if u.norm() < 1e-4 {
        // Series: u - u^2/2 + u^3/3 - u^4/4 + u^5/5
        let mut term = u;
        let mut sum = ComplexValue::new(0.0, 0.0);
        for k in 1..=7 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += term * (sign / k as f64);
            term *= u;
        }
        sum
    } else {
        let w = ComplexValue::new(1.0, 0.0) + u;
        ComplexValue::new(w.norm().ln(), w.arg())
    }
}

/// `exp(u) - 1`, accurate for small `u`.
pub fn expm1(u: ComplexValue) -> ComplexValue {
    if u.norm() < 1e-4 {
        let mut term = u;
        let mut sum = u;
        for k in 2..=7 {
            term *= u / k as f64;
            sum += term;
        }
        sum
    } else {
        u.exp() - 1.0
    }
}

/// Reduce an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(TWO_PI);
    if t > std::f64::consts::PI {
        t -= TWO_PI;
    }
    t
}

/// Parse `a+bi`, `a-bi`, `bi`, `a`, or `[a, b]`.
pub fn parse_complex(text: &str) -> Result<ComplexValue> {
    let s: String = text.chars().filter(|ch| !ch.is_whitespace()).collect();
    let bad = || Error::Range(format!("cannot parse complex number '{text}'"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 2 {
            return Err(bad());
        }
        let re = parts[0].parse::<f64>().map_err(|_| bad())?;
        let im = parts[1].parse::<f64>().map_err(|_| bad())?;
        return finite(ComplexValue::new(re, im), text);
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        let re = s.parse::<f64>().map_err(|_| bad())?;
        return finite(ComplexValue::new(re, 0.0), text);
    };
    // Find the sign separating real and imaginary parts, skipping exponent signs.
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let parse_im = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    let z = match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            ComplexValue::new(re, parse_im(&body[i..])?)
        }
        None => ComplexValue::new(0.0, parse_im(body)?),
    };
    finite(z, text)
}

fn finite(z: ComplexValue, text: &str) -> Result<ComplexValue> {
    if is_finite(z) {
        Ok(z)
    } else {
        Err(Error::NonFinite(text.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse_complex("0.3+0.2i").unwrap(), c(0.3, 0.2));
        assert_eq!(parse_complex("1.0038+2.8999i").unwrap(), c(1.0038, 2.8999));
        assert_eq!(parse_complex("-1.5e-3-2i").unwrap(), c(-1.5e-3, -2.0));
        assert_eq!(parse_complex("0.2i").unwrap(), c(0.0, 0.2));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("0.25").unwrap(), c(0.25, 0.0));
        assert_eq!(parse_complex("[0.5, 0.0]").unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("1e2+1e-2i").unwrap(), c(100.0, 0.01));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("nan").is_err());
    }

    #[test]
    fn log1p_matches_direct_log() {
        for u in [c(0.3, -0.2), c(1e-6, 2e-6), c(-0.5, 0.0), c(2.0, 3.0)] {
            let direct = (c(1.0, 0.0) + u).ln();
            assert!((log1p(u) - direct).norm() < 1e-14);
        }
        let tiny = c(1e-20, -3e-20);
        assert!((log1p(tiny) - tiny).norm() < 1e-35);
    }

    #[test]
    fn expm1_matches_direct_exp() {
        for u in [c(0.3, -0.2), c(1e-6, 2e-6), c(-2.0, 1.0)] {
            assert!((expm1(u) - (u.exp() - 1.0)).norm() < 1e-14);
        }
        let tiny = c(3e-20, 1e-20);
        assert!((expm1(tiny) - tiny).norm() < 1e-35);
    }

    #[test]
    fn guard_rejects_large_exponents() {
        assert!(matches!(guarded_exp(c(701.0, 0.0)), Err(Error::Overflow(_))));
        assert!(guarded_exp(c(699.0, 1.0)).is_ok());
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }
}
