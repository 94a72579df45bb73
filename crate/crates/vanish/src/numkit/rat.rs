//! Exact rational parsing and formatting.
//!
//! Document formats write rationals either as `"p/q"` strings or as finite
//! decimals; both parse exactly. Output always uses the `p/q` form so files
//! round-trip bit-exactly.

use std::str::FromStr;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Parse `"p/q"`, an integer, or a finite decimal (optionally with exponent,
/// e.g. `1.5e-3`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = Integer::from_str(num.trim())
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d = Integer::from_str(den.trim())
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d == 0 {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::from((n, d)));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(Error::Parse(format!("no digits in {s:?}")));
    }
    let n = Integer::from_str(&digits).map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
    let shift = exp10 - frac_part.len() as i64;
    let mut q = Rational::from(n);
    let ten = Integer::from(10);
    if shift >= 0 {
        q *= Rational::from(ten.pow(shift as u32));
    } else {
        q /= Rational::from(ten.pow((-shift) as u32));
    }
    Ok(q)
}

/// Canonical output form: integer when the denominator is 1, else `p/q`.
pub fn format_rational(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_decimal() {
        assert_eq!(parse_rational("1/3").unwrap(), Rational::from((1, 3)));
        assert_eq!(parse_rational("-7/2").unwrap(), Rational::from((-7, 2)));
        assert_eq!(parse_rational("0.4").unwrap(), Rational::from((2, 5)));
        assert_eq!(parse_rational("-2.5e-1").unwrap(), Rational::from((-1, 4)));
        assert_eq!(parse_rational("12").unwrap(), Rational::from(12));
        assert_eq!(parse_rational("1e3").unwrap(), Rational::from(1000));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn roundtrips() {
        for s in ["1/3", "-7/2", "12", "0"] {
            let q = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
    }
}
