//! Parsing and formatting of exact rationals as `"num/den"` strings.

use rug::{Integer, Rational};

use crate::{Error, Result};

/// Parses `"7"`, `"-3"` or `"203/100"`. Decimal points are refused: values
/// that feed exact sign computations must not pass through binary floating
/// point.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.contains(['.', 'e', 'E']) {
        return Err(Error::Parse(format!(
            "{s:?}: decimal notation is not exact, write it as num/den"
        )));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: Integer = num
        .parse()
        .map_err(|_| Error::Parse(format!("{s:?}: bad numerator")))?;
    let den: Integer = den
        .parse()
        .map_err(|_| Error::Parse(format!("{s:?}: bad denominator")))?;
    if den == 0 {
        return Err(Error::Parse(format!("{s:?}: zero denominator")));
    }
    Ok(Rational::from((num, den)))
}

/// Canonical `"num/den"` form (denominator always present).
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// `"num"` for integers, `"num/den"` otherwise.
pub fn display_rational(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format_rational(q)
    }
}

/// Splits a positive rational into machine-word numerator and denominator.
pub fn to_u64_pair(q: &Rational) -> Option<(u64, u64)> {
    if *q <= 0 {
        return None;
    }
    Some((q.numer().to_u64()?, q.denom().to_u64()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_rational("5/2").unwrap(), Rational::from((5, 2)));
        assert_eq!(parse_rational(" 4 ").unwrap(), 4);
        assert_eq!(parse_rational("10/4").unwrap(), Rational::from((5, 2)));
        assert!(parse_rational("2.03").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn formats() {
        let q = Rational::from((203, 100));
        assert_eq!(format_rational(&q), "203/100");
        assert_eq!(format_rational(&Rational::from(3)), "3/1");
        assert_eq!(display_rational(&Rational::from(3)), "3");
        assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
    }
}
