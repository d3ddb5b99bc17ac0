//! Exact rational arithmetic.
//!
//! Every real-valued quantity in the model (weights, thresholds,
//! potentials, survival fractions, failure probabilities) is a
//! [`Rational`]. The firing rule compares potentials against thresholds
//! with `>=` at exact boundaries, so floating point is banned outright;
//! `num_rational::Ratio<i64>` keeps values in lowest terms with a
//! positive denominator, which is exactly the invariant we need.

use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

pub type Rational = Ratio<i64>;

/// Shorthand constructor used pervasively in tests and builders.
///
/// Panics if `den == 0`; use [`parse_rational`] for untrusted input.
pub fn rat(num: i64, den: i64) -> Rational {
    Ratio::new(num, den)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal {0:?}: expected `p` or `p/q` with integer p and positive integer q")]
    Malformed(String),
    #[error("invalid rational literal {0:?}: denominator must be positive")]
    NonPositiveDenominator(String),
}

/// Parses the `p` / `p/q` syntax used by every file format and CLI flag.
///
/// `p` is a (possibly negative) integer, `q` a positive integer. Decimal
/// floats are rejected so that exact values cannot be silently rounded
/// on the way in.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let malformed = || ParseRationalError::Malformed(s.to_string());
    match s.split_once('/') {
        None => {
            let num: i64 = s.parse().map_err(|_| malformed())?;
            Ok(Ratio::from_integer(num))
        }
        Some((num, den)) => {
            let num: i64 = num.trim().parse().map_err(|_| malformed())?;
            let den: i64 = den.trim().parse().map_err(|_| malformed())?;
            if den <= 0 {
                return Err(ParseRationalError::NonPositiveDenominator(s.to_string()));
            }
            Ok(Ratio::new(num, den))
        }
    }
}

/// Canonical `p` / `p/q` rendering, inverse of [`parse_rational`].
pub fn format_rational(r: &Rational) -> String {
    if r.denom() == &1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Display adapter so rationals can be embedded in error messages.
pub struct DisplayRational<'a>(pub &'a Rational);

impl fmt::Display for DisplayRational<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert_eq!(parse_rational(" 15/16 ").unwrap(), rat(15, 16));
        assert_eq!(parse_rational("6/8").unwrap(), rat(3, 4));
    }

    #[test]
    fn rejects_floats_and_garbage() {
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("1/2/3").is_err());
    }

    #[test]
    fn formatting_round_trips() {
        for r in [rat(1, 2), rat(-3, 7), rat(4, 1), rat(0, 5)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(format_rational(&rat(4, 2)), "2");
    }
}
