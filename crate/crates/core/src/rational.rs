//! Exact rational arithmetic for guard constants and parameter values.
//!
//! Constants stay rational throughout the pipeline; integrality is only
//! asserted at the analysis boundary (zone and region machinery).

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed};

/// Exact rational number, always stored in lowest terms with a positive
/// denominator.
pub type Rational = Rational64;

/// Builds a rational from a numerator/denominator pair.
///
/// Panics if `den` is zero; normalization to lowest terms and a positive
/// denominator is handled by the underlying representation.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// Builds an integral rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

/// True iff `r` has denominator 1.
pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Least common multiple of the denominators of `values`; 1 for an empty
/// iterator. This is the scaling factor that makes every value integral.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i64 {
    values.into_iter().fold(1i64, |acc, v| acc.lcm(v.denom()))
}

/// Renders `r` as `n` or `n/d`.
pub fn format_rational(r: &Rational) -> String {
    if is_integer(r) {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `n`, `-n`, or `n/d` into a rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        Some(Rational::new(n, d))
    } else {
        let n: i64 = s.parse().ok()?;
        Some(Rational::from_integer(n))
    }
}

/// True iff `r` is a non-negative multiple of 1/2.
pub fn is_half_integer(r: &Rational) -> bool {
    !r.is_negative() && (*r * int(2)).denom().is_one()
}
