//! Sets of parameter intervals with half-integer endpoints.
//!
//! For a fixed maximum constant `C`, parameter values partition into
//! `8C + 2` canonical pieces: the points `0, 1/2, 1, ..., 2C`, the open
//! intervals between consecutive points, and the unbounded tail past
//! `2C`. Interval sets are kept canonical — sorted, disjoint, and
//! coalesced — so equality is semantic.

use crate::rational::{format_rational, int, is_half_integer, parse_rational, ratio, Rational};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntervalError {
    #[error("endpoint {0} is not representable at maximum constant {1}")]
    NotRepresentable(String, u64),
    #[error("malformed interval literal `{0}`")]
    Parse(String),
}

/// One maximal interval; `hi = None` means unbounded above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub lo: Rational,
    pub lo_strict: bool,
    pub hi: Option<Rational>,
    pub hi_strict: bool,
}

impl Segment {
    pub fn point(v: Rational) -> Segment {
        Segment {
            lo: v,
            lo_strict: false,
            hi: Some(v),
            hi_strict: false,
        }
    }

    fn is_empty(&self) -> bool {
        match self.hi {
            None => false,
            Some(hi) => {
                if self.lo > hi {
                    true
                } else {
                    self.lo == hi && (self.lo_strict || self.hi_strict)
                }
            }
        }
    }

    pub fn contains(&self, v: Rational) -> bool {
        let lo_ok = if self.lo_strict {
            v > self.lo
        } else {
            v >= self.lo
        };
        let hi_ok = match self.hi {
            None => true,
            Some(hi) => {
                if self.hi_strict {
                    v < hi
                } else {
                    v <= hi
                }
            }
        };
        lo_ok && hi_ok
    }

    /// Whether `self` and `other` overlap or touch without a gap, so
    /// that their union is a single interval.
    fn merges_with(&self, other: &Segment) -> bool {
        // Assumes self.lo <= other.lo lexicographically.
        match self.hi {
            None => true,
            Some(hi) => {
                if hi > other.lo {
                    true
                } else if hi < other.lo {
                    false
                } else {
                    // Touching endpoints: a gap remains only when both
                    // sides exclude the point.
                    !(self.hi_strict && other.lo_strict)
                }
            }
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.hi == Some(self.lo) && !self.lo_strict && !self.hi_strict {
            return write!(f, "{{{}}}", format_rational(&self.lo));
        }
        let open = if self.lo_strict { "(" } else { "[" };
        match self.hi {
            None => write!(f, "{}{}, +inf)", open, format_rational(&self.lo)),
            Some(hi) => write!(
                f,
                "{}{}, {}{}",
                open,
                format_rational(&self.lo),
                format_rational(&hi),
                if self.hi_strict { ")" } else { "]" }
            ),
        }
    }
}

/// A canonical, possibly empty union of disjoint intervals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalSet {
    segments: Vec<Segment>,
}

impl IntervalSet {
    pub fn empty() -> IntervalSet {
        IntervalSet::default()
    }

    pub fn from_segments(segments: impl IntoIterator<Item = Segment>) -> IntervalSet {
        let mut segs: Vec<Segment> = segments.into_iter().filter(|s| !s.is_empty()).collect();
        segs.sort_by(|a, b| {
            (a.lo, a.lo_strict, a.hi.is_none())
                .partial_cmp(&(b.lo, b.lo_strict, b.hi.is_none()))
                .unwrap()
        });
        let mut out: Vec<Segment> = Vec::new();
        for s in segs {
            match out.last_mut() {
                Some(last) if last.merges_with(&s) => {
                    let hi = match (last.hi, s.hi) {
                        (None, _) | (_, None) => None,
                        (Some(a), Some(b)) => {
                            if a > b || (a == b && !last.hi_strict) {
                                last.hi
                            } else {
                                s.hi
                            }
                        }
                    };
                    let hi_strict = match (last.hi, s.hi) {
                        (None, _) | (_, None) => false,
                        (Some(a), Some(b)) => {
                            if a > b {
                                last.hi_strict
                            } else if b > a {
                                s.hi_strict
                            } else {
                                last.hi_strict && s.hi_strict
                            }
                        }
                    };
                    last.hi = hi;
                    last.hi_strict = hi_strict;
                }
                _ => out.push(s),
            }
        }
        IntervalSet { segments: out }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn contains(&self, v: Rational) -> bool {
        self.segments.iter().any(|s| s.contains(v))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_segments(self.segments.iter().chain(other.segments.iter()).copied())
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for a in &self.segments {
            for b in &other.segments {
                let (lo, lo_strict) = if a.lo > b.lo {
                    (a.lo, a.lo_strict)
                } else if b.lo > a.lo {
                    (b.lo, b.lo_strict)
                } else {
                    (a.lo, a.lo_strict || b.lo_strict)
                };
                let (hi, hi_strict) = match (a.hi, b.hi) {
                    (None, None) => (None, false),
                    (Some(h), None) => (Some(h), a.hi_strict),
                    (None, Some(h)) => (Some(h), b.hi_strict),
                    (Some(ha), Some(hb)) => {
                        if ha < hb {
                            (Some(ha), a.hi_strict)
                        } else if hb < ha {
                            (Some(hb), b.hi_strict)
                        } else {
                            (Some(ha), a.hi_strict || b.hi_strict)
                        }
                    }
                };
                out.push(Segment {
                    lo,
                    lo_strict,
                    hi,
                    hi_strict,
                });
            }
        }
        IntervalSet::from_segments(out)
    }

    /// Parses a `;`-separated list of interval literals such as
    /// `(3/2, 4]`, `[0, 1)`, `{2}`, `(2, +inf)`; an empty string is the
    /// empty set.
    pub fn parse(s: &str) -> Result<IntervalSet, IntervalError> {
        let mut segs = Vec::new();
        for raw in s.split(';') {
            let tok = raw.trim();
            if tok.is_empty() {
                continue;
            }
            segs.push(parse_segment(tok)?);
        }
        Ok(IntervalSet::from_segments(segs))
    }
}

fn parse_segment(tok: &str) -> Result<Segment, IntervalError> {
    let bad = || IntervalError::Parse(tok.to_string());
    if let Some(inner) = tok.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
        let v = parse_rational(inner).ok_or_else(bad)?;
        return Ok(Segment::point(v));
    }
    let lo_strict = match tok.chars().next() {
        Some('(') => true,
        Some('[') => false,
        _ => return Err(bad()),
    };
    let hi_strict = match tok.chars().last() {
        Some(')') => true,
        Some(']') => false,
        _ => return Err(bad()),
    };
    let inner = &tok[1..tok.len() - 1];
    let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
    let lo = parse_rational(lo).ok_or_else(bad)?;
    let hi = hi.trim();
    let hi = if hi == "+inf" || hi == "inf" {
        None
    } else {
        Some(parse_rational(hi).ok_or_else(bad)?)
    };
    if hi.is_none() && !hi_strict {
        return Err(bad());
    }
    Ok(Segment {
        lo,
        lo_strict,
        hi,
        hi_strict,
    })
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.segments.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.segments.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(" \u{222a} "))
    }
}

/// The canonical interval with the given index for maximum constant
/// `c`: even indices `2n` are the points `n/2`, odd indices `2n + 1`
/// the open intervals `(n/2, (n+1)/2)`, and the last index `8c + 1` is
/// the tail `(2c, +inf)`.
pub fn canonical_interval(index: usize, c: u64) -> Segment {
    let count = canonical_interval_count(c);
    assert!(index < count, "interval index out of range");
    if index == count - 1 {
        return Segment {
            lo: int(2 * c as i64),
            lo_strict: true,
            hi: None,
            hi_strict: true,
        };
    }
    let n = (index / 2) as i64;
    if index.is_multiple_of(2) {
        Segment::point(ratio(n, 2))
    } else {
        Segment {
            lo: ratio(n, 2),
            lo_strict: true,
            hi: Some(ratio(n + 1, 2)),
            hi_strict: true,
        }
    }
}

/// `8c + 2` pieces.
pub fn canonical_interval_count(c: u64) -> usize {
    (8 * c + 2) as usize
}

/// Decomposes the set into canonical interval indices for maximum
/// constant `c`; errors when an endpoint does not lie on the half grid
/// within `[0, 2c]`.
pub fn to_canonical_indices(set: &IntervalSet, c: u64) -> Result<Vec<usize>, IntervalError> {
    let not_rep = |v: &Rational| IntervalError::NotRepresentable(format_rational(v), c);
    let bound = int(2 * c as i64);
    for s in set.segments() {
        if !is_half_integer(&s.lo) || s.lo > bound {
            return Err(not_rep(&s.lo));
        }
        if let Some(hi) = s.hi {
            if !is_half_integer(&hi) || hi > bound {
                return Err(not_rep(&hi));
            }
        }
    }
    let count = canonical_interval_count(c);
    let mut out = Vec::new();
    for i in 0..count {
        let piece = canonical_interval(i, c);
        // Half-grid endpoints mean each canonical piece is entirely in
        // or entirely out; membership of its midpoint decides.
        let probe = if piece.hi == Some(piece.lo) {
            piece.lo
        } else {
            match piece.hi {
                Some(hi) => (piece.lo + hi) / int(2),
                None => piece.lo + int(1),
            }
        };
        if set.contains(probe) {
            out.push(i);
        }
    }
    Ok(out)
}

/// Rebuilds a canonical set from interval indices.
pub fn from_canonical_indices(indices: impl IntoIterator<Item = usize>, c: u64) -> IntervalSet {
    IntervalSet::from_segments(indices.into_iter().map(|i| canonical_interval(i, c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(s: &str) -> Segment {
        parse_segment(s).unwrap()
    }

    #[test]
    fn coalescing_touching_pieces() {
        let set = IntervalSet::from_segments([seg("(0, 1/2)"), seg("{1/2}"), seg("(1/2, 1)")]);
        assert_eq!(set.to_string(), "(0, 1)");
        let gap = IntervalSet::from_segments([seg("(0, 1/2)"), seg("(1/2, 1)")]);
        assert_eq!(gap.segments().len(), 2);
    }

    #[test]
    fn union_and_intersection() {
        let a = IntervalSet::parse("(2, 4]").unwrap();
        let b = IntervalSet::parse("{1}").unwrap();
        assert_eq!(a.union(&b).to_string(), "{1} \u{222a} (2, 4]");
        let c = IntervalSet::parse("(0, 4]").unwrap();
        let d = IntervalSet::parse("(2, +inf)").unwrap();
        assert_eq!(c.intersect(&d).to_string(), "(2, 4]");
        assert!(a.intersect(&b).is_empty());
    }

    #[test]
    fn canonical_enumeration_matches_layout() {
        assert_eq!(canonical_interval_count(1), 10);
        assert_eq!(canonical_interval(0, 1).to_string(), "{0}");
        assert_eq!(canonical_interval(1, 1).to_string(), "(0, 1/2)");
        assert_eq!(canonical_interval(8, 1).to_string(), "{2}");
        assert_eq!(canonical_interval(9, 1).to_string(), "(2, +inf)");
    }

    #[test]
    fn indices_round_trip() {
        let set = IntervalSet::parse("(0, 1); [3/2, 2]").unwrap();
        let idx = to_canonical_indices(&set, 1).unwrap();
        assert_eq!(idx, vec![1, 2, 3, 6, 7, 8]);
        assert_eq!(from_canonical_indices(idx, 1), set);
    }

    #[test]
    fn unrepresentable_endpoints_rejected() {
        let set = IntervalSet::parse("(0, 1/3)").unwrap();
        assert!(to_canonical_indices(&set, 1).is_err());
        let set = IntervalSet::parse("(0, 5/2)").unwrap();
        assert!(to_canonical_indices(&set, 1).is_err());
        // Fine at a larger constant.
        assert!(to_canonical_indices(&set, 2).is_ok());
    }

    #[test]
    fn parse_rejects_weak_infinity() {
        assert!(IntervalSet::parse("[0, +inf]").is_err());
        assert!(IntervalSet::parse("(1, 2").is_err());
    }

    #[test]
    fn display_of_empty_set() {
        assert_eq!(IntervalSet::empty().to_string(), "{}");
        assert_eq!(IntervalSet::parse("").unwrap(), IntervalSet::empty());
    }
}
