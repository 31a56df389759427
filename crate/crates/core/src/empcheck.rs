//! Parametric emptiness for two-clock, one-parameter automata by finite
//! substitution of representative parameter values.
//!
//! A single large value covers every parameter above `2C`; the
//! half-integers up to `2C` are checked one by one; and an offset
//! `alpha` places one representative inside each open half-integer
//! interval. The midpoint loop only runs when every earlier check
//! failed, in both the exhaustive and the fail-fast variant.

use crate::emptiness::{buchi_nonempty, EmptinessError, Witness};
use crate::rational::{int, ratio, Rational};
use crate::ta::ParametricTa;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmpCheckError {
    #[error(transparent)]
    Emptiness(#[from] EmptinessError),
    #[error(transparent)]
    Ta(#[from] crate::ta::TaError),
}

/// The representative parameter values for a given maximum constant and
/// location count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representatives {
    pub xi: Rational,
    pub alpha: Rational,
    pub max_constant: u64,
    /// `0, 1/2, 1, ..., 2C` — `4C + 1` values.
    pub half_integers: Vec<Rational>,
    /// `n/2 + alpha` for `n = 0 .. 4C - 1` — `4C` values.
    pub midpoints: Vec<Rational>,
}

impl Representatives {
    /// Canonical choices: `xi = max(2C, 1 + C(1 + |Q|)) + 1`, integral
    /// so downstream scaling stays small, and `alpha` at half its
    /// admissible bound to keep clear of the boundary.
    pub fn compute(max_constant: u64, location_count: usize) -> Representatives {
        let c = max_constant as i64;
        let q = location_count as i64;
        let xi = int((2 * c).max(1 + c * (1 + q)) + 1);
        let alpha = if c == 0 {
            ratio(1, 8)
        } else {
            ratio(1, 8 * (1 + c * q.max(4 * c)))
        };
        let half_integers = (0..=4 * c).map(|n| ratio(n, 2)).collect();
        let midpoints = (0..4 * c).map(|n| ratio(n, 2) + alpha).collect();
        Representatives {
            xi,
            alpha,
            max_constant,
            half_integers,
            midpoints,
        }
    }

    /// The representative probing the canonical interval with the given
    /// index (see [`crate::interval::canonical_interval`]): the point
    /// itself, `n/2 + alpha` inside open intervals, and `xi` for the
    /// unbounded tail.
    pub fn for_interval_index(&self, index: usize) -> Rational {
        let count = (8 * self.max_constant + 2) as usize;
        assert!(index < count);
        if index == count - 1 {
            self.xi
        } else if index.is_multiple_of(2) {
            ratio((index / 2) as i64, 2)
        } else {
            ratio((index / 2) as i64, 2) + self.alpha
        }
    }
}

/// How the representative sweep terminates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Try every scheduled representative.
    Exhaustive,
    /// Stop at the first non-empty verdict.
    FailFast,
}

/// Outcome of a parametric emptiness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpResult {
    pub nonempty: bool,
    /// Every representative tried, in order, with its verdict.
    pub verified_values: Vec<(Rational, bool)>,
    /// True when every representative of the schedule was tried; false
    /// when fail-fast stopped early or the midpoint loop was skipped.
    pub exhaustive: bool,
}

impl EmpResult {
    pub fn checker_calls(&self) -> usize {
        self.verified_values.len()
    }
}

/// Substitutes `value` for the parameter, scales constants to integers,
/// applies the strict-monotonicity clock, and checks Büchi emptiness.
/// Returns the witness over the transformed automaton when non-empty;
/// transition indices coincide with the input automaton's.
pub fn check_at_value(
    pta: &ParametricTa,
    value: Rational,
) -> Result<Option<Witness>, EmpCheckError> {
    let substituted = pta.base.substitute_parameter(value);
    let (scaled, _factor) = substituted.scale_to_integers();
    let strict = scaled.with_strict_monotonicity()?;
    Ok(buchi_nonempty(&strict)?)
}

/// Boolean form of [`check_at_value`].
pub fn check_non_par_emptiness(pta: &ParametricTa, value: Rational) -> Result<bool, EmpCheckError> {
    Ok(check_at_value(pta, value)?.is_some())
}

/// The full representative sweep. `observer` sees every probed value
/// with its verdict and witness, in order; campaign instrumentation
/// hooks in here.
pub fn emp_check_observed(
    pta: &ParametricTa,
    mode: SweepMode,
    observer: &mut impl FnMut(Rational, &Option<Witness>),
) -> Result<EmpResult, EmpCheckError> {
    let reps = Representatives::compute(pta.max_constant()?, pta.location_count());
    let total = 1 + reps.half_integers.len() + reps.midpoints.len();
    let mut verified: Vec<(Rational, bool)> = Vec::new();
    let mut nonempty = false;

    let probe = |value: Rational,
                 verified: &mut Vec<(Rational, bool)>,
                 observer: &mut dyn FnMut(Rational, &Option<Witness>)|
     -> Result<bool, EmpCheckError> {
        let witness = check_at_value(pta, value)?;
        observer(value, &witness);
        let hit = witness.is_some();
        verified.push((value, hit));
        Ok(hit)
    };

    nonempty |= probe(reps.xi, &mut verified, observer)?;
    if mode == SweepMode::FailFast && nonempty {
        return Ok(EmpResult {
            nonempty,
            exhaustive: verified.len() == total,
            verified_values: verified,
        });
    }
    for v in &reps.half_integers {
        nonempty |= probe(*v, &mut verified, observer)?;
        if mode == SweepMode::FailFast && nonempty {
            return Ok(EmpResult {
                nonempty,
                exhaustive: verified.len() == total,
                verified_values: verified,
            });
        }
    }
    if !nonempty {
        for v in &reps.midpoints {
            nonempty |= probe(*v, &mut verified, observer)?;
            if mode == SweepMode::FailFast && nonempty {
                return Ok(EmpResult {
                    nonempty,
                    exhaustive: verified.len() == total,
                    verified_values: verified,
                });
            }
        }
    }
    Ok(EmpResult {
        nonempty,
        exhaustive: verified.len() == total,
        verified_values: verified,
    })
}

/// Decides whether the automaton accepts some word under some parameter
/// value, probing only the representative values.
pub fn emp_check(pta: &ParametricTa, mode: SweepMode) -> Result<EmpResult, EmpCheckError> {
    emp_check_observed(pta, mode, &mut |_, _| {})
}
