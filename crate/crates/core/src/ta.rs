//! Timed automata: locations, clocks, guarded transitions with resets,
//! and the basic transformations used by the analysis pipeline
//! (parameter substitution, integer scaling, strict-monotonicity clock).

use crate::guard::{Atom, Bound, ClockId, Guard, Op};
use crate::rational::{denominator_lcm, int, is_integer, Rational};
use std::collections::BTreeSet;
use thiserror::Error;

/// Index of a location in the automaton's location table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocId(pub usize);

/// Index of a transition in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransId(pub usize);

/// Index into the alphabet table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: LocId,
    pub target: LocId,
    pub guard: Guard,
    pub letter: SymbolId,
    pub resets: BTreeSet<ClockId>,
}

/// A timed automaton with Büchi acceptance.
///
/// The alphabet defaults to the singleton `{a}`; multi-letter alphabets
/// are carried through the data model but have no semantic weight in the
/// analyses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedAutomaton {
    pub alphabet: Vec<String>,
    pub locations: Vec<String>,
    pub initial: LocId,
    pub accepting: BTreeSet<LocId>,
    pub clocks: Vec<String>,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaError {
    #[error("location index {0} out of range")]
    BadLocation(usize),
    #[error("clock index {0} out of range")]
    BadClock(usize),
    #[error("symbol index {0} out of range")]
    BadSymbol(usize),
    #[error("duplicate clock name `{0}`")]
    DuplicateClock(String),
    #[error("duplicate location name `{0}`")]
    DuplicateLocation(String),
    #[error("guard constant {0} is not an integer")]
    NonIntegerConstant(String),
    #[error("guard constant {0} is negative")]
    NegativeConstant(String),
    #[error("automaton still contains the parameter")]
    ParameterPresent,
    #[error("clock name `{0}` already in use")]
    ClockNameTaken(String),
    #[error("parametric automaton must have exactly one parameter")]
    ParameterCount,
    #[error("parametric automaton must have exactly two clocks, found {0}")]
    ClockCount(usize),
    #[error("not a non-resetting test automaton: transition {0} tests and resets a shared clock")]
    NotNrt(usize),
}

impl TimedAutomaton {
    /// An automaton over the default singleton alphabet with no
    /// locations, clocks, or transitions; callers add structure and then
    /// validate.
    pub fn new() -> Self {
        TimedAutomaton {
            alphabet: vec!["a".to_string()],
            locations: Vec::new(),
            initial: LocId(0),
            accepting: BTreeSet::new(),
            clocks: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn add_location(&mut self, name: &str) -> LocId {
        self.locations.push(name.to_string());
        LocId(self.locations.len() - 1)
    }

    pub fn add_clock(&mut self, name: &str) -> ClockId {
        self.clocks.push(name.to_string());
        ClockId(self.clocks.len() - 1)
    }

    pub fn add_transition(
        &mut self,
        source: LocId,
        target: LocId,
        guard: Guard,
        resets: impl IntoIterator<Item = ClockId>,
    ) -> TransId {
        self.transitions.push(Transition {
            source,
            target,
            guard,
            letter: SymbolId(0),
            resets: resets.into_iter().collect(),
        });
        TransId(self.transitions.len() - 1)
    }

    pub fn clock_id(&self, name: &str) -> Option<ClockId> {
        self.clocks.iter().position(|c| c == name).map(ClockId)
    }

    pub fn location_id(&self, name: &str) -> Option<LocId> {
        self.locations.iter().position(|l| l == name).map(LocId)
    }

    /// Structural validity: indices in range, unique names, non-negative
    /// constants.
    pub fn validate(&self) -> Result<(), TaError> {
        let mut seen = BTreeSet::new();
        for c in &self.clocks {
            if !seen.insert(c) {
                return Err(TaError::DuplicateClock(c.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for l in &self.locations {
            if !seen.insert(l) {
                return Err(TaError::DuplicateLocation(l.clone()));
            }
        }
        if self.initial.0 >= self.locations.len() {
            return Err(TaError::BadLocation(self.initial.0));
        }
        for l in &self.accepting {
            if l.0 >= self.locations.len() {
                return Err(TaError::BadLocation(l.0));
            }
        }
        for t in &self.transitions {
            if t.source.0 >= self.locations.len() {
                return Err(TaError::BadLocation(t.source.0));
            }
            if t.target.0 >= self.locations.len() {
                return Err(TaError::BadLocation(t.target.0));
            }
            if t.letter.0 >= self.alphabet.len() {
                return Err(TaError::BadSymbol(t.letter.0));
            }
            for c in &t.resets {
                if c.0 >= self.clocks.len() {
                    return Err(TaError::BadClock(c.0));
                }
            }
            for a in t.guard.atoms() {
                if a.clock.0 >= self.clocks.len() {
                    return Err(TaError::BadClock(a.clock.0));
                }
                if let Bound::Const(c) = a.bound {
                    if c < int(0) {
                        return Err(TaError::NegativeConstant(c.to_string()));
                    }
                }
            }
        }
        Ok(())
    }

    /// True iff no transition both tests and resets the same clock.
    pub fn is_nrt(&self) -> bool {
        self.first_nrt_violation().is_none()
    }

    /// Index of the first transition testing and resetting a shared
    /// clock, if any.
    pub fn first_nrt_violation(&self) -> Option<usize> {
        self.transitions
            .iter()
            .position(|t| t.guard.clocks().intersection(&t.resets).next().is_some())
    }

    /// The largest constant appearing in any guard atom, or 0 when no
    /// constant occurs. Defined only for integer constants: it is a
    /// pre-substitution quantity.
    pub fn max_constant(&self) -> Result<u64, TaError> {
        let mut best = 0u64;
        for t in &self.transitions {
            for a in t.guard.atoms() {
                if let Bound::Const(c) = a.bound {
                    if !is_integer(&c) {
                        return Err(TaError::NonIntegerConstant(c.to_string()));
                    }
                    best = best.max(*c.numer() as u64);
                }
            }
        }
        Ok(best)
    }

    pub fn has_parameter(&self) -> bool {
        self.transitions.iter().any(|t| t.guard.has_parameter())
    }

    /// Replaces every parametric atom with a comparison against `value`.
    /// Location and transition structure is unchanged.
    pub fn substitute_parameter(&self, value: Rational) -> TimedAutomaton {
        let mut out = self.clone();
        for t in &mut out.transitions {
            t.guard = t.guard.map_atoms(&|a| match a.bound {
                Bound::Param => Atom::cmp_const(a.clock, a.op, value),
                Bound::Const(_) => a,
            });
        }
        out
    }

    /// Multiplies every guard constant by the least common multiple of
    /// all constant denominators, producing an automaton with integer
    /// constants. The accepted language is the original one with all
    /// timestamps scaled, so emptiness is preserved.
    pub fn scale_to_integers(&self) -> (TimedAutomaton, i64) {
        let consts: Vec<Rational> = self
            .transitions
            .iter()
            .flat_map(|t| t.guard.atoms())
            .filter_map(|a| match a.bound {
                Bound::Const(c) => Some(c),
                Bound::Param => None,
            })
            .collect();
        let scale = denominator_lcm(consts.iter());
        (self.scale_constants(scale), scale)
    }

    /// Multiplies every guard constant by `factor` (parametric atoms are
    /// untouched).
    pub fn scale_constants(&self, factor: i64) -> TimedAutomaton {
        let mut out = self.clone();
        let f = int(factor);
        for t in &mut out.transitions {
            t.guard = t.guard.map_atoms(&|a| match a.bound {
                Bound::Const(c) => Atom::cmp_const(a.clock, a.op, c * f),
                Bound::Param => a,
            });
        }
        out
    }

    /// Adds a fresh clock `z`, resets it on every transition, and
    /// conjoins `z > 0` to every guard. Under weakly monotonic time this
    /// forces a strictly positive delay on each step without affecting
    /// language emptiness.
    pub fn with_strict_monotonicity(&self) -> Result<TimedAutomaton, TaError> {
        if self.clocks.iter().any(|c| c == "z") {
            return Err(TaError::ClockNameTaken("z".to_string()));
        }
        let mut out = self.clone();
        let z = out.add_clock("z");
        for t in &mut out.transitions {
            t.guard = Guard::and([
                t.guard.clone(),
                Guard::atom(Atom::cmp_const(z, Op::Gt, int(0))),
            ]);
            t.resets.insert(z);
        }
        Ok(out)
    }

    /// Locations plus transitions, the size metric used in reports.
    pub fn size(&self) -> usize {
        self.locations.len() + self.transitions.len()
    }
}

impl Default for TimedAutomaton {
    fn default() -> Self {
        Self::new()
    }
}

/// A non-resetting test timed automaton with exactly one parameter and
/// two clocks (before the strict-monotonicity transformation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParametricTa {
    pub base: TimedAutomaton,
    pub parameter: String,
}

impl ParametricTa {
    pub fn new(base: TimedAutomaton, parameter: &str) -> Result<Self, TaError> {
        base.validate()?;
        if base.clocks.len() != 2 {
            return Err(TaError::ClockCount(base.clocks.len()));
        }
        if let Some(i) = base.first_nrt_violation() {
            return Err(TaError::NotNrt(i));
        }
        Ok(ParametricTa {
            base,
            parameter: parameter.to_string(),
        })
    }

    pub fn max_constant(&self) -> Result<u64, TaError> {
        self.base.max_constant()
    }

    pub fn location_count(&self) -> usize {
        self.base.locations.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    /// The three-location parametric automaton used as the running
    /// fixture: q0 -(y==mu, reset x)-> q1 -(x==mu && y>2)-> q2 (accepting),
    /// q2 -(reset y)-> q0.
    pub fn loop_fixture() -> TimedAutomaton {
        let mut ta = TimedAutomaton::new();
        let q0 = ta.add_location("q0");
        let q1 = ta.add_location("q1");
        let q2 = ta.add_location("q2");
        let x = ta.add_clock("x");
        let y = ta.add_clock("y");
        ta.initial = q0;
        ta.accepting.insert(q2);
        ta.add_transition(q0, q1, Guard::atom(Atom::cmp_param(y, Op::Eq)), [x]);
        ta.add_transition(
            q1,
            q2,
            Guard::and([
                Guard::atom(Atom::cmp_param(x, Op::Eq)),
                Guard::atom(Atom::cmp_const(y, Op::Gt, int(2))),
            ]),
            [],
        );
        ta.add_transition(q2, q0, Guard::True, [y]);
        ta
    }

    #[test]
    fn loop_fixture_is_nrt() {
        assert!(loop_fixture().is_nrt());
    }

    #[test]
    fn reset_tested_clock_violates_nrt() {
        let mut ta = TimedAutomaton::new();
        let q0 = ta.add_location("q0");
        let x = ta.add_clock("x");
        ta.add_transition(q0, q0, Guard::atom(Atom::cmp_const(x, Op::Eq, int(1))), [x]);
        assert!(!ta.is_nrt());
    }

    #[test]
    fn empty_automaton_is_nrt() {
        let mut ta = TimedAutomaton::new();
        ta.add_location("q0");
        assert!(ta.is_nrt());
    }

    #[test]
    fn max_constant_of_fixture() {
        assert_eq!(loop_fixture().max_constant().unwrap(), 2);
    }

    #[test]
    fn max_constant_guard_free() {
        let mut ta = TimedAutomaton::new();
        let q0 = ta.add_location("q0");
        ta.add_transition(q0, q0, Guard::True, []);
        assert_eq!(ta.max_constant().unwrap(), 0);
    }

    #[test]
    fn max_constant_rejects_rationals() {
        let ta = loop_fixture().substitute_parameter(ratio(3, 2));
        assert!(matches!(
            ta.max_constant(),
            Err(TaError::NonIntegerConstant(_))
        ));
    }

    #[test]
    fn substitution_is_textual() {
        let ta = loop_fixture().substitute_parameter(ratio(3, 2));
        assert!(!ta.has_parameter());
        let names = vec!["x".to_string(), "y".to_string()];
        assert_eq!(ta.transitions[0].guard.render(&names, None), "y == 3/2");
        assert_eq!(
            ta.transitions[1].guard.render(&names, None),
            "x == 3/2 && y > 2"
        );
    }

    #[test]
    fn substitution_on_parameter_free_is_identity() {
        let ta = loop_fixture().substitute_parameter(int(2));
        let again = ta.substitute_parameter(int(9));
        assert_eq!(ta, again);
    }

    #[test]
    fn substitution_commutes_with_nrt_check() {
        let ta = loop_fixture();
        assert_eq!(ta.is_nrt(), ta.substitute_parameter(ratio(1, 2)).is_nrt());
    }

    #[test]
    fn scaling_examples() {
        let ta = loop_fixture().substitute_parameter(ratio(3, 2));
        let (scaled, factor) = ta.scale_to_integers();
        assert_eq!(factor, 2);
        assert_eq!(scaled.max_constant().unwrap(), 4);

        let already = loop_fixture().substitute_parameter(int(2));
        let (same, factor) = already.scale_to_integers();
        assert_eq!(factor, 1);
        assert_eq!(same, already);

        let mut ta = TimedAutomaton::new();
        let q0 = ta.add_location("q0");
        let x = ta.add_clock("x");
        ta.add_transition(
            q0,
            q0,
            Guard::and([
                Guard::atom(Atom::cmp_const(x, Op::Lt, ratio(1, 6))),
                Guard::atom(Atom::cmp_const(x, Op::Gt, ratio(1, 4))),
            ]),
            [],
        );
        let (scaled, factor) = ta.scale_to_integers();
        assert_eq!(factor, 12);
        assert_eq!(scaled.max_constant().unwrap(), 3);
    }

    #[test]
    fn strict_monotonicity_adds_z_everywhere() {
        let ta = loop_fixture().substitute_parameter(int(2));
        let strict = ta.with_strict_monotonicity().unwrap();
        let z = strict.clock_id("z").unwrap();
        assert_eq!(strict.clocks.len(), 3);
        for t in &strict.transitions {
            assert!(t.resets.contains(&z));
            assert!(t
                .guard
                .atoms()
                .iter()
                .any(|a| a.clock == z && a.op == Op::Gt && a.bound == Bound::Const(int(0))));
        }
    }

    #[test]
    fn strict_monotonicity_on_transition_free() {
        let mut ta = TimedAutomaton::new();
        ta.add_location("q0");
        let strict = ta.with_strict_monotonicity().unwrap();
        assert_eq!(strict.clocks, vec!["z".to_string()]);
        assert!(strict.transitions.is_empty());
    }

    #[test]
    fn strict_monotonicity_rejects_collision() {
        let mut ta = TimedAutomaton::new();
        ta.add_location("q0");
        ta.add_clock("z");
        assert_eq!(
            ta.with_strict_monotonicity(),
            Err(TaError::ClockNameTaken("z".to_string()))
        );
    }

    #[test]
    fn parametric_wrapper_enforces_shape() {
        let pta = ParametricTa::new(loop_fixture(), "mu").unwrap();
        assert_eq!(pta.max_constant().unwrap(), 2);
        assert_eq!(pta.location_count(), 3);

        let mut one_clock = TimedAutomaton::new();
        one_clock.add_location("q0");
        one_clock.add_clock("x");
        assert!(matches!(
            ParametricTa::new(one_clock, "mu"),
            Err(TaError::ClockCount(1))
        ));
    }

    #[test]
    fn max_constant_invariant_under_substitution_of_other_atoms() {
        // Atoms not mentioning the parameter keep the same maximum
        // regardless of the substituted value.
        let ta = loop_fixture();
        for v in [0, 1, 2] {
            assert_eq!(ta.substitute_parameter(int(v)).max_constant().unwrap(), 2);
        }
    }
}
