//! Clock guards: atoms comparing a clock against a constant or the
//! parameter, closed under conjunction, disjunction, and negation.
//!
//! Guards are kept in negation normal form with derived comparison
//! operators pre-expanded, so negation never appears explicitly: `not`
//! flips atoms (splitting equality into a disjunction) at construction
//! time. The analysis layer consumes guards as a disjunction of
//! conjunctive clauses, since zones represent convex sets only.

use crate::rational::{format_rational, Rational};
use std::collections::BTreeSet;
use std::fmt;

/// Index of a clock in the owning automaton's clock table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockId(pub usize);

/// Comparison operator of a guard atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Op {
    /// The operator satisfied exactly when `self` is not.
    pub fn negated(self) -> Vec<Op> {
        match self {
            Op::Lt => vec![Op::Ge],
            Op::Le => vec![Op::Gt],
            Op::Eq => vec![Op::Lt, Op::Gt],
            Op::Ge => vec![Op::Lt],
            Op::Gt => vec![Op::Le],
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Eq => "==",
            Op::Ge => ">=",
            Op::Gt => ">",
        }
    }

    /// True for operators that impose an upper bound on the clock.
    pub fn bounds_above(self) -> bool {
        matches!(self, Op::Lt | Op::Le | Op::Eq)
    }
}

/// Right-hand side of an atom: a constant or the single parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Const(Rational),
    Param,
}

/// A single comparison `clock op bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub clock: ClockId,
    pub op: Op,
    pub bound: Bound,
}

impl Atom {
    pub fn cmp_const(clock: ClockId, op: Op, c: Rational) -> Self {
        Atom {
            clock,
            op,
            bound: Bound::Const(c),
        }
    }

    pub fn cmp_param(clock: ClockId, op: Op) -> Self {
        Atom {
            clock,
            op,
            bound: Bound::Param,
        }
    }

    pub fn is_parametric(&self) -> bool {
        matches!(self.bound, Bound::Param)
    }

    /// Evaluates the atom on a concrete clock value, with `param` supplying
    /// the parameter value when the bound is parametric.
    pub fn holds(&self, value: Rational, param: Option<Rational>) -> bool {
        let rhs = match self.bound {
            Bound::Const(c) => c,
            Bound::Param => param.expect("parametric atom evaluated without a parameter value"),
        };
        match self.op {
            Op::Lt => value < rhs,
            Op::Le => value <= rhs,
            Op::Eq => value == rhs,
            Op::Ge => value >= rhs,
            Op::Gt => value > rhs,
        }
    }
}

/// A guard in negation normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Guard {
    True,
    Atom(Atom),
    And(Vec<Guard>),
    Or(Vec<Guard>),
}

impl Guard {
    pub fn atom(a: Atom) -> Self {
        Guard::Atom(a)
    }

    pub fn and(parts: impl IntoIterator<Item = Guard>) -> Self {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Guard::True => {}
                Guard::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Guard::True,
            1 => flat.pop().unwrap(),
            _ => Guard::And(flat),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Guard>) -> Self {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Guard::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Guard::Or(Vec::new()),
            1 => flat.pop().unwrap(),
            _ => Guard::Or(flat),
        }
    }

    /// Negation, pushed down to atoms. Equality atoms split into a
    /// disjunction, so negation can introduce `Or` nodes.
    pub fn negated(&self) -> Guard {
        match self {
            Guard::True => Guard::Or(Vec::new()),
            Guard::Atom(a) => Guard::or(a.op.negated().into_iter().map(|op| {
                Guard::Atom(Atom {
                    clock: a.clock,
                    op,
                    bound: a.bound,
                })
            })),
            Guard::And(parts) => Guard::or(parts.iter().map(|p| p.negated())),
            Guard::Or(parts) => {
                if parts.is_empty() {
                    Guard::True
                } else {
                    Guard::and(parts.iter().map(|p| p.negated()))
                }
            }
        }
    }

    /// All clocks referenced by the guard.
    pub fn clocks(&self) -> BTreeSet<ClockId> {
        let mut out = BTreeSet::new();
        self.collect_clocks(&mut out);
        out
    }

    fn collect_clocks(&self, out: &mut BTreeSet<ClockId>) {
        match self {
            Guard::True => {}
            Guard::Atom(a) => {
                out.insert(a.clock);
            }
            Guard::And(parts) | Guard::Or(parts) => {
                for p in parts {
                    p.collect_clocks(out);
                }
            }
        }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Atom>) {
        match self {
            Guard::True => {}
            Guard::Atom(a) => out.push(*a),
            Guard::And(parts) | Guard::Or(parts) => {
                for p in parts {
                    p.collect_atoms(out);
                }
            }
        }
    }

    pub fn has_parameter(&self) -> bool {
        self.atoms().iter().any(Atom::is_parametric)
    }

    /// Disjunctive normal form: a list of conjunctive clauses whose union
    /// of solution sets equals the guard. The empty list is `false`; a
    /// clause with no atoms is `true`.
    pub fn dnf_clauses(&self) -> Vec<Vec<Atom>> {
        match self {
            Guard::True => vec![Vec::new()],
            Guard::Atom(a) => vec![vec![*a]],
            Guard::Or(parts) => parts.iter().flat_map(|p| p.dnf_clauses()).collect(),
            Guard::And(parts) => {
                let mut clauses: Vec<Vec<Atom>> = vec![Vec::new()];
                for p in parts {
                    let sub = p.dnf_clauses();
                    let mut next = Vec::new();
                    for c in &clauses {
                        for s in &sub {
                            let mut merged = c.clone();
                            merged.extend(s.iter().copied());
                            next.push(merged);
                        }
                    }
                    clauses = next;
                }
                clauses
            }
        }
    }

    /// Applies `f` to every atom, rebuilding the guard.
    pub fn map_atoms(&self, f: &impl Fn(Atom) -> Atom) -> Guard {
        match self {
            Guard::True => Guard::True,
            Guard::Atom(a) => Guard::Atom(f(*a)),
            Guard::And(parts) => Guard::And(parts.iter().map(|p| p.map_atoms(f)).collect()),
            Guard::Or(parts) => Guard::Or(parts.iter().map(|p| p.map_atoms(f)).collect()),
        }
    }

    /// Evaluates the guard on a full clock valuation.
    pub fn holds(&self, valuation: &[Rational], param: Option<Rational>) -> bool {
        match self {
            Guard::True => true,
            Guard::Atom(a) => a.holds(valuation[a.clock.0], param),
            Guard::And(parts) => parts.iter().all(|p| p.holds(valuation, param)),
            Guard::Or(parts) => parts.iter().any(|p| p.holds(valuation, param)),
        }
    }

    /// Renders the guard using clock names; conjunctions use `&&`,
    /// disjunctions `||`.
    pub fn render(&self, clock_names: &[String], param_name: Option<&str>) -> String {
        fn bound_str(b: &Bound, param_name: Option<&str>) -> String {
            match b {
                Bound::Const(c) => format_rational(c),
                Bound::Param => param_name.unwrap_or("mu").to_string(),
            }
        }
        match self {
            Guard::True => String::new(),
            Guard::Atom(a) => format!(
                "{} {} {}",
                clock_names[a.clock.0],
                a.op.symbol(),
                bound_str(&a.bound, param_name)
            ),
            Guard::And(parts) => parts
                .iter()
                .map(|p| p.render(clock_names, param_name))
                .collect::<Vec<_>>()
                .join(" && "),
            Guard::Or(parts) => {
                if parts.is_empty() {
                    "false".to_string()
                } else {
                    parts
                        .iter()
                        .map(|p| match p {
                            Guard::And(_) => {
                                format!("({})", p.render(clock_names, param_name))
                            }
                            _ => p.render(clock_names, param_name),
                        })
                        .collect::<Vec<_>>()
                        .join(" || ")
                }
            }
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn x() -> ClockId {
        ClockId(0)
    }

    #[test]
    fn negation_expands_equality() {
        let g = Guard::atom(Atom::cmp_const(x(), Op::Eq, int(1)));
        let n = g.negated();
        assert_eq!(
            n.dnf_clauses(),
            vec![
                vec![Atom::cmp_const(x(), Op::Lt, int(1))],
                vec![Atom::cmp_const(x(), Op::Gt, int(1))],
            ]
        );
    }

    #[test]
    fn double_negation_preserves_clauses() {
        let g = Guard::and([
            Guard::atom(Atom::cmp_const(x(), Op::Lt, int(2))),
            Guard::atom(Atom::cmp_param(ClockId(1), Op::Eq)),
        ]);
        let back = g.negated().negated();
        // Same solution set; clause expansion may differ in shape, so
        // compare on a sample grid.
        for vx in 0..4 {
            for vy in 0..4 {
                let v = [int(vx), int(vy)];
                assert_eq!(
                    g.holds(&v, Some(int(2))),
                    back.holds(&v, Some(int(2))),
                    "at ({vx},{vy})"
                );
            }
        }
    }

    #[test]
    fn dnf_distributes_conjunction_over_disjunction() {
        let left = Guard::or([
            Guard::atom(Atom::cmp_const(x(), Op::Lt, int(1))),
            Guard::atom(Atom::cmp_const(x(), Op::Gt, int(3))),
        ]);
        let g = Guard::and([
            left,
            Guard::atom(Atom::cmp_const(ClockId(1), Op::Ge, int(2))),
        ]);
        let clauses = g.dnf_clauses();
        assert_eq!(clauses.len(), 2);
        assert!(clauses.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn false_guard_has_no_clauses() {
        let g = Guard::Or(Vec::new());
        assert!(g.dnf_clauses().is_empty());
        assert_eq!(g.negated(), Guard::True);
    }

    #[test]
    fn render_uses_names() {
        let g = Guard::and([
            Guard::atom(Atom::cmp_param(x(), Op::Eq)),
            Guard::atom(Atom::cmp_const(ClockId(1), Op::Gt, int(2))),
        ]);
        let names = vec!["x".to_string(), "y".to_string()];
        assert_eq!(g.render(&names, Some("mu")), "x == mu && y > 2");
    }
}
