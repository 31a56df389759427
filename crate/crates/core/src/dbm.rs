//! Difference bound matrices over the clock set plus a zero reference.
//!
//! Matrices are kept canonical (all-pairs tightened) after every
//! mutating operation; empty zones collapse to a designated marker so
//! equality and hashing are structural.

use crate::guard::{Atom, Bound as GuardBound, Op};
use crate::rational::{is_integer, Rational};
use std::fmt;

/// Strictness of a difference bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strictness {
    Strict,
    Weak,
}

/// An upper bound on a clock difference: a finite `(value, strictness)`
/// pair or unbounded. Encoded so that tighter bounds compare smaller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DbmBound(i64);

const INF_RAW: i64 = i64::MAX;

impl DbmBound {
    pub const INF: DbmBound = DbmBound(INF_RAW);

    pub fn weak(value: i64) -> Self {
        DbmBound(value * 2 + 1)
    }

    pub fn strict(value: i64) -> Self {
        DbmBound(value * 2)
    }

    pub fn is_inf(self) -> bool {
        self.0 == INF_RAW
    }

    pub fn value(self) -> i64 {
        debug_assert!(!self.is_inf());
        self.0.div_euclid(2)
    }

    pub fn is_strict(self) -> bool {
        !self.is_inf() && self.0 % 2 == 0
    }

    pub fn plus(self, other: DbmBound) -> DbmBound {
        if self.is_inf() || other.is_inf() {
            return DbmBound::INF;
        }
        // (a, s1) + (b, s2) = (a + b, weak iff both weak)
        let value = self.value() + other.value();
        if self.is_strict() || other.is_strict() {
            DbmBound::strict(value)
        } else {
            DbmBound::weak(value)
        }
    }

    fn tighter(self, other: DbmBound) -> DbmBound {
        if self.0 <= other.0 {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for DbmBound {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DbmBound {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Display for DbmBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inf() {
            write!(f, "inf")
        } else if self.is_strict() {
            write!(f, "<{}", self.value())
        } else {
            write!(f, "<={}", self.value())
        }
    }
}

/// A canonical zone over `clock_count` clocks (index 0 is the zero
/// reference, clocks are 1-based inside the matrix).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DbmZone {
    Empty { clock_count: usize },
    Closed { dim: usize, bounds: Vec<DbmBound> },
}

impl DbmZone {
    /// The zone where every clock equals zero.
    pub fn zero(clock_count: usize) -> Self {
        let dim = clock_count + 1;
        DbmZone::Closed {
            dim,
            bounds: vec![DbmBound::weak(0); dim * dim],
        }
    }

    /// The full non-negative orthant: clocks unconstrained above.
    pub fn universal(clock_count: usize) -> Self {
        let dim = clock_count + 1;
        let mut bounds = vec![DbmBound::INF; dim * dim];
        for i in 0..dim {
            bounds[i * dim + i] = DbmBound::weak(0);
            // 0 - x_i <= 0: clocks are non-negative.
            bounds[i] = DbmBound::weak(0);
        }
        DbmZone::Closed { dim, bounds }
    }

    pub fn clock_count(&self) -> usize {
        match self {
            DbmZone::Empty { clock_count } => *clock_count,
            DbmZone::Closed { dim, .. } => dim - 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, DbmZone::Empty { .. })
    }

    fn get(&self, i: usize, j: usize) -> DbmBound {
        match self {
            DbmZone::Empty { .. } => unreachable!("bound lookup on empty zone"),
            DbmZone::Closed { dim, bounds } => bounds[i * dim + j],
        }
    }

    fn set(&mut self, i: usize, j: usize, b: DbmBound) {
        if let DbmZone::Closed { dim, bounds } = self {
            bounds[i * *dim + j] = b;
        }
    }

    /// All-pairs tightening. Collapses to the empty marker when a
    /// negative self-loop appears.
    fn close(&mut self) {
        let dim = match self {
            DbmZone::Empty { .. } => return,
            DbmZone::Closed { dim, .. } => *dim,
        };
        for k in 0..dim {
            for i in 0..dim {
                let ik = self.get(i, k);
                if ik.is_inf() {
                    continue;
                }
                for j in 0..dim {
                    let kj = self.get(k, j);
                    let via = ik.plus(kj);
                    if via < self.get(i, j) {
                        self.set(i, j, via);
                    }
                }
            }
        }
        for i in 0..dim {
            if self.get(i, i) < DbmBound::weak(0) {
                *self = DbmZone::Empty {
                    clock_count: dim - 1,
                };
                return;
            }
        }
    }

    /// Removes upper bounds on all clocks (time elapse under weakly
    /// monotonic delay). Preserves canonicity.
    pub fn up(&mut self) {
        if let DbmZone::Closed { dim, .. } = self {
            let dim = *dim;
            for i in 1..dim {
                self.set(i, 0, DbmBound::INF);
            }
        }
    }

    /// Sets clock `x` (1-based) to zero. Preserves canonicity.
    pub fn reset(&mut self, x: usize) {
        if let DbmZone::Closed { dim, .. } = self {
            let dim = *dim;
            for j in 0..dim {
                let b0j = self.get(0, j);
                let bj0 = self.get(j, 0);
                self.set(x, j, b0j);
                self.set(j, x, bj0);
            }
            self.set(x, x, DbmBound::weak(0));
            self.set(x, 0, self.get(0, 0));
            self.set(0, x, self.get(0, 0));
        }
    }

    /// Intersects with a single difference bound `x_i - x_j ≺ c` and
    /// re-canonicalizes.
    pub fn constrain(&mut self, i: usize, j: usize, bound: DbmBound) {
        if self.is_empty() {
            return;
        }
        if bound < self.get(i, j) {
            self.set(i, j, bound);
            self.close();
        }
    }

    /// Intersects with a guard atom over integer constants. The clock
    /// index inside the atom is 0-based; the matrix row is `clock + 1`.
    pub fn constrain_atom(&mut self, atom: &Atom) {
        let c = match atom.bound {
            GuardBound::Const(c) => c,
            GuardBound::Param => panic!("parametric atom at the zone level"),
        };
        assert!(is_integer(&c), "zone constants must be integers");
        let c = *c.numer();
        let x = atom.clock.0 + 1;
        match atom.op {
            Op::Lt => self.constrain(x, 0, DbmBound::strict(c)),
            Op::Le => self.constrain(x, 0, DbmBound::weak(c)),
            Op::Eq => {
                self.constrain(x, 0, DbmBound::weak(c));
                self.constrain(0, x, DbmBound::weak(-c));
            }
            Op::Ge => self.constrain(0, x, DbmBound::weak(-c)),
            Op::Gt => self.constrain(0, x, DbmBound::strict(-c)),
        }
    }

    /// Classic maximum-constant extrapolation: bounds above `m` become
    /// unbounded, bounds below `-m` become `(-m, <)`. Re-canonicalizes.
    pub fn extrapolate(&mut self, m: i64) {
        let dim = match self {
            DbmZone::Empty { .. } => return,
            DbmZone::Closed { dim, .. } => *dim,
        };
        let mut changed = false;
        for i in 0..dim {
            for j in 0..dim {
                if i == j {
                    continue;
                }
                let b = self.get(i, j);
                if b.is_inf() {
                    continue;
                }
                if b.value() > m {
                    self.set(i, j, DbmBound::INF);
                    changed = true;
                } else if b < DbmBound::strict(-m) {
                    self.set(i, j, DbmBound::strict(-m));
                    changed = true;
                }
            }
        }
        if changed {
            self.close();
        }
    }

    /// True iff every valuation of `self` lies in `other`. Both must be
    /// canonical, which holds for all zones produced by this module.
    pub fn subset_of(&self, other: &DbmZone) -> bool {
        match (self, other) {
            (DbmZone::Empty { .. }, _) => true,
            (_, DbmZone::Empty { .. }) => false,
            (
                DbmZone::Closed {
                    dim: d1,
                    bounds: b1,
                },
                DbmZone::Closed {
                    dim: d2,
                    bounds: b2,
                },
            ) => {
                assert_eq!(d1, d2, "zone dimension mismatch");
                b1.iter().zip(b2.iter()).all(|(a, b)| a.tighter(*b) == *a)
            }
        }
    }

    /// Intersects with a point valuation given as rationals scaled to
    /// integers by the caller; used for probing entry valuations.
    pub fn constrain_point(&mut self, values: &[i64]) {
        for (idx, v) in values.iter().enumerate() {
            let x = idx + 1;
            self.constrain(x, 0, DbmBound::weak(*v));
            self.constrain(0, x, DbmBound::weak(-*v));
        }
    }

    /// Whether the rational valuation lies inside the zone (exact
    /// arithmetic; bounds are integers).
    pub fn contains_valuation(&self, values: &[Rational]) -> bool {
        let dim = match self {
            DbmZone::Empty { .. } => return false,
            DbmZone::Closed { dim, .. } => *dim,
        };
        let val = |i: usize| -> Rational {
            if i == 0 {
                Rational::from_integer(0)
            } else {
                values[i - 1]
            }
        };
        for i in 0..dim {
            for j in 0..dim {
                let b = self.get(i, j);
                if b.is_inf() {
                    continue;
                }
                let diff = val(i) - val(j);
                let limit = Rational::from_integer(b.value());
                let ok = if b.is_strict() {
                    diff < limit
                } else {
                    diff <= limit
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}
