//! Semirings, weighted automata over them, and the algebraic
//! shortest-distance computation used to decide the existence of
//! non-zero-weight words.
//!
//! Two instances matter here: Boolean words of a fixed length under
//! bitwise OR/AND (interval sets in disguise), and the tropical
//! min-plus semiring for costs.

use crate::interval::{from_canonical_indices, to_canonical_indices, IntervalError, IntervalSet};
use crate::ta::SymbolId;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightedError {
    #[error("shortest distance requires an idempotent semiring")]
    NotIdempotent,
    #[error("closure failed to converge within the certified bound")]
    ClosureDiverged,
    #[error("missing weight for {0}")]
    MissingWeight(String),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// A semiring instance. The instance object carries context such as the
/// word length of the Boolean-word semiring, so identities are methods
/// rather than associated constants.
pub trait Semiring {
    type Value: Clone + Eq + fmt::Debug;

    fn zero(&self) -> Self::Value;
    fn one(&self) -> Self::Value;
    fn plus(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn times(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;

    /// Whether `plus` is idempotent; the shortest-distance iteration is
    /// only certified for idempotent instances.
    fn idempotent(&self) -> bool;
}

/// A fixed-length Boolean word; index 0 is the leftmost character of
/// the rendered string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    bits: Vec<bool>,
}

impl BitWord {
    pub fn zeros(len: usize) -> BitWord {
        BitWord {
            bits: vec![false; len],
        }
    }

    pub fn ones(len: usize) -> BitWord {
        BitWord {
            bits: vec![true; len],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> BitWord {
        let mut w = BitWord::zeros(len);
        for i in indices {
            w.bits[i] = true;
        }
        w
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.bits[i] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|b| !b)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn or(&self, other: &BitWord) -> BitWord {
        assert_eq!(self.len(), other.len(), "bit-word length mismatch");
        BitWord {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| *a || *b)
                .collect(),
        }
    }

    pub fn and(&self, other: &BitWord) -> BitWord {
        assert_eq!(self.len(), other.len(), "bit-word length mismatch");
        BitWord {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| *a && *b)
                .collect(),
        }
    }

    /// Parses a `01`-string.
    pub fn parse(s: &str) -> Option<BitWord> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<bool>>>()
            .map(|bits| BitWord { bits })
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Boolean words of length `8C + 2` under bitwise OR and AND.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitSemiring {
    pub word_len: usize,
}

impl BitSemiring {
    /// The instance for maximum constant `c`.
    pub fn for_max_constant(c: u64) -> BitSemiring {
        BitSemiring {
            word_len: (8 * c + 2) as usize,
        }
    }
}

impl Semiring for BitSemiring {
    type Value = BitWord;

    fn zero(&self) -> BitWord {
        BitWord::zeros(self.word_len)
    }

    fn one(&self) -> BitWord {
        BitWord::ones(self.word_len)
    }

    fn plus(&self, a: &BitWord, b: &BitWord) -> BitWord {
        a.or(b)
    }

    fn times(&self, a: &BitWord, b: &BitWord) -> BitWord {
        a.and(b)
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// A natural-number cost or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PriceValue {
    Finite(u64),
    Infinite,
}

impl fmt::Display for PriceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriceValue::Finite(v) => write!(f, "{v}"),
            PriceValue::Infinite => write!(f, "+inf"),
        }
    }
}

/// The tropical min-plus semiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MinPlus;

impl Semiring for MinPlus {
    type Value = PriceValue;

    fn zero(&self) -> PriceValue {
        PriceValue::Infinite
    }

    fn one(&self) -> PriceValue {
        PriceValue::Finite(0)
    }

    fn plus(&self, a: &PriceValue, b: &PriceValue) -> PriceValue {
        *a.min(b)
    }

    fn times(&self, a: &PriceValue, b: &PriceValue) -> PriceValue {
        match (a, b) {
            (PriceValue::Finite(x), PriceValue::Finite(y)) => PriceValue::Finite(x + y),
            _ => PriceValue::Infinite,
        }
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// Index of a state in a weighted automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WaState(pub usize);

/// A weighted automaton over a semiring: absent transitions carry the
/// zero weight, final states carry final weights.
#[derive(Debug, Clone)]
pub struct WeightedAutomaton<S: Semiring> {
    pub semiring: S,
    pub alphabet: Vec<String>,
    pub state_count: usize,
    pub initial: WaState,
    pub transition_weights: BTreeMap<(WaState, SymbolId, WaState), S::Value>,
    pub final_weights: BTreeMap<WaState, S::Value>,
}

impl<S: Semiring> WeightedAutomaton<S> {
    pub fn new(semiring: S, state_count: usize, initial: WaState) -> Self {
        WeightedAutomaton {
            semiring,
            alphabet: vec!["a".to_string()],
            state_count,
            initial,
            transition_weights: BTreeMap::new(),
            final_weights: BTreeMap::new(),
        }
    }

    /// Adds (by `plus`) a transition weight; parallel contributions to
    /// the same labelled edge combine additively.
    pub fn add_transition_weight(
        &mut self,
        from: WaState,
        label: SymbolId,
        to: WaState,
        weight: S::Value,
    ) {
        let entry = self
            .transition_weights
            .entry((from, label, to))
            .or_insert_with(|| self.semiring.zero());
        *entry = self.semiring.plus(entry, &weight);
    }

    pub fn set_final_weight(&mut self, state: WaState, weight: S::Value) {
        self.final_weights.insert(state, weight);
    }

    pub fn transition_weight(&self, from: WaState, label: SymbolId, to: WaState) -> S::Value {
        self.transition_weights
            .get(&(from, label, to))
            .cloned()
            .unwrap_or_else(|| self.semiring.zero())
    }

    /// Weight of the path `q0 y1 q1 ... yn qn`: the product of its
    /// transition weights times the final weight of its endpoint, or
    /// zero when the endpoint is not final. The path must start at the
    /// initial state.
    pub fn path_weight(&self, states: &[WaState], labels: &[SymbolId]) -> S::Value {
        assert_eq!(states.len(), labels.len() + 1, "malformed path");
        assert_eq!(
            states[0], self.initial,
            "path must start at the initial state"
        );
        let last = *states.last().unwrap();
        let Some(final_w) = self.final_weights.get(&last) else {
            return self.semiring.zero();
        };
        let mut acc = self.semiring.one();
        for (i, label) in labels.iter().enumerate() {
            let w = self.transition_weight(states[i], *label, states[i + 1]);
            acc = self.semiring.times(&acc, &w);
        }
        self.semiring.times(&acc, final_w)
    }

    /// Sum over all paths labelled `word` of their weights.
    pub fn behavior(&self, word: &[SymbolId]) -> S::Value {
        let mut current: Vec<S::Value> = vec![self.semiring.zero(); self.state_count];
        current[self.initial.0] = self.semiring.one();
        for label in word {
            let mut next: Vec<S::Value> = vec![self.semiring.zero(); self.state_count];
            for ((from, l, to), w) in &self.transition_weights {
                if l != label {
                    continue;
                }
                let via = self.semiring.times(&current[from.0], w);
                next[to.0] = self.semiring.plus(&next[to.0], &via);
            }
            current = next;
        }
        let mut acc = self.semiring.zero();
        for (state, fw) in &self.final_weights {
            let via = self.semiring.times(&current[state.0], fw);
            acc = self.semiring.plus(&acc, &via);
        }
        acc
    }

    /// Label-oblivious adjacency: weights of parallel labels combine.
    fn adjacency(&self) -> Vec<Vec<S::Value>> {
        let n = self.state_count;
        let mut a = vec![vec![self.semiring.zero(); n]; n];
        for ((from, _, to), w) in &self.transition_weights {
            a[from.0][to.0] = self.semiring.plus(&a[from.0][to.0], w);
        }
        a
    }

    /// All-pairs algebraic closure `⊕_{k ≥ 0} A^k`, computed by
    /// iterating `D ← I ⊕ D·A` to a fixpoint. For the two idempotent
    /// instances cycles never improve a path weight, so the iteration
    /// stabilizes within `|Q|` rounds; one extra round certifies it.
    pub fn closure(&self) -> Result<Vec<Vec<S::Value>>, WeightedError> {
        if !self.semiring.idempotent() {
            return Err(WeightedError::NotIdempotent);
        }
        let n = self.state_count;
        let a = self.adjacency();
        let identity = |i: usize, j: usize| {
            if i == j {
                self.semiring.one()
            } else {
                self.semiring.zero()
            }
        };
        let mut d: Vec<Vec<S::Value>> = (0..n)
            .map(|i| (0..n).map(|j| identity(i, j)).collect())
            .collect();
        for _round in 0..=n + 1 {
            let mut next: Vec<Vec<S::Value>> = (0..n)
                .map(|i| (0..n).map(|j| identity(i, j)).collect())
                .collect();
            let mut changed = false;
            for i in 0..n {
                for j in 0..n {
                    let mut acc = next[i][j].clone();
                    for (k, ak) in a.iter().enumerate() {
                        let via = self.semiring.times(&d[i][k], &ak[j]);
                        acc = self.semiring.plus(&acc, &via);
                    }
                    if acc != d[i][j] {
                        changed = true;
                    }
                    next[i][j] = acc;
                }
            }
            if !changed {
                return Ok(d);
            }
            d = next;
        }
        Err(WeightedError::ClosureDiverged)
    }

    /// The sum over all accepting paths of their weights: distances
    /// from the initial state combined with final weights.
    pub fn shortest_distance(&self) -> Result<S::Value, WeightedError> {
        let d = self.closure()?;
        let mut acc = self.semiring.zero();
        for (state, fw) in &self.final_weights {
            let via = self.semiring.times(&d[self.initial.0][state.0], fw);
            acc = self.semiring.plus(&acc, &via);
        }
        Ok(acc)
    }
}

impl WeightedAutomaton<BitSemiring> {
    /// Whether some accepting path carries a non-zero word.
    pub fn non_zero_words(&self) -> Result<bool, WeightedError> {
        Ok(!self.shortest_distance()?.is_zero())
    }
}

/// Interval set denoted by a bit word: bit `i` selects the `i`-th
/// canonical interval for maximum constant `c`.
pub fn bits_to_intervals(word: &BitWord, c: u64) -> IntervalSet {
    assert_eq!(
        word.len(),
        (8 * c + 2) as usize,
        "bit-word length does not match the maximum constant"
    );
    from_canonical_indices(word.indices(), c)
}

/// Inverse encoding; errors when the set's endpoints are not on the
/// half grid of `c`.
pub fn intervals_to_bits(set: &IntervalSet, c: u64) -> Result<BitWord, IntervalError> {
    let indices = to_canonical_indices(set, c)?;
    Ok(BitWord::from_indices((8 * c + 2) as usize, indices))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym() -> SymbolId {
        SymbolId(0)
    }

    #[test]
    fn bit_semiring_identities() {
        let s = BitSemiring::for_max_constant(1);
        assert_eq!(s.word_len, 10);
        let w = BitWord::parse("0110011001").unwrap();
        assert_eq!(s.plus(&w, &s.zero()), w);
        assert_eq!(s.times(&w, &s.one()), w);
        assert_eq!(s.times(&w, &s.zero()), s.zero());
    }

    #[test]
    fn min_plus_identities() {
        let s = MinPlus;
        let v = PriceValue::Finite(7);
        assert_eq!(s.plus(&v, &s.zero()), v);
        assert_eq!(s.times(&v, &s.one()), v);
        assert_eq!(s.times(&v, &s.zero()), s.zero());
        assert_eq!(
            s.plus(&PriceValue::Finite(3), &PriceValue::Finite(5)),
            PriceValue::Finite(3)
        );
    }

    #[test]
    fn path_weight_zero_on_non_final_endpoint() {
        let s = MinPlus;
        let mut wa = WeightedAutomaton::new(s, 2, WaState(0));
        wa.add_transition_weight(WaState(0), sym(), WaState(1), PriceValue::Finite(3));
        assert_eq!(
            wa.path_weight(&[WaState(0), WaState(1)], &[sym()]),
            PriceValue::Infinite
        );
        wa.set_final_weight(WaState(1), PriceValue::Finite(0));
        assert_eq!(
            wa.path_weight(&[WaState(0), WaState(1)], &[sym()]),
            PriceValue::Finite(3)
        );
    }

    #[test]
    fn empty_path_weight_is_final_weight() {
        let s = MinPlus;
        let mut wa = WeightedAutomaton::new(s, 1, WaState(0));
        wa.set_final_weight(WaState(0), PriceValue::Finite(0));
        assert_eq!(wa.path_weight(&[WaState(0)], &[]), PriceValue::Finite(0));
    }

    #[test]
    fn single_state_behavior_on_empty_word() {
        let s = BitSemiring::for_max_constant(0);
        let mut wa = WeightedAutomaton::new(s, 1, WaState(0));
        let weight = BitWord::parse("01").unwrap();
        wa.set_final_weight(WaState(0), weight.clone());
        assert_eq!(wa.behavior(&[]), weight);
        assert_eq!(wa.behavior(&[sym()]), s.zero());
    }

    #[test]
    fn four_state_chain_multiplies_weights() {
        // States for a chain of three tiles plus a detached one: the
        // path weight is the product of its transition words and the
        // final word.
        let s = BitSemiring::for_max_constant(0);
        let mut wa = WeightedAutomaton::new(s, 4, WaState(0));
        let w_q0 = BitWord::parse("11").unwrap();
        let w_q = BitWord::parse("01").unwrap();
        let w_f = BitWord::parse("11").unwrap();
        wa.add_transition_weight(WaState(0), sym(), WaState(2), w_q0.clone());
        wa.add_transition_weight(WaState(2), sym(), WaState(3), w_q.clone());
        wa.set_final_weight(WaState(3), w_f.clone());
        let path = [WaState(0), WaState(2), WaState(3)];
        let expect = w_q0.and(&w_q).and(&w_f);
        assert_eq!(wa.path_weight(&path, &[sym(), sym()]), expect);
    }

    #[test]
    fn behavior_sums_parallel_paths() {
        let s = MinPlus;
        let mut wa = WeightedAutomaton::new(s, 4, WaState(0));
        wa.add_transition_weight(WaState(0), sym(), WaState(1), PriceValue::Finite(3));
        wa.add_transition_weight(WaState(0), sym(), WaState(2), PriceValue::Finite(5));
        wa.add_transition_weight(WaState(1), sym(), WaState(3), PriceValue::Finite(0));
        wa.add_transition_weight(WaState(2), sym(), WaState(3), PriceValue::Finite(0));
        wa.set_final_weight(WaState(3), PriceValue::Finite(0));
        assert_eq!(wa.behavior(&[sym(), sym()]), PriceValue::Finite(3));
        assert_eq!(wa.behavior(&[sym()]), PriceValue::Infinite);
        assert_eq!(wa.behavior(&[]), PriceValue::Infinite);
    }

    #[test]
    fn min_plus_diamond_distance() {
        let s = MinPlus;
        let mut wa = WeightedAutomaton::new(s, 4, WaState(0));
        wa.add_transition_weight(WaState(0), sym(), WaState(1), PriceValue::Finite(2));
        wa.add_transition_weight(WaState(0), sym(), WaState(2), PriceValue::Finite(1));
        wa.add_transition_weight(WaState(1), sym(), WaState(3), PriceValue::Finite(1));
        wa.add_transition_weight(WaState(2), sym(), WaState(3), PriceValue::Finite(3));
        wa.set_final_weight(WaState(3), PriceValue::Finite(0));
        assert_eq!(wa.shortest_distance().unwrap(), PriceValue::Finite(3));
    }

    #[test]
    fn unreachable_final_gives_zero() {
        let s = BitSemiring::for_max_constant(0);
        let mut wa = WeightedAutomaton::new(s, 2, WaState(0));
        wa.set_final_weight(WaState(1), s.one());
        assert_eq!(wa.shortest_distance().unwrap(), s.zero());
        assert!(!wa.non_zero_words().unwrap());
    }

    #[test]
    fn no_final_state_means_zero_words() {
        let s = BitSemiring::for_max_constant(0);
        let wa = WeightedAutomaton::new(s, 3, WaState(0));
        assert!(!wa.non_zero_words().unwrap());
    }

    #[test]
    fn closure_handles_cycles() {
        // A self-loop must not prevent convergence.
        let s = BitSemiring::for_max_constant(0);
        let mut wa = WeightedAutomaton::new(s, 2, WaState(0));
        let w = BitWord::parse("10").unwrap();
        wa.add_transition_weight(WaState(0), sym(), WaState(0), w.clone());
        wa.add_transition_weight(WaState(0), sym(), WaState(1), w.clone());
        wa.set_final_weight(WaState(1), s.one());
        assert_eq!(wa.shortest_distance().unwrap(), w);
        assert!(wa.non_zero_words().unwrap());
    }

    #[test]
    fn interval_word_bijection_fixed_words() {
        // Spot values for word length 10 (maximum constant 1).
        let c = 1;
        let w = BitWord::parse("0111000000").unwrap();
        assert_eq!(bits_to_intervals(&w, c).to_string(), "(0, 1)");
        let w = BitWord::parse("0000001111").unwrap();
        assert_eq!(bits_to_intervals(&w, c).to_string(), "[3/2, +inf)");
        let w = BitWord::parse("0111111110").unwrap();
        assert_eq!(bits_to_intervals(&w, c).to_string(), "(0, 2]");
    }

    #[test]
    fn parallel_transitions_combine_additively() {
        let s = BitSemiring::for_max_constant(0);
        let mut wa = WeightedAutomaton::new(s, 2, WaState(0));
        wa.add_transition_weight(WaState(0), sym(), WaState(1), BitWord::parse("10").unwrap());
        wa.add_transition_weight(WaState(0), sym(), WaState(1), BitWord::parse("01").unwrap());
        assert_eq!(
            wa.transition_weight(WaState(0), sym(), WaState(1)),
            BitWord::parse("11").unwrap()
        );
    }
}
