//! Property tests for the semiring instances, the interval/word
//! bijection, and the algebraic shortest distance.

use proptest::prelude::*;
use tadiff_core::interval::{canonical_interval_count, from_canonical_indices};
use tadiff_core::ta::SymbolId;
use tadiff_core::weighted::{
    bits_to_intervals, intervals_to_bits, BitSemiring, BitWord, MinPlus, PriceValue, Semiring,
    WaState, WeightedAutomaton,
};

fn bitword(len: usize) -> impl Strategy<Value = BitWord> {
    proptest::collection::vec(any::<bool>(), len).prop_map(move |bits| {
        let mut w = BitWord::zeros(len);
        for (i, b) in bits.into_iter().enumerate() {
            w.set(i, b);
        }
        w
    })
}

fn price() -> impl Strategy<Value = PriceValue> {
    prop_oneof![
        9 => (0u64..1000).prop_map(PriceValue::Finite),
        1 => Just(PriceValue::Infinite),
    ]
}

/// All seven semiring laws, checked pointwise on random triples.
fn laws<S: Semiring>(s: &S, a: &S::Value, b: &S::Value, c: &S::Value) {
    let plus = |x: &S::Value, y: &S::Value| s.plus(x, y);
    let times = |x: &S::Value, y: &S::Value| s.times(x, y);
    // Associativity of both operations.
    assert_eq!(plus(&plus(a, b), c), plus(a, &plus(b, c)));
    assert_eq!(times(&times(a, b), c), times(a, &times(b, c)));
    // Commutativity of the sum.
    assert_eq!(plus(a, b), plus(b, a));
    // Identities.
    assert_eq!(plus(a, &s.zero()), a.clone());
    assert_eq!(times(a, &s.one()), a.clone());
    assert_eq!(times(&s.one(), a), a.clone());
    // Distributivity on both sides.
    assert_eq!(times(a, &plus(b, c)), plus(&times(a, b), &times(a, c)));
    assert_eq!(times(&plus(a, b), c), plus(&times(a, c), &times(b, c)));
    // Annihilation.
    assert_eq!(times(a, &s.zero()), s.zero());
    assert_eq!(times(&s.zero(), a), s.zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn bit_semiring_laws(a in bitword(18), b in bitword(18), c in bitword(18)) {
        laws(&BitSemiring { word_len: 18 }, &a, &b, &c);
    }

    #[test]
    fn min_plus_laws(a in price(), b in price(), c in price()) {
        laws(&MinPlus, &a, &b, &c);
    }

    #[test]
    fn bijection_round_trip_large_constant(w in bitword(82)) {
        // Maximum constant 10: 82 canonical intervals.
        let set = bits_to_intervals(&w, 10);
        prop_assert_eq!(intervals_to_bits(&set, 10).unwrap(), w);
    }
}

#[test]
fn bijection_round_trip_exhaustive_small_constant() {
    // Every word of length 10 (maximum constant 1).
    let k = canonical_interval_count(1);
    assert_eq!(k, 10);
    for pattern in 0u32..(1 << k) {
        let mut w = BitWord::zeros(k);
        for i in 0..k {
            w.set(i, pattern & (1 << i) != 0);
        }
        let set = bits_to_intervals(&w, 1);
        assert_eq!(intervals_to_bits(&set, 1).unwrap(), w, "word {w}");
        // The set decodes back to the same canonical indices.
        let indices = w.indices();
        assert_eq!(from_canonical_indices(indices, 1), set);
    }
}

/// Brute-force sum over all paths of bounded length, for comparison
/// with the algebraic closure.
fn brute_distance<S: Semiring>(wa: &WeightedAutomaton<S>, max_len: usize) -> S::Value {
    let s = &wa.semiring;
    let mut acc = s.zero();
    let mut frontier: Vec<(WaState, S::Value)> = vec![(wa.initial, s.one())];
    for _ in 0..=max_len {
        let mut next = Vec::new();
        for (state, weight) in &frontier {
            if let Some(fw) = wa.final_weights.get(state) {
                acc = s.plus(&acc, &s.times(weight, fw));
            }
            for ((from, _, to), w) in &wa.transition_weights {
                if from == state {
                    next.push((*to, s.times(weight, w)));
                }
            }
        }
        frontier = next;
    }
    acc
}

fn arbitrary_bit_wa(seed: u64, states: usize, k: usize) -> WeightedAutomaton<BitSemiring> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let s = BitSemiring { word_len: k };
    let mut wa = WeightedAutomaton::new(s, states, WaState(0));
    for from in 0..states {
        for to in 0..states {
            if rng.random_bool(0.45) {
                let mut w = BitWord::zeros(k);
                for i in 0..k {
                    w.set(i, rng.random_bool(0.5));
                }
                wa.add_transition_weight(WaState(from), SymbolId(0), WaState(to), w);
            }
        }
    }
    for state in 0..states {
        if rng.random_bool(0.4) {
            let mut w = BitWord::zeros(k);
            for i in 0..k {
                w.set(i, rng.random_bool(0.5));
            }
            wa.set_final_weight(WaState(state), w);
        }
    }
    wa
}

#[test]
fn shortest_distance_matches_path_enumeration() {
    // Words only shrink under AND along a path, so paths longer than
    // the state count add nothing: the brute sum converges by then and
    // doubling the cutoff must not change it.
    for seed in 0..60 {
        let wa = arbitrary_bit_wa(seed, 4, 8);
        let exact = wa.shortest_distance().unwrap();
        let short = brute_distance(&wa, wa.state_count);
        let long = brute_distance(&wa, 2 * wa.state_count);
        assert_eq!(short, long, "cutoff sensitivity on seed {seed}");
        assert_eq!(exact, short, "closure mismatch on seed {seed}");
    }
}

#[test]
fn behavior_is_absorbed_by_shortest_distance() {
    // Summing the behavior over all words up to length 4 gives a
    // prefix of the total: adding it to the distance changes nothing.
    for seed in 0..30 {
        let wa = arbitrary_bit_wa(seed, 4, 6);
        let s = wa.semiring;
        let total = wa.shortest_distance().unwrap();
        let mut partial = s.zero();
        for len in 0..=4usize {
            let word = vec![SymbolId(0); len];
            partial = s.plus(&partial, &wa.behavior(&word));
        }
        assert_eq!(s.plus(&total, &partial), total, "seed {seed}");
    }
}

#[test]
fn non_idempotent_semirings_are_rejected() {
    // A counting semiring over naturals is a semiring but not
    // idempotent; the distance iteration refuses it.
    #[derive(Clone, Copy, Debug)]
    struct Counting;
    impl Semiring for Counting {
        type Value = u64;
        fn zero(&self) -> u64 {
            0
        }
        fn one(&self) -> u64 {
            1
        }
        fn plus(&self, a: &u64, b: &u64) -> u64 {
            a + b
        }
        fn times(&self, a: &u64, b: &u64) -> u64 {
            a * b
        }
        fn idempotent(&self) -> bool {
            false
        }
    }
    let wa = WeightedAutomaton::new(Counting, 2, WaState(0));
    assert!(wa.shortest_distance().is_err());
}
