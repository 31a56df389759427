//! Acceptance suite: one test per shipping criterion, each printing a
//! single PASS line with its measured quantities. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use tadiff_core::empcheck::{emp_check, SweepMode};
use tadiff_core::emptiness::{buchi_nonempty, replay_witness};
use tadiff_core::guard::Op;
use tadiff_core::harness::{
    default_library, generate_random_ptta, measure_ladder, random_plain_ta, run_campaign,
    underlying_wa, Adapter, CampaignConfig, GenConfig, MutantKind, RandomTaConfig,
};
use tadiff_core::interval::canonical_interval_count;
use tadiff_core::rational::int;
use tadiff_core::region::{region_nonempty, RegionLimits};
use tadiff_core::ta::{LocId, ParametricTa, TimedAutomaton};
use tadiff_core::tiles::{
    accepting_pair_tile, branching_tile, compute_parameter_set, flatten, WeightKey,
};
use tadiff_core::weighted::{bits_to_intervals, intervals_to_bits, BitWord};
use tadiff_core::{min_cost_brute, priced_oracle, random_priced_tree};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tadiff"))
}

/// Criterion 1: the weighted-automaton oracle and the exhaustive
/// parametric emptiness check agree on every generated instance.
#[test]
fn criterion_1_oracle_checker_equivalence() {
    let library = default_library().unwrap();
    assert!(library.ambient_c <= 10);
    let runs = 200;
    let mut nonempty = 0;
    for i in 0..runs {
        let cfg = GenConfig {
            seed: tadiff_core::harness::derive_seed(0xACCE55, i),
            max_depth: 1 + (i % 4),
            accepting_leaf_probability: 0.6,
        };
        let tta = generate_random_ptta(&cfg, &library).unwrap();
        let oracle = underlying_wa(&tta, &library)
            .unwrap()
            .non_zero_words()
            .unwrap();
        let flat = flatten(&tta).unwrap();
        let pta = ParametricTa::new(flat.ta, "mu").unwrap();
        let checked = emp_check(&pta, SweepMode::Exhaustive).unwrap();
        assert_eq!(
            oracle, checked.nonempty,
            "instance {i}: oracle {oracle}, checker {}",
            checked.nonempty
        );
        if oracle {
            nonempty += 1;
        }
    }
    assert!(nonempty > 0 && nonempty < runs, "degenerate corpus");
    println!(
        "criterion 1 (oracle/checker equivalence): PASS — {runs}/{runs} agree, {nonempty} non-empty"
    );
}

/// Criterion 2: the interval/bit-word bijection reproduces the three
/// reference words exactly and round-trips every word at k = 10.
#[test]
fn criterion_2_interval_bijection() {
    let c = 1;
    let k = canonical_interval_count(c);
    let cases = [
        ("0111000000", "(0, 1)"),
        ("0000001111", "[3/2, +inf)"),
        ("0111111110", "(0, 2]"),
    ];
    for (word, expected) in cases {
        let w = BitWord::parse(word).unwrap();
        let set = bits_to_intervals(&w, c);
        assert_eq!(set.to_string(), expected, "word {word}");
        assert_eq!(intervals_to_bits(&set, c).unwrap(), w);
    }
    for pattern in 0u32..(1 << k) {
        let mut w = BitWord::zeros(k);
        for i in 0..k {
            w.set(i, pattern & (1 << i) != 0);
        }
        assert_eq!(intervals_to_bits(&bits_to_intervals(&w, c), c).unwrap(), w);
    }
    println!(
        "criterion 2 (interval bijection): PASS — 3 reference words exact, {} words round-trip",
        1u32 << k
    );
}

/// Criterion 3: computed tile parameter sets equal the reference sets.
#[test]
fn criterion_3_tile_parameter_sets() {
    // Two-output tile with thresholds 6/4 and an exit bound above 8.
    let mut two_output = branching_tile(6, Op::Gt, 4, Op::Le);
    two_output.out_guard.insert(
        LocId(2),
        tadiff_core::Guard::atom(tadiff_core::Atom::cmp_const(
            tadiff_core::ClockId(1),
            Op::Gt,
            int(8),
        )),
    );
    let ambient = two_output.max_constant().unwrap();
    let high = compute_parameter_set(&two_output, WeightKey::Output(LocId(2)), ambient).unwrap();
    assert_eq!(high.to_string(), "(3, +inf)");
    let low = compute_parameter_set(&two_output, WeightKey::Output(LocId(3)), ambient).unwrap();
    assert_eq!(low.to_string(), "(0, 2]");

    let fused = accepting_pair_tile(4, Op::Gt, 8, Op::Le);
    let ambient = fused.max_constant().unwrap();
    let set = compute_parameter_set(&fused, WeightKey::TileSelf, ambient).unwrap();
    assert_eq!(set.to_string(), "(2, 4]");
    println!("criterion 3 (tile fixtures): PASS — (3, +inf), (0, 2], and (2, 4] all exact");
}

/// Criterion 4: the reference priced run costs, and oracle/brute-force
/// equality over 100 seeded priced trees.
#[test]
fn criterion_4_priced_costs_and_oracle() {
    use tadiff_core::{PricedTa, TimedRun};
    let mut ta = TimedAutomaton::new();
    let q0 = ta.add_location("q0");
    let q1 = ta.add_location("q1");
    let q2 = ta.add_location("q2");
    let q3 = ta.add_location("q3");
    let x = ta.add_clock("x");
    ta.initial = q0;
    ta.accepting.insert(q3);
    let pin = |c: i64| {
        tadiff_core::Guard::and([
            tadiff_core::Guard::atom(tadiff_core::Atom::cmp_const(x, Op::Gt, int(0))),
            tadiff_core::Guard::atom(tadiff_core::Atom::cmp_const(x, Op::Eq, int(c))),
        ])
    };
    ta.add_transition(q0, q1, pin(2), [x]);
    ta.add_transition(q1, q2, pin(3), [x]);
    ta.add_transition(q2, q3, pin(1), [x]);
    let priced = PricedTa {
        base: ta,
        location_cost: vec![1, 2, 1, 1],
        edge_cost: BTreeMap::from([((q0, q1), 4), ((q1, q2), 0), ((q2, q3), 1)]),
    };
    let run = TimedRun::from_delays(&priced, &[q0, q1, q2, q3], &[int(2), int(3), int(1)]);
    assert_eq!(tadiff_core::run_cost(&priced, &run).unwrap(), int(14));
    let prefix = TimedRun::from_delays(&priced, &[q0, q1], &[int(2)]);
    assert_eq!(tadiff_core::run_cost(&priced, &prefix).unwrap(), int(6));

    for seed in 0..100u64 {
        let tree = random_priced_tree(seed, 8);
        assert_eq!(
            priced_oracle(&tree).unwrap(),
            min_cost_brute(&tree).unwrap(),
            "seed {seed}"
        );
    }
    println!(
        "criterion 4 (priced fixtures): PASS — run costs 14 and 6 exact, oracle = brute force on 100/100 trees"
    );
}

/// Criterion 5: the zone checker and the region brute force agree on
/// 500 random automata, and every witness replays concretely.
#[test]
fn criterion_5_checker_cross_validation() {
    let cfg = RandomTaConfig {
        max_locations: 6,
        max_transitions: 10,
        max_constant: 3,
    };
    let limits = RegionLimits {
        max_constant: 4,
        max_locations: 16,
    };
    let runs = 500;
    let mut nonempty = 0;
    for seed in 0..runs {
        let ta = random_plain_ta(seed, &cfg)
            .with_strict_monotonicity()
            .unwrap();
        let witness = buchi_nonempty(&ta).unwrap();
        let brute = region_nonempty(&ta, &limits).unwrap();
        assert_eq!(witness.is_some(), brute, "disagreement on seed {seed}");
        if let Some(w) = witness {
            nonempty += 1;
            let replay = replay_witness(&ta, &w)
                .unwrap()
                .unwrap_or_else(|| panic!("seed {seed}: witness not replayable"));
            assert!(replay.delays.iter().all(|d| *d > int(0)));
        }
    }
    println!(
        "criterion 5 (checker cross-validation): PASS — {runs}/{runs} agree, {nonempty} witnesses replayed"
    );
}

/// Criterion 6: representative-sweep call accounting.
#[test]
fn criterion_6_call_accounting() {
    // All-empty instance with maximum constant 2.
    let mut ta = TimedAutomaton::new();
    let q0 = ta.add_location("q0");
    let q1 = ta.add_location("q1");
    let x = ta.add_clock("x");
    ta.add_clock("y");
    ta.initial = q0;
    ta.accepting.insert(q1);
    ta.add_transition(
        q0,
        q1,
        tadiff_core::Guard::and([
            tadiff_core::Guard::atom(tadiff_core::Atom::cmp_const(x, Op::Lt, int(2))),
            tadiff_core::Guard::atom(tadiff_core::Atom::cmp_const(x, Op::Gt, int(2))),
        ]),
        [],
    );
    ta.add_transition(q1, q1, tadiff_core::Guard::True, []);
    let pta = ParametricTa::new(ta, "mu").unwrap();
    let res = emp_check(&pta, SweepMode::Exhaustive).unwrap();
    assert!(!res.nonempty);
    assert_eq!(res.checker_calls(), 18, "1 + 9 + 8 calls at C = 2");

    // Fail-fast on the parametric loop stops at the first probe.
    let mut ta = TimedAutomaton::new();
    let q0 = ta.add_location("q0");
    let q1 = ta.add_location("q1");
    let q2 = ta.add_location("q2");
    let x = ta.add_clock("x");
    let y = ta.add_clock("y");
    ta.initial = q0;
    ta.accepting.insert(q2);
    ta.add_transition(
        q0,
        q1,
        tadiff_core::Guard::atom(tadiff_core::Atom::cmp_param(y, Op::Eq)),
        [x],
    );
    ta.add_transition(
        q1,
        q2,
        tadiff_core::Guard::and([
            tadiff_core::Guard::atom(tadiff_core::Atom::cmp_param(x, Op::Eq)),
            tadiff_core::Guard::atom(tadiff_core::Atom::cmp_const(y, Op::Gt, int(2))),
        ]),
        [],
    );
    ta.add_transition(q2, q0, tadiff_core::Guard::True, [y]);
    let pta = ParametricTa::new(ta, "mu").unwrap();
    let res = emp_check(&pta, SweepMode::FailFast).unwrap();
    assert!(res.nonempty);
    assert_eq!(res.checker_calls(), 1);
    println!("criterion 6 (call accounting): PASS — 18 exhaustive calls, 1 fail-fast call");
}

/// Criterion 7: each planted mutant is detected within 50 seeded tests.
#[test]
fn criterion_7_fault_injection() {
    let library = default_library().unwrap();
    let mut caught_at = Vec::new();
    for kind in MutantKind::all() {
        let cfg = CampaignConfig {
            seed: 0xFA017,
            runs: 50,
            workers: 4,
            max_depth: 3,
            accepting_leaf_probability: 0.6,
            fast: true,
        };
        let (_, summary) = run_campaign(&cfg, &Adapter::Mutant(kind), &library).unwrap();
        let first = summary
            .failed_ids
            .first()
            .unwrap_or_else(|| panic!("{} not detected within 50 tests", kind.name()));
        caught_at.push(format!("{}@{}", kind.name(), first));
    }
    println!(
        "criterion 7 (fault injection): PASS — {}",
        caught_at.join(", ")
    );
}

/// Criterion 8: campaign output is byte-identical across runs once the
/// timing columns are removed.
#[test]
fn criterion_8_campaign_determinism() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let out = bin()
            .args([
                "harness",
                "--seed",
                "31337",
                "--runs",
                "15",
                "--depth",
                "3",
                "--workers",
                "3",
                "--out",
            ])
            .arg(dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    let strip = |p: &Path| -> String {
        std::fs::read_to_string(p.join("results.csv"))
            .unwrap()
            .lines()
            .map(|l| {
                let c: Vec<&str> = l.split(',').collect();
                format!("{},{},{},{},{}\n", c[0], c[1], c[2], c[3], c[6])
            })
            .collect()
    };
    assert_eq!(strip(dirs[0].path()), strip(dirs[1].path()));
    println!("criterion 8 (campaign determinism): PASS — CSVs identical modulo timing columns");
}

/// Criterion 9: total check time grows monotonically by at least 1.5x
/// per rung across flattened sizes 19, 259, 499.
#[test]
fn criterion_9_measurement_ladder() {
    let mut totals = Vec::new();
    for links in [0usize, 40, 80] {
        let mut best: Option<(usize, f64, usize)> = None;
        for _ in 0..3 {
            let (size, calls) = measure_ladder(links).unwrap();
            let total: f64 = calls.iter().map(|c| c.wall.as_secs_f64()).sum();
            if best.as_ref().is_none_or(|(_, t, _)| total < *t) {
                best = Some((size, total, calls.len()));
            }
        }
        totals.push(best.unwrap());
    }
    assert_eq!(
        totals.iter().map(|(s, _, _)| *s).collect::<Vec<_>>(),
        vec![19, 259, 499]
    );
    // The sweep profile is identical across rungs, and the smallest
    // rung stays within a generous envelope.
    assert!(totals.iter().all(|(_, _, c)| *c == totals[0].2));
    assert!(totals[0].1 < 5.0, "size-19 rung took {:.2}s", totals[0].1);
    for w in totals.windows(2) {
        assert!(
            w[1].1 >= 1.5 * w[0].1,
            "step {} -> {} grew only {:.2}x",
            w[0].0,
            w[1].0,
            w[1].1 / w[0].1
        );
    }
    println!(
        "criterion 9 (measurement ladder): PASS — totals {:.4}s / {:.4}s / {:.4}s over sizes 19/259/499",
        totals[0].1, totals[1].1, totals[2].1
    );
}
