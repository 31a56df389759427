//! Region-automaton brute force: an independent, small-scale oracle for
//! Büchi non-emptiness, built directly on the classic region
//! construction rather than on zones.
//!
//! Deliberately refuses large inputs; it exists to cross-validate the
//! zone-based checker, not to replace it.

use crate::guard::{Atom, Bound, Op};
use crate::ta::{LocId, TaError, TimedAutomaton};
use std::collections::{BTreeSet, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegionError {
    #[error(transparent)]
    Ta(#[from] TaError),
    #[error("input exceeds the brute-force bounds: {0}")]
    RefusedScale(String),
}

/// Scale limits for the oracle.
#[derive(Debug, Clone, Copy)]
pub struct RegionLimits {
    pub max_constant: u64,
    pub max_locations: usize,
}

impl Default for RegionLimits {
    fn default() -> Self {
        RegionLimits {
            max_constant: 4,
            max_locations: 16,
        }
    }
}

/// Qualitative value of one clock relative to the maximum constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum ClockClass {
    /// Exactly the integer `k`, with `k <= M`.
    Exact(i64),
    /// Strictly between `k` and `k + 1`, with `k < M`.
    Open(i64),
    /// Strictly above `M`.
    Large,
}

/// A clock region: per-clock classes plus the ordering of fractional
/// parts of the `Open` clocks, grouped by equality, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Region {
    classes: Vec<ClockClass>,
    frac_order: Vec<Vec<usize>>,
}

impl Region {
    fn origin(clock_count: usize) -> Region {
        Region {
            classes: vec![ClockClass::Exact(0); clock_count],
            frac_order: Vec::new(),
        }
    }

    fn satisfies_atom(&self, atom: &Atom) -> bool {
        let c = match atom.bound {
            Bound::Const(c) => *c.numer(),
            Bound::Param => panic!("parametric atom in region analysis"),
        };
        match (self.classes[atom.clock.0], atom.op) {
            (ClockClass::Exact(k), Op::Lt) => k < c,
            (ClockClass::Exact(k), Op::Le) => k <= c,
            (ClockClass::Exact(k), Op::Eq) => k == c,
            (ClockClass::Exact(k), Op::Ge) => k >= c,
            (ClockClass::Exact(k), Op::Gt) => k > c,
            (ClockClass::Open(k), Op::Lt | Op::Le) => k < c,
            (ClockClass::Open(_), Op::Eq) => false,
            (ClockClass::Open(k), Op::Ge | Op::Gt) => k >= c,
            (ClockClass::Large, Op::Lt | Op::Le | Op::Eq) => false,
            (ClockClass::Large, Op::Ge | Op::Gt) => true,
        }
    }

    fn reset(&self, clocks: impl IntoIterator<Item = usize>) -> Region {
        let mut out = self.clone();
        for c in clocks {
            out.classes[c] = ClockClass::Exact(0);
            for group in &mut out.frac_order {
                group.retain(|&g| g != c);
            }
        }
        out.frac_order.retain(|g| !g.is_empty());
        out
    }

    /// Immediate time successor, or `None` when every clock is already
    /// above the maximum constant.
    fn time_successor(&self, m: i64) -> Option<Region> {
        let exact: Vec<usize> = self
            .classes
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c, ClockClass::Exact(_)))
            .map(|(i, _)| i)
            .collect();
        if !exact.is_empty() {
            // Integer-valued clocks slip into the next open interval and
            // become the smallest fractional group.
            let mut out = self.clone();
            let mut new_group = Vec::new();
            for i in exact {
                let ClockClass::Exact(k) = out.classes[i] else {
                    unreachable!()
                };
                if k < m {
                    out.classes[i] = ClockClass::Open(k);
                    new_group.push(i);
                } else {
                    out.classes[i] = ClockClass::Large;
                }
            }
            if !new_group.is_empty() {
                new_group.sort_unstable();
                out.frac_order.insert(0, new_group);
            }
            return Some(out);
        }
        if let Some(last) = self.frac_order.last() {
            // The largest fractional group reaches the next integer.
            let mut out = self.clone();
            let group = last.clone();
            out.frac_order.pop();
            for i in group {
                let ClockClass::Open(k) = out.classes[i] else {
                    unreachable!()
                };
                out.classes[i] = ClockClass::Exact(k + 1);
            }
            return Some(out);
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct RegionState {
    loc: LocId,
    region: Region,
}

struct RegionEdge {
    from: usize,
    to: usize,
    resets: BTreeSet<usize>,
}

/// Büchi non-emptiness by explicit region-graph search.
///
/// Expects a parameter-free automaton with integer constants, with the
/// strict-monotonicity transformation already applied when strict time
/// semantics are intended.
pub fn region_nonempty(ta: &TimedAutomaton, limits: &RegionLimits) -> Result<bool, RegionError> {
    ta.validate()?;
    if ta.has_parameter() {
        return Err(RegionError::Ta(TaError::ParameterPresent));
    }
    let m = ta.max_constant()?;
    if m > limits.max_constant {
        return Err(RegionError::RefusedScale(format!(
            "max constant {m} exceeds {}",
            limits.max_constant
        )));
    }
    if ta.locations.len() > limits.max_locations {
        return Err(RegionError::RefusedScale(format!(
            "{} locations exceed {}",
            ta.locations.len(),
            limits.max_locations
        )));
    }
    let m = m as i64;

    // One conjunctive clause per analysis transition.
    let mut clauses: Vec<(LocId, LocId, Vec<Atom>, BTreeSet<usize>)> = Vec::new();
    for t in &ta.transitions {
        for atoms in t.guard.dnf_clauses() {
            clauses.push((
                t.source,
                t.target,
                atoms,
                t.resets.iter().map(|c| c.0).collect(),
            ));
        }
    }

    let start = RegionState {
        loc: ta.initial,
        region: Region::origin(ta.clocks.len()),
    };
    let mut states = vec![start.clone()];
    let mut index: HashMap<RegionState, usize> = HashMap::from([(start, 0usize)]);
    let mut edges: Vec<RegionEdge> = Vec::new();
    let mut queue = VecDeque::from([0usize]);

    while let Some(id) = queue.pop_front() {
        let state = states[id].clone();
        // Every region reachable by letting time pass, then a discrete step.
        let mut delayed = vec![state.region.clone()];
        let mut cur = state.region.clone();
        while let Some(next) = cur.time_successor(m) {
            delayed.push(next.clone());
            cur = next;
        }
        for region in &delayed {
            for (source, target, atoms, resets) in &clauses {
                if *source != state.loc {
                    continue;
                }
                if !atoms.iter().all(|a| region.satisfies_atom(a)) {
                    continue;
                }
                let succ = RegionState {
                    loc: *target,
                    region: region.reset(resets.iter().copied()),
                };
                let to = match index.get(&succ) {
                    Some(&i) => i,
                    None => {
                        let i = states.len();
                        states.push(succ.clone());
                        index.insert(succ, i);
                        queue.push_back(i);
                        i
                    }
                };
                edges.push(RegionEdge {
                    from: id,
                    to,
                    resets: resets.clone(),
                });
            }
        }
    }

    let accepting: BTreeSet<usize> = states
        .iter()
        .enumerate()
        .filter(|(_, s)| ta.accepting.contains(&s.loc))
        .map(|(i, _)| i)
        .collect();
    let node_ids: BTreeSet<usize> = (0..states.len()).collect();
    Ok(live_region_scc(
        &states,
        &edges,
        &accepting,
        ta.clocks.len(),
        node_ids,
    ))
}

/// True iff some strongly connected component restricted to `nodes`
/// contains an accepting state, an internal edge, and can iterate with
/// divergent time: every clock is reset inside it or sits above the
/// maximum constant throughout.
fn live_region_scc(
    states: &[RegionState],
    edges: &[RegionEdge],
    accepting: &BTreeSet<usize>,
    clock_count: usize,
    nodes: BTreeSet<usize>,
) -> bool {
    use petgraph::graph::{DiGraph, NodeIndex};

    let mut g: DiGraph<usize, ()> = DiGraph::new();
    let mut compact: HashMap<usize, NodeIndex> = HashMap::new();
    for &n in &nodes {
        compact.insert(n, g.add_node(n));
    }
    for e in edges {
        if nodes.contains(&e.from) && nodes.contains(&e.to) {
            g.add_edge(compact[&e.from], compact[&e.to], ());
        }
    }
    let mut comps: Vec<Vec<usize>> = petgraph::algo::tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut ids: Vec<usize> = c.into_iter().map(|ix| g[ix]).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    comps.sort_by_key(|c| c[0]);

    for comp in comps {
        let members: BTreeSet<usize> = comp.iter().copied().collect();
        let internal: Vec<&RegionEdge> = edges
            .iter()
            .filter(|e| members.contains(&e.from) && members.contains(&e.to))
            .collect();
        if internal.is_empty() {
            continue;
        }
        // A clock never reset in the component must stay above the
        // maximum constant, or delays would have to shrink forever.
        let mut shrunk = members.clone();
        for clock in 0..clock_count {
            if internal.iter().any(|e| e.resets.contains(&clock)) {
                continue;
            }
            shrunk.retain(|&n| states[n].region.classes[clock] == ClockClass::Large);
        }
        if shrunk.len() == members.len() {
            if comp.iter().any(|n| accepting.contains(n)) {
                return true;
            }
            continue;
        }
        if !shrunk.is_empty() && live_region_scc(states, edges, accepting, clock_count, shrunk) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guard::{Atom, Guard, Op};
    use crate::rational::int;

    fn strict(ta: &TimedAutomaton) -> TimedAutomaton {
        ta.with_strict_monotonicity().unwrap()
    }

    #[test]
    fn accepting_self_loop() {
        let mut ta = TimedAutomaton::new();
        let q0 = ta.add_location("q0");
        ta.initial = q0;
        ta.accepting.insert(q0);
        ta.add_transition(q0, q0, Guard::True, []);
        assert!(region_nonempty(&strict(&ta), &RegionLimits::default()).unwrap());
    }

    #[test]
    fn no_transitions_means_empty() {
        let mut ta = TimedAutomaton::new();
        let q0 = ta.add_location("q0");
        ta.initial = q0;
        ta.accepting.insert(q0);
        assert!(!region_nonempty(&strict(&ta), &RegionLimits::default()).unwrap());
    }

    #[test]
    fn zeno_window_without_reset_is_empty() {
        let mut ta = TimedAutomaton::new();
        let q0 = ta.add_location("q0");
        let x = ta.add_clock("x");
        ta.initial = q0;
        ta.accepting.insert(q0);
        ta.add_transition(q0, q0, Guard::atom(Atom::cmp_const(x, Op::Lt, int(2))), []);
        assert!(!region_nonempty(&strict(&ta), &RegionLimits::default()).unwrap());
    }

    #[test]
    fn window_with_reset_is_nonempty() {
        let mut ta = TimedAutomaton::new();
        let q0 = ta.add_location("q0");
        let x = ta.add_clock("x");
        ta.initial = q0;
        ta.accepting.insert(q0);
        ta.add_transition(q0, q0, Guard::atom(Atom::cmp_const(x, Op::Lt, int(2))), [x]);
        assert!(region_nonempty(&strict(&ta), &RegionLimits::default()).unwrap());
    }

    #[test]
    fn refuses_large_inputs() {
        let mut ta = TimedAutomaton::new();
        let q0 = ta.add_location("q0");
        let x = ta.add_clock("x");
        ta.initial = q0;
        ta.add_transition(q0, q0, Guard::atom(Atom::cmp_const(x, Op::Gt, int(9))), []);
        assert!(matches!(
            region_nonempty(&ta, &RegionLimits::default()),
            Err(RegionError::RefusedScale(_))
        ));
    }

    #[test]
    fn time_successor_chain_terminates() {
        let mut r = Region::origin(3);
        let mut steps = 0;
        while let Some(next) = r.time_successor(2) {
            r = next;
            steps += 1;
            assert!(steps < 64, "runaway successor chain");
        }
        assert!(r.classes.iter().all(|c| *c == ClockClass::Large));
    }

    #[test]
    fn exact_clock_ordering_is_tracked() {
        // x reset later than y: fractional parts must stay ordered.
        let r = Region {
            classes: vec![ClockClass::Open(0), ClockClass::Open(1)],
            frac_order: vec![vec![0], vec![1]],
        };
        let next = r.time_successor(2).unwrap();
        // The larger fraction reaches the integer first.
        assert_eq!(next.classes[1], ClockClass::Exact(2));
        assert_eq!(next.classes[0], ClockClass::Open(0));
    }
}
