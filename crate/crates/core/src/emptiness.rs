//! Büchi emptiness checking for parameter-free timed automata with
//! integer constants, over the extrapolated zone graph.
//!
//! Non-emptiness is decided by searching for a reachable strongly
//! connected component that contains an accepting location and can be
//! iterated with divergent time: every clock is either reset inside the
//! component or never compared from above there. Cycles failing that
//! condition admit only time-convergent iterations and are pruned.
//!
//! A returned [`Witness`] is a lasso skeleton over the input transition
//! ids; [`replay_witness`] searches for concrete rational delays that
//! realize it.

use crate::dbm::DbmZone;
use crate::guard::{Atom, Bound, ClockId, Op};
use crate::rational::{int, ratio, Rational};
use crate::ta::{LocId, TaError, TimedAutomaton, TransId};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmptinessError {
    #[error(transparent)]
    Ta(#[from] TaError),
    #[error("witness does not describe a path in the automaton")]
    InvalidWitness,
}

/// Lasso-shaped evidence of non-emptiness: a finite prefix from the
/// initial location followed by a repeatable cycle visiting an
/// accepting location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub prefix: Vec<TransId>,
    pub cycle: Vec<TransId>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let render = |ts: &[TransId]| {
            ts.iter()
                .map(|t| format!("t{}", t.0))
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(
            f,
            "prefix: {} / cycle: {}",
            render(&self.prefix),
            render(&self.cycle)
        )
    }
}

impl Witness {
    /// Parses the `prefix: t0 t1 / cycle: t2` line format.
    pub fn parse(s: &str) -> Option<Witness> {
        let (p, c) = s.split_once('/')?;
        let p = p.trim().strip_prefix("prefix:")?;
        let c = c.trim().strip_prefix("cycle:")?;
        let parse_ids = |part: &str| -> Option<Vec<TransId>> {
            part.split_whitespace()
                .map(|tok| tok.strip_prefix('t')?.parse::<usize>().ok().map(TransId))
                .collect()
        };
        Some(Witness {
            prefix: parse_ids(p)?,
            cycle: parse_ids(c)?,
        })
    }
}

/// A transition expanded to a single conjunctive clause.
#[derive(Debug, Clone)]
struct ClauseTransition {
    orig: TransId,
    source: LocId,
    target: LocId,
    atoms: Vec<Atom>,
    resets: BTreeSet<ClockId>,
}

/// Expands guards into conjunctive clauses, dropping clauses that are
/// unsatisfiable on their own.
fn clause_transitions(ta: &TimedAutomaton) -> Vec<ClauseTransition> {
    let n = ta.clocks.len();
    let mut out = Vec::new();
    for (i, t) in ta.transitions.iter().enumerate() {
        for atoms in t.guard.dnf_clauses() {
            let mut zone = DbmZone::universal(n);
            for a in &atoms {
                zone.constrain_atom(a);
            }
            if zone.is_empty() {
                continue;
            }
            out.push(ClauseTransition {
                orig: TransId(i),
                source: t.source,
                target: t.target,
                atoms,
                resets: t.resets.clone(),
            });
        }
    }
    out
}

struct ZoneGraph {
    /// (from node, to node, clause transition index); node ids are
    /// assigned in discovery order, 0 being the initial node.
    edges: Vec<(usize, usize, usize)>,
    accepting: BTreeSet<usize>,
}

fn build_zone_graph(
    ta: &TimedAutomaton,
    clauses: &[ClauseTransition],
    initial_valuation: Option<&[i64]>,
    max_const: i64,
) -> ZoneGraph {
    let n = ta.clocks.len();
    let mut start = match initial_valuation {
        None => DbmZone::zero(n),
        Some(vals) => {
            let mut z = DbmZone::universal(n);
            z.constrain_point(vals);
            z
        }
    };
    start.up();
    start.extrapolate(max_const);

    let mut nodes = vec![(ta.initial, start)];
    let mut index: HashMap<(LocId, DbmZone), usize> = HashMap::new();
    index.insert(nodes[0].clone(), 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);

    while let Some(id) = queue.pop_front() {
        let (loc, zone) = nodes[id].clone();
        for (ci, ct) in clauses.iter().enumerate() {
            if ct.source != loc {
                continue;
            }
            let mut succ = zone.clone();
            for a in &ct.atoms {
                succ.constrain_atom(a);
            }
            if succ.is_empty() {
                continue;
            }
            for c in &ct.resets {
                succ.reset(c.0 + 1);
            }
            succ.up();
            succ.extrapolate(max_const);
            let key = (ct.target, succ);
            let next = match index.get(&key) {
                Some(&i) => i,
                None => {
                    let i = nodes.len();
                    nodes.push(key.clone());
                    index.insert(key, i);
                    queue.push_back(i);
                    i
                }
            };
            edges.push((id, next, ci));
        }
    }

    let accepting = nodes
        .iter()
        .enumerate()
        .filter(|(_, (l, _))| ta.accepting.contains(l))
        .map(|(i, _)| i)
        .collect();
    ZoneGraph { edges, accepting }
}

/// Strongly connected components of the subgraph induced by the given
/// edge indices, as sorted node lists, ordered by smallest node id.
fn sccs_of(edge_ids: &[usize], edges: &[(usize, usize, usize)]) -> Vec<Vec<usize>> {
    use petgraph::graph::{DiGraph, NodeIndex};

    let mut nodes: BTreeSet<usize> = BTreeSet::new();
    for &e in edge_ids {
        nodes.insert(edges[e].0);
        nodes.insert(edges[e].1);
    }
    let node_list: Vec<usize> = nodes.into_iter().collect();
    let mut compact: HashMap<usize, NodeIndex> = HashMap::new();
    let mut g: DiGraph<usize, ()> = DiGraph::new();
    for &n in &node_list {
        compact.insert(n, g.add_node(n));
    }
    for &e in edge_ids {
        g.add_edge(compact[&edges[e].0], compact[&edges[e].1], ());
    }
    let mut comps: Vec<Vec<usize>> = petgraph::algo::tarjan_scc(&g)
        .into_iter()
        .map(|comp| {
            let mut ids: Vec<usize> = comp.into_iter().map(|ix| g[ix]).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Searches for a component that is accepting and iterable with
/// divergent time. Returns its node set and internal edge ids.
fn find_live_component(
    graph: &ZoneGraph,
    clauses: &[ClauseTransition],
    clock_count: usize,
    edge_ids: Vec<usize>,
) -> Option<(Vec<usize>, Vec<usize>)> {
    for comp in sccs_of(&edge_ids, &graph.edges) {
        let members: BTreeSet<usize> = comp.iter().copied().collect();
        let internal: Vec<usize> = edge_ids
            .iter()
            .copied()
            .filter(|&e| members.contains(&graph.edges[e].0) && members.contains(&graph.edges[e].1))
            .collect();
        if internal.is_empty() {
            continue;
        }
        // An upper-bound atom on a clock never reset inside the
        // component can be satisfied only finitely often once time
        // diverges, so such edges cannot be part of a live cycle.
        let mut doomed: BTreeSet<usize> = BTreeSet::new();
        for clock in 0..clock_count {
            let c = ClockId(clock);
            let reset_here = internal
                .iter()
                .any(|&e| clauses[graph.edges[e].2].resets.contains(&c));
            if reset_here {
                continue;
            }
            for &e in &internal {
                let has_upper = clauses[graph.edges[e].2]
                    .atoms
                    .iter()
                    .any(|a| a.clock == c && a.op.bounds_above());
                if has_upper {
                    doomed.insert(e);
                }
            }
        }
        if doomed.is_empty() {
            if comp.iter().any(|n| graph.accepting.contains(n)) {
                return Some((comp, internal));
            }
            continue;
        }
        let reduced: Vec<usize> = internal
            .iter()
            .copied()
            .filter(|e| !doomed.contains(e))
            .collect();
        if reduced.is_empty() {
            continue;
        }
        if let Some(found) = find_live_component(graph, clauses, clock_count, reduced) {
            return Some(found);
        }
    }
    None
}

/// Breadth-first path from `from` to `to` over the given edges,
/// returned as edge ids; `None` if unreachable. An empty path is
/// returned when `from == to` and `allow_empty` holds.
fn bfs_path(
    graph: &ZoneGraph,
    edge_ids: &[usize],
    from: usize,
    to: usize,
    allow_empty: bool,
) -> Option<Vec<usize>> {
    if from == to && allow_empty {
        return Some(Vec::new());
    }
    let mut pred: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(u) = queue.pop_front() {
        for &e in edge_ids {
            if graph.edges[e].0 != u {
                continue;
            }
            let v = graph.edges[e].1;
            if v == to {
                let mut path = vec![e];
                let mut cur = u;
                while cur != from {
                    let pe = pred[&cur];
                    path.push(pe);
                    cur = graph.edges[pe].0;
                }
                path.reverse();
                return Some(path);
            }
            if seen.insert(v) {
                pred.insert(v, e);
                queue.push_back(v);
            }
        }
    }
    None
}

/// Result of a non-emptiness check, carrying the analyzed automaton's
/// witness when the language is non-empty.
pub fn buchi_nonempty(ta: &TimedAutomaton) -> Result<Option<Witness>, EmptinessError> {
    buchi_nonempty_from(ta, None)
}

/// Variant starting from an explicit integer clock valuation instead of
/// all zeros; the slice length must equal the clock count.
pub fn buchi_nonempty_from(
    ta: &TimedAutomaton,
    initial_valuation: Option<&[i64]>,
) -> Result<Option<Witness>, EmptinessError> {
    ta.validate()?;
    if ta.has_parameter() {
        return Err(EmptinessError::Ta(TaError::ParameterPresent));
    }
    let max_const = ta.max_constant()? as i64;
    let clauses = clause_transitions(ta);
    let graph = build_zone_graph(ta, &clauses, initial_valuation, max_const);

    let all_edges: Vec<usize> = (0..graph.edges.len()).collect();
    let live = find_live_component(&graph, &clauses, ta.clocks.len(), all_edges.clone());
    let (members, internal) = match live {
        Some(x) => x,
        None => return Ok(None),
    };

    // Anchor the cycle at the smallest accepting node of the component.
    let anchor = *members
        .iter()
        .find(|n| graph.accepting.contains(n))
        .expect("live component has an accepting node");

    // The cycle must reset every clock that is bounded from above
    // somewhere in the component, or its iterations would squeeze time.
    let mut required_edges: Vec<usize> = Vec::new();
    for clock in 0..ta.clocks.len() {
        let c = ClockId(clock);
        let has_upper = internal.iter().any(|&e| {
            clauses[graph.edges[e].2]
                .atoms
                .iter()
                .any(|a| a.clock == c && a.op.bounds_above())
        });
        if !has_upper {
            continue;
        }
        let reset_edge = internal
            .iter()
            .copied()
            .find(|&e| clauses[graph.edges[e].2].resets.contains(&c))
            .expect("live component resets every upper-bounded clock");
        if !required_edges.contains(&reset_edge) {
            required_edges.push(reset_edge);
        }
    }

    let mut cycle_edges: Vec<usize> = Vec::new();
    let mut cur = anchor;
    for &req in &required_edges {
        let seg = bfs_path(&graph, &internal, cur, graph.edges[req].0, true)
            .expect("component is strongly connected");
        cycle_edges.extend(seg);
        cycle_edges.push(req);
        cur = graph.edges[req].1;
    }
    let back = bfs_path(&graph, &internal, cur, anchor, cur != anchor)
        .expect("component is strongly connected");
    cycle_edges.extend(back);
    if cycle_edges.is_empty() {
        // No required edges and the anchor loops to itself only via a
        // non-trivial path.
        let around = bfs_path(&graph, &internal, anchor, anchor, false)
            .expect("live component has an internal cycle");
        cycle_edges = around;
    }

    let prefix_edges =
        bfs_path(&graph, &all_edges, 0, anchor, true).expect("live component is reachable");

    let to_trans = |es: &[usize]| {
        es.iter()
            .map(|&e| clauses[graph.edges[e].2].orig)
            .collect::<Vec<_>>()
    };
    Ok(Some(Witness {
        prefix: to_trans(&prefix_edges),
        cycle: to_trans(&cycle_edges),
    }))
}

/// Outcome of a successful replay: one delay per lasso step.
#[derive(Debug, Clone)]
pub struct Replay {
    /// Delays for prefix then cycle, all strictly positive.
    pub delays: Vec<Rational>,
    /// Whether iterating the cycle with exactly these delays returns to
    /// the same clock valuation (clocks reset in the cycle) while
    /// unreset clocks only face lower bounds.
    pub periodic: bool,
}

struct LassoStep {
    trans: TransId,
}

fn lasso_steps(ta: &TimedAutomaton, witness: &Witness) -> Result<Vec<LassoStep>, EmptinessError> {
    let mut steps = Vec::new();
    let mut cur = ta.initial;
    for t in witness.prefix.iter().chain(witness.cycle.iter()) {
        let tr = ta
            .transitions
            .get(t.0)
            .ok_or(EmptinessError::InvalidWitness)?;
        if tr.source != cur {
            return Err(EmptinessError::InvalidWitness);
        }
        steps.push(LassoStep { trans: *t });
        cur = tr.target;
    }
    if witness.cycle.is_empty() {
        return Err(EmptinessError::InvalidWitness);
    }
    // The cycle must loop back to where it started.
    let cycle_start = if witness.prefix.is_empty() {
        ta.initial
    } else {
        ta.transitions[witness.prefix.last().unwrap().0].target
    };
    if cur != cycle_start {
        return Err(EmptinessError::InvalidWitness);
    }
    Ok(steps)
}

fn apply_step(ta: &TimedAutomaton, v: &mut [Rational], step: TransId, delay: Rational) {
    for x in v.iter_mut() {
        *x += delay;
    }
    for c in &ta.transitions[step.0].resets {
        v[c.0] = int(0);
    }
}

/// Depth-first search state for the delay assignment of one lasso.
struct ReplaySearch<'a> {
    ta: &'a TimedAutomaton,
    steps: &'a [LassoStep],
    /// Per step, the disjunctive clauses of its guard.
    clauses: Vec<Vec<Vec<Atom>>>,
    prefix_len: usize,
    denom: i64,
    max_numer: i64,
    /// When periodic: last resetting cycle step per clock, absolute
    /// index; the sum of delays after it must equal the value at the
    /// cycle start.
    periodic: Option<Vec<Option<usize>>>,
    budget: usize,
}

impl<'a> ReplaySearch<'a> {
    /// Grid points of the delay set satisfying some clause from
    /// valuation `v`, ascending. Each clause contributes one rational
    /// interval for the delay, solved from its atoms.
    fn candidates(&self, step: usize, v: &[Rational]) -> Vec<Rational> {
        let mut numerators: Vec<i64> = Vec::new();
        for clause in &self.clauses[step] {
            // d ranges over (lo, hi) within the grid; bounds start at
            // the positivity requirement.
            let mut lo = int(0);
            let mut lo_strict = true;
            let mut hi = ratio(self.max_numer, self.denom);
            let mut hi_strict = false;
            let mut feasible = true;
            for a in clause {
                let c = match a.bound {
                    Bound::Const(c) => c,
                    Bound::Param => unreachable!("parameter-free at replay"),
                };
                let rhs = c - v[a.clock.0];
                match a.op {
                    Op::Lt | Op::Le => {
                        let strict = a.op == Op::Lt;
                        if rhs < hi || (rhs == hi && strict && !hi_strict) {
                            hi = rhs;
                            hi_strict = strict;
                        }
                    }
                    Op::Gt | Op::Ge => {
                        let strict = a.op == Op::Gt;
                        if rhs > lo || (rhs == lo && strict && !lo_strict) {
                            lo = rhs;
                            lo_strict = strict;
                        }
                    }
                    Op::Eq => {
                        if rhs < lo || (rhs == lo && lo_strict) {
                            feasible = false;
                            break;
                        }
                        lo = rhs;
                        lo_strict = false;
                        if rhs < hi || (rhs == hi && hi_strict) {
                            hi = rhs;
                            hi_strict = false;
                        }
                    }
                }
            }
            if !feasible {
                continue;
            }
            // Smallest and largest grid numerators inside the interval.
            let scaled_lo = lo * int(self.denom);
            let mut n_lo = scaled_lo.ceil().to_integer();
            if lo_strict && int(n_lo) == scaled_lo {
                n_lo += 1;
            }
            n_lo = n_lo.max(1);
            let scaled_hi = hi * int(self.denom);
            let mut n_hi = scaled_hi.floor().to_integer();
            if hi_strict && int(n_hi) == scaled_hi {
                n_hi -= 1;
            }
            n_hi = n_hi.min(self.max_numer);
            for n in n_lo..=n_hi {
                numerators.push(n);
            }
        }
        numerators.sort_unstable();
        numerators.dedup();
        numerators
            .into_iter()
            .map(|n| ratio(n, self.denom))
            .collect()
    }

    fn run(
        &mut self,
        v: &mut Vec<Rational>,
        delays: &mut Vec<Rational>,
        start_vals: &mut Vec<Rational>,
        trailing: &mut Vec<Rational>,
    ) -> bool {
        let i = delays.len();
        if i == self.prefix_len {
            start_vals.clone_from(v);
            if let Some(last_reset) = &self.periodic {
                // A clock reset on the last cycle step ends at zero, so
                // it must also start at zero; one reset earlier leaves a
                // positive trailing sum, which a zero start contradicts.
                let c = self.steps.len() - self.prefix_len;
                for (x, lr) in last_reset.iter().enumerate() {
                    if let Some(lr) = lr {
                        let ends_zero = *lr == self.prefix_len + c - 1;
                        if ends_zero != (start_vals[x] == int(0)) {
                            return false;
                        }
                    }
                }
            }
        }
        if i == self.steps.len() {
            match &self.periodic {
                None => return true,
                Some(last_reset) => {
                    return last_reset.iter().enumerate().all(|(x, lr)| match lr {
                        None => true,
                        Some(_) => trailing[x] == start_vals[x],
                    });
                }
            }
        }
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        for d in self.candidates(i, v) {
            // Trailing sums towards the periodicity targets can only
            // grow; cut as soon as one overshoots.
            let mut pruned = false;
            if let Some(last_reset) = &self.periodic {
                if i >= self.prefix_len {
                    for (x, lr) in last_reset.iter().enumerate() {
                        if matches!(lr, Some(l) if i > *l) && trailing[x] + d > start_vals[x] {
                            pruned = true;
                            break;
                        }
                    }
                }
            }
            if pruned {
                continue;
            }
            let saved_v = v.clone();
            let saved_trailing = trailing.clone();
            if let Some(last_reset) = &self.periodic {
                if i >= self.prefix_len {
                    for (x, lr) in last_reset.iter().enumerate() {
                        if matches!(lr, Some(l) if i > *l) {
                            trailing[x] += d;
                        }
                    }
                }
            }
            apply_step(self.ta, v, self.steps[i].trans, d);
            delays.push(d);
            if self.run(v, delays, start_vals, trailing) {
                return true;
            }
            delays.pop();
            *v = saved_v;
            *trailing = saved_trailing;
        }
        false
    }
}

/// Searches for concrete, strictly positive rational delays realizing
/// the witness lasso: first any satisfying assignment over escalating
/// grid denominators, then a bounded attempt to upgrade it to one whose
/// cycle returns exactly to its starting valuation.
pub fn replay_witness(
    ta: &TimedAutomaton,
    witness: &Witness,
) -> Result<Option<Replay>, EmptinessError> {
    let steps = lasso_steps(ta, witness)?;
    let max_const = ta.max_constant()? as i64;
    let len = steps.len();

    let cycle_resets: BTreeSet<ClockId> = witness
        .cycle
        .iter()
        .flat_map(|t| ta.transitions[t.0].resets.iter().copied())
        .collect();
    // Clocks never reset in the cycle must only face lower bounds
    // there, otherwise exact periodicity is impossible.
    let periodic_possible = (0..ta.clocks.len()).all(|c| {
        let c = ClockId(c);
        cycle_resets.contains(&c)
            || witness.cycle.iter().all(|t| {
                ta.transitions[t.0]
                    .guard
                    .atoms()
                    .iter()
                    .all(|a| a.clock != c || !a.op.bounds_above())
            })
    });
    // Absolute index of the last cycle step resetting each clock.
    let last_reset: Vec<Option<usize>> = (0..ta.clocks.len())
        .map(|x| {
            witness
                .cycle
                .iter()
                .enumerate()
                .rev()
                .find(|(_, t)| ta.transitions[t.0].resets.contains(&ClockId(x)))
                .map(|(j, _)| witness.prefix.len() + j)
        })
        .collect();

    let clauses: Vec<Vec<Vec<Atom>>> = steps
        .iter()
        .map(|s| ta.transitions[s.trans.0].guard.dnf_clauses())
        .collect();

    let mut grids = vec![2i64, 4, 6, 8, 12];
    let adaptive = 2 * (len as i64 + 1);
    if !grids.contains(&adaptive) {
        grids.push(adaptive);
    }

    let attempt = |periodic: bool, denom: i64, budget: usize| -> Option<Vec<Rational>> {
        let mut search = ReplaySearch {
            ta,
            steps: &steps,
            clauses: clauses.clone(),
            prefix_len: witness.prefix.len(),
            denom,
            max_numer: denom * (max_const + 1),
            periodic: periodic.then(|| last_reset.clone()),
            budget,
        };
        let mut delays = Vec::with_capacity(len);
        let found = search.run(
            &mut vec![int(0); ta.clocks.len()],
            &mut delays,
            &mut vec![int(0); ta.clocks.len()],
            &mut vec![int(0); ta.clocks.len()],
        );
        found.then_some(delays)
    };

    // Upgrade to a periodic assignment when cheaply possible.
    if periodic_possible {
        for &denom in &grids {
            if let Some(delays) = attempt(true, denom, 120_000) {
                return Ok(Some(Replay {
                    delays,
                    periodic: true,
                }));
            }
        }
    }
    for &denom in &grids {
        if let Some(delays) = attempt(false, denom, 400_000) {
            return Ok(Some(Replay {
                delays,
                periodic: false,
            }));
        }
    }
    Ok(None)
}

/// Replays the found delays over a second cycle iteration and checks
/// every guard again; used by tests to police witnesses whose cycles
/// cannot actually be repeated.
pub fn verify_second_iteration(
    ta: &TimedAutomaton,
    witness: &Witness,
    replay: &Replay,
) -> Result<bool, EmptinessError> {
    let steps = lasso_steps(ta, witness)?;
    let mut v = vec![int(0); ta.clocks.len()];
    for (k, d) in replay.delays.iter().enumerate() {
        let shifted: Vec<Rational> = v.iter().map(|x| *x + *d).collect();
        if !ta.transitions[steps[k].trans.0].guard.holds(&shifted, None) {
            return Ok(false);
        }
        apply_step(ta, &mut v, steps[k].trans, *d);
    }
    let cycle_delays = &replay.delays[witness.prefix.len()..];
    for (t, d) in witness.cycle.iter().zip(cycle_delays) {
        let shifted: Vec<Rational> = v.iter().map(|x| *x + *d).collect();
        if !ta.transitions[t.0].guard.holds(&shifted, None) {
            return Ok(false);
        }
        apply_step(ta, &mut v, *t, *d);
    }
    Ok(true)
}
