//! The tile algebra: automaton fragments with input/output locations
//! and compatibility functions, composed through an assume-guarantee
//! transition relation into tiled automata that flatten to plain timed
//! automata.
//!
//! Parameter sets are computed, never trusted: a tile's declared
//! interval set is re-derived by probing one representative value per
//! canonical interval, and productivity checking compares the two.

use crate::dbm::DbmZone;
use crate::empcheck::{EmpCheckError, Representatives};
use crate::emptiness::buchi_nonempty_from;
use crate::guard::{Atom, ClockId, Guard, Op};
use crate::interval::{canonical_interval_count, IntervalSet, Segment};
use crate::rational::{int, ratio, Rational};
use crate::ta::{LocId, SymbolId, TaError, TimedAutomaton};
use crate::weighted::{intervals_to_bits, BitWord};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TileError {
    #[error(transparent)]
    Ta(#[from] TaError),
    #[error("tile `{0}`: {1} is not an input location")]
    NotAnInput(String, String),
    #[error("tile `{0}`: {1} is not an output location")]
    NotAnOutput(String, String),
    #[error("tile `{0}` has no input location")]
    NoInput(String),
    #[error(
        "tile `{0}`: accepting tiles must have no outputs, non-accepting ones no final locations"
    )]
    AcceptingShape(String),
    #[error("compatibility guards must not mention the parameter")]
    ParametricCompatibility,
    #[error("connection from {0} to {1} violates the assume-guarantee constraint")]
    AssumeGuarantee(String, String),
    #[error("connection from {0} to {1} tests and resets a shared clock")]
    ConnectionNotNrt(String, String),
    #[error("tile instance index {0} out of range")]
    BadTile(usize),
    #[error("accepting tile {0} has an outgoing connection")]
    ExitFromAccepting(String),
    #[error("initial tile must have exactly one input location")]
    AmbiguousEntry,
    #[error(transparent)]
    EmpCheck(#[from] Box<EmpCheckError>),
}

/// A timed-automaton fragment with entry and exit interfaces.
///
/// `accepting` non-empty together with empty `outputs` marks an
/// accepting tile. Compatibility functions give, per input location,
/// the guard assumed and the clocks reset on entry, and per output
/// location the guard guaranteed and the clocks reset on exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tile {
    pub name: String,
    pub alphabet: Vec<String>,
    pub locations: Vec<String>,
    pub accepting: BTreeSet<LocId>,
    pub clocks: Vec<String>,
    pub transitions: Vec<crate::ta::Transition>,
    pub inputs: Vec<LocId>,
    pub outputs: Vec<LocId>,
    pub in_guard: BTreeMap<LocId, Guard>,
    pub in_resets: BTreeMap<LocId, BTreeSet<ClockId>>,
    pub out_guard: BTreeMap<LocId, Guard>,
    pub out_resets: BTreeMap<LocId, BTreeSet<ClockId>>,
}

impl Tile {
    pub fn is_accepting(&self) -> bool {
        !self.accepting.is_empty() && self.outputs.is_empty()
    }

    pub fn location_name(&self, l: LocId) -> &str {
        &self.locations[l.0]
    }

    pub fn validate(&self) -> Result<(), TileError> {
        let body = self.body_with_initial(
            *self
                .inputs
                .first()
                .ok_or_else(|| TileError::NoInput(self.name.clone()))?,
        );
        body.validate()?;
        if !self.accepting.is_empty() && !self.outputs.is_empty() {
            return Err(TileError::AcceptingShape(self.name.clone()));
        }
        for i in &self.inputs {
            if !self.in_guard.contains_key(i) || !self.in_resets.contains_key(i) {
                return Err(TileError::NotAnInput(
                    self.name.clone(),
                    self.location_name(*i).to_string(),
                ));
            }
        }
        for o in &self.outputs {
            if !self.out_guard.contains_key(o) || !self.out_resets.contains_key(o) {
                return Err(TileError::NotAnOutput(
                    self.name.clone(),
                    self.location_name(*o).to_string(),
                ));
            }
        }
        for g in self.in_guard.values().chain(self.out_guard.values()) {
            if g.has_parameter() {
                return Err(TileError::ParametricCompatibility);
            }
        }
        Ok(())
    }

    /// The body as a timed automaton rooted at the given input.
    fn body_with_initial(&self, input: LocId) -> TimedAutomaton {
        TimedAutomaton {
            alphabet: self.alphabet.clone(),
            locations: self.locations.clone(),
            initial: input,
            accepting: self.accepting.clone(),
            clocks: self.clocks.clone(),
            transitions: self.transitions.clone(),
        }
    }

    /// Largest constant over body guards and compatibility guards.
    pub fn max_constant(&self) -> Result<u64, TileError> {
        let mut best = self.body_with_initial(self.inputs[0]).max_constant()?;
        for g in self.in_guard.values().chain(self.out_guard.values()) {
            for a in g.atoms() {
                if let crate::guard::Bound::Const(c) = a.bound {
                    if !crate::rational::is_integer(&c) {
                        return Err(TileError::Ta(TaError::NonIntegerConstant(c.to_string())));
                    }
                    best = best.max(*c.numer() as u64);
                }
            }
        }
        Ok(best)
    }
}

/// What a weight or parameter set is attached to: an output location of
/// a non-accepting tile, or an accepting tile as a whole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WeightKey {
    Output(LocId),
    TileSelf,
}

impl fmt::Display for WeightKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKey::Output(l) => write!(f, "output #{}", l.0),
            WeightKey::TileSelf => write!(f, "self"),
        }
    }
}

/// Index of a tile instance inside a tiled automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TileId(pub usize);

/// A connection between an output location of one tile instance and an
/// input location of another. Guard and resets are fixed by the
/// compatibility functions: the guard is the source's exit guarantee,
/// the resets are the exit resets joined with the target's entry
/// resets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileTransition {
    pub from: (TileId, LocId),
    pub to: (TileId, LocId),
    pub letter: SymbolId,
}

/// A graph of tile instances closed under the connection rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TiledTa {
    pub tiles: Vec<Tile>,
    pub initial: TileId,
    pub connections: Vec<TileTransition>,
}

/// Decides the assume-guarantee implication `exit guard ⇒ entry guard`
/// by zone inclusion, clause by clause: every satisfiable clause of the
/// exit guard must be contained in some clause of the entry guard.
pub fn validate_connection(
    from_tile: &Tile,
    from_loc: LocId,
    to_tile: &Tile,
    to_loc: LocId,
) -> Result<bool, TileError> {
    if !from_tile.outputs.contains(&from_loc) {
        return Err(TileError::NotAnOutput(
            from_tile.name.clone(),
            from_tile.location_name(from_loc).to_string(),
        ));
    }
    if !to_tile.inputs.contains(&to_loc) {
        return Err(TileError::NotAnInput(
            to_tile.name.clone(),
            to_tile.location_name(to_loc).to_string(),
        ));
    }
    let exit = &from_tile.out_guard[&from_loc];
    let entry = &to_tile.in_guard[&to_loc];
    if exit.has_parameter() || entry.has_parameter() {
        return Err(TileError::ParametricCompatibility);
    }

    // Shared clock space: union of both tiles' clock names.
    let mut clock_names: Vec<String> = from_tile.clocks.clone();
    for c in &to_tile.clocks {
        if !clock_names.contains(c) {
            clock_names.push(c.clone());
        }
    }
    let remap = |tile: &Tile, g: &Guard| -> Guard {
        g.map_atoms(&|a| Atom {
            clock: ClockId(
                clock_names
                    .iter()
                    .position(|n| n == &tile.clocks[a.clock.0])
                    .unwrap(),
            ),
            ..a
        })
    };
    let exit = remap(from_tile, exit);
    let entry = remap(to_tile, entry);

    let zone_of = |atoms: &[Atom]| {
        let mut z = DbmZone::universal(clock_names.len());
        for a in atoms {
            z.constrain_atom(a);
        }
        z
    };
    let entry_zones: Vec<DbmZone> = entry
        .dnf_clauses()
        .iter()
        .map(|c| zone_of(c))
        .filter(|z| !z.is_empty())
        .collect();
    for clause in exit.dnf_clauses() {
        let z = zone_of(&clause);
        if z.is_empty() {
            continue;
        }
        if !entry_zones.iter().any(|e| z.subset_of(e)) {
            return Ok(false);
        }
    }
    Ok(true)
}

impl TiledTa {
    /// Validates tile shapes, connection endpoints, assume-guarantee
    /// inclusion, the non-resetting-test property of connections, and
    /// that accepting tiles have no exits.
    pub fn validate(&self) -> Result<(), TileError> {
        for t in &self.tiles {
            t.validate()?;
        }
        if self.initial.0 >= self.tiles.len() {
            return Err(TileError::BadTile(self.initial.0));
        }
        for c in &self.connections {
            let (ft, fl) = c.from;
            let (tt, tl) = c.to;
            let from = self.tiles.get(ft.0).ok_or(TileError::BadTile(ft.0))?;
            let to = self.tiles.get(tt.0).ok_or(TileError::BadTile(tt.0))?;
            if from.is_accepting() {
                return Err(TileError::ExitFromAccepting(from.name.clone()));
            }
            if !validate_connection(from, fl, to, tl)? {
                return Err(TileError::AssumeGuarantee(
                    format!("{}.{}", from.name, from.location_name(fl)),
                    format!("{}.{}", to.name, to.location_name(tl)),
                ));
            }
            // Connections are non-resetting test: the exit guard must
            // not test a clock that entry or exit resets.
            let guard_clocks: BTreeSet<&str> = from.out_guard[&fl]
                .clocks()
                .into_iter()
                .map(|cl| from.clocks[cl.0].as_str())
                .collect();
            let mut reset_names: BTreeSet<&str> = from.out_resets[&fl]
                .iter()
                .map(|cl| from.clocks[cl.0].as_str())
                .collect();
            reset_names.extend(to.in_resets[&tl].iter().map(|cl| to.clocks[cl.0].as_str()));
            if guard_clocks.intersection(&reset_names).next().is_some() {
                return Err(TileError::ConnectionNotNrt(
                    format!("{}.{}", from.name, from.location_name(fl)),
                    format!("{}.{}", to.name, to.location_name(tl)),
                ));
            }
        }
        Ok(())
    }

    /// Accepting tile instances.
    pub fn accepting_tiles(&self) -> Vec<TileId> {
        self.tiles
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_accepting())
            .map(|(i, _)| TileId(i))
            .collect()
    }

    /// Largest constant over all member tiles.
    pub fn max_constant(&self) -> Result<u64, TileError> {
        let mut best = 0;
        for t in &self.tiles {
            best = best.max(t.max_constant()?);
        }
        Ok(best)
    }
}

/// The flattening of a tiled automaton, with the bookkeeping needed to
/// map analysis results back onto tiles.
#[derive(Debug, Clone)]
pub struct Flattened {
    pub ta: TimedAutomaton,
    /// Owning tile instance of every flattened location.
    pub loc_tile: Vec<TileId>,
    /// For every flattened transition: the connection index it came
    /// from, or `None` for tile-internal transitions.
    pub trans_connection: Vec<Option<usize>>,
}

/// Substitutes every tile with its body: locations are prefixed with
/// the instance name, connections become ordinary transitions carrying
/// their exit guard and the union of exit and entry resets. The initial
/// location is the initial tile's unique input; entry resets there are
/// vacuous at time zero and are not materialized.
pub fn flatten(tta: &TiledTa) -> Result<Flattened, TileError> {
    tta.validate()?;

    let mut ta = TimedAutomaton::new();
    ta.alphabet.clear();
    let mut loc_tile = Vec::new();
    let mut trans_connection = Vec::new();
    // Global clock table: union by name in tile order.
    for tile in &tta.tiles {
        for c in &tile.clocks {
            if ta.clock_id(c).is_none() {
                ta.add_clock(c);
            }
        }
        for s in &tile.alphabet {
            if !ta.alphabet.contains(s) {
                ta.alphabet.push(s.clone());
            }
        }
    }
    if ta.alphabet.is_empty() {
        ta.alphabet.push("a".to_string());
    }

    // Locations, prefixed per instance.
    let mut loc_index: Vec<Vec<LocId>> = Vec::new();
    for (ti, tile) in tta.tiles.iter().enumerate() {
        let mut ids = Vec::new();
        for (li, name) in tile.locations.iter().enumerate() {
            let id = ta.add_location(&format!("T{ti}.{name}"));
            loc_tile.push(TileId(ti));
            debug_assert_eq!(id.0, ta.locations.len() - 1);
            ids.push(id);
            let _ = li;
        }
        loc_index.push(ids);
    }

    let clock_map: Vec<Vec<ClockId>> = tta
        .tiles
        .iter()
        .map(|tile| {
            tile.clocks
                .iter()
                .map(|c| ta.clock_id(c).unwrap())
                .collect()
        })
        .collect();
    let tile_clock = |ti: usize, c: ClockId| -> ClockId { clock_map[ti][c.0] };

    // Internal transitions.
    for (ti, tile) in tta.tiles.iter().enumerate() {
        for t in &tile.transitions {
            let guard = t.guard.map_atoms(&|a| Atom {
                clock: tile_clock(ti, a.clock),
                ..a
            });
            let resets: Vec<ClockId> = t.resets.iter().map(|c| tile_clock(ti, *c)).collect();
            let letter = ta
                .alphabet
                .iter()
                .position(|s| s == &tile.alphabet[t.letter.0])
                .map(SymbolId)
                .unwrap();
            let id = ta.add_transition(
                loc_index[ti][t.source.0],
                loc_index[ti][t.target.0],
                guard,
                resets,
            );
            ta.transitions[id.0].letter = letter;
            trans_connection.push(None);
        }
    }

    // Connections.
    for (ci, conn) in tta.connections.iter().enumerate() {
        let (ft, fl) = conn.from;
        let (tt, tl) = conn.to;
        let from_tile = &tta.tiles[ft.0];
        let to_tile = &tta.tiles[tt.0];
        let guard = from_tile.out_guard[&fl].map_atoms(&|a| Atom {
            clock: tile_clock(ft.0, a.clock),
            ..a
        });
        let mut resets: BTreeSet<ClockId> = from_tile.out_resets[&fl]
            .iter()
            .map(|c| tile_clock(ft.0, *c))
            .collect();
        resets.extend(to_tile.in_resets[&tl].iter().map(|c| tile_clock(tt.0, *c)));
        let id = ta.add_transition(loc_index[ft.0][fl.0], loc_index[tt.0][tl.0], guard, resets);
        ta.transitions[id.0].letter = conn.letter;
        trans_connection.push(Some(ci));
    }

    // Initial location and acceptance.
    let initial_tile = &tta.tiles[tta.initial.0];
    if initial_tile.inputs.len() != 1 {
        return Err(TileError::AmbiguousEntry);
    }
    ta.initial = loc_index[tta.initial.0][initial_tile.inputs[0].0];
    for (ti, tile) in tta.tiles.iter().enumerate() {
        if tile.is_accepting() {
            for b in &tile.accepting {
                ta.accepting.insert(loc_index[ti][b.0]);
            }
        }
    }

    Ok(Flattened {
        ta,
        loc_tile,
        trans_connection,
    })
}

/// The elementary parametric tile: enter resetting `y`, wait until
/// `y == mu` resetting `x`, then leave when `x == mu` and `y cmp n`.
/// Since the second guard sees `y` at twice the parameter, it forces
/// `mu cmp n/2`, intersected with `(0, +inf)` by strict time progress.
pub fn elementary_tile(n: u64, cmp: Op) -> Tile {
    assert!(
        matches!(cmp, Op::Lt | Op::Le | Op::Ge | Op::Gt),
        "elementary tiles use inequality comparisons"
    );
    let mut body = TimedAutomaton::new();
    let q0 = body.add_location("q0");
    let q1 = body.add_location("q1");
    let q2 = body.add_location("q2");
    let x = body.add_clock("x");
    let y = body.add_clock("y");
    body.initial = q0;
    body.add_transition(q0, q1, Guard::atom(Atom::cmp_param(y, Op::Eq)), [x]);
    body.add_transition(
        q1,
        q2,
        Guard::and([
            Guard::atom(Atom::cmp_param(x, Op::Eq)),
            Guard::atom(Atom::cmp_const(y, cmp, int(n as i64))),
        ]),
        [],
    );
    Tile {
        name: format!("elem_{}_{}", op_slug(cmp), n),
        alphabet: body.alphabet.clone(),
        locations: body.locations.clone(),
        accepting: BTreeSet::new(),
        clocks: body.clocks.clone(),
        transitions: body.transitions.clone(),
        inputs: vec![q0],
        outputs: vec![q2],
        in_guard: BTreeMap::from([(q0, Guard::True)]),
        in_resets: BTreeMap::from([(q0, BTreeSet::from([y]))]),
        out_guard: BTreeMap::from([(q2, Guard::True)]),
        out_resets: BTreeMap::from([(q2, BTreeSet::new())]),
    }
}

/// The interval `mu cmp n/2` intersected with `(0, +inf)`: the set an
/// elementary tile is designed to force.
pub fn elementary_interval(n: u64, cmp: Op) -> IntervalSet {
    let half = ratio(n as i64, 2);
    let seg = match cmp {
        Op::Lt => Segment {
            lo: int(0),
            lo_strict: true,
            hi: Some(half),
            hi_strict: true,
        },
        Op::Le => Segment {
            lo: int(0),
            lo_strict: true,
            hi: Some(half),
            hi_strict: false,
        },
        Op::Ge => Segment {
            lo: half,
            lo_strict: false,
            hi: None,
            hi_strict: true,
        },
        Op::Gt => Segment {
            lo: half,
            lo_strict: true,
            hi: None,
            hi_strict: true,
        },
        Op::Eq => Segment::point(half),
    };
    let positive = Segment {
        lo: int(0),
        lo_strict: true,
        hi: None,
        hi_strict: true,
    };
    IntervalSet::from_segments([seg]).intersect(&IntervalSet::from_segments([positive]))
}

pub(crate) fn op_slug(op: Op) -> &'static str {
    match op {
        Op::Lt => "lt",
        Op::Le => "le",
        Op::Eq => "eq",
        Op::Ge => "ge",
        Op::Gt => "gt",
    }
}

/// An accepting tile made of two elementary bodies in sequence followed
/// by an unguarded accepting self-loop; it forces the intersection of
/// the two elementary intervals.
pub fn accepting_pair_tile(n1: u64, cmp1: Op, n2: u64, cmp2: Op) -> Tile {
    let mut body = TimedAutomaton::new();
    let q0 = body.add_location("q0");
    let q1 = body.add_location("q1");
    let q2 = body.add_location("q2");
    let q3 = body.add_location("q3");
    let q4 = body.add_location("q4");
    let q5 = body.add_location("q5");
    let x = body.add_clock("x");
    let y = body.add_clock("y");
    body.initial = q0;
    body.accepting.insert(q5);
    body.add_transition(q0, q1, Guard::atom(Atom::cmp_param(y, Op::Eq)), [x]);
    body.add_transition(
        q1,
        q2,
        Guard::and([
            Guard::atom(Atom::cmp_param(x, Op::Eq)),
            Guard::atom(Atom::cmp_const(y, cmp1, int(n1 as i64))),
        ]),
        [],
    );
    body.add_transition(q2, q3, Guard::True, [y]);
    body.add_transition(q3, q4, Guard::atom(Atom::cmp_param(y, Op::Eq)), [x]);
    body.add_transition(
        q4,
        q5,
        Guard::and([
            Guard::atom(Atom::cmp_param(x, Op::Eq)),
            Guard::atom(Atom::cmp_const(y, cmp2, int(n2 as i64))),
        ]),
        [],
    );
    body.add_transition(q5, q5, Guard::True, []);
    Tile {
        name: format!("acc_{}_{}_{}_{}", op_slug(cmp1), n1, op_slug(cmp2), n2),
        alphabet: body.alphabet.clone(),
        locations: body.locations.clone(),
        accepting: body.accepting.clone(),
        clocks: body.clocks.clone(),
        transitions: body.transitions.clone(),
        inputs: vec![q0],
        outputs: Vec::new(),
        in_guard: BTreeMap::from([(q0, Guard::True)]),
        in_resets: BTreeMap::from([(q0, BTreeSet::from([y]))]),
        out_guard: BTreeMap::new(),
        out_resets: BTreeMap::new(),
    }
}

/// A single elementary body ending in an accepting self-loop: forces
/// `mu cmp n/2` within `(0, +inf)`.
pub fn accepting_simple_tile(n: u64, cmp: Op) -> Tile {
    let mut body = TimedAutomaton::new();
    let q0 = body.add_location("q0");
    let q1 = body.add_location("q1");
    let q2 = body.add_location("q2");
    let x = body.add_clock("x");
    let y = body.add_clock("y");
    body.initial = q0;
    body.accepting.insert(q2);
    body.add_transition(q0, q1, Guard::atom(Atom::cmp_param(y, Op::Eq)), [x]);
    body.add_transition(
        q1,
        q2,
        Guard::and([
            Guard::atom(Atom::cmp_param(x, Op::Eq)),
            Guard::atom(Atom::cmp_const(y, cmp, int(n as i64))),
        ]),
        [],
    );
    body.add_transition(q2, q2, Guard::True, []);
    Tile {
        name: format!("accs_{}_{}", op_slug(cmp), n),
        alphabet: body.alphabet.clone(),
        locations: body.locations.clone(),
        accepting: body.accepting.clone(),
        clocks: body.clocks.clone(),
        transitions: body.transitions.clone(),
        inputs: vec![q0],
        outputs: Vec::new(),
        in_guard: BTreeMap::from([(q0, Guard::True)]),
        in_resets: BTreeMap::from([(q0, BTreeSet::from([y]))]),
        out_guard: BTreeMap::new(),
        out_resets: BTreeMap::new(),
    }
}

/// A two-output branching tile: one elementary entry, then either exit
/// under `y cmp_a n_a` or under `y cmp_b n_b`.
pub fn branching_tile(n_a: u64, cmp_a: Op, n_b: u64, cmp_b: Op) -> Tile {
    let mut body = TimedAutomaton::new();
    let q0 = body.add_location("q0");
    let q1 = body.add_location("q1");
    let q2 = body.add_location("q2");
    let q3 = body.add_location("q3");
    let x = body.add_clock("x");
    let y = body.add_clock("y");
    body.initial = q0;
    body.add_transition(q0, q1, Guard::atom(Atom::cmp_param(y, Op::Eq)), [x]);
    body.add_transition(
        q1,
        q2,
        Guard::and([
            Guard::atom(Atom::cmp_param(x, Op::Eq)),
            Guard::atom(Atom::cmp_const(y, cmp_a, int(n_a as i64))),
        ]),
        [],
    );
    body.add_transition(
        q1,
        q3,
        Guard::and([
            Guard::atom(Atom::cmp_param(x, Op::Eq)),
            Guard::atom(Atom::cmp_const(y, cmp_b, int(n_b as i64))),
        ]),
        [],
    );
    Tile {
        name: format!(
            "branch_{}_{}_{}_{}",
            op_slug(cmp_a),
            n_a,
            op_slug(cmp_b),
            n_b
        ),
        alphabet: body.alphabet.clone(),
        locations: body.locations.clone(),
        accepting: BTreeSet::new(),
        clocks: body.clocks.clone(),
        transitions: body.transitions.clone(),
        inputs: vec![q0],
        outputs: vec![q2, q3],
        in_guard: BTreeMap::from([(q0, Guard::True)]),
        in_resets: BTreeMap::from([(q0, BTreeSet::from([y]))]),
        out_guard: BTreeMap::from([(q2, Guard::True), (q3, Guard::True)]),
        out_resets: BTreeMap::from([(q2, BTreeSet::new()), (q3, BTreeSet::new())]),
    }
}

/// A one-location tile with neither outputs nor final locations: paths
/// entering it never reach acceptance.
pub fn dead_end_tile() -> Tile {
    let mut body = TimedAutomaton::new();
    let q0 = body.add_location("q0");
    body.add_clock("x");
    let y = body.add_clock("y");
    body.initial = q0;
    Tile {
        name: "dead_end".to_string(),
        alphabet: body.alphabet.clone(),
        locations: body.locations.clone(),
        accepting: BTreeSet::new(),
        clocks: body.clocks.clone(),
        transitions: Vec::new(),
        inputs: vec![q0],
        outputs: Vec::new(),
        in_guard: BTreeMap::from([(q0, Guard::True)]),
        in_resets: BTreeMap::from([(q0, BTreeSet::from([y]))]),
        out_guard: BTreeMap::new(),
        out_resets: BTreeMap::new(),
    }
}

/// Builds the probe automaton deciding membership of a parameter value
/// in a tile's parameter set at `key`: the tile body entered at its
/// input, and, for an output probe, a fresh sink reached under the
/// exit guarantee and looped forever. Exit obligations that hold only
/// at an instant (equalities) are thereby required once, not forever.
fn probe_automaton(tile: &Tile, key: WeightKey) -> Result<TimedAutomaton, TileError> {
    let input = *tile
        .inputs
        .first()
        .ok_or_else(|| TileError::NoInput(tile.name.clone()))?;
    let mut ta = tile.body_with_initial(input);
    match key {
        WeightKey::TileSelf => {
            if !tile.is_accepting() {
                return Err(TileError::AcceptingShape(tile.name.clone()));
            }
        }
        WeightKey::Output(q) => {
            if !tile.outputs.contains(&q) {
                return Err(TileError::NotAnOutput(
                    tile.name.clone(),
                    tile.location_name(q).to_string(),
                ));
            }
            ta.accepting.clear();
            let sink = ta.add_location("probe_sink");
            ta.add_transition(q, sink, tile.out_guard[&q].clone(), []);
            ta.add_transition(sink, sink, Guard::True, []);
            ta.accepting.insert(sink);
        }
    }
    Ok(ta)
}

/// Membership probe for one parameter value, from a given integer
/// entry valuation scaled along with the substituted constants.
fn probe_at(
    tile: &Tile,
    key: WeightKey,
    value: Rational,
    entry: &[Rational],
) -> Result<bool, TileError> {
    let ta = probe_automaton(tile, key)?;
    let substituted = ta.substitute_parameter(value);
    // Scale constants and the entry valuation together.
    let mut denoms: Vec<Rational> = substituted
        .transitions
        .iter()
        .flat_map(|t| t.guard.atoms())
        .filter_map(|a| match a.bound {
            crate::guard::Bound::Const(c) => Some(c),
            crate::guard::Bound::Param => None,
        })
        .collect();
    denoms.extend(entry.iter().copied());
    let factor = crate::rational::denominator_lcm(denoms.iter());
    let scaled = substituted.scale_constants(factor);
    let strict = scaled.with_strict_monotonicity().map_err(TileError::Ta)?;
    let mut vals: Vec<i64> = entry
        .iter()
        .map(|v| {
            let s = *v * int(factor);
            debug_assert!(crate::rational::is_integer(&s));
            *s.numer()
        })
        .collect();
    vals.push(0); // the strictness clock starts at zero
    let witness =
        buchi_nonempty_from(&strict, Some(&vals)).map_err(|e| Box::new(EmpCheckError::from(e)))?;
    Ok(witness.is_some())
}

/// Computes the parameter set of a tile at an output location or of an
/// accepting tile, by probing one representative per canonical interval
/// of the ambient maximum constant. The probe enters the tile with all
/// clocks zero (entry resets are vacuous there); `entry_valuation`
/// overrides that for invariance checking.
pub fn compute_parameter_set(
    tile: &Tile,
    key: WeightKey,
    ambient_c: u64,
) -> Result<IntervalSet, TileError> {
    compute_parameter_set_from(tile, key, ambient_c, None)
}

/// As [`compute_parameter_set`], entering with the given clock
/// valuation (after entry resets are applied to it).
pub fn compute_parameter_set_from(
    tile: &Tile,
    key: WeightKey,
    ambient_c: u64,
    entry_valuation: Option<&[Rational]>,
) -> Result<IntervalSet, TileError> {
    let input = *tile
        .inputs
        .first()
        .ok_or_else(|| TileError::NoInput(tile.name.clone()))?;
    let probe_shape = probe_automaton(tile, key)?;
    let reps = Representatives::compute(probe_shape.max_constant()?, probe_shape.locations.len());

    // Entry valuation with the tile's entry resets applied.
    let mut entry: Vec<Rational> = match entry_valuation {
        Some(v) => v.to_vec(),
        None => vec![int(0); tile.clocks.len()],
    };
    for c in &tile.in_resets[&input] {
        entry[c.0] = int(0);
    }

    let count = canonical_interval_count(ambient_c);
    let mut member_indices = Vec::new();
    for index in 0..count {
        let value = if index == count - 1 {
            // The tail needs a representative above the ambient bound
            // and above the probe's own equivalence threshold.
            reps.xi.max(int(2 * ambient_c as i64 + 1))
        } else {
            let point = ratio((index / 2) as i64, 2);
            if index % 2 == 0 {
                point
            } else {
                point + reps.alpha
            }
        };
        if probe_at(tile, key, value, &entry)? {
            member_indices.push(index);
        }
    }
    Ok(crate::interval::from_canonical_indices(
        member_indices,
        ambient_c,
    ))
}

/// A tile is productive for a declared weight when the weight encodes
/// exactly the computed parameter set and that set is non-empty.
pub fn check_productive(
    tile: &Tile,
    declared: &BTreeMap<WeightKey, BitWord>,
    ambient_c: u64,
) -> Result<bool, TileError> {
    let keys: Vec<WeightKey> = if tile.is_accepting() {
        vec![WeightKey::TileSelf]
    } else {
        tile.outputs.iter().map(|o| WeightKey::Output(*o)).collect()
    };
    for key in keys {
        let Some(word) = declared.get(&key) else {
            return Ok(false);
        };
        if word.is_zero() {
            return Ok(false);
        }
        let computed = compute_parameter_set(tile, key, ambient_c)?;
        // Computed sets are unions of canonical intervals, so the
        // encoding cannot fail.
        let computed_word = intervals_to_bits(&computed, ambient_c)
            .expect("computed parameter set lies on the half grid");
        if &computed_word != word {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_intervals() {
        assert_eq!(elementary_interval(4, Op::Gt).to_string(), "(2, +inf)");
        assert_eq!(elementary_interval(8, Op::Le).to_string(), "(0, 4]");
        assert_eq!(elementary_interval(0, Op::Gt).to_string(), "(0, +inf)");
    }

    #[test]
    fn elementary_tile_parameter_sets() {
        for (n, cmp) in [
            (4, Op::Gt),
            (8, Op::Le),
            (0, Op::Gt),
            (3, Op::Lt),
            (2, Op::Ge),
        ] {
            let tile = elementary_tile(n, cmp);
            tile.validate().unwrap();
            let ambient = tile.max_constant().unwrap().max(1);
            let computed =
                compute_parameter_set(&tile, WeightKey::Output(LocId(2)), ambient).unwrap();
            assert_eq!(
                computed,
                elementary_interval(n, cmp),
                "tile n={n} cmp={cmp:?}"
            );
        }
    }

    /// Two-output tile with exit guards, matching the two-branch shape
    /// with thresholds 6 and 4 and an exit obligation `y > 8`.
    fn two_output_tile() -> Tile {
        let mut t = branching_tile(6, Op::Gt, 4, Op::Le);
        t.out_guard.insert(
            LocId(2),
            Guard::atom(Atom::cmp_const(ClockId(1), Op::Gt, int(8))),
        );
        t
    }

    #[test]
    fn branching_tile_parameter_sets() {
        let tile = two_output_tile();
        tile.validate().unwrap();
        let ambient = tile.max_constant().unwrap();
        assert_eq!(ambient, 8);
        let high = compute_parameter_set(&tile, WeightKey::Output(LocId(2)), ambient).unwrap();
        assert_eq!(high.to_string(), "(3, +inf)");
        let low = compute_parameter_set(&tile, WeightKey::Output(LocId(3)), ambient).unwrap();
        assert_eq!(low.to_string(), "(0, 2]");
    }

    #[test]
    fn accepting_pair_forces_intersection() {
        let tile = accepting_pair_tile(4, Op::Gt, 8, Op::Le);
        tile.validate().unwrap();
        let ambient = tile.max_constant().unwrap();
        let set = compute_parameter_set(&tile, WeightKey::TileSelf, ambient).unwrap();
        assert_eq!(set.to_string(), "(2, 4]");
        assert_eq!(
            set,
            elementary_interval(4, Op::Gt).intersect(&elementary_interval(8, Op::Le))
        );
    }

    #[test]
    fn connection_validation_examples() {
        let strong_exit = two_output_tile();
        let weak_entry = elementary_tile(4, Op::Gt);
        // y > 8 implies true.
        assert!(validate_connection(&strong_exit, LocId(2), &weak_entry, LocId(0)).unwrap());

        // true does not imply y > 8.
        let mut demanding = elementary_tile(4, Op::Gt);
        demanding.in_guard.insert(
            LocId(0),
            Guard::atom(Atom::cmp_const(ClockId(1), Op::Gt, int(8))),
        );
        let lax = branching_tile(6, Op::Gt, 4, Op::Le);
        assert!(!validate_connection(&lax, LocId(2), &demanding, LocId(0)).unwrap());

        // A point implies the half-space containing it.
        let mut point_exit = branching_tile(6, Op::Gt, 4, Op::Le);
        point_exit.out_guard.insert(
            LocId(3),
            Guard::atom(Atom::cmp_const(ClockId(0), Op::Eq, int(3))),
        );
        let mut halfspace_entry = elementary_tile(2, Op::Le);
        halfspace_entry.in_guard.insert(
            LocId(0),
            Guard::atom(Atom::cmp_const(ClockId(0), Op::Ge, int(1))),
        );
        assert!(validate_connection(&point_exit, LocId(3), &halfspace_entry, LocId(0)).unwrap());
    }

    #[test]
    fn parametric_compatibility_guard_rejected() {
        let mut bad = elementary_tile(2, Op::Gt);
        bad.out_guard
            .insert(LocId(2), Guard::atom(Atom::cmp_param(ClockId(0), Op::Lt)));
        let other = elementary_tile(2, Op::Gt);
        assert_eq!(
            validate_connection(&bad, LocId(2), &other, LocId(0)),
            Err(TileError::ParametricCompatibility)
        );
    }

    #[test]
    fn flatten_single_accepting_tile() {
        let tile = accepting_pair_tile(4, Op::Gt, 8, Op::Le);
        let tta = TiledTa {
            tiles: vec![tile],
            initial: TileId(0),
            connections: Vec::new(),
        };
        let flat = flatten(&tta).unwrap();
        assert_eq!(flat.ta.locations.len(), 6);
        assert_eq!(flat.ta.initial, LocId(0));
        assert_eq!(flat.ta.accepting, BTreeSet::from([LocId(5)]));
        assert_eq!(flat.ta.clocks.len(), 2);
        assert!(flat.trans_connection.iter().all(|c| c.is_none()));
    }

    #[test]
    fn flatten_chain_carries_connection_resets() {
        let head = elementary_tile(4, Op::Gt);
        let tail = accepting_pair_tile(4, Op::Gt, 8, Op::Le);
        let tta = TiledTa {
            tiles: vec![head, tail],
            initial: TileId(0),
            connections: vec![TileTransition {
                from: (TileId(0), LocId(2)),
                to: (TileId(1), LocId(0)),
                letter: SymbolId(0),
            }],
        };
        let flat = flatten(&tta).unwrap();
        let conn_idx = flat
            .trans_connection
            .iter()
            .position(|c| c.is_some())
            .unwrap();
        let conn = &flat.ta.transitions[conn_idx];
        // Connection resets are the target tile's entry resets for y.
        let y = flat.ta.clock_id("y").unwrap();
        assert_eq!(conn.resets, BTreeSet::from([y]));
        assert_eq!(conn.guard, Guard::True);
        // Both tiles share x and y by name.
        assert_eq!(flat.ta.clocks.len(), 2);
        assert_eq!(flat.ta.locations.len(), 9);
    }

    #[test]
    fn flatten_rejects_exit_from_accepting() {
        let acc = accepting_simple_tile(2, Op::Gt);
        let next = elementary_tile(2, Op::Gt);
        let tta = TiledTa {
            tiles: vec![acc, next],
            initial: TileId(0),
            connections: vec![TileTransition {
                from: (TileId(0), LocId(2)),
                to: (TileId(1), LocId(0)),
                letter: SymbolId(0),
            }],
        };
        assert!(matches!(
            flatten(&tta),
            Err(TileError::ExitFromAccepting(_))
        ));
    }

    #[test]
    fn productivity_checks_declared_words() {
        let tile = elementary_tile(4, Op::Gt);
        let ambient = 4;
        let set = elementary_interval(4, Op::Gt);
        let word = intervals_to_bits(&set, ambient).unwrap();
        let declared = BTreeMap::from([(WeightKey::Output(LocId(2)), word)]);
        assert!(check_productive(&tile, &declared, ambient).unwrap());

        let zero = BTreeMap::from([(
            WeightKey::Output(LocId(2)),
            BitWord::zeros(canonical_interval_count(ambient)),
        )]);
        assert!(!check_productive(&tile, &zero, ambient).unwrap());
    }

    #[test]
    fn unreachable_output_is_unproductive() {
        // The exit needs y <= 0 after a mandatory positive delay.
        let mut tile = elementary_tile(0, Op::Le);
        tile.name = "empty_exit".to_string();
        let ambient = 1;
        let computed = compute_parameter_set(&tile, WeightKey::Output(LocId(2)), ambient).unwrap();
        assert!(computed.is_empty());
        let declared = BTreeMap::from([(
            WeightKey::Output(LocId(2)),
            BitWord::ones(canonical_interval_count(ambient)),
        )]);
        assert!(!check_productive(&tile, &declared, ambient).unwrap());
    }

    #[test]
    fn parameter_set_invariant_under_entry_valuations() {
        // Corner points of the entry zone up to the constant, plus an
        // interior point; entry resets neutralize the varying clock.
        let tile = elementary_tile(4, Op::Gt);
        let ambient = tile.max_constant().unwrap();
        let base = compute_parameter_set(&tile, WeightKey::Output(LocId(2)), ambient).unwrap();
        for x0 in [int(0), int(2), int(4), ratio(1, 2)] {
            for y0 in [int(0), int(3), ratio(7, 2)] {
                let entry = vec![x0, y0];
                let set = compute_parameter_set_from(
                    &tile,
                    WeightKey::Output(LocId(2)),
                    ambient,
                    Some(&entry),
                )
                .unwrap();
                assert_eq!(set, base, "entry ({x0}, {y0})");
            }
        }
    }
}
