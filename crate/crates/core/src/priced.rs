//! Priced timed automata: cost functions over locations and
//! transitions, run costs, priced tiles with per-output weight lower
//! bounds, and the min-plus oracle for minimum-cost reachability.

use crate::guard::{Atom, Bound, Op};
use crate::rational::{int, Rational};
use crate::ta::{LocId, TaError, TimedAutomaton};
use crate::tiles::{TileError, TileId, TiledTa, WeightKey};
use crate::weighted::{MinPlus, PriceValue, WaState, WeightedAutomaton, WeightedError};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PricedError {
    #[error(transparent)]
    Ta(#[from] TaError),
    #[error(transparent)]
    Tile(#[from] TileError),
    #[error(transparent)]
    Weighted(#[from] WeightedError),
    #[error("cost missing for location {0}")]
    MissingLocationCost(usize),
    #[error("cost missing for transition pair ({0}, {1})")]
    MissingEdgeCost(usize, usize),
    #[error("run is not a valid execution: {0}")]
    InvalidRun(String),
    #[error("tile does not match the two-location priced template")]
    TemplateMismatch,
    #[error("declared weight missing for tile {0} at {1}")]
    MissingWeight(String, String),
}

/// A timed automaton with a cost rate per location and a cost per
/// location pair; all transitions between the same pair share a cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PricedTa {
    pub base: TimedAutomaton,
    pub location_cost: Vec<u64>,
    pub edge_cost: BTreeMap<(LocId, LocId), u64>,
}

impl PricedTa {
    pub fn validate(&self) -> Result<(), PricedError> {
        self.base.validate()?;
        if self.location_cost.len() != self.base.locations.len() {
            return Err(PricedError::MissingLocationCost(self.location_cost.len()));
        }
        for t in &self.base.transitions {
            if !self.edge_cost.contains_key(&(t.source, t.target)) {
                return Err(PricedError::MissingEdgeCost(t.source.0, t.target.0));
            }
        }
        Ok(())
    }
}

/// A finite run as the visited locations with their arrival times,
/// strictly increasing from zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedRun {
    pub steps: Vec<(LocId, Rational)>,
}

impl TimedRun {
    /// Builds a run from per-step delays, starting at the automaton's
    /// initial location at time zero.
    pub fn from_delays(pta: &PricedTa, path: &[LocId], delays: &[Rational]) -> TimedRun {
        assert_eq!(path.len(), delays.len() + 1);
        let mut steps = vec![(path[0], int(0))];
        let mut now = int(0);
        for (loc, d) in path[1..].iter().zip(delays) {
            now += *d;
            steps.push((*loc, now));
        }
        let _ = pta;
        TimedRun { steps }
    }
}

/// Total cost of a finite run: each location's rate times the time
/// spent there, plus each traversed pair's transition cost. Delays are
/// rational, so the result is an exact rational even though costs are
/// naturals.
pub fn run_cost(pta: &PricedTa, run: &TimedRun) -> Result<Rational, PricedError> {
    pta.validate()?;
    if run.steps.is_empty() {
        return Err(PricedError::InvalidRun("empty run".to_string()));
    }
    if run.steps[0].1 != int(0) {
        return Err(PricedError::InvalidRun(
            "runs start at time zero".to_string(),
        ));
    }
    // Check the run is executable: guards satisfied, resets applied.
    let mut valuation = vec![int(0); pta.base.clocks.len()];
    let mut cost = int(0);
    for w in run.steps.windows(2) {
        let (from, t_from) = w[0];
        let (to, t_to) = w[1];
        let delay = t_to - t_from;
        if delay <= int(0) {
            return Err(PricedError::InvalidRun(
                "timestamps must strictly increase".to_string(),
            ));
        }
        let shifted: Vec<Rational> = valuation.iter().map(|v| *v + delay).collect();
        let taken = pta
            .base
            .transitions
            .iter()
            .find(|t| t.source == from && t.target == to && t.guard.holds(&shifted, None));
        let Some(taken) = taken else {
            return Err(PricedError::InvalidRun(format!(
                "no enabled transition from {} to {}",
                pta.base.locations[from.0], pta.base.locations[to.0]
            )));
        };
        valuation = shifted;
        for c in &taken.resets {
            valuation[c.0] = int(0);
        }
        let rate = int(pta.location_cost[from.0] as i64);
        let edge = int(pta.edge_cost[&(from, to)] as i64);
        cost += rate * delay + edge;
    }
    Ok(cost)
}

/// A tile with a cost function over its body and declared lower bounds
/// on traversal cost per output (or for the accepting tile itself).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PricedTile {
    pub tile: crate::tiles::Tile,
    pub location_cost: Vec<u64>,
    pub edge_cost: BTreeMap<(LocId, LocId), u64>,
    pub declared_weight: BTreeMap<WeightKey, u64>,
}

/// Weight of the two-location template tile: enter resetting `x`, one
/// transition guarded `0 < x < alpha`, exit obligation `x == alpha`.
/// The cheapest traversal spends all of `alpha` in the cheaper
/// location, so the bound is `alpha * min(rates) + edge cost`.
pub fn tile_weight_elementary(tile: &PricedTile, alpha: u64) -> Result<u64, PricedError> {
    let t = &tile.tile;
    if t.locations.len() != 2 || t.transitions.len() != 1 || t.inputs.len() != 1 {
        return Err(PricedError::TemplateMismatch);
    }
    let q0 = t.inputs[0];
    let q1 = *t.outputs.first().ok_or(PricedError::TemplateMismatch)?;
    let tr = &t.transitions[0];
    if tr.source != q0 || tr.target != q1 {
        return Err(PricedError::TemplateMismatch);
    }
    let x = tr
        .guard
        .clocks()
        .into_iter()
        .next()
        .ok_or(PricedError::TemplateMismatch)?;
    // Guard must be exactly 0 < x < alpha.
    let mut atoms = tr.guard.atoms();
    atoms.sort();
    let expected = {
        let mut v = vec![
            Atom::cmp_const(x, Op::Gt, int(0)),
            Atom::cmp_const(x, Op::Lt, int(alpha as i64)),
        ];
        v.sort();
        v
    };
    if atoms != expected {
        return Err(PricedError::TemplateMismatch);
    }
    if !tile.tile.in_resets[&q0].contains(&x) {
        return Err(PricedError::TemplateMismatch);
    }
    let exit = &tile.tile.out_guard[&q1];
    let exit_ok = matches!(
        exit.atoms().as_slice(),
        [Atom { clock, op: Op::Eq, bound: Bound::Const(c) }]
            if *clock == x && *c == int(alpha as i64)
    );
    if !exit_ok {
        return Err(PricedError::TemplateMismatch);
    }
    let p = tile.location_cost[q0.0].min(tile.location_cost[q1.0]);
    let edge = *tile
        .edge_cost
        .get(&(q0, q1))
        .ok_or(PricedError::MissingEdgeCost(q0.0, q1.0))?;
    Ok(alpha * p + edge)
}

/// A tiled automaton over priced tiles plus per-connection costs.
#[derive(Debug, Clone)]
pub struct PricedTiledTa {
    pub tiles: Vec<PricedTile>,
    pub initial: TileId,
    pub connections: Vec<crate::tiles::TileTransition>,
    pub connection_cost: Vec<u64>,
}

impl PricedTiledTa {
    pub fn structure(&self) -> TiledTa {
        TiledTa {
            tiles: self.tiles.iter().map(|t| t.tile.clone()).collect(),
            initial: self.initial,
            connections: self.connections.clone(),
        }
    }
}

/// The min-plus underlying weighted automaton: each connection carries
/// its source output's declared weight plus the connection cost, each
/// accepting tile its declared weight as a final weight.
pub fn priced_underlying_wa(
    ptta: &PricedTiledTa,
) -> Result<WeightedAutomaton<MinPlus>, PricedError> {
    let mut wa = WeightedAutomaton::new(MinPlus, ptta.tiles.len(), WaState(ptta.initial.0));
    for (ci, conn) in ptta.connections.iter().enumerate() {
        let (ft, fl) = conn.from;
        let tile = &ptta.tiles[ft.0];
        let out_weight = *tile
            .declared_weight
            .get(&WeightKey::Output(fl))
            .ok_or_else(|| {
                PricedError::MissingWeight(
                    tile.tile.name.clone(),
                    WeightKey::Output(fl).to_string(),
                )
            })?;
        let cost = ptta.connection_cost[ci];
        wa.add_transition_weight(
            WaState(ft.0),
            conn.letter,
            WaState(conn.to.0 .0),
            PriceValue::Finite(out_weight + cost),
        );
    }
    for (ti, tile) in ptta.tiles.iter().enumerate() {
        if tile.tile.is_accepting() {
            let w = *tile
                .declared_weight
                .get(&WeightKey::TileSelf)
                .ok_or_else(|| {
                    PricedError::MissingWeight(
                        tile.tile.name.clone(),
                        WeightKey::TileSelf.to_string(),
                    )
                })?;
            wa.set_final_weight(WaState(ti), PriceValue::Finite(w));
        }
    }
    Ok(wa)
}

/// Lower bound on the cost of reaching an accepting tile, computed as
/// the algebraic shortest distance of the underlying min-plus
/// automaton.
pub fn priced_oracle(ptta: &PricedTiledTa) -> Result<PriceValue, PricedError> {
    Ok(priced_underlying_wa(ptta)?.shortest_distance()?)
}

/// Independent check: exhaustive minimum over simple tile paths from
/// the initial tile to an accepting tile. Weights are non-negative, so
/// some optimal path is simple.
pub fn min_cost_brute(ptta: &PricedTiledTa) -> Result<PriceValue, PricedError> {
    let wa = priced_underlying_wa(ptta)?;
    let n = ptta.tiles.len();
    let mut best = PriceValue::Infinite;
    let mut on_path = vec![false; n];

    fn explore(
        wa: &WeightedAutomaton<MinPlus>,
        state: usize,
        cost_so_far: u64,
        on_path: &mut Vec<bool>,
        best: &mut PriceValue,
    ) {
        if let Some(PriceValue::Finite(fw)) = wa.final_weights.get(&WaState(state)) {
            let total = PriceValue::Finite(cost_so_far + fw);
            if total < *best {
                *best = total;
            }
        }
        on_path[state] = true;
        for ((from, _, to), w) in &wa.transition_weights {
            if from.0 != state || on_path[to.0] {
                continue;
            }
            if let PriceValue::Finite(w) = w {
                explore(wa, to.0, cost_so_far + w, on_path, best);
            }
        }
        on_path[state] = false;
    }

    explore(&wa, ptta.initial.0, 0, &mut on_path, &mut best);
    Ok(best)
}

/// A random tree of priced tiles for differential testing of the
/// min-plus oracle: template-shaped internal tiles with random costs,
/// accepting leaves with random weights, random connection costs.
pub fn random_priced_tree(seed: u64, max_tiles: usize) -> PricedTiledTa {
    use crate::guard::Guard;
    use crate::ta::SymbolId;
    use crate::tiles::{accepting_simple_tile, Tile, TileTransition};
    use rand::{Rng, SeedableRng};
    use std::collections::BTreeSet;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let template = |rng: &mut rand_chacha::ChaCha8Rng, idx: usize| -> PricedTile {
        let alpha = rng.random_range(1..=4u64);
        let c_q0 = rng.random_range(0..=5u64);
        let c_q1 = rng.random_range(0..=5u64);
        let c_t0 = rng.random_range(0..=6u64);
        let mut body = TimedAutomaton::new();
        let q0 = body.add_location("q0");
        let q1 = body.add_location("q1");
        let x = body.add_clock("x");
        body.initial = q0;
        body.add_transition(
            q0,
            q1,
            Guard::and([
                Guard::atom(Atom::cmp_const(x, Op::Gt, int(0))),
                Guard::atom(Atom::cmp_const(x, Op::Lt, int(alpha as i64))),
            ]),
            [],
        );
        let tile = Tile {
            name: format!("price_{idx}"),
            alphabet: body.alphabet.clone(),
            locations: body.locations.clone(),
            accepting: BTreeSet::new(),
            clocks: body.clocks.clone(),
            transitions: body.transitions.clone(),
            inputs: vec![q0],
            outputs: vec![q1],
            in_guard: BTreeMap::from([(q0, Guard::True)]),
            in_resets: BTreeMap::from([(q0, BTreeSet::from([x]))]),
            out_guard: BTreeMap::from([(
                q1,
                Guard::atom(Atom::cmp_const(x, Op::Eq, int(alpha as i64))),
            )]),
            out_resets: BTreeMap::from([(q1, BTreeSet::new())]),
        };
        let mut pt = PricedTile {
            tile,
            location_cost: vec![c_q0, c_q1],
            edge_cost: BTreeMap::from([((q0, q1), c_t0)]),
            declared_weight: BTreeMap::new(),
        };
        let w = tile_weight_elementary(&pt, alpha).expect("template by construction");
        pt.declared_weight.insert(WeightKey::Output(LocId(1)), w);
        pt
    };
    let accepting = |rng: &mut rand_chacha::ChaCha8Rng| -> PricedTile {
        let tile = accepting_simple_tile(2, Op::Gt);
        let location_cost = vec![rng.random_range(0..=3u64); tile.locations.len()];
        let edge_cost = tile
            .transitions
            .iter()
            .map(|t| ((t.source, t.target), rng.random_range(0..=3u64)))
            .collect();
        PricedTile {
            tile,
            location_cost,
            edge_cost,
            declared_weight: BTreeMap::from([(WeightKey::TileSelf, rng.random_range(0..=9u64))]),
        }
    };

    let mut ptta = PricedTiledTa {
        tiles: vec![template(&mut rng, 0)],
        initial: TileId(0),
        connections: Vec::new(),
        connection_cost: Vec::new(),
    };
    let mut frontier = vec![TileId(0)];
    while !frontier.is_empty() && ptta.tiles.len() < max_tiles {
        let parent = frontier.remove(0);
        let fanout = rng.random_range(1..=2usize);
        for _ in 0..fanout {
            if ptta.tiles.len() >= max_tiles {
                break;
            }
            let make_leaf = ptta.tiles.len() + 2 >= max_tiles || rng.random_bool(0.45);
            let child = TileId(ptta.tiles.len());
            if make_leaf {
                ptta.tiles.push(accepting(&mut rng));
            } else {
                let t = template(&mut rng, child.0);
                ptta.tiles.push(t);
                frontier.push(child);
            }
            // Template tiles have a single output; a fanout of two
            // makes it a nondeterministic exit, which the min in the
            // oracle has to arbitrate.
            ptta.connections.push(TileTransition {
                from: (parent, ptta.tiles[parent.0].tile.outputs[0]),
                to: (child, ptta.tiles[child.0].tile.inputs[0]),
                letter: SymbolId(0),
            });
            ptta.connection_cost.push(rng.random_range(0..=5u64));
        }
    }
    ptta
}
