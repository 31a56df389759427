//! Line-based textual formats: plain (parametric) timed automata, tile
//! libraries, and tiled-automaton documents with optional priced
//! extensions. `#` starts a comment; guards are quoted expressions over
//! declared clocks.

use crate::guard::{Atom, Bound, ClockId, Guard, Op};
use crate::interval::IntervalSet;
use crate::priced::PricedTiledTa;
use crate::rational::{format_rational, parse_rational};
use crate::ta::{LocId, ParametricTa, SymbolId, TimedAutomaton};
use crate::tiles::{Tile, TileId, TileTransition, TiledTa, WeightKey};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {0}: {1}")]
    Line(usize, String),
    #[error("no initial location declared")]
    NoInitial,
    #[error("{0}")]
    Structure(String),
}

fn err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Line(line, msg.into())
}

/// Parses a guard expression: comparisons `clock op (int|param)` joined
/// by `&&`, alternatives joined by `||`, empty for `true`, `false` for
/// the unsatisfiable guard. Derived operators are expanded into the
/// base grammar at this boundary.
pub fn parse_guard(
    expr: &str,
    clocks: &[String],
    param: Option<&str>,
    line: usize,
) -> Result<Guard, FormatError> {
    let expr = expr.trim();
    if expr.is_empty() || expr == "true" {
        return Ok(Guard::True);
    }
    if expr == "false" {
        return Ok(Guard::Or(Vec::new()));
    }
    let mut clauses = Vec::new();
    for clause in expr.split("||") {
        let clause = clause.trim();
        let clause = clause
            .strip_prefix('(')
            .and_then(|c| c.strip_suffix(')'))
            .unwrap_or(clause);
        let mut atoms = Vec::new();
        for atom in clause.split("&&") {
            atoms.push(Guard::Atom(parse_atom(atom.trim(), clocks, param, line)?));
        }
        clauses.push(Guard::and(atoms));
    }
    Ok(Guard::or(clauses))
}

fn parse_atom(
    s: &str,
    clocks: &[String],
    param: Option<&str>,
    line: usize,
) -> Result<Atom, FormatError> {
    // Two-character operators first, so `<=` is not read as `<`.
    let found = ["<=", ">=", "==", "<", ">"]
        .iter()
        .filter_map(|sym| s.find(sym).map(|i| (i, *sym)))
        .min_by_key(|(i, sym)| (*i, sym.len() == 1))
        .ok_or_else(|| err(line, format!("no comparison operator in `{s}`")))?;
    let (idx, sym) = found;
    let op = match sym {
        "<" => Op::Lt,
        "<=" => Op::Le,
        "==" => Op::Eq,
        ">=" => Op::Ge,
        ">" => Op::Gt,
        _ => unreachable!(),
    };
    let lhs = s[..idx].trim();
    let rhs = s[idx + sym.len()..].trim();
    let clock = clocks
        .iter()
        .position(|c| c == lhs)
        .map(ClockId)
        .ok_or_else(|| err(line, format!("unknown clock `{lhs}`")))?;
    let bound = if Some(rhs) == param {
        Bound::Param
    } else {
        Bound::Const(parse_rational(rhs).ok_or_else(|| err(line, format!("bad constant `{rhs}`")))?)
    };
    Ok(Atom { clock, op, bound })
}

fn parse_resets(s: &str, clocks: &[String], line: usize) -> Result<BTreeSet<ClockId>, FormatError> {
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|x| x.strip_suffix('}'))
        .ok_or_else(|| err(line, "resets must be braced"))?;
    let mut out = BTreeSet::new();
    for name in inner.split(',') {
        let name = name.trim();
        if name.is_empty() {
            continue;
        }
        let id = clocks
            .iter()
            .position(|c| c == name)
            .map(ClockId)
            .ok_or_else(|| err(line, format!("unknown clock `{name}` in resets")))?;
        out.insert(id);
    }
    Ok(out)
}

/// Splits `edge q0 q1 guard "..." resets {...}`-style tails into the
/// quoted guard and the braced resets.
fn split_guard_resets(rest: &str, line: usize) -> Result<(String, String), FormatError> {
    let gpos = rest
        .find("guard")
        .ok_or_else(|| err(line, "missing guard"))?;
    let after = &rest[gpos + 5..];
    let q1 = after
        .find('"')
        .ok_or_else(|| err(line, "guard must be quoted"))?;
    let q2 = after[q1 + 1..]
        .find('"')
        .ok_or_else(|| err(line, "unterminated guard"))?;
    let guard = after[q1 + 1..q1 + 1 + q2].to_string();
    let tail = &after[q1 + q2 + 2..];
    let rpos = tail
        .find("resets")
        .ok_or_else(|| err(line, "missing resets"))?;
    Ok((guard, tail[rpos + 6..].trim().to_string()))
}

/// Parses a plain automaton file: `clock`, `param`, `location`
/// (optionally `initial` / `accepting`), and `edge` declarations.
pub fn parse_ta(text: &str) -> Result<(TimedAutomaton, Option<String>), FormatError> {
    let mut ta = TimedAutomaton::new();
    let mut param: Option<String> = None;
    let mut initial: Option<LocId> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        match words.next().unwrap() {
            "clock" => {
                let name = words
                    .next()
                    .ok_or_else(|| err(line, "clock needs a name"))?;
                ta.add_clock(name);
            }
            "param" => {
                let name = words
                    .next()
                    .ok_or_else(|| err(line, "param needs a name"))?;
                param = Some(name.to_string());
            }
            "location" => {
                let name = words
                    .next()
                    .ok_or_else(|| err(line, "location needs a name"))?;
                let id = ta.add_location(name);
                for flag in words {
                    match flag {
                        "initial" => initial = Some(id),
                        "accepting" => {
                            ta.accepting.insert(id);
                        }
                        other => return Err(err(line, format!("unknown flag `{other}`"))),
                    }
                }
            }
            "edge" => {
                let src = words
                    .next()
                    .ok_or_else(|| err(line, "edge needs a source"))?;
                let dst = words
                    .next()
                    .ok_or_else(|| err(line, "edge needs a target"))?;
                let rest_off = content.find(dst).unwrap() + dst.len();
                let (guard_str, resets_str) = split_guard_resets(&content[rest_off..], line)?;
                let src = ta
                    .location_id(src)
                    .ok_or_else(|| err(line, format!("unknown location `{src}`")))?;
                let dst = ta
                    .location_id(dst)
                    .ok_or_else(|| err(line, format!("unknown location `{dst}`")))?;
                let guard = parse_guard(&guard_str, &ta.clocks, param.as_deref(), line)?;
                let resets = parse_resets(&resets_str, &ta.clocks, line)?;
                ta.add_transition(src, dst, guard, resets);
            }
            other => return Err(err(line, format!("unknown declaration `{other}`"))),
        }
    }
    ta.initial = initial.ok_or(FormatError::NoInitial)?;
    ta.validate()
        .map_err(|e| FormatError::Structure(e.to_string()))?;
    Ok((ta, param))
}

/// Renders a plain automaton file; the inverse of [`parse_ta`].
pub fn write_ta(ta: &TimedAutomaton, param: Option<&str>) -> String {
    let mut out = String::new();
    for c in &ta.clocks {
        out.push_str(&format!("clock {c}\n"));
    }
    if let Some(p) = param {
        out.push_str(&format!("param {p}\n"));
    }
    for (i, l) in ta.locations.iter().enumerate() {
        out.push_str(&format!("location {l}"));
        if ta.initial == LocId(i) {
            out.push_str(" initial");
        }
        if ta.accepting.contains(&LocId(i)) {
            out.push_str(" accepting");
        }
        out.push('\n');
    }
    for t in &ta.transitions {
        let resets: Vec<&str> = t.resets.iter().map(|c| ta.clocks[c.0].as_str()).collect();
        out.push_str(&format!(
            "edge {} {} guard \"{}\" resets {{{}}}\n",
            ta.locations[t.source.0],
            ta.locations[t.target.0],
            t.guard.render(&ta.clocks, param),
            resets.join(",")
        ));
    }
    out
}

pub fn write_parametric_ta(pta: &ParametricTa) -> String {
    write_ta(&pta.base, Some(&pta.parameter))
}

/// One tile definition with its declared annotations.
#[derive(Debug, Clone)]
pub struct TileDecl {
    pub tile: Tile,
    pub declared_intervals: BTreeMap<WeightKey, IntervalSet>,
    pub declared_weights: BTreeMap<WeightKey, u64>,
    pub location_cost: Vec<u64>,
    pub edge_cost: BTreeMap<(LocId, LocId), u64>,
    pub has_costs: bool,
}

/// A parsed document: tile definitions plus an optional instance
/// structure.
#[derive(Debug, Clone)]
pub struct TtaDocument {
    pub tiles: Vec<TileDecl>,
    /// Definition index per instance.
    pub instances: Vec<usize>,
    pub initial: Option<usize>,
    /// (from instance, from location name, to instance, to location
    /// name, optional cost).
    pub connections: Vec<(usize, String, usize, String, Option<u64>)>,
}

impl TtaDocument {
    pub fn to_tiled_ta(&self) -> Result<TiledTa, FormatError> {
        let mut tiles = Vec::new();
        for &d in &self.instances {
            tiles.push(self.tiles[d].tile.clone());
        }
        let mut connections = Vec::new();
        for (fi, fl, ti, tl, _) in &self.connections {
            let from_tile = &tiles[*fi];
            let to_tile = &tiles[*ti];
            let fl = from_tile
                .locations
                .iter()
                .position(|l| l == fl)
                .map(LocId)
                .ok_or_else(|| FormatError::Structure(format!("unknown location {fl}")))?;
            let tl = to_tile
                .locations
                .iter()
                .position(|l| l == tl)
                .map(LocId)
                .ok_or_else(|| FormatError::Structure(format!("unknown location {tl}")))?;
            connections.push(TileTransition {
                from: (TileId(*fi), fl),
                to: (TileId(*ti), tl),
                letter: SymbolId(0),
            });
        }
        let tta = TiledTa {
            tiles,
            initial: TileId(self.initial.ok_or(FormatError::NoInitial)?),
            connections,
        };
        tta.validate()
            .map_err(|e| FormatError::Structure(e.to_string()))?;
        Ok(tta)
    }

    pub fn to_priced(&self) -> Result<PricedTiledTa, FormatError> {
        let tta = self.to_tiled_ta()?;
        let mut tiles = Vec::new();
        for (inst, &d) in self.instances.iter().enumerate() {
            let decl = &self.tiles[d];
            if !decl.has_costs {
                return Err(FormatError::Structure(format!(
                    "instance T{inst} has no cost annotations"
                )));
            }
            tiles.push(crate::priced::PricedTile {
                tile: decl.tile.clone(),
                location_cost: decl.location_cost.clone(),
                edge_cost: decl.edge_cost.clone(),
                declared_weight: decl.declared_weights.clone(),
            });
        }
        let connection_cost = self
            .connections
            .iter()
            .map(|(_, _, _, _, c)| c.unwrap_or(0))
            .collect();
        Ok(PricedTiledTa {
            tiles,
            initial: tta.initial,
            connections: tta.connections,
            connection_cost,
        })
    }

    /// Per-instance declared interval sets.
    pub fn instance_intervals(&self) -> Vec<BTreeMap<WeightKey, IntervalSet>> {
        self.instances
            .iter()
            .map(|&d| self.tiles[d].declared_intervals.clone())
            .collect()
    }
}

/// Parses a document of tile blocks and, optionally, instances.
pub fn parse_document(text: &str) -> Result<TtaDocument, FormatError> {
    let mut doc = TtaDocument {
        tiles: Vec::new(),
        instances: Vec::new(),
        initial: None,
        connections: Vec::new(),
    };
    let mut instance_names: Vec<String> = Vec::new();

    // Current tile block state.
    struct Block {
        name: String,
        ta: TimedAutomaton,
        param: Option<String>,
        inputs: Vec<(String, String, String, usize)>,
        outputs: Vec<(String, String, String, usize)>,
        declares: Vec<(String, String, usize)>,
        weights: Vec<(String, u64)>,
        loc_costs: Vec<(String, u64, usize)>,
        edge_costs: Vec<(String, String, u64, usize)>,
        has_costs: bool,
    }
    let mut block: Option<Block> = None;

    let finish = |b: Block, doc: &mut TtaDocument| -> Result<(), FormatError> {
        let ta = b.ta;
        let lookup = |name: &str, line: usize| {
            ta.location_id(name)
                .ok_or_else(|| err(line, format!("unknown location `{name}`")))
        };
        let mut tile = Tile {
            name: b.name,
            alphabet: ta.alphabet.clone(),
            locations: ta.locations.clone(),
            accepting: ta.accepting.clone(),
            clocks: ta.clocks.clone(),
            transitions: ta.transitions.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            in_guard: BTreeMap::new(),
            in_resets: BTreeMap::new(),
            out_guard: BTreeMap::new(),
            out_resets: BTreeMap::new(),
        };
        for (loc, g, r, line) in &b.inputs {
            let id = lookup(loc, *line)?;
            tile.inputs.push(id);
            tile.in_guard
                .insert(id, parse_guard(g, &ta.clocks, b.param.as_deref(), *line)?);
            tile.in_resets
                .insert(id, parse_resets(r, &ta.clocks, *line)?);
        }
        for (loc, g, r, line) in &b.outputs {
            let id = lookup(loc, *line)?;
            tile.outputs.push(id);
            tile.out_guard
                .insert(id, parse_guard(g, &ta.clocks, b.param.as_deref(), *line)?);
            tile.out_resets
                .insert(id, parse_resets(r, &ta.clocks, *line)?);
        }
        let key_of = |k: &str, line: usize| -> Result<WeightKey, FormatError> {
            if k == "self" {
                Ok(WeightKey::TileSelf)
            } else {
                Ok(WeightKey::Output(lookup(k, line)?))
            }
        };
        let mut declared_intervals = BTreeMap::new();
        for (k, spec, line) in &b.declares {
            declared_intervals.insert(
                key_of(k, *line)?,
                IntervalSet::parse(spec).map_err(|e| err(*line, e.to_string()))?,
            );
        }
        let mut declared_weights = BTreeMap::new();
        for (k, w) in &b.weights {
            declared_weights.insert(key_of(k, 0)?, *w);
        }
        let mut location_cost = vec![0; tile.locations.len()];
        for (loc, c, line) in &b.loc_costs {
            location_cost[lookup(loc, *line)?.0] = *c;
        }
        let mut edge_cost = BTreeMap::new();
        for (src, dst, c, line) in &b.edge_costs {
            edge_cost.insert((lookup(src, *line)?, lookup(dst, *line)?), *c);
        }
        doc.tiles.push(TileDecl {
            tile,
            declared_intervals,
            declared_weights,
            location_cost,
            edge_cost,
            has_costs: b.has_costs,
        });
        Ok(())
    };

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let head = words.next().unwrap();
        match (head, &mut block) {
            ("tile", slot) => {
                if let Some(b) = slot.take() {
                    finish(b, &mut doc)?;
                }
                let name = words.next().ok_or_else(|| err(line, "tile needs a name"))?;
                let ta = TimedAutomaton::new();
                *slot = Some(Block {
                    name: name.to_string(),
                    ta,
                    param: None,
                    inputs: Vec::new(),
                    outputs: Vec::new(),
                    declares: Vec::new(),
                    weights: Vec::new(),
                    loc_costs: Vec::new(),
                    edge_costs: Vec::new(),
                    has_costs: false,
                });
            }
            ("endtile", slot) => {
                let b = slot
                    .take()
                    .ok_or_else(|| err(line, "endtile outside a tile block"))?;
                finish(b, &mut doc)?;
            }
            ("clock", Some(b)) => {
                let name = words
                    .next()
                    .ok_or_else(|| err(line, "clock needs a name"))?;
                b.ta.add_clock(name);
            }
            ("param", Some(b)) => {
                b.param = Some(
                    words
                        .next()
                        .ok_or_else(|| err(line, "param needs a name"))?
                        .to_string(),
                );
            }
            ("location", Some(b)) => {
                let name = words
                    .next()
                    .ok_or_else(|| err(line, "location needs a name"))?;
                let id = b.ta.add_location(name);
                for flag in words {
                    match flag {
                        "accepting" => {
                            b.ta.accepting.insert(id);
                        }
                        other => return Err(err(line, format!("unknown flag `{other}`"))),
                    }
                }
            }
            ("edge", Some(b)) => {
                let src = words
                    .next()
                    .ok_or_else(|| err(line, "edge needs a source"))?;
                let dst = words
                    .next()
                    .ok_or_else(|| err(line, "edge needs a target"))?;
                let rest_off = content.find(dst).unwrap() + dst.len();
                let (g, r) = split_guard_resets(&content[rest_off..], line)?;
                let src =
                    b.ta.location_id(src)
                        .ok_or_else(|| err(line, format!("unknown location `{src}`")))?;
                let dst =
                    b.ta.location_id(dst)
                        .ok_or_else(|| err(line, format!("unknown location `{dst}`")))?;
                let guard = parse_guard(&g, &b.ta.clocks, b.param.as_deref(), line)?;
                let resets = parse_resets(&r, &b.ta.clocks, line)?;
                b.ta.add_transition(src, dst, guard, resets);
            }
            ("input", Some(b)) | ("output", Some(b)) => {
                let loc = words.next().ok_or_else(|| err(line, "needs a location"))?;
                let rest_off = content.find(loc).unwrap() + loc.len();
                let (g, r) = split_guard_resets(&content[rest_off..], line)?;
                let entry = (loc.to_string(), g, r, line);
                if head == "input" {
                    b.inputs.push(entry);
                } else {
                    b.outputs.push(entry);
                }
            }
            ("declare", Some(b)) => {
                let key = words
                    .next()
                    .ok_or_else(|| err(line, "declare needs a key"))?;
                let kind = words
                    .next()
                    .ok_or_else(|| err(line, "declare needs `intervals` or `weight`"))?;
                match kind {
                    "intervals" => {
                        let q1 = content.find('"').ok_or_else(|| err(line, "quoted spec"))?;
                        let q2 = content
                            .rfind('"')
                            .filter(|&x| x > q1)
                            .ok_or_else(|| err(line, "unterminated interval spec"))?;
                        b.declares
                            .push((key.to_string(), content[q1 + 1..q2].to_string(), line));
                    }
                    "weight" => {
                        let w: u64 = words
                            .next()
                            .and_then(|x| x.parse().ok())
                            .ok_or_else(|| err(line, "weight needs a natural"))?;
                        b.weights.push((key.to_string(), w));
                    }
                    other => return Err(err(line, format!("unknown declare kind `{other}`"))),
                }
            }
            ("cost", Some(b)) => {
                b.has_costs = true;
                match words.next() {
                    Some("location") => {
                        let loc = words
                            .next()
                            .ok_or_else(|| err(line, "cost location name"))?;
                        let c: u64 = words
                            .next()
                            .and_then(|x| x.parse().ok())
                            .ok_or_else(|| err(line, "cost needs a natural"))?;
                        b.loc_costs.push((loc.to_string(), c, line));
                    }
                    Some("edge") => {
                        let src = words.next().ok_or_else(|| err(line, "cost edge source"))?;
                        let dst = words.next().ok_or_else(|| err(line, "cost edge target"))?;
                        let c: u64 = words
                            .next()
                            .and_then(|x| x.parse().ok())
                            .ok_or_else(|| err(line, "cost needs a natural"))?;
                        b.edge_costs
                            .push((src.to_string(), dst.to_string(), c, line));
                    }
                    _ => return Err(err(line, "cost needs `location` or `edge`")),
                }
            }
            ("instance", None) => {
                let name = words
                    .next()
                    .ok_or_else(|| err(line, "instance needs a name"))?;
                let of = words.next();
                if of != Some("of") {
                    return Err(err(line, "expected `instance <name> of <tile>`"));
                }
                let tile_name = words
                    .next()
                    .ok_or_else(|| err(line, "instance needs a tile"))?;
                let def = doc
                    .tiles
                    .iter()
                    .position(|d| d.tile.name == tile_name)
                    .ok_or_else(|| err(line, format!("unknown tile `{tile_name}`")))?;
                instance_names.push(name.to_string());
                doc.instances.push(def);
            }
            ("initial", None) => {
                let name = words
                    .next()
                    .ok_or_else(|| err(line, "initial needs an instance"))?;
                let idx = instance_names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| err(line, format!("unknown instance `{name}`")))?;
                doc.initial = Some(idx);
            }
            ("connect", None) => {
                // connect A.loc -> B.loc [cost n]
                let from = words.next().ok_or_else(|| err(line, "connect source"))?;
                let arrow = words.next();
                if arrow != Some("->") {
                    return Err(err(line, "expected `->`"));
                }
                let to = words.next().ok_or_else(|| err(line, "connect target"))?;
                let cost = match (words.next(), words.next()) {
                    (Some("cost"), Some(c)) => Some(
                        c.parse::<u64>()
                            .map_err(|_| err(line, "cost needs a natural"))?,
                    ),
                    (None, _) => None,
                    _ => return Err(err(line, "trailing tokens on connect")),
                };
                let split = |s: &str| -> Result<(usize, String), FormatError> {
                    let (inst, loc) = s
                        .split_once('.')
                        .ok_or_else(|| err(line, "endpoint must be instance.location"))?;
                    let idx = instance_names
                        .iter()
                        .position(|n| n == inst)
                        .ok_or_else(|| err(line, format!("unknown instance `{inst}`")))?;
                    Ok((idx, loc.to_string()))
                };
                let (fi, fl) = split(from)?;
                let (ti, tl) = split(to)?;
                doc.connections.push((fi, fl, ti, tl, cost));
            }
            (other, _) => {
                return Err(err(line, format!("unexpected `{other}` here")));
            }
        }
    }
    if let Some(b) = block.take() {
        finish(b, &mut doc)?;
    }
    Ok(doc)
}

fn write_tile_block(out: &mut String, decl: &TileDecl) {
    let tile = &decl.tile;
    out.push_str(&format!("tile {}\n", tile.name));
    for c in &tile.clocks {
        out.push_str(&format!("clock {c}\n"));
    }
    if tile.transitions.iter().any(|t| t.guard.has_parameter()) {
        out.push_str("param mu\n");
    }
    for (i, l) in tile.locations.iter().enumerate() {
        out.push_str(&format!("location {l}"));
        if tile.accepting.contains(&LocId(i)) {
            out.push_str(" accepting");
        }
        out.push('\n');
    }
    for t in &tile.transitions {
        let resets: Vec<&str> = t.resets.iter().map(|c| tile.clocks[c.0].as_str()).collect();
        out.push_str(&format!(
            "edge {} {} guard \"{}\" resets {{{}}}\n",
            tile.locations[t.source.0],
            tile.locations[t.target.0],
            t.guard.render(&tile.clocks, Some("mu")),
            resets.join(",")
        ));
    }
    let iface = |out: &mut String, kind: &str, loc: &LocId, g: &Guard, r: &BTreeSet<ClockId>| {
        let resets: Vec<&str> = r.iter().map(|c| tile.clocks[c.0].as_str()).collect();
        out.push_str(&format!(
            "{kind} {} guard \"{}\" resets {{{}}}\n",
            tile.locations[loc.0],
            g.render(&tile.clocks, Some("mu")),
            resets.join(",")
        ));
    };
    for l in &tile.inputs {
        iface(out, "input", l, &tile.in_guard[l], &tile.in_resets[l]);
    }
    for l in &tile.outputs {
        iface(out, "output", l, &tile.out_guard[l], &tile.out_resets[l]);
    }
    let key_name = |k: &WeightKey| match k {
        WeightKey::TileSelf => "self".to_string(),
        WeightKey::Output(l) => tile.locations[l.0].clone(),
    };
    for (k, set) in &decl.declared_intervals {
        let spec: Vec<String> = set.segments().iter().map(|s| s.to_string()).collect();
        out.push_str(&format!(
            "declare {} intervals \"{}\"\n",
            key_name(k),
            spec.join("; ")
        ));
    }
    for (k, w) in &decl.declared_weights {
        out.push_str(&format!("declare {} weight {w}\n", key_name(k)));
    }
    if decl.has_costs {
        for (i, c) in decl.location_cost.iter().enumerate() {
            out.push_str(&format!("cost location {} {c}\n", tile.locations[i]));
        }
        for ((s, d), c) in &decl.edge_cost {
            out.push_str(&format!(
                "cost edge {} {} {c}\n",
                tile.locations[s.0], tile.locations[d.0]
            ));
        }
    }
    out.push_str("endtile\n");
}

/// Renders a tiled automaton document: one tile block per instance
/// (named per instance), then the structure lines.
pub fn write_tiled_ta(tta: &TiledTa, declares: &[BTreeMap<WeightKey, IntervalSet>]) -> String {
    let mut out = String::new();
    for (i, tile) in tta.tiles.iter().enumerate() {
        let mut named = tile.clone();
        named.name = format!("T{i}_{}", tile.name);
        write_tile_block(
            &mut out,
            &TileDecl {
                tile: named,
                declared_intervals: declares.get(i).cloned().unwrap_or_default(),
                declared_weights: BTreeMap::new(),
                location_cost: Vec::new(),
                edge_cost: BTreeMap::new(),
                has_costs: false,
            },
        );
        out.push('\n');
    }
    for (i, tile) in tta.tiles.iter().enumerate() {
        out.push_str(&format!("instance T{i} of T{i}_{}\n", tile.name));
    }
    out.push_str(&format!("initial T{}\n", tta.initial.0));
    for c in &tta.connections {
        out.push_str(&format!(
            "connect T{}.{} -> T{}.{}\n",
            c.from.0 .0,
            tta.tiles[c.from.0 .0].locations[c.from.1 .0],
            c.to.0 .0,
            tta.tiles[c.to.0 .0].locations[c.to.1 .0],
        ));
    }
    out
}

/// Renders a priced document, including costs, declared weights, and
/// per-connection costs.
pub fn write_priced_tta(ptta: &PricedTiledTa) -> String {
    let mut out = String::new();
    for (i, pt) in ptta.tiles.iter().enumerate() {
        let mut named = pt.tile.clone();
        named.name = format!("T{i}_{}", pt.tile.name);
        write_tile_block(
            &mut out,
            &TileDecl {
                tile: named,
                declared_intervals: BTreeMap::new(),
                declared_weights: pt.declared_weight.clone(),
                location_cost: pt.location_cost.clone(),
                edge_cost: pt.edge_cost.clone(),
                has_costs: true,
            },
        );
        out.push('\n');
    }
    for (i, pt) in ptta.tiles.iter().enumerate() {
        out.push_str(&format!("instance T{i} of T{i}_{}\n", pt.tile.name));
    }
    out.push_str(&format!("initial T{}\n", ptta.initial.0));
    for (ci, c) in ptta.connections.iter().enumerate() {
        out.push_str(&format!(
            "connect T{}.{} -> T{}.{} cost {}\n",
            c.from.0 .0,
            ptta.tiles[c.from.0 .0].tile.locations[c.from.1 .0],
            c.to.0 .0,
            ptta.tiles[c.to.0 .0].tile.locations[c.to.1 .0],
            ptta.connection_cost[ci],
        ));
    }
    out
}

/// Formats the verified values of a parametric emptiness result, one
/// exact rational per line.
pub fn render_verified_values(values: &[(crate::rational::Rational, bool)]) -> String {
    values
        .iter()
        .map(|(v, verdict)| {
            format!(
                "{} {}",
                format_rational(v),
                if *verdict { "nonempty" } else { "empty" }
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    const LOOP_FIXTURE: &str = "\
# two clocks, one parameter
clock x
clock y
param mu
location q0 initial
location q1
location q2 accepting
edge q0 q1 guard \"y == mu\" resets {x}
edge q1 q2 guard \"x == mu && y > 2\" resets {}
edge q2 q0 guard \"\" resets {y}
";

    #[test]
    fn parse_and_rewrite_round_trip() {
        let (ta, param) = parse_ta(LOOP_FIXTURE).unwrap();
        assert_eq!(param.as_deref(), Some("mu"));
        assert_eq!(ta.locations.len(), 3);
        assert_eq!(ta.max_constant().unwrap(), 2);
        let written = write_ta(&ta, param.as_deref());
        let (again, _) = parse_ta(&written).unwrap();
        assert_eq!(ta, again);
    }

    #[test]
    fn derived_operators_expand() {
        let text = "\
clock x
location a initial accepting
edge a a guard \"x >= 3 && x <= 5\" resets {}
";
        let (ta, _) = parse_ta(text).unwrap();
        let atoms = ta.transitions[0].guard.atoms();
        assert_eq!(atoms.len(), 2);
        assert!(atoms.iter().any(|a| a.op == Op::Ge));
        assert!(atoms.iter().any(|a| a.op == Op::Le));
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(
            parse_ta("clock x\nlocation a initial\nedge a b guard \"\" resets {}\n"),
            Err(FormatError::Line(3, _))
        ));
        assert!(matches!(parse_ta("bogus\n"), Err(FormatError::Line(1, _))));
        assert!(matches!(parse_ta("clock x\n"), Err(FormatError::NoInitial)));
    }

    #[test]
    fn guard_disjunction_round_trips() {
        let clocks = vec!["x".to_string()];
        let g = parse_guard("x < 1 || x > 3", &clocks, None, 1).unwrap();
        assert_eq!(g.dnf_clauses().len(), 2);
        let rendered = g.render(&clocks, None);
        let again = parse_guard(&rendered, &clocks, None, 1).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn tiled_document_round_trip() {
        use crate::guard::Op;
        let head = crate::tiles::elementary_tile(4, Op::Gt);
        let tail = crate::tiles::accepting_pair_tile(4, Op::Gt, 8, Op::Le);
        let tta = TiledTa {
            tiles: vec![head, tail],
            initial: TileId(0),
            connections: vec![TileTransition {
                from: (TileId(0), LocId(2)),
                to: (TileId(1), LocId(0)),
                letter: SymbolId(0),
            }],
        };
        let declares = vec![
            BTreeMap::from([(
                WeightKey::Output(LocId(2)),
                IntervalSet::parse("(2, +inf)").unwrap(),
            )]),
            BTreeMap::from([(WeightKey::TileSelf, IntervalSet::parse("(2, 4]").unwrap())]),
        ];
        let text = write_tiled_ta(&tta, &declares);
        let doc = parse_document(&text).unwrap();
        let parsed = doc.to_tiled_ta().unwrap();
        assert_eq!(parsed.connections.len(), 1);
        assert_eq!(parsed.tiles.len(), 2);
        assert_eq!(doc.instance_intervals(), declares);
        // The body survives with structure intact.
        assert_eq!(parsed.tiles[0].transitions.len(), 2);
        assert_eq!(parsed.tiles[1].accepting.len(), 1);
        // Re-rendering is stable.
        let mut renamed = parsed.clone();
        for (i, t) in renamed.tiles.iter_mut().enumerate() {
            t.name = t.name.strip_prefix(&format!("T{i}_")).unwrap().to_string();
        }
        assert_eq!(write_tiled_ta(&renamed, &doc.instance_intervals()), text);
    }

    #[test]
    fn priced_document_round_trip() {
        use crate::guard::{Atom, Guard, Op};
        use crate::tiles::Tile;
        let mut body = TimedAutomaton::new();
        let q0 = body.add_location("q0");
        let q1 = body.add_location("q1");
        let x = body.add_clock("x");
        body.add_clock("y");
        body.initial = q0;
        body.add_transition(
            q0,
            q1,
            Guard::and([
                Guard::atom(Atom::cmp_const(x, Op::Gt, int(0))),
                Guard::atom(Atom::cmp_const(x, Op::Lt, int(3))),
            ]),
            [],
        );
        let tile = Tile {
            name: "price3".to_string(),
            alphabet: body.alphabet.clone(),
            locations: body.locations.clone(),
            accepting: BTreeSet::new(),
            clocks: body.clocks.clone(),
            transitions: body.transitions.clone(),
            inputs: vec![q0],
            outputs: vec![q1],
            in_guard: BTreeMap::from([(q0, Guard::True)]),
            in_resets: BTreeMap::from([(q0, BTreeSet::from([x]))]),
            out_guard: BTreeMap::from([(q1, Guard::atom(Atom::cmp_const(x, Op::Eq, int(3))))]),
            out_resets: BTreeMap::from([(q1, BTreeSet::new())]),
        };
        let acc = crate::tiles::accepting_simple_tile(2, Op::Gt);
        let ptta = PricedTiledTa {
            tiles: vec![
                crate::priced::PricedTile {
                    tile,
                    location_cost: vec![2, 1],
                    edge_cost: BTreeMap::from([((q0, q1), 4)]),
                    declared_weight: BTreeMap::from([(WeightKey::Output(q1), 7)]),
                },
                crate::priced::PricedTile {
                    tile: acc.clone(),
                    location_cost: vec![0; acc.locations.len()],
                    edge_cost: acc
                        .transitions
                        .iter()
                        .map(|t| ((t.source, t.target), 0))
                        .collect(),
                    declared_weight: BTreeMap::from([(WeightKey::TileSelf, 5)]),
                },
            ],
            initial: TileId(0),
            connections: vec![TileTransition {
                from: (TileId(0), q1),
                to: (TileId(1), LocId(0)),
                letter: SymbolId(0),
            }],
            connection_cost: vec![2],
        };
        let text = write_priced_tta(&ptta);
        let doc = parse_document(&text).unwrap();
        let parsed = doc.to_priced().unwrap();
        assert_eq!(parsed.connection_cost, vec![2]);
        assert_eq!(parsed.tiles[0].location_cost, vec![2, 1]);
        assert_eq!(parsed.tiles[0].declared_weight[&WeightKey::Output(q1)], 7);
        assert_eq!(
            crate::priced::priced_oracle(&parsed).unwrap(),
            crate::priced::priced_oracle(&ptta).unwrap()
        );
    }
}
