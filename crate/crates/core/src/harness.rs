//! Randomized differential-testing harness: seeded generation of tiled
//! automata with a binary-tree shape, weighted-automaton oracles
//! predicting the verification outcome, verdicts for tools under test,
//! and per-call resource measurement.

use crate::empcheck::{emp_check_observed, EmpCheckError, SweepMode};
use crate::emptiness::Witness;
use crate::interval::IntervalSet;
use crate::rational::Rational;
use crate::ta::{LocId, SymbolId, TimedAutomaton, TransId};
use crate::tiles::{
    accepting_pair_tile, accepting_simple_tile, branching_tile, check_productive, dead_end_tile,
    elementary_tile, flatten, Flattened, Tile, TileError, TileId, TileTransition, TiledTa,
    WeightKey,
};
use crate::weighted::{
    bits_to_intervals, intervals_to_bits, BitSemiring, BitWord, Semiring, WaState,
    WeightedAutomaton, WeightedError,
};
use crate::{guard::Op, ta::ParametricTa};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Tile(#[from] TileError),
    #[error(transparent)]
    EmpCheck(#[from] EmpCheckError),
    #[error(transparent)]
    Weighted(#[from] WeightedError),
    #[error(transparent)]
    Ta(#[from] crate::ta::TaError),
    #[error("tile library failed the productivity check: {0}")]
    Unproductive(String),
    #[error("library has no accepting tile")]
    NoAcceptingTile,
    #[error("witness does not map onto the tiled automaton: {0}")]
    WitnessMapping(String),
    #[error("external tool failed: {0}")]
    External(String),
}

/// A tile together with its declared parameter-set words.
#[derive(Debug, Clone)]
pub struct LibraryTile {
    pub tile: Tile,
    pub declared: BTreeMap<WeightKey, BitWord>,
}

/// A productive tile library with a fixed ambient maximum constant; all
/// bit words share the induced length.
#[derive(Debug, Clone)]
pub struct TileLibrary {
    pub tiles: Vec<LibraryTile>,
    pub ambient_c: u64,
}

impl TileLibrary {
    /// Wraps tiles, computing their parameter sets to produce declared
    /// words, under the ambient constant of the whole library.
    pub fn from_tiles(tiles: Vec<Tile>) -> Result<TileLibrary, HarnessError> {
        let mut ambient_c = 0;
        for t in &tiles {
            ambient_c = ambient_c.max(t.max_constant()?);
        }
        let mut out = Vec::new();
        for tile in tiles {
            let mut declared = BTreeMap::new();
            let keys: Vec<WeightKey> = if tile.is_accepting() {
                vec![WeightKey::TileSelf]
            } else {
                tile.outputs.iter().map(|o| WeightKey::Output(*o)).collect()
            };
            for key in keys {
                let set = crate::tiles::compute_parameter_set(&tile, key, ambient_c)?;
                let word =
                    intervals_to_bits(&set, ambient_c).expect("computed sets lie on the half grid");
                declared.insert(key, word);
            }
            out.push(LibraryTile { tile, declared });
        }
        Ok(TileLibrary {
            tiles: out,
            ambient_c,
        })
    }

    /// Re-derives every parameter set and compares against the declared
    /// words; the generator requires this to hold.
    pub fn check_productive(&self) -> Result<(), HarnessError> {
        for lt in &self.tiles {
            // Dead ends have no outputs and no final locations: nothing
            // to declare, vacuously fine.
            if !lt.tile.is_accepting() && lt.tile.outputs.is_empty() {
                continue;
            }
            if !check_productive(&lt.tile, &lt.declared, self.ambient_c)? {
                return Err(HarnessError::Unproductive(lt.tile.name.clone()));
            }
        }
        Ok(())
    }

    fn accepting_indices(&self) -> Vec<usize> {
        self.tiles
            .iter()
            .enumerate()
            .filter(|(_, t)| t.tile.is_accepting())
            .map(|(i, _)| i)
            .collect()
    }

    fn internal_indices(&self) -> Vec<usize> {
        self.tiles
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.tile.is_accepting() && !t.tile.outputs.is_empty())
            .map(|(i, _)| i)
            .collect()
    }

    fn dead_indices(&self) -> Vec<usize> {
        self.tiles
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.tile.is_accepting() && t.tile.outputs.is_empty())
            .map(|(i, _)| i)
            .collect()
    }
}

/// The built-in library: elementary tiles over a spread of thresholds
/// and comparisons, a two-way branching tile, accepting tiles, and a
/// dead end. Maximum constant 10.
pub fn default_library() -> Result<TileLibrary, HarnessError> {
    let tiles = vec![
        elementary_tile(1, Op::Lt),
        elementary_tile(2, Op::Gt),
        elementary_tile(4, Op::Gt),
        elementary_tile(6, Op::Le),
        elementary_tile(8, Op::Le),
        elementary_tile(10, Op::Ge),
        branching_tile(6, Op::Gt, 4, Op::Le),
        accepting_pair_tile(4, Op::Gt, 8, Op::Le),
        accepting_pair_tile(2, Op::Ge, 2, Op::Le),
        accepting_simple_tile(8, Op::Le),
        accepting_simple_tile(1, Op::Lt),
        dead_end_tile(),
    ];
    TileLibrary::from_tiles(tiles)
}

/// Generation parameters; everything downstream of `seed` is
/// deterministic.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub seed: u64,
    pub max_depth: usize,
    pub accepting_leaf_probability: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_depth: 3,
            accepting_leaf_probability: 0.7,
        }
    }
}

/// Generates a binary tree of tile instances: internal nodes come from
/// the non-accepting library tiles, leaves are accepting with the
/// configured probability and dead ends otherwise. Connections are
/// validated; an output whose candidates all fail validation is pruned.
pub fn generate_random_ptta(
    cfg: &GenConfig,
    library: &TileLibrary,
) -> Result<TiledTa, HarnessError> {
    if library.accepting_indices().is_empty() {
        return Err(HarnessError::NoAcceptingTile);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tta = TiledTa {
        tiles: Vec::new(),
        initial: TileId(0),
        connections: Vec::new(),
    };
    grow(&mut tta, &mut rng, library, cfg, 1, None)?;
    tta.validate()?;
    Ok(tta)
}

fn grow(
    tta: &mut TiledTa,
    rng: &mut ChaCha8Rng,
    library: &TileLibrary,
    cfg: &GenConfig,
    depth: usize,
    parent: Option<(TileId, LocId)>,
) -> Result<(), HarnessError> {
    let pick = |rng: &mut ChaCha8Rng, pool: &[usize]| pool[rng.random_range(0..pool.len())];
    let leaf = depth >= cfg.max_depth;
    let choice = if leaf {
        if rng.random_bool(cfg.accepting_leaf_probability) {
            pick(rng, &library.accepting_indices())
        } else {
            let dead = library.dead_indices();
            if dead.is_empty() {
                pick(rng, &library.accepting_indices())
            } else {
                pick(rng, &dead)
            }
        }
    } else {
        pick(rng, &library.internal_indices())
    };

    // Bounded retries when the connection to the parent fails
    // validation; prune the branch after that.
    let mut tile = library.tiles[choice].tile.clone();
    if let Some((pt, pl)) = parent {
        let mut attempts = 0;
        loop {
            let input = tile.inputs[0];
            if crate::tiles::validate_connection(&tta.tiles[pt.0], pl, &tile, input)? {
                break;
            }
            attempts += 1;
            if attempts > 8 {
                return Ok(()); // prune this branch
            }
            let retry = if leaf {
                pick(rng, &library.accepting_indices())
            } else {
                pick(rng, &library.internal_indices())
            };
            tile = library.tiles[retry].tile.clone();
        }
    }

    let id = TileId(tta.tiles.len());
    tta.tiles.push(tile);
    if let Some((pt, pl)) = parent {
        tta.connections.push(TileTransition {
            from: (pt, pl),
            to: (id, tta.tiles[id.0].inputs[0]),
            letter: SymbolId(0),
        });
    }

    let outputs: Vec<LocId> = tta.tiles[id.0].outputs.clone();
    if outputs.is_empty() {
        return Ok(());
    }
    let children = if outputs.len() == 1 {
        1
    } else {
        rng.random_range(1..=2.min(outputs.len()))
    };
    for q in outputs.into_iter().take(children) {
        grow(tta, rng, library, cfg, depth + 1, Some((id, q)))?;
    }
    Ok(())
}

/// Declared word of the library tile matching the given instance, at
/// the given key. Instances are structural copies of library tiles.
fn declared_word(
    library: &TileLibrary,
    tile: &Tile,
    key: WeightKey,
) -> Result<BitWord, HarnessError> {
    library
        .tiles
        .iter()
        .find(|lt| lt.tile == *tile)
        .and_then(|lt| lt.declared.get(&key).cloned())
        .ok_or_else(|| HarnessError::Unproductive(format!("{} at {key}", tile.name)))
}

/// The underlying weighted automaton over Boolean interval words:
/// states are tile instances, each connection carries the word of its
/// source output, each accepting tile its own word as a final weight.
/// Parallel connections between the same ordered pair combine by OR.
pub fn underlying_wa(
    tta: &TiledTa,
    library: &TileLibrary,
) -> Result<WeightedAutomaton<BitSemiring>, HarnessError> {
    let semiring = BitSemiring::for_max_constant(library.ambient_c);
    let mut wa = WeightedAutomaton::new(semiring, tta.tiles.len(), WaState(tta.initial.0));
    for conn in &tta.connections {
        let (ft, fl) = conn.from;
        let word = declared_word(library, &tta.tiles[ft.0], WeightKey::Output(fl))?;
        wa.add_transition_weight(WaState(ft.0), conn.letter, WaState(conn.to.0 .0), word);
    }
    for (ti, tile) in tta.tiles.iter().enumerate() {
        if tile.is_accepting() {
            let word = declared_word(library, tile, WeightKey::TileSelf)?;
            wa.set_final_weight(WaState(ti), word);
        }
    }
    Ok(wa)
}

/// Predicted admissible parameter intervals: the union over paths from
/// the initial tile to an accepting tile of the intersection of the
/// traversed parameter sets — exactly the shortest distance of the
/// underlying weighted automaton, decoded into intervals.
pub fn predict_intervals(
    tta: &TiledTa,
    library: &TileLibrary,
) -> Result<IntervalSet, HarnessError> {
    let wa = underlying_wa(tta, library)?;
    let word = wa.shortest_distance()?;
    Ok(bits_to_intervals(&word, library.ambient_c))
}

/// Maps a witness over the flattening back onto the tile graph: the
/// visited locations are grouped by owning tile, consecutive repeats
/// collapse, and the cycle must stay inside one accepting tile.
/// Returns the tile path with the letters of the crossed connections.
pub fn witness_to_tile_path(
    tta: &TiledTa,
    flat: &Flattened,
    witness: &Witness,
) -> Result<(Vec<TileId>, Vec<SymbolId>), HarnessError> {
    let bad = |m: &str| HarnessError::WitnessMapping(m.to_string());
    let mut cur = flat.ta.initial;
    let mut tiles = vec![flat.loc_tile[cur.0]];
    let mut letters = Vec::new();
    let step = |cur: &mut LocId,
                t: &TransId,
                tiles: &mut Vec<TileId>,
                letters: &mut Vec<SymbolId>|
     -> Result<(), HarnessError> {
        let tr = flat
            .ta
            .transitions
            .get(t.0)
            .ok_or_else(|| bad("unknown transition id"))?;
        if tr.source != *cur {
            return Err(bad("transitions do not chain"));
        }
        *cur = tr.target;
        let tile = flat.loc_tile[cur.0];
        if *tiles.last().unwrap() != tile {
            if flat.trans_connection[t.0].is_none() {
                return Err(bad("tile change without a connection"));
            }
            tiles.push(tile);
            letters.push(tr.letter);
        }
        Ok(())
    };
    for t in &witness.prefix {
        step(&mut cur, t, &mut tiles, &mut letters)?;
    }
    let cycle_tile = flat.loc_tile[cur.0];
    let before = tiles.len();
    for t in &witness.cycle {
        step(&mut cur, t, &mut tiles, &mut letters)?;
    }
    if tiles.len() != before {
        return Err(bad("cycle crosses a tile boundary"));
    }
    if !tta.tiles[cycle_tile.0].is_accepting() {
        return Err(bad("cycle does not sit in an accepting tile"));
    }
    Ok((tiles, letters))
}

/// What a tool answered for one flattened instance.
#[derive(Debug, Clone)]
pub struct ToolOutcome {
    pub claims_empty: bool,
    pub witness: Option<Witness>,
}

/// Per-checker-call resource numbers.
#[derive(Debug, Clone)]
pub struct CallMeasurement {
    pub wall: Duration,
    pub peak_kbytes: Option<u64>,
}

/// The tools the harness can drive.
#[derive(Debug, Clone)]
pub enum Adapter {
    /// The in-tree parametric emptiness checker.
    Internal { fast: bool },
    /// Planted faults for validating the harness itself.
    Mutant(MutantKind),
    /// An external command; see [`ExternalTool`].
    External(ExternalTool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutantKind {
    /// Answers `empty` unconditionally.
    AlwaysEmpty,
    /// Answers `non-empty` unconditionally, without a witness.
    AlwaysNonEmpty,
    /// Fabricates a witness along a structurally valid but
    /// zero-weight tile path when one exists.
    ZeroWitness,
    /// Substitutes each representative value plus one.
    OffByOne,
}

impl MutantKind {
    pub fn all() -> [MutantKind; 4] {
        [
            MutantKind::AlwaysEmpty,
            MutantKind::AlwaysNonEmpty,
            MutantKind::ZeroWitness,
            MutantKind::OffByOne,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            MutantKind::AlwaysEmpty => "always-empty",
            MutantKind::AlwaysNonEmpty => "always-nonempty",
            MutantKind::ZeroWitness => "zero-witness",
            MutantKind::OffByOne => "off-by-one",
        }
    }
}

/// External command contract: the flattened parametric automaton is
/// written to a file, `{input}` in the command is replaced by its
/// path, and the verdict is parsed from standard output against the
/// two patterns. A line in the witness format is picked up when
/// present. On timeout the process group is killed.
#[derive(Debug, Clone)]
pub struct ExternalTool {
    pub command: String,
    pub timeout: Duration,
    pub nonempty_pattern: String,
    pub empty_pattern: String,
}

/// How a verdict was reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerdictMode {
    /// The tool's witness was mapped to a tile path and its weight
    /// checked to be non-zero.
    WitnessChecked,
    /// The tool's emptiness claim was compared against the existence
    /// of non-zero-weight words.
    NonZeroWordsChecked,
    /// The adapter failed outright (timeout, crash, garbage output).
    Diagnostic(String),
}

impl fmt::Display for VerdictMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictMode::WitnessChecked => write!(f, "witness-checked"),
            VerdictMode::NonZeroWordsChecked => write!(f, "nonzero-words-checked"),
            VerdictMode::Diagnostic(d) => write!(f, "diagnostic:{d}"),
        }
    }
}

/// The harness's judgment of one test.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub passed: bool,
    pub mode: VerdictMode,
    pub tool_claims_empty: Option<bool>,
    pub oracle_word: BitWord,
    pub oracle_intervals: IntervalSet,
    pub witness_tiles: Option<Vec<TileId>>,
    pub measurements: Vec<CallMeasurement>,
}

fn parametric_view(flat: &Flattened) -> Result<ParametricTa, HarnessError> {
    Ok(ParametricTa::new(flat.ta.clone(), "mu")?)
}

/// Runs the internal checker, reporting the first witness found and
/// per-call wall times.
fn run_internal(
    pta: &ParametricTa,
    fast: bool,
    shift: Option<Rational>,
) -> Result<(ToolOutcome, Vec<CallMeasurement>), HarnessError> {
    let mut witness: Option<Witness> = None;
    let mut calls = Vec::new();
    let mut last = Instant::now();
    let mode = if fast {
        SweepMode::FailFast
    } else {
        SweepMode::Exhaustive
    };
    let result = match shift {
        None => emp_check_observed(pta, mode, &mut |_, w| {
            calls.push(CallMeasurement {
                wall: last.elapsed(),
                peak_kbytes: None,
            });
            last = Instant::now();
            if witness.is_none() {
                witness = w.clone();
            }
        })?,
        Some(delta) => {
            // Off-by-one fault: probe at value + delta instead.
            let reps = crate::empcheck::Representatives::compute(
                pta.max_constant()?,
                pta.location_count(),
            );
            let mut values = vec![reps.xi];
            values.extend(reps.half_integers.iter().copied());
            values.extend(reps.midpoints.iter().copied());
            let mut nonempty = false;
            for v in values {
                let w = crate::empcheck::check_at_value(pta, v + delta)?;
                calls.push(CallMeasurement {
                    wall: last.elapsed(),
                    peak_kbytes: None,
                });
                last = Instant::now();
                if w.is_some() {
                    nonempty = true;
                    if witness.is_none() {
                        witness = w;
                    }
                    if fast {
                        break;
                    }
                }
            }
            crate::empcheck::EmpResult {
                nonempty,
                verified_values: Vec::new(),
                exhaustive: false,
            }
        }
    };
    Ok((
        ToolOutcome {
            claims_empty: !result.nonempty,
            witness,
        },
        calls,
    ))
}

/// Breadth-first internal path through a tile body, guards ignored.
fn structural_path(tile: &Tile, from: LocId, to: LocId) -> Option<Vec<usize>> {
    use std::collections::VecDeque;
    if from == to {
        return Some(Vec::new());
    }
    let mut pred: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = std::collections::BTreeSet::from([from.0]);
    while let Some(u) = queue.pop_front() {
        for (ti, t) in tile.transitions.iter().enumerate() {
            if t.source != u {
                continue;
            }
            if !seen.insert(t.target.0) {
                continue;
            }
            pred.insert(t.target.0, ti);
            if t.target == to {
                let mut path = Vec::new();
                let mut cur = to.0;
                while cur != from.0 {
                    let e = pred[&cur];
                    path.push(e);
                    cur = tile.transitions[e].source.0;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(t.target);
        }
    }
    None
}

/// Fabricates a structurally valid witness along a given tile path,
/// ignoring guards: internal body paths stitched with connections, and
/// a cycle through an accepting location of the last tile.
fn fabricate_witness(tta: &TiledTa, flat: &Flattened, tile_path: &[TileId]) -> Option<Witness> {
    let mut prefix = Vec::new();
    // Transition index offsets of each tile's body in the flattening.
    let mut internal_offset = vec![0usize; tta.tiles.len()];
    let mut off = 0;
    for (ti, tile) in tta.tiles.iter().enumerate() {
        internal_offset[ti] = off;
        off += tile.transitions.len();
    }
    let conn_offset = off;

    let mut entry = tta.tiles[tile_path[0].0].inputs[0];
    for pair in tile_path.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (ci, conn) = tta
            .connections
            .iter()
            .enumerate()
            .find(|(_, c)| c.from.0 == a && c.to.0 == b)?;
        let tile = &tta.tiles[a.0];
        let body = structural_path(tile, entry, conn.from.1)?;
        prefix.extend(body.into_iter().map(|e| TransId(internal_offset[a.0] + e)));
        prefix.push(TransId(conn_offset + ci));
        entry = conn.to.1;
    }
    let last = *tile_path.last().unwrap();
    let tile = &tta.tiles[last.0];
    let target = *tile.accepting.iter().next()?;
    let body = structural_path(tile, entry, target)?;
    prefix.extend(
        body.into_iter()
            .map(|e| TransId(internal_offset[last.0] + e)),
    );
    // A cycle from the accepting location back to itself.
    let cycle_edge = tile
        .transitions
        .iter()
        .enumerate()
        .find(|(_, t)| t.source == target && t.target == target)
        .map(|(e, _)| vec![e])
        .or_else(|| {
            tile.transitions.iter().enumerate().find_map(|(e, t)| {
                if t.source != target {
                    return None;
                }
                let back = structural_path(tile, t.target, target)?;
                let mut c = vec![e];
                c.extend(back);
                Some(c)
            })
        })?;
    let cycle = cycle_edge
        .into_iter()
        .map(|e| TransId(internal_offset[last.0] + e))
        .collect();
    let _ = flat;
    Some(Witness { prefix, cycle })
}

/// A structurally reachable accepting tile path whose accumulated word
/// is zero, if any: depth-first over the tile graph, AND-ing words.
fn zero_weight_path(
    tta: &TiledTa,
    library: &TileLibrary,
) -> Result<Option<Vec<TileId>>, HarnessError> {
    let semiring = BitSemiring::for_max_constant(library.ambient_c);
    let mut stack = vec![(tta.initial, semiring.one(), vec![tta.initial])];
    while let Some((tile, word, path)) = stack.pop() {
        if tta.tiles[tile.0].is_accepting() {
            let fw = declared_word(library, &tta.tiles[tile.0], WeightKey::TileSelf)?;
            if word.and(&fw).is_zero() {
                return Ok(Some(path));
            }
            continue;
        }
        for conn in &tta.connections {
            if conn.from.0 != tile || path.contains(&conn.to.0) {
                continue;
            }
            let w = declared_word(library, &tta.tiles[tile.0], WeightKey::Output(conn.from.1))?;
            let mut next_path = path.clone();
            next_path.push(conn.to.0);
            stack.push((conn.to.0, word.and(&w), next_path));
        }
    }
    Ok(None)
}

fn run_external(
    tool: &ExternalTool,
    pta: &ParametricTa,
) -> Result<(ToolOutcome, Vec<CallMeasurement>), HarnessError> {
    use std::io::Read;
    use std::os::unix::process::CommandExt;
    use std::process::{Command, Stdio};
    use std::sync::atomic::{AtomicU64, Ordering};

    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let path = std::env::temp_dir().join(format!(
        "tadiff-{}-{}.ta",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::write(&path, crate::format::write_parametric_ta(pta))
        .map_err(|e| HarnessError::External(format!("write input: {e}")))?;
    let command = tool.command.replace("{input}", &path.to_string_lossy());

    let started = Instant::now();
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .process_group(0)
        .spawn()
        .map_err(|e| HarnessError::External(format!("spawn: {e}")))?;

    let deadline = started + tool.timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) => {
                if Instant::now() >= deadline {
                    unsafe {
                        libc::killpg(child.id() as i32, libc::SIGKILL);
                    }
                    let _ = child.wait();
                    break None;
                }
                std::thread::sleep(Duration::from_millis(2));
            }
            Err(e) => {
                let _ = std::fs::remove_file(&path);
                return Err(HarnessError::External(format!("wait: {e}")));
            }
        }
    };
    let wall = started.elapsed();
    let peak = child_peak_kbytes();
    let _ = std::fs::remove_file(&path);

    let Some(status) = status else {
        return Err(HarnessError::External("timeout".to_string()));
    };
    let mut stdout = String::new();
    if let Some(mut out) = child.stdout.take() {
        let _ = out.read_to_string(&mut stdout);
    }
    if !status.success() {
        return Err(HarnessError::External(format!(
            "exit status {:?}",
            status.code()
        )));
    }
    let nonempty = regex::Regex::new(&tool.nonempty_pattern)
        .map_err(|e| HarnessError::External(format!("bad pattern: {e}")))?
        .is_match(&stdout);
    let empty = regex::Regex::new(&tool.empty_pattern)
        .map_err(|e| HarnessError::External(format!("bad pattern: {e}")))?
        .is_match(&stdout);
    let claims_empty = match (nonempty, empty) {
        (true, _) => false,
        (false, true) => true,
        (false, false) => return Err(HarnessError::External("unparseable output".to_string())),
    };
    let witness = stdout
        .lines()
        .find(|l| l.contains("prefix:"))
        .and_then(Witness::parse);
    Ok((
        ToolOutcome {
            claims_empty,
            witness,
        },
        vec![CallMeasurement {
            wall,
            peak_kbytes: peak,
        }],
    ))
}

/// Peak resident size of reaped children, from the OS rusage counters,
/// in kilobytes; absent where unsupported.
fn child_peak_kbytes() -> Option<u64> {
    unsafe {
        let mut usage: libc::rusage = std::mem::zeroed();
        if libc::getrusage(libc::RUSAGE_CHILDREN, &mut usage) == 0 {
            Some(usage.ru_maxrss as u64)
        } else {
            None
        }
    }
}

/// Runs one tool on one generated instance and judges the answer: a
/// non-empty claim with a witness is accepted exactly when the witness
/// maps to a tile path of non-zero weight; any other claim is compared
/// against the existence of non-zero-weight words.
pub fn test_tool(
    adapter: &Adapter,
    tta: &TiledTa,
    library: &TileLibrary,
) -> Result<Verdict, HarnessError> {
    let flat = flatten(tta)?;
    let pta = parametric_view(&flat)?;
    let wa = underlying_wa(tta, library)?;
    let oracle_word = wa.shortest_distance()?;
    let oracle_intervals = bits_to_intervals(&oracle_word, library.ambient_c);

    let outcome = match adapter {
        Adapter::Internal { fast } => run_internal(&pta, *fast, None),
        Adapter::Mutant(MutantKind::AlwaysEmpty) => Ok((
            ToolOutcome {
                claims_empty: true,
                witness: None,
            },
            vec![CallMeasurement {
                wall: Duration::ZERO,
                peak_kbytes: None,
            }],
        )),
        Adapter::Mutant(MutantKind::AlwaysNonEmpty) => Ok((
            ToolOutcome {
                claims_empty: false,
                witness: None,
            },
            vec![CallMeasurement {
                wall: Duration::ZERO,
                peak_kbytes: None,
            }],
        )),
        Adapter::Mutant(MutantKind::OffByOne) => {
            run_internal(&pta, true, Some(crate::rational::int(1)))
        }
        Adapter::Mutant(MutantKind::ZeroWitness) => {
            if let Some(path) = zero_weight_path(tta, library)? {
                if let Some(w) = fabricate_witness(tta, &flat, &path) {
                    Ok((
                        ToolOutcome {
                            claims_empty: false,
                            witness: Some(w),
                        },
                        vec![CallMeasurement {
                            wall: Duration::ZERO,
                            peak_kbytes: None,
                        }],
                    ))
                } else {
                    run_internal(&pta, true, None)
                }
            } else {
                run_internal(&pta, true, None)
            }
        }
        Adapter::External(tool) => run_external(tool, &pta),
    };

    let (outcome, measurements) = match outcome {
        Ok(x) => x,
        Err(HarnessError::External(diag)) => {
            return Ok(Verdict {
                passed: false,
                mode: VerdictMode::Diagnostic(diag),
                tool_claims_empty: None,
                oracle_word,
                oracle_intervals,
                witness_tiles: None,
                measurements: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };

    if !outcome.claims_empty {
        if let Some(witness) = &outcome.witness {
            return Ok(match witness_to_tile_path(tta, &flat, witness) {
                Ok((tiles, letters)) => {
                    let states: Vec<WaState> = tiles.iter().map(|t| WaState(t.0)).collect();
                    let weight = wa.path_weight(&states, &letters);
                    Verdict {
                        passed: !weight.is_zero(),
                        mode: VerdictMode::WitnessChecked,
                        tool_claims_empty: Some(false),
                        oracle_word,
                        oracle_intervals,
                        witness_tiles: Some(tiles),
                        measurements,
                    }
                }
                Err(e) => Verdict {
                    passed: false,
                    mode: VerdictMode::Diagnostic(format!("witness mapping: {e}")),
                    tool_claims_empty: Some(false),
                    oracle_word,
                    oracle_intervals,
                    witness_tiles: None,
                    measurements,
                },
            });
        }
    }
    let nonzero = !oracle_word.is_zero();
    Ok(Verdict {
        passed: outcome.claims_empty != nonzero,
        mode: VerdictMode::NonZeroWordsChecked,
        tool_claims_empty: Some(outcome.claims_empty),
        oracle_word,
        oracle_intervals,
        witness_tiles: None,
        measurements,
    })
}

/// Campaign-level configuration.
#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub seed: u64,
    pub runs: usize,
    pub workers: usize,
    pub max_depth: usize,
    pub accepting_leaf_probability: f64,
    pub fast: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            seed: 0,
            runs: 50,
            workers: 1,
            max_depth: 3,
            accepting_leaf_probability: 0.7,
            fast: true,
        }
    }
}

/// One test's record in a campaign.
#[derive(Debug, Clone)]
pub struct TestRecord {
    pub test_id: usize,
    pub seed: u64,
    pub size: usize,
    pub verdict: Verdict,
}

/// Aggregate counters in the shape of the scalability report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignSummary {
    pub tests: usize,
    pub max_size: usize,
    pub nonempty: usize,
    pub empty: usize,
    pub accuracy_percent_times_100: u64,
    pub timeouts: usize,
    pub failed_ids: Vec<usize>,
}

impl CampaignSummary {
    pub fn render(&self) -> String {
        format!(
            "#Tests    {}\nMaxSize   {}\n#NonEmpty {}\n#Empty    {}\nAccuracy  {}.{:02}%\nTimeout   {}\n",
            self.tests,
            self.max_size,
            self.nonempty,
            self.empty,
            self.accuracy_percent_times_100 / 100,
            self.accuracy_percent_times_100 % 100,
            self.timeouts
        )
    }
}

/// Per-test seed derivation: one split of the campaign seed.
pub fn derive_seed(campaign_seed: u64, index: usize) -> u64 {
    // splitmix64 step
    let mut z = campaign_seed.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(index as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Runs a campaign of seeded tests against one adapter, spreading
/// tests over the configured worker count; records come back in test
/// order regardless of scheduling.
pub fn run_campaign(
    cfg: &CampaignConfig,
    adapter: &Adapter,
    library: &TileLibrary,
) -> Result<(Vec<TestRecord>, CampaignSummary), HarnessError> {
    library.check_productive()?;
    let worker_count = cfg.workers.max(1);
    let mut slots: Vec<Option<Result<TestRecord, String>>> = vec![None; cfg.runs];
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots_mutex = std::sync::Mutex::new(&mut slots);

    std::thread::scope(|scope| {
        let next_ref = &next;
        let slots_ref = &slots_mutex;
        let mut handles = Vec::new();
        for _ in 0..worker_count {
            handles.push(scope.spawn(move || loop {
                let i = next_ref.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= cfg.runs {
                    break;
                }
                let seed = derive_seed(cfg.seed, i);
                let gen = GenConfig {
                    seed,
                    max_depth: cfg.max_depth,
                    accepting_leaf_probability: cfg.accepting_leaf_probability,
                };
                let record = (|| -> Result<TestRecord, HarnessError> {
                    let tta = generate_random_ptta(&gen, library)?;
                    let size = flatten(&tta)?.ta.size();
                    let verdict = test_tool(adapter, &tta, library)?;
                    Ok(TestRecord {
                        test_id: i,
                        seed,
                        size,
                        verdict,
                    })
                })();
                slots_ref.lock().unwrap()[i] = Some(record.map_err(|e| e.to_string()));
            }));
        }
        for h in handles {
            h.join().expect("campaign worker panicked");
        }
    });
    let _ = slots_mutex.into_inner().unwrap();

    let mut records = Vec::with_capacity(cfg.runs);
    for slot in slots {
        match slot.expect("campaign slot not filled") {
            Ok(r) => records.push(r),
            Err(e) => return Err(HarnessError::External(e)),
        }
    }

    let mut summary = CampaignSummary {
        tests: records.len(),
        max_size: records.iter().map(|r| r.size).max().unwrap_or(0),
        nonempty: 0,
        empty: 0,
        accuracy_percent_times_100: 0,
        timeouts: 0,
        failed_ids: Vec::new(),
    };
    let mut passes = 0;
    for r in &records {
        if r.verdict.oracle_word.is_zero() {
            summary.empty += 1;
        } else {
            summary.nonempty += 1;
        }
        if r.verdict.passed {
            passes += 1;
        } else {
            summary.failed_ids.push(r.test_id);
            if matches!(&r.verdict.mode, VerdictMode::Diagnostic(d) if d.contains("timeout")) {
                summary.timeouts += 1;
            }
        }
    }
    if !records.is_empty() {
        summary.accuracy_percent_times_100 = (passes * 10_000 / records.len()) as u64;
    }
    Ok((records, summary))
}

/// CSV rows for one record, schema
/// `test_id,seed,size,call_index,wall_seconds,peak_kbytes,verdict`.
pub fn csv_rows(record: &TestRecord) -> Vec<String> {
    let verdict = if record.verdict.passed {
        "pass".to_string()
    } else {
        match &record.verdict.mode {
            VerdictMode::Diagnostic(d) if d.contains("timeout") => "timeout".to_string(),
            _ => "fail".to_string(),
        }
    };
    let mut rows = Vec::new();
    for (i, call) in record.verdict.measurements.iter().enumerate() {
        rows.push(format!(
            "{},{},{},{},{:.6},{},{}",
            record.test_id,
            record.seed,
            record.size,
            i,
            call.wall.as_secs_f64(),
            call.peak_kbytes.map(|k| k.to_string()).unwrap_or_default(),
            verdict
        ));
    }
    if record.verdict.measurements.is_empty() {
        rows.push(format!(
            "{},{},{},0,,,{verdict}",
            record.test_id, record.seed, record.size
        ));
    }
    rows
}

pub const CSV_HEADER: &str = "test_id,seed,size,call_index,wall_seconds,peak_kbytes,verdict";

/// Builds the scalability-ladder instance with the given number of
/// chain links: a chain of elementary tiles into a branching tile with
/// two accepting leaves. Flattened size is `6 * links + 19`.
pub fn ladder_tta(links: usize) -> TiledTa {
    let mut tiles: Vec<Tile> = Vec::new();
    let mut connections = Vec::new();
    for i in 0..links {
        tiles.push(elementary_tile(4, Op::Gt));
        if i > 0 {
            connections.push(TileTransition {
                from: (TileId(i - 1), LocId(2)),
                to: (TileId(i), LocId(0)),
                letter: SymbolId(0),
            });
        }
    }
    let branch = TileId(tiles.len());
    tiles.push(branching_tile(6, Op::Gt, 4, Op::Le));
    if links > 0 {
        connections.push(TileTransition {
            from: (TileId(links - 1), LocId(2)),
            to: (branch, LocId(0)),
            letter: SymbolId(0),
        });
    }
    let acc_a = TileId(tiles.len());
    tiles.push(accepting_simple_tile(8, Op::Le));
    connections.push(TileTransition {
        from: (branch, LocId(2)),
        to: (acc_a, LocId(0)),
        letter: SymbolId(0),
    });
    let acc_b = TileId(tiles.len());
    // Disjoint from the low branch's (0, 2]: this leaf is dead at
    // every rung, so the sweep profile is identical across sizes.
    tiles.push(accepting_gate_tile(2, Op::Gt));
    connections.push(TileTransition {
        from: (branch, LocId(3)),
        to: (acc_b, LocId(0)),
        letter: SymbolId(0),
    });
    TiledTa {
        tiles,
        initial: TileId(0),
        connections,
    }
}

/// A two-location accepting tile: one guarded step `y == mu && y cmp n`
/// into an accepting self-loop, forcing `mu cmp n` within `(0, +inf)`.
pub fn accepting_gate_tile(n: u64, cmp: Op) -> Tile {
    use crate::guard::{Atom, Guard};
    use crate::rational::int;
    use std::collections::BTreeSet;

    let mut body = TimedAutomaton::new();
    let q0 = body.add_location("q0");
    let q1 = body.add_location("q1");
    body.add_clock("x");
    let y = body.add_clock("y");
    body.initial = q0;
    body.accepting.insert(q1);
    body.add_transition(
        q0,
        q1,
        Guard::and([
            Guard::atom(Atom::cmp_param(y, Op::Eq)),
            Guard::atom(Atom::cmp_const(y, cmp, int(n as i64))),
        ]),
        [],
    );
    body.add_transition(q1, q1, Guard::True, []);
    Tile {
        name: format!("gate_{}_{}", crate::tiles::op_slug(cmp), n),
        alphabet: body.alphabet.clone(),
        locations: body.locations.clone(),
        accepting: body.accepting.clone(),
        clocks: body.clocks.clone(),
        transitions: body.transitions.clone(),
        inputs: vec![q0],
        outputs: Vec::new(),
        in_guard: BTreeMap::from([(q0, crate::guard::Guard::True)]),
        in_resets: BTreeMap::from([(q0, BTreeSet::from([y]))]),
        out_guard: BTreeMap::new(),
        out_resets: BTreeMap::new(),
    }
}

/// Total wall time of one fail-fast sweep over the ladder instance,
/// with the per-call breakdown.
pub fn measure_ladder(links: usize) -> Result<(usize, Vec<CallMeasurement>), HarnessError> {
    let tta = ladder_tta(links);
    let flat = flatten(&tta)?;
    let pta = parametric_view(&flat)?;
    let (_, calls) = run_internal(&pta, true, None)?;
    Ok((flat.ta.size(), calls))
}

/// Shape bounds for [`random_plain_ta`].
#[derive(Debug, Clone, Copy)]
pub struct RandomTaConfig {
    pub max_locations: usize,
    pub max_transitions: usize,
    pub max_constant: u64,
}

impl Default for RandomTaConfig {
    fn default() -> Self {
        RandomTaConfig {
            max_locations: 6,
            max_transitions: 10,
            max_constant: 3,
        }
    }
}

/// A random parameter-free automaton over two clocks, for differential
/// testing of the emptiness checkers. Guards are conjunctions of up to
/// two atoms; the strict-monotonicity transformation is left to the
/// caller.
pub fn random_plain_ta(seed: u64, cfg: &RandomTaConfig) -> TimedAutomaton {
    use crate::guard::{Atom, Bound, Guard};
    use crate::rational::int;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ta = TimedAutomaton::new();
    let n_locs = rng.random_range(2..=cfg.max_locations);
    for i in 0..n_locs {
        ta.add_location(&format!("q{i}"));
    }
    let x = ta.add_clock("x");
    let y = ta.add_clock("y");
    ta.initial = LocId(0);
    let n_accepting = rng.random_range(1..=n_locs.min(2));
    while ta.accepting.len() < n_accepting {
        ta.accepting.insert(LocId(rng.random_range(0..n_locs)));
    }
    let ops = [Op::Lt, Op::Le, Op::Eq, Op::Ge, Op::Gt];
    let n_trans = rng.random_range(1..=cfg.max_transitions);
    for _ in 0..n_trans {
        let src = LocId(rng.random_range(0..n_locs));
        let dst = LocId(rng.random_range(0..n_locs));
        let mut atoms = Vec::new();
        for clock in [x, y] {
            if rng.random_bool(0.5) {
                atoms.push(Guard::Atom(Atom {
                    clock,
                    op: ops[rng.random_range(0..ops.len())],
                    bound: Bound::Const(int(rng.random_range(0..=cfg.max_constant) as i64)),
                }));
            }
        }
        let guard = Guard::and(atoms);
        let mut resets = Vec::new();
        for clock in [x, y] {
            // Skip resets that would break the non-resetting-test shape.
            if rng.random_bool(0.4) && !guard.clocks().contains(&clock) {
                resets.push(clock);
            }
        }
        ta.add_transition(src, dst, guard, resets);
    }
    ta
}
