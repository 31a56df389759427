//! Toolkit for randomized differential testing of timed-automata model
//! checkers: composes timed automata from parametric and priced tiles,
//! decides parametric language emptiness by finite substitution of
//! representative parameter values, and predicts verification outcomes
//! through semiring-weighted automaton oracles.

pub mod dbm;
pub mod empcheck;
pub mod emptiness;
pub mod format;
pub mod guard;
pub mod harness;
pub mod interval;
pub mod priced;
pub mod rational;
pub mod region;
pub mod ta;
pub mod tchecker;
pub mod tiles;
pub mod weighted;

pub use empcheck::{check_non_par_emptiness, emp_check, EmpResult, Representatives, SweepMode};
pub use emptiness::{buchi_nonempty, replay_witness, verify_second_iteration, Witness};
pub use guard::{Atom, Bound, ClockId, Guard, Op};
pub use harness::{
    default_library, generate_random_ptta, predict_intervals, run_campaign, test_tool,
    underlying_wa, witness_to_tile_path, Adapter, CampaignConfig, ExternalTool, GenConfig,
    MutantKind, RandomTaConfig, TileLibrary, Verdict, VerdictMode,
};
pub use interval::IntervalSet;
pub use priced::{
    min_cost_brute, priced_oracle, random_priced_tree, run_cost, PricedTa, PricedTile,
    PricedTiledTa, TimedRun,
};
pub use rational::Rational;
pub use region::{region_nonempty, RegionLimits};
pub use ta::{LocId, ParametricTa, SymbolId, TimedAutomaton, TransId, Transition};
pub use tiles::{flatten, Tile, TileId, TileTransition, TiledTa, WeightKey};
pub use weighted::{BitSemiring, BitWord, MinPlus, PriceValue, Semiring, WeightedAutomaton};
