//! Command-line front end: generation of tiled automata, flattening,
//! parametric emptiness checking, oracle prediction, differential-test
//! campaigns, priced oracles, external-checker export, and the
//! scalability measurement ladder.
//!
//! Exit codes: 0 when a verdict was produced, 1 when a tool under test
//! failed, 2 on usage or input errors.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::time::Duration;
use tadiff_core::empcheck::{emp_check, SweepMode};
use tadiff_core::format::{
    parse_document, parse_ta, render_verified_values, write_ta, write_tiled_ta,
};
use tadiff_core::harness::{
    csv_rows, default_library, generate_random_ptta, measure_ladder, predict_intervals,
    run_campaign, Adapter, CallMeasurement, CampaignConfig, ExternalTool, GenConfig, MutantKind,
    TileLibrary, CSV_HEADER,
};
use tadiff_core::tchecker::{export_tchecker, ExportError};
use tadiff_core::tiles::flatten;
use tadiff_core::weighted::intervals_to_bits;
use tadiff_core::{min_cost_brute, priced_oracle, ParametricTa};

#[derive(Parser)]
#[command(
    name = "tadiff",
    about = "Compose tiled timed automata, check parametric emptiness, and differential-test timed-automata model checkers with weighted-automaton oracles",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GenOpts {
    /// Seed for all randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Depth of the generated binary tree.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Probability that a leaf is accepting.
    #[arg(long, default_value_t = 0.7)]
    p: f64,
    /// Tile library file; the built-in library when absent.
    #[arg(long)]
    library: Option<PathBuf>,
    /// Keep only library tiles whose constants stay within this bound.
    #[arg(long)]
    c: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded tiled automaton and its flattening.
    Gen {
        #[command(flatten)]
        opts: GenOpts,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Flatten a tiled automaton document into a plain automaton.
    Flatten {
        file: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide parametric emptiness of an automaton file.
    Check {
        file: PathBuf,
        /// Stop at the first non-empty verdict.
        #[arg(long)]
        fast: bool,
    },
    /// Predict the admissible parameter intervals of a tiled automaton.
    Oracle { file: PathBuf },
    /// Run a differential-testing campaign against an adapter.
    Harness {
        #[command(flatten)]
        opts: GenOpts,
        /// Number of tests.
        #[arg(long, default_value_t = 50)]
        runs: usize,
        /// Worker threads (or the TADIFF_WORKERS variable).
        #[arg(long)]
        workers: Option<usize>,
        /// internal | mutant:<name> | cmd:<template with {input}>
        #[arg(long, default_value = "internal")]
        adapter: String,
        /// Timeout for external adapters, in seconds.
        #[arg(long, default_value_t = 10)]
        timeout: u64,
        /// Regular expression claiming non-emptiness on stdout.
        #[arg(long, default_value = "nonempty|NOT empty|not empty")]
        nonempty_pattern: String,
        /// Regular expression claiming emptiness on stdout.
        #[arg(long, default_value = "(?m)^empty|is empty")]
        empty_pattern: String,
        /// Exhaustive representative sweep instead of fail-fast.
        #[arg(long)]
        exhaustive: bool,
        /// Output directory for the CSV and summary.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Min-plus oracle and its brute-force check on a priced document.
    PricedOracle { file: PathBuf },
    /// Export a parameter-free automaton in the external checker syntax.
    ExportTchecker {
        file: PathBuf,
        /// System name in the exported model.
        #[arg(long, default_value = "model")]
        name: String,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the checker across the instance-size ladder.
    Measure {
        /// Chain lengths of the ladder instances.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0usize, 40, 80])]
        links: Vec<usize>,
        /// Repetitions per rung; the fastest run counts.
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Write per-call rows to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn load_library(opts: &GenOpts) -> Result<TileLibrary> {
    let library = match &opts.library {
        None => default_library()?,
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading library {}", p.display()))?;
            let doc = parse_document(&text)?;
            if doc.tiles.is_empty() {
                bail!("library {} declares no tiles", p.display());
            }
            TileLibrary::from_tiles(doc.tiles.into_iter().map(|d| d.tile).collect())?
        }
    };
    match opts.c {
        None => Ok(library),
        Some(bound) => {
            let mut kept = Vec::new();
            for lt in library.tiles {
                if lt.tile.max_constant()? <= bound {
                    kept.push(lt.tile);
                }
            }
            if kept.is_empty() {
                bail!("no library tile fits within constant bound {bound}");
            }
            Ok(TileLibrary::from_tiles(kept)?)
        }
    }
}

fn parse_adapter(
    spec: &str,
    timeout: u64,
    nonempty_pattern: &str,
    empty_pattern: &str,
    fast: bool,
) -> Result<Adapter> {
    if spec == "internal" {
        return Ok(Adapter::Internal { fast });
    }
    if let Some(name) = spec.strip_prefix("mutant:") {
        let kind = MutantKind::all()
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                let names: Vec<&str> = MutantKind::all().iter().map(|k| k.name()).collect();
                anyhow!("unknown mutant `{name}`; one of: {}", names.join(", "))
            })?;
        return Ok(Adapter::Mutant(kind));
    }
    if let Some(cmd) = spec.strip_prefix("cmd:") {
        return Ok(Adapter::External(ExternalTool {
            command: cmd.to_string(),
            timeout: Duration::from_secs(timeout),
            nonempty_pattern: nonempty_pattern.to_string(),
            empty_pattern: empty_pattern.to_string(),
        }));
    }
    bail!("adapter must be `internal`, `mutant:<name>`, or `cmd:<template>`")
}

fn declared_intervals_of(
    tta: &tadiff_core::TiledTa,
    library: &TileLibrary,
) -> Vec<std::collections::BTreeMap<tadiff_core::WeightKey, tadiff_core::IntervalSet>> {
    tta.tiles
        .iter()
        .map(|tile| {
            library
                .tiles
                .iter()
                .find(|lt| lt.tile == *tile)
                .map(|lt| {
                    lt.declared
                        .iter()
                        .map(|(k, w)| {
                            (
                                *k,
                                tadiff_core::weighted::bits_to_intervals(w, library.ambient_c),
                            )
                        })
                        .collect()
                })
                .unwrap_or_default()
        })
        .collect()
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen { opts, out } => {
            let library = load_library(&opts)?;
            library.check_productive()?;
            let cfg = GenConfig {
                seed: opts.seed,
                max_depth: opts.depth,
                accepting_leaf_probability: opts.p,
            };
            let tta = generate_random_ptta(&cfg, &library)?;
            let flat = flatten(&tta)?;
            std::fs::create_dir_all(&out)?;
            let tta_path = out.join(format!("tta_{}.tta", opts.seed));
            let flat_path = out.join(format!("flat_{}.ta", opts.seed));
            std::fs::write(
                &tta_path,
                write_tiled_ta(&tta, &declared_intervals_of(&tta, &library)),
            )?;
            std::fs::write(&flat_path, write_ta(&flat.ta, Some("mu")))?;
            println!("size={}", flat.ta.size());
            println!("wrote {} and {}", tta_path.display(), flat_path.display());
            Ok(0)
        }
        Command::Flatten { file, out } => {
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let doc = parse_document(&text)?;
            let tta = doc.to_tiled_ta()?;
            let flat = flatten(&tta)?;
            let rendered = write_ta(&flat.ta, Some("mu"));
            match out {
                Some(p) => std::fs::write(p, rendered)?,
                None => print!("{rendered}"),
            }
            Ok(0)
        }
        Command::Check { file, fast } => {
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let (ta, param) = parse_ta(&text)?;
            let param = param.ok_or_else(|| anyhow!("file declares no parameter"))?;
            let pta = ParametricTa::new(ta, &param)?;
            let mode = if fast {
                SweepMode::FailFast
            } else {
                SweepMode::Exhaustive
            };
            let result = emp_check(&pta, mode)?;
            println!("{}", if result.nonempty { "nonempty" } else { "empty" });
            println!("{}", render_verified_values(&result.verified_values));
            Ok(0)
        }
        Command::Oracle { file } => {
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let doc = parse_document(&text)?;
            let tta = doc.to_tiled_ta()?;
            let library = TileLibrary::from_tiles(tta.tiles.clone())?;
            let predicted = predict_intervals(&tta, &library)?;
            let word = intervals_to_bits(&predicted, library.ambient_c)?;
            println!("intervals: {predicted}");
            println!("word: {word}");
            println!(
                "verdict: {}",
                if predicted.is_empty() {
                    "empty"
                } else {
                    "nonempty"
                }
            );
            Ok(0)
        }
        Command::Harness {
            opts,
            runs,
            workers,
            adapter,
            timeout,
            nonempty_pattern,
            empty_pattern,
            exhaustive,
            out,
        } => {
            let library = load_library(&opts)?;
            let workers = workers
                .or_else(|| {
                    std::env::var("TADIFF_WORKERS")
                        .ok()
                        .and_then(|v| v.parse().ok())
                })
                .unwrap_or(1);
            let adapter = parse_adapter(
                &adapter,
                timeout,
                &nonempty_pattern,
                &empty_pattern,
                !exhaustive,
            )?;
            let cfg = CampaignConfig {
                seed: opts.seed,
                runs,
                workers,
                max_depth: opts.depth,
                accepting_leaf_probability: opts.p,
                fast: !exhaustive,
            };
            let (records, summary) = run_campaign(&cfg, &adapter, &library)?;
            std::fs::create_dir_all(&out)?;
            let mut csv = String::from(CSV_HEADER);
            csv.push('\n');
            for r in &records {
                for row in csv_rows(r) {
                    csv.push_str(&row);
                    csv.push('\n');
                }
            }
            std::fs::write(out.join("results.csv"), csv)?;
            std::fs::write(out.join("summary.txt"), summary.render())?;
            print!("{}", summary.render());
            if summary.failed_ids.is_empty() {
                Ok(0)
            } else {
                println!(
                    "failing tests: {}",
                    summary
                        .failed_ids
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                );
                Ok(1)
            }
        }
        Command::PricedOracle { file } => {
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let doc = parse_document(&text)?;
            let ptta = doc.to_priced()?;
            let oracle = priced_oracle(&ptta)?;
            let brute = min_cost_brute(&ptta)?;
            println!("oracle: {oracle}");
            println!("brute: {brute}");
            println!("agreement: {}", if oracle == brute { "yes" } else { "NO" });
            Ok(0)
        }
        Command::ExportTchecker { file, name, out } => {
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let (ta, _param) = parse_ta(&text)?;
            let rendered = export_tchecker(&ta, &name).map_err(|e| match e {
                ExportError::Parametric => {
                    anyhow!("automaton is parametric; substitute a value first")
                }
                other => anyhow!(other.to_string()),
            })?;
            match out {
                Some(p) => std::fs::write(p, rendered)?,
                None => print!("{rendered}"),
            }
            Ok(0)
        }
        Command::Measure {
            links,
            repeats,
            csv,
        } => {
            let mut totals: Vec<f64> = Vec::new();
            let mut csv_text = String::from(CSV_HEADER);
            csv_text.push('\n');
            for &l in &links {
                let mut best: Option<(usize, Vec<CallMeasurement>, f64)> = None;
                for _ in 0..repeats.max(1) {
                    let (size, calls) = measure_ladder(l)?;
                    let total: f64 = calls.iter().map(|c| c.wall.as_secs_f64()).sum();
                    if best.as_ref().is_none_or(|(_, _, t)| total < *t) {
                        best = Some((size, calls, total));
                    }
                }
                let (size, calls, total) = best.unwrap();
                for (i, c) in calls.iter().enumerate() {
                    csv_text.push_str(&format!(
                        "ladder,{l},{size},{i},{:.6},,measure\n",
                        c.wall.as_secs_f64()
                    ));
                }
                // Aggregate row: the mean weights the rung by its call count.
                let mean = total / calls.len() as f64;
                csv_text.push_str(&format!(
                    "ladder,{l},{size},{},{mean:.6},,aggregate\n",
                    calls.len()
                ));
                println!(
                    "size={size} calls={} total_seconds={total:.6} mean_seconds_per_call={mean:.6}",
                    calls.len()
                );
                totals.push(total);
            }
            if let Some(p) = csv {
                std::fs::write(p, csv_text)?;
            }
            let superlinear = totals.windows(2).all(|w| w[1] >= 1.5 * w[0]);
            println!(
                "growth={}",
                if superlinear {
                    "superlinear"
                } else {
                    "irregular"
                }
            );
            Ok(0)
        }
    }
}
