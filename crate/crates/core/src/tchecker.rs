//! Export to (and re-import from) the declarative model syntax used by
//! zone-based liveness checkers: `system`/`event`/`process`/`clock`/
//! `location`/`edge` declarations with `provided:` guards, `do:`
//! resets, and a Büchi label on accepting locations.

use crate::guard::{Bound, Guard};
use crate::rational::is_integer;
use crate::ta::{LocId, TaError, TimedAutomaton};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExportError {
    #[error("automaton still contains the parameter; substitute a value first")]
    Parametric,
    #[error("constant {0} is not an integer; scale the automaton first")]
    RationalConstant(String),
    #[error(transparent)]
    Ta(#[from] TaError),
    #[error("import: line {0}: {1}")]
    Import(usize, String),
}

const ACCEPT_LABEL: &str = "accept";

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Renders the automaton in the external checker syntax. Accepting
/// locations carry `labels: accept`, to be passed to the checker's
/// liveness algorithm.
pub fn export_tchecker(ta: &TimedAutomaton, system_name: &str) -> Result<String, ExportError> {
    ta.validate()?;
    if ta.has_parameter() {
        return Err(ExportError::Parametric);
    }
    for t in &ta.transitions {
        for a in t.guard.atoms() {
            if let Bound::Const(c) = a.bound {
                if !is_integer(&c) {
                    return Err(ExportError::RationalConstant(c.to_string()));
                }
            }
        }
    }

    let mut out = String::new();
    out.push_str(&format!("system:{}\n\n", sanitize(system_name)));
    for s in &ta.alphabet {
        out.push_str(&format!("event:{}\n", sanitize(s)));
    }
    out.push('\n');
    out.push_str("process:P\n");
    for c in &ta.clocks {
        out.push_str(&format!("clock:1:{}\n", sanitize(c)));
    }
    for (i, l) in ta.locations.iter().enumerate() {
        let mut attrs = Vec::new();
        if ta.initial == LocId(i) {
            attrs.push("initial:".to_string());
        }
        if ta.accepting.contains(&LocId(i)) {
            attrs.push(format!("labels: {ACCEPT_LABEL}"));
        }
        if attrs.is_empty() {
            out.push_str(&format!("location:P:{}\n", sanitize(l)));
        } else {
            out.push_str(&format!(
                "location:P:{}{{{}}}\n",
                sanitize(l),
                attrs.join(" : ")
            ));
        }
    }
    for t in &ta.transitions {
        let mut attrs = Vec::new();
        let guard = render_provided(&t.guard, &ta.clocks);
        if !guard.is_empty() {
            attrs.push(format!("provided: {guard}"));
        }
        if !t.resets.is_empty() {
            let stmts: Vec<String> = t
                .resets
                .iter()
                .map(|c| format!("{}=0", sanitize(&ta.clocks[c.0])))
                .collect();
            attrs.push(format!("do: {}", stmts.join(";")));
        }
        let attr_str = if attrs.is_empty() {
            String::new()
        } else {
            format!("{{{}}}", attrs.join(" : "))
        };
        out.push_str(&format!(
            "edge:P:{}:{}:{}{}\n",
            sanitize(&ta.locations[t.source.0]),
            sanitize(&ta.locations[t.target.0]),
            sanitize(&ta.alphabet[t.letter.0]),
            attr_str
        ));
    }
    Ok(out)
}

fn render_provided(guard: &Guard, clocks: &[String]) -> String {
    // Guards reaching this point are conjunctive (analysis form).
    let atoms = guard.atoms();
    atoms
        .iter()
        .map(|a| {
            let c = match a.bound {
                Bound::Const(c) => c,
                Bound::Param => unreachable!("checked above"),
            };
            format!(
                "{}{}{}",
                sanitize(&clocks[a.clock.0]),
                a.op.symbol(),
                c.numer()
            )
        })
        .collect::<Vec<_>>()
        .join(" && ")
}

/// Parses the subset of the syntax produced by [`export_tchecker`]
/// back into an automaton; identifiers come back sanitized.
pub fn import_tchecker(text: &str) -> Result<TimedAutomaton, ExportError> {
    let mut ta = TimedAutomaton::new();
    ta.alphabet.clear();
    let mut initial = None;
    let bad = |ln: usize, m: &str| ExportError::Import(ln, m.to_string());

    // Location and edge lines may arrive before all clocks are known
    // only in hand-written files; exports order them correctly.
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (head, rest) = content
            .split_once(':')
            .ok_or_else(|| bad(line, "expected `kind:...`"))?;
        match head {
            "system" => {}
            "event" => {
                ta.alphabet.push(rest.trim().to_string());
            }
            "process" => {}
            "clock" => {
                let (_, name) = rest
                    .split_once(':')
                    .ok_or_else(|| bad(line, "expected `clock:<size>:<name>`"))?;
                ta.add_clock(name.trim());
            }
            "location" => {
                let (_, tail) = rest
                    .split_once(':')
                    .ok_or_else(|| bad(line, "expected `location:P:<name>`"))?;
                let (name, attrs) = match tail.find('{') {
                    Some(i) => (
                        tail[..i].to_string(),
                        tail[i + 1..]
                            .strip_suffix('}')
                            .ok_or_else(|| bad(line, "unterminated attributes"))?
                            .to_string(),
                    ),
                    None => (tail.to_string(), String::new()),
                };
                let id = ta.add_location(name.trim());
                for attr in attrs.split(" : ") {
                    let attr = attr.trim();
                    if attr == "initial:" {
                        initial = Some(id);
                    } else if let Some(labels) = attr.strip_prefix("labels:") {
                        if labels.trim() == ACCEPT_LABEL {
                            ta.accepting.insert(id);
                        }
                    }
                }
            }
            "edge" => {
                let parts: Vec<&str> = rest.splitn(4, ':').collect();
                if parts.len() < 4 {
                    return Err(bad(line, "expected `edge:P:src:dst:event{...}`"));
                }
                let src = parts[1];
                let dst = parts[2];
                let (event, attrs) = match parts[3].find('{') {
                    Some(i) => (
                        &parts[3][..i],
                        parts[3][i + 1..]
                            .strip_suffix('}')
                            .ok_or_else(|| bad(line, "unterminated attributes"))?,
                    ),
                    None => (parts[3], ""),
                };
                let src = ta
                    .location_id(src)
                    .ok_or_else(|| bad(line, "unknown source location"))?;
                let dst = ta
                    .location_id(dst)
                    .ok_or_else(|| bad(line, "unknown target location"))?;
                let mut guard = Guard::True;
                let mut resets = BTreeSet::new();
                for attr in attrs.split(" : ") {
                    let attr = attr.trim();
                    if let Some(expr) = attr.strip_prefix("provided:") {
                        guard = crate::format::parse_guard(expr, &ta.clocks, None, line)
                            .map_err(|e| bad(line, &e.to_string()))?;
                    } else if let Some(stmts) = attr.strip_prefix("do:") {
                        for stmt in stmts.split(';') {
                            let stmt = stmt.trim();
                            if stmt.is_empty() {
                                continue;
                            }
                            let clock = stmt
                                .strip_suffix("=0")
                                .ok_or_else(|| bad(line, "only resets to zero supported"))?;
                            let id = ta
                                .clock_id(clock.trim())
                                .ok_or_else(|| bad(line, "unknown clock in do:"))?;
                            resets.insert(id);
                        }
                    }
                }
                let letter = ta
                    .alphabet
                    .iter()
                    .position(|e| e == event)
                    .ok_or_else(|| bad(line, "unknown event"))?;
                let id = ta.add_transition(src, dst, guard, resets);
                ta.transitions[id.0].letter = crate::ta::SymbolId(letter);
            }
            other => return Err(bad(line, &format!("unknown declaration `{other}`"))),
        }
    }
    if ta.alphabet.is_empty() {
        ta.alphabet.push("a".to_string());
    }
    ta.initial = initial.ok_or_else(|| bad(0, "no initial location"))?;
    ta.validate()?;
    Ok(ta)
}
