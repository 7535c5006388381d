//! Operational modulation codes: the serializable artifact a transmitter
//! and receiver share, plus validation and the classic alternating-molecule
//! baseline.
//!
//! A code lists, per state, a full prefix-free set of bit strings mapped to
//! mutually prefix-free symbol strings. State windows carry the blocking
//! information used for safety checks; a window may conservatively claim a
//! molecule that an actual gap has already cleared (the baseline scheme
//! relies on this to remember parity across silent slots), but it must never
//! omit a molecule the emitted suffix actually blocks.

mod file;
mod stream;

pub use file::{code_from_json, code_to_json};
pub use stream::{
    decode, encode, format_bits, format_stream, parse_bits, parse_stream, Decoder, EncodeOutput,
    Encoder,
};

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{is_isi_free, ChannelSpec, State, Symbol, SymbolString};

/// One codebook row: a bit string, the symbols it transmits, and the state
/// the encoder moves to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeEntry {
    pub bits: Vec<bool>,
    pub symbols: SymbolString,
    pub next: usize,
}

/// A state of the code automaton and its codebook.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeState {
    pub window: State,
    pub entries: Vec<CodeEntry>,
}

/// A complete modulation code.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationCode {
    pub spec: ChannelSpec,
    /// Longest symbol string in any entry.
    pub depth: usize,
    /// Start state index; its window is all gaps.
    pub start: usize,
    pub states: Vec<CodeState>,
    /// Long-run bits per symbol.
    pub rate: f64,
}

impl ModulationCode {
    pub fn state(&self, id: usize) -> &CodeState {
        &self.states[id]
    }

    /// Longest bit string in any entry.
    pub fn max_bit_len(&self) -> usize {
        self.states
            .iter()
            .flat_map(|s| s.entries.iter().map(|e| e.bits.len()))
            .max()
            .unwrap_or(0)
    }
}

/// A violated code invariant. Violations are data, not errors: validation
/// reports all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyCodebook { state: String },
    KraftSum { state: String, detail: String },
    BitPrefix { state: String, detail: String },
    SymbolPrefix { state: String, detail: String },
    SymbolLength { state: String, detail: String },
    IsiUnsafe { state: String, detail: String },
    NextState { state: String, detail: String },
    BadSymbol { state: String, detail: String },
    StartState { detail: String },
    SilentCycle { detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyCodebook { state } => write!(f, "state {state}: empty codebook"),
            Violation::KraftSum { state, detail } => {
                write!(f, "state {state}: bit code is not full ({detail})")
            }
            Violation::BitPrefix { state, detail } => {
                write!(f, "state {state}: bit strings not prefix-free ({detail})")
            }
            Violation::SymbolPrefix { state, detail } => {
                write!(f, "state {state}: symbol strings not prefix-free ({detail})")
            }
            Violation::SymbolLength { state, detail } => {
                write!(f, "state {state}: symbol string too long ({detail})")
            }
            Violation::IsiUnsafe { state, detail } => {
                write!(f, "state {state}: emission violates the reuse gap ({detail})")
            }
            Violation::NextState { state, detail } => {
                write!(f, "state {state}: next state inconsistent ({detail})")
            }
            Violation::BadSymbol { state, detail } => {
                write!(f, "state {state}: symbol outside the alphabet ({detail})")
            }
            Violation::StartState { detail } => write!(f, "start state: {detail}"),
            Violation::SilentCycle { detail } => {
                write!(f, "zero-bit entries form a cycle ({detail})")
            }
        }
    }
}

fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Checks every code invariant and returns the violations found (empty for
/// a valid code).
pub fn validate_code(code: &ModulationCode) -> Vec<Violation> {
    let mut out = Vec::new();
    let memory = code.spec.memory;

    if code.start >= code.states.len() {
        out.push(Violation::StartState {
            detail: format!("index {} out of range", code.start),
        });
    } else if code.states[code.start]
        .window
        .window()
        .iter()
        .any(|s| !s.is_gap())
    {
        out.push(Violation::StartState {
            detail: format!(
                "window {} is not all gaps",
                code.states[code.start].window
            ),
        });
    }

    for cs in &code.states {
        let name = cs.window.to_string();
        if cs.entries.is_empty() {
            out.push(Violation::EmptyCodebook { state: name.clone() });
            continue;
        }

        // full prefix-free bit code: Kraft sum exactly one
        let mut kraft: u128 = 0;
        for e in &cs.entries {
            let len = e.bits.len().min(100) as u32;
            kraft += 1u128 << (100 - len);
        }
        if kraft != 1u128 << 100 {
            out.push(Violation::KraftSum {
                state: name.clone(),
                detail: format!("{} entries, Kraft sum != 1", cs.entries.len()),
            });
        }
        for (i, a) in cs.entries.iter().enumerate() {
            for b in cs.entries.iter().skip(i + 1) {
                let n = a.bits.len().min(b.bits.len());
                if a.bits[..n] == b.bits[..n] {
                    out.push(Violation::BitPrefix {
                        state: name.clone(),
                        detail: format!("{:?} vs {:?}", bits_string(&a.bits), bits_string(&b.bits)),
                    });
                }
                let m = a.symbols.len().min(b.symbols.len());
                if a.symbols[..m] == b.symbols[..m] {
                    out.push(Violation::SymbolPrefix {
                        state: name.clone(),
                        detail: format!(
                            "{} vs {}",
                            crate::graph::format_symbols(&a.symbols),
                            crate::graph::format_symbols(&b.symbols)
                        ),
                    });
                }
            }
        }

        for e in &cs.entries {
            if e.symbols.is_empty() || e.symbols.len() > code.depth {
                out.push(Violation::SymbolLength {
                    state: name.clone(),
                    detail: format!(
                        "{} has {} symbols, limit {}",
                        crate::graph::format_symbols(&e.symbols),
                        e.symbols.len(),
                        code.depth
                    ),
                });
            }
            for &sym in &e.symbols {
                if let Symbol::Molecule(i) = sym {
                    if usize::from(i) > code.spec.num_types {
                        out.push(Violation::BadSymbol {
                            state: name.clone(),
                            detail: sym.to_string(),
                        });
                    }
                }
            }
            let mut seq = cs.window.window().to_vec();
            seq.extend_from_slice(&e.symbols);
            if !is_isi_free(&seq, memory) {
                out.push(Violation::IsiUnsafe {
                    state: name.clone(),
                    detail: crate::graph::format_symbols(&e.symbols),
                });
            }
            if e.next >= code.states.len() {
                out.push(Violation::NextState {
                    state: name.clone(),
                    detail: format!("index {} out of range", e.next),
                });
                continue;
            }
            // The next window must block at least what the true suffix
            // blocks: where the suffix holds a molecule the windows must
            // match; where it holds a gap the next window may claim a
            // molecule conservatively.
            let suffix = &seq[seq.len() - memory..];
            let claimed = code.states[e.next].window.window();
            for (pos, &truth) in suffix.iter().enumerate() {
                if !truth.is_gap() && claimed[pos] != truth {
                    out.push(Violation::NextState {
                        state: name.clone(),
                        detail: format!(
                            "after {} the window must end {}, found {}",
                            crate::graph::format_symbols(&e.symbols),
                            crate::graph::format_symbols(suffix),
                            code.states[e.next].window
                        ),
                    });
                    break;
                }
            }
        }
    }

    // zero-bit entries must not form a cycle, or encoding would emit
    // symbols forever without consuming input
    let n = code.states.len();
    let mut silent_next = vec![None; n];
    for (sid, cs) in code.states.iter().enumerate() {
        for e in &cs.entries {
            if e.bits.is_empty() && e.next < n {
                silent_next[sid] = Some(e.next);
            }
        }
    }
    for start in 0..n {
        let mut seen = vec![false; n];
        let mut cur = start;
        while let Some(next) = silent_next[cur] {
            if seen[next] {
                out.push(Violation::SilentCycle {
                    detail: format!("reached from state {}", code.states[start].window),
                });
                break;
            }
            seen[next] = true;
            cur = next;
        }
        if out.iter().any(|v| matches!(v, Violation::SilentCycle { .. })) {
            break;
        }
    }

    out
}

/// The classic alternating-molecule baseline for a one-slot-memory channel
/// with two molecule types: a zero bit stays silent, a one bit releases the
/// molecule type opposite to the previously released one. Rate 1 bit per
/// symbol. Windows here are conservative: after a silent slot the state
/// keeps claiming the last released molecule, so the alternation survives
/// arbitrarily long silences.
pub fn mcsk_code(spec: ChannelSpec) -> Result<ModulationCode> {
    if spec.memory != 1 || spec.num_types != 2 {
        return Err(Error::UnsupportedSpec(format!(
            "alternating baseline needs memory 1 and 2 molecule types, got memory {} and {} types",
            spec.memory, spec.num_types
        )));
    }
    let m1 = Symbol::molecule(1);
    let m2 = Symbol::molecule(2);
    let entry = |bit: bool, symbols: Vec<Symbol>, next: usize| CodeEntry {
        bits: vec![bit],
        symbols,
        next,
    };
    // state 0: nothing released yet; 1: last release was M1; 2: was M2
    let states = vec![
        CodeState {
            window: State::all_gaps(1),
            entries: vec![
                entry(false, vec![Symbol::Gap], 0),
                entry(true, vec![m1], 1),
            ],
        },
        CodeState {
            window: State::new(vec![m1])?,
            entries: vec![
                entry(false, vec![Symbol::Gap], 1),
                entry(true, vec![m2], 2),
            ],
        },
        CodeState {
            window: State::new(vec![m2])?,
            entries: vec![
                entry(false, vec![Symbol::Gap], 2),
                entry(true, vec![m1], 1),
            ],
        },
    ];
    Ok(ModulationCode {
        spec,
        depth: 1,
        start: 0,
        states,
        rate: 1.0,
    })
}

/// Generates a valid code by choosing a random cut of each state's
/// continuation tree and a random full prefix-free bit code over it. Used
/// by round-trip fuzzing and benchmarks.
pub fn random_code(spec: ChannelSpec, depth: usize, rng: &mut impl Rng) -> Result<ModulationCode> {
    use crate::graph::{build_constraint_graph, build_continuation_tree};

    let graph = build_constraint_graph(spec)?;
    let mut states = Vec::with_capacity(graph.num_states());
    for sid in 0..graph.num_states() {
        let tree = build_continuation_tree(&graph, sid, depth)?;
        // random cut: expand each branch with probability 1/2
        let mut cut = Vec::new();
        let mut stack: Vec<usize> = tree.root_children().to_vec();
        while let Some(id) = stack.pop() {
            if !tree.is_leaf(id) && rng.gen_bool(0.5) {
                stack.extend_from_slice(&tree.node(id).children);
            } else {
                cut.push(id);
            }
        }
        cut.sort();
        // random full binary code over the cut: merge random pairs
        let mut depths: Vec<Vec<(usize, u8)>> = cut.iter().map(|&id| vec![(id, 0)]).collect();
        while depths.len() > 1 {
            let a = rng.gen_range(0..depths.len());
            let mut merged_a = depths.swap_remove(a);
            let b = rng.gen_range(0..depths.len());
            let merged_b = &mut depths[b];
            for (_, d) in merged_a.iter_mut() {
                *d += 1;
            }
            for (_, d) in merged_b.iter_mut() {
                *d += 1;
            }
            merged_b.extend(merged_a);
        }
        let assignment = depths.pop().unwrap();
        let mut entries: Vec<CodeEntry> = Vec::with_capacity(assignment.len());
        let mut ordered: Vec<(usize, u8)> = assignment;
        ordered.sort_by_key(|&(id, d)| (d, id));
        let mut codeword: u64 = 0;
        let mut prev = ordered[0].1;
        for (id, len) in ordered {
            codeword <<= len - prev;
            let bits: Vec<bool> = (0..len).rev().map(|b| codeword >> b & 1 == 1).collect();
            codeword += 1;
            prev = len;
            entries.push(CodeEntry {
                bits,
                symbols: tree.string(id),
                next: tree.node(id).dest,
            });
        }
        states.push(CodeState {
            window: graph.state(sid).clone(),
            entries,
        });
    }
    Ok(ModulationCode {
        spec,
        depth,
        start: graph.all_gap_id(),
        states,
        rate: f64::NAN,
    })
}
