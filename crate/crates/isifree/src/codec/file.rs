//! Text format for modulation codes.
//!
//! Codes serialize as pretty-printed JSON with symbolic state names:
//!
//! ```json
//! {
//!   "spec": { "k": 1, "N": 2 },
//!   "depth": 2,
//!   "start": "-",
//!   "states": [
//!     { "state": "-", "entries": [ { "bits": "00", "symbols": "- -", "next": "-" } ] }
//!   ],
//!   "metadata": { "rate": 1.25 }
//! }
//! ```
//!
//! Symbol sequences are space-separated, windows comma-joined; both match
//! the rendering used everywhere else.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{format_symbols, parse_symbols, ChannelSpec, State};

use super::{CodeEntry, CodeState, ModulationCode};

#[derive(Serialize, Deserialize)]
struct SpecDto {
    k: usize,
    #[serde(rename = "N")]
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct EntryDto {
    bits: String,
    symbols: String,
    next: String,
}

#[derive(Serialize, Deserialize)]
struct StateDto {
    state: String,
    entries: Vec<EntryDto>,
}

#[derive(Serialize, Deserialize)]
struct MetadataDto {
    rate: f64,
}

#[derive(Serialize, Deserialize)]
struct CodeDto {
    spec: SpecDto,
    depth: usize,
    start: String,
    states: Vec<StateDto>,
    metadata: MetadataDto,
}

/// Serializes a code to its JSON text form.
pub fn code_to_json(code: &ModulationCode) -> String {
    let dto = CodeDto {
        spec: SpecDto {
            k: code.spec.memory,
            n: code.spec.num_types,
        },
        depth: code.depth,
        start: code.states[code.start].window.to_string(),
        states: code
            .states
            .iter()
            .map(|cs| StateDto {
                state: cs.window.to_string(),
                entries: cs
                    .entries
                    .iter()
                    .map(|e| EntryDto {
                        bits: super::bits_string(&e.bits),
                        symbols: format_symbols(&e.symbols),
                        next: code.states[e.next].window.to_string(),
                    })
                    .collect(),
            })
            .collect(),
        metadata: MetadataDto { rate: code.rate },
    };
    serde_json::to_string_pretty(&dto).expect("code serialization cannot fail")
}

/// Parses a code from its JSON text form. Structural errors (unknown state
/// names, bad symbols, invalid windows) are rejected here; semantic
/// invariants are the business of [`super::validate_code`].
pub fn code_from_json(text: &str) -> Result<ModulationCode> {
    let dto: CodeDto =
        serde_json::from_str(text).map_err(|e| Error::ParseCode(e.to_string()))?;
    let spec = ChannelSpec::new(dto.spec.k, dto.spec.n)
        .map_err(|e| Error::ParseCode(e.to_string()))?;
    if dto.depth < 1 {
        return Err(Error::ParseCode("depth must be at least 1".into()));
    }
    let mut names: HashMap<String, usize> = HashMap::new();
    for (i, s) in dto.states.iter().enumerate() {
        if names.insert(s.state.clone(), i).is_some() {
            return Err(Error::ParseCode(format!("duplicate state {:?}", s.state)));
        }
    }
    let start = *names
        .get(&dto.start)
        .ok_or_else(|| Error::ParseCode(format!("unknown start state {:?}", dto.start)))?;
    let mut states = Vec::with_capacity(dto.states.len());
    for s in &dto.states {
        let window: State = s
            .state
            .parse()
            .map_err(|e: Error| Error::ParseCode(e.to_string()))?;
        if window.window().len() != spec.memory {
            return Err(Error::ParseCode(format!(
                "state {:?} has window length {}, channel memory is {}",
                s.state,
                window.window().len(),
                spec.memory
            )));
        }
        let mut entries = Vec::with_capacity(s.entries.len());
        for e in &s.entries {
            let bits = super::stream::parse_bits(&e.bits)?;
            let symbols = parse_symbols(&e.symbols)?;
            let next = *names
                .get(&e.next)
                .ok_or_else(|| Error::ParseCode(format!("unknown next state {:?}", e.next)))?;
            entries.push(CodeEntry {
                bits,
                symbols,
                next,
            });
        }
        states.push(CodeState { window, entries });
    }
    Ok(ModulationCode {
        spec,
        depth: dto.depth,
        start,
        states,
        rate: dto.metadata.rate,
    })
}
