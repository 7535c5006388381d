//! Symbols, channel windows, and the graphs of permissible transmissions.
//!
//! A transmission slot either stays silent (`-`) or releases one molecule
//! type `M1..MN`. The channel remembers the last `k` slots: a molecule type
//! must not reappear within any window of `k + 1` consecutive slots, or the
//! receiver cannot tell a fresh release from residue of the previous one.
//! Sequences obeying that rule are called ISI-free.
//!
//! Two structures capture the rule:
//!
//! * [`ConstraintGraph`]: nodes are the possible `k`-symbol windows, edges
//!   are single-symbol extensions. Walks on this graph are exactly the
//!   ISI-free sequences.
//! * [`ContinuationTree`]: for one window, every ISI-free continuation of
//!   length `1..=d`, organized as a prefix tree. This is the action space
//!   for delay-limited code synthesis.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default cap on the number of enumerated windows.
pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

/// One slot's content: silence or a molecule type (1-based index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Gap,
    Molecule(u16),
}

impl Symbol {
    pub fn is_gap(self) -> bool {
        matches!(self, Symbol::Gap)
    }

    /// Molecule with 1-based index `i`.
    pub fn molecule(i: u16) -> Symbol {
        assert!(i >= 1, "molecule indices are 1-based");
        Symbol::Molecule(i)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Gap => write!(f, "-"),
            Symbol::Molecule(i) => write!(f, "M{i}"),
        }
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Symbol> {
        if s == "-" {
            return Ok(Symbol::Gap);
        }
        let idx = s
            .strip_prefix('M')
            .and_then(|rest| rest.parse::<u16>().ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| Error::ParseInput(format!("invalid symbol {s:?}")))?;
        Ok(Symbol::Molecule(idx))
    }
}

/// A sequence of symbols, e.g. the label of a continuation-tree node.
pub type SymbolString = Vec<Symbol>;

/// Render a symbol sequence space-separated, e.g. `M1 - M2`.
pub fn format_symbols(symbols: &[Symbol]) -> String {
    symbols
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parse a space-separated symbol sequence.
pub fn parse_symbols(text: &str) -> Result<SymbolString> {
    text.split_whitespace().map(|tok| tok.parse()).collect()
}

/// Channel parameters: memory in slots and the molecule alphabet size.
///
/// `memory` is the number of subsequent slots during which a released
/// molecule type must not be reused. `num_types` may be smaller or larger
/// than `memory`; gaps can always fill the difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelSpec {
    pub memory: usize,
    pub num_types: usize,
}

impl ChannelSpec {
    pub fn new(memory: usize, num_types: usize) -> Result<ChannelSpec> {
        if memory < 1 {
            return Err(Error::InvalidParameter("memory must be at least 1".into()));
        }
        if num_types < 1 || num_types > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "num_types must be in 1..={}",
                u16::MAX
            )));
        }
        Ok(ChannelSpec { memory, num_types })
    }

    /// Symbols available to the transmitter, in canonical order.
    pub fn alphabet(&self) -> impl Iterator<Item = Symbol> + '_ {
        std::iter::once(Symbol::Gap).chain((1..=self.num_types as u16).map(Symbol::Molecule))
    }
}

/// The last `memory` transmitted symbols, most recent last.
///
/// Valid windows never hold the same molecule type twice; gaps may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(Vec<Symbol>);

impl State {
    /// Builds a window, checking that non-gap symbols are pairwise distinct.
    pub fn new(window: Vec<Symbol>) -> Result<State> {
        for (i, &s) in window.iter().enumerate() {
            if !s.is_gap() && window[..i].contains(&s) {
                return Err(Error::InvalidParameter(format!(
                    "window {} repeats {s}",
                    format_symbols(&window)
                )));
            }
        }
        Ok(State(window))
    }

    pub fn all_gaps(memory: usize) -> State {
        State(vec![Symbol::Gap; memory])
    }

    pub fn window(&self) -> &[Symbol] {
        &self.0
    }

    pub fn contains(&self, sym: Symbol) -> bool {
        self.0.contains(&sym)
    }

    /// Window after transmitting `sym`: drop the oldest slot, append the new.
    pub fn advance(&self, sym: Symbol) -> State {
        let mut w = self.0[1..].to_vec();
        w.push(sym);
        State(w)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<State> {
        let window: Vec<Symbol> = s
            .split(',')
            .map(|tok| tok.trim().parse())
            .collect::<Result<_>>()?;
        State::new(window)
    }
}

/// True iff no molecule type repeats within any `memory + 1` consecutive
/// symbols. Gaps may repeat freely. Sequences shorter than the window are
/// held to the same rule over their full length.
pub fn is_isi_free(seq: &[Symbol], memory: usize) -> bool {
    // Equivalent to the sliding-window condition: a violation is exactly a
    // pair of equal molecules at distance <= memory.
    for (i, &s) in seq.iter().enumerate() {
        if s.is_gap() {
            continue;
        }
        let lo = i.saturating_sub(memory);
        if seq[lo..i].contains(&s) {
            return false;
        }
    }
    true
}

/// Index of a state in a graph's canonical order.
pub type StateId = usize;

/// Single-step constraint graph: an edge `u -> v` labeled `a` exists iff
/// `v` is `u` shifted by `a` and `u ++ [a]` is ISI-free, i.e. `a` is a gap
/// or absent from the whole window `u`.
#[derive(Debug, Clone)]
pub struct ConstraintGraph {
    spec: ChannelSpec,
    states: Vec<State>,
    index: HashMap<State, StateId>,
    out: Vec<Vec<(Symbol, StateId)>>,
}

impl ConstraintGraph {
    pub fn spec(&self) -> ChannelSpec {
        self.spec
    }

    /// States in canonical (lexicographic, gap-first) order.
    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id]
    }

    pub fn state_id(&self, state: &State) -> Option<StateId> {
        self.index.get(state).copied()
    }

    /// The all-gap window; always index 0 in canonical order.
    pub fn all_gap_id(&self) -> StateId {
        0
    }

    /// Outgoing edges of `id` as `(label, destination)` pairs.
    pub fn successors(&self, id: StateId) -> &[(Symbol, StateId)] {
        &self.out[id]
    }

    /// All edges as `(from, to, label)` triples.
    pub fn edges(&self) -> impl Iterator<Item = (StateId, StateId, Symbol)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(from, succ)| succ.iter().map(move |&(label, to)| (from, to, label)))
    }
}

/// All valid windows for `spec`, in lexicographic order with `- < M1 < M2`.
pub fn enumerate_states(spec: ChannelSpec) -> Result<Vec<State>> {
    enumerate_states_with_limit(spec, DEFAULT_STATE_LIMIT)
}

pub fn enumerate_states_with_limit(spec: ChannelSpec, limit: usize) -> Result<Vec<State>> {
    let mut states = Vec::new();
    let mut window = Vec::with_capacity(spec.memory);
    let mut used = vec![false; spec.num_types + 1];
    fill_windows(spec, limit, &mut window, &mut used, &mut states)?;
    Ok(states)
}

fn fill_windows(
    spec: ChannelSpec,
    limit: usize,
    window: &mut Vec<Symbol>,
    used: &mut [bool],
    states: &mut Vec<State>,
) -> Result<()> {
    if window.len() == spec.memory {
        if states.len() >= limit {
            return Err(Error::StateLimit {
                count: states.len() + 1,
                limit,
            });
        }
        states.push(State(window.clone()));
        return Ok(());
    }
    for sym in spec.alphabet() {
        if let Symbol::Molecule(i) = sym {
            if used[i as usize] {
                continue;
            }
            used[i as usize] = true;
        }
        window.push(sym);
        let res = fill_windows(spec, limit, window, used, states);
        window.pop();
        if let Symbol::Molecule(i) = sym {
            used[i as usize] = false;
        }
        res?;
    }
    Ok(())
}

/// Builds the single-step constraint graph for `spec`.
pub fn build_constraint_graph(spec: ChannelSpec) -> Result<ConstraintGraph> {
    build_constraint_graph_with_limit(spec, DEFAULT_STATE_LIMIT)
}

pub fn build_constraint_graph_with_limit(
    spec: ChannelSpec,
    limit: usize,
) -> Result<ConstraintGraph> {
    let states = enumerate_states_with_limit(spec, limit)?;
    let index: HashMap<State, StateId> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let mut out = Vec::with_capacity(states.len());
    for state in &states {
        let mut succ = Vec::new();
        for sym in spec.alphabet() {
            // The new symbol must be a gap or absent from the entire window;
            // this is what keeps every (memory + 1)-window repeat-free.
            if sym.is_gap() || !state.contains(sym) {
                let next = state.advance(sym);
                let id = index[&next];
                succ.push((sym, id));
            }
        }
        out.push(succ);
    }
    Ok(ConstraintGraph {
        spec,
        states,
        index,
        out,
    })
}

/// One node of a [`ContinuationTree`]: a continuation of the root window.
#[derive(Debug, Clone)]
pub struct TreeNode {
    /// Final symbol of this continuation.
    pub symbol: Symbol,
    /// Parent node, or `None` for depth-1 nodes.
    pub parent: Option<usize>,
    /// Number of symbols in the continuation (1-based depth).
    pub len: usize,
    /// Window after transmitting the continuation.
    pub dest: StateId,
    pub children: Vec<usize>,
}

/// Prefix tree of every ISI-free continuation of a window, up to a depth
/// limit. Parents always precede children in the node arena.
#[derive(Debug, Clone)]
pub struct ContinuationTree {
    pub root_state: StateId,
    pub depth: usize,
    nodes: Vec<TreeNode>,
    root_children: Vec<usize>,
}

impl ContinuationTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Depth-1 nodes (direct children of the root window).
    pub fn root_children(&self) -> &[usize] {
        &self.root_children
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.nodes[id].children.is_empty()
    }

    /// Reconstructs the symbol string spelled from the root to `id`.
    pub fn string(&self, id: usize) -> SymbolString {
        let mut rev = Vec::with_capacity(self.nodes[id].len);
        let mut cur = Some(id);
        while let Some(i) = cur {
            rev.push(self.nodes[i].symbol);
            cur = self.nodes[i].parent;
        }
        rev.reverse();
        rev
    }
}

/// Builds the tree of ISI-free continuations of `state` with length
/// `1..=depth`. Successors are taken from the constraint graph: because a
/// window already carries all ISI-relevant history, extending a
/// continuation only requires a valid single step from its destination.
pub fn build_continuation_tree(
    graph: &ConstraintGraph,
    state: StateId,
    depth: usize,
) -> Result<ContinuationTree> {
    if depth < 1 {
        return Err(Error::InvalidParameter(
            "continuation depth must be at least 1".into(),
        ));
    }
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut root_children = Vec::new();
    // Breadth-first so parents precede children.
    let mut frontier: Vec<usize> = Vec::new();
    for &(symbol, dest) in graph.successors(state) {
        nodes.push(TreeNode {
            symbol,
            parent: None,
            len: 1,
            dest,
            children: Vec::new(),
        });
        root_children.push(nodes.len() - 1);
        frontier.push(nodes.len() - 1);
    }
    for level in 2..=depth {
        let mut next_frontier = Vec::new();
        for &id in &frontier {
            let from = nodes[id].dest;
            for &(symbol, dest) in graph.successors(from) {
                nodes.push(TreeNode {
                    symbol,
                    parent: Some(id),
                    len: level,
                    dest,
                    children: Vec::new(),
                });
                let child = nodes.len() - 1;
                nodes[id].children.push(child);
                next_frontier.push(child);
            }
        }
        frontier = next_frontier;
    }
    Ok(ContinuationTree {
        root_state: state,
        depth,
        nodes,
        root_children,
    })
}
