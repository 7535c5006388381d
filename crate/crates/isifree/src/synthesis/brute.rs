//! Exhaustive synthesis oracle for small instances.
//!
//! Enumerates every per-state action (any nonempty prefix-free subset of the
//! continuation tree paired with any exact-Kraft codeword length vector),
//! then every combination across states, scoring each policy through the
//! stationary distribution and the rate formula. Entirely independent of the
//! gain bisection and geometric Huffman machinery it cross-checks.
//!
//! Two reductions keep the product tractable without affecting the maximum:
//! actions with identical transition masses, expected bits, and expected
//! symbols (all compared exactly, as dyadic integers) are interchangeable,
//! and among actions with identical transition masses only those undominated
//! in (expected bits up, expected symbols down) can attain the optimum.

use std::collections::HashMap;

use crate::capacity::channel_capacity;
use crate::error::{Error, Result};
use crate::graph::{build_constraint_graph, build_continuation_tree, ChannelSpec, ContinuationTree};
use crate::synthesis::chain::{self, Branch};
use crate::synthesis::{code_from_policy, Action, ActionItem, Policy, SynthesisResult};

#[derive(Debug, Clone, Copy)]
pub struct BruteForceOptions {
    /// Longest codeword considered (lengths are also capped at one less than
    /// the subset size, which Kraft equality forces anyway).
    pub max_len: u8,
    /// Cap on the number of policy combinations after deduplication.
    pub max_policies: u128,
    /// Cap on raw per-state enumeration work.
    pub max_actions_per_state: u64,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions {
            max_len: 8,
            max_policies: 1_000_000,
            max_actions_per_state: 50_000_000,
        }
    }
}

/// An enumerated action with exact dyadic statistics.
struct RawAction {
    /// `sum len * 2^(max_len - len)`.
    bits_units: u64,
    /// `sum symbols * 2^(max_len - len)`.
    symbol_units: u64,
    action: Action,
}

pub fn brute_force_synthesize(
    spec: ChannelSpec,
    depth: usize,
    opts: BruteForceOptions,
) -> Result<SynthesisResult> {
    if opts.max_len == 0 || opts.max_len > 20 {
        return Err(Error::InvalidParameter("max_len must be in 1..=20".into()));
    }
    let graph = build_constraint_graph(spec)?;
    let n = graph.num_states();

    let mut per_state: Vec<Vec<RawAction>> = Vec::with_capacity(n);
    for state in 0..n {
        let tree = build_continuation_tree(&graph, state, depth)?;
        per_state.push(enumerate_actions(&tree, n, opts)?);
    }

    let mut policy_count: u128 = 1;
    for actions in &per_state {
        policy_count = policy_count.saturating_mul(actions.len() as u128);
    }
    if policy_count > opts.max_policies {
        return Err(Error::EnumerationCap(format!(
            "{policy_count} policies exceed the cap of {}",
            opts.max_policies
        )));
    }

    let scale = f64::from(1u32 << opts.max_len);
    let start = graph.all_gap_id();

    // odometer over per-state action indices
    let mut choice = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let rows: Vec<Vec<Branch>> = (0..n)
            .map(|s| {
                let raw = &per_state[s][choice[s]];
                raw.action
                    .items
                    .iter()
                    .map(|item| Branch {
                        next: item.next,
                        prob: (-(f64::from(item.bit_len))).exp2(),
                        bits: f64::from(item.bit_len),
                        symbols: item.symbols.len() as f64,
                    })
                    .collect()
            })
            .collect();
        let refs: Vec<&[Branch]> = rows.iter().map(|r| r.as_slice()).collect();
        if let Ok(pi) = chain::stationary_of_rows(&refs, start) {
            // exact expected values avoid accumulating float noise over the
            // enumeration: recompute rate from the dyadic units
            let mut bits = 0.0;
            let mut symbols = 0.0;
            for s in 0..n {
                let raw = &per_state[s][choice[s]];
                bits += pi[s] * raw.bits_units as f64 / scale;
                symbols += pi[s] * raw.symbol_units as f64 / scale;
            }
            if symbols > 0.0 {
                let rate = bits / symbols;
                if best.as_ref().is_none_or(|(r, _)| rate > *r) {
                    best = Some((rate, choice.clone()));
                }
            }
        }
        // increment
        let mut pos = 0;
        while pos < n {
            choice[pos] += 1;
            if choice[pos] < per_state[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }

    let (_, winner) = best.ok_or(Error::NoStationary)?;
    let actions: Vec<Action> = winner
        .iter()
        .enumerate()
        .map(|(s, &i)| per_state[s][i].action.clone())
        .collect();
    let policy = Policy { actions };
    let stationary = chain::stationary_distribution(&policy, &graph)?;
    let rate = chain::analytic_rate(&policy, &stationary);
    let capacity = channel_capacity(&graph, 1e-12)?.capacity_bits_per_symbol;
    let code = code_from_policy(&graph, &policy, depth, rate);
    Ok(SynthesisResult {
        rate,
        bisection_root: rate,
        policy,
        stationary,
        capacity_bound: capacity,
        code,
    })
}

/// Enumerates the deduplicated action list for one state.
fn enumerate_actions(
    tree: &ContinuationTree,
    n_states: usize,
    opts: BruteForceOptions,
) -> Result<Vec<RawAction>> {
    let antichains = enumerate_antichains(tree, opts.max_actions_per_state)?;

    // frontier per exact transition signature
    let mut table: HashMap<Vec<u32>, Vec<(u64, u64, Action)>> = HashMap::new();
    let mut raw_count: u64 = 0;

    let mut lengths: Vec<u8> = Vec::new();
    for antichain in &antichains {
        let r = antichain.len();
        let len_cap = if r == 1 {
            0
        } else {
            opts.max_len.min((r - 1) as u8)
        };
        lengths.clear();
        lengths.resize(r, 0);
        enumerate_kraft(
            0,
            1u64 << opts.max_len,
            len_cap,
            opts.max_len,
            &mut lengths,
            &mut |lens| {
                raw_count += 1;
                let mut masses = vec![0u32; n_states];
                let mut bits_units = 0u64;
                let mut symbol_units = 0u64;
                for (pos, &id) in antichain.iter().enumerate() {
                    let node = tree.node(id);
                    let unit = 1u64 << (opts.max_len - lens[pos]);
                    masses[node.dest] += unit as u32;
                    bits_units += u64::from(lens[pos]) * unit;
                    symbol_units += node.len as u64 * unit;
                }
                let frontier = table.entry(masses).or_default();
                // keep only (bits up, symbols down) undominated entries
                let dominated = frontier
                    .iter()
                    .any(|&(b, s, _)| b >= bits_units && s <= symbol_units);
                if !dominated {
                    frontier.retain(|&(b, s, _)| !(bits_units >= b && symbol_units <= s));
                    let items = antichain
                        .iter()
                        .enumerate()
                        .map(|(pos, &id)| ActionItem {
                            symbols: tree.string(id),
                            next: tree.node(id).dest,
                            bit_len: lens[pos],
                        })
                        .collect();
                    frontier.push((bits_units, symbol_units, Action { items }));
                }
            },
        );
        if raw_count > opts.max_actions_per_state {
            return Err(Error::EnumerationCap(format!(
                "per-state action enumeration exceeded {}",
                opts.max_actions_per_state
            )));
        }
    }

    let mut keys: Vec<Vec<u32>> = table.keys().cloned().collect();
    keys.sort();
    let mut result = Vec::new();
    for key in keys {
        for (bits_units, symbol_units, action) in table.remove(&key).unwrap() {
            result.push(RawAction {
                bits_units,
                symbol_units,
                action,
            });
        }
    }
    Ok(result)
}

/// All nonempty antichains of the tree, as sorted node-id lists.
fn enumerate_antichains(tree: &ContinuationTree, cap: u64) -> Result<Vec<Vec<usize>>> {
    fn below(
        tree: &ContinuationTree,
        id: usize,
        cap: u64,
        produced: &mut u64,
    ) -> Result<Vec<Vec<usize>>> {
        // all antichains within the subtree rooted at `id`, including empty
        let mut result = vec![Vec::new(), vec![id]];
        let node = tree.node(id);
        if !node.children.is_empty() {
            let combos = combine(tree, &node.children, cap, produced)?;
            for combo in combos {
                if !combo.is_empty() {
                    result.push(combo);
                }
            }
        }
        *produced += result.len() as u64;
        if *produced > cap {
            return Err(Error::EnumerationCap(
                "antichain enumeration exceeded cap".into(),
            ));
        }
        Ok(result)
    }
    fn combine(
        tree: &ContinuationTree,
        roots: &[usize],
        cap: u64,
        produced: &mut u64,
    ) -> Result<Vec<Vec<usize>>> {
        let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
        for &r in roots {
            let options = below(tree, r, cap, produced)?;
            let mut next = Vec::with_capacity(acc.len() * options.len());
            for prefix in &acc {
                for opt in &options {
                    let mut combined = prefix.clone();
                    combined.extend_from_slice(opt);
                    next.push(combined);
                }
            }
            acc = next;
            if acc.len() as u64 > cap {
                return Err(Error::EnumerationCap(
                    "antichain enumeration exceeded cap".into(),
                ));
            }
        }
        Ok(acc)
    }
    let combos = combine(tree, tree.root_children(), cap, &mut 0)?;
    Ok(combos.into_iter().filter(|c| !c.is_empty()).collect())
}

/// Enumerates every length vector with `sum 2^-len == 1` exactly, lengths in
/// `1..=len_cap` (or the single zero-length vector when `len_cap == 0`).
/// `budget` is in units of `2^-scale`.
fn enumerate_kraft(
    at: usize,
    budget: u64,
    len_cap: u8,
    scale: u8,
    lengths: &mut Vec<u8>,
    emit: &mut impl FnMut(&[u8]),
) {
    let remaining = lengths.len() - at;
    if remaining == 0 {
        if budget == 0 {
            emit(lengths);
        }
        return;
    }
    if len_cap == 0 {
        // single forced item
        if remaining == 1 && budget == 1u64 << scale {
            lengths[at] = 0;
            emit(lengths);
        }
        return;
    }
    let min_unit = 1u64 << (scale - len_cap);
    let max_unit = 1u64 << (scale - 1);
    for len in 1..=len_cap {
        let unit = 1u64 << (scale - len);
        if unit > budget {
            continue;
        }
        let after = budget - unit;
        let rest = (remaining - 1) as u64;
        if after < rest * min_unit || after > rest * max_unit {
            continue;
        }
        lengths[at] = len;
        enumerate_kraft(at + 1, after, len_cap, scale, lengths, emit);
    }
}
