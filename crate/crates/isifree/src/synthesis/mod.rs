//! Delay-limited modulation code synthesis.
//!
//! The best achievable bits-per-symbol rate under a blocklength limit is the
//! unique positive root of the strictly decreasing gain function computed by
//! [`dp::evaluate_gain`]: at the root, charging each symbol exactly the
//! achievable rate leaves zero average profit. Bisection over the gain.

pub mod brute;
pub mod chain;
pub mod dp;
pub mod ghc;

pub use brute::{brute_force_synthesize, BruteForceOptions};
pub use chain::{analytic_rate, stationary_distribution};
pub use dp::{
    build_context, evaluate_gain, optimize_state, CutSearch, GainEval, SynthesisContext,
};
pub use ghc::{ghc, GhcResult};

use crate::capacity::channel_capacity;
use crate::codec::ModulationCode;
use crate::error::{Error, Result};
use crate::graph::{ChannelSpec, ConstraintGraph, StateId, SymbolString};

/// Default bisection tolerance on the rate.
pub const DEFAULT_RATE_TOL: f64 = 1e-6;
const BISECTION_CAP: usize = 60;

/// One retained element of a per-state action: a continuation, the state it
/// leads to, and the codeword length spent on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionItem {
    pub symbols: SymbolString,
    pub next: StateId,
    pub bit_len: u8,
}

/// A per-state choice: a prefix-free set of continuations with Kraft-equal
/// codeword lengths. Zero-length codewords occur only for forced moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub items: Vec<ActionItem>,
}

impl Action {
    /// `sum 2^-len * len`: expected bits consumed per step at this state.
    pub fn expected_bits(&self) -> f64 {
        self.items
            .iter()
            .map(|it| (-(f64::from(it.bit_len))).exp2() * f64::from(it.bit_len))
            .sum()
    }

    /// `sum 2^-len * |symbols|`: expected symbols emitted per step.
    pub fn expected_symbols(&self) -> f64 {
        self.items
            .iter()
            .map(|it| (-(f64::from(it.bit_len))).exp2() * it.symbols.len() as f64)
            .sum()
    }

    /// Exact Kraft sum in units of `2^-60`.
    pub fn kraft_units(&self) -> u128 {
        self.items
            .iter()
            .map(|it| 1u128 << (60 - u32::from(it.bit_len).min(60)))
            .sum()
    }
}

/// A full assignment of actions, one per graph state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub actions: Vec<Action>,
}

/// Output of a synthesis run.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    /// Achieved rate in bits per symbol, recomputed from the stationary
    /// distribution of the returned policy.
    pub rate: f64,
    /// Root of the gain function found by bisection; agrees with `rate` to
    /// ten times the bisection tolerance.
    pub bisection_root: f64,
    pub policy: Policy,
    /// Stationary probability per state under the policy-induced chain.
    pub stationary: Vec<f64>,
    /// Unconstrained-delay capacity, an upper bound on `rate`.
    pub capacity_bound: f64,
    /// The policy packaged as an operational code.
    pub code: ModulationCode,
}

/// Synthesizes the best delay-`depth` modulation code for `spec`.
///
/// Bisection on the gain over `[0, capacity + 0.01]` down to `tol`, then a
/// consistency check: the greedy policy's stationary rate must agree with
/// the bisection root to `10 * tol`.
pub fn synthesize(spec: ChannelSpec, depth: usize, tol: f64) -> Result<SynthesisResult> {
    let ctx = dp::build_context(spec, depth)?;
    synthesize_with_context(&ctx, tol)
}

/// Synthesis over a prebuilt context, reusing its trees and cut plans.
pub fn synthesize_with_context(
    ctx: &SynthesisContext,
    tol: f64,
) -> Result<SynthesisResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter("rate tolerance must be positive".into()));
    }
    let graph = ctx.graph();
    let capacity = channel_capacity(graph, 1e-12)?.capacity_bits_per_symbol;

    // the workspace carries converged costs and held cuts from probe to
    // probe, so later gain evaluations start close to their fixed point
    let mut workspace = dp::Workspace::new(ctx);
    let mut gain_at =
        |rate: f64| -> Result<f64> { Ok(dp::converge(ctx, rate, dp::VALUE_SPAN_TOL, &mut workspace)?.0) };

    let mut lo = 0.0f64;
    let mut hi = capacity + 0.01;
    let g_lo = gain_at(lo)?;
    if g_lo <= 0.0 {
        return Err(Error::InvalidBracket(format!(
            "gain at rate 0 is {g_lo}, expected positive"
        )));
    }
    let g_hi = gain_at(hi)?;
    if g_hi >= 0.0 {
        return Err(Error::InvalidBracket(format!(
            "gain at rate {hi} is {g_hi}, expected negative"
        )));
    }
    let mut iterations = 0;
    while hi - lo > tol && iterations < BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if gain_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let root = 0.5 * (lo + hi);

    dp::converge(ctx, root, dp::VALUE_SPAN_TOL, &mut workspace)?;
    let policy = dp::extract_policy(ctx, root, &workspace);
    let stationary = chain::stationary_distribution(&policy, graph)?;
    let rate = chain::analytic_rate(&policy, &stationary);
    if (rate - root).abs() > 10.0 * tol {
        return Err(Error::RateMismatch {
            analytic: rate,
            root,
            tol: 10.0 * tol,
        });
    }
    let code = code_from_policy(graph, &policy, ctx.depth(), rate);
    Ok(SynthesisResult {
        rate,
        bisection_root: root,
        policy,
        stationary,
        capacity_bound: capacity,
        code,
    })
}

/// Packages a policy as an operational code: per state, the retained
/// continuations receive a canonical full prefix-free bit code consistent
/// with the policy's codeword lengths.
pub fn code_from_policy(
    graph: &ConstraintGraph,
    policy: &Policy,
    depth: usize,
    rate: f64,
) -> ModulationCode {
    let states = policy
        .actions
        .iter()
        .enumerate()
        .map(|(sid, action)| {
            debug_assert_eq!(action.kraft_units(), 1u128 << 60, "action is not a full code");
            let mut order: Vec<usize> = (0..action.items.len()).collect();
            order.sort_by(|&a, &b| {
                let ia = &action.items[a];
                let ib = &action.items[b];
                ia.bit_len.cmp(&ib.bit_len).then(ia.symbols.cmp(&ib.symbols))
            });
            let mut entries = Vec::with_capacity(order.len());
            let mut codeword: u64 = 0;
            let mut prev_len: u8 = action.items[order[0]].bit_len;
            for &idx in &order {
                let item = &action.items[idx];
                codeword <<= item.bit_len - prev_len;
                let bits: Vec<bool> = (0..item.bit_len)
                    .rev()
                    .map(|b| codeword >> b & 1 == 1)
                    .collect();
                codeword += 1;
                prev_len = item.bit_len;
                entries.push(crate::codec::CodeEntry {
                    bits,
                    symbols: item.symbols.clone(),
                    next: item.next,
                });
            }
            crate::codec::CodeState {
                window: graph.state(sid).clone(),
                entries,
            }
        })
        .collect();
    ModulationCode {
        spec: graph.spec(),
        depth,
        start: graph.all_gap_id(),
        states,
        rate,
    }
}
