//! ISI-free modulation codes for diffusion molecular channels.
//!
//! A transmitter signaling with molecule types must leave gaps before
//! reusing a type, or residues of earlier releases interfere with new ones.
//! This crate models the resulting constrained sequences, computes the best
//! possible rate, and builds practical codes:
//!
//! * [`graph`]: symbols, channel windows, the ISI-free predicate, the
//!   constraint graph of permissible transmissions, and per-state
//!   continuation trees.
//! * [`capacity`]: the unbounded-delay capacity `log2(lambda)` from the
//!   Perron eigenvalue of the adjacency matrix, with exact walk counting as
//!   a cross-check.
//! * [`synthesis`]: delay-limited code synthesis by bisection over an
//!   average-reward dynamic program with a geometric-Huffman inner step,
//!   plus an exhaustive oracle for small instances.
//! * [`codec`]: the serializable code artifact, streaming encoder and
//!   decoder, validation, and the alternating-molecule baseline.
//! * [`eval`]: Monte-Carlo verification, reference-table reproduction, and
//!   parameter sweeps.

pub mod capacity;
pub mod codec;
pub mod error;
pub mod eval;
pub mod graph;
pub mod synthesis;

pub use capacity::{
    adjacency_matrix, channel_capacity, count_paths, log2_biguint, spectral_radius,
    AdjacencyMatrix, CapacityResult,
};
pub use codec::{
    code_from_json, code_to_json, decode, encode, mcsk_code, validate_code, CodeEntry, CodeState,
    Decoder, EncodeOutput, Encoder, ModulationCode, Violation,
};
pub use error::{Error, Result};
pub use graph::{
    build_constraint_graph, build_continuation_tree, enumerate_states, is_isi_free, ChannelSpec,
    ConstraintGraph, ContinuationTree, State, StateId, Symbol, SymbolString,
};
pub use synthesis::{
    analytic_rate, brute_force_synthesize, build_context, code_from_policy, evaluate_gain, ghc,
    optimize_state, stationary_distribution, synthesize, Action, ActionItem, BruteForceOptions,
    GainEval, GhcResult, Policy, SynthesisContext, SynthesisResult, DEFAULT_RATE_TOL,
};
pub use eval::{
    reproduce_table2, run_monte_carlo, sweep, sweep_csv, RateReport, SweepConfig, SweepRow,
    Table2Row,
};
