//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see the lines for passing
//! criteria).
//!
//! Criterion 2 pins the reference rates for the k=1, N=2 channel
//! at depths 3..5. The exact cut search it mandates for d <= 3 provably
//! achieves a higher rate at depth 3 (a valid, fully validated and
//! simulated code at 1.26383 bits per symbol exists; the reference values
//! match a search restricted to fixed-length codewords instead). Those
//! sub-assertions are kept as stated and fail honestly; see the failure
//! message for the certificate.

use std::time::Instant;

use isifree::*;

type Check = std::result::Result<(), String>;

fn criterion(number: u32, name: &str, body: impl FnOnce() -> Check) {
    match body() {
        Ok(()) => println!("acceptance criterion {number} ({name}): PASS"),
        Err(message) => {
            println!("acceptance criterion {number} ({name}): FAIL");
            panic!("criterion {number} ({name}) failed:\n{message}");
        }
    }
}

fn spec_k1_n2() -> ChannelSpec {
    ChannelSpec::new(1, 2).unwrap()
}

fn check(cond: bool, msg: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

#[test]
fn criterion_01_capacity() {
    criterion(1, "capacity of the two-molecule channel", || {
        let started = Instant::now();
        let graph = build_constraint_graph(spec_k1_n2()).map_err(|e| e.to_string())?;
        let res = channel_capacity(&graph, 1e-12).map_err(|e| e.to_string())?;
        check(
            (res.lambda - 2.4142).abs() < 1e-3,
            format!("lambda {}", res.lambda),
        )?;
        check(
            (res.capacity_bits_per_symbol - 1.2716).abs() < 1e-3,
            format!("capacity {}", res.capacity_bits_per_symbol),
        )?;
        check(
            started.elapsed().as_secs_f64() < 1.0,
            format!("took {:?}", started.elapsed()),
        )
    });
}

#[test]
fn criterion_02_reference_rate_table() {
    criterion(2, "reference rate table for depths 1..5", || {
        let started = Instant::now();
        // depths 1..3 must run the exact cut search
        for depth in 1..=3usize {
            let ctx = build_context(spec_k1_n2(), depth).map_err(|e| e.to_string())?;
            for state in 0..ctx.graph().num_states() {
                check(
                    ctx.search(state).is_exact(),
                    format!("depth {depth} state {state} is not searched exactly"),
                )?;
            }
        }
        let expected = [1.25, 1.25, 1.2604, 1.2617, 1.2640];
        let mut failures = Vec::new();
        for depth in 1..=5usize {
            let res = synthesize(spec_k1_n2(), depth, 1e-6).map_err(|e| e.to_string())?;
            let reference = expected[depth - 1];
            let diff = (res.rate - reference).abs();
            let verdict = if diff <= 1e-3 { "ok" } else { "MISMATCH" };
            println!(
                "  depth {depth}: synthesized {:.6}, reference {reference}, |diff| {diff:.2e} {verdict}",
                res.rate
            );
            if diff > 1e-3 {
                failures.push(format!(
                    "depth {depth}: synthesized {:.6} vs reference {reference} (|diff| {diff:.2e})",
                    res.rate
                ));
            }
        }
        check(
            started.elapsed().as_secs_f64() < 300.0,
            format!("took {:?}", started.elapsed()),
        )?;
        check(
            failures.is_empty(),
            format!(
                "{}\nThe depth-3 search space provably contains a better code than the \
                 reference value: the synthesized policy validates with zero violations, \
                 round-trips, emits ISI-free streams, and its simulated rate matches the \
                 stationary-distribution rate. The reference values correspond to a search \
                 restricted to fixed-length codewords (that restriction reproduces \
                 1.260417/1.261719/1.264062 for depths 3/4/5 exactly).",
                failures.join("\n")
            ),
        )
    });
}

/// The reference depth-2 code for the two-molecule channel, entered
/// verbatim: per state, symbol pairs with their bit strings.
fn reference_depth2_code() -> ModulationCode {
    let gap = "-";
    let entry = |bits: &str, symbols: &str, next: usize| CodeEntry {
        bits: codec::parse_bits(bits).unwrap(),
        symbols: graph::parse_symbols(symbols).unwrap(),
        next,
    };
    // state ids in canonical order: 0 = "-", 1 = "M1", 2 = "M2"
    let states = vec![
        CodeState {
            window: gap.parse().unwrap(),
            entries: vec![
                entry("000", "- -", 0),
                entry("001", "M1 -", 0),
                entry("01", "M2 -", 0),
                entry("100", "- M1", 1),
                entry("101", "- M2", 2),
                entry("110", "M1 M2", 2),
                entry("111", "M2 M1", 1),
            ],
        },
        CodeState {
            window: "M1".parse().unwrap(),
            entries: vec![
                entry("00", "- -", 0),
                entry("01", "M2 -", 0),
                entry("100", "- M1", 1),
                entry("101", "- M2", 2),
                entry("11", "M2 M1", 1),
            ],
        },
        CodeState {
            window: "M2".parse().unwrap(),
            entries: vec![
                entry("00", "- -", 0),
                entry("01", "M1 -", 0),
                entry("100", "- M1", 1),
                entry("101", "- M2", 2),
                entry("11", "M1 M2", 2),
            ],
        },
    ];
    ModulationCode {
        spec: spec_k1_n2(),
        depth: 2,
        start: 0,
        states,
        rate: 1.25,
    }
}

#[test]
fn criterion_03_reference_depth2_code() {
    criterion(3, "reference depth-2 code consistency", || {
        let fixture = reference_depth2_code();
        let violations = validate_code(&fixture);
        check(
            violations.is_empty(),
            format!("fixture violations: {violations:?}"),
        )?;
        let fixture_rate = eval::code_analytic_rate(&fixture).map_err(|e| e.to_string())?;
        check(
            (fixture_rate - 1.25).abs() < 1e-9,
            format!("fixture rate {fixture_rate}"),
        )?;

        // operational spot checks straight from the reference rows
        let out = encode(&fixture, &codec::parse_bits("01").unwrap()).map_err(|e| e.to_string())?;
        check(
            graph::format_symbols(&out.symbols) == "M2 -" && out.final_state == 0,
            format!("encode 01 gave {}", graph::format_symbols(&out.symbols)),
        )?;
        let out = encode(&fixture, &codec::parse_bits("110").unwrap()).map_err(|e| e.to_string())?;
        check(
            graph::format_symbols(&out.symbols) == "M1 M2" && out.final_state == 2,
            format!("encode 110 gave {}", graph::format_symbols(&out.symbols)),
        )?;
        let bits = decode(&fixture, &graph::parse_symbols("M2 -").unwrap(), 2)
            .map_err(|e| e.to_string())?;
        check(
            codec::format_bits(&bits) == "01",
            format!("decode M2 - gave {}", codec::format_bits(&bits)),
        )?;

        let synthesized = synthesize(spec_k1_n2(), 2, 1e-6).map_err(|e| e.to_string())?;
        let violations = validate_code(&synthesized.code);
        check(
            violations.is_empty(),
            format!("synthesized violations: {violations:?}"),
        )?;
        check(
            (synthesized.rate - 1.25).abs() < 1e-6,
            format!("synthesized depth-2 rate {}", synthesized.rate),
        )
    });
}

/// The depth-1 reference scheme: one bit on the gap, two bits per molecule
/// at the gap state, one bit each at molecule states.
fn reference_depth1_policy(graph: &ConstraintGraph) -> Policy {
    let item = |symbols: &str, next: usize, bit_len: u8| ActionItem {
        symbols: graph::parse_symbols(symbols).unwrap(),
        next,
        bit_len,
    };
    let _ = graph;
    Policy {
        actions: vec![
            Action {
                items: vec![item("-", 0, 1), item("M1", 1, 2), item("M2", 2, 2)],
            },
            Action {
                items: vec![item("-", 0, 1), item("M2", 2, 1)],
            },
            Action {
                items: vec![item("-", 0, 1), item("M1", 1, 1)],
            },
        ],
    }
}

#[test]
fn criterion_04_depth1_reference_scheme() {
    criterion(4, "depth-1 reference scheme rates", || {
        let graph = build_constraint_graph(spec_k1_n2()).map_err(|e| e.to_string())?;
        let policy = reference_depth1_policy(&graph);
        let per_state: Vec<f64> = policy
            .actions
            .iter()
            .map(|a| a.expected_bits() / a.expected_symbols())
            .collect();
        check(
            per_state == vec![1.5, 1.0, 1.0],
            format!("per-state rates {per_state:?}"),
        )?;
        let pi = stationary_distribution(&policy, &graph).map_err(|e| e.to_string())?;
        check(
            (pi[0] - 0.5).abs() < 1e-9 && (pi[1] - 0.25).abs() < 1e-9 && (pi[2] - 0.25).abs() < 1e-9,
            format!("stationary {pi:?}"),
        )?;
        let rate = analytic_rate(&policy, &pi);
        check(rate == 1.25, format!("rate {rate}"))
    });
}

#[test]
fn criterion_05_alternating_baseline() {
    criterion(5, "alternating baseline rate", || {
        let code = mcsk_code(spec_k1_n2()).map_err(|e| e.to_string())?;
        let report = run_monte_carlo(&code, 1_000_000, 2024).map_err(|e| e.to_string())?;
        check(
            report.analytic_rate == 1.0,
            format!("analytic {}", report.analytic_rate),
        )?;
        check(
            report.monte_carlo_rate == 1.0,
            format!("monte carlo {}", report.monte_carlo_rate),
        )
    });
}

/// Exhaustive search over dyadic pmfs on every subset; independent of the
/// merge-based implementation it checks.
fn exhaustive_dyadic_best(weights: &[f64], max_len: u8) -> f64 {
    fn search(
        items: &[f64],
        at: usize,
        budget: f64,
        acc: f64,
        max_len: u8,
        best: &mut f64,
    ) {
        if at == items.len() {
            if budget.abs() < 1e-12 && acc > *best {
                *best = acc;
            }
            return;
        }
        let min_len = if items.len() == 1 { 0 } else { 1 };
        for len in min_len..=max_len {
            let p = (-(f64::from(len))).exp2();
            if p > budget + 1e-12 {
                continue;
            }
            search(
                items,
                at + 1,
                budget - p,
                acc + p * (items[at] / p).log2(),
                max_len,
                best,
            );
        }
    }
    let n = weights.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1 << n) {
        let subset: Vec<f64> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| weights[i])
            .collect();
        search(&subset, 0, 1.0, 0.0, max_len, &mut best);
    }
    best
}

#[test]
fn criterion_06_oracle_equivalence() {
    criterion(6, "oracle equivalence", || {
        let instances = [(1usize, 1usize, 1usize), (1, 1, 2), (1, 2, 1), (1, 2, 2), (2, 2, 1)];
        for (k, n, d) in instances {
            let spec = ChannelSpec::new(k, n).unwrap();
            // the depth-2 two-molecule instance deduplicates to 1.64e6
            // policies, just over the default cap
            let opts = BruteForceOptions {
                max_policies: 2_000_000,
                ..Default::default()
            };
            let oracle = brute_force_synthesize(spec, d, opts).map_err(|e| e.to_string())?;
            let synth = synthesize(spec, d, 1e-7).map_err(|e| e.to_string())?;
            check(
                (oracle.rate - synth.rate).abs() < 1e-6,
                format!(
                    "k={k} N={n} d={d}: oracle {} vs synthesized {}",
                    oracle.rate, synth.rate
                ),
            )?;
        }

        // geometric Huffman coding against exhaustive dyadic search
        let mut rng_state = 0x2545f4914f6cdd1du64;
        let mut next_unit = move || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..200 {
            let n = 1 + trial % 6;
            let weights: Vec<f64> = (0..n).map(|_| 0.02 + 3.98 * next_unit()).collect();
            let res = ghc(&weights).map_err(|e| e.to_string())?;
            let best = exhaustive_dyadic_best(&weights, 6);
            check(
                (res.score - best).abs() < 1e-9,
                format!("trial {trial}: ghc {} vs exhaustive {best} on {weights:?}", res.score),
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_07_path_count_asymptotics() {
    criterion(7, "walk-count asymptotics", || {
        let graph = build_constraint_graph(spec_k1_n2()).map_err(|e| e.to_string())?;
        let walks = count_paths(&graph, graph.all_gap_id(), 30);
        let normalized = log2_biguint(&walks) / 30.0;
        check(
            (normalized - 1.2716).abs() <= 0.02,
            format!("log2 N(30) / 30 = {normalized}"),
        )
    });
}

#[test]
fn criterion_08_round_trip_property() {
    criterion(8, "round-trip, ISI safety, buffer bound", || {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x15f1);
        for case in 0..1000 {
            let k = rng.gen_range(1..=2usize);
            let n = rng.gen_range(1..=3usize);
            let d = rng.gen_range(1..=3usize);
            let spec = ChannelSpec::new(k, n).unwrap();
            let code = codec::random_code(spec, d, &mut rng).map_err(|e| e.to_string())?;
            let bits: Vec<bool> = (0..1000).map(|_| rng.gen_bool(0.5)).collect();

            let out = encode(&code, &bits).map_err(|e| e.to_string())?;
            let mut stream = vec![Symbol::Gap; k];
            stream.extend_from_slice(&out.symbols);
            check(
                is_isi_free(&stream, k),
                format!("case {case}: emitted stream not ISI-free (k={k} n={n} d={d})"),
            )?;

            let mut decoder = Decoder::new(&code);
            let mut decoded = Vec::with_capacity(bits.len() + 8);
            for &sym in &out.symbols {
                decoder
                    .push_symbol(sym, &mut decoded)
                    .map_err(|e| e.to_string())?;
                check(
                    decoder.peak_buffer <= d + k,
                    format!("case {case}: decoder buffered {} > {}", decoder.peak_buffer, d + k),
                )?;
            }
            decoded.truncate(bits.len());
            check(
                decoded == bits,
                format!("case {case}: round trip mismatch (k={k} n={n} d={d})"),
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_09_trend_checks() {
    criterion(9, "rate trends over depth and alphabet", || {
        // nondecreasing in depth for k = 1..3 with N = k + 1
        for k in 1..=3usize {
            let config = SweepConfig {
                k: vec![k],
                num_types: vec![k + 1],
                depth: (1..=4).collect(),
                tol: 1e-6,
                out: None,
            };
            let rows = sweep(&config).map_err(|e| e.to_string())?;
            let mut last = 0.0f64;
            for row in rows {
                let rate = row
                    .rate
                    .ok_or_else(|| format!("cell k={k} d={} failed: {:?}", row.depth, row.error))?;
                let capacity = row.capacity.unwrap();
                check(
                    rate <= capacity + 1e-6,
                    format!("k={k} d={}: rate {rate} above capacity {capacity}", row.depth),
                )?;
                check(
                    rate >= last - 1e-7,
                    format!("k={k}: rate decreased at d={}: {rate} < {last}", row.depth),
                )?;
                last = rate;
            }
        }
        // nondecreasing in the alphabet size for k = 1, d = 1
        let config = SweepConfig {
            k: vec![1],
            num_types: (1..=6).collect(),
            depth: vec![1],
            tol: 1e-6,
            out: None,
        };
        let rows = sweep(&config).map_err(|e| e.to_string())?;
        let mut last = 0.0f64;
        for row in rows {
            let rate = row.rate.ok_or_else(|| format!("cell failed: {:?}", row.error))?;
            check(
                rate <= row.capacity.unwrap() + 1e-6,
                format!("N={}: rate above capacity", row.num_types),
            )?;
            check(
                rate >= last - 1e-7,
                format!("rate decreased at N={}: {rate} < {last}", row.num_types),
            )?;
            last = rate;
        }
        Ok(())
    });
}

#[test]
fn criterion_10_gain_consistency() {
    criterion(10, "gain monotonicity and root consistency", || {
        for (k, n, d) in [(1usize, 2usize, 1usize), (1, 2, 2), (1, 2, 3), (2, 2, 1)] {
            let spec = ChannelSpec::new(k, n).unwrap();
            let ctx = build_context(spec, d).map_err(|e| e.to_string())?;
            let res = synthesize(spec, d, 1e-6).map_err(|e| e.to_string())?;
            check(
                (res.rate - res.bisection_root).abs() <= 1e-5,
                format!(
                    "k={k} N={n} d={d}: analytic {} vs root {}",
                    res.rate, res.bisection_root
                ),
            )?;
            let probes = [0.3 * res.rate, 0.8 * res.rate, res.rate + 0.05];
            let mut gains = Vec::new();
            for rate in probes {
                gains.push(
                    evaluate_gain(&ctx, rate, 1e-9)
                        .map_err(|e| e.to_string())?
                        .gain,
                );
            }
            check(
                gains[0] > gains[1] && gains[1] > gains[2],
                format!("k={k} N={n} d={d}: gains not strictly decreasing: {gains:?}"),
            )?;
        }
        Ok(())
    });
}
