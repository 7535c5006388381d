//! Command-line front end: capacity, code synthesis, encoding, decoding,
//! rate verification, the reference comparison table, and parameter sweeps.
//!
//! Exits zero on success; on failure prints a single machine-readable
//! `error: <message>` line to stderr and exits nonzero.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use isifree::{
    build_constraint_graph, capacity::log2_biguint, channel_capacity, codec, count_paths, decode,
    encode, eval, run_monte_carlo, synthesize, validate_code, ChannelSpec, ModulationCode,
    SweepConfig,
};

#[derive(Parser)]
#[command(
    name = "isifree",
    about = "ISI-free modulation codes for diffusion molecular channels",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the channel capacity and optionally a walk-count table.
    Capacity {
        /// Channel memory in time slots.
        #[arg(long)]
        k: usize,
        /// Number of molecule types.
        #[arg(long = "num-types")]
        num_types: usize,
        /// Also print `m,N(m),log2N/m` rows for walk lengths 1..=M.
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Synthesize the best delay-limited code and write it to a file.
    Synthesize {
        #[arg(long)]
        k: usize,
        #[arg(long = "num-types")]
        num_types: usize,
        /// Blocklength: longest symbol string a codeword may span.
        #[arg(long)]
        depth: usize,
        /// Bisection tolerance on the rate.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Output path for the code file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a bit file into a symbol stream with a code file.
    Encode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a symbol stream back into bits.
    Decode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo rate verification of a code file.
    Rate {
        #[arg(long)]
        code: PathBuf,
        /// Number of pseudorandom input bits.
        #[arg(long, default_value_t = 1_000_000)]
        bits: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Recompute the reference rate table for the k=1, N=2 channel.
    Table2,
    /// Run a parameter sweep from a JSON config and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; overrides the config's `out` field.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_code(path: &PathBuf) -> Result<ModulationCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let code = codec::code_from_json(&text)?;
    let violations = validate_code(&code);
    if !violations.is_empty() {
        bail!(
            "code file {} is invalid: {}",
            path.display(),
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ")
        );
    }
    Ok(code)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Capacity { k, num_types, paths } => {
            let spec = ChannelSpec::new(k, num_types)?;
            let graph = build_constraint_graph(spec)?;
            let result = channel_capacity(&graph, 1e-12)?;
            println!("states={}", graph.num_states());
            println!("lambda={:.10}", result.lambda);
            println!("capacity={:.10}", result.capacity_bits_per_symbol);
            if let Some(max_len) = paths {
                println!("m,N(m),log2N/m");
                for m in 1..=max_len {
                    let walks = count_paths(&graph, graph.all_gap_id(), m);
                    let normalized = log2_biguint(&walks) / m as f64;
                    println!("{m},{walks},{normalized:.6}");
                }
            }
            Ok(())
        }
        Command::Synthesize {
            k,
            num_types,
            depth,
            tol,
            out,
        } => {
            let spec = ChannelSpec::new(k, num_types)?;
            let result = synthesize(spec, depth, tol)?;
            fs::write(&out, codec::code_to_json(&result.code))
                .with_context(|| format!("writing {}", out.display()))?;
            println!("rate={:.10}", result.rate);
            println!("capacity={:.10}", result.capacity_bound);
            println!("gap={:.10}", result.capacity_bound - result.rate);
            println!("code={}", out.display());
            Ok(())
        }
        Command::Encode { code, input, out } => {
            let code = load_code(&code)?;
            let text =
                fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let bits = codec::parse_bits(&text)?;
            let output = encode(&code, &bits)?;
            fs::write(&out, codec::format_stream(bits.len(), &output.symbols))
                .with_context(|| format!("writing {}", out.display()))?;
            println!("bits={}", bits.len());
            println!("symbols={}", output.symbols.len());
            println!("padded_bits={}", output.padded_bits);
            Ok(())
        }
        Command::Decode { code, input, out } => {
            let code = load_code(&code)?;
            let text =
                fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let (n_bits, symbols) = codec::parse_stream(&text)?;
            let bits = decode(&code, &symbols, n_bits)?;
            fs::write(&out, codec::format_bits(&bits))
                .with_context(|| format!("writing {}", out.display()))?;
            println!("bits={}", bits.len());
            Ok(())
        }
        Command::Rate { code, bits, seed } => {
            let code = load_code(&code)?;
            let report = run_monte_carlo(&code, bits, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Table2 => {
            let rows = eval::reproduce_table2()?;
            println!("{:<12} {:>10} {:>10} {:>10}", "scheme", "rate", "reference", "|diff|");
            for row in rows {
                println!(
                    "{:<12} {:>10.6} {:>10.4} {:>10.2e}",
                    row.scheme, row.rate, row.reference, row.abs_diff
                );
            }
            Ok(())
        }
        Command::Sweep { config, out } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let parsed: SweepConfig = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", config.display()))?;
            let rows = eval::sweep(&parsed)?;
            let csv = eval::sweep_csv(&rows);
            let target = out
                .or_else(|| parsed.out.as_ref().map(PathBuf::from))
                .context("no output path: pass --out or set \"out\" in the config")?;
            fs::write(&target, csv).with_context(|| format!("writing {}", target.display()))?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            println!("cells={}", rows.len());
            println!("failed={failed}");
            println!("csv={}", target.display());
            Ok(())
        }
    }
}
