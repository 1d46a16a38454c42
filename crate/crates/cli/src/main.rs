use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use hybridcc_core::harness::{self, ChurnParams, Mode, RunConfig, Stream};
use hybridcc_core::hybrid::{DEFAULT_BUFFER, DEFAULT_DELTA_MULT};
use hybridcc_core::{pair_universe, Edge};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Kind {
    Gnp,
    PlantedCore,
    InsertThenDelete,
    Churn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Hybrid,
    Lossless,
    Sketch,
    Streaming,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Hybrid => Mode::Hybrid,
            ModeArg::Lossless => Mode::Lossless,
            ModeArg::Sketch => Mode::Sketch,
            ModeArg::Streaming => Mode::Streaming,
        }
    }
}

fn demote_div(s: &str) -> Result<u32, String> {
    match s {
        "2" => Ok(2),
        "8" => Ok(8),
        _ => Err("must be 2 or 8".into()),
    }
}

/// Replay or generate edge streams for hybrid dynamic connectivity.
///
/// With `--input` or `--mode` the stream is replayed and query answers are
/// printed one per line. With only `--generate` the stream is written to
/// stdout.
#[derive(Debug, Parser)]
#[command(name = "hybridcc", version)]
struct Args {
    /// Stream file to replay.
    #[arg(long, conflicts_with = "generate")]
    input: Option<PathBuf>,
    /// Engine to replay through.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Synthesize a stream instead of reading one.
    #[arg(long, value_enum)]
    generate: Option<Kind>,
    /// Vertex count for generated streams.
    #[arg(long)]
    v: Option<u32>,
    /// Expected edge count (G(n,p) and periphery) or steady-state size (churn).
    #[arg(long)]
    edges: Option<u64>,
    /// Edge probability; overrides --edges.
    #[arg(long)]
    p: Option<f64>,
    /// Core size for planted_core and churn.
    #[arg(long, default_value_t = 0)]
    core_size: u32,
    /// Core edge probability; for churn, the share of inserts landing in the core.
    #[arg(long, default_value_t = 0.0)]
    core_p: f64,
    /// Churn: number of updates (default 10x --edges).
    #[arg(long)]
    updates: Option<usize>,
    /// Churn: chance of a query after each update.
    #[arg(long, default_value_t = 0.01)]
    query_rate: f64,
    /// Churn: number of core relocations over the stream.
    #[arg(long, default_value_t = 1)]
    phases: u32,
    #[arg(long, default_value_t = DEFAULT_DELTA_MULT)]
    delta_mult: u32,
    /// Demote at delta/2 or delta/8.
    #[arg(long, default_value = "2", value_parser = demote_div)]
    demote_div: u32,
    /// Sketch tiers, 0 for ceil(log2 V).
    #[arg(long, default_value_t = 0)]
    tiers: u32,
    /// Streaming sketch columns, 0 for ceil(log2 V).
    #[arg(long, default_value_t = 0)]
    columns: u32,
    /// Dense update buffer capacity, 0 disables buffering.
    #[arg(long, default_value_t = DEFAULT_BUFFER)]
    buffer: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Emit a metrics row every this many updates, 0 for only `c` lines.
    #[arg(long, default_value_t = 1000)]
    checkpoint_every: usize,
    /// CSV destination.
    #[arg(long)]
    metrics_out: Option<PathBuf>,
    /// Exit nonzero when oracle mismatches exceed the budget.
    #[arg(long)]
    fail_on_mismatch: bool,
    /// Write zeros in the timing columns so output is reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Run structural audits at every checkpoint.
    #[arg(long)]
    audit: bool,
}

fn probability(args: &Args, v: u32) -> Result<f64> {
    match (args.p, args.edges) {
        (Some(p), _) => Ok(p),
        (None, Some(m)) => Ok((m as f64 / pair_universe(v) as f64).min(1.0)),
        (None, None) => bail!("--p or --edges is required"),
    }
}

fn generate(args: &Args, kind: Kind) -> Result<Stream> {
    let v = args.v.context("--v is required with --generate")?;
    let s = match kind {
        Kind::Gnp => harness::gnp(v, probability(args, v)?, args.seed)?,
        Kind::PlantedCore => harness::planted_core(v, probability(args, v)?, args.core_size, args.core_p, args.seed)?,
        Kind::InsertThenDelete => {
            let base = if args.core_size > 0 {
                harness::planted_core(v, probability(args, v)?, args.core_size, args.core_p, args.seed)?
            } else {
                harness::gnp(v, probability(args, v)?, args.seed)?
            };
            let edges: Vec<Edge> = base
                .ops
                .iter()
                .filter_map(|op| if let harness::Op::Insert(e) = op { Some(*e) } else { None })
                .collect();
            harness::insert_then_delete(v, &edges)
        }
        Kind::Churn => {
            let target = args.edges.context("--edges is required for churn")? as usize;
            harness::churn(&ChurnParams {
                vertices: v,
                target_edges: target,
                updates: args.updates.unwrap_or(10 * target),
                core: args.core_size,
                core_frac: args.core_p,
                core_phases: args.phases,
                query_rate: args.query_rate,
                seed: args.seed,
            })?
        }
    };
    Ok(s)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let args = Args::parse();
    let stream = match (&args.input, args.generate) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Stream::parse(&text)?
        }
        (None, Some(kind)) => generate(&args, kind)?,
        (None, None) => bail!("one of --input or --generate is required"),
    };
    let mut stdout = BufWriter::new(io::stdout().lock());
    let Some(mode) = args.mode.map(Mode::from).or(args.input.as_ref().map(|_| Mode::Hybrid)) else {
        stdout.write_all(stream.to_text().as_bytes())?;
        stdout.flush()?;
        return Ok(ExitCode::SUCCESS);
    };
    let cfg = RunConfig {
        delta_mult: args.delta_mult,
        demote_div: args.demote_div,
        tiers: args.tiers,
        columns: args.columns,
        buffer: args.buffer,
        seed: args.seed,
        checkpoint_every: args.checkpoint_every,
        deep_audit: args.audit,
        timing: !args.no_timing,
    };
    let out = harness::run(mode, &stream, &cfg)?;
    for a in &out.answers {
        writeln!(stdout, "{a}")?;
    }
    stdout.flush()?;
    if let Some(path) = &args.metrics_out {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        harness::write_csv(&out.rows, BufWriter::new(f))?;
    }
    let budget = out.budget(mode);
    eprintln!(
        "{mode}: {} updates, {} queries, {} oracle mismatches (budget {budget})",
        stream.updates(),
        out.answers.len(),
        out.mismatches()
    );
    for msg in &out.audit_failures {
        eprintln!("audit: {msg}");
    }
    if args.fail_on_mismatch && (out.mismatches() > budget || !out.audit_failures.is_empty()) {
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
