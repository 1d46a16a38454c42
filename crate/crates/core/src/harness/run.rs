//! Stream replay through one engine, with oracle checks and metrics rows.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::edge::{Edge, VertexId};
use crate::error::{Error, Result};
use crate::hybrid::{Hybrid, HybridConfig, DEFAULT_BUFFER, DEFAULT_DELTA_MULT};
use crate::lossless::LosslessGraph;
use crate::sketch_dc::{GibbAudit, SketchDc, SketchDcConfig};
use crate::space::{lossless_words, sketch_dc_words, streaming_vertex_words, SpaceReport};
use crate::streaming::{
    HybridStreaming, SpanningForest, StreamUpdate, StreamingConfig, TransitionStats, UpdateKind, VertexStorage,
};

use super::oracle::union_find_labels;
use super::stream::{Op, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Hybrid,
    Lossless,
    Sketch,
    Streaming,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Hybrid, Mode::Lossless, Mode::Sketch, Mode::Streaming];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Hybrid => "hybrid",
            Mode::Lossless => "lossless",
            Mode::Sketch => "sketch",
            Mode::Streaming => "streaming",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::BadParams(format!("unknown mode {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub delta_mult: u32,
    /// Demotion at `δ / demote_div`.
    pub demote_div: u32,
    /// Sketch tiers, 0 for `⌈log2 V⌉`.
    pub tiers: u32,
    /// Sketch matrix columns in streaming mode, 0 for `⌈log2 V⌉`.
    pub columns: u32,
    pub buffer: usize,
    pub seed: u64,
    /// Emit a row and run checks every this many updates; 0 disables.
    pub checkpoint_every: usize,
    /// Structural audits at every checkpoint.
    pub deep_audit: bool,
    /// Record wall-clock columns; off gives byte-identical CSV across runs.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            delta_mult: DEFAULT_DELTA_MULT,
            demote_div: 2,
            tiers: 0,
            columns: 0,
            buffer: DEFAULT_BUFFER,
            seed: 1,
            checkpoint_every: 1000,
            deep_audit: false,
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricsRow {
    pub step: u64,
    pub mode: String,
    pub counted_words_sparse: u64,
    pub counted_words_dense: u64,
    pub counted_words_iblt: u64,
    pub buckets_total: u64,
    pub dense_vertices: u64,
    pub throughput_ups: u64,
    pub query_latency_ns: u64,
    pub oracle_mismatches: u64,
}

pub const CSV_HEADER: [&str; 10] = [
    "step",
    "mode",
    "counted_words_sparse",
    "counted_words_dense",
    "counted_words_iblt",
    "buckets_total",
    "dense_vertices",
    "throughput_ups",
    "query_latency_ns",
    "oracle_mismatches",
];

pub fn write_csv<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Decode(e.to_string());
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Decode(e.to_string()))
}

/// Tallies of the tiered-engine invariants over all checkpoints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GibbTally {
    pub checks: u64,
    pub invariant1_failures: u64,
    pub nested_failures: u64,
    pub invariant3_violations: u64,
    pub other_failures: u64,
}

impl GibbTally {
    fn add(&mut self, a: &GibbAudit) {
        self.checks += 1;
        self.invariant1_failures += !a.invariant1 as u64;
        self.nested_failures += !a.nested as u64;
        self.invariant3_violations += a.invariant3_violations as u64;
        self.other_failures += !(a.aggregates_consistent && a.top_mirror) as u64;
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub rows: Vec<MetricsRow>,
    pub answers: Vec<bool>,
    pub query_mismatches: u64,
    pub checkpoints: u64,
    pub partition_mismatches: u64,
    pub audit_failures: Vec<String>,
    pub gibb: GibbTally,
    pub transitions: Option<TransitionStats>,
    pub final_space: SpaceReport,
}

impl RunOutput {
    pub fn mismatches(&self) -> u64 {
        self.query_mismatches + self.partition_mismatches
    }

    /// Allowed mismatches: none for the lossless engine, otherwise one per
    /// thousand queries.
    pub fn budget(&self, mode: Mode) -> u64 {
        match mode {
            Mode::Lossless => 0,
            _ => self.answers.len() as u64 / 1000,
        }
    }
}

enum Engine {
    Hybrid(Box<Hybrid>),
    Lossless(Box<LosslessGraph>),
    Sketch(Box<SketchDc>),
    Streaming(Box<HybridStreaming>, Option<SpanningForest>),
}

impl Engine {
    fn new(mode: Mode, vertices: u32, cfg: &RunConfig) -> Self {
        match mode {
            Mode::Hybrid => {
                let mut hc = HybridConfig::new(vertices, cfg.delta_mult, cfg.demote_div, cfg.seed);
                hc.tiers = cfg.tiers;
                hc.buffer = cfg.buffer;
                Engine::Hybrid(Box::new(Hybrid::new(hc)))
            }
            Mode::Lossless => Engine::Lossless(Box::new(LosslessGraph::new(vertices))),
            Mode::Sketch => {
                let mut dc = SketchDc::new(SketchDcConfig { vertices, tiers: cfg.tiers, seed: cfg.seed });
                for v in 0..vertices {
                    dc.insert_vertex(v).expect("fresh vertex");
                }
                Engine::Sketch(Box::new(dc))
            }
            Mode::Streaming => {
                let mut sc = StreamingConfig::with_multiplier(vertices, cfg.delta_mult, cfg.seed);
                if cfg.columns > 0 {
                    sc.columns = cfg.columns;
                }
                Engine::Streaming(Box::new(HybridStreaming::new(sc)), None)
            }
        }
    }

    fn update(&mut self, e: Edge, kind: UpdateKind) -> Result<()> {
        match (self, kind) {
            (Engine::Hybrid(h), UpdateKind::Insert) => h.insert_edge(e),
            (Engine::Hybrid(h), UpdateKind::Delete) => h.delete_edge(e),
            (Engine::Lossless(g), UpdateKind::Insert) => g.insert_edge(e).map(drop),
            (Engine::Lossless(g), UpdateKind::Delete) => g.delete_edge(e).map(drop),
            (Engine::Sketch(d), UpdateKind::Insert) => d.insert_edge(e).map(drop),
            (Engine::Sketch(d), UpdateKind::Delete) => d.delete_edge(e).map(drop),
            (Engine::Streaming(s, cache), kind) => {
                *cache = None;
                s.process(StreamUpdate { edge: e, kind })
            }
        }
    }

    fn connected(&mut self, u: VertexId, v: VertexId) -> bool {
        match self {
            Engine::Hybrid(h) => h.connected(u, v),
            Engine::Lossless(g) => g.connected(u, v),
            Engine::Sketch(d) => d.connected(u, v),
            Engine::Streaming(s, cache) => {
                let f = cache.get_or_insert_with(|| s.query());
                f.labels[u as usize] == f.labels[v as usize]
            }
        }
    }

    fn labels(&mut self, vertices: u32) -> Vec<VertexId> {
        match self {
            Engine::Hybrid(h) => h.sparse().component_labels(),
            Engine::Lossless(g) => g.component_labels(),
            Engine::Sketch(d) => union_find_labels(vertices, &d.forest_edges()),
            Engine::Streaming(s, cache) => cache.get_or_insert_with(|| s.query()).labels.clone(),
        }
    }

    fn space(&self, vertices: u32) -> SpaceReport {
        match self {
            Engine::Hybrid(h) => h.space(),
            Engine::Lossless(g) => SpaceReport { sparse: lossless_words(vertices, &g.space()), ..Default::default() },
            Engine::Sketch(d) => {
                let s = d.space();
                SpaceReport {
                    dense: sketch_dc_words(&s),
                    buckets: s.buckets(),
                    dense_vertices: s.active_vertices,
                    ..Default::default()
                }
            }
            Engine::Streaming(s, _) => {
                let mut r = SpaceReport::default();
                for v in 0..vertices {
                    let st = s.storage(v);
                    match st {
                        VertexStorage::Explicit { .. } => r.sparse += streaming_vertex_words(st),
                        VertexStorage::Sketch { buckets, iblt_cells } => {
                            let iblt = streaming_vertex_words(VertexStorage::Sketch { buckets: 0, iblt_cells }) - 1;
                            r.iblt += iblt;
                            r.dense += streaming_vertex_words(st) - iblt;
                            r.buckets += buckets;
                            r.dense_vertices += 1;
                        }
                    }
                }
                r
            }
        }
    }

    fn audit(&mut self, edges: &[Edge], gibb: &mut GibbTally) -> std::result::Result<(), String> {
        match self {
            Engine::Hybrid(h) => {
                let r = h.audit(edges);
                gibb.add(&h.dense_engine().audit());
                r
            }
            Engine::Lossless(g) => g.audit(),
            Engine::Sketch(d) => {
                let a = d.audit();
                gibb.add(&a);
                if !d.leaves_match(edges) {
                    return Err("sketch leaves do not encode the edge set".into());
                }
                Ok(())
            }
            Engine::Streaming(s, _) => s.audit(edges),
        }
    }

    fn transitions(&self) -> Option<TransitionStats> {
        match self {
            Engine::Hybrid(h) => Some(h.stats()),
            Engine::Streaming(s, _) => Some(s.stats()),
            _ => None,
        }
    }
}

struct Interval {
    updates: u64,
    update_ns: u128,
    queries: u64,
    query_ns: u128,
}

/// Replays `stream` through the engine for `mode`.
pub fn run(mode: Mode, stream: &Stream, cfg: &RunConfig) -> Result<RunOutput> {
    let n = stream.vertices;
    if n < 2 {
        return Err(Error::BadParams(format!("need at least 2 vertices, got {n}")));
    }
    let mut engine = Engine::new(mode, n, cfg);
    let mut out = RunOutput::default();
    let mut present: BTreeSet<Edge> = BTreeSet::new();
    let mut oracle: Option<Vec<VertexId>> = None;
    let mut step = 0u64;
    let mut iv = Interval { updates: 0, update_ns: 0, queries: 0, query_ns: 0 };

    let checkpoint = |engine: &mut Engine,
                          out: &mut RunOutput,
                          present: &BTreeSet<Edge>,
                          oracle: &mut Option<Vec<VertexId>>,
                          iv: &mut Interval,
                          step: u64| {
        out.checkpoints += 1;
        let truth = oracle.get_or_insert_with(|| union_find_labels(n, present));
        if engine.labels(n) != *truth {
            out.partition_mismatches += 1;
        }
        if cfg.deep_audit {
            let edges: Vec<Edge> = present.iter().copied().collect();
            if let Err(msg) = engine.audit(&edges, &mut out.gibb) {
                out.audit_failures.push(format!("step {step}: {msg}"));
            }
        }
        let space = engine.space(n);
        let (ups, lat) = if cfg.timing {
            let ups = (iv.updates as u128 * 1_000_000_000).checked_div(iv.update_ns).unwrap_or(0) as u64;
            let lat = if iv.queries > 0 { (iv.query_ns / iv.queries as u128) as u64 } else { 0 };
            (ups, lat)
        } else {
            (0, 0)
        };
        out.rows.push(MetricsRow {
            step,
            mode: mode.name().to_string(),
            counted_words_sparse: space.sparse as u64,
            counted_words_dense: space.dense as u64,
            counted_words_iblt: space.iblt as u64,
            buckets_total: space.buckets as u64,
            dense_vertices: space.dense_vertices as u64,
            throughput_ups: ups,
            query_latency_ns: lat,
            oracle_mismatches: out.mismatches(),
        });
        *iv = Interval { updates: 0, update_ns: 0, queries: 0, query_ns: 0 };
    };

    for (i, op) in stream.ops.iter().enumerate() {
        match *op {
            Op::Insert(e) | Op::Delete(e) => {
                let kind = if matches!(op, Op::Insert(_)) { UpdateKind::Insert } else { UpdateKind::Delete };
                let ok = match kind {
                    UpdateKind::Insert => present.insert(e),
                    UpdateKind::Delete => present.remove(&e),
                };
                if !ok {
                    return Err(Error::MalformedUpdate(format!("op {i}: {op:?}")));
                }
                oracle = None;
                let t = Instant::now();
                engine.update(e, kind)?;
                iv.update_ns += t.elapsed().as_nanos();
                iv.updates += 1;
                step += 1;
                if cfg.checkpoint_every > 0 && step.is_multiple_of(cfg.checkpoint_every as u64) {
                    checkpoint(&mut engine, &mut out, &present, &mut oracle, &mut iv, step);
                }
            }
            Op::Query(a, b) => {
                let t = Instant::now();
                let got = engine.connected(a, b);
                iv.query_ns += t.elapsed().as_nanos();
                iv.queries += 1;
                let truth = oracle.get_or_insert_with(|| union_find_labels(n, &present));
                if got != (truth[a as usize] == truth[b as usize]) {
                    out.query_mismatches += 1;
                }
                out.answers.push(got);
            }
            Op::Checkpoint => checkpoint(&mut engine, &mut out, &present, &mut oracle, &mut iv, step),
        }
    }
    if iv.updates > 0 {
        checkpoint(&mut engine, &mut out, &present, &mut oracle, &mut iv, step);
    }
    out.transitions = engine.transitions();
    out.final_space = engine.space(n);
    Ok(out)
}
