//! Fully dynamic hybrid connectivity: sparse edges and a mirror of the dense
//! spanning forest live in a lossless structure, edges between two heavy
//! vertices live in the tiered sketch engine.

use std::collections::{BTreeMap, BTreeSet};

use crate::edge::{Edge, VertexId};
use crate::error::{Error, Result};
use crate::forest::{ForestDelta, ForestEvent};
use crate::iblt::{IbltConfig, NeighborIblt};
use crate::lossless::LosslessGraph;
use crate::sketch::ceil_log2;
use crate::sketch_dc::{SketchDc, SketchDcConfig};
use crate::space::{iblt_words, lossless_words, sketch_dc_words, SpaceReport, VERTEX_WORDS};
use crate::streaming::{TransitionStats, UpdateKind};

pub const DEFAULT_DELTA_MULT: u32 = 25;
pub const DEFAULT_BUFFER: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HybridConfig {
    pub vertices: u32,
    /// Promotion threshold.
    pub delta: u32,
    /// Demotion threshold; also the IBLT recovery size.
    pub demote_at: u32,
    /// Sketch tiers, 0 for the default.
    pub tiers: u32,
    /// Pending dense updates before a forced flush; 0 disables buffering.
    pub buffer: usize,
    pub seed: u64,
}

impl HybridConfig {
    /// `δ = mult·⌈log2 V⌉`, demotion at `δ/demote_div`.
    pub fn new(vertices: u32, mult: u32, demote_div: u32, seed: u64) -> Self {
        let delta = mult * ceil_log2(vertices as u64).max(1);
        HybridConfig {
            vertices,
            delta,
            demote_at: delta / demote_div.max(1),
            tiers: 0,
            buffer: DEFAULT_BUFFER,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Hybrid {
    config: HybridConfig,
    alg_s: LosslessGraph,
    alg_d: SketchDc,
    degree: Vec<u32>,
    dense: Vec<bool>,
    iblts: BTreeMap<VertexId, NeighborIblt>,
    buffer: Vec<(Edge, UpdateKind)>,
    incident: Vec<u64>,
    last_transition: Vec<Option<u64>>,
    stats: TransitionStats,
    flushes: u64,
}

impl Hybrid {
    pub fn new(config: HybridConfig) -> Self {
        let n = config.vertices as usize;
        Hybrid {
            config,
            alg_s: LosslessGraph::new(config.vertices),
            alg_d: SketchDc::new(SketchDcConfig { vertices: config.vertices, tiers: config.tiers, seed: config.seed }),
            degree: vec![0; n],
            dense: vec![false; n],
            iblts: BTreeMap::new(),
            buffer: Vec::new(),
            incident: vec![0; n],
            last_transition: vec![None; n],
            stats: TransitionStats::default(),
            flushes: 0,
        }
    }

    pub fn config(&self) -> &HybridConfig {
        &self.config
    }

    pub fn sparse(&self) -> &LosslessGraph {
        &self.alg_s
    }

    pub fn dense_engine(&self) -> &SketchDc {
        &self.alg_d
    }

    pub fn degree(&self, v: VertexId) -> u32 {
        self.degree[v as usize]
    }

    pub fn is_dense(&self, v: VertexId) -> bool {
        self.dense[v as usize]
    }

    pub fn dense_count(&self) -> usize {
        self.iblts.len()
    }

    pub fn stats(&self) -> TransitionStats {
        self.stats
    }

    pub fn flush_count(&self) -> u64 {
        self.flushes
    }

    pub fn pending(&self) -> usize {
        self.buffer.len()
    }

    pub fn connected(&self, u: VertexId, v: VertexId) -> bool {
        self.alg_s.connected(u, v)
    }

    fn check(&self, e: Edge) -> Result<()> {
        if e.v() >= self.config.vertices {
            return Err(Error::VertexOutOfRange { vertex: e.v(), capacity: self.config.vertices });
        }
        Ok(())
    }

    fn both_dense(&self, e: Edge) -> bool {
        self.dense[e.u() as usize] && self.dense[e.v() as usize]
    }

    pub fn insert_edge(&mut self, e: Edge) -> Result<()> {
        self.check(e)?;
        if self.alg_s.contains(e) {
            return Err(Error::DuplicateEdge(e));
        }
        for x in [e.u(), e.v()] {
            self.degree[x as usize] += 1;
            self.incident[x as usize] += 1;
            if !self.dense[x as usize] && self.degree[x as usize] > self.config.delta {
                self.promote(x);
            }
        }
        if self.both_dense(e) {
            self.iblt(e.u()).insert(e.v());
            self.iblt(e.v()).insert(e.u());
            self.dense_update(e, UpdateKind::Insert);
        } else {
            self.alg_s.insert_edge(e)?;
        }
        Ok(())
    }

    pub fn delete_edge(&mut self, e: Edge) -> Result<()> {
        self.check(e)?;
        let present = if self.both_dense(e) {
            self.degree[e.u() as usize] > 0 && self.degree[e.v() as usize] > 0
        } else {
            self.alg_s.contains(e)
        };
        if !present {
            return Err(Error::MissingEdge(e));
        }
        for x in [e.u(), e.v()] {
            self.degree[x as usize] -= 1;
            self.incident[x as usize] += 1;
            if self.dense[x as usize] && self.degree[x as usize] <= self.config.demote_at {
                // An aborted demotion leaves x dense; a later deletion retries.
                let _ = self.demote(x);
            }
        }
        if self.both_dense(e) {
            self.iblt(e.u()).delete(e.v());
            self.iblt(e.v()).delete(e.u());
            self.dense_update(e, UpdateKind::Delete);
        } else {
            self.alg_s.delete_edge(e)?;
        }
        Ok(())
    }

    fn iblt(&mut self, v: VertexId) -> &mut NeighborIblt {
        self.iblts.get_mut(&v).expect("dense vertex has an IBLT")
    }

    /// Routes a dense update through the buffer. Anything that could change
    /// connectivity in the sparse mirror is applied immediately.
    fn dense_update(&mut self, e: Edge, kind: UpdateKind) {
        let forest_affecting = match kind {
            UpdateKind::Insert => !self.alg_s.connected(e.u(), e.v()),
            UpdateKind::Delete => self.alg_d.is_forest_edge(e),
        };
        if self.config.buffer == 0 || forest_affecting {
            self.flush();
            self.apply_dense(e, kind);
            return;
        }
        self.buffer.push((e, kind));
        if self.buffer.len() >= self.config.buffer {
            self.flush();
        }
    }

    fn apply_dense(&mut self, e: Edge, kind: UpdateKind) {
        let delta = match kind {
            UpdateKind::Insert => self.alg_d.insert_edge(e),
            UpdateKind::Delete => self.alg_d.delete_edge(e),
        }
        .expect("dense update on active endpoints");
        self.mirror(&delta, &BTreeSet::new());
    }

    /// Applies all pending dense updates in order.
    pub fn flush(&mut self) {
        if self.buffer.is_empty() {
            return;
        }
        self.flushes += 1;
        for (e, kind) in std::mem::take(&mut self.buffer) {
            self.apply_dense(e, kind);
        }
    }

    fn mirror(&mut self, delta: &ForestDelta, exempt: &BTreeSet<Edge>) {
        for ev in delta {
            match *ev {
                ForestEvent::Add(f) => {
                    if !self.alg_s.contains(f) {
                        self.alg_s.insert_edge(f).expect("mirror insert");
                    }
                }
                ForestEvent::Remove(f) => {
                    if !exempt.contains(&f) && self.alg_s.contains(f) {
                        self.alg_s.delete_edge(f).expect("mirror delete");
                    }
                }
            }
        }
    }

    fn note_transition(&mut self, v: VertexId) {
        let now = self.incident[v as usize];
        if let Some(prev) = self.last_transition[v as usize] {
            let gap = now - prev;
            self.stats.min_gap = Some(self.stats.min_gap.map_or(gap, |g| g.min(gap)));
        }
        self.last_transition[v as usize] = Some(now);
    }

    fn promote(&mut self, v: VertexId) {
        self.flush();
        self.alg_d.insert_vertex(v).expect("promoted vertex is inactive");
        self.iblts.insert(
            v,
            NeighborIblt::new(IbltConfig {
                recovery_size: self.config.demote_at,
                vertices: self.config.vertices,
                seed: self.config.seed ^ 0x1b17,
            }),
        );
        self.dense[v as usize] = true;
        let mut delta = ForestDelta::new();
        let moved: Vec<VertexId> =
            self.alg_s.neighbors(v).iter().copied().filter(|&u| self.dense[u as usize]).collect();
        for u in moved {
            let e = Edge::new(v, u).unwrap();
            delta.extend(self.alg_d.insert_edge(e).expect("both endpoints active"));
            self.iblt(u).insert(v);
            self.iblt(v).insert(u);
            self.alg_s.delete_edge(e).expect("sparse edge present");
        }
        self.mirror(&delta, &BTreeSet::new());
        self.stats.promotions += 1;
        self.note_transition(v);
    }

    /// Moves a dense vertex back to the lossless side. On a failed or
    /// inconsistent recovery nothing changes.
    pub fn demote(&mut self, v: VertexId) -> Result<()> {
        if !self.dense[v as usize] {
            return Ok(());
        }
        self.flush();
        let recovered = self.iblts[&v].recover();
        let neighbors = match recovered {
            Ok(s)
                if s.len() == self.alg_d.degree(v) as usize
                    && s.iter().all(|&u| u != v && self.dense[u as usize]) =>
            {
                s
            }
            _ => {
                self.stats.aborted_demotions += 1;
                return Err(Error::RecoveryFailed);
            }
        };
        let mut delta = ForestDelta::new();
        let mut rehomed = BTreeSet::new();
        for u in neighbors {
            let e = Edge::new(v, u).unwrap();
            delta.extend(self.alg_d.delete_edge(e).expect("recovered edge is dense"));
            self.iblt(u).delete(v);
            if !self.alg_s.contains(e) {
                self.alg_s.insert_edge(e)?;
            }
            rehomed.insert(e);
        }
        self.mirror(&delta, &rehomed);
        self.alg_d.delete_vertex(v)?;
        self.iblts.remove(&v);
        self.dense[v as usize] = false;
        self.stats.demotions += 1;
        self.note_transition(v);
        Ok(())
    }

    pub fn space(&self) -> SpaceReport {
        let n = self.config.vertices as usize;
        // Global degrees and the dense bitmap sit with the sparse side.
        let interface = n * VERTEX_WORDS + n.div_ceil(64);
        let d = self.alg_d.space();
        SpaceReport {
            sparse: lossless_words(self.config.vertices, &self.alg_s.space()) + interface,
            dense: sketch_dc_words(&d),
            iblt: iblt_words(self.iblts.values().map(NeighborIblt::cell_count).sum()),
            buckets: d.buckets(),
            dense_vertices: self.iblts.len(),
        }
    }

    /// Full-state check against the true edge set. Flushes first.
    pub fn audit(&mut self, edges: &[Edge]) -> std::result::Result<(), String> {
        self.flush();
        let n = self.config.vertices as usize;
        let mut deg = vec![0u32; n];
        let mut sparse = BTreeSet::new();
        let mut dense_edges = Vec::new();
        let mut dense_nbrs: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for &e in edges {
            deg[e.u() as usize] += 1;
            deg[e.v() as usize] += 1;
            if self.both_dense(e) {
                dense_edges.push(e);
                dense_nbrs.entry(e.u()).or_default().insert(e.v());
                dense_nbrs.entry(e.v()).or_default().insert(e.u());
            } else {
                sparse.insert(e);
            }
        }
        if deg != self.degree {
            return Err("global degrees differ from the true degrees".into());
        }
        for v in 0..n as u32 {
            let d = self.dense[v as usize];
            if d != self.alg_d.is_active(v) || d != self.iblts.contains_key(&v) {
                return Err(format!("dense flag of {v} disagrees with the engines"));
            }
        }
        let mut expect: BTreeSet<Edge> = sparse;
        expect.extend(self.alg_d.forest_edges());
        if self.alg_s.edges().into_iter().collect::<BTreeSet<_>>() != expect {
            return Err("sparse side is not sparse edges plus the dense forest".into());
        }
        if !self.alg_d.leaves_match(&dense_edges) {
            return Err("dense engine sketches do not encode the dense edges".into());
        }
        for (&v, t) in &self.iblts {
            let mut fresh = NeighborIblt::new(*t.config());
            for u in dense_nbrs.remove(&v).unwrap_or_default() {
                fresh.insert(u);
            }
            if fresh.to_bytes() != t.to_bytes() {
                return Err(format!("IBLT of {v} does not encode its dense neighbors"));
            }
        }
        let g = self.alg_d.audit();
        if !g.ok() {
            return Err(format!("dense engine audit failed: {g:?}"));
        }
        self.alg_s.audit()
    }
}
