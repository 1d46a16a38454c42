//! Hybrid semi-streaming connectivity: explicit neighbor sets for light
//! vertices, sketch matrices plus recovery IBLTs for heavy ones.

use std::collections::BTreeSet;

use crate::edge::{decode_edge, encode, pair_universe, Edge, VertexId};
use crate::error::{Error, Result};
use crate::iblt::{IbltConfig, NeighborIblt};
use crate::sketch::{ceil_log2, Sample, SketchMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateKind {
    Insert,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamUpdate {
    pub edge: Edge,
    pub kind: UpdateKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamingConfig {
    pub vertices: u32,
    /// Promotion threshold: a vertex becomes heavy once its degree exceeds it.
    pub delta: u32,
    /// Columns per sketch matrix.
    pub columns: u32,
    pub seed: u64,
}

impl StreamingConfig {
    /// `δ = mult·⌈log2 V⌉` and `L = ⌈log2 V⌉`.
    pub fn with_multiplier(vertices: u32, mult: u32, seed: u64) -> Self {
        let log_v = ceil_log2(vertices as u64).max(1);
        StreamingConfig { vertices, delta: mult * log_v, columns: log_v, seed }
    }

    pub fn demote_at(&self) -> u32 {
        self.delta / 2
    }
}

#[derive(Debug, Clone)]
enum Form {
    Explicit(BTreeSet<VertexId>),
    Sketch { matrix: SketchMatrix, recovery: NeighborIblt },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransitionStats {
    pub promotions: u64,
    pub demotions: u64,
    pub aborted_demotions: u64,
    /// Fewest incident updates seen between two transitions of one vertex.
    pub min_gap: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningForest {
    /// Forest edges in ascending order.
    pub edges: Vec<Edge>,
    /// Minimum vertex id of each vertex's component.
    pub labels: Vec<VertexId>,
}

/// Per-vertex storage counts for space accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexStorage {
    Explicit { entries: usize },
    Sketch { buckets: usize, iblt_cells: usize },
}

#[derive(Debug, Clone)]
pub struct HybridStreaming {
    config: StreamingConfig,
    universe: u64,
    degree: Vec<u32>,
    form: Vec<Form>,
    incident: Vec<u64>,
    last_transition: Vec<Option<u64>>,
    stats: TransitionStats,
}

impl HybridStreaming {
    pub fn new(config: StreamingConfig) -> Self {
        let n = config.vertices as usize;
        HybridStreaming {
            config,
            universe: pair_universe(config.vertices),
            degree: vec![0; n],
            form: vec![Form::Explicit(BTreeSet::new()); n],
            incident: vec![0; n],
            last_transition: vec![None; n],
            stats: TransitionStats::default(),
        }
    }

    pub fn config(&self) -> &StreamingConfig {
        &self.config
    }

    pub fn degree(&self, v: VertexId) -> u32 {
        self.degree[v as usize]
    }

    pub fn is_sketch(&self, v: VertexId) -> bool {
        matches!(self.form[v as usize], Form::Sketch { .. })
    }

    pub fn stats(&self) -> TransitionStats {
        self.stats
    }

    /// Explicitly stored neighbors of `v`, empty for sketch-form vertices.
    pub fn explicit_set(&self, v: VertexId) -> Option<&BTreeSet<VertexId>> {
        match &self.form[v as usize] {
            Form::Explicit(s) => Some(s),
            Form::Sketch { .. } => None,
        }
    }

    pub fn storage(&self, v: VertexId) -> VertexStorage {
        match &self.form[v as usize] {
            Form::Explicit(s) => VertexStorage::Explicit { entries: s.len() },
            Form::Sketch { matrix, recovery } => {
                VertexStorage::Sketch { buckets: matrix.bucket_count(), iblt_cells: recovery.cell_count() }
            }
        }
    }

    /// Sketch-form neighbors of a sketch-form vertex, decoded from its IBLT.
    pub fn recover_sketch_neighbors(&self, v: VertexId) -> Option<Result<BTreeSet<VertexId>>> {
        match &self.form[v as usize] {
            Form::Sketch { recovery, .. } => Some(recovery.recover()),
            Form::Explicit(_) => None,
        }
    }

    pub fn process(&mut self, upd: StreamUpdate) -> Result<()> {
        let e = upd.edge;
        let (u, v) = (e.u(), e.v());
        if v >= self.config.vertices {
            return Err(Error::VertexOutOfRange { vertex: v, capacity: self.config.vertices });
        }
        let stored = self.explicitly_stored(e);
        match upd.kind {
            UpdateKind::Insert => {
                if stored {
                    return Err(Error::MalformedUpdate(format!("insert of present edge {e}")));
                }
                self.degree[u as usize] += 1;
                self.degree[v as usize] += 1;
            }
            UpdateKind::Delete => {
                let both_sketch = self.is_sketch(u) && self.is_sketch(v);
                if !stored && !both_sketch || self.degree[u as usize] == 0 || self.degree[v as usize] == 0 {
                    return Err(Error::MalformedUpdate(format!("delete of absent edge {e}")));
                }
                self.degree[u as usize] -= 1;
                self.degree[v as usize] -= 1;
            }
        }
        self.incident[u as usize] += 1;
        self.incident[v as usize] += 1;
        for x in [u, v] {
            match upd.kind {
                UpdateKind::Insert if !self.is_sketch(x) && self.degree[x as usize] > self.config.delta => {
                    self.promote(x);
                }
                UpdateKind::Delete if self.is_sketch(x) && self.degree[x as usize] <= self.config.demote_at() => {
                    // A failed recovery leaves x heavy; the next deletion retries.
                    let _ = self.demote(x);
                }
                _ => {}
            }
        }
        match upd.kind {
            UpdateKind::Insert => self.store(e),
            UpdateKind::Delete => self.unstore(e),
        }
        Ok(())
    }

    fn explicitly_stored(&self, e: Edge) -> bool {
        [(e.u(), e.v()), (e.v(), e.u())]
            .iter()
            .any(|&(a, b)| matches!(&self.form[a as usize], Form::Explicit(s) if s.contains(&b)))
    }

    fn new_sketch(&self) -> Form {
        Form::Sketch {
            matrix: SketchMatrix::new(self.config.seed, self.config.columns as usize, self.universe),
            recovery: NeighborIblt::new(IbltConfig {
                recovery_size: self.config.demote_at(),
                vertices: self.config.vertices,
                seed: self.config.seed ^ 0x1b17,
            }),
        }
    }

    fn toggle_sketch(&mut self, x: VertexId, other: VertexId, j: u64) {
        if let Form::Sketch { matrix, recovery } = &mut self.form[x as usize] {
            matrix.update(crate::edge::CoordinateId(j));
            recovery.toggle(other);
        }
    }

    fn toggle_both(&mut self, e: Edge) {
        let j = encode(e, self.config.vertices).0;
        self.toggle_sketch(e.u(), e.v(), j);
        self.toggle_sketch(e.v(), e.u(), j);
    }

    fn store(&mut self, e: Edge) {
        let (u, v) = (e.u(), e.v());
        match (self.is_sketch(u), self.is_sketch(v)) {
            (true, true) => self.toggle_both(e),
            (false, _) => {
                self.explicit_mut(u).insert(v);
            }
            (true, false) => {
                self.explicit_mut(v).insert(u);
            }
        }
    }

    fn unstore(&mut self, e: Edge) {
        let (u, v) = (e.u(), e.v());
        if self.is_sketch(u) && self.is_sketch(v) {
            self.toggle_both(e);
            return;
        }
        let removed = !self.is_sketch(u) && self.explicit_mut(u).remove(&v);
        if !removed {
            let gone = self.explicit_mut(v).remove(&u);
            debug_assert!(gone);
        }
    }

    fn explicit_mut(&mut self, x: VertexId) -> &mut BTreeSet<VertexId> {
        match &mut self.form[x as usize] {
            Form::Explicit(s) => s,
            Form::Sketch { .. } => unreachable!("vertex {x} is in sketch form"),
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

    /// Converts an explicit vertex to sketch form.
    pub fn promote(&mut self, v: VertexId) {
        let sketch = self.new_sketch();
        let Form::Explicit(set) = std::mem::replace(&mut self.form[v as usize], sketch) else {
            return;
        };
        for w in set {
            let e = Edge::new(v, w).unwrap();
            if self.is_sketch(w) {
                self.toggle_both(e);
            } else {
                self.explicit_mut(w).insert(v);
            }
        }
        self.stats.promotions += 1;
        self.note_transition(v);
    }

    /// Converts a sketch-form vertex back to an explicit set. On recovery
    /// failure nothing changes.
    pub fn demote(&mut self, v: VertexId) -> Result<()> {
        let recovered = match &self.form[v as usize] {
            Form::Sketch { recovery, .. } => recovery.recover(),
            Form::Explicit(_) => return Ok(()),
        };
        let neighbors = match recovered {
            Ok(s) if s.iter().all(|&w| w != v && self.is_sketch(w)) => s,
            Ok(_) | Err(_) => {
                self.stats.aborted_demotions += 1;
                return Err(Error::RecoveryFailed);
            }
        };
        for &w in &neighbors {
            let j = encode(Edge::new(v, w).unwrap(), self.config.vertices).0;
            self.toggle_sketch(w, v, j);
        }
        self.form[v as usize] = Form::Explicit(neighbors);
        self.stats.demotions += 1;
        self.note_transition(v);
        Ok(())
    }

    /// Checks the storage rule against the true edge set: every edge with an
    /// explicit endpoint sits in exactly one explicit set, and each
    /// sketch-form vertex's IBLT encodes exactly its sketch-form neighbors.
    pub fn audit(&self, edges: &[Edge]) -> std::result::Result<(), String> {
        let mut expected_entries = 0usize;
        let mut sketch_nbrs: std::collections::BTreeMap<VertexId, BTreeSet<VertexId>> = Default::default();
        for &e in edges {
            let (u, v) = (e.u(), e.v());
            if self.is_sketch(u) && self.is_sketch(v) {
                sketch_nbrs.entry(u).or_default().insert(v);
                sketch_nbrs.entry(v).or_default().insert(u);
                continue;
            }
            expected_entries += 1;
            let in_u = self.explicit_set(u).is_some_and(|s| s.contains(&v));
            let in_v = self.explicit_set(v).is_some_and(|s| s.contains(&u));
            if in_u == in_v {
                return Err(format!("edge {e} stored {} times", in_u as u8 * 2));
            }
        }
        let entries: usize = self.form.iter().map(|f| if let Form::Explicit(s) = f { s.len() } else { 0 }).sum();
        if entries != expected_entries {
            return Err(format!("{entries} explicit entries for {expected_entries} edges"));
        }
        for (x, f) in self.form.iter().enumerate() {
            if let Form::Sketch { recovery, .. } = f {
                let mut fresh = NeighborIblt::new(*recovery.config());
                for u in sketch_nbrs.remove(&(x as u32)).unwrap_or_default() {
                    fresh.insert(u);
                }
                if fresh.to_bytes() != recovery.to_bytes() {
                    return Err(format!("IBLT of {x} out of sync"));
                }
            }
        }
        Ok(())
    }

    /// End-of-stream spanning forest. Works on copies; `self` is unchanged.
    pub fn query(&self) -> SpanningForest {
        let n = self.config.vertices as usize;
        let mut dsu = Dsu::new(n);
        let mut edges = Vec::new();
        for (x, f) in self.form.iter().enumerate() {
            if let Form::Explicit(set) = f {
                for &w in set {
                    if dsu.union(x as u32, w) {
                        edges.push(Edge::new(x as u32, w).unwrap());
                    }
                }
            }
        }
        let mut merged: Vec<Option<SketchMatrix>> = vec![None; n];
        for (x, f) in self.form.iter().enumerate() {
            if let Form::Sketch { matrix, .. } = f {
                let r = dsu.find(x as u32) as usize;
                match &mut merged[r] {
                    Some(m) => m.merge(matrix).expect("shared seeds"),
                    slot @ None => *slot = Some(matrix.clone()),
                }
            }
        }
        for round in 0..self.config.columns as usize {
            if dsu.count == 1 {
                break;
            }
            let mut picks = Vec::new();
            let mut all_empty = true;
            for r in 0..n {
                let Some(m) = &merged[r] else { continue };
                if dsu.find(r as u32) != r as u32 {
                    continue;
                }
                match m.column(round).sample() {
                    Sample::EmptyVec => {}
                    Sample::Fail => all_empty = false,
                    Sample::Good(j) => {
                        all_empty = false;
                        if let Ok(e) = decode_edge(j, self.config.vertices) {
                            picks.push(e);
                        }
                    }
                }
            }
            if all_empty {
                break;
            }
            for e in picks {
                let (a, b) = (dsu.find(e.u()), dsu.find(e.v()));
                if a == b {
                    continue;
                }
                dsu.union(a, b);
                edges.push(e);
                let root = dsu.find(a) as usize;
                let other = if root == a as usize { b as usize } else { a as usize };
                let moved = merged[other].take();
                match (&mut merged[root], moved) {
                    (Some(m), Some(o)) => m.merge(&o).expect("shared seeds"),
                    (slot @ None, Some(o)) => *slot = Some(o),
                    _ => {}
                }
            }
        }
        edges.sort_unstable();
        let mut min_of = vec![u32::MAX; n];
        for x in 0..n as u32 {
            let r = dsu.find(x) as usize;
            min_of[r] = min_of[r].min(x);
        }
        let labels = (0..n as u32).map(|x| min_of[dsu.find(x) as usize]).collect();
        SpanningForest { edges, labels }
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct Dsu {
    parent: Vec<u32>,
    size: Vec<u32>,
    pub count: usize,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu { parent: (0..n as u32).collect(), size: vec![1; n], count: n }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = self.parent[x as usize];
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
        self.count -= 1;
        true
    }
}
