//! Sketch-based dynamic connectivity over tiers of cutsets.
//!
//! Forest levels run `0..=T`: levels `0..T` are cutset tiers whose Euler-tour
//! forests carry BalloonSketch aggregates, level `T` is the top forest. An
//! edge of weight `w` belongs to levels `w..=T`.

use std::collections::BTreeSet;

use crate::edge::{decode_edge, encode, pair_universe, Edge, VertexId};
use crate::error::{Error, Result};
use crate::forest::{Augment, EulerForest, ForestDelta, ForestEvent, TopWeightForest};
use crate::hash::derive_seed;
use crate::sketch::{ceil_log2, column_seeds, ColumnParams, Sample, SketchBucket};

/// Subtree XOR of leaf columns, kept trimmed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SketchAgg(pub Vec<SketchBucket>);

impl Augment for SketchAgg {
    fn combine_into(out: &mut Self, l: Option<&Self>, m: &Self, r: Option<&Self>) {
        let out = &mut out.0;
        out.clear();
        out.extend_from_slice(&m.0);
        for side in [l, r].into_iter().flatten() {
            if side.0.len() > out.len() {
                out.resize(side.0.len(), SketchBucket::EMPTY);
            }
            for (d, s) in out.iter_mut().zip(&side.0) {
                d.xor_assign(s);
            }
        }
        let keep = out.iter().rposition(|b| !b.is_empty()).map_or(0, |d| d + 1);
        out.truncate(keep);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchDcConfig {
    pub vertices: u32,
    /// Number of sketch tiers; 0 selects `⌈log2 V⌉`.
    pub tiers: u32,
    pub seed: u64,
}

impl SketchDcConfig {
    pub fn new(vertices: u32, seed: u64) -> Self {
        SketchDcConfig { vertices, tiers: 0, seed }
    }

    pub fn tier_count(&self) -> u32 {
        if self.tiers > 0 {
            self.tiers
        } else {
            ceil_log2(self.vertices as u64).max(1)
        }
    }
}

#[derive(Debug, Clone)]
struct Tier {
    params: ColumnParams,
    forest: EulerForest<SketchAgg>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TierSpace {
    pub buckets: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SketchDcSpace {
    pub tiers: Vec<TierSpace>,
    pub top_nodes: usize,
    pub weight_nodes: usize,
    pub active_vertices: usize,
}

impl SketchDcSpace {
    pub fn buckets(&self) -> usize {
        self.tiers.iter().map(|t| t.buckets).sum()
    }
    pub fn tier_nodes(&self) -> usize {
        self.tiers.iter().map(|t| t.nodes).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbAudit {
    /// Tier 0 has no forest edges.
    pub invariant1: bool,
    /// Every level's forest is contained in the next.
    pub nested: bool,
    /// Successful tier queries whose component is not properly contained above.
    pub invariant3_violations: usize,
    pub aggregates_consistent: bool,
    /// The weighted top forest matches the top level and the tier memberships.
    pub top_mirror: bool,
}

impl GibbAudit {
    pub fn ok(&self) -> bool {
        self.invariant1 && self.nested && self.invariant3_violations == 0 && self.aggregates_consistent && self.top_mirror
    }
}

#[derive(Debug, Clone)]
pub struct SketchDc {
    vertices: u32,
    tiers: Vec<Tier>,
    top: EulerForest<()>,
    weights: TopWeightForest,
    degree: Vec<u32>,
    active: Vec<bool>,
    active_count: usize,
    /// Pending components to re-examine, per tier, in insertion order.
    affected: Vec<Vec<VertexId>>,
    events: ForestDelta,
}

impl SketchDc {
    pub fn new(config: SketchDcConfig) -> Self {
        let vertices = config.vertices;
        let universe = pair_universe(vertices);
        let t = config.tier_count() as usize;
        let tiers = column_seeds(config.seed, t)
            .into_iter()
            .enumerate()
            .map(|(i, s)| Tier {
                params: ColumnParams::new(s, universe),
                forest: EulerForest::new(vertices, derive_seed(config.seed ^ 0xe7, i as u64)),
            })
            .collect();
        SketchDc {
            vertices,
            tiers,
            top: EulerForest::new(vertices, derive_seed(config.seed ^ 0xe7, t as u64)),
            weights: TopWeightForest::new(vertices),
            degree: vec![0; vertices as usize],
            active: vec![false; vertices as usize],
            active_count: 0,
            affected: vec![Vec::new(); t],
            events: Vec::new(),
        }
    }

    pub fn vertices(&self) -> u32 {
        self.vertices
    }

    pub fn tier_count(&self) -> usize {
        self.tiers.len()
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    pub fn is_active(&self, v: VertexId) -> bool {
        self.active.get(v as usize).copied().unwrap_or(false)
    }

    pub fn degree(&self, v: VertexId) -> u32 {
        self.degree[v as usize]
    }

    pub fn insert_vertex(&mut self, v: VertexId) -> Result<()> {
        if v >= self.vertices {
            return Err(Error::VertexOutOfRange { vertex: v, capacity: self.vertices });
        }
        if self.active[v as usize] {
            return Err(Error::VertexAlreadyActive(v));
        }
        for t in &mut self.tiers {
            t.forest.add_vertex(v, SketchAgg::default());
        }
        self.top.add_vertex(v, ());
        self.active[v as usize] = true;
        self.active_count += 1;
        Ok(())
    }

    pub fn delete_vertex(&mut self, v: VertexId) -> Result<()> {
        if !self.is_active(v) {
            return Err(Error::InactiveVertex(v));
        }
        if self.degree[v as usize] != 0 {
            return Err(Error::NonZeroDegree { vertex: v, degree: self.degree[v as usize] });
        }
        for t in &mut self.tiers {
            let leaf = t.forest.remove_vertex(v);
            debug_assert!(leaf.0.is_empty());
        }
        self.top.remove_vertex(v);
        self.active[v as usize] = false;
        self.active_count -= 1;
        Ok(())
    }

    pub fn connected(&self, u: VertexId, v: VertexId) -> bool {
        u == v || (self.is_active(u) && self.is_active(v) && self.top.connected(u, v))
    }

    pub fn is_forest_edge(&self, e: Edge) -> bool {
        self.top.has_edge(e)
    }

    /// Top forest edges in ascending order.
    pub fn forest_edges(&self) -> Vec<Edge> {
        self.top.edges()
    }

    /// Lowest level containing a top forest edge.
    pub fn edge_weight(&self, e: Edge) -> Option<u8> {
        self.weights.weight(e)
    }

    /// Highest weight currently in the top forest (0 when empty).
    pub fn max_weight(&self) -> u8 {
        self.weights.weighted_edges().iter().map(|&(_, w)| w).max().unwrap_or(0)
    }

    /// The leaf column of `v` at tier `i`.
    pub fn leaf(&self, i: usize, v: VertexId) -> &[SketchBucket] {
        &self.tiers[i].forest.value(v).0
    }

    pub fn insert_edge(&mut self, e: Edge) -> Result<ForestDelta> {
        self.check_edge(e)?;
        self.degree[e.u() as usize] += 1;
        self.degree[e.v() as usize] += 1;
        Ok(self.toggle_and_repair(e))
    }

    /// Deletes `e`, which the caller guarantees is present.
    pub fn delete_edge(&mut self, e: Edge) -> Result<ForestDelta> {
        self.check_edge(e)?;
        if self.degree[e.u() as usize] == 0 || self.degree[e.v() as usize] == 0 {
            return Err(Error::MissingEdge(e));
        }
        if self.top.has_edge(e) {
            return self.delete_forest_edge(e);
        }
        self.degree[e.u() as usize] -= 1;
        self.degree[e.v() as usize] -= 1;
        Ok(self.toggle_and_repair(e))
    }

    /// Deletes an edge of the top forest: cut from every level it occupies,
    /// then toggle and repair.
    pub fn delete_forest_edge(&mut self, e: Edge) -> Result<ForestDelta> {
        self.check_edge(e)?;
        let w = self.weights.weight(e).ok_or(Error::NotForestEdge(e))?;
        self.events.clear();
        self.cut_from(e, w as usize);
        self.degree[e.u() as usize] -= 1;
        self.degree[e.v() as usize] -= 1;
        let mut delta = std::mem::take(&mut self.events);
        delta.extend(self.toggle_and_repair(e));
        Ok(delta)
    }

    fn check_edge(&self, e: Edge) -> Result<()> {
        for x in [e.u(), e.v()] {
            if x >= self.vertices {
                return Err(Error::VertexOutOfRange { vertex: x, capacity: self.vertices });
            }
            if !self.active[x as usize] {
                return Err(Error::InactiveVertex(x));
            }
        }
        Ok(())
    }

    fn toggle_and_repair(&mut self, e: Edge) -> ForestDelta {
        self.events.clear();
        let j = encode(e, self.vertices).0;
        for t in &mut self.tiers {
            let params = t.params;
            for x in [e.u(), e.v()] {
                t.forest.apply_linear(x, |a| {
                    params.update_buckets(&mut a.0, j);
                });
            }
        }
        for i in 0..self.tiers.len() {
            self.affected[i].push(e.u());
            self.affected[i].push(e.v());
        }
        self.repair();
        std::mem::take(&mut self.events)
    }

    fn level_connected(&self, level: usize, a: VertexId, b: VertexId) -> bool {
        if level < self.tiers.len() {
            self.tiers[level].forest.connected(a, b)
        } else {
            self.top.connected(a, b)
        }
    }

    fn level_size(&self, level: usize, a: VertexId) -> u32 {
        if level < self.tiers.len() {
            self.tiers[level].forest.component_size(a)
        } else {
            self.top.component_size(a)
        }
    }

    fn mark(&mut self, from_tier: usize, x: VertexId) {
        for i in from_tier..self.tiers.len() {
            self.affected[i].push(x);
        }
    }

    /// Removes top forest edge `e` (weight `w`) from levels `w..=T`.
    fn cut_from(&mut self, e: Edge, w: usize) {
        let from = w.min(self.tiers.len());
        for t in &mut self.tiers[from..] {
            t.forest.cut(e);
        }
        self.top.cut(e);
        self.weights.cut(e);
        self.events.push(ForestEvent::Remove(e));
        let from = w.saturating_sub(1);
        self.mark(from, e.u());
        self.mark(from, e.v());
    }

    /// Outgoing edge sampled from the tier-`i` component of `v`, oriented
    /// `(inside, outside)`. Rejects samples that cannot be cut edges.
    fn query(&self, i: usize, v: VertexId) -> Option<(VertexId, VertexId)> {
        let t = &self.tiers[i];
        let j = match t.params.sample_buckets(&t.forest.component_agg(v).0) {
            Sample::Good(j) => j,
            _ => return None,
        };
        let e = decode_edge(j, self.vertices).ok()?;
        if !self.is_active(e.u()) || !self.is_active(e.v()) {
            return None;
        }
        let root = t.forest.tree_of(v);
        match (t.forest.tree_of(e.u()) == root, t.forest.tree_of(e.v()) == root) {
            (true, false) => Some((e.u(), e.v())),
            (false, true) => Some((e.v(), e.u())),
            _ => None,
        }
    }

    /// Bottom-up sweep restoring invariant 3 for every marked component.
    fn repair(&mut self) {
        for i in 0..self.tiers.len() {
            let pending = std::mem::take(&mut self.affected[i]);
            let mut seen: BTreeSet<u32> = BTreeSet::new();
            for v in pending {
                if !self.is_active(v) {
                    continue;
                }
                // Links and cuts issued below only touch levels above `i`,
                // so tier-`i` roots stay valid for the whole sweep.
                if !seen.insert(self.tiers[i].forest.tree_of(v)) {
                    continue;
                }
                let Some((a, b)) = self.query(i, v) else {
                    continue;
                };
                if self.level_size(i + 1, a) > self.tiers[i].forest.component_size(a) {
                    continue;
                }
                self.link_from(i + 1, a, b);
            }
        }
    }

    /// Links `(a, b)` at levels `w..=T`, first breaking any top-level cycle
    /// at its maximum-weight edge.
    fn link_from(&mut self, w: usize, a: VertexId, b: VertexId) {
        let e = Edge::new(a, b).unwrap();
        if self.top.connected(a, b) {
            let (f, wf) = self.weights.path_max(a, b).expect("connected endpoints have a path");
            debug_assert!(wf as usize > w);
            self.cut_from(f, wf as usize);
        }
        debug_assert!(!self.level_connected(w, a, b));
        let from = w.min(self.tiers.len());
        for t in &mut self.tiers[from..] {
            t.forest.link(e);
        }
        self.top.link(e);
        self.weights.link(e, w as u8);
        self.events.push(ForestEvent::Add(e));
        self.mark(w, a);
    }

    /// Full structural audit. Intended for small instances.
    pub fn audit(&self) -> GibbAudit {
        let t = self.tiers.len();
        let invariant1 = self.tiers.first().is_none_or(|t0| t0.forest.edge_count() == 0);
        let mut nested = true;
        for i in 0..t {
            let upper: BTreeSet<Edge> =
                if i + 1 < t { self.tiers[i + 1].forest.edges() } else { self.top.edges() }.into_iter().collect();
            if self.tiers[i].forest.edges().iter().any(|e| !upper.contains(e)) {
                nested = false;
            }
        }
        let mut invariant3_violations = 0;
        for i in 0..t {
            let mut seen = BTreeSet::new();
            for v in 0..self.vertices {
                if !self.is_active(v) || !seen.insert(self.tiers[i].forest.tree_of(v)) {
                    continue;
                }
                if let Some((a, _)) = self.query(i, v) {
                    if self.level_size(i + 1, a) <= self.tiers[i].forest.component_size(a) {
                        invariant3_violations += 1;
                    }
                }
            }
        }
        let aggregates_consistent = self.tiers.iter().all(|t| t.forest.aggregates_consistent());
        let weighted = self.weights.weighted_edges();
        let mut top_mirror = weighted.iter().map(|&(e, _)| e).eq(self.top.edges());
        for &(e, w) in &weighted {
            for (i, tier) in self.tiers.iter().enumerate() {
                if tier.forest.has_edge(e) != (i >= w as usize) {
                    top_mirror = false;
                }
            }
        }
        GibbAudit { invariant1, nested, invariant3_violations, aggregates_consistent, top_mirror }
    }

    /// Recomputes every vertex leaf from an explicit edge list and compares.
    pub fn leaves_match(&self, edges: &[Edge]) -> bool {
        self.tiers.iter().all(|t| {
            let mut leaves: Vec<Vec<SketchBucket>> = vec![Vec::new(); self.vertices as usize];
            for &e in edges {
                let j = encode(e, self.vertices).0;
                t.params.update_buckets(&mut leaves[e.u() as usize], j);
                t.params.update_buckets(&mut leaves[e.v() as usize], j);
            }
            (0..self.vertices).filter(|&v| self.is_active(v)).all(|v| t.forest.value(v).0 == leaves[v as usize])
        })
    }

    pub fn space(&self) -> SketchDcSpace {
        let tiers = self
            .tiers
            .iter()
            .map(|t| {
                let mut buckets = 0;
                t.forest.for_each_node(|_, value, agg| buckets += value.0.len() + agg.0.len());
                TierSpace { buckets, nodes: t.forest.node_count() }
            })
            .collect();
        SketchDcSpace {
            tiers,
            top_nodes: self.top.node_count(),
            weight_nodes: self.active_count + self.weights.edge_count(),
            active_vertices: self.active_count,
        }
    }
}
