//! Lossless dynamic connectivity with leveled Euler-tour forests (HDT).

use std::collections::BTreeSet;

use rustc_hash::FxHashMap;

use crate::edge::{Edge, VertexId};
use crate::error::{Error, Result};
use crate::forest::{Augment, EulerForest, ForestDelta, ForestEvent};
use crate::hash::derive_seed;
use crate::sketch::ceil_log2;

/// Per-vertex flags: has tree / non-tree edges at this exact level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct LevelFlags {
    tree: bool,
    nontree: bool,
}

impl Augment for LevelFlags {
    fn combine_into(out: &mut Self, l: Option<&Self>, m: &Self, r: Option<&Self>) {
        let l = l.copied().unwrap_or_default();
        let r = r.copied().unwrap_or_default();
        out.tree = l.tree | m.tree | r.tree;
        out.nontree = l.nontree | m.nontree | r.nontree;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct EdgeInfo {
    level: u8,
    tree: bool,
}

type LevelAdj = FxHashMap<VertexId, BTreeSet<VertexId>>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LosslessSpace {
    pub edges: usize,
    pub forest_nodes: usize,
    pub levels: usize,
}

#[derive(Debug, Clone)]
pub struct LosslessGraph {
    vertices: u32,
    max_level: u8,
    adjacency: Vec<BTreeSet<VertexId>>,
    edges: FxHashMap<Edge, EdgeInfo>,
    forests: Vec<EulerForest<LevelFlags>>,
    tree_adj: Vec<LevelAdj>,
    nontree_adj: Vec<LevelAdj>,
}

impl LosslessGraph {
    pub fn new(vertices: u32) -> Self {
        let max_level = ceil_log2(vertices as u64) as u8;
        let levels = max_level as usize + 1;
        let mut forests: Vec<EulerForest<LevelFlags>> =
            (0..levels).map(|i| EulerForest::new(vertices, derive_seed(0x4d7, i as u64))).collect();
        for v in 0..vertices {
            forests[0].add_vertex(v, LevelFlags::default());
        }
        LosslessGraph {
            vertices,
            max_level,
            adjacency: vec![BTreeSet::new(); vertices as usize],
            edges: FxHashMap::default(),
            forests,
            tree_adj: vec![LevelAdj::default(); levels],
            nontree_adj: vec![LevelAdj::default(); levels],
        }
    }

    pub fn vertices(&self) -> u32 {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn max_level(&self) -> u8 {
        self.max_level
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.contains_key(&e)
    }

    pub fn is_tree_edge(&self, e: Edge) -> bool {
        self.edges.get(&e).is_some_and(|i| i.tree)
    }

    pub fn edge_level(&self, e: Edge) -> Option<u8> {
        self.edges.get(&e).map(|i| i.level)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v as usize].len()
    }

    /// Edges incident to `v`, ascending by neighbor.
    pub fn incident_edges(&self, v: VertexId) -> Vec<Edge> {
        self.adjacency[v as usize].iter().map(|&w| Edge::new(v, w).unwrap()).collect()
    }

    pub fn neighbors(&self, v: VertexId) -> &BTreeSet<VertexId> {
        &self.adjacency[v as usize]
    }

    pub fn connected(&self, u: VertexId, v: VertexId) -> bool {
        u == v || self.forests[0].connected(u, v)
    }

    /// Spanning-forest edges in ascending order.
    pub fn forest_edges(&self) -> Vec<Edge> {
        self.forests[0].edges()
    }

    /// All stored edges in ascending order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.edges.keys().copied().collect();
        out.sort_unstable();
        out
    }

    /// Minimum vertex id of each vertex's component.
    pub fn component_labels(&self) -> Vec<VertexId> {
        let mut min_of: FxHashMap<u32, VertexId> = FxHashMap::default();
        let trees: Vec<u32> = (0..self.vertices).map(|v| self.forests[0].tree_of(v)).collect();
        for (v, &t) in trees.iter().enumerate() {
            min_of.entry(t).or_insert(v as VertexId);
        }
        trees.iter().map(|t| min_of[t]).collect()
    }

    pub fn space(&self) -> LosslessSpace {
        LosslessSpace {
            edges: self.edges.len(),
            forest_nodes: self.forests.iter().map(EulerForest::node_count).sum(),
            levels: self.forests.len(),
        }
    }

    fn check(&self, e: Edge) -> Result<()> {
        if e.v() >= self.vertices {
            return Err(Error::VertexOutOfRange { vertex: e.v(), capacity: self.vertices });
        }
        Ok(())
    }

    pub fn insert_edge(&mut self, e: Edge) -> Result<ForestDelta> {
        self.check(e)?;
        if self.edges.contains_key(&e) {
            return Err(Error::DuplicateEdge(e));
        }
        self.adjacency[e.u() as usize].insert(e.v());
        self.adjacency[e.v() as usize].insert(e.u());
        if self.forests[0].connected(e.u(), e.v()) {
            self.edges.insert(e, EdgeInfo { level: 0, tree: false });
            self.add_adj(false, 0, e);
            Ok(Vec::new())
        } else {
            self.edges.insert(e, EdgeInfo { level: 0, tree: true });
            self.add_adj(true, 0, e);
            self.forests[0].link(e);
            Ok(vec![ForestEvent::Add(e)])
        }
    }

    pub fn delete_edge(&mut self, e: Edge) -> Result<ForestDelta> {
        self.check(e)?;
        let info = self.edges.remove(&e).ok_or(Error::MissingEdge(e))?;
        self.adjacency[e.u() as usize].remove(&e.v());
        self.adjacency[e.v() as usize].remove(&e.u());
        let level = info.level as usize;
        self.remove_adj(info.tree, level, e);
        if !info.tree {
            return Ok(Vec::new());
        }
        for i in 0..=level {
            self.forests[i].cut(e);
        }
        let mut delta = vec![ForestEvent::Remove(e)];
        for i in (0..=level).rev() {
            if let Some(f) = self.replace(i, e) {
                delta.push(ForestEvent::Add(f));
                break;
            }
        }
        for i in 1..=level {
            self.drop_if_isolated(i, e.u());
            self.drop_if_isolated(i, e.v());
        }
        Ok(delta)
    }

    /// Searches level `i` for a replacement of the cut tree edge `e`.
    fn replace(&mut self, i: usize, e: Edge) -> Option<Edge> {
        let (su, sv) = (self.forests[i].component_size(e.u()), self.forests[i].component_size(e.v()));
        let small = if su <= sv { e.u() } else { e.v() };
        // Raise the smaller tree's level-i tree edges.
        while let Some(x) = self.forests[i].find_vertex(small, |a| a.tree) {
            let ys: Vec<VertexId> = self.tree_adj[i][&x].iter().copied().collect();
            for y in ys {
                let f = Edge::new(x, y).unwrap();
                self.remove_adj(true, i, f);
                self.add_adj(true, i + 1, f);
                self.edges.get_mut(&f).unwrap().level = (i + 1) as u8;
                self.ensure_vertex(i + 1, x);
                self.ensure_vertex(i + 1, y);
                self.forests[i + 1].link(f);
            }
        }
        while let Some(x) = self.forests[i].find_vertex(small, |a| a.nontree) {
            loop {
                let Some(&y) = self.nontree_adj[i].get(&x).and_then(|s| s.first()) else {
                    break;
                };
                let f = Edge::new(x, y).unwrap();
                self.remove_adj(false, i, f);
                if self.forests[i].connected(x, y) {
                    debug_assert!(i < self.max_level as usize);
                    self.add_adj(false, i + 1, f);
                    self.edges.get_mut(&f).unwrap().level = (i + 1) as u8;
                } else {
                    self.add_adj(true, i, f);
                    self.edges.get_mut(&f).unwrap().tree = true;
                    for j in 0..=i {
                        self.ensure_vertex(j, x);
                        self.ensure_vertex(j, y);
                        self.forests[j].link(f);
                    }
                    return Some(f);
                }
            }
        }
        None
    }

    fn ensure_vertex(&mut self, level: usize, v: VertexId) {
        if !self.forests[level].contains_vertex(v) {
            let flags = self.flags(level, v);
            self.forests[level].add_vertex(v, flags);
        }
    }

    fn drop_if_isolated(&mut self, level: usize, v: VertexId) {
        let f = &self.forests[level];
        if f.contains_vertex(v) && f.component_size(v) == 1 && f.value(v) == &LevelFlags::default() {
            self.forests[level].remove_vertex(v);
        }
    }

    fn flags(&self, level: usize, v: VertexId) -> LevelFlags {
        LevelFlags {
            tree: self.tree_adj[level].get(&v).is_some_and(|s| !s.is_empty()),
            nontree: self.nontree_adj[level].get(&v).is_some_and(|s| !s.is_empty()),
        }
    }

    fn refresh(&mut self, level: usize, v: VertexId) {
        let flags = self.flags(level, v);
        if !self.forests[level].contains_vertex(v) {
            if flags != LevelFlags::default() {
                self.forests[level].add_vertex(v, flags);
            }
            return;
        }
        if *self.forests[level].value(v) != flags {
            self.forests[level].modify_value(v, |a| *a = flags);
        }
    }

    fn add_adj(&mut self, tree: bool, level: usize, e: Edge) {
        let adj = if tree { &mut self.tree_adj[level] } else { &mut self.nontree_adj[level] };
        adj.entry(e.u()).or_default().insert(e.v());
        adj.entry(e.v()).or_default().insert(e.u());
        self.refresh(level, e.u());
        self.refresh(level, e.v());
    }

    fn remove_adj(&mut self, tree: bool, level: usize, e: Edge) {
        let adj = if tree { &mut self.tree_adj[level] } else { &mut self.nontree_adj[level] };
        for (a, b) in [(e.u(), e.v()), (e.v(), e.u())] {
            if let Some(s) = adj.get_mut(&a) {
                s.remove(&b);
                if s.is_empty() {
                    adj.remove(&a);
                }
            }
        }
        self.refresh(level, e.u());
        self.refresh(level, e.v());
    }

    /// Checks internal invariants; intended for tests and audits.
    pub fn audit(&self) -> std::result::Result<(), String> {
        for (&e, info) in &self.edges {
            if info.level > self.max_level {
                return Err(format!("edge {e} at level {} above cap", info.level));
            }
            if !self.adjacency[e.u() as usize].contains(&e.v()) {
                return Err(format!("edge {e} missing from adjacency"));
            }
            for j in 0..=self.max_level as usize {
                let in_forest = self.forests[j].has_edge(e);
                let expect = info.tree && j <= info.level as usize;
                if in_forest != expect {
                    return Err(format!("edge {e} presence at level {j} is {in_forest}"));
                }
            }
            if !info.tree && !self.forests[info.level as usize].connected(e.u(), e.v()) {
                return Err(format!("non-tree edge {e} spans two level-{} trees", info.level));
            }
        }
        let adj_edges: usize = self.adjacency.iter().map(BTreeSet::len).sum();
        if adj_edges != 2 * self.edges.len() {
            return Err("adjacency and edge map disagree".into());
        }
        for (i, f) in self.forests.iter().enumerate() {
            if !f.aggregates_consistent() {
                return Err(format!("level {i} aggregates stale"));
            }
        }
        Ok(())
    }
}
