//! Link-cut tree over weighted edges with path-maximum queries.
//!
//! Edges are materialized as nodes between their endpoints, so a path
//! aggregate over nodes is a path aggregate over edges.

use rustc_hash::FxHashMap;

use crate::edge::{Edge, VertexId};

use super::euler::NIL;

#[derive(Debug, Clone)]
struct Node {
    ch: [u32; 2],
    parent: u32,
    rev: bool,
    /// Edge weight, `None` for vertex nodes.
    weight: Option<u8>,
    /// Node of maximum weight in the splay subtree, `NIL` if none.
    best: u32,
    edge: Option<Edge>,
}

impl Node {
    fn vertex() -> Self {
        Node { ch: [NIL; 2], parent: NIL, rev: false, weight: None, best: NIL, edge: None }
    }
}

/// A forest whose edges carry small integer weights.
#[derive(Debug, Clone)]
pub struct TopWeightForest {
    nodes: Vec<Node>,
    free: Vec<u32>,
    edges: FxHashMap<Edge, u32>,
    capacity: u32,
}

impl TopWeightForest {
    pub fn new(capacity: u32) -> Self {
        TopWeightForest {
            nodes: (0..capacity).map(|_| Node::vertex()).collect(),
            free: Vec::new(),
            edges: FxHashMap::default(),
            capacity,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertex nodes plus one node per edge.
    pub fn node_count(&self) -> usize {
        self.capacity as usize + self.edges.len()
    }

    pub fn weight(&self, e: Edge) -> Option<u8> {
        self.edges.get(&e).and_then(|&n| self.nodes[n as usize].weight)
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.contains_key(&e)
    }

    /// Edges with weights, ascending by edge.
    pub fn weighted_edges(&self) -> Vec<(Edge, u8)> {
        let mut out: Vec<(Edge, u8)> =
            self.edges.iter().map(|(&e, &n)| (e, self.nodes[n as usize].weight.unwrap())).collect();
        out.sort_unstable();
        out
    }

    pub fn connected(&mut self, u: VertexId, v: VertexId) -> bool {
        u == v || self.find_root(u) == self.find_root(v)
    }

    pub fn link(&mut self, e: Edge, weight: u8) {
        debug_assert!(!self.connected(e.u(), e.v()));
        let n = match self.free.pop() {
            Some(i) => i,
            None => {
                self.nodes.push(Node::vertex());
                (self.nodes.len() - 1) as u32
            }
        };
        self.nodes[n as usize] = Node { weight: Some(weight), best: n, edge: Some(e), ..Node::vertex() };
        self.edges.insert(e, n);
        self.link_nodes(e.u(), n);
        self.link_nodes(n, e.v());
    }

    pub fn cut(&mut self, e: Edge) -> bool {
        let Some(n) = self.edges.remove(&e) else {
            return false;
        };
        self.cut_nodes(e.u(), n);
        self.cut_nodes(n, e.v());
        self.nodes[n as usize] = Node::vertex();
        self.free.push(n);
        true
    }

    /// The maximum-weight edge on the tree path between `u` and `v`.
    pub fn path_max(&mut self, u: VertexId, v: VertexId) -> Option<(Edge, u8)> {
        if u == v || !self.connected(u, v) {
            return None;
        }
        self.make_root(u);
        self.access(v);
        self.splay(v);
        let b = self.nodes[v as usize].best;
        (b != NIL).then(|| (self.nodes[b as usize].edge.unwrap(), self.nodes[b as usize].weight.unwrap()))
    }

    fn is_root(&self, x: u32) -> bool {
        let p = self.nodes[x as usize].parent;
        p == NIL || (self.nodes[p as usize].ch[0] != x && self.nodes[p as usize].ch[1] != x)
    }

    fn push(&mut self, x: u32) {
        if self.nodes[x as usize].rev {
            self.nodes[x as usize].rev = false;
            self.nodes[x as usize].ch.swap(0, 1);
            for c in self.nodes[x as usize].ch {
                if c != NIL {
                    self.nodes[c as usize].rev ^= true;
                }
            }
        }
    }

    fn heavier(&self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        // Ties go to the smaller edge so choices are deterministic.
        let (wa, wb) = (self.nodes[a as usize].weight, self.nodes[b as usize].weight);
        if wa > wb || (wa == wb && self.nodes[a as usize].edge < self.nodes[b as usize].edge) {
            a
        } else {
            b
        }
    }

    fn pull(&mut self, x: u32) {
        let n = &self.nodes[x as usize];
        let own = if n.weight.is_some() { x } else { NIL };
        let [l, r] = n.ch;
        let lb = if l == NIL { NIL } else { self.nodes[l as usize].best };
        let rb = if r == NIL { NIL } else { self.nodes[r as usize].best };
        let best = self.heavier(self.heavier(lb, own), rb);
        self.nodes[x as usize].best = best;
    }

    fn rotate(&mut self, x: u32) {
        let p = self.nodes[x as usize].parent;
        let g = self.nodes[p as usize].parent;
        let dir = (self.nodes[p as usize].ch[1] == x) as usize;
        let b = self.nodes[x as usize].ch[dir ^ 1];
        if !self.is_root(p) {
            let pd = (self.nodes[g as usize].ch[1] == p) as usize;
            self.nodes[g as usize].ch[pd] = x;
        }
        self.nodes[x as usize].parent = g;
        self.nodes[x as usize].ch[dir ^ 1] = p;
        self.nodes[p as usize].parent = x;
        self.nodes[p as usize].ch[dir] = b;
        if b != NIL {
            self.nodes[b as usize].parent = p;
        }
        self.pull(p);
        self.pull(x);
    }

    fn splay(&mut self, x: u32) {
        let mut path = vec![x];
        let mut y = x;
        while !self.is_root(y) {
            y = self.nodes[y as usize].parent;
            path.push(y);
        }
        for &z in path.iter().rev() {
            self.push(z);
        }
        while !self.is_root(x) {
            let p = self.nodes[x as usize].parent;
            if !self.is_root(p) {
                let g = self.nodes[p as usize].parent;
                let zigzig = (self.nodes[g as usize].ch[1] == p) == (self.nodes[p as usize].ch[1] == x);
                if zigzig {
                    self.rotate(p);
                } else {
                    self.rotate(x);
                }
            }
            self.rotate(x);
        }
    }

    fn access(&mut self, x: u32) {
        let mut last = NIL;
        let mut y = x;
        while y != NIL {
            self.splay(y);
            self.nodes[y as usize].ch[1] = last;
            self.pull(y);
            last = y;
            y = self.nodes[y as usize].parent;
        }
        self.splay(x);
    }

    fn make_root(&mut self, x: u32) {
        self.access(x);
        self.nodes[x as usize].rev ^= true;
        self.push(x);
    }

    fn find_root(&mut self, x: u32) -> u32 {
        self.access(x);
        let mut y = x;
        loop {
            self.push(y);
            let l = self.nodes[y as usize].ch[0];
            if l == NIL {
                break;
            }
            y = l;
        }
        self.splay(y);
        y
    }

    fn link_nodes(&mut self, x: u32, y: u32) {
        self.make_root(x);
        self.nodes[x as usize].parent = y;
    }

    fn cut_nodes(&mut self, x: u32, y: u32) {
        self.make_root(x);
        self.access(y);
        self.push(y);
        debug_assert_eq!(self.nodes[y as usize].ch[0], x);
        self.nodes[y as usize].ch[0] = NIL;
        self.nodes[x as usize].parent = NIL;
        self.pull(y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn e(a: u32, b: u32) -> Edge {
        Edge::new(a, b).unwrap()
    }

    #[test]
    fn path_max_on_path() {
        let mut f = TopWeightForest::new(5);
        f.link(e(0, 1), 3);
        f.link(e(1, 2), 7);
        f.link(e(2, 3), 1);
        assert_eq!(f.path_max(0, 3), Some((e(1, 2), 7)));
        assert_eq!(f.path_max(2, 3), Some((e(2, 3), 1)));
        assert_eq!(f.path_max(0, 4), None);
        assert!(f.cut(e(1, 2)));
        assert!(!f.connected(0, 3));
        assert_eq!(f.path_max(0, 1), Some((e(0, 1), 3)));
    }

    /// Brute-force path max via DFS over an explicit edge map.
    fn naive_path_max(edges: &BTreeMap<Edge, u8>, n: u32, u: u32, v: u32) -> Option<(Edge, u8)> {
        let mut prev: Vec<Option<(u32, Edge)>> = vec![None; n as usize];
        let mut seen = vec![false; n as usize];
        let mut stack = vec![u];
        seen[u as usize] = true;
        while let Some(x) = stack.pop() {
            for (&ed, _) in edges.iter().filter(|(ed, _)| ed.touches(x)) {
                let y = ed.other(x);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    prev[y as usize] = Some((x, ed));
                    stack.push(y);
                }
            }
        }
        if !seen[v as usize] || u == v {
            return None;
        }
        let mut best: Option<(Edge, u8)> = None;
        let mut x = v;
        while let Some((p, ed)) = prev[x as usize] {
            let w = edges[&ed];
            best = match best {
                Some((be, bw)) if bw > w || (bw == w && be < ed) => Some((be, bw)),
                _ => Some((ed, w)),
            };
            x = p;
        }
        best
    }

    #[test]
    fn random_against_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 30;
        let mut f = TopWeightForest::new(n);
        let mut edges: BTreeMap<Edge, u8> = BTreeMap::new();
        for _ in 0..4000 {
            if !edges.is_empty() && rng.gen_bool(0.35) {
                let k = rng.gen_range(0..edges.len());
                let ed = *edges.keys().nth(k).unwrap();
                edges.remove(&ed);
                assert!(f.cut(ed));
            } else {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if a != b && naive_path_max(&edges, n, a, b).is_none() {
                    let w = rng.gen_range(0..12);
                    f.link(e(a, b), w);
                    edges.insert(e(a, b), w);
                }
            }
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            assert_eq!(f.path_max(a, b), naive_path_max(&edges, n, a, b));
        }
        assert_eq!(f.weighted_edges(), edges.into_iter().collect::<Vec<_>>());
    }
}
