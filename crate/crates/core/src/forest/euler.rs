//! Euler-tour forests over treaps with subtree aggregates.
//!
//! Each vertex owns one node; each tree edge owns two arc nodes. A tree is
//! the in-order sequence of its tour. Every node carries a value and the
//! aggregate of its treap subtree.

use rustc_hash::FxHashMap;

use crate::edge::{Edge, VertexId};

pub(crate) const NIL: u32 = u32::MAX;

/// Monoid-like summary stored at every treap node.
pub trait Augment: Clone + Default {
    /// Overwrite `out` with the aggregate of `left ++ [mid] ++ right`.
    fn combine_into(out: &mut Self, left: Option<&Self>, mid: &Self, right: Option<&Self>);
}

impl Augment for () {
    fn combine_into(_: &mut Self, _: Option<&Self>, _: &Self, _: Option<&Self>) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Vertex(VertexId),
    Arc(VertexId, VertexId),
}

#[derive(Debug, Clone)]
struct Node<A> {
    left: u32,
    right: u32,
    parent: u32,
    prio: u32,
    size: u32,
    vcount: u32,
    kind: NodeKind,
    value: A,
    agg: A,
}

/// Identifies a tree until the next structural change.
pub type TreeId = u32;

#[derive(Debug, Clone)]
pub struct EulerForest<A: Augment> {
    nodes: Vec<Node<A>>,
    free: Vec<u32>,
    vertex_node: Vec<u32>,
    arcs: FxHashMap<Edge, (u32, u32)>,
    rng: u64,
    live_vertices: usize,
}

impl<A: Augment> EulerForest<A> {
    pub fn new(capacity: u32, seed: u64) -> Self {
        EulerForest {
            nodes: Vec::new(),
            free: Vec::new(),
            vertex_node: vec![NIL; capacity as usize],
            arcs: FxHashMap::default(),
            rng: seed | 1,
            live_vertices: 0,
        }
    }

    pub fn capacity(&self) -> u32 {
        self.vertex_node.len() as u32
    }

    pub fn vertex_count(&self) -> usize {
        self.live_vertices
    }

    pub fn edge_count(&self) -> usize {
        self.arcs.len()
    }

    /// Live nodes: one per vertex plus two per tree edge.
    pub fn node_count(&self) -> usize {
        self.live_vertices + 2 * self.arcs.len()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertex_node.get(v as usize).is_some_and(|&n| n != NIL)
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.arcs.contains_key(&e)
    }

    /// Tree edges in ascending order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.arcs.keys().copied().collect();
        out.sort_unstable();
        out
    }

    pub fn add_vertex(&mut self, v: VertexId, value: A) {
        assert!(!self.contains_vertex(v), "vertex {v} already present");
        let n = self.alloc(NodeKind::Vertex(v), value);
        self.vertex_node[v as usize] = n;
        self.live_vertices += 1;
    }

    /// Removes an isolated vertex, returning its value.
    pub fn remove_vertex(&mut self, v: VertexId) -> A {
        let n = self.vnode(v);
        assert_eq!(self.nodes[n as usize].size, 1, "vertex {v} still has tree edges");
        self.vertex_node[v as usize] = NIL;
        self.live_vertices -= 1;
        self.release(n)
    }

    pub fn connected(&self, u: VertexId, v: VertexId) -> bool {
        self.tree_of(u) == self.tree_of(v)
    }

    pub fn tree_of(&self, v: VertexId) -> TreeId {
        self.root(self.vnode(v))
    }

    pub fn component_size(&self, v: VertexId) -> u32 {
        self.nodes[self.tree_of(v) as usize].vcount
    }

    pub fn component_agg(&self, v: VertexId) -> &A {
        &self.nodes[self.tree_of(v) as usize].agg
    }

    pub fn tree_agg(&self, t: TreeId) -> &A {
        &self.nodes[t as usize].agg
    }

    pub fn tree_size(&self, t: TreeId) -> u32 {
        self.nodes[t as usize].vcount
    }

    pub fn value(&self, v: VertexId) -> &A {
        &self.nodes[self.vnode(v) as usize].value
    }

    /// Mutates a vertex value and recomputes the aggregates above it.
    pub fn modify_value(&mut self, v: VertexId, f: impl FnOnce(&mut A)) {
        let mut x = self.vnode(v);
        f(&mut self.nodes[x as usize].value);
        while x != NIL {
            self.pull(x);
            x = self.nodes[x as usize].parent;
        }
    }

    /// Applies `f` to the value and to every aggregate on the path to the
    /// root. Only valid when `f` commutes with aggregation (XOR toggles).
    /// Returns the number of nodes visited.
    pub fn apply_linear(&mut self, v: VertexId, mut f: impl FnMut(&mut A)) -> usize {
        let mut x = self.vnode(v);
        f(&mut self.nodes[x as usize].value);
        let mut visited = 0;
        while x != NIL {
            f(&mut self.nodes[x as usize].agg);
            visited += 1;
            x = self.nodes[x as usize].parent;
        }
        visited
    }

    /// Joins the trees of `e.u()` and `e.v()` with `e`.
    pub fn link(&mut self, e: Edge) {
        debug_assert!(!self.connected(e.u(), e.v()), "link {e} would close a cycle");
        let (u, v) = (e.u(), e.v());
        let tu = self.reroot(u);
        let tv = self.reroot(v);
        let a = self.alloc(NodeKind::Arc(u, v), A::default());
        let b = self.alloc(NodeKind::Arc(v, u), A::default());
        self.arcs.insert(e, (a, b));
        let t = self.merge(tu, a);
        let t = self.merge(t, tv);
        let t = self.merge(t, b);
        self.nodes[t as usize].parent = NIL;
    }

    /// Removes tree edge `e`. Returns false if `e` is not a tree edge.
    pub fn cut(&mut self, e: Edge) -> bool {
        let Some((a, b)) = self.arcs.remove(&e) else {
            return false;
        };
        let (mut ia, mut ib) = (self.index_of(a), self.index_of(b));
        let (mut first, mut second) = (a, b);
        if ia > ib {
            std::mem::swap(&mut ia, &mut ib);
            std::mem::swap(&mut first, &mut second);
        }
        let t = self.root(first);
        let (left, rest) = self.split(t, ia);
        let (_first, rest) = self.split(rest, 1);
        let (middle, rest) = self.split(rest, ib - ia - 1);
        let (_second, right) = self.split(rest, 1);
        let outer = self.merge(left, right);
        if outer != NIL {
            self.nodes[outer as usize].parent = NIL;
        }
        if middle != NIL {
            self.nodes[middle as usize].parent = NIL;
        }
        self.release(first);
        self.release(second);
        true
    }

    /// A vertex in `v`'s tree whose value satisfies `pred`, pruning subtrees
    /// whose aggregate fails it. `pred` must be monotone: a subtree aggregate
    /// satisfies it whenever any member value does.
    pub fn find_vertex(&self, v: VertexId, pred: impl Fn(&A) -> bool) -> Option<VertexId> {
        let mut x = self.tree_of(v);
        if !pred(&self.nodes[x as usize].agg) {
            return None;
        }
        loop {
            let n = &self.nodes[x as usize];
            if n.left != NIL && pred(&self.nodes[n.left as usize].agg) {
                x = n.left;
                continue;
            }
            if let NodeKind::Vertex(w) = n.kind {
                if pred(&n.value) {
                    return Some(w);
                }
            }
            if n.right != NIL && pred(&self.nodes[n.right as usize].agg) {
                x = n.right;
                continue;
            }
            return None;
        }
    }

    /// Vertices of `v`'s tree in tour order.
    pub fn component_vertices(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        self.walk(self.tree_of(v), &mut |kind, _, _| {
            if let NodeKind::Vertex(w) = kind {
                out.push(w);
            }
        });
        out
    }

    /// In-order visit of a whole tree: `(kind, value, aggregate)`.
    pub fn walk(&self, t: TreeId, f: &mut impl FnMut(NodeKind, &A, &A)) {
        let mut stack = Vec::new();
        let mut x = t;
        while x != NIL || !stack.is_empty() {
            while x != NIL {
                stack.push(x);
                x = self.nodes[x as usize].left;
            }
            let top = stack.pop().unwrap();
            let n = &self.nodes[top as usize];
            f(n.kind, &n.value, &n.agg);
            x = n.right;
        }
    }

    /// Every live node's value and aggregate, in arena order.
    pub fn for_each_node(&self, mut f: impl FnMut(NodeKind, &A, &A)) {
        for v in 0..self.vertex_node.len() {
            if self.vertex_node[v] != NIL {
                let n = &self.nodes[self.vertex_node[v] as usize];
                f(n.kind, &n.value, &n.agg);
            }
        }
        for &(a, b) in self.arcs.values() {
            for x in [a, b] {
                let n = &self.nodes[x as usize];
                f(n.kind, &n.value, &n.agg);
            }
        }
    }

    /// Recomputes every aggregate bottom-up from scratch and compares.
    pub fn aggregates_consistent(&self) -> bool
    where
        A: PartialEq,
    {
        let mut seen_roots = Vec::new();
        for v in 0..self.vertex_node.len() as u32 {
            if self.contains_vertex(v) {
                let r = self.tree_of(v);
                if !seen_roots.contains(&r) {
                    seen_roots.push(r);
                    if self.recompute(r).is_none() {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn recompute(&self, x: u32) -> Option<A>
    where
        A: PartialEq,
    {
        let n = &self.nodes[x as usize];
        let l = if n.left == NIL { None } else { Some(self.recompute(n.left)?) };
        let r = if n.right == NIL { None } else { Some(self.recompute(n.right)?) };
        let mut out = A::default();
        A::combine_into(&mut out, l.as_ref(), &n.value, r.as_ref());
        (out == n.agg).then_some(out)
    }

    fn vnode(&self, v: VertexId) -> u32 {
        let n = self.vertex_node[v as usize];
        assert!(n != NIL, "vertex {v} not present");
        n
    }

    fn next_prio(&mut self) -> u32 {
        self.rng ^= self.rng << 13;
        self.rng ^= self.rng >> 7;
        self.rng ^= self.rng << 17;
        (self.rng >> 32) as u32
    }

    fn alloc(&mut self, kind: NodeKind, value: A) -> u32 {
        let prio = self.next_prio();
        let is_vertex = matches!(kind, NodeKind::Vertex(_)) as u32;
        let node = Node {
            left: NIL,
            right: NIL,
            parent: NIL,
            prio,
            size: 1,
            vcount: is_vertex,
            kind,
            agg: value.clone(),
            value,
        };
        if let Some(i) = self.free.pop() {
            self.nodes[i as usize] = node;
            i
        } else {
            self.nodes.push(node);
            (self.nodes.len() - 1) as u32
        }
    }

    fn release(&mut self, x: u32) -> A {
        let n = &mut self.nodes[x as usize];
        n.agg = A::default();
        self.free.push(x);
        std::mem::take(&mut n.value)
    }

    fn root(&self, mut x: u32) -> u32 {
        while self.nodes[x as usize].parent != NIL {
            x = self.nodes[x as usize].parent;
        }
        x
    }

    fn size(&self, x: u32) -> u32 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].size
        }
    }

    fn index_of(&self, mut x: u32) -> u32 {
        let mut idx = self.size(self.nodes[x as usize].left);
        loop {
            let p = self.nodes[x as usize].parent;
            if p == NIL {
                return idx;
            }
            if self.nodes[p as usize].right == x {
                idx += self.size(self.nodes[p as usize].left) + 1;
            }
            x = p;
        }
    }

    fn pull(&mut self, x: u32) {
        let (l, r) = (self.nodes[x as usize].left, self.nodes[x as usize].right);
        let mut size = 1;
        let mut vcount = matches!(self.nodes[x as usize].kind, NodeKind::Vertex(_)) as u32;
        if l != NIL {
            size += self.nodes[l as usize].size;
            vcount += self.nodes[l as usize].vcount;
        }
        if r != NIL {
            size += self.nodes[r as usize].size;
            vcount += self.nodes[r as usize].vcount;
        }
        let mut agg = std::mem::take(&mut self.nodes[x as usize].agg);
        {
            let nodes = &self.nodes;
            let left = (l != NIL).then(|| &nodes[l as usize].agg);
            let right = (r != NIL).then(|| &nodes[r as usize].agg);
            A::combine_into(&mut agg, left, &nodes[x as usize].value, right);
        }
        let n = &mut self.nodes[x as usize];
        n.agg = agg;
        n.size = size;
        n.vcount = vcount;
    }

    fn set_left(&mut self, x: u32, c: u32) {
        self.nodes[x as usize].left = c;
        if c != NIL {
            self.nodes[c as usize].parent = x;
        }
    }

    fn set_right(&mut self, x: u32, c: u32) {
        self.nodes[x as usize].right = c;
        if c != NIL {
            self.nodes[c as usize].parent = x;
        }
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a as usize].prio > self.nodes[b as usize].prio {
            let r = self.nodes[a as usize].right;
            let m = self.merge(r, b);
            self.set_right(a, m);
            self.pull(a);
            a
        } else {
            let l = self.nodes[b as usize].left;
            let m = self.merge(a, l);
            self.set_left(b, m);
            self.pull(b);
            b
        }
    }

    /// Splits off the first `k` nodes. Both returned roots have no parent.
    fn split(&mut self, t: u32, k: u32) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        self.nodes[t as usize].parent = NIL;
        let l = self.nodes[t as usize].left;
        let ls = self.size(l);
        if k <= ls {
            let (a, b) = self.split(l, k);
            self.set_left(t, b);
            self.pull(t);
            if a != NIL {
                self.nodes[a as usize].parent = NIL;
            }
            (a, t)
        } else {
            let r = self.nodes[t as usize].right;
            let (a, b) = self.split(r, k - ls - 1);
            self.set_right(t, a);
            self.pull(t);
            if b != NIL {
                self.nodes[b as usize].parent = NIL;
            }
            (t, b)
        }
    }

    /// Rotates `v`'s tour to start at `v`; returns the new treap root.
    fn reroot(&mut self, v: VertexId) -> u32 {
        let x = self.vnode(v);
        let idx = self.index_of(x);
        let t = self.root(x);
        if idx == 0 {
            return t;
        }
        let (a, b) = self.split(t, idx);
        let t = self.merge(b, a);
        self.nodes[t as usize].parent = NIL;
        t
    }
}
