//! Vertices, undirected edges, and the edge <-> coordinate codec.
//!
//! A vertex's characteristic vector lives in the universe of all
//! unordered pairs, `n = V(V-1)/2`. Pairs are ranked lexicographically.

use std::fmt;

use crate::error::{Error, Result};

pub type VertexId = u32;

/// Index into a sketch universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoordinateId(pub u64);

impl CoordinateId {
    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

/// An undirected edge, always stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    u: VertexId,
    v: VertexId,
}

impl Edge {
    /// Canonicalizes the endpoint order. Fails on self loops.
    pub fn new(a: VertexId, b: VertexId) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Edge { u: a, v: b }),
            std::cmp::Ordering::Greater => Ok(Edge { u: b, v: a }),
            std::cmp::Ordering::Equal => Err(Error::SelfLoop(a)),
        }
    }

    #[inline]
    pub fn u(self) -> VertexId {
        self.u
    }

    #[inline]
    pub fn v(self) -> VertexId {
        self.v
    }

    /// The endpoint that is not `x`.
    #[inline]
    pub fn other(self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    #[inline]
    pub fn touches(self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// Size of the pair universe for `vertices` vertices.
#[inline]
pub fn pair_universe(vertices: u32) -> u64 {
    let v = vertices as u64;
    v * v.saturating_sub(1) / 2
}

/// Lexicographic rank of the pair among all pairs over `vertices` vertices.
pub fn encode_edge(a: VertexId, b: VertexId, vertices: u32) -> Result<CoordinateId> {
    let e = Edge::new(a, b)?;
    if e.v >= vertices {
        return Err(Error::VertexOutOfRange { vertex: e.v, capacity: vertices });
    }
    Ok(encode(e, vertices))
}

#[inline]
pub(crate) fn encode(e: Edge, vertices: u32) -> CoordinateId {
    let (u, v, n) = (e.u as u64, e.v as u64, vertices as u64);
    CoordinateId(u * n - u * (u + 1) / 2 + (v - u - 1))
}

/// Inverse of [`encode_edge`].
pub fn decode_edge(id: CoordinateId, vertices: u32) -> Result<Edge> {
    let n = vertices as u64;
    if id.0 >= pair_universe(vertices) {
        return Err(Error::CoordinateOutOfRange { id: id.0, universe: pair_universe(vertices) });
    }
    // Row u starts at s(u) = u*n - u(u+1)/2. Estimate u from the quadratic,
    // then correct for floating point error.
    let k = id.0 as f64;
    let nf = n as f64;
    let b = 2.0 * nf - 1.0;
    let est = ((b - (b * b - 8.0 * k).max(0.0).sqrt()) / 2.0).floor().max(0.0) as u64;
    let start = |u: u64| u * n - u * (u + 1) / 2;
    let mut u = est.min(n.saturating_sub(2));
    while u > 0 && start(u) > id.0 {
        u -= 1;
    }
    while u + 1 < n && start(u + 1) <= id.0 {
        u += 1;
    }
    let v = id.0 - start(u) + u + 1;
    Ok(Edge { u: u as u32, v: v as u32 })
}
