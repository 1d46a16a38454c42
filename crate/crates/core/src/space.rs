//! Analytic word accounting. Counts are records times fixed per-record
//! costs, never allocator statistics. One word is 64 bits.

use crate::lossless::LosslessSpace;
use crate::sketch_dc::SketchDcSpace;
use crate::streaming::VertexStorage;

/// alpha and gamma.
pub const BUCKET_WORDS: usize = 2;
/// Two children, parent, and a packed priority/size word.
pub const FOREST_NODE_WORDS: usize = 4;
/// Edge record, its level, and one adjacency entry per endpoint per index.
pub const LOSSLESS_EDGE_WORDS: usize = 6;
/// Per-vertex header: degree or set handle.
pub const VERTEX_WORDS: usize = 1;
/// One entry of an explicit neighbor set.
pub const SET_ENTRY_WORDS: usize = 1;
/// id sum and checksum sum.
pub const IBLT_CELL_WORDS: usize = 2;

pub fn lossless_words(vertices: u32, s: &LosslessSpace) -> usize {
    vertices as usize * VERTEX_WORDS + s.edges * LOSSLESS_EDGE_WORDS + s.forest_nodes * FOREST_NODE_WORDS
}

pub fn sketch_dc_words(s: &SketchDcSpace) -> usize {
    s.buckets() * BUCKET_WORDS
        + (s.tier_nodes() + s.top_nodes + s.weight_nodes) * FOREST_NODE_WORDS
        + s.active_vertices * VERTEX_WORDS
}

pub fn iblt_words(cells: usize) -> usize {
    cells * IBLT_CELL_WORDS
}

pub fn streaming_vertex_words(s: VertexStorage) -> usize {
    VERTEX_WORDS
        + match s {
            VertexStorage::Explicit { entries } => entries * SET_ENTRY_WORDS,
            VertexStorage::Sketch { buckets, iblt_cells } => buckets * BUCKET_WORDS + iblt_words(iblt_cells),
        }
}

/// Word counts per subsystem.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpaceReport {
    pub sparse: usize,
    pub dense: usize,
    pub iblt: usize,
    /// Sketch buckets allocated across the whole structure.
    pub buckets: usize,
    pub dense_vertices: usize,
}

impl SpaceReport {
    pub fn total(&self) -> usize {
        self.sparse + self.dense + self.iblt
    }
}
