use thiserror::Error;

use crate::edge::{Edge, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("self loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {vertex} out of range for capacity {capacity}")]
    VertexOutOfRange { vertex: VertexId, capacity: u32 },
    #[error("coordinate {id} out of range for universe {universe}")]
    CoordinateOutOfRange { id: u64, universe: u64 },
    #[error("columns were built with different seeds or universes")]
    SeedMismatch,
    #[error("tables were built with different configurations")]
    ConfigMismatch,
    #[error("edge {0} is already present")]
    DuplicateEdge(Edge),
    #[error("edge {0} is not present")]
    MissingEdge(Edge),
    #[error("edge {0} is not a spanning forest edge")]
    NotForestEdge(Edge),
    #[error("vertex {0} is not active in the dense engine")]
    InactiveVertex(VertexId),
    #[error("vertex {0} is already active in the dense engine")]
    VertexAlreadyActive(VertexId),
    #[error("vertex {vertex} still has degree {degree}")]
    NonZeroDegree { vertex: VertexId, degree: u32 },
    #[error("IBLT recovery failed")]
    RecoveryFailed,
    #[error("malformed update: {0}")]
    MalformedUpdate(String),
    #[error("malformed serialized data: {0}")]
    Decode(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
