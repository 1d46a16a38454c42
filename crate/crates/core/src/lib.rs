//! Hybrid sketching for dynamic graph connectivity.

pub mod edge;
pub mod error;
pub mod forest;
pub mod harness;
pub mod hash;
pub mod hybrid;
pub mod iblt;
pub mod lossless;
pub mod sketch;
pub mod sketch_dc;
pub mod space;
pub mod streaming;

pub use edge::{decode_edge, encode_edge, pair_universe, CoordinateId, Edge, VertexId};
pub use error::{Error, Result};
pub use forest::{ForestDelta, ForestEvent};
pub use hybrid::{Hybrid, HybridConfig};
pub use iblt::{IbltConfig, NeighborIblt};
pub use lossless::LosslessGraph;
pub use sketch::{BalloonColumn, BucketState, Sample, SketchBucket, SketchMatrix, SketchSeed};
pub use sketch_dc::{SketchDc, SketchDcConfig};
pub use space::SpaceReport;
pub use streaming::{HybridStreaming, StreamUpdate, StreamingConfig, TransitionStats, UpdateKind};
