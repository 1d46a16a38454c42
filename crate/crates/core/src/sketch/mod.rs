//! F2 sketch buckets, BalloonSketch columns and sketch matrices.

mod bucket;
mod column;
mod matrix;

pub use bucket::{bucket_state, bucket_toggle, BucketState, Checksum, SketchBucket};
pub(crate) use column::ceil_log2;
pub use column::{
    depth_from_hash, random_depth, trim_buckets, xor_buckets, BalloonColumn, ColumnParams, Sample, SketchSeed,
    RHO_HEADROOM,
};
pub use matrix::{column_seeds, SketchMatrix};
