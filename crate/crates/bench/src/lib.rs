//! Shared workloads for the benchmarks.

use hybridcc_core::harness::{self, ChurnParams, Stream};

/// Churn stream with a relocating dense core, sized for a few seconds per replay.
pub fn churn_workload(vertices: u32, target_edges: usize, updates: usize, seed: u64) -> Stream {
    harness::churn(&ChurnParams {
        vertices,
        target_edges,
        updates,
        core: vertices / 10,
        core_frac: 0.5,
        core_phases: 4,
        query_rate: 0.05,
        seed,
    })
    .expect("valid churn parameters")
}
