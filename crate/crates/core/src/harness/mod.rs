//! Stream files, synthetic generators, oracles and replay.

pub mod generate;
pub mod oracle;
pub mod run;
pub mod stream;

pub use generate::{churn, gnp, insert_then_delete, planted_core, ChurnParams};
pub use oracle::{bfs_labels, union_find_labels};
pub use run::{run, write_csv, GibbTally, MetricsRow, Mode, RunConfig, RunOutput, CSV_HEADER};
pub use stream::{Op, Stream};
