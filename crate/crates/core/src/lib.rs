//! gridstream: a self-contained micro-batch streaming analytics engine for
//! gridded geo-temporal data.
//!
//! The engine models a small analytics cluster end to end:
//!
//! - [`grid`] / [`summary`]: dense lat×lon fields with validity masks and
//!   exact, mergeable per-cell statistics (count/sum/min/max/m2).
//! - [`blockstore`]: replicated in-memory block storage across simulated
//!   nodes, with failure injection and re-replication.
//! - [`plan`] / [`dataset`]: immutable, lazily evaluated datasets whose
//!   lineage is a content-addressed DAG, replayable per partition.
//! - [`cluster`]: deterministic multi-worker scheduling with heartbeat
//!   failure detection, task rescheduling and per-job metrics, driven by a
//!   virtual clock (a real clock mode exists for demos).
//! - [`analytics`]: canonical statistics plans (mean/min/max/stddev at four
//!   aggregation granularities) plus an independent brute-force oracle.
//! - [`streaming`]: tumbling-window micro-batch processing with durable
//!   checkpointed state.
//! - [`ingest`]: the SGF1 grid file codec, filename grammar, synthetic data
//!   generator and SGR1 text export.

pub mod analytics;
pub mod blockstore;
pub mod cluster;
pub mod dataset;
pub mod error;
pub mod executor;
pub mod grid;
pub mod ingest;
pub mod operators;
pub mod plan;
pub mod streaming;
pub mod summary;
mod util;

pub use analytics::{CombineMode, ResultField, ResultTensor, Variation};
pub use blockstore::{BlockId, BlockStore, NodeId, StoreError};
pub use cluster::{BatchMetrics, Cluster, ClusterConfig, ClusterError, ClockMode, JobHandle};
pub use dataset::{Dataset, PartitionSpec};
pub use error::EngineError;
pub use executor::Executor;
pub use grid::{Axis, BinaryOp, GridError, GridField, GridGeometry, GridTensor};
pub use operators::{Element, ElementKind, OperatorRegistry};
pub use plan::{PlanNode, PlanNodeId};
pub use streaming::{Batch, FileRef, StreamConfig, StreamEngine, StreamError, StreamSource};
pub use summary::{CellSummaries, StatKind};
