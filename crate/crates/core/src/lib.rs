//! All-pairs shortest paths driven by locally shortest paths (LSPs).
//!
//! A path is *locally shortest* when removing its first edge and removing its
//! last edge both leave a shortest path. On randomly weighted complete
//! digraphs there are only Θ(n²) of them, which gives:
//!
//! - [`apsp`]: a static solver that examines every LSP exactly once and,
//!   backed by the monotone [`bucket_queue`], runs in O(n²) expected time;
//! - [`path_system`]: a dynamic structure that stores every LSP and repairs
//!   them after edge weight changes, insertions and deletions;
//! - [`oracle`]: deliberately simple brute-force ground truth;
//! - [`stats`]: reference constants and per-graph measurements used by the
//!   experiment harness.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod apsp;
pub mod bucket_queue;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod path_system;
pub mod stats;

pub use apsp::{solve_apsp, ApspResult, ApspState, QueueKind};
pub use bucket_queue::{IndexedHeap, MonotoneBucketQueue, PairQueue, QueueMode};
pub use error::Error;
pub use graph::{EdgeUpdateSampler, Seed, WeightModel, WeightedDigraph};
pub use path_system::{ChurnReport, PathHandle, PathKind, PathSystem};

/// Sentinel for "no vertex", "no path" and "not queued" in dense index tables.
pub(crate) const NIL: u32 = u32::MAX;
