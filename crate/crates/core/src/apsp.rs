//! Static all-pairs shortest paths that examines only locally shortest paths.
//!
//! All sources run Dijkstra "in parallel" off one global pair queue. When a
//! pair `(u, v)` is extracted its path is final; the solver then forms the
//! one-edge extensions `w → u ⇝ v` and `u ⇝ v → w` whose other part is an
//! already final shortest path, and relaxes them. Every LSP with at least two
//! edges is examined exactly once, so the work is O(n² + |LSP|) queue
//! operations.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bucket_queue::{IndexedHeap, MonotoneBucketQueue, PairQueue, QueueMode};
use crate::error::{invalid, Result};
use crate::graph::{pair_id, tie_key, WeightedDigraph};
use crate::NIL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueueKind {
    Bucket,
    Comparison,
}

/// Why a bucket-queue solve ended up on the comparison heap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackReason {
    /// Minimum edge weight below n^-2.5; the heap was used from the start.
    TinyDelta,
    /// Only the leftover bucket was occupied at some extraction.
    LeftoverBucket,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeapOpCounts {
    pub inserts: u64,
    pub decreases: u64,
    pub extracts: u64,
}

/// Working state of one solve: distance/`p`/`q` tables, the extension lists
/// `L[u,v]` / `R[u,v]` and the global queue.
///
/// `L[a,b]` and `R[a,b]` are singly linked lists threaded through per-pair
/// `next` tables: the extraction of `(u, v)` contributes exactly one entry to
/// `L[p[u,v], v]` (standing for vertex `u`) and one to `R[u, q[u,v]]`
/// (standing for vertex `v`), so both lists together never exceed 2n² entries.
#[derive(Debug, Clone)]
pub struct ApspState<Q> {
    n: usize,
    dist: Vec<f64>,
    tie: Vec<u64>,
    second: Vec<u32>,
    penultimate: Vec<u32>,
    left_head: Vec<u32>,
    left_next: Vec<u32>,
    right_head: Vec<u32>,
    right_next: Vec<u32>,
    finalized: Vec<bool>,
    queue: Q,
    examined: u64,
    ops: HeapOpCounts,
}

impl<Q: PairQueue> ApspState<Q> {
    /// Seeds distances with edge weights and queues every edge.
    pub fn new(g: &WeightedDigraph, queue: Q) -> Result<Self> {
        let n = g.n();
        let mut state = Self {
            n,
            dist: vec![f64::INFINITY; n * n],
            tie: vec![0; n * n],
            second: vec![NIL; n * n],
            penultimate: vec![NIL; n * n],
            left_head: vec![NIL; n * n],
            left_next: vec![NIL; n * n],
            right_head: vec![NIL; n * n],
            right_next: vec![NIL; n * n],
            finalized: vec![false; n * n],
            queue,
            examined: 0,
            ops: HeapOpCounts::default(),
        };
        for u in 0..n {
            state.dist[pair_id(n, u, u)] = 0.0;
        }
        for (u, v, w) in g.edges() {
            if !(w > 0.0) {
                return Err(invalid!("edge ({u},{v}) has non-positive weight {w}"));
            }
            let pair = pair_id(n, u, v);
            state.dist[pair] = w;
            state.tie[pair] = tie_key(u, v);
            state.second[pair] = v as u32;
            state.penultimate[pair] = u as u32;
            state.queue.insert_or_decrease(pair, w)?;
            state.ops.inserts += 1;
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dist(&self, u: usize, v: usize) -> f64 {
        self.dist[pair_id(self.n, u, v)]
    }

    /// Overrides a distance entry; only meant for driving [`examine`](Self::examine)
    /// from hand-built states.
    pub fn set_dist(&mut self, u: usize, v: usize, d: f64) {
        self.dist[pair_id(self.n, u, v)] = d;
    }

    pub fn queue(&self) -> &Q {
        &self.queue
    }

    pub fn examined_lsp_count(&self) -> u64 {
        self.examined
    }

    /// Relaxes the LSP `u ⇝ v ⇝ w` formed by two final shortest paths.
    /// Equal costs are resolved by exact per-edge tie keys, so a tie with
    /// the current path only wins if its key sum is smaller.
    pub fn examine(&mut self, u: usize, v: usize, w: usize) -> Result<()> {
        self.examined += 1;
        let n = self.n;
        let target = pair_id(n, u, w);
        let (a, b) = (pair_id(n, u, v), pair_id(n, v, w));
        let candidate = self.dist[a] + self.dist[b];
        let tie = self.tie[a] + self.tie[b];
        let current = self.dist[target];
        let better = candidate < current || (candidate == current && tie < self.tie[target]);
        if better && !self.finalized[target] {
            self.dist[target] = candidate;
            self.tie[target] = tie;
            if self.second[target] == NIL {
                self.ops.inserts += 1;
            } else {
                self.ops.decreases += 1;
            }
            self.queue.insert_or_decrease(target, candidate)?;
            self.second[target] = self.second[pair_id(n, u, v)];
            self.penultimate[target] = self.penultimate[pair_id(n, v, w)];
        }
        Ok(())
    }

    /// Extracts pairs until the queue is exhausted.
    pub fn run(&mut self) -> Result<()> {
        let n = self.n;
        while let Some((pair, _)) = self.queue.extract_min() {
            self.ops.extracts += 1;
            self.finalized[pair] = true;
            let (u, v) = (pair / n, pair % n);
            let second = self.second[pair] as usize;
            let penultimate = self.penultimate[pair] as usize;

            let into_left = pair_id(n, second, v);
            self.left_next[pair] = self.left_head[into_left];
            self.left_head[into_left] = pair as u32;
            let into_right = pair_id(n, u, penultimate);
            self.right_next[pair] = self.right_head[into_right];
            self.right_head[into_right] = pair as u32;

            let mut entry = self.left_head[pair_id(n, u, penultimate)];
            while entry != NIL {
                let w = entry as usize / n;
                self.examine(w, u, v)?;
                entry = self.left_next[entry as usize];
            }
            let mut entry = self.right_head[pair_id(n, second, v)];
            while entry != NIL {
                let w = entry as usize % n;
                self.examine(u, v, w)?;
                entry = self.right_next[entry as usize];
            }
        }
        Ok(())
    }

    fn list_entries(&self) -> u64 {
        2 * self.ops.extracts
    }
}

/// Output of [`solve_apsp`].
#[derive(Debug, Clone, PartialEq)]
pub struct ApspResult {
    pub n: usize,
    /// Row-major distance matrix, `INFINITY` where unreachable.
    pub dist: Vec<f64>,
    second: Vec<u32>,
    penultimate: Vec<u32>,
    pub examined_lsp_count: u64,
    pub edge_count: usize,
    pub queue_kind: QueueKind,
    pub fallback: Option<FallbackReason>,
    pub heap_ops: HeapOpCounts,
    /// Empty buckets skipped by the bucket queue (0 for the comparison heap).
    pub bucket_scan_steps: u64,
    /// Total entries ever placed in the `L`/`R` extension lists.
    pub extension_list_entries: u64,
}

impl ApspResult {
    pub fn dist(&self, u: usize, v: usize) -> f64 {
        self.dist[pair_id(self.n, u, v)]
    }

    /// Second vertex of the shortest `u ⇝ v` path.
    pub fn second_vertex(&self, u: usize, v: usize) -> Option<usize> {
        let s = self.second[pair_id(self.n, u, v)];
        (s != NIL).then_some(s as usize)
    }

    /// Penultimate vertex of the shortest `u ⇝ v` path.
    pub fn penultimate_vertex(&self, u: usize, v: usize) -> Option<usize> {
        let s = self.penultimate[pair_id(self.n, u, v)];
        (s != NIL).then_some(s as usize)
    }

    pub fn second_table(&self) -> &[u32] {
        &self.second
    }

    /// Vertex sequence of the shortest path, following second-vertex links.
    pub fn path(&self, u: usize, v: usize) -> Option<Vec<usize>> {
        if u == v {
            return Some(vec![u]);
        }
        if !self.dist(u, v).is_finite() {
            return None;
        }
        let mut out = vec![u];
        let mut cur = u;
        while cur != v {
            cur = self.second_vertex(cur, v)?;
            out.push(cur);
            if out.len() > self.n {
                return None;
            }
        }
        Some(out)
    }

    /// Number of LSPs in the graph: every edge plus every examined extension.
    pub fn lsp_count(&self) -> u64 {
        self.examined_lsp_count + self.edge_count as u64
    }

    pub fn fallback_engaged(&self) -> bool {
        self.fallback.is_some()
    }
}

fn finish<Q: PairQueue>(
    state: ApspState<Q>,
    g: &WeightedDigraph,
    queue_kind: QueueKind,
    fallback: Option<FallbackReason>,
    bucket_scan_steps: u64,
) -> ApspResult {
    let extension_list_entries = state.list_entries();
    ApspResult {
        n: state.n,
        dist: state.dist,
        second: state.second,
        penultimate: state.penultimate,
        examined_lsp_count: state.examined,
        edge_count: g.edge_count(),
        queue_kind,
        fallback,
        heap_ops: state.ops,
        bucket_scan_steps,
        extension_list_entries,
    }
}

/// Solves APSP on `g` with the requested queue.
///
/// With [`QueueKind::Bucket`] the bucket width is the minimum edge weight and
/// `n²` buckets are used; if that weight is below `n^-2.5` the exact heap is
/// used for the whole run instead and the result is flagged.
pub fn solve_apsp(g: &WeightedDigraph, queue: QueueKind) -> Result<ApspResult> {
    let n = g.n();
    let pairs = n * n;
    let comparison = |g, fallback| -> Result<ApspResult> {
        let mut state = ApspState::new(g, IndexedHeap::new(pairs))?;
        state.run()?;
        Ok(finish(state, g, queue, fallback, 0))
    };
    match queue {
        QueueKind::Comparison => comparison(g, None),
        QueueKind::Bucket => {
            let Some(delta) = g.min_weight() else {
                return comparison(g, None);
            };
            if delta < libm::pow(n as f64, -2.5) {
                return comparison(g, Some(FallbackReason::TinyDelta));
            }
            let buckets = pairs.max(2);
            let mut state = ApspState::new(g, MonotoneBucketQueue::new(delta, buckets, pairs)?)?;
            state.run()?;
            let fallback = (state.queue().mode() == QueueMode::Fallback)
                .then_some(FallbackReason::LeftoverBucket);
            let steps = state.queue().scan_steps();
            Ok(finish(state, g, queue, fallback, steps))
        }
    }
}

/// Edges that are themselves shortest paths, and the maximum out-degree Δ
/// among them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EssentialSubgraph {
    pub edges: Vec<(usize, usize)>,
    pub max_out_degree: usize,
}

pub fn essential_subgraph(result: &ApspResult, g: &WeightedDigraph) -> EssentialSubgraph {
    let n = g.n();
    let mut degree = vec![0usize; n];
    let edges: Vec<(usize, usize)> = g
        .edges()
        .filter(|&(u, v, w)| w <= result.dist(u, v) + 1e-12)
        .map(|(u, v, _)| {
            degree[u] += 1;
            (u, v)
        })
        .collect();
    EssentialSubgraph {
        edges,
        max_out_degree: degree.into_iter().max().unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Seed, WeightModel};
    use crate::oracle::{dijkstra_sssp, k3_fixture};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn k3_distances() {
        let g = k3_fixture();
        let expected = [[0.0, 0.2, 0.5], [0.7, 0.0, 0.3], [0.4, 0.6, 0.0]];
        for kind in [QueueKind::Bucket, QueueKind::Comparison] {
            let r = solve_apsp(&g, kind).unwrap();
            for (u, row) in expected.iter().enumerate() {
                for (v, &d) in row.iter().enumerate() {
                    assert!(close(r.dist(u, v), d), "{kind:?} ({u},{v}) = {}", r.dist(u, v));
                }
            }
            // 3 two-edge + 3 cyclic three-edge extensions.
            assert_eq!(r.examined_lsp_count, 6);
            assert_eq!(r.lsp_count(), 12);
            assert_eq!(r.path(0, 2), Some(vec![0, 1, 2]));
            assert_eq!(r.penultimate_vertex(1, 0), Some(2));
        }
    }

    #[test]
    fn two_vertices() {
        let g = WeightedDigraph::from_edges(2, [(0, 1, 0.3), (1, 0, 0.8)]).unwrap();
        let r = solve_apsp(&g, QueueKind::Bucket).unwrap();
        assert_eq!(r.dist(0, 1), 0.3);
        assert_eq!(r.dist(1, 0), 0.8);
        let es = essential_subgraph(&r, &g);
        assert_eq!(es.edges, vec![(0, 1), (1, 0)]);
        assert_eq!(es.max_out_degree, 1);
    }

    #[test]
    fn examine_relaxes_from_infinity() {
        let g = WeightedDigraph::from_edges(3, [(0, 1, 0.2), (1, 2, 0.3)]).unwrap();
        let mut s = ApspState::new(&g, IndexedHeap::new(9)).unwrap();
        assert_eq!(s.dist(0, 2), f64::INFINITY);
        s.examine(0, 1, 2).unwrap();
        assert!(close(s.dist(0, 2), 0.5));
        assert_eq!(s.queue().key(2), Some(s.dist(0, 2)));
        assert_eq!(s.examined_lsp_count(), 1);
    }

    #[test]
    fn exact_ties_follow_tie_keys() {
        use crate::graph::tie_key;
        let g = WeightedDigraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)]).unwrap();
        let via = tie_key(0, 1) + tie_key(1, 2);
        let expected = if via < tie_key(0, 2) { vec![0, 1, 2] } else { vec![0, 2] };
        for kind in [QueueKind::Bucket, QueueKind::Comparison] {
            let r = solve_apsp(&g, kind).unwrap();
            assert_eq!(r.dist(0, 2), 2.0);
            assert_eq!(r.path(0, 2), Some(expected.clone()));
        }
    }

    #[test]
    fn examine_cyclic_and_ties_do_not_update() {
        let g = k3_fixture();
        let mut s = ApspState::new(&g, IndexedHeap::new(9)).unwrap();
        // 0 -> 1 ⇝ 0 with dist[1,0] = 0.7 never beats dist[0,0] = 0.
        s.set_dist(1, 0, 0.7);
        s.examine(0, 1, 0).unwrap();
        assert_eq!(s.dist(0, 0), 0.0);
        assert_eq!(s.examined_lsp_count(), 1);
        // Equal sums keep the incumbent.
        s.set_dist(0, 2, 0.5);
        s.set_dist(0, 1, 0.25);
        s.set_dist(1, 2, 0.25);
        s.examine(0, 1, 2).unwrap();
        assert_eq!(s.dist(0, 2), 0.5);
        assert_eq!(s.queue().key(2), Some(0.6));
        assert_eq!(s.examined_lsp_count(), 2);
    }

    #[test]
    fn unreachable_pairs_stay_infinite() {
        let g = WeightedDigraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let r = solve_apsp(&g, QueueKind::Bucket).unwrap();
        assert_eq!(r.dist(0, 2), 2.0);
        assert_eq!(r.dist(2, 0), f64::INFINITY);
        assert_eq!(r.dist(0, 3), f64::INFINITY);
        assert_eq!(r.path(2, 0), None);
        assert_eq!(r.second_vertex(3, 0), None);
    }

    #[test]
    fn tiny_delta_uses_comparison_heap() {
        let g = WeightedDigraph::from_edges(3, [(0, 1, 1e-9), (1, 2, 0.5)]).unwrap();
        let r = solve_apsp(&g, QueueKind::Bucket).unwrap();
        assert_eq!(r.fallback, Some(FallbackReason::TinyDelta));
        assert!(close(r.dist(0, 2), 0.5 + 1e-9));
    }

    #[test]
    fn bucket_and_comparison_agree_with_dijkstra() {
        for seed in 0..5 {
            let g = WeightedDigraph::gen_complete(100, WeightModel::Uniform01, Seed(seed)).unwrap();
            let b = solve_apsp(&g, QueueKind::Bucket).unwrap();
            let c = solve_apsp(&g, QueueKind::Comparison).unwrap();
            for s in 0..g.n() {
                let (row, _) = dijkstra_sssp(&g, s);
                for t in 0..g.n() {
                    let want = row[t];
                    assert!((b.dist(s, t) - want).abs() <= 1e-9 * want.max(1e-300));
                    assert!((c.dist(s, t) - want).abs() <= 1e-9 * want.max(1e-300));
                }
            }
            assert_eq!(b.examined_lsp_count, c.examined_lsp_count);
            assert!(b.extension_list_entries <= 2 * 100 * 100);
            assert!(b.bucket_scan_steps <= (100 * 100) as u64 + b.heap_ops.inserts + b.heap_ops.decreases + b.heap_ops.extracts);
        }
    }

    #[test]
    fn integer_weights_still_give_exact_distances() {
        let g = WeightedDigraph::gen_complete(40, WeightModel::IntegerUniform { max: 40 }, Seed(3))
            .unwrap();
        let r = solve_apsp(&g, QueueKind::Bucket).unwrap();
        for s in 0..g.n() {
            let (row, _) = dijkstra_sssp(&g, s);
            for t in 0..g.n() {
                assert_eq!(r.dist(s, t), row[t]);
            }
        }
    }

    #[test]
    fn star_hub_dominates_essential_degree() {
        let n = 30;
        let mut g = WeightedDigraph::gen_complete(n, WeightModel::Uniform01, Seed(8)).unwrap();
        for v in 1..n {
            g.set_weight(0, v, 1e-3 * (1.0 + v as f64 / n as f64)).unwrap();
        }
        let r = solve_apsp(&g, QueueKind::Bucket).unwrap();
        let es = essential_subgraph(&r, &g);
        let direct: Vec<(usize, usize)> = g
            .edges()
            .filter(|&(u, v, w)| w <= r.dist(u, v) + 1e-12)
            .map(|(u, v, _)| (u, v))
            .collect();
        assert_eq!(es.edges, direct);
        let hub = es.edges.iter().filter(|(u, _)| *u == 0).count();
        assert_eq!(hub, n - 1);
        assert_eq!(es.max_out_degree, n - 1);
    }
}
