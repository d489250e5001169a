//! Brute-force ground truth: textbook Dijkstra, Floyd–Warshall and a direct
//! enumeration of locally shortest paths. Slow on purpose and independent of
//! the pair-queue machinery used by the solvers.

use alloc::collections::BinaryHeap;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::apsp::ApspResult;
use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::path_system::PathSystem;

/// Largest graph [`enumerate_lsps`] will accept.
pub const MAX_ENUMERATION_VERTICES: usize = 64;

/// Relative tolerance for distance comparisons.
pub const DIST_RTOL: f64 = 1e-9;

/// Absolute gap under which two candidate shortest paths count as tied.
pub const TIE_EPS: f64 = 1e-12;

/// Three-vertex fixture used throughout the tests.
///
/// Shortest paths: 0→1 (0.2), 1→2 (0.3), 2→0 (0.4), 0→1→2 (0.5),
/// 1→2→0 (0.7), 2→0→1 (0.6).
pub fn k3_fixture() -> WeightedDigraph {
    WeightedDigraph::from_edges(
        3,
        [
            (0, 1, 0.2),
            (1, 2, 0.3),
            (0, 2, 0.6),
            (1, 0, 0.9),
            (2, 0, 0.4),
            (2, 1, 0.8),
        ],
    )
    .expect("fixture is valid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    vertex: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source distances and shortest-path-tree parents.
pub fn dijkstra_sssp(g: &WeightedDigraph, source: usize) -> (Vec<f64>, Vec<Option<usize>>) {
    let (dist, parent, _) = dijkstra_with_order(g, source);
    (dist, parent)
}

fn dijkstra_with_order(
    g: &WeightedDigraph,
    source: usize,
) -> (Vec<f64>, Vec<Option<usize>>, Vec<usize>) {
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier { dist: 0.0, vertex: source });
    while let Some(Frontier { dist: d, vertex: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        order.push(u);
        for (v, w) in g.out_edges(u) {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = Some(u);
                heap.push(Frontier { dist: nd, vertex: v });
            }
        }
    }
    (dist, parent, order)
}

/// Row-major distance matrix from one Dijkstra run per source.
pub fn all_pairs_dijkstra(g: &WeightedDigraph) -> Vec<f64> {
    (0..g.n()).flat_map(|s| dijkstra_sssp(g, s).0).collect()
}

/// O(n³) Floyd–Warshall distance matrix.
pub fn floyd_warshall(g: &WeightedDigraph) -> Vec<f64> {
    let n = g.n();
    let mut d = g.weight_table().to_vec();
    for v in 0..n {
        d[v * n + v] = 0.0;
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if !dik.is_finite() {
                continue;
            }
            for j in 0..n {
                let cand = dik + d[k * n + j];
                if cand < d[i * n + j] {
                    d[i * n + j] = cand;
                }
            }
        }
    }
    d
}

/// `actual` equals `expected` up to [`DIST_RTOL`]; infinities must match.
pub fn dist_matches(actual: f64, expected: f64) -> bool {
    if actual.is_infinite() || expected.is_infinite() {
        return actual == expected;
    }
    (actual - expected).abs() <= DIST_RTOL * expected.abs().max(actual.abs())
}

/// One locally shortest path with at least one edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LspDescriptor {
    pub vertices: Vec<usize>,
    pub cost: f64,
}

struct SourceTree {
    dist: Vec<f64>,
    parent: Vec<Option<usize>>,
    first_hop: Vec<Option<usize>>,
}

impl SourceTree {
    fn build(g: &WeightedDigraph, s: usize) -> Result<Self> {
        let n = g.n();
        let (dist, parent, order) = dijkstra_with_order(g, s);
        for v in 0..n {
            if v == s || !dist[v].is_finite() {
                continue;
            }
            let tight = (0..n)
                .filter(|&x| x != v && dist[x].is_finite())
                .filter(|&x| {
                    g.weight(x, v)
                        .is_some_and(|w| (dist[x] + w - dist[v]).abs() <= TIE_EPS)
                })
                .count();
            if tight > 1 {
                return Err(Error::Ambiguous(alloc::format!(
                    "two shortest paths from {s} to {v} tie within {TIE_EPS}"
                )));
            }
        }
        let mut first_hop = vec![None; n];
        for &v in order.iter().skip(1) {
            let p = parent[v].expect("reached vertices have parents");
            first_hop[v] = if p == s { Some(v) } else { first_hop[p] };
        }
        Ok(Self { dist, parent, first_hop })
    }

    /// Vertices of the shortest path from the tree's source to `v`.
    fn path_to(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }
}

/// Every LSP of `g` with at least one edge, sorted by vertex sequence.
///
/// Each candidate is an edge `u → p` followed by the shortest path `p ⇝ v`;
/// it is kept when `u → p ⇝ q` (with `q` the penultimate vertex) is the
/// shortest `u ⇝ q` path. Cyclic LSPs (`u = v`) are included.
pub fn enumerate_lsps(g: &WeightedDigraph) -> Result<Vec<LspDescriptor>> {
    let n = g.n();
    if n > MAX_ENUMERATION_VERTICES {
        return Err(Error::OracleRefused(alloc::format!(
            "LSP enumeration limited to n <= {MAX_ENUMERATION_VERTICES}, got {n}"
        )));
    }
    let trees: Vec<SourceTree> = (0..n).map(|s| SourceTree::build(g, s)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for u in 0..n {
        for (p, w_up) in g.out_edges(u) {
            let from_p = &trees[p];
            for v in 0..n {
                if !from_p.dist[v].is_finite() {
                    continue;
                }
                if v != p {
                    let q = from_p.parent[v].expect("reachable");
                    if q == u || trees[u].first_hop[q] != Some(p) {
                        continue;
                    }
                }
                let mut vertices = Vec::with_capacity(2);
                vertices.push(u);
                vertices.extend(from_p.path_to(v));
                out.push(LspDescriptor {
                    vertices,
                    cost: w_up + from_p.dist[v],
                });
            }
        }
    }
    out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyMode {
    DistOnly,
    FullLsp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistMismatch {
    pub u: usize,
    pub v: usize,
    pub expected: f64,
    pub actual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LspCount {
    pub expected: u64,
    pub actual: u64,
}

/// Outcome of an oracle comparison. Mismatch lists are truncated to
/// [`OracleReport::MAX_LISTED`] entries each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub pass: bool,
    pub dist_mismatches: Vec<DistMismatch>,
    pub lsp_missing: Vec<Vec<usize>>,
    pub lsp_extra: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lsp_count: Option<LspCount>,
}

impl OracleReport {
    pub const MAX_LISTED: usize = 10;

    fn from_parts(
        dist_mismatches: Vec<DistMismatch>,
        lsp_missing: Vec<Vec<usize>>,
        lsp_extra: Vec<Vec<usize>>,
        lsp_count: Option<LspCount>,
    ) -> Self {
        let count_ok = lsp_count.is_none_or(|c| c.expected == c.actual);
        let pass =
            dist_mismatches.is_empty() && lsp_missing.is_empty() && lsp_extra.is_empty() && count_ok;
        Self {
            pass,
            dist_mismatches: cut(dist_mismatches),
            lsp_missing: cut(lsp_missing),
            lsp_extra: cut(lsp_extra),
            lsp_count,
        }
    }
}

fn cut<T>(mut v: Vec<T>) -> Vec<T> {
    v.truncate(OracleReport::MAX_LISTED);
    v
}

/// All entries of a row-major distance matrix that disagree with Dijkstra.
pub fn distance_mismatches(dist: &[f64], g: &WeightedDigraph) -> Vec<DistMismatch> {
    let n = g.n();
    let mut out = Vec::new();
    for u in 0..n {
        let (row, _) = dijkstra_sssp(g, u);
        for (v, &expected) in row.iter().enumerate() {
            let actual = dist[u * n + v];
            if !dist_matches(actual, expected) {
                out.push(DistMismatch { u, v, expected, actual });
            }
        }
    }
    out
}

fn check_full_size(g: &WeightedDigraph) -> Result<()> {
    if g.n() > MAX_ENUMERATION_VERTICES {
        return Err(Error::OracleRefused(
            "full LSP verification needs n <= 64".to_string(),
        ));
    }
    Ok(())
}

/// Checks a static solve: distances always, LSP count in full mode.
pub fn verify_static(result: &ApspResult, g: &WeightedDigraph, mode: VerifyMode) -> Result<OracleReport> {
    let dist = distance_mismatches(&result.dist, g);
    let count = match mode {
        VerifyMode::DistOnly => None,
        VerifyMode::FullLsp => {
            check_full_size(g)?;
            Some(LspCount {
                expected: enumerate_lsps(g)?.len() as u64,
                actual: result.lsp_count(),
            })
        }
    };
    Ok(OracleReport::from_parts(dist, Vec::new(), Vec::new(), count))
}

/// Checks a quiescent path system: distances always, the stored path set in
/// full mode.
pub fn verify_path_system(sys: &PathSystem, g: &WeightedDigraph, mode: VerifyMode) -> Result<OracleReport> {
    let dist = distance_mismatches(sys.dist_table(), g);
    let (missing, extra, count) = match mode {
        VerifyMode::DistOnly => (Vec::new(), Vec::new(), None),
        VerifyMode::FullLsp => {
            check_full_size(g)?;
            let expected = enumerate_lsps(g)?;
            let stored = sys.stored_lsps();
            let count = LspCount {
                expected: expected.len() as u64,
                actual: stored.len() as u64,
            };
            let (missing, extra) = diff_lsp_sets(&expected, &stored);
            (missing, extra, Some(count))
        }
    };
    Ok(OracleReport::from_parts(dist, missing, extra, count))
}

/// Multiset difference of two vertex-sorted LSP lists. A path present in
/// both with costs disagreeing beyond [`DIST_RTOL`] is reported as extra.
pub fn diff_lsp_sets(
    expected: &[LspDescriptor],
    actual: &[LspDescriptor],
) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let (mut i, mut j) = (0, 0);
    let (mut missing, mut extra) = (Vec::new(), Vec::new());
    while i < expected.len() || j < actual.len() {
        let ord = match (expected.get(i), actual.get(j)) {
            (Some(a), Some(b)) => a.vertices.cmp(&b.vertices),
            (Some(_), None) => Ordering::Less,
            (None, _) => Ordering::Greater,
        };
        match ord {
            Ordering::Less => {
                missing.push(expected[i].vertices.clone());
                i += 1;
            }
            Ordering::Greater => {
                extra.push(actual[j].vertices.clone());
                j += 1;
            }
            Ordering::Equal => {
                if !dist_matches(actual[j].cost, expected[i].cost) {
                    extra.push(actual[j].vertices.clone());
                }
                i += 1;
                j += 1;
            }
        }
    }
    (missing, extra)
}
