//! Reference constants and per-graph measurements.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::apsp::ApspResult;
use crate::error::{invalid, Result};
use crate::graph::pair_id;
use crate::NIL;

/// `|LSP| / n²` predicted for uniform weights on complete graphs.
pub const LSP_DENSITY_CONSTANT: f64 = core::f64::consts::PI * core::f64::consts::PI / 6.0 + 1.0;

/// `H_k = 1 + 1/2 + ... + 1/k`, summed from the small end for accuracy.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).rev().map(|i| 1.0 / i as f64).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    /// `H_{n-1} / (n-1)`: expected distance, and the probability that an
    /// edge is a shortest path.
    pub mean_distance: f64,
    /// `π² / (2n²)`.
    pub distance_variance: f64,
    /// `ln n`: expected edge count of a shortest path.
    pub ln_n: f64,
    /// `π²/6 + 1`.
    pub lsp_density: f64,
}

pub fn reference_values(n: usize) -> Result<ReferenceValues> {
    if n < 2 {
        return Err(invalid!("reference values need n >= 2, got {n}"));
    }
    let nf = n as f64;
    Ok(ReferenceValues {
        mean_distance: harmonic(n - 1) / (nf - 1.0),
        distance_variance: core::f64::consts::PI * core::f64::consts::PI / (2.0 * nf * nf),
        ln_n: libm::log(nf),
        lsp_density: LSP_DENSITY_CONSTANT,
    })
}

/// Mean, population variance, min and max of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of<I: IntoIterator<Item = f64>>(values: I) -> Self {
        // Welford keeps the variance accurate for n² samples.
        let mut count = 0usize;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for x in values {
            count += 1;
            let d = x - mean;
            mean += d / count as f64;
            m2 += d * (x - mean);
            min = min.min(x);
            max = max.max(x);
        }
        if count == 0 {
            return Self { count, mean: f64::NAN, variance: f64::NAN, min: f64::NAN, max: f64::NAN };
        }
        Self { count, mean, variance: m2 / count as f64, min, max }
    }
}

/// Finite off-diagonal distances.
pub fn distance_summary(result: &ApspResult) -> Summary {
    let n = result.n;
    Summary::of(
        result
            .dist
            .iter()
            .enumerate()
            .filter(|&(i, d)| i / n != i % n && d.is_finite())
            .map(|(_, &d)| d),
    )
}

/// Edge count of every reachable off-diagonal shortest path, obtained by
/// following second-vertex pointers. `hops[u*n + v]` is 0 on the diagonal
/// and for unreachable pairs.
pub fn hop_counts(result: &ApspResult) -> Vec<u32> {
    let n = result.n;
    let second = result.second_table();
    let mut hops = vec![0u32; n * n];
    let mut known = vec![false; n * n];
    let mut chain = Vec::new();
    for v in 0..n {
        known[pair_id(n, v, v)] = true;
        for u in 0..n {
            let start = pair_id(n, u, v);
            if known[start] {
                continue;
            }
            // Walk until a known pair, then unwind.
            chain.clear();
            let mut x = u;
            let mut base = 0;
            loop {
                let id = pair_id(n, x, v);
                if known[id] {
                    base = hops[id];
                    break;
                }
                let next = second[id];
                if next == NIL {
                    known[id] = true;
                    break;
                }
                chain.push(id);
                x = next as usize;
            }
            for &id in chain.iter().rev() {
                base += 1;
                hops[id] = base;
                known[id] = true;
            }
        }
    }
    hops
}

/// Mean edge count over reachable off-diagonal pairs.
pub fn mean_hops(result: &ApspResult) -> f64 {
    let n = result.n;
    let hops = hop_counts(result);
    Summary::of(
        (0..n * n)
            .filter(|&i| i / n != i % n && result.dist[i].is_finite())
            .map(|i| f64::from(hops[i])),
    )
    .mean
}

/// `Ball(a, r)` sizes averaged over sources, for `r = α ln n / n`. The ball
/// includes `a` itself.
pub fn mean_ball_sizes(result: &ApspResult, alphas: &[f64]) -> Vec<f64> {
    let n = result.n;
    let scale = libm::log(n as f64) / n as f64;
    alphas
        .iter()
        .map(|&alpha| {
            let r = alpha * scale;
            let total = result.dist.iter().filter(|&&d| d <= r).count();
            total as f64 / n as f64
        })
        .collect()
}

/// α grid for ball-size measurements.
pub const BALL_ALPHAS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apsp::{solve_apsp, QueueKind};
    use crate::graph::WeightedDigraph;
    use crate::oracle::k3_fixture;

    #[test]
    fn reference_examples() {
        assert_eq!(reference_values(2).unwrap().mean_distance, 1.0);
        assert!((reference_values(3).unwrap().mean_distance - 0.75).abs() < 1e-15);
        assert!((reference_values(5).unwrap().mean_distance - 25.0 / 48.0).abs() < 1e-15);
        for n in [2, 17, 1000] {
            let r = reference_values(n).unwrap();
            assert!((r.ln_n - libm::log(n as f64)).abs() <= 1e-12);
            assert!((r.lsp_density - 2.644934).abs() < 1e-6);
        }
        assert!(reference_values(1).is_err());
    }

    #[test]
    fn summary_matches_two_pass() {
        let xs = [0.5, 1.5, 2.0, 4.0];
        let s = Summary::of(xs);
        let mean = xs.iter().sum::<f64>() / 4.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
        assert!((s.mean - mean).abs() < 1e-15 && (s.variance - var).abs() < 1e-15);
        assert_eq!((s.min, s.max, s.count), (0.5, 4.0, 4));
        assert!(Summary::of([]).mean.is_nan());
    }

    #[test]
    fn k3_hops_and_distances() {
        let res = solve_apsp(&k3_fixture(), QueueKind::Bucket).unwrap();
        let hops = hop_counts(&res);
        // 0→1→2, 1→2→0 and 2→0→1 have two edges; the rest one.
        assert_eq!(hops, vec![0, 1, 2, 2, 0, 1, 1, 2, 0]);
        assert!((mean_hops(&res) - 1.5).abs() < 1e-15);
        let d = distance_summary(&res);
        assert_eq!(d.count, 6);
        assert!((d.mean - (0.2 + 0.5 + 0.7 + 0.3 + 0.4 + 0.6) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn hops_skip_unreachable() {
        let g = WeightedDigraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let res = solve_apsp(&g, QueueKind::Comparison).unwrap();
        assert_eq!(hop_counts(&res), vec![0, 1, 2, 0, 0, 1, 0, 0, 0]);
        assert!((mean_hops(&res) - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn balls_grow_with_radius() {
        let g = WeightedDigraph::from_edges(2, [(0, 1, 0.1), (1, 0, 0.5)]).unwrap();
        let res = solve_apsp(&g, QueueKind::Bucket).unwrap();
        // ln 2 / 2 ≈ 0.347: radius 0.0866, 0.173, 0.26, 0.347.
        assert_eq!(mean_ball_sizes(&res, &BALL_ALPHAS), vec![1.0, 1.5, 1.5, 1.5]);
    }
}
