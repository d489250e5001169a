//! Dense weighted digraphs and seeded random instance generators.

use alloc::vec;
use alloc::vec::Vec;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest vertex count for which `u * n + v` pair ids fit in a `u32`.
pub const MAX_VERTICES: usize = 65_535;

// Independent PRNG streams derived from one seed.
const STREAM_WEIGHTS: u64 = 0;
const STREAM_PRESENCE: u64 = 1;
const STREAM_UPDATE_EDGE: u64 = 2;
const STREAM_UPDATE_WEIGHT: u64 = 3;

/// Seed for a deterministic pseudo-random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    fn stream(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

/// Distribution of i.i.d. edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightModel {
    /// Uniform on the open interval (0, 1).
    Uniform01,
    /// Exponential with mean 1.
    Exponential1,
    /// Uniform on the integers `1..=max`.
    IntegerUniform { max: u32 },
}

impl WeightModel {
    pub fn validate(self) -> Result<()> {
        match self {
            WeightModel::IntegerUniform { max: 0 } => {
                Err(invalid!("integer weight model needs max >= 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            WeightModel::Uniform01 => rng.sample(Open01),
            WeightModel::Exponential1 => {
                let u: f64 = rng.sample(Open01);
                -libm::log(u)
            }
            WeightModel::IntegerUniform { max } => f64::from(rng.gen_range(1..=max)),
        }
    }

    /// Whether exact ties between path costs have probability zero.
    pub fn is_continuous(self) -> bool {
        !matches!(self, WeightModel::IntegerUniform { .. })
    }
}

/// Directed graph on `n` vertices stored as a dense `n × n` weight table.
///
/// Absent edges (including every self-loop) hold `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    weights: Vec<f64>,
    edges: usize,
}

fn check_weight(u: usize, v: usize, w: f64) -> Result<()> {
    if !(w.is_finite() && w > 0.0) {
        return Err(invalid!("edge ({u},{v}) has non-positive or non-finite weight {w}"));
    }
    Ok(())
}

impl WeightedDigraph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(invalid!("n = {n} exceeds the supported maximum {MAX_VERTICES}"));
        }
        Ok(Self {
            n,
            weights: vec![f64::INFINITY; n * n],
            edges: 0,
        })
    }

    /// Builds a graph from `(u, v, w)` triples, rejecting self-loops,
    /// duplicates, out-of-range vertices and non-positive weights.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = Self::empty(n)?;
        for (u, v, w) in edges {
            if g.has_edge(u, v) {
                return Err(invalid!("duplicate edge ({u},{v})"));
            }
            g.insert_edge(u, v, w)?;
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Weight of `u → v`, or `None` when absent.
    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let w = self.weights[u * self.n + v];
        w.is_finite().then_some(w)
    }

    /// Raw table entry; `INFINITY` when absent.
    #[inline]
    pub fn raw_weight(&self, u: usize, v: usize) -> f64 {
        self.weights[u * self.n + v]
    }

    /// Row-major `n × n` weight table.
    pub fn weight_table(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.weights[u * self.n + v].is_finite()
    }

    pub fn is_complete(&self) -> bool {
        self.edges == self.n * self.n.saturating_sub(1)
    }

    /// Present edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_finite())
            .map(move |(i, &w)| (i / n, i % n, w))
    }

    /// Out-neighbours of `u` with weights.
    pub fn out_edges(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights[u * self.n..(u + 1) * self.n]
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_finite())
            .map(|(v, &w)| (v, w))
    }

    /// Smallest present edge weight, `None` for an edgeless graph.
    pub fn min_weight(&self) -> Option<f64> {
        self.edges().map(|(_, _, w)| w).reduce(f64::min)
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(invalid!("edge ({u},{v}) out of range for n = {}", self.n));
        }
        if u == v {
            return Err(invalid!("self-loop at vertex {u}"));
        }
        Ok(())
    }

    /// Adds an absent edge.
    pub fn insert_edge(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        self.check_pair(u, v)?;
        check_weight(u, v, w)?;
        if self.has_edge(u, v) {
            return Err(invalid!("edge ({u},{v}) already present"));
        }
        self.weights[u * self.n + v] = w;
        self.edges += 1;
        Ok(())
    }

    /// Changes the weight of a present edge.
    pub fn set_weight(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        self.check_pair(u, v)?;
        check_weight(u, v, w)?;
        if !self.has_edge(u, v) {
            return Err(invalid!("edge ({u},{v}) is absent"));
        }
        self.weights[u * self.n + v] = w;
        Ok(())
    }

    /// Removes a present edge, returning its weight.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<f64> {
        self.check_pair(u, v)?;
        let w = self
            .weight(u, v)
            .ok_or_else(|| invalid!("edge ({u},{v}) is absent"))?;
        self.weights[u * self.n + v] = f64::INFINITY;
        self.edges -= 1;
        Ok(w)
    }

    /// Complete digraph with i.i.d. weights drawn from `model`.
    pub fn gen_complete(n: usize, model: WeightModel, seed: Seed) -> Result<Self> {
        if n < 2 {
            return Err(invalid!("complete graph needs n >= 2, got {n}"));
        }
        Self::gen_gnp(n, 1.0, model, seed)
    }

    /// Directed G(n, p): each off-diagonal edge present independently with
    /// probability `p`.
    ///
    /// A weight is drawn for every ordered pair whether or not the edge is
    /// kept, so `p = 1` reproduces [`gen_complete`](Self::gen_complete).
    pub fn gen_gnp(n: usize, p: f64, model: WeightModel, seed: Seed) -> Result<Self> {
        if n < 2 {
            return Err(invalid!("G(n,p) needs n >= 2, got {n}"));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(invalid!("edge probability must lie in (0, 1], got {p}"));
        }
        model.validate()?;
        let mut g = Self::empty(n)?;
        let mut weight_rng = seed.stream(STREAM_WEIGHTS);
        let mut presence_rng = seed.stream(STREAM_PRESENCE);
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let w = model.sample(&mut weight_rng);
                let keep = presence_rng.gen::<f64>() < p;
                if keep {
                    g.weights[u * n + v] = w;
                    g.edges += 1;
                }
            }
        }
        Ok(g)
    }
}

/// Draws random edge updates: a uniformly chosen ordered pair of a complete
/// graph and a fresh weight, from two independent streams.
#[derive(Debug, Clone)]
pub struct EdgeUpdateSampler {
    n: usize,
    model: WeightModel,
    edge_rng: ChaCha8Rng,
    weight_rng: ChaCha8Rng,
}

impl EdgeUpdateSampler {
    pub fn new(g: &WeightedDigraph, model: WeightModel, seed: Seed) -> Result<Self> {
        if g.n() < 2 || !g.is_complete() {
            return Err(invalid!("random edge updates are defined on complete graphs only"));
        }
        model.validate()?;
        Ok(Self {
            n: g.n(),
            model,
            edge_rng: seed.stream(STREAM_UPDATE_EDGE),
            weight_rng: seed.stream(STREAM_UPDATE_WEIGHT),
        })
    }

    pub fn next_update(&mut self) -> ((usize, usize), f64) {
        let n = self.n;
        let idx = self.edge_rng.gen_range(0..n * (n - 1));
        let u = idx / (n - 1);
        let r = idx % (n - 1);
        let v = if r >= u { r + 1 } else { r };
        ((u, v), self.model.sample(&mut self.weight_rng))
    }
}

/// First update of an [`EdgeUpdateSampler`] seeded with `seed`.
pub fn sample_edge_update(
    g: &WeightedDigraph,
    model: WeightModel,
    seed: Seed,
) -> Result<((usize, usize), f64)> {
    Ok(EdgeUpdateSampler::new(g, model, seed)?.next_update())
}

/// Secondary edge cost used only to break exact ties between path costs.
///
/// Paths are compared by `(cost, sum of tie keys)`. The keys are fixed
/// pseudo-random 40-bit integers per ordered pair, so sums are exact and the
/// order behaves like an infinitesimal generic perturbation of the weights:
/// shortest paths become unique and subpaths of shortest paths stay shortest
/// even when weights repeat.
#[inline]
pub(crate) fn tie_key(u: usize, v: usize) -> u64 {
    let mut z = ((u as u64) << 32 | v as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (z ^ (z >> 31)) >> 24
}

/// Index of the ordered pair `(u, v)` in an `n × n` table.
#[inline]
pub(crate) fn pair_id(n: usize, u: usize, v: usize) -> usize {
    u * n + v
}
