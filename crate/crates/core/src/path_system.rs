//! Fully dynamic APSP that stores every locally shortest path.
//!
//! Paths live in an arena and are shared structurally: a path with at least
//! two edges points at `l` (itself minus its last edge) and `r` (itself minus
//! its first edge). Every node can sit in five intrusive lists at once:
//!
//! | membership    | list                        |
//! |---------------|-----------------------------|
//! | local heap    | `P[start, end]`             |
//! | left ext.     | `L[r]`                      |
//! | right ext.    | `R[l]`                      |
//! | short left    | `SL[r]` (only while `sp`)   |
//! | short right   | `SR[l]` (only while `sp`)   |
//!
//! so detaching a node is O(1) and an update costs time proportional to the
//! paths it destroys and creates.
//!
//! An update removes every path through a changed edge (recording pairs that
//! lost their shortest path), reseeds those pairs from their local heaps,
//! re-creates the edges with their new weights and then runs the same
//! label-setting loop as the static solver.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bucket_queue::{IndexedHeap, PairQueue};
use crate::error::{invalid, structural, Result};
use crate::graph::{pair_id, tie_key, WeightedDigraph};
use crate::oracle::LspDescriptor;
use crate::NIL;

/// Stable id of a path in the arena. Ids of removed paths are reused after
/// the operation that removed them completes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathHandle(u32);

impl PathHandle {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Path constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// Zero-edge path at a vertex.
    Vertex(usize),
    /// One-edge path over a present edge.
    Edge(usize, usize),
    /// First edge of the left path followed by the right path; requires
    /// `r[left] == l[right]`.
    Join(PathHandle, PathHandle),
}

/// Per-update churn counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChurnReport {
    /// Shortest paths destroyed (removed, or demoted by a cheaper path).
    pub sp_minus: u64,
    /// Shortest paths created, one per extraction from the global heap.
    pub sp_plus: u64,
    /// Stored paths removed.
    pub lsp_minus: u64,
    /// Stored paths created.
    pub lsp_plus: u64,
    /// Largest local heap touched during the update.
    pub lambda: u64,
}

/// Read-only view of one stored path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathView {
    pub start: usize,
    pub end: usize,
    pub cost: f64,
    pub sp: bool,
    pub edges: usize,
    pub left: Option<PathHandle>,
    pub right: Option<PathHandle>,
    /// `(start, second vertex)`; `None` for a vertex path.
    pub first_edge: Option<(usize, usize)>,
    /// `(penultimate vertex, end)`; `None` for a vertex path.
    pub last_edge: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Local = 0,
    Left = 1,
    Right = 2,
    ShortLeft = 3,
    ShortRight = 4,
}

// Lists a node owns, indexed by the member slot they thread through
// (slot - 1): L, R, SL, SR.
const OWNED_LEFT: usize = 0;
const OWNED_RIGHT: usize = 1;
const OWNED_SHORT_LEFT: usize = 2;
const OWNED_SHORT_RIGHT: usize = 3;

#[derive(Debug, Clone, Copy)]
enum Owner {
    Local(usize),
    Node(u32, usize),
}

#[derive(Debug, Clone)]
struct Node {
    l: u32,
    r: u32,
    start: u32,
    end: u32,
    second: u32,
    penultimate: u32,
    cost: f64,
    /// Exact secondary cost for breaking ties, see the static solver.
    tie: u64,
    edges: u32,
    sp: bool,
    alive: bool,
    members: u8,
    heads: [u32; 4],
    prev: [u32; 5],
    next: [u32; 5],
}

impl Node {
    fn blank() -> Self {
        Self {
            l: NIL,
            r: NIL,
            start: NIL,
            end: NIL,
            second: NIL,
            penultimate: NIL,
            cost: 0.0,
            tie: 0,
            edges: 0,
            sp: false,
            alive: false,
            members: 0,
            heads: [NIL; 4],
            prev: [NIL; 5],
            next: [NIL; 5],
        }
    }

    #[inline]
    fn is_member(&self, slot: Slot) -> bool {
        self.members & (1 << slot as u8) != 0
    }
}

/// The dynamic all-pairs shortest path structure.
#[derive(Debug, Clone)]
pub struct PathSystem {
    n: usize,
    weights: Vec<f64>,
    edge_count: usize,
    nodes: Vec<Node>,
    free: Vec<u32>,
    pending_free: Vec<u32>,
    vertex_path: Vec<u32>,
    edge_path: Vec<u32>,
    best: Vec<u32>,
    dist: Vec<f64>,
    dist_tie: Vec<u64>,
    local_head: Vec<u32>,
    local_len: Vec<u32>,
    queue: IndexedHeap,
    affected: Vec<u32>,
    in_affected: Vec<bool>,
    churn: ChurnReport,
    stored: usize,
    removal_stack: Vec<u32>,
    scratch: Vec<u32>,
}

impl PathSystem {
    /// System holding only the vertex paths and `dist[v, v] = 0`; no edge has
    /// been turned into a path yet.
    pub fn with_vertices(g: &WeightedDigraph) -> Result<Self> {
        let n = g.n();
        let mut sys = Self {
            n,
            weights: g.weight_table().to_vec(),
            edge_count: g.edge_count(),
            nodes: Vec::new(),
            free: Vec::new(),
            pending_free: Vec::new(),
            vertex_path: vec![NIL; n],
            edge_path: vec![NIL; n * n],
            best: vec![NIL; n * n],
            dist: vec![f64::INFINITY; n * n],
            dist_tie: vec![0; n * n],
            local_head: vec![NIL; n * n],
            local_len: vec![0; n * n],
            queue: IndexedHeap::new(n * n),
            affected: Vec::new(),
            in_affected: vec![false; n * n],
            churn: ChurnReport::default(),
            stored: 0,
            removal_stack: Vec::new(),
            scratch: Vec::new(),
        };
        for v in 0..n {
            let h = sys.concat(PathKind::Vertex(v))?;
            sys.vertex_path[v] = h.0;
            sys.best[pair_id(n, v, v)] = h.0;
            sys.dist[pair_id(n, v, v)] = 0.0;
        }
        Ok(sys)
    }

    /// Builds the complete path system of `g`.
    pub fn init(g: &WeightedDigraph) -> Result<Self> {
        let mut sys = Self::with_vertices(g)?;
        for (u, v, _) in g.edges() {
            let h = sys.concat(PathKind::Edge(u, v))?;
            sys.examine(h)?;
        }
        sys.build_paths()?;
        sys.reclaim();
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dist(&self, u: usize, v: usize) -> f64 {
        self.dist[pair_id(self.n, u, v)]
    }

    /// Row-major distance matrix.
    pub fn dist_table(&self) -> &[f64] {
        &self.dist
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let w = self.weights[pair_id(self.n, u, v)];
        w.is_finite().then_some(w)
    }

    /// The graph the system currently represents.
    pub fn graph(&self) -> WeightedDigraph {
        let n = self.n;
        WeightedDigraph::from_edges(
            n,
            self.weights
                .iter()
                .enumerate()
                .filter(|(_, w)| w.is_finite())
                .map(|(i, &w)| (i / n, i % n, w)),
        )
        .expect("stored weights are valid")
    }

    /// Counters accumulated since the last update (or since init).
    pub fn churn(&self) -> ChurnReport {
        self.churn
    }

    /// Number of stored paths with at least one edge.
    pub fn stored_path_count(&self) -> usize {
        self.stored
    }

    pub fn best_path(&self, u: usize, v: usize) -> Option<PathHandle> {
        let h = self.best[pair_id(self.n, u, v)];
        (h != NIL).then_some(PathHandle(h))
    }

    pub fn vertex_path(&self, v: usize) -> PathHandle {
        PathHandle(self.vertex_path[v])
    }

    pub fn edge_path(&self, u: usize, v: usize) -> Option<PathHandle> {
        let h = self.edge_path[pair_id(self.n, u, v)];
        (h != NIL).then_some(PathHandle(h))
    }

    pub fn is_alive(&self, h: PathHandle) -> bool {
        self.nodes.get(h.index()).is_some_and(|x| x.alive)
    }

    pub fn path(&self, h: PathHandle) -> Option<PathView> {
        let x = self.nodes.get(h.index()).filter(|x| x.alive)?;
        let opt = |id: u32| (id != NIL).then_some(PathHandle(id));
        let trivial = x.edges == 0;
        Some(PathView {
            start: x.start as usize,
            end: x.end as usize,
            cost: x.cost,
            sp: x.sp,
            edges: x.edges as usize,
            left: opt(x.l),
            right: opt(x.r),
            first_edge: (!trivial).then_some((x.start as usize, x.second as usize)),
            last_edge: (!trivial).then_some((x.penultimate as usize, x.end as usize)),
        })
    }

    fn list(&self, head: u32, slot: Slot) -> Vec<PathHandle> {
        let mut out = Vec::new();
        let mut cur = head;
        while cur != NIL {
            out.push(PathHandle(cur));
            cur = self.nodes[cur as usize].next[slot as usize];
        }
        out
    }

    /// Paths currently stored in the local heap `P[u, v]`.
    pub fn local_heap(&self, u: usize, v: usize) -> Vec<PathHandle> {
        self.list(self.local_head[pair_id(self.n, u, v)], Slot::Local)
    }

    /// `L[h]`: stored paths whose right subpath is `h`.
    pub fn left_extensions(&self, h: PathHandle) -> Vec<PathHandle> {
        self.list(self.nodes[h.index()].heads[OWNED_LEFT], Slot::Left)
    }

    /// `R[h]`: stored paths whose left subpath is `h`.
    pub fn right_extensions(&self, h: PathHandle) -> Vec<PathHandle> {
        self.list(self.nodes[h.index()].heads[OWNED_RIGHT], Slot::Right)
    }

    /// `SL[h]`: left extensions of `h` that are shortest paths.
    pub fn short_left_extensions(&self, h: PathHandle) -> Vec<PathHandle> {
        self.list(self.nodes[h.index()].heads[OWNED_SHORT_LEFT], Slot::ShortLeft)
    }

    /// `SR[h]`: right extensions of `h` that are shortest paths.
    pub fn short_right_extensions(&self, h: PathHandle) -> Vec<PathHandle> {
        self.list(self.nodes[h.index()].heads[OWNED_SHORT_RIGHT], Slot::ShortRight)
    }

    /// Pairs recorded as having lost their shortest path and not yet
    /// reseeded.
    pub fn affected_pairs(&self) -> Vec<(usize, usize)> {
        self.affected
            .iter()
            .map(|&p| (p as usize / self.n, p as usize % self.n))
            .collect()
    }

    /// Largest local heap in the whole system.
    pub fn max_local_heap(&self) -> usize {
        self.local_len.iter().copied().max().unwrap_or(0) as usize
    }

    /// Vertex sequence of a stored path.
    pub fn path_vertices(&self, h: PathHandle) -> Vec<usize> {
        let mut x = &self.nodes[h.index()];
        let mut out = Vec::with_capacity(x.edges as usize + 1);
        out.push(x.start as usize);
        while x.edges > 0 {
            x = &self.nodes[x.r as usize];
            out.push(x.start as usize);
        }
        out
    }

    /// All stored paths with at least one edge, sorted by vertex sequence.
    pub fn stored_lsps(&self) -> Vec<LspDescriptor> {
        let mut out: Vec<LspDescriptor> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, x)| x.alive && x.edges > 0)
            .map(|(i, x)| LspDescriptor {
                vertices: self.path_vertices(PathHandle(i as u32)),
                cost: x.cost,
            })
            .collect();
        out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
        out
    }

    // ----- intrusive list plumbing -------------------------------------

    fn owner(&self, x: u32, slot: Slot) -> Owner {
        let node = &self.nodes[x as usize];
        match slot {
            Slot::Local => Owner::Local(pair_id(self.n, node.start as usize, node.end as usize)),
            Slot::Left => Owner::Node(node.r, OWNED_LEFT),
            Slot::Right => Owner::Node(node.l, OWNED_RIGHT),
            Slot::ShortLeft => Owner::Node(node.r, OWNED_SHORT_LEFT),
            Slot::ShortRight => Owner::Node(node.l, OWNED_SHORT_RIGHT),
        }
    }

    fn head(&self, owner: Owner) -> u32 {
        match owner {
            Owner::Local(pair) => self.local_head[pair],
            Owner::Node(id, list) => self.nodes[id as usize].heads[list],
        }
    }

    fn set_head(&mut self, owner: Owner, value: u32) {
        match owner {
            Owner::Local(pair) => self.local_head[pair] = value,
            Owner::Node(id, list) => self.nodes[id as usize].heads[list] = value,
        }
    }

    fn link(&mut self, x: u32, slot: Slot) {
        let s = slot as usize;
        let owner = self.owner(x, slot);
        let head = self.head(owner);
        {
            let node = &mut self.nodes[x as usize];
            node.next[s] = head;
            node.prev[s] = NIL;
            node.members |= 1 << s;
        }
        if head != NIL {
            self.nodes[head as usize].prev[s] = x;
        }
        self.set_head(owner, x);
    }

    fn unlink(&mut self, x: u32, slot: Slot) {
        let s = slot as usize;
        if !self.nodes[x as usize].is_member(slot) {
            return;
        }
        let owner = self.owner(x, slot);
        let (prev, next) = {
            let node = &mut self.nodes[x as usize];
            node.members &= !(1 << s);
            let links = (node.prev[s], node.next[s]);
            node.prev[s] = NIL;
            node.next[s] = NIL;
            links
        };
        if prev != NIL {
            self.nodes[prev as usize].next[s] = next;
        } else {
            self.set_head(owner, next);
        }
        if next != NIL {
            self.nodes[next as usize].prev[s] = prev;
        }
    }

    fn collect_list(&self, head: u32, slot: Slot, into: &mut Vec<u32>) {
        let mut cur = head;
        while cur != NIL {
            into.push(cur);
            cur = self.nodes[cur as usize].next[slot as usize];
        }
    }

    fn alloc(&mut self, node: Node) -> u32 {
        match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    fn live(&self, h: PathHandle) -> Result<&Node> {
        match self.nodes.get(h.index()) {
            Some(x) if x.alive => Ok(x),
            _ => Err(structural!("unknown or removed path handle {}", h.0)),
        }
    }

    fn note_lambda(&mut self, size: u32) {
        self.churn.lambda = self.churn.lambda.max(u64::from(size));
    }

    // ----- path operations ----------------------------------------------

    /// Creates a path. Edge and join paths are linked into the extension
    /// lists of their subpaths but not into a local heap; that happens in
    /// [`examine`](Self::examine).
    pub fn concat(&mut self, kind: PathKind) -> Result<PathHandle> {
        let n = self.n;
        let node = match kind {
            PathKind::Vertex(v) => {
                if v >= n {
                    return Err(invalid!("vertex {v} out of range"));
                }
                Node {
                    start: v as u32,
                    end: v as u32,
                    sp: true,
                    alive: true,
                    ..Node::blank()
                }
            }
            PathKind::Edge(u, v) => {
                if u >= n || v >= n || !self.weights[pair_id(n, u, v)].is_finite() {
                    return Err(invalid!("no edge ({u},{v}) to build a path from"));
                }
                let pair = pair_id(n, u, v);
                if self.edge_path[pair] != NIL && self.nodes[self.edge_path[pair] as usize].alive {
                    return Err(structural!("edge ({u},{v}) already has a path"));
                }
                Node {
                    l: self.vertex_path[u],
                    r: self.vertex_path[v],
                    start: u as u32,
                    end: v as u32,
                    second: v as u32,
                    penultimate: u as u32,
                    cost: self.weights[pair],
                    tie: tie_key(u, v),
                    edges: 1,
                    alive: true,
                    ..Node::blank()
                }
            }
            PathKind::Join(left, right) => {
                let a = self.live(left)?;
                let b = self.live(right)?;
                if a.edges == 0 || b.edges == 0 || a.r != b.l {
                    return Err(structural!(
                        "cannot join paths {} and {}: r[left] != l[right]",
                        left.0,
                        right.0
                    ));
                }
                Node {
                    l: left.0,
                    r: right.0,
                    start: a.start,
                    end: b.end,
                    second: a.second,
                    penultimate: b.penultimate,
                    cost: self.weights[pair_id(n, a.start as usize, a.second as usize)] + b.cost,
                    tie: tie_key(a.start as usize, a.second as usize) + b.tie,
                    edges: b.edges + 1,
                    alive: true,
                    ..Node::blank()
                }
            }
        };
        let is_path = node.edges > 0;
        let id = self.alloc(node);
        if is_path {
            if let PathKind::Edge(u, v) = kind {
                self.edge_path[pair_id(n, u, v)] = id;
            }
            self.link(id, Slot::Left);
            self.link(id, Slot::Right);
            self.churn.lsp_plus += 1;
            self.stored += 1;
        }
        Ok(PathHandle(id))
    }

    /// Files a newly created path in its local heap and makes it the pair's
    /// best path if it is cheaper than the current one. The displaced path
    /// loses its shortest-path status and all of its extensions.
    pub fn examine(&mut self, h: PathHandle) -> Result<()> {
        let x = self.live(h)?;
        if x.edges == 0 || x.is_member(Slot::Local) {
            return Err(structural!("path {} cannot be examined", h.0));
        }
        let pair = pair_id(self.n, x.start as usize, x.end as usize);
        let (cost, tie) = (x.cost, x.tie);
        self.link(h.0, Slot::Local);
        self.local_len[pair] += 1;
        self.note_lambda(self.local_len[pair]);
        let current = self.dist[pair];
        if cost < current || (cost == current && tie < self.dist_tie[pair]) {
            let old = self.best[pair];
            if old != NIL && self.nodes[old as usize].alive {
                self.demote(old);
                self.remove_extensions(old, false);
            }
            self.best[pair] = h.0;
            self.dist[pair] = cost;
            self.dist_tie[pair] = tie;
            self.queue.insert_or_decrease(pair, cost)?;
        }
        Ok(())
    }

    fn demote(&mut self, id: u32) {
        if self.nodes[id as usize].sp {
            self.nodes[id as usize].sp = false;
            self.unlink(id, Slot::ShortLeft);
            self.unlink(id, Slot::ShortRight);
            self.churn.sp_minus += 1;
        }
    }

    /// Marks `h` as a shortest path and examines every LSP obtained by
    /// joining it with a shortest path on either side.
    pub fn new_shortest_path(&mut self, h: PathHandle) -> Result<()> {
        let x = self.live(h)?;
        if x.edges == 0 {
            return Err(structural!("vertex paths are permanently shortest"));
        }
        let (l, r) = (x.l, x.r);
        self.nodes[h.index()].sp = true;
        self.link(h.0, Slot::ShortLeft);
        self.link(h.0, Slot::ShortRight);

        let mut scratch = core::mem::take(&mut self.scratch);
        scratch.clear();
        self.collect_list(self.nodes[l as usize].heads[OWNED_SHORT_LEFT], Slot::ShortLeft, &mut scratch);
        for &other in &scratch {
            if self.nodes[other as usize].alive && self.nodes[other as usize].sp {
                let joined = self.concat(PathKind::Join(PathHandle(other), h))?;
                self.examine(joined)?;
            }
        }
        scratch.clear();
        self.collect_list(self.nodes[r as usize].heads[OWNED_SHORT_RIGHT], Slot::ShortRight, &mut scratch);
        for &other in &scratch {
            if self.nodes[other as usize].alive && self.nodes[other as usize].sp {
                let joined = self.concat(PathKind::Join(h, PathHandle(other)))?;
                self.examine(joined)?;
            }
        }
        self.scratch = scratch;
        Ok(())
    }

    /// Removes `h` and, recursively, every stored path extending it. With
    /// `rep`, pairs whose shortest path is removed are recorded for
    /// [`replace_path`](Self::replace_path).
    pub fn remove_path(&mut self, h: PathHandle, rep: bool) -> Result<()> {
        let x = self.live(h)?;
        if x.edges == 0 {
            return Err(structural!("vertex paths cannot be removed"));
        }
        self.removal_stack.push(h.0);
        self.drain_removals(rep);
        Ok(())
    }

    fn remove_extensions(&mut self, id: u32, rep: bool) {
        let mut stack = core::mem::take(&mut self.removal_stack);
        let node = &self.nodes[id as usize];
        let (left, right) = (node.heads[OWNED_LEFT], node.heads[OWNED_RIGHT]);
        self.collect_list(left, Slot::Left, &mut stack);
        self.collect_list(right, Slot::Right, &mut stack);
        self.removal_stack = stack;
        self.drain_removals(rep);
    }

    fn drain_removals(&mut self, rep: bool) {
        let mut stack = core::mem::take(&mut self.removal_stack);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if !node.alive {
                continue;
            }
            let pair = pair_id(self.n, node.start as usize, node.end as usize);
            let was_sp = node.sp;
            let is_edge = node.edges == 1;
            if node.is_member(Slot::Local) {
                self.note_lambda(self.local_len[pair]);
                self.local_len[pair] -= 1;
                self.unlink(id, Slot::Local);
            }
            self.unlink(id, Slot::Right);
            self.unlink(id, Slot::Left);
            if was_sp {
                if rep && !self.in_affected[pair] {
                    self.in_affected[pair] = true;
                    self.affected.push(pair as u32);
                }
                self.unlink(id, Slot::ShortRight);
                self.unlink(id, Slot::ShortLeft);
                self.churn.sp_minus += 1;
            }
            if is_edge && self.edge_path[pair] == id {
                self.edge_path[pair] = NIL;
            }
            {
                let node = &mut self.nodes[id as usize];
                node.alive = false;
                node.sp = false;
            }
            self.churn.lsp_minus += 1;
            self.stored -= 1;
            self.pending_free.push(id);
            let node = &self.nodes[id as usize];
            let (left, right) = (node.heads[OWNED_LEFT], node.heads[OWNED_RIGHT]);
            self.collect_list(left, Slot::Left, &mut stack);
            self.collect_list(right, Slot::Right, &mut stack);
        }
        self.removal_stack = stack;
    }

    /// Reseeds a pair from the cheapest path left in its local heap.
    pub fn replace_path(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(invalid!("pair ({u},{v}) out of range"));
        }
        let pair = pair_id(self.n, u, v);
        let mut best = NIL;
        let mut best_cost = f64::INFINITY;
        let mut best_tie = 0;
        let mut cur = self.local_head[pair];
        while cur != NIL {
            let node = &self.nodes[cur as usize];
            if best == NIL || node.cost < best_cost || (node.cost == best_cost && node.tie < best_tie) {
                best = cur;
                best_cost = node.cost;
                best_tie = node.tie;
            }
            cur = node.next[Slot::Local as usize];
        }
        if best != NIL {
            self.best[pair] = best;
            self.dist[pair] = best_cost;
            self.dist_tie[pair] = best_tie;
            self.queue.insert_or_decrease(pair, best_cost)?;
        } else if u != v {
            self.best[pair] = NIL;
            self.dist[pair] = f64::INFINITY;
        }
        Ok(())
    }

    /// Label-setting loop: finalizes pairs in cost order until the global
    /// heap is empty.
    pub fn build_paths(&mut self) -> Result<()> {
        while let Some((pair, _)) = self.queue.extract_min() {
            let h = self.best[pair];
            if h == NIL || !self.nodes[h as usize].alive {
                return Err(structural!("queued pair {pair} has no live best path"));
            }
            self.churn.sp_plus += 1;
            self.new_shortest_path(PathHandle(h))?;
        }
        Ok(())
    }

    fn reseed_affected(&mut self) -> Result<()> {
        self.queue.clear();
        let affected = core::mem::take(&mut self.affected);
        for &pair in &affected {
            self.in_affected[pair as usize] = false;
            let (u, v) = (pair as usize / self.n, pair as usize % self.n);
            self.replace_path(u, v)?;
        }
        self.affected = affected;
        self.affected.clear();
        Ok(())
    }

    fn reclaim(&mut self) {
        for id in self.pending_free.drain(..) {
            self.nodes[id as usize] = Node::blank();
            self.free.push(id);
        }
    }

    fn check_edge(&self, u: usize, v: usize) -> Result<usize> {
        if u >= self.n || v >= self.n || u == v {
            return Err(invalid!("({u},{v}) is not a valid edge"));
        }
        Ok(pair_id(self.n, u, v))
    }

    fn check_new_weight(u: usize, v: usize, w: f64) -> Result<()> {
        if !(w.is_finite() && w > 0.0) {
            return Err(invalid!("edge ({u},{v}) needs a positive finite weight, got {w}"));
        }
        Ok(())
    }

    /// Changes the weights of present edges and repairs the system.
    pub fn apply_update(&mut self, updates: &[((usize, usize), f64)]) -> Result<ChurnReport> {
        let mut seen = Vec::with_capacity(updates.len());
        for &((u, v), w) in updates {
            let pair = self.check_edge(u, v)?;
            if !self.weights[pair].is_finite() {
                return Err(invalid!("edge ({u},{v}) is absent; use a structural update"));
            }
            Self::check_new_weight(u, v, w)?;
            if seen.contains(&pair) {
                return Err(invalid!("edge ({u},{v}) listed twice"));
            }
            seen.push(pair);
        }
        self.churn = ChurnReport::default();
        for &((u, v), _) in updates {
            let h = self.edge_path(u, v).ok_or_else(|| structural!("edge ({u},{v}) has no path"))?;
            self.remove_path(h, true)?;
        }
        self.reseed_affected()?;
        for &((u, v), w) in updates {
            self.weights[pair_id(self.n, u, v)] = w;
            let h = self.concat(PathKind::Edge(u, v))?;
            self.examine(h)?;
        }
        self.build_paths()?;
        self.reclaim();
        Ok(self.churn)
    }

    /// Inserts absent edges and deletes present ones, then repairs the
    /// system. Deletions are applied first.
    pub fn structural_update(
        &mut self,
        insert: &[((usize, usize), f64)],
        delete: &[(usize, usize)],
    ) -> Result<ChurnReport> {
        let mut deleted = Vec::with_capacity(delete.len());
        for &(u, v) in delete {
            let pair = self.check_edge(u, v)?;
            if !self.weights[pair].is_finite() || deleted.contains(&pair) {
                return Err(invalid!("cannot delete absent edge ({u},{v})"));
            }
            deleted.push(pair);
        }
        let mut inserted = Vec::with_capacity(insert.len());
        for &((u, v), w) in insert {
            let pair = self.check_edge(u, v)?;
            let absent = !self.weights[pair].is_finite() || deleted.contains(&pair);
            if !absent || inserted.contains(&pair) {
                return Err(invalid!("cannot insert present edge ({u},{v})"));
            }
            Self::check_new_weight(u, v, w)?;
            inserted.push(pair);
        }
        self.churn = ChurnReport::default();
        for &(u, v) in delete {
            let h = self.edge_path(u, v).ok_or_else(|| structural!("edge ({u},{v}) has no path"))?;
            self.remove_path(h, true)?;
            self.weights[pair_id(self.n, u, v)] = f64::INFINITY;
            self.edge_count -= 1;
        }
        self.reseed_affected()?;
        for &((u, v), w) in insert {
            self.weights[pair_id(self.n, u, v)] = w;
            self.edge_count += 1;
            let h = self.concat(PathKind::Edge(u, v))?;
            self.examine(h)?;
        }
        self.build_paths()?;
        self.reclaim();
        Ok(self.churn)
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    // ----- auditing -------------------------------------------------------

    /// Checks every structural invariant of stored nodes and lists.
    pub fn audit(&self) -> Result<()> {
        let n = self.n;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        let mut local_count = vec![0u32; n * n];
        let mut stored = 0usize;
        for (i, x) in self.nodes.iter().enumerate() {
            if !x.alive {
                continue;
            }
            let id = i as u32;
            if x.edges == 0 {
                if x.members != 0 || !x.sp || self.vertex_path[x.start as usize] != id {
                    return Err(structural!("vertex path {id} malformed"));
                }
                continue;
            }
            stored += 1;
            let (l, r) = (&self.nodes[x.l as usize], &self.nodes[x.r as usize]);
            if !l.alive || !r.alive {
                return Err(structural!("path {id} has a removed subpath"));
            }
            let first = self.weights[pair_id(n, x.start as usize, x.second as usize)];
            let last = self.weights[pair_id(n, x.penultimate as usize, x.end as usize)];
            if !close(x.cost, first + r.cost) || !close(x.cost, l.cost + last) {
                return Err(structural!("path {id} cost {} inconsistent", x.cost));
            }
            let first_tie = tie_key(x.start as usize, x.second as usize);
            let last_tie = tie_key(x.penultimate as usize, x.end as usize);
            if x.tie != first_tie + r.tie || x.tie != l.tie + last_tie {
                return Err(structural!("path {id} tie key inconsistent"));
            }
            if l.start != x.start || r.end != x.end || r.edges + 1 != x.edges || l.edges + 1 != x.edges {
                return Err(structural!("path {id} subpath endpoints inconsistent"));
            }
            if x.edges >= 2 && (r.start != x.second || l.end != x.penultimate) {
                return Err(structural!("path {id} inner vertices inconsistent"));
            }
            if x.edges == 1
                && (x.l != self.vertex_path[x.start as usize] || x.r != self.vertex_path[x.end as usize])
            {
                return Err(structural!("edge path {id} not anchored at vertex paths"));
            }
            for slot in [Slot::Local, Slot::Left, Slot::Right] {
                if !x.is_member(slot) {
                    return Err(structural!("path {id} missing from {slot:?} list"));
                }
            }
            let short = x.is_member(Slot::ShortLeft) && x.is_member(Slot::ShortRight);
            let none = !x.is_member(Slot::ShortLeft) && !x.is_member(Slot::ShortRight);
            if (x.sp && !short) || (!x.sp && !none) {
                return Err(structural!("path {id} short-list membership disagrees with sp"));
            }
            local_count[pair_id(n, x.start as usize, x.end as usize)] += 1;
        }
        if stored != self.stored {
            return Err(structural!("stored count {} != {stored}", self.stored));
        }
        // Walk every list and check back-links.
        let walk = |head: u32, slot: Slot, check: &dyn Fn(&Node) -> bool| -> Result<usize> {
            let mut prev = NIL;
            let mut cur = head;
            let mut len = 0;
            while cur != NIL {
                let node = &self.nodes[cur as usize];
                if !node.alive || !node.is_member(slot) || node.prev[slot as usize] != prev || !check(node) {
                    return Err(structural!("bad {slot:?} list entry {cur}"));
                }
                len += 1;
                if len > self.nodes.len() {
                    return Err(structural!("cycle in {slot:?} list"));
                }
                prev = cur;
                cur = node.next[slot as usize];
            }
            Ok(len)
        };
        for pair in 0..n * n {
            let (u, v) = ((pair / n) as u32, (pair % n) as u32);
            let len = walk(self.local_head[pair], Slot::Local, &|x| x.start == u && x.end == v)?;
            if len as u32 != self.local_len[pair] || len as u32 != local_count[pair] {
                return Err(structural!("local heap ({u},{v}) size mismatch"));
            }
        }
        for (i, x) in self.nodes.iter().enumerate() {
            if !x.alive {
                continue;
            }
            let id = i as u32;
            walk(x.heads[OWNED_LEFT], Slot::Left, &|c| c.r == id)?;
            walk(x.heads[OWNED_RIGHT], Slot::Right, &|c| c.l == id)?;
            walk(x.heads[OWNED_SHORT_LEFT], Slot::ShortLeft, &|c| c.r == id && c.sp)?;
            walk(x.heads[OWNED_SHORT_RIGHT], Slot::ShortRight, &|c| c.l == id && c.sp)?;
        }
        Ok(())
    }

    /// [`audit`](Self::audit) plus the invariants that hold between updates.
    pub fn audit_quiescent(&self) -> Result<()> {
        self.audit()?;
        let n = self.n;
        if !self.queue.is_empty() || !self.affected.is_empty() || !self.pending_free.is_empty() {
            return Err(structural!("system is mid-update"));
        }
        for u in 0..n {
            for v in 0..n {
                let pair = pair_id(n, u, v);
                let h = self.best[pair];
                if h == NIL {
                    if self.dist[pair].is_finite() {
                        return Err(structural!("({u},{v}) has a distance but no path"));
                    }
                    continue;
                }
                let x = &self.nodes[h as usize];
                if !x.alive || !x.sp || x.cost != self.dist[pair] || x.tie != self.dist_tie[pair] || x.start as usize != u || x.end as usize != v {
                    return Err(structural!("best path of ({u},{v}) is not a live shortest path"));
                }
            }
        }
        for (i, x) in self.nodes.iter().enumerate() {
            if x.alive && x.sp && self.best[pair_id(n, x.start as usize, x.end as usize)] != i as u32 {
                return Err(structural!("path {i} marked shortest but is not its pair's best"));
            }
        }
        Ok(())
    }
}
