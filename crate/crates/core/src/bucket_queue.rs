//! Priority queues over dense pair ids.
//!
//! [`MonotoneBucketQueue`] is a Dial-style bucket structure for monotone
//! workloads: keys are scaled by the minimum edge weight `delta`, so an
//! extraction returns some element whose key is within `delta` of the true
//! minimum. When only the leftover bucket remains occupied it hands all of its
//! content to an [`IndexedHeap`] and answers every later operation exactly.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::NIL;

/// Pair-keyed priority queue with insert-or-decrease semantics.
///
/// Re-inserting a pair with a key not smaller than its stored key is a no-op.
pub trait PairQueue {
    fn insert_or_decrease(&mut self, pair: usize, key: f64) -> Result<()>;
    fn extract_min(&mut self) -> Option<(usize, f64)>;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_key(key: f64) -> Result<()> {
    if key.is_nan() || key < 0.0 {
        return Err(invalid!("queue keys must be non-negative, got {key}"));
    }
    Ok(())
}

/// Binary min-heap over pair ids `0..capacity` with a position table for
/// O(log n) decrease-key.
#[derive(Debug, Clone)]
pub struct IndexedHeap {
    heap: Vec<u32>,
    pos: Vec<u32>,
    keys: Vec<f64>,
}

impl IndexedHeap {
    pub fn new(capacity: usize) -> Self {
        Self {
            heap: Vec::new(),
            pos: vec![NIL; capacity],
            keys: vec![f64::INFINITY; capacity],
        }
    }

    pub fn capacity(&self) -> usize {
        self.pos.len()
    }

    pub fn contains(&self, pair: usize) -> bool {
        self.pos.get(pair).is_some_and(|&p| p != NIL)
    }

    /// Stored key of a queued pair.
    pub fn key(&self, pair: usize) -> Option<f64> {
        self.contains(pair).then(|| self.keys[pair])
    }

    pub fn peek(&self) -> Option<(usize, f64)> {
        self.heap.first().map(|&p| (p as usize, self.keys[p as usize]))
    }

    pub fn clear(&mut self) {
        for &p in &self.heap {
            self.pos[p as usize] = NIL;
        }
        self.heap.clear();
    }

    #[inline]
    fn less(&self, a: u32, b: u32) -> bool {
        self.keys[a as usize] < self.keys[b as usize]
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i] as usize] = i as u32;
        self.pos[self.heap[j] as usize] = j as u32;
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.less(self.heap[i], self.heap[parent]) {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let len = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && self.less(self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            if !self.less(self.heap[child], self.heap[i]) {
                break;
            }
            self.swap(i, child);
            i = child;
        }
    }
}

impl PairQueue for IndexedHeap {
    fn insert_or_decrease(&mut self, pair: usize, key: f64) -> Result<()> {
        if pair >= self.pos.len() {
            return Err(invalid!("pair id {pair} exceeds capacity {}", self.pos.len()));
        }
        check_key(key)?;
        let at = self.pos[pair];
        if at == NIL {
            self.keys[pair] = key;
            self.pos[pair] = self.heap.len() as u32;
            self.heap.push(pair as u32);
            self.sift_up(self.heap.len() - 1);
        } else if key < self.keys[pair] {
            self.keys[pair] = key;
            self.sift_up(at as usize);
        }
        Ok(())
    }

    fn extract_min(&mut self) -> Option<(usize, f64)> {
        let top = *self.heap.first()?;
        let last = self.heap.len() - 1;
        self.swap(0, last);
        self.heap.pop();
        self.pos[top as usize] = NIL;
        if !self.heap.is_empty() {
            self.sift_down(0);
        }
        Some((top as usize, self.keys[top as usize]))
    }

    fn len(&self) -> usize {
        self.heap.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueMode {
    Bucket,
    /// The leftover bucket was reached; all operations go to the exact heap.
    Fallback,
}

/// Monotone bucket queue with `num_buckets - 1` regular buckets of width
/// `delta` and one leftover bucket for larger keys.
///
/// Buckets are intrusive doubly linked lists threaded through per-pair
/// `next`/`prev` tables, so reposition and removal are O(1) and the whole
/// structure costs O(capacity + num_buckets) words.
#[derive(Debug, Clone)]
pub struct MonotoneBucketQueue {
    delta: f64,
    heads: Vec<u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
    bucket_of: Vec<u32>,
    keys: Vec<f64>,
    cursor: usize,
    len: usize,
    mode: QueueMode,
    fallback: Option<IndexedHeap>,
    scan_steps: u64,
}

impl MonotoneBucketQueue {
    pub fn new(delta: f64, num_buckets: usize, capacity: usize) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid!("bucket width must be positive and finite, got {delta}"));
        }
        if num_buckets < 2 {
            return Err(invalid!("need at least 2 buckets, got {num_buckets}"));
        }
        if num_buckets > NIL as usize {
            return Err(invalid!("too many buckets: {num_buckets}"));
        }
        Ok(Self {
            delta,
            heads: vec![NIL; num_buckets],
            next: vec![NIL; capacity],
            prev: vec![NIL; capacity],
            bucket_of: vec![NIL; capacity],
            keys: vec![f64::INFINITY; capacity],
            cursor: 0,
            len: 0,
            mode: QueueMode::Bucket,
            fallback: None,
            scan_steps: 0,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn num_buckets(&self) -> usize {
        self.heads.len()
    }

    pub fn capacity(&self) -> usize {
        self.next.len()
    }

    pub fn mode(&self) -> QueueMode {
        self.mode
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Empty buckets skipped by extractions so far.
    pub fn scan_steps(&self) -> u64 {
        self.scan_steps
    }

    #[inline]
    fn leftover(&self) -> usize {
        self.heads.len() - 1
    }

    /// Bucket that `key` maps to, clamped from below by the cursor.
    pub fn bucket_for(&self, key: f64) -> usize {
        let leftover = self.leftover();
        let scaled = key / self.delta;
        let raw = if scaled < leftover as f64 {
            // Non-negative, so the cast floors.
            scaled as usize
        } else {
            leftover
        };
        raw.max(self.cursor)
    }

    /// Bucket currently holding `pair`, if it is queued in bucket mode.
    pub fn bucket_of(&self, pair: usize) -> Option<usize> {
        match self.bucket_of.get(pair) {
            Some(&b) if b != NIL => Some(b as usize),
            _ => None,
        }
    }

    /// Stored key of a queued pair.
    pub fn key(&self, pair: usize) -> Option<f64> {
        match self.mode {
            QueueMode::Bucket => self.bucket_of(pair).map(|_| self.keys[pair]),
            QueueMode::Fallback => self.fallback.as_ref().and_then(|h| h.key(pair)),
        }
    }

    fn link(&mut self, pair: usize, bucket: usize) {
        let head = self.heads[bucket];
        self.next[pair] = head;
        self.prev[pair] = NIL;
        if head != NIL {
            self.prev[head as usize] = pair as u32;
        }
        self.heads[bucket] = pair as u32;
        self.bucket_of[pair] = bucket as u32;
    }

    fn unlink(&mut self, pair: usize) {
        let bucket = self.bucket_of[pair] as usize;
        let (p, n) = (self.prev[pair], self.next[pair]);
        if p != NIL {
            self.next[p as usize] = n;
        } else {
            self.heads[bucket] = n;
        }
        if n != NIL {
            self.prev[n as usize] = p;
        }
        self.bucket_of[pair] = NIL;
    }

    fn engage_fallback(&mut self) {
        let leftover = self.leftover();
        let mut heap = IndexedHeap::new(self.capacity());
        let mut cur = self.heads[leftover];
        while cur != NIL {
            let pair = cur as usize;
            cur = self.next[pair];
            heap.insert_or_decrease(pair, self.keys[pair])
                .expect("pair ids already validated on insert");
            self.bucket_of[pair] = NIL;
        }
        self.heads[leftover] = NIL;
        self.len = 0;
        self.fallback = Some(heap);
        self.mode = QueueMode::Fallback;
    }
}

impl PairQueue for MonotoneBucketQueue {
    fn insert_or_decrease(&mut self, pair: usize, key: f64) -> Result<()> {
        if pair >= self.capacity() {
            return Err(invalid!("pair id {pair} exceeds capacity {}", self.capacity()));
        }
        check_key(key)?;
        if let Some(heap) = self.fallback.as_mut() {
            return heap.insert_or_decrease(pair, key);
        }
        let bucket = self.bucket_for(key);
        match self.bucket_of(pair) {
            Some(current) => {
                if key >= self.keys[pair] {
                    return Ok(());
                }
                self.keys[pair] = key;
                if bucket != current {
                    self.unlink(pair);
                    self.link(pair, bucket);
                }
            }
            None => {
                self.keys[pair] = key;
                self.link(pair, bucket);
                self.len += 1;
            }
        }
        Ok(())
    }

    fn extract_min(&mut self) -> Option<(usize, f64)> {
        if let Some(heap) = self.fallback.as_mut() {
            return heap.extract_min();
        }
        if self.len == 0 {
            return None;
        }
        let leftover = self.leftover();
        while self.cursor < leftover && self.heads[self.cursor] == NIL {
            self.cursor += 1;
            self.scan_steps += 1;
        }
        if self.cursor == leftover {
            self.engage_fallback();
            return self.fallback.as_mut().and_then(|h| h.extract_min());
        }
        let pair = self.heads[self.cursor] as usize;
        self.unlink(pair);
        self.len -= 1;
        Some((pair, self.keys[pair]))
    }

    fn len(&self) -> usize {
        match &self.fallback {
            Some(heap) => heap.len(),
            None => self.len,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn new_queue_is_empty() {
        let mut q = MonotoneBucketQueue::new(0.1, 100, 10).unwrap();
        assert!(q.is_empty());
        assert_eq!(q.extract_min(), None);
        assert!(MonotoneBucketQueue::new(1e-30, 100, 10).is_ok());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MonotoneBucketQueue::new(0.0, 10, 4).is_err());
        assert!(MonotoneBucketQueue::new(-1.0, 10, 4).is_err());
        assert!(MonotoneBucketQueue::new(0.5, 1, 4).is_err());
        let mut q = MonotoneBucketQueue::new(0.5, 4, 4).unwrap();
        assert!(q.insert_or_decrease(4, 1.0).is_err());
        assert!(q.insert_or_decrease(0, -1.0).is_err());
        let mut h = IndexedHeap::new(2);
        assert!(h.insert_or_decrease(2, 1.0).is_err());
    }

    #[test]
    fn large_key_goes_to_leftover() {
        let mut q = MonotoneBucketQueue::new(0.5, 4, 4).unwrap();
        q.insert_or_decrease(1, 10.0).unwrap();
        assert_eq!(q.bucket_of(1), Some(3));
    }

    #[test]
    fn bucket_index_and_decrease() {
        let mut q = MonotoneBucketQueue::new(0.1, 100, 10).unwrap();
        q.insert_or_decrease(1, 0.25).unwrap();
        assert_eq!(q.bucket_of(1), Some(2));
        q.insert_or_decrease(1, 0.15).unwrap();
        assert_eq!(q.bucket_of(1), Some(1));
        assert_eq!(q.key(1), Some(0.15));
        q.insert_or_decrease(1, 0.9).unwrap();
        assert_eq!(q.bucket_of(1), Some(1));
        assert_eq!(q.key(1), Some(0.15));
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn extraction_respects_buckets() {
        let mut q = MonotoneBucketQueue::new(0.1, 100, 10).unwrap();
        q.insert_or_decrease(0, 0.25).unwrap();
        q.insert_or_decrease(1, 0.11).unwrap();
        q.insert_or_decrease(2, 0.13).unwrap();
        let (first, key) = q.extract_min().unwrap();
        assert!(first == 1 || first == 2);
        assert!(key < 0.2);
        let (second, _) = q.extract_min().unwrap();
        assert!(second == 1 || second == 2);
        assert_ne!(first, second);
        assert_eq!(q.extract_min(), Some((0, 0.25)));
        assert_eq!(q.extract_min(), None);
    }

    #[test]
    fn single_element_then_empty() {
        let mut q = MonotoneBucketQueue::new(1.0, 8, 3).unwrap();
        q.insert_or_decrease(2, 3.5).unwrap();
        assert_eq!(q.extract_min(), Some((2, 3.5)));
        assert_eq!(q.extract_min(), None);
    }

    #[test]
    fn leftover_only_switches_to_exact_fallback() {
        let mut q = MonotoneBucketQueue::new(0.5, 3, 8).unwrap();
        for (pair, key) in [(0, 9.0), (1, 4.0), (2, 7.5), (3, 5.0)] {
            q.insert_or_decrease(pair, key).unwrap();
        }
        assert_eq!(q.mode(), QueueMode::Bucket);
        let keys: Vec<f64> = core::iter::from_fn(|| q.extract_min().map(|(_, k)| k)).collect();
        assert_eq!(q.mode(), QueueMode::Fallback);
        assert_eq!(keys, vec![4.0, 5.0, 7.5, 9.0]);
        // Permanent: later inserts are served exactly too.
        q.insert_or_decrease(5, 0.1).unwrap();
        q.insert_or_decrease(6, 0.05).unwrap();
        assert_eq!(q.extract_min(), Some((6, 0.05)));
    }

    #[test]
    fn inserting_below_cursor_is_clamped() {
        let mut q = MonotoneBucketQueue::new(1.0, 10, 4).unwrap();
        q.insert_or_decrease(0, 5.5).unwrap();
        assert_eq!(q.extract_min(), Some((0, 5.5)));
        assert_eq!(q.cursor(), 5);
        q.insert_or_decrease(1, 2.0).unwrap();
        assert_eq!(q.bucket_of(1), Some(5));
        assert_eq!(q.extract_min(), Some((1, 2.0)));
    }

    #[test]
    fn indexed_heap_orders_exactly() {
        let mut h = IndexedHeap::new(6);
        for (pair, key) in [(0, 3.0), (1, 1.0), (2, 2.0), (3, 5.0), (4, 0.5)] {
            h.insert_or_decrease(pair, key).unwrap();
        }
        h.insert_or_decrease(3, 0.1).unwrap();
        h.insert_or_decrease(2, 9.0).unwrap();
        let order: Vec<usize> = core::iter::from_fn(|| h.extract_min().map(|(p, _)| p)).collect();
        assert_eq!(order, vec![3, 4, 1, 2, 0]);
    }

    /// Monotone workload: every new key is at least the last extracted key
    /// plus `delta`, as in the static solver.
    fn monotone_ops() -> impl Strategy<Value = (f64, Vec<(bool, usize, f64)>)> {
        (0.01f64..0.5).prop_flat_map(|delta| {
            (
                Just(delta),
                prop::collection::vec((any::<bool>(), 0usize..64, 0.0f64..3.0), 1..300),
            )
        })
    }

    proptest! {
        #[test]
        fn delta_slack_and_work_bound((delta, ops) in monotone_ops()) {
            use std::collections::BTreeMap;
            let buckets = 40;
            let mut q = MonotoneBucketQueue::new(delta, buckets, 64).unwrap();
            let mut shadow: BTreeMap<usize, f64> = BTreeMap::new();
            let mut last = 0.0f64;
            let mut n_ops = 0u64;
            for (extract, pair, offset) in ops {
                n_ops += 1;
                if extract {
                    match q.extract_min() {
                        None => prop_assert!(shadow.is_empty()),
                        Some((p, key)) => {
                            prop_assert_eq!(shadow.remove(&p), Some(key));
                            for &k in shadow.values() {
                                prop_assert!(key < k + delta, "slack violated: {} vs {}", key, k);
                            }
                            last = last.max(key);
                        }
                    }
                } else {
                    let key = last + delta + offset;
                    q.insert_or_decrease(pair, key).unwrap();
                    let slot = shadow.entry(pair).or_insert(key);
                    *slot = slot.min(key);
                }
                prop_assert_eq!(q.len(), shadow.len());
            }
            prop_assert!(q.scan_steps() <= buckets as u64 + n_ops);
        }
    }
}
