//! Samples partitioned by action, with exact radius-bounded k-nearest-neighbor search.
//!
//! Each partition keeps a vantage-point tree over a prefix of its members and
//! scans the rest linearly. Results are ordered by `(distance, insertion index)`
//! and match [`SampleSet::knn_linear`] exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use core_bamdp::{Action, Belief, LatentMdpFamily};
use serde::Serialize;

use crate::sample::Sample;

const LEAF_SIZE: usize = 12;
const MIN_TAIL: usize = 48;

/// `alpha * d(s1, s2) + |b1 - b2|_1`; only meaningful within one action.
pub fn compound_distance<M: LatentMdpFamily>(
    model: &M,
    alpha: f64,
    s1: &M::State,
    b1: &Belief,
    s2: &M::State,
    b2: &Belief,
) -> f64 {
    alpha * model.state_distance(s1, s2) + b1.l1_distance(b2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    /// Insertion index; pending samples continue after the stored ones.
    pub index: usize,
    pub distance: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct Ranked(Neighbor);

impl Eq for Ranked {}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .distance
            .total_cmp(&other.0.distance)
            .then(self.0.index.cmp(&other.0.index))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bounded max-heap keeping the `k` best candidates within `radius`.
struct Collector {
    k: usize,
    radius: f64,
    heap: BinaryHeap<Ranked>,
}

impl Collector {
    fn new(k: usize, radius: f64) -> Self {
        Self {
            k,
            radius,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    /// Current pruning threshold.
    fn tau(&self) -> f64 {
        if self.heap.len() == self.k {
            self.heap.peek().map_or(self.radius, |r| r.0.distance)
        } else {
            self.radius
        }
    }

    fn offer(&mut self, index: usize, distance: f64) {
        if !(distance <= self.radius) || self.k == 0 {
            return;
        }
        let cand = Ranked(Neighbor { index, distance });
        if self.heap.len() < self.k {
            self.heap.push(cand);
        } else if self.heap.peek().is_some_and(|top| cand < *top) {
            self.heap.pop();
            self.heap.push(cand);
        }
    }

    fn finish(self) -> Vec<Neighbor> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|r| r.0)
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
enum Node {
    #[default]
    Empty,
    Leaf(Vec<usize>),
    Split {
        vantage: usize,
        /// Members of `inside` lie within `radius` of the vantage, members of `outside` at or beyond it.
        radius: f64,
        inside: Box<Node>,
        outside: Box<Node>,
    },
}

#[derive(Debug, Clone, Default)]
struct Partition {
    members: Vec<usize>,
    tree: Node,
    /// Number of leading members covered by `tree`.
    indexed: usize,
}

#[derive(Debug, Clone)]
pub struct SampleSet<S> {
    alpha: f64,
    samples: Vec<Sample<S>>,
    partitions: Vec<Partition>,
}

impl<S: Clone + PartialEq> SampleSet<S> {
    pub fn new(alpha: f64, num_actions: usize) -> Self {
        Self {
            alpha,
            samples: Vec::new(),
            partitions: vec![Partition::default(); num_actions],
        }
    }

    /// Rebuild from stored samples, e.g. after loading an artifact.
    pub fn from_samples<M: LatentMdpFamily<State = S>>(
        model: &M,
        alpha: f64,
        samples: Vec<Sample<S>>,
    ) -> Self {
        let mut set = Self::new(alpha, model.num_actions());
        for sample in samples {
            let id = set.samples.len();
            set.partitions[sample.action].members.push(id);
            set.samples.push(sample);
        }
        for a in 0..set.partitions.len() {
            set.rebuild(model, a);
        }
        set
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample<S>] {
        &self.samples
    }

    pub fn get(&self, index: usize) -> &Sample<S> {
        &self.samples[index]
    }

    pub fn action_count(&self, action: Action) -> usize {
        self.partitions[action].members.len()
    }

    pub fn q_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.q_value).collect()
    }

    pub fn set_q_values(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.samples.len());
        for (s, v) in self.samples.iter_mut().zip(values) {
            s.q_value = *v;
        }
    }

    pub fn into_samples(self) -> Vec<Sample<S>> {
        self.samples
    }

    pub fn push<M: LatentMdpFamily<State = S>>(&mut self, model: &M, sample: Sample<S>) -> usize {
        let id = self.samples.len();
        let action = sample.action;
        self.partitions[action].members.push(id);
        self.samples.push(sample);
        let part = &self.partitions[action];
        if part.members.len() - part.indexed > MIN_TAIL.max(part.indexed / 4) {
            self.rebuild(model, action);
        }
        id
    }

    fn rebuild<M: LatentMdpFamily<State = S>>(&mut self, model: &M, action: Action) {
        let ids = self.partitions[action].members.clone();
        let tree = self.build(model, ids.clone());
        let part = &mut self.partitions[action];
        part.tree = tree;
        part.indexed = ids.len();
    }

    fn dist<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        other: &Sample<S>,
    ) -> f64 {
        compound_distance(
            model,
            self.alpha,
            state,
            belief,
            &other.state,
            &other.belief,
        )
    }

    fn build<M: LatentMdpFamily<State = S>>(&self, model: &M, mut ids: Vec<usize>) -> Node {
        if ids.is_empty() {
            return Node::Empty;
        }
        if ids.len() <= LEAF_SIZE {
            return Node::Leaf(ids);
        }
        let vantage = ids.remove(0);
        let v = &self.samples[vantage];
        let mut ranked: Vec<(f64, usize)> = ids
            .into_iter()
            .map(|i| (self.dist(model, &v.state, &v.belief, &self.samples[i]), i))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mid = ranked.len() / 2;
        let radius = ranked[mid.max(1) - 1].0;
        let outside: Vec<usize> = ranked
            .split_off(mid.max(1))
            .into_iter()
            .map(|(_, i)| i)
            .collect();
        let inside: Vec<usize> = ranked.into_iter().map(|(_, i)| i).collect();
        Node::Split {
            vantage,
            radius,
            inside: Box::new(self.build(model, inside)),
            outside: Box::new(self.build(model, outside)),
        }
    }

    fn search<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        node: &Node,
        state: &S,
        belief: &Belief,
        out: &mut Collector,
    ) {
        match node {
            Node::Empty => {}
            Node::Leaf(ids) => {
                for &i in ids {
                    out.offer(i, self.dist(model, state, belief, &self.samples[i]));
                }
            }
            Node::Split {
                vantage,
                radius,
                inside,
                outside,
            } => {
                let d = self.dist(model, state, belief, &self.samples[*vantage]);
                out.offer(*vantage, d);
                // Triangle-inequality lower bounds, padded against rounding.
                let reach = |bound: f64, tau: f64| bound <= tau + 1e-9 * (1.0 + tau.abs() + d);
                if d <= *radius {
                    if reach(d - radius, out.tau()) {
                        self.search(model, inside, state, belief, out);
                    }
                    if reach(radius - d, out.tau()) {
                        self.search(model, outside, state, belief, out);
                    }
                } else {
                    if reach(radius - d, out.tau()) {
                        self.search(model, outside, state, belief, out);
                    }
                    if reach(d - radius, out.tau()) {
                        self.search(model, inside, state, belief, out);
                    }
                }
            }
        }
    }

    /// Up to `k` nearest same-action samples within `radius` (inclusive), nearest first.
    ///
    /// `pending` samples are searched too, indexed after the stored ones.
    #[allow(clippy::too_many_arguments)]
    pub fn knn<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        action: Action,
        k: usize,
        radius: f64,
        pending: &[Sample<S>],
    ) -> Vec<Neighbor> {
        let mut out = Collector::new(k, radius);
        let part = &self.partitions[action];
        self.search(model, &part.tree, state, belief, &mut out);
        for &i in &part.members[part.indexed..] {
            out.offer(i, self.dist(model, state, belief, &self.samples[i]));
        }
        self.offer_pending(model, state, belief, action, pending, &mut out);
        out.finish()
    }

    /// Reference brute-force search with the same contract as [`Self::knn`].
    #[allow(clippy::too_many_arguments)]
    pub fn knn_linear<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        action: Action,
        k: usize,
        radius: f64,
        pending: &[Sample<S>],
    ) -> Vec<Neighbor> {
        let mut out = Collector::new(k, radius);
        for (i, s) in self
            .samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.action == action)
        {
            out.offer(i, self.dist(model, state, belief, s));
        }
        self.offer_pending(model, state, belief, action, pending, &mut out);
        out.finish()
    }

    fn offer_pending<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        action: Action,
        pending: &[Sample<S>],
        out: &mut Collector,
    ) {
        let base = self.samples.len();
        for (j, s) in pending
            .iter()
            .enumerate()
            .filter(|(_, s)| s.action == action)
        {
            out.offer(base + j, self.dist(model, state, belief, s));
        }
    }

    /// The sample behind a neighbor index returned with `pending`.
    pub fn resolve<'a>(&'a self, index: usize, pending: &'a [Sample<S>]) -> &'a Sample<S> {
        if index < self.samples.len() {
            &self.samples[index]
        } else {
            &pending[index - self.samples.len()]
        }
    }
}
