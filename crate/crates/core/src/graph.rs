//! Weighted undirected graphs, cut evaluation, and the edge-shrinking
//! transformation together with its history and solution reconstruction.
//!
//! A shrink step fixes the relation `x_removed = sigma * x_kept` and folds the
//! removed node's edges onto the kept node. The cut value of the original
//! graph is recovered from the shrunk graph as
//! `cut(G, lift(a')) = cut(G', a') + offset`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stable node label. Ids removed by shrinking are never reused.
pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("non-finite weight {weight} on edge ({u}, {v})")]
    NonFiniteWeight { u: NodeId, v: NodeId, weight: f64 },
    #[error("node {0} is not live")]
    NodeNotLive(NodeId),
    #[error("cannot shrink node {0} onto itself")]
    SamePair(NodeId),
    #[error("assignment has no label for node {0}")]
    MissingLabel(NodeId),
    #[error("history references node {0} which has no label during reconstruction")]
    IncompleteHistory(NodeId),
}

/// A value in `{-1, +1}`: a vertex label or the relative sign of a merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Sign of a real number; zero maps to `Plus`.
    pub fn of(value: f64) -> Sign {
        if value < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn from_i8(value: i8) -> Option<Sign> {
        match value {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.as_i8())
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+1"),
            Sign::Minus => write!(f, "-1"),
        }
    }
}

/// Orders a node pair as `(min, max)`.
pub fn edge_key(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Weighted undirected simple graph.
///
/// Adjacency is kept in ordered maps so that every iteration order (nodes,
/// edges, neighbours) is deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Graph {
    adj: BTreeMap<NodeId, BTreeMap<NodeId, f64>>,
    edge_count: usize,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from an edge list plus optional isolated nodes.
    pub fn from_edges<I>(nodes: impl IntoIterator<Item = NodeId>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut g = Graph::new();
        for v in nodes {
            g.add_node(v);
        }
        for (u, v, w) in edges {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, v: NodeId) {
        self.adj.entry(v).or_default();
    }

    /// Inserts a new edge; endpoints are created if absent.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, weight: f64) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !weight.is_finite() {
            return Err(GraphError::NonFiniteWeight { u, v, weight });
        }
        if self.weight(u, v).is_some() {
            let (a, b) = edge_key(u, v);
            return Err(GraphError::DuplicateEdge(a, b));
        }
        self.adj.entry(u).or_default().insert(v, weight);
        self.adj.entry(v).or_default().insert(u, weight);
        self.edge_count += 1;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        self.adj.contains_key(&v)
    }

    /// Live node ids in ascending order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.adj.keys().copied()
    }

    /// Edges as `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.adj.iter().flat_map(|(&u, nbrs)| {
            nbrs.range(u + 1..).map(move |(&v, &w)| (u, v, w))
        })
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.adj
            .get(&v)
            .into_iter()
            .flat_map(|nbrs| nbrs.iter().map(|(&k, &w)| (k, w)))
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj.get(&v).map_or(0, BTreeMap::len)
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.adj.get(&u).and_then(|nbrs| nbrs.get(&v)).copied()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// Position of every live node in ascending id order.
    pub fn index_map(&self) -> BTreeMap<NodeId, usize> {
        self.nodes().enumerate().map(|(i, v)| (v, i)).collect()
    }

    /// Cut value `(1/2) Σ w_ij (1 - x_i x_j)`, i.e. the total weight of edges
    /// whose endpoints carry opposite labels.
    pub fn cut_value(&self, a: &Assignment) -> Result<f64, GraphError> {
        for v in self.nodes() {
            if a.get(v).is_none() {
                return Err(GraphError::MissingLabel(v));
            }
        }
        Ok(self
            .edges()
            .filter(|&(u, v, _)| a.get(u) != a.get(v))
            .map(|(_, _, w)| w)
            .sum())
    }

    /// Folds `removed` onto `kept` under `x_removed = sigma * x_kept`.
    ///
    /// For every other neighbour `k` of `removed`, `w'(kept, k) = w(kept, k) +
    /// sigma * w(removed, k)` (a missing edge counts as weight 0 and is created,
    /// possibly with weight 0). Returns the constant released from the cut:
    /// the total weight around `removed` when `sigma = -1`, else 0.
    pub fn shrink_edge_in_place(
        &mut self,
        removed: NodeId,
        kept: NodeId,
        sigma: Sign,
    ) -> Result<f64, GraphError> {
        if removed == kept {
            return Err(GraphError::SamePair(removed));
        }
        if !self.contains_node(kept) {
            return Err(GraphError::NodeNotLive(kept));
        }
        let nbrs = self
            .adj
            .remove(&removed)
            .ok_or(GraphError::NodeNotLive(removed))?;
        self.edge_count -= nbrs.len();

        let offset = match sigma {
            Sign::Plus => 0.0,
            Sign::Minus => nbrs.values().sum(),
        };
        let s = sigma.as_f64();
        for (&k, &w_ik) in &nbrs {
            let k_adj = self.adj.get_mut(&k).expect("neighbour of a live node is live");
            k_adj.remove(&removed);
            if k == kept {
                continue;
            }
            match k_adj.get_mut(&kept) {
                Some(w_jk) => {
                    *w_jk += s * w_ik;
                    let w = *w_jk;
                    self.adj.get_mut(&kept).unwrap().insert(k, w);
                }
                None => {
                    k_adj.insert(kept, s * w_ik);
                    self.adj.get_mut(&kept).unwrap().insert(k, s * w_ik);
                    self.edge_count += 1;
                }
            }
        }
        Ok(offset)
    }

    /// Non-mutating variant of [`Graph::shrink_edge_in_place`].
    pub fn shrink_edge(
        &self,
        removed: NodeId,
        kept: NodeId,
        sigma: Sign,
    ) -> Result<(Graph, f64), GraphError> {
        let mut g = self.clone();
        let offset = g.shrink_edge_in_place(removed, kept, sigma)?;
        Ok((g, offset))
    }
}

/// A ±1 label per node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    labels: BTreeMap<NodeId, Sign>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Same label on every node of `g`.
    pub fn uniform(g: &Graph, label: Sign) -> Self {
        g.nodes().map(|v| (v, label)).collect()
    }

    pub fn get(&self, v: NodeId) -> Option<Sign> {
        self.labels.get(&v).copied()
    }

    pub fn set(&mut self, v: NodeId, label: Sign) {
        self.labels.insert(v, label);
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, Sign)> + '_ {
        self.labels.iter().map(|(&v, &s)| (v, s))
    }

    /// Flips every label; the cut value is unchanged.
    pub fn flipped(&self) -> Self {
        self.iter().map(|(v, s)| (v, -s)).collect()
    }
}

impl FromIterator<(NodeId, Sign)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (NodeId, Sign)>>(iter: T) -> Self {
        Assignment {
            labels: iter.into_iter().collect(),
        }
    }
}

/// One merge: `removed` is folded onto `kept` with `x_removed = sigma * x_kept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkStep {
    pub kept: NodeId,
    pub removed: NodeId,
    pub sigma: Sign,
    pub offset: f64,
}

/// Result of mapping a correlation through the merge history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Remapped {
    Pair { pair: (NodeId, NodeId), b: f64 },
    /// Both endpoints already belong to the same live node.
    Degenerate,
}

/// Ordered shrink steps plus the parent pointers of every removed node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShrinkHistory {
    steps: Vec<ShrinkStep>,
    parent: BTreeMap<NodeId, (NodeId, Sign)>,
}

impl ShrinkHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> &[ShrinkStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_removed(&self, v: NodeId) -> bool {
        self.parent.contains_key(&v)
    }

    /// Records a merge. The removed node must not already be merged.
    pub fn push(&mut self, step: ShrinkStep) {
        debug_assert!(!self.parent.contains_key(&step.removed));
        self.parent.insert(step.removed, (step.kept, step.sigma));
        self.steps.push(step);
    }

    /// Live representative of `v` and the product of signs along its chain,
    /// so that `x_v = sign * x_rep`.
    pub fn representative(&self, v: NodeId) -> (NodeId, Sign) {
        let mut node = v;
        let mut sign = Sign::Plus;
        while let Some(&(next, s)) = self.parent.get(&node) {
            sign = sign * s;
            node = next;
        }
        (node, sign)
    }

    /// Replaces merged endpoints by their live representatives; `b` picks up
    /// the accumulated sign of every replaced endpoint.
    pub fn remap_correlation(&self, pair: (NodeId, NodeId), b: f64) -> Remapped {
        let (s, s_sign) = self.representative(pair.0);
        let (u, u_sign) = self.representative(pair.1);
        if s == u {
            return Remapped::Degenerate;
        }
        Remapped::Pair {
            pair: (s, u),
            b: (s_sign * u_sign).as_f64() * b,
        }
    }

    /// Lifts an assignment of the shrunk graph back to the original nodes by
    /// undoing the steps in reverse order.
    pub fn reconstruct(&self, terminal: &Assignment) -> Result<Assignment, GraphError> {
        let mut out = terminal.clone();
        for step in self.steps.iter().rev() {
            let kept = out
                .get(step.kept)
                .ok_or(GraphError::IncompleteHistory(step.kept))?;
            out.set(step.removed, step.sigma * kept);
        }
        Ok(out)
    }

    pub fn total_offset(&self) -> f64 {
        self.steps.iter().map(|s| s.offset).sum()
    }
}
