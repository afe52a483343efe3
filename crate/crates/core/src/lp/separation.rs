//! Odd-cycle inequality separation.
//!
//! For a cycle `C` and an odd subset `Q ⊆ C` the inequality reads
//! `Σ_{e∈Q} y_e - Σ_{e∈C\Q} y_e <= |Q| - 1`. In the doubled graph where each
//! edge `uv` has same-layer copies of length `y_uv` and cross-layer copies of
//! length `1 - y_uv`, a path from `(v, 0)` to `(v, 1)` is a closed walk with an
//! odd number of cross edges and its length is `|Q| - (Σ_Q y - Σ_{C\Q} y)`.
//! The inequality is violated exactly when that length is below 1.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::graph::{edge_key, Graph, NodeId};

use super::EdgeVector;

/// Minimum violation reported by the separator.
pub const VIOLATION_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OddCycleInequality {
    /// Edges of a simple cycle in walk order, each as `(min, max)`.
    pub cycle: Vec<(NodeId, NodeId)>,
    /// Edges of the cycle carrying `+y` (odd count).
    pub odd_subset: BTreeSet<(NodeId, NodeId)>,
}

impl OddCycleInequality {
    pub fn lhs(&self, y: &EdgeVector) -> f64 {
        self.cycle
            .iter()
            .map(|e| {
                let v = y.get(e).copied().unwrap_or(0.0);
                if self.odd_subset.contains(e) {
                    v
                } else {
                    -v
                }
            })
            .sum()
    }

    pub fn rhs(&self) -> f64 {
        (self.odd_subset.len() - 1) as f64
    }

    pub fn violation(&self, y: &EdgeVector) -> f64 {
        self.lhs(y) - self.rhs()
    }

    /// Canonical form used for de-duplication.
    pub fn key(&self) -> (Vec<(NodeId, NodeId)>, BTreeSet<(NodeId, NodeId)>) {
        let mut edges = self.cycle.clone();
        edges.sort_unstable();
        (edges, self.odd_subset.clone())
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One step of a closed walk: move to `to` over an edge, crossing layers or not.
#[derive(Debug, Clone, Copy)]
struct WalkEdge {
    from: NodeId,
    to: NodeId,
    cross: bool,
}

/// Finds violated odd-cycle inequalities: at most one per root vertex,
/// de-duplicated, each with violation above [`VIOLATION_TOL`].
pub fn separate_odd_cycles(g: &Graph, y: &EdgeVector) -> Vec<OddCycleInequality> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    let index = g.index_map();
    let n = nodes.len();
    // adjacency of the doubled graph over indices 2*i + layer
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); 2 * n];
    for (u, v, _) in g.edges() {
        let yv = y.get(&(u, v)).copied().unwrap_or(0.0).clamp(0.0, 1.0);
        let (iu, iv) = (index[&u], index[&v]);
        for layer in 0..2 {
            adj[2 * iu + layer].push((2 * iv + layer, yv));
            adj[2 * iv + layer].push((2 * iu + layer, yv));
            adj[2 * iu + layer].push((2 * iv + (1 - layer), 1.0 - yv));
            adj[2 * iv + layer].push((2 * iu + (1 - layer), 1.0 - yv));
        }
    }

    let mut found = BTreeMap::new();
    let mut dist = vec![f64::INFINITY; 2 * n];
    let mut pred = vec![usize::MAX; 2 * n];
    for root in 0..n {
        dist.fill(f64::INFINITY);
        pred.fill(usize::MAX);
        let (src, dst) = (2 * root, 2 * root + 1);
        dist[src] = 0.0;
        let mut heap = BinaryHeap::from([HeapItem { dist: 0.0, node: src }]);
        while let Some(HeapItem { dist: d, node }) = heap.pop() {
            if d > dist[node] || node == dst {
                if node == dst {
                    break;
                }
                continue;
            }
            // nothing beyond length 1 can be violated
            if d >= 1.0 {
                break;
            }
            for &(next, len) in &adj[node] {
                let nd = d + len;
                if nd < dist[next] {
                    dist[next] = nd;
                    pred[next] = node;
                    heap.push(HeapItem { dist: nd, node: next });
                }
            }
        }
        if dist[dst] >= 1.0 - VIOLATION_TOL {
            continue;
        }

        let mut walk = Vec::new();
        let mut cur = dst;
        while cur != src {
            let prev = pred[cur];
            walk.push(WalkEdge {
                from: nodes[prev / 2],
                to: nodes[cur / 2],
                cross: prev % 2 != cur % 2,
            });
            cur = prev;
        }
        walk.reverse();

        if let Some(ineq) = simple_odd_cycle(walk) {
            if ineq.violation(y) > VIOLATION_TOL {
                found.entry(ineq.key()).or_insert(ineq);
            }
        }
    }
    found.into_values().collect()
}

/// Violated odd-cycle inequalities on triangles, most violated first, at
/// most `limit` of them. Cheap enough to enumerate outright and far more
/// plentiful than the one cut per root of the shortest-path separator, which
/// matters on dense graphs.
pub fn separate_triangles(g: &Graph, y: &EdgeVector, limit: usize) -> Vec<OddCycleInequality> {
    let yv = |u: NodeId, v: NodeId| y.get(&edge_key(u, v)).copied().unwrap_or(0.0);
    let mut found = Vec::new();
    for u in g.nodes() {
        let higher: Vec<NodeId> = g.neighbors(u).map(|(v, _)| v).filter(|&v| v > u).collect();
        for (a, &v) in higher.iter().enumerate() {
            for &w in &higher[a + 1..] {
                if g.weight(v, w).is_none() {
                    continue;
                }
                let edges = [(u, v), (v, w), (u, w)];
                let vals = [yv(u, v), yv(v, w), yv(u, w)];
                let sum: f64 = vals.iter().sum();
                // Q = all three: sum <= 2; Q = {e}: 2 y_e - sum <= 0
                let mut candidates = vec![(sum - 2.0, vec![0, 1, 2])];
                candidates.extend((0..3).map(|e| (2.0 * vals[e] - sum, vec![e])));
                for (violation, odd) in candidates {
                    if violation > VIOLATION_TOL {
                        let ineq = OddCycleInequality {
                            cycle: edges.to_vec(),
                            odd_subset: odd.iter().map(|&e| edges[e]).collect(),
                        };
                        found.push((violation, ineq));
                    }
                }
            }
        }
    }
    found.sort_by(|a, b| b.0.total_cmp(&a.0));
    found.into_iter().take(limit).map(|(_, c)| c).collect()
}

/// Reduces an odd closed walk to a simple odd cycle whose doubled-graph length
/// is no larger: at a repeated vertex the walk splits into two closed walks of
/// which exactly one has odd parity.
fn simple_odd_cycle(mut walk: Vec<WalkEdge>) -> Option<OddCycleInequality> {
    loop {
        let mut first_seen: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut split = None;
        for (pos, e) in walk.iter().enumerate() {
            if let Some(&start) = first_seen.get(&e.from) {
                split = Some((start, pos));
                break;
            }
            first_seen.insert(e.from, pos);
        }
        let Some((a, b)) = split else { break };
        let inner_odd = walk[a..b].iter().filter(|e| e.cross).count() % 2 == 1;
        if inner_odd {
            walk = walk[a..b].to_vec();
        } else {
            walk.drain(a..b);
        }
    }
    if walk.len() < 3 {
        return None;
    }
    let cycle: Vec<_> = walk.iter().map(|e| edge_key(e.from, e.to)).collect();
    let odd_subset: BTreeSet<_> = walk
        .iter()
        .filter(|e| e.cross)
        .map(|e| edge_key(e.from, e.to))
        .collect();
    debug_assert!(odd_subset.len() % 2 == 1);
    Some(OddCycleInequality { cycle, odd_subset })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn yv(pairs: &[((NodeId, NodeId), f64)]) -> EdgeVector {
        pairs.iter().copied().collect()
    }

    fn cycle_graph(n: usize) -> Graph {
        Graph::from_edges([], (0..n).map(|i| (i, (i + 1) % n, 1.0))).unwrap()
    }

    #[test]
    fn triangle_all_cut_is_violated() {
        let g = cycle_graph(3);
        let y = yv(&[((0, 1), 1.0), ((1, 2), 1.0), ((0, 2), 1.0)]);
        let cuts = separate_odd_cycles(&g, &y);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].odd_subset.len(), 3);
        assert!((cuts[0].violation(&y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_valid_cut_is_not() {
        let g = cycle_graph(3);
        let y = yv(&[((0, 1), 1.0), ((1, 2), 1.0), ((0, 2), 0.0)]);
        assert!(separate_odd_cycles(&g, &y).is_empty());
    }

    #[test]
    fn five_cycle_all_cut() {
        let g = cycle_graph(5);
        let y: EdgeVector = g.edges().map(|(u, v, _)| ((u, v), 1.0)).collect();
        let cuts = separate_odd_cycles(&g, &y);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].cycle.len(), 5);
        assert_eq!(cuts[0].odd_subset.len(), 5);
        assert!((cuts[0].violation(&y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_enumeration() {
        let g = cycle_graph(3);
        let all = yv(&[((0, 1), 1.0), ((1, 2), 1.0), ((0, 2), 1.0)]);
        let cuts = separate_triangles(&g, &all, 10);
        assert_eq!(cuts.len(), 1);
        assert!((cuts[0].violation(&all) - 1.0).abs() < 1e-12);
        // y = (1, 0, 0): y_01 - y_12 - y_02 = 1 > 0
        let one = yv(&[((0, 1), 1.0), ((1, 2), 0.0), ((0, 2), 0.0)]);
        let cuts = separate_triangles(&g, &one, 10);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].odd_subset.iter().copied().collect::<Vec<_>>(), [(0, 1)]);
        assert!(separate_triangles(&cycle_graph(4), &one, 10).is_empty());
        assert!(separate_triangles(&g, &all, 0).is_empty());
    }

    #[test]
    fn walk_reduction_keeps_odd_part() {
        // figure-eight: triangle 0-1-2 (odd, all cross) joined at 0 with
        // triangle 0-3-4 (even: no cross)
        let e = |from, to, cross| WalkEdge { from, to, cross };
        let walk = vec![
            e(0, 3, false),
            e(3, 4, false),
            e(4, 0, false),
            e(0, 1, true),
            e(1, 2, true),
            e(2, 0, true),
        ];
        let ineq = simple_odd_cycle(walk).unwrap();
        let mut edges = ineq.cycle.clone();
        edges.sort();
        assert_eq!(edges, [(0, 1), (0, 2), (1, 2)]);
        assert_eq!(ineq.odd_subset.len(), 3);
    }
}
