#![allow(dead_code)]

use proptest::prelude::*;
use rand::Rng;
use shrinkcut::{Assignment, Graph, NodeId, Sign};

/// Graphs on `0..n` with integer weights in `[-3, 3]` (zero weights excluded
/// from generation).
pub fn int_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let m = pairs.len();
        proptest::collection::vec(prop_oneof![Just(0i32), -3i32..=3], m).prop_map(move |ws| {
            let edges = pairs
                .iter()
                .zip(ws)
                .filter(|(_, w)| *w != 0)
                .map(|(&(u, v), w)| (u, v, w as f64));
            Graph::from_edges(0..n, edges).unwrap()
        })
    })
}

/// Unit-weight graph with each pair present with probability `d`.
pub fn random_graph(rng: &mut impl Rng, n: usize, d: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < d {
                edges.push((u, v, 1.0));
            }
        }
    }
    Graph::from_edges(0..n, edges).unwrap()
}

/// Decodes bit `i` of `mask` as the label of the `i`-th node (1 → −1).
pub fn decode(nodes: &[NodeId], mask: u64) -> Assignment {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, if mask >> i & 1 == 1 { Sign::Minus } else { Sign::Plus }))
        .collect()
}

/// Maximum cut by evaluating every labelling from scratch.
pub fn naive_maxcut(g: &Graph) -> f64 {
    let nodes: Vec<_> = g.nodes().collect();
    (0..1u64 << nodes.len())
        .map(|mask| g.cut_value(&decode(&nodes, mask)).unwrap())
        .fold(0.0, f64::max)
}
