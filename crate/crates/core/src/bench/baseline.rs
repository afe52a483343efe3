//! Reference cut values: exhaustive search for small graphs, multi-start
//! local search otherwise.

use rand::Rng;

use crate::graph::{Assignment, Graph, Sign};
use crate::seed;

use super::BenchError;

/// Largest graph [`exact_maxcut`] accepts.
pub const EXACT_MAX_NODES: usize = 24;

fn adjacency(g: &Graph) -> Vec<Vec<(usize, f64)>> {
    let index = g.index_map();
    let mut adj = vec![Vec::new(); g.node_count()];
    for (u, v, w) in g.edges() {
        adj[index[&u]].push((index[&v], w));
        adj[index[&v]].push((index[&u], w));
    }
    adj
}

/// Walks all `2^(n-1)` labellings with the first node fixed to `+1` in
/// Gray-code order, updating the cut in `O(deg)` per flip.
///
/// `gain[i] = x_i Σ_j w_ij x_j` is the change in cut value from flipping `i`.
pub fn exact_maxcut(g: &Graph) -> Result<(f64, Assignment), BenchError> {
    let n = g.node_count();
    if n > EXACT_MAX_NODES {
        return Err(BenchError::TooLarge(n));
    }
    let nodes: Vec<_> = g.nodes().collect();
    if n <= 1 {
        return Ok((0.0, Assignment::uniform(g, Sign::Plus)));
    }
    let adj = adjacency(g);
    let mut x = vec![1.0f64; n];
    let mut gain: Vec<f64> = adj.iter().map(|nb| nb.iter().map(|&(_, w)| w).sum()).collect();
    let (mut cut, mut best, mut best_mask) = (0.0, 0.0, 0u32);
    let mut mask = 0u32;
    for k in 1u32..1 << (n - 1) {
        let i = k.trailing_zeros() as usize + 1;
        cut += gain[i];
        gain[i] = -gain[i];
        for &(j, w) in &adj[i] {
            // the x_i x_j term of gain[j] changes sign
            gain[j] -= 2.0 * w * x[i] * x[j];
        }
        x[i] = -x[i];
        mask ^= 1 << i;
        if cut > best {
            best = cut;
            best_mask = mask;
        }
    }
    let assignment = nodes
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, if best_mask >> i & 1 == 1 { Sign::Minus } else { Sign::Plus }))
        .collect();
    Ok((best, assignment))
}

/// Best-improvement single-flip hill climbing from `restarts` random starts.
pub fn local_search_baseline(g: &Graph, restarts: usize, seed: u64) -> f64 {
    local_search(g, restarts, seed).0
}

/// [`local_search_baseline`] together with the best labelling found.
pub fn local_search(g: &Graph, restarts: usize, seed: u64) -> (f64, Assignment) {
    let n = g.node_count();
    let nodes: Vec<_> = g.nodes().collect();
    let adj = adjacency(g);
    let mut rng = seed::rng_from(seed, &[0x6c73]);
    let mut best = (f64::NEG_INFINITY, vec![1.0; n]);
    for _ in 0..restarts.max(1) {
        let mut x: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let mut gain: Vec<f64> = (0..n)
            .map(|i| x[i] * adj[i].iter().map(|&(j, w)| w * x[j]).sum::<f64>())
            .collect();
        let mut cut: f64 = adj
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&(j, _)| i < j).map(move |&(j, w)| (i, j, w)))
            .filter(|&(i, j, _)| x[i] != x[j])
            .map(|(_, _, w)| w)
            .sum();
        loop {
            let Some((i, &gi)) = gain.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else { break };
            if gi <= 1e-12 {
                break;
            }
            cut += gi;
            gain[i] = -gi;
            for &(j, w) in &adj[i] {
                gain[j] -= 2.0 * w * x[i] * x[j];
            }
            x[i] = -x[i];
        }
        if cut > best.0 {
            best = (cut, x);
        }
    }
    let assignment = nodes
        .iter()
        .zip(&best.1)
        .map(|(&v, &xi)| (v, Sign::of(xi)))
        .collect();
    (best.0.max(0.0), assignment)
}

/// `s_a / s_g`.
pub fn approximation_ratio(s_a: f64, s_g: f64) -> Result<f64, BenchError> {
    if s_g > 0.0 {
        Ok(s_a / s_g)
    } else {
        Err(BenchError::ZeroBaseline)
    }
}
