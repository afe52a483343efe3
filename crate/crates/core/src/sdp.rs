//! Vector relaxation of MaxCut, hyperplane rounding, and the two
//! vector-based correlation types.
//!
//! The relaxation `max (1/2) Σ w_ij (1 - v_i·v_j)` over unit vectors is solved
//! directly in factored form by block-coordinate ascent: each node in turn is
//! set to `normalize(-Σ_j w_ij v_j)`, the exact maximizer over its own vector.
//! With rank `ceil(sqrt(2n)) + 1` the non-convex factored problem has no
//! spurious local optima in practice, so the Gram matrix never needs to be
//! formed or factorized.

use std::collections::BTreeMap;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::engine::{CorrelationOracle, CorrelationSet, OracleError};
use crate::graph::{Assignment, Graph, NodeId, Sign};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("hyperplane has rank {got}, vectors have rank {expected}")]
    RankMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpConfig {
    /// Stop once a sweep improves the objective by less than this fraction.
    pub tol: f64,
    pub max_iters: usize,
    pub restarts: usize,
}

impl Default for SdpConfig {
    fn default() -> Self {
        SdpConfig { tol: 1e-6, max_iters: 2000, restarts: 5 }
    }
}

/// Unit vectors, one per node, stored row-major.
#[derive(Debug, Clone, Serialize)]
pub struct VectorSolution {
    nodes: Vec<NodeId>,
    #[serde(skip)]
    index: BTreeMap<NodeId, usize>,
    rank: usize,
    data: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    /// Objective after every sweep.
    pub sweep_objectives: Vec<f64>,
}

impl VectorSolution {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn vector(&self, v: NodeId) -> Option<&[f64]> {
        let i = *self.index.get(&v)?;
        Some(&self.data[i * self.rank..(i + 1) * self.rank])
    }

    /// `v_u · v_v` clamped to `[-1, 1]`.
    pub fn dot(&self, u: NodeId, v: NodeId) -> f64 {
        let (a, b) = (self.vector(u).expect("known node"), self.vector(v).expect("known node"));
        dot(a, b).clamp(-1.0, 1.0)
    }

    /// Relaxation objective recomputed from the stored vectors.
    pub fn evaluate(&self, g: &Graph) -> f64 {
        g.edges()
            .map(|(u, v, w)| 0.5 * w * (1.0 - dot(self.vector(u).unwrap(), self.vector(v).unwrap())))
            .sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

pub fn rank_for(n: usize) -> usize {
    ((2.0 * n as f64).sqrt().ceil() as usize + 1).max(2)
}

/// One coordinate-ascent run from a random start.
pub fn solve_sdp_single(g: &Graph, tol: f64, max_iters: usize, rng: &mut dyn RngCore) -> VectorSolution {
    let nodes: Vec<NodeId> = g.nodes().collect();
    let index = g.index_map();
    let n = nodes.len();
    let k = rank_for(n);
    let adj: Vec<Vec<(usize, f64)>> = nodes
        .iter()
        .map(|&v| g.neighbors(v).map(|(u, w)| (index[&u], w)).collect())
        .collect();

    let mut data = vec![0.0; n * k];
    for (i, row) in data.chunks_mut(k).enumerate() {
        if adj[i].is_empty() {
            row[0] = 1.0;
            continue;
        }
        loop {
            for x in row.iter_mut() {
                *x = StandardNormal.sample(rng);
            }
            if normalize(row) > 1e-12 {
                break;
            }
        }
    }

    let objective_of = |data: &[f64]| -> f64 {
        let mut total = 0.0;
        for (i, nbrs) in adj.iter().enumerate() {
            for &(j, w) in nbrs {
                if i < j {
                    total += 0.5 * w * (1.0 - dot(&data[i * k..(i + 1) * k], &data[j * k..(j + 1) * k]));
                }
            }
        }
        total
    };

    let mut objective = objective_of(&data);
    let mut sweep_objectives = Vec::new();
    let mut converged = false;
    let mut grad = vec![0.0; k];
    for _ in 0..max_iters {
        for i in 0..n {
            grad.fill(0.0);
            for &(j, w) in &adj[i] {
                for (gk, x) in grad.iter_mut().zip(&data[j * k..(j + 1) * k]) {
                    *gk -= w * x;
                }
            }
            if normalize(&mut grad) < 1e-12 {
                continue;
            }
            data[i * k..(i + 1) * k].copy_from_slice(&grad);
        }
        let next = objective_of(&data);
        sweep_objectives.push(next);
        let improvement = next - objective;
        objective = next;
        if improvement < tol * objective.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    VectorSolution { nodes, index, rank: k, data, objective, converged, sweep_objectives }
}

/// Best of `cfg.restarts` independent runs; the earliest wins ties.
pub fn solve_sdp(g: &Graph, cfg: &SdpConfig, rng: &mut dyn RngCore) -> VectorSolution {
    let mut best: Option<VectorSolution> = None;
    for _ in 0..cfg.restarts.max(1) {
        let cand = solve_sdp_single(g, cfg.tol, cfg.max_iters, rng);
        if best.as_ref().is_none_or(|b| cand.objective > b.objective) {
            best = Some(cand);
        }
    }
    best.expect("at least one restart")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
}

impl Hyperplane {
    /// Uniformly random unit normal.
    pub fn random(rank: usize, rng: &mut dyn RngCore) -> Self {
        loop {
            let mut normal: Vec<f64> = (0..rank).map(|_| StandardNormal.sample(rng)).collect();
            if normalize(&mut normal) > 1e-12 {
                return Hyperplane { normal };
            }
        }
    }
}

/// `+1` where `v_i · r >= 0`, else `-1`.
pub fn hyperplane_round(vs: &VectorSolution, h: &Hyperplane) -> Result<Assignment, SdpError> {
    if h.normal.len() != vs.rank {
        return Err(SdpError::RankMismatch { expected: vs.rank, got: h.normal.len() });
    }
    Ok(vs
        .nodes
        .iter()
        .map(|&v| {
            let side = dot(vs.vector(v).unwrap(), &h.normal);
            (v, if side >= 0.0 { Sign::Plus } else { Sign::Minus })
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct Rounding {
    pub assignment: Assignment,
    pub hyperplane: Hyperplane,
    pub cut_value: f64,
}

/// Rounds with `k` random hyperplanes and keeps the largest cut (first wins
/// ties).
pub fn best_hyperplane(vs: &VectorSolution, g: &Graph, k: usize, rng: &mut dyn RngCore) -> Rounding {
    let mut best: Option<Rounding> = None;
    for _ in 0..k.max(1) {
        let hyperplane = Hyperplane::random(vs.rank, rng);
        let assignment = hyperplane_round(vs, &hyperplane).expect("rank matches by construction");
        let cut_value = g.cut_value(&assignment).expect("vectors cover the graph");
        if best.as_ref().is_none_or(|b| cut_value > b.cut_value) {
            best = Some(Rounding { assignment, hyperplane, cut_value });
        }
    }
    best.expect("at least one hyperplane")
}

/// `b_ij = v_i · v_j` on every edge.
pub fn sdp_correlations(g: &Graph, vs: &VectorSolution) -> CorrelationSet {
    CorrelationSet::clamped(g.edges().map(|(u, v, _)| ((u, v), vs.dot(u, v))))
}

/// `(v_i·v_j + 1)/2` when both ends share a side of the partition, else
/// `(v_i·v_j - 1)/2`.
pub fn gw_correlations(g: &Graph, vs: &VectorSolution, a: &Assignment) -> CorrelationSet {
    CorrelationSet::clamped(g.edges().map(|(u, v, _)| {
        let d = vs.dot(u, v);
        let b = if a.get(u) == a.get(v) { 0.5 * (d + 1.0) } else { 0.5 * (d - 1.0) };
        ((u, v), b)
    }))
}

/// Number of hyperplanes tried by the rounding-based methods.
pub const DEFAULT_HYPERPLANES: usize = 15;

/// Correlations `v_i · v_j`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SdpOracle {
    pub config: SdpConfig,
}

impl CorrelationOracle for SdpOracle {
    fn name(&self) -> &str {
        "sdp"
    }

    fn correlations(&self, g: &Graph, rng: &mut dyn RngCore) -> Result<CorrelationSet, OracleError> {
        let vs = solve_sdp(g, &self.config, rng);
        Ok(sdp_correlations(g, &vs))
    }
}

/// Correlations mixing vector alignment with a best-of-k rounding.
#[derive(Debug, Clone, Copy)]
pub struct GwOracle {
    pub config: SdpConfig,
    pub hyperplanes: usize,
}

impl Default for GwOracle {
    fn default() -> Self {
        GwOracle { config: SdpConfig::default(), hyperplanes: DEFAULT_HYPERPLANES }
    }
}

impl GwOracle {
    /// Relaxation plus best-of-k rounding; also the standalone rounding
    /// algorithm.
    pub fn round(&self, g: &Graph, rng: &mut dyn RngCore) -> (VectorSolution, Rounding) {
        let vs = solve_sdp(g, &self.config, rng);
        let rounding = best_hyperplane(&vs, g, self.hyperplanes, rng);
        (vs, rounding)
    }
}

impl CorrelationOracle for GwOracle {
    fn name(&self) -> &str {
        "gw"
    }

    fn correlations(&self, g: &Graph, rng: &mut dyn RngCore) -> Result<CorrelationSet, OracleError> {
        let (vs, rounding) = self.round(g, rng);
        Ok(gw_correlations(g, &vs, &rounding.assignment))
    }
}
