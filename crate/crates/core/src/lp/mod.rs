//! Odd-cycle LP relaxation of MaxCut solved by cutting planes, the
//! correlations `b_e = 1 - 2 y_e` derived from it, and spanning-tree rounding.

mod separation;
mod simplex;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::RngCore;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{CorrelationOracle, CorrelationSet, OracleError};
use crate::graph::{Assignment, Graph, NodeId, Sign};

pub use separation::{separate_odd_cycles, separate_triangles, OddCycleInequality, VIOLATION_TOL};
pub use simplex::{solve_lp, DualSimplex, LpProblem, LpRow, LpSolution};

/// Cutting-plane rounds; beyond this the current bound is returned flagged.
pub const MAX_ROUNDS: usize = 200;
/// Triangle cuts added per round, per node of the graph.
const TRIANGLE_CUTS_PER_NODE: usize = 4;
/// Rows whose slack exceeds this after a solve are removed.
const PURGE_SLACK: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("LP is infeasible")]
    Infeasible,
    #[error("LP is unbounded")]
    Unbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
    #[error("malformed LP: {0}")]
    Malformed(String),
}

/// Edge values `y_e ∈ [0, 1]` keyed by `(min, max)`.
pub type EdgeVector = BTreeMap<(NodeId, NodeId), f64>;

#[derive(Debug, Clone, Serialize)]
pub struct OddCycleRelaxation {
    #[serde(serialize_with = "edge_vector_as_list")]
    pub y: EdgeVector,
    /// Upper bound on the maximum cut.
    pub bound: f64,
    /// LP objective after each round, non-increasing.
    pub round_bounds: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// Set when [`MAX_ROUNDS`] ran out before separation came up empty. The
    /// bound is still valid but may be weaker than the full relaxation's.
    pub round_cap_hit: bool,
}

fn edge_vector_as_list<S: serde::Serializer>(y: &EdgeVector, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(y.iter().map(|(&(u, v), &val)| (u, v, val)))
}

impl OddCycleRelaxation {
    /// Whether every `y_e` is within [`VIOLATION_TOL`] of 0 or 1.
    pub fn is_integral(&self) -> bool {
        self.y
            .values()
            .all(|&v| v.min(1.0 - v) <= VIOLATION_TOL)
    }
}

/// Maximizes `Σ w_e y_e` over `[0, 1]^E` subject to every odd-cycle
/// inequality, adding violated inequalities until none remain.
///
/// Each round adds the most violated triangle inequalities plus the
/// shortest-path cuts, and drops rows that have gone slack (they return if
/// violated again). The loop ends only when the shortest-path separator,
/// which is exact for the whole family, finds nothing.
pub fn solve_odd_cycle_relaxation(g: &Graph) -> Result<OddCycleRelaxation, LpError> {
    let edges: Vec<(NodeId, NodeId, f64)> = g.edges().collect();
    let col: BTreeMap<(NodeId, NodeId), usize> =
        edges.iter().enumerate().map(|(i, &(u, v, _))| ((u, v), i)).collect();
    let objective: Vec<f64> = edges.iter().map(|e| e.2).collect();
    let m = edges.len();
    let mut lp = DualSimplex::new(&objective, &vec![0.0; m], &vec![1.0; m])?;

    let to_row = |ineq: &OddCycleInequality| {
        let mut coeffs: Vec<(usize, f64)> = ineq
            .cycle
            .iter()
            .map(|e| (col[e], if ineq.odd_subset.contains(e) { 1.0 } else { -1.0 }))
            .collect();
        coeffs.sort_by_key(|c| c.0);
        LpRow { coeffs, rhs: ineq.rhs() }
    };
    let row_key = |row: &LpRow| row.coeffs.iter().map(|&(j, a)| (j, a > 0.0)).collect::<Vec<_>>();

    let mut active = BTreeSet::new();
    let mut round_bounds = Vec::new();
    loop {
        lp.solve()?;
        round_bounds.push(lp.objective());
        let y: EdgeVector = edges
            .iter()
            .zip(lp.values())
            .map(|(&(u, v, _), val)| ((u, v), val.clamp(0.0, 1.0)))
            .collect();

        let mut fresh: Vec<LpRow> = Vec::new();
        for ineq in separate_triangles(g, &y, TRIANGLE_CUTS_PER_NODE * g.node_count())
            .iter()
            .chain(&separate_odd_cycles(g, &y))
        {
            let row = to_row(ineq);
            if active.insert(row_key(&row)) {
                fresh.push(row);
            }
        }
        let round_cap_hit = round_bounds.len() >= MAX_ROUNDS;
        if fresh.is_empty() || round_cap_hit {
            return Ok(OddCycleRelaxation { bound: lp.objective(), y, round_bounds, rows: lp.rows(), round_cap_hit });
        }
        for row in lp.drop_slack_rows(PURGE_SLACK) {
            active.remove(&row_key(&row));
        }
        for row in &fresh {
            lp.add_row(row)?;
        }
    }
}

/// `b_e = 1 - 2 y_e`.
pub fn lp_correlations(y: &EdgeVector) -> CorrelationSet {
    CorrelationSet::clamped(y.iter().map(|(&pair, &v)| (pair, 1.0 - 2.0 * v)))
}

/// Rounds an LP point through a maximum-weight spanning forest under
/// `|1 - 2 y_e|`: each component root gets `+1` and each tree edge copies its
/// parent's label times `sign(1 - 2 y_e)`.
pub fn spanning_tree_round(g: &Graph, y: &EdgeVector) -> Assignment {
    let index = g.index_map();
    let nodes: Vec<NodeId> = g.nodes().collect();
    let mut order: Vec<((NodeId, NodeId), f64)> = g
        .edges()
        .map(|(u, v, _)| {
            let b = 1.0 - 2.0 * y.get(&(u, v)).copied().unwrap_or(0.5);
            ((u, v), b)
        })
        .collect();
    order.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));

    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut tree: Vec<Vec<(usize, Sign)>> = vec![Vec::new(); nodes.len()];
    for ((u, v), b) in order {
        let (iu, iv) = (index[&u], index[&v]);
        let (ru, rv) = (find(&mut parent, iu), find(&mut parent, iv));
        if ru != rv {
            parent[ru] = rv;
            tree[iu].push((iv, Sign::of(b)));
            tree[iv].push((iu, Sign::of(b)));
        }
    }

    let mut label: Vec<Option<Sign>> = vec![None; nodes.len()];
    for root in 0..nodes.len() {
        if label[root].is_some() {
            continue;
        }
        label[root] = Some(Sign::Plus);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            let lx = label[x].unwrap();
            for &(nb, s) in &tree[x] {
                if label[nb].is_none() {
                    label[nb] = Some(lx * s);
                    queue.push_back(nb);
                }
            }
        }
    }
    nodes
        .into_iter()
        .zip(label)
        .map(|(v, l)| (v, l.unwrap()))
        .collect()
}

/// Correlations from the odd-cycle relaxation.
#[derive(Debug, Clone, Copy, Default)]
pub struct LpOracle;

impl CorrelationOracle for LpOracle {
    fn name(&self) -> &str {
        "lp"
    }

    fn correlations(&self, g: &Graph, _rng: &mut dyn RngCore) -> Result<CorrelationSet, OracleError> {
        let relax = solve_odd_cycle_relaxation(g)?;
        Ok(lp_correlations(&relax.y))
    }
}
