//! Exact statevector QAOA for MaxCut.
//!
//! Qubit `b` carries the live node with the `b`-th smallest id; a 0 bit means
//! `x = +1`. Each layer multiplies amplitude `idx` by `exp(-i γ C(idx))` and
//! then rotates every qubit by `exp(-i β X) = cos β I - i sin β X`.
//!
//! Parameters are optimized by a coarse grid (depth 1) or the zero-padded
//! optimum of the previous depth, refined by gradient ascent with central
//! finite differences and a backtracking line search.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::Write;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{CorrelationOracle, CorrelationSet, OracleError};
use crate::graph::{Graph, NodeId};

pub const MAX_QUBITS: usize = 24;

/// Points per axis of the depth-1 grid.
pub const GRID_POINTS: usize = 24;
/// Grid candidates handed to gradient refinement.
pub const REFINED_CANDIDATES: usize = 3;
pub const FD_STEP: f64 = 1e-4;
pub const MAX_ASCENT_ITERS: usize = 500;
pub const GRAD_TOL: f64 = 1e-6;
const MAX_BACKTRACKS: usize = 30;
const ARMIJO: f64 = 1e-4;
/// Relative improvement at or below which an accepted step ends the ascent.
const STALL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QaoaError {
    #[error("{0} qubits exceed the statevector limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("parameter lists differ in length: {betas} betas, {gammas} gammas")]
    DepthMismatch { betas: usize, gammas: usize },
    #[error("depth must be at least 1")]
    ZeroDepth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(betas: Vec<f64>, gammas: Vec<f64>) -> Result<Self, QaoaError> {
        if betas.len() != gammas.len() {
            return Err(QaoaError::DepthMismatch { betas: betas.len(), gammas: gammas.len() });
        }
        Ok(QaoaParams { betas, gammas })
    }

    pub fn depth(&self) -> usize {
        self.betas.len()
    }

    fn validate(&self) -> Result<(), QaoaError> {
        if self.betas.len() != self.gammas.len() {
            return Err(QaoaError::DepthMismatch { betas: self.betas.len(), gammas: self.gammas.len() });
        }
        Ok(())
    }

    /// Appends a layer with zero angles; the prepared state is unchanged.
    pub fn padded(&self) -> Self {
        let mut p = self.clone();
        p.betas.push(0.0);
        p.gammas.push(0.0);
        p
    }

    fn to_vec(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    fn from_slice(x: &[f64]) -> Self {
        let p = x.len() / 2;
        QaoaParams { gammas: x[..p].to_vec(), betas: x[p..].to_vec() }
    }
}

/// Cut value of every computational basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDiagonal {
    pub qubits: Vec<NodeId>,
    pub values: Vec<f64>,
}

fn check_size(g: &Graph) -> Result<usize, QaoaError> {
    let n = g.node_count();
    if n > MAX_QUBITS {
        Err(QaoaError::TooManyQubits(n))
    } else {
        Ok(n)
    }
}

/// Low qubits handled chunk-locally by the mixer (2^12 amplitudes = 64 KiB).
const BLOCK_BITS: usize = 12;

#[inline]
fn rot(x: Complex64, y: Complex64, c: f64, s: f64) -> (Complex64, Complex64) {
    // (c x - i s y, -i s x + c y)
    (
        Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re),
        Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re),
    )
}

fn rotate(buf: &mut [Complex64], q: usize, c: f64, s: f64) {
    let stride = 1usize << q;
    for block in buf.chunks_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            (*a, *b) = rot(*a, *b, c, s);
        }
    }
}

/// Rotates qubits `q` and `q + 1` in one sweep.
fn rotate_pair(buf: &mut [Complex64], q: usize, c: f64, s: f64) {
    let stride = 1usize << q;
    for block in buf.chunks_mut(stride << 2) {
        let (h0, h1) = block.split_at_mut(stride << 1);
        let (a00, a01) = h0.split_at_mut(stride);
        let (a10, a11) = h1.split_at_mut(stride);
        for k in 0..stride {
            let (x00, x01) = rot(a00[k], a01[k], c, s);
            let (x10, x11) = rot(a10[k], a11[k], c, s);
            (a00[k], a10[k]) = rot(x00, x10, c, s);
            (a01[k], a11[k]) = rot(x01, x11, c, s);
        }
    }
}

pub fn cost_diagonal(g: &Graph) -> Result<CostDiagonal, QaoaError> {
    let n = check_size(g)?;
    let index = g.index_map();
    let mut values = vec![0.0; 1 << n];
    for (u, v, w) in g.edges() {
        let mask = (1usize << index[&u]) | (1usize << index[&v]);
        for (idx, val) in values.iter_mut().enumerate() {
            let both = idx & mask;
            if both != 0 && both != mask {
                *val += w;
            }
        }
    }
    Ok(CostDiagonal { qubits: g.nodes().collect(), values })
}

/// Reusable evaluator for one graph.
#[derive(Debug, Clone)]
pub struct Simulator {
    n: usize,
    diag: CostDiagonal,
    /// When every cost value is an integer in a modest range: the minimum
    /// and, per basis state, `C(idx) - min`, so phases come from a table.
    integral: Option<(i64, u32, Vec<u32>)>,
    edges: Vec<(usize, usize)>,
    edge_pairs: Vec<(NodeId, NodeId)>,
    state: Vec<Complex64>,
    phase_table: Vec<Complex64>,
}

impl Simulator {
    pub fn new(g: &Graph) -> Result<Self, QaoaError> {
        let n = check_size(g)?;
        let diag = cost_diagonal(g)?;
        let index = g.index_map();
        let integral = {
            let all_int = diag.values.iter().all(|v| (v - v.round()).abs() < 1e-9);
            let min = diag.values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = diag.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if all_int && max - min < 1e6 {
                let levels = diag.values.iter().map(|v| (v - min).round() as u32).collect();
                Some((min.round() as i64, (max - min).round() as u32, levels))
            } else {
                None
            }
        };
        Ok(Simulator {
            n,
            integral,
            edges: g.edges().map(|(u, v, _)| (index[&u], index[&v])).collect(),
            edge_pairs: g.edges().map(|(u, v, _)| (u, v)).collect(),
            state: vec![Complex64::new(0.0, 0.0); 1 << n],
            phase_table: Vec::new(),
            diag,
        })
    }

    pub fn diagonal(&self) -> &CostDiagonal {
        &self.diag
    }

    fn apply_phase(&mut self, gamma: f64) {
        match self.integral {
            Some((min, top, ref levels)) => {
                self.phase_table.clear();
                self.phase_table
                    .extend((0..=top as i64).map(|k| Complex64::from_polar(1.0, -gamma * (min + k) as f64)));
                for (amp, &k) in self.state.iter_mut().zip(levels) {
                    *amp *= self.phase_table[k as usize];
                }
            }
            None => {
                for (amp, &c) in self.state.iter_mut().zip(&self.diag.values) {
                    *amp *= Complex64::from_polar(1.0, -gamma * c);
                }
            }
        }
    }

    /// `exp(-iβX)` on every qubit. Qubits below [`BLOCK_BITS`] are rotated
    /// inside cache-sized chunks; the rest go pairwise, so a 20-qubit state
    /// is streamed five times rather than twenty.
    fn apply_mixer(&mut self, beta: f64) {
        let (s, c) = beta.sin_cos();
        let low = self.n.min(BLOCK_BITS);
        for chunk in self.state.chunks_mut(1 << low) {
            for q in 0..low {
                rotate(chunk, q, c, s);
            }
        }
        let mut q = low;
        while q + 1 < self.n {
            rotate_pair(&mut self.state, q, c, s);
            q += 2;
        }
        if q < self.n {
            rotate(&mut self.state, q, c, s);
        }
    }

    /// Prepares the layered state; returns it by reference.
    pub fn prepare(&mut self, params: &QaoaParams) -> Result<&[Complex64], QaoaError> {
        params.validate()?;
        let amp = Complex64::new((1.0 / (1u64 << self.n) as f64).sqrt(), 0.0);
        self.state.fill(amp);
        for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
            self.apply_phase(gamma);
            self.apply_mixer(beta);
        }
        Ok(&self.state)
    }

    /// `F = Σ |amp|² C(idx)`.
    pub fn expectation(&mut self, params: &QaoaParams) -> Result<f64, QaoaError> {
        self.prepare(params)?;
        Ok(self
            .state
            .iter()
            .zip(&self.diag.values)
            .map(|(a, c)| a.norm_sqr() * c)
            .sum())
    }

    /// `⟨Z_i Z_j⟩` on every edge of the graph.
    pub fn zz_correlations(&mut self, params: &QaoaParams) -> Result<CorrelationSet, QaoaError> {
        self.prepare(params)?;
        let probs: Vec<f64> = self.state.iter().map(|a| a.norm_sqr()).collect();
        let entries: Vec<_> = self
            .edges
            .iter()
            .zip(&self.edge_pairs)
            .map(|(&(bi, bj), &pair)| {
                let mask = (1usize << bi) | (1usize << bj);
                let zz: f64 = probs
                    .iter()
                    .enumerate()
                    .map(|(idx, p)| {
                        let both = idx & mask;
                        if both == 0 || both == mask {
                            *p
                        } else {
                            -*p
                        }
                    })
                    .sum();
                (pair, zz)
            })
            .collect();
        Ok(CorrelationSet::clamped(entries))
    }

    /// Central-difference gradient of `F` with respect to `(γ..., β...)`.
    pub fn gradient(&mut self, params: &QaoaParams, h: f64) -> Result<Vec<f64>, QaoaError> {
        let x = params.to_vec();
        let mut grad = vec![0.0; x.len()];
        let mut probe = x.clone();
        for k in 0..x.len() {
            probe[k] = x[k] + h;
            let plus = self.expectation(&QaoaParams::from_slice(&probe))?;
            probe[k] = x[k] - h;
            let minus = self.expectation(&QaoaParams::from_slice(&probe))?;
            probe[k] = x[k];
            grad[k] = (plus - minus) / (2.0 * h);
        }
        Ok(grad)
    }

    /// Gradient ascent from `start`; never returns a worse point.
    ///
    /// Trial steps are Barzilai–Borwein lengths (twice the last accepted step
    /// when curvature information is unusable), shortened by backtracking
    /// until the Armijo condition holds.
    pub fn refine(&mut self, start: &QaoaParams) -> Result<(QaoaParams, f64), QaoaError> {
        let mut x = start.to_vec();
        let mut fx = self.expectation(start)?;
        let mut g = self.gradient(start, FD_STEP)?;
        let mut step = 0.1 / g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
        for _ in 0..MAX_ASCENT_ITERS {
            if g.iter().all(|v| v.abs() < GRAD_TOL) {
                break;
            }
            let g_sq: f64 = g.iter().map(|v| v * v).sum();
            let mut t = match &previous {
                Some((dx, dg)) => {
                    let sy: f64 = dx.iter().zip(dg).map(|(a, b)| a * b).sum();
                    let ss: f64 = dx.iter().map(|a| a * a).sum();
                    // ascent near a maximum has s·y < 0
                    if sy < 0.0 { ss / -sy } else { 2.0 * step }
                }
                None => 2.0 * step,
            };
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + t * gi).collect();
                let fc = self.expectation(&QaoaParams::from_slice(&cand))?;
                if fc >= fx + ARMIJO * t * g_sq {
                    accepted = Some((cand, fc));
                    break;
                }
                t *= 0.5;
            }
            let Some((cand, fc)) = accepted else { break };
            // the finite-difference gradient has a truncation floor that can
            // sit above GRAD_TOL; stop once steps no longer pay
            let stalled = fc - fx <= STALL_TOL * fx.abs().max(1.0);
            let gc = self.gradient(&QaoaParams::from_slice(&cand), FD_STEP)?;
            previous = Some((
                cand.iter().zip(&x).map(|(a, b)| a - b).collect(),
                gc.iter().zip(&g).map(|(a, b)| a - b).collect(),
            ));
            x = cand;
            fx = fc;
            g = gc;
            step = t;
            if stalled {
                break;
            }
        }
        Ok((QaoaParams::from_slice(&x), fx))
    }

    /// Depth-`p` optimum: grid search at depth 1, zero-padded previous optimum
    /// above that, plus any user angles of matching depth; the best
    /// [`REFINED_CANDIDATES`] starts are refined and the best result wins
    /// (earliest candidate on ties).
    pub fn optimize(&mut self, depth: usize, init: &[QaoaParams]) -> Result<Optimized, QaoaError> {
        if depth == 0 {
            return Err(QaoaError::ZeroDepth);
        }
        let mut per_depth = Vec::with_capacity(depth);
        let mut previous: Option<QaoaParams> = None;
        for p in 1..=depth {
            let mut starts: Vec<(QaoaParams, f64)> = match &previous {
                None => self.grid_search()?,
                Some(prev) => {
                    let padded = prev.padded();
                    let f = self.expectation(&padded)?;
                    vec![(padded, f)]
                }
            };
            for user in init.iter().filter(|q| q.depth() == p) {
                let f = self.expectation(user)?;
                starts.push((user.clone(), f));
            }
            // stable: grid order breaks ties
            starts.sort_by(|a, b| b.1.total_cmp(&a.1));
            starts.truncate(REFINED_CANDIDATES);

            let mut best: Option<(QaoaParams, f64)> = None;
            for (start, _) in &starts {
                let (params, f) = self.refine(start)?;
                if best.as_ref().is_none_or(|b| f > b.1) {
                    best = Some((params, f));
                }
            }
            let (params, value) = best.expect("at least one start");
            per_depth.push(value);
            previous = Some(params);
        }
        let params = previous.expect("depth >= 1");
        let value = *per_depth.last().unwrap();
        Ok(Optimized { params, value, per_depth })
    }

    /// `GRID_POINTS²` grid over `γ ∈ [-π, π]`, `β ∈ [-π/4, π/4]`, sorted by
    /// descending `F` (stable, so grid order breaks ties).
    ///
    /// Two exact shortcuts keep this cheap. The state at `(-γ, -β)` is the
    /// complex conjugate of the state at `(γ, β)`, so only the half grid with
    /// `γ` below the midpoint is simulated and mirrored. And conjugating
    /// `Z_i Z_j` by the last mixer gives `c²ZZ + cs(ZY + YZ) + s²YY` with
    /// `c = cos 2β`, `s = sin 2β`, so for fixed `γ` the landscape is
    /// `a + b cos 4β + c sin 4β`: three simulations fix the whole `β` column.
    fn grid_search(&mut self) -> Result<Vec<(QaoaParams, f64)>, QaoaError> {
        let last = (GRID_POINTS - 1) as f64;
        let gamma_at = |a: usize| -PI + 2.0 * PI * a as f64 / last;
        let beta_at = |b: usize| -FRAC_PI_4 + 2.0 * FRAC_PI_4 * b as f64 / last;
        let mut value = vec![vec![0.0; GRID_POINTS]; GRID_POINTS];
        for a in 0..GRID_POINTS.div_ceil(2) {
            let gamma = gamma_at(a);
            let probe = [0.0, PI / 8.0, -PI / 8.0];
            let mut f = [0.0; 3];
            for (fk, &beta) in f.iter_mut().zip(&probe) {
                *fk = self.expectation(&QaoaParams { betas: vec![beta], gammas: vec![gamma] })?;
            }
            // f0 = A + B, f± = A ± C  (cos 4β = 0, sin 4β = ±1 at ±π/8)
            let mean = 0.5 * (f[1] + f[2]);
            let (cos_coef, sin_coef) = (f[0] - mean, 0.5 * (f[1] - f[2]));
            for b in 0..GRID_POINTS {
                let four_beta = 4.0 * beta_at(b);
                let v = mean + cos_coef * four_beta.cos() + sin_coef * four_beta.sin();
                value[a][b] = v;
                value[GRID_POINTS - 1 - a][GRID_POINTS - 1 - b] = v;
            }
        }
        let mut out = Vec::with_capacity(GRID_POINTS * GRID_POINTS);
        for (a, row) in value.iter().enumerate() {
            for (b, &f) in row.iter().enumerate() {
                out.push((QaoaParams { betas: vec![beta_at(b)], gammas: vec![gamma_at(a)] }, f));
            }
        }
        out.sort_by(|x, y| y.1.total_cmp(&x.1));
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub params: QaoaParams,
    pub value: f64,
    /// Optimized `F` at every depth up to the requested one.
    pub per_depth: Vec<f64>,
}

pub fn apply_layers(g: &Graph, params: &QaoaParams) -> Result<Vec<Complex64>, QaoaError> {
    let mut sim = Simulator::new(g)?;
    Ok(sim.prepare(params)?.to_vec())
}

pub fn expectation(g: &Graph, params: &QaoaParams) -> Result<f64, QaoaError> {
    Simulator::new(g)?.expectation(params)
}

pub fn zz_correlations(g: &Graph, params: &QaoaParams) -> Result<CorrelationSet, QaoaError> {
    Simulator::new(g)?.zz_correlations(params)
}

pub fn optimize(g: &Graph, depth: usize, init: &[QaoaParams]) -> Result<Optimized, QaoaError> {
    Simulator::new(g)?.optimize(depth, init)
}

/// Memoized optimizations keyed by graph, depth and initial angles. The
/// optimizer is deterministic, so sharing results between runs on the same
/// graph changes nothing but the running time.
#[derive(Debug, Default)]
pub struct OptimizationCache {
    entries: Mutex<HashMap<String, Optimized>>,
}

impl OptimizationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn key(g: &Graph, depth: usize, init: &[QaoaParams]) -> String {
        let mut key = format!("{depth};");
        for v in g.nodes() {
            let _ = write!(key, "{v},");
        }
        key.push(';');
        for (u, v, w) in g.edges() {
            let _ = write!(key, "{u}-{v}:{:x},", w.to_bits());
        }
        for q in init {
            for x in q.gammas.iter().chain(&q.betas) {
                let _ = write!(key, "{:x},", x.to_bits());
            }
            key.push('|');
        }
        key
    }
}

/// Correlations `⟨Z_i Z_j⟩` in the optimized depth-`p` state.
#[derive(Debug, Clone, Default)]
pub struct QaoaOracle {
    pub depth: usize,
    pub init: Vec<QaoaParams>,
    pub cache: Option<Arc<OptimizationCache>>,
}

impl QaoaOracle {
    pub fn new(depth: usize) -> Self {
        QaoaOracle { depth, init: Vec::new(), cache: None }
    }

    pub fn with_cache(mut self, cache: Arc<OptimizationCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    /// Optimized parameters for `g`, through the cache when one is attached.
    pub fn optimize(&self, sim: &mut Simulator, g: &Graph) -> Result<Optimized, QaoaError> {
        let Some(cache) = &self.cache else {
            return sim.optimize(self.depth, &self.init);
        };
        let key = OptimizationCache::key(g, self.depth, &self.init);
        if let Some(hit) = cache.entries.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let best = sim.optimize(self.depth, &self.init)?;
        cache.entries.lock().expect("cache lock").insert(key, best.clone());
        Ok(best)
    }
}

impl CorrelationOracle for QaoaOracle {
    fn name(&self) -> &str {
        "qaoa"
    }

    fn correlations(&self, g: &Graph, _rng: &mut dyn RngCore) -> Result<CorrelationSet, OracleError> {
        let mut sim = Simulator::new(g)?;
        let best = self.optimize(&mut sim, g)?;
        Ok(sim.zz_correlations(&best.params)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(NodeId, NodeId, f64)]) -> Graph {
        Graph::from_edges([], edges.iter().copied()).unwrap()
    }

    fn params(betas: &[f64], gammas: &[f64]) -> QaoaParams {
        QaoaParams::new(betas.to_vec(), gammas.to_vec()).unwrap()
    }

    #[test]
    fn diagonal_examples() {
        let d = cost_diagonal(&graph(&[(0, 1, 1.0)])).unwrap();
        assert_eq!(d.values, [0.0, 1.0, 1.0, 0.0]);
        let t = cost_diagonal(&graph(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])).unwrap();
        assert_eq!(t.values.iter().copied().fold(0.0, f64::max), 2.0);
        let e = cost_diagonal(&Graph::from_edges([0, 1], []).unwrap()).unwrap();
        assert_eq!(e.values, [0.0; 4]);
    }

    #[test]
    fn too_many_qubits() {
        let g = Graph::from_edges(0..25, []).unwrap();
        assert_eq!(cost_diagonal(&g), Err(QaoaError::TooManyQubits(25)));
    }

    #[test]
    fn zero_angles_keep_uniform_state() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 2.0)]);
        let s = apply_layers(&g, &params(&[0.0], &[0.0])).unwrap();
        for a in &s {
            assert!((a - Complex64::new(1.0 / 8f64.sqrt(), 0.0)).norm() < 1e-15);
        }
        assert!((expectation(&g, &params(&[0.0], &[0.0])).unwrap() - 1.5).abs() < 1e-12);
        let zz = zz_correlations(&g, &params(&[0.0], &[0.0])).unwrap();
        assert!(zz.entries().iter().all(|c| c.b.abs() < 1e-12));
    }

    #[test]
    fn single_qubit_mixer_by_hand() {
        // |+> = (1,1)/√2; exp(-iβX)|+> = e^{-iβ}|+>, so both amplitudes are
        // (cos β - i sin β)/√2 and ⟨Z⟩ = 0.
        let g = Graph::from_edges([0], []).unwrap();
        let beta = FRAC_PI_4;
        let s = apply_layers(&g, &params(&[beta], &[0.3])).unwrap();
        let expect = Complex64::new(beta.cos(), -beta.sin()) / 2f64.sqrt();
        for a in &s {
            assert!((a - expect).norm() < 1e-15);
        }
        let z = s[0].norm_sqr() - s[1].norm_sqr();
        assert!(z.abs() < 1e-15);
    }

    #[test]
    fn empty_graph_expectation_is_zero() {
        let g = Graph::from_edges([0, 1, 2], []).unwrap();
        assert_eq!(expectation(&g, &params(&[0.3], &[1.1])).unwrap(), 0.0);
    }

    #[test]
    fn norm_is_preserved() {
        let g = graph(&[(0, 1, 1.0), (1, 2, -2.0), (2, 3, 1.5), (0, 3, 1.0)]);
        let s = apply_layers(&g, &params(&[0.4, -1.2, 0.9], &[2.1, 0.3, -0.7])).unwrap();
        let norm: f64 = s.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_edge_optimum() {
        // dense grid oracle: the p=1 single-edge landscape reaches F = 1
        let g = graph(&[(0, 1, 1.0)]);
        let mut sim = Simulator::new(&g).unwrap();
        let mut grid_best = f64::MIN;
        for i in 0..=200 {
            for j in 0..=200 {
                let gamma = -PI + 2.0 * PI * i as f64 / 200.0;
                let beta = -FRAC_PI_4 + FRAC_PI_4 * j as f64 / 100.0;
                grid_best = grid_best.max(sim.expectation(&params(&[beta], &[gamma])).unwrap());
            }
        }
        assert!((grid_best - 1.0).abs() < 1e-3);

        let best = sim.optimize(1, &[]).unwrap();
        assert!((best.value - 1.0).abs() < 1e-4, "{best:?}");
        let zz = sim.zz_correlations(&best.params).unwrap();
        assert!((zz.entries()[0].b + 1.0).abs() < 2e-4);
    }

    #[test]
    fn single_edge_optimum_state() {
        // γ = π/2, β = π/8 sends |++> to an equal mix of the two cut states
        let g = graph(&[(0, 1, 1.0)]);
        let mut sim = Simulator::new(&g).unwrap();
        let p = params(&[PI / 8.0], &[PI / 2.0]);
        let probs: Vec<f64> = sim.prepare(&p).unwrap().iter().map(|a| a.norm_sqr()).collect();
        assert!(probs[0] < 1e-12 && probs[3] < 1e-12);
        assert!((probs[1] - 0.5).abs() < 1e-12);
        assert!((sim.expectation(&p).unwrap() - 1.0).abs() < 1e-12);
        let zz = sim.zz_correlations(&p).unwrap();
        assert!((zz.entries()[0].b + 1.0).abs() < 1e-12);
    }

    /// Dense reference: explicit Kronecker-product mixer matrices.
    fn dense_state(g: &Graph, p: &QaoaParams) -> Vec<Complex64> {
        let n = g.node_count();
        let dim = 1usize << n;
        let diag = cost_diagonal(g).unwrap().values;
        let mut psi = vec![Complex64::new((1.0 / dim as f64).sqrt(), 0.0); dim];
        for (&gamma, &beta) in p.gammas.iter().zip(&p.betas) {
            for (a, c) in psi.iter_mut().zip(&diag) {
                *a *= Complex64::new(0.0, -gamma * c).exp();
            }
            let one = [
                [Complex64::new(beta.cos(), 0.0), Complex64::new(0.0, -beta.sin())],
                [Complex64::new(0.0, -beta.sin()), Complex64::new(beta.cos(), 0.0)],
            ];
            // matrix entry (r, c) = Π_q one[r_q][c_q]
            let mut next = vec![Complex64::new(0.0, 0.0); dim];
            for (r, out) in next.iter_mut().enumerate() {
                for (c, a) in psi.iter().enumerate() {
                    let m: Complex64 = (0..n).map(|q| one[(r >> q) & 1][(c >> q) & 1]).product();
                    *out += m * a;
                }
            }
            psi = next;
        }
        psi
    }

    #[test]
    fn matches_dense_matrix_reference() {
        let g = graph(&[(0, 1, 1.0), (1, 2, -0.5), (0, 2, 2.0), (2, 3, 1.25)]);
        let p = params(&[0.37, -0.9], &[1.3, -0.4]);
        let fast = apply_layers(&g, &p).unwrap();
        let slow = dense_state(&g, &p);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
        let diag = cost_diagonal(&g).unwrap().values;
        let f: f64 = slow.iter().zip(&diag).map(|(a, c)| a.norm_sqr() * c).sum();
        assert!((expectation(&g, &p).unwrap() - f).abs() < 1e-12);
    }

    #[test]
    fn expectation_matches_correlation_identity() {
        // F = ½ Σ w (1 - ⟨ZZ⟩)
        let g = graph(&[(0, 1, 1.0), (1, 2, -0.5), (0, 2, 2.0), (2, 3, 1.25)]);
        let p = params(&[0.2, 0.6], &[-1.1, 0.8]);
        let f = expectation(&g, &p).unwrap();
        let zz = zz_correlations(&g, &p).unwrap();
        let via: f64 = zz
            .entries()
            .iter()
            .map(|c| 0.5 * g.weight(c.pair.0, c.pair.1).unwrap() * (1.0 - c.b))
            .sum();
        assert!((f - via).abs() < 1e-12);
    }

    #[test]
    fn point_symmetry_of_landscape() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 0.5)]);
        for (b, c) in [(0.3, 1.2), (-0.7, 2.9), (0.1, -0.4)] {
            let f = expectation(&g, &params(&[b], &[c])).unwrap();
            let m = expectation(&g, &params(&[-b], &[-c])).unwrap();
            assert!((f - m).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_difference_gradient_is_accurate() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        let mut sim = Simulator::new(&g).unwrap();
        let p = params(&[0.3], &[0.8]);
        let grad = sim.gradient(&p, FD_STEP).unwrap();
        // Richardson-style reference with a much smaller step
        let fine = sim.gradient(&p, 1e-6).unwrap();
        for (a, b) in grad.iter().zip(&fine) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn triangle_beats_uniform_baseline() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        let best = optimize(&g, 1, &[]).unwrap();
        assert!(best.value >= 1.5);
    }

    #[test]
    fn padded_start_reproduces_previous_depth() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0), (0, 2, 1.0)]);
        let mut sim = Simulator::new(&g).unwrap();
        let p = params(&[0.3], &[0.7]);
        let f1 = sim.expectation(&p).unwrap();
        let f2 = sim.expectation(&p.padded()).unwrap();
        assert_eq!(f1, f2);
        let best = sim.optimize(2, &[]).unwrap();
        assert!(best.per_depth[1] >= best.per_depth[0] - 1e-6);
    }

    #[test]
    fn user_angles_are_candidates() {
        let g = graph(&[(0, 1, 1.0)]);
        let init = vec![params(&[FRAC_PI_4 / 2.0], &[PI / 2.0])];
        let best = optimize(&g, 1, &init).unwrap();
        assert!((best.value - 1.0).abs() < 1e-4);
    }

    #[test]
    fn grid_shortcuts_match_direct_simulation() {
        let g = graph(&[(0, 1, 1.0), (1, 2, -2.0), (0, 2, 3.0), (2, 3, 1.0), (3, 4, 2.5)]);
        let mut sim = Simulator::new(&g).unwrap();
        let grid = sim.grid_search().unwrap();
        assert_eq!(grid.len(), GRID_POINTS * GRID_POINTS);
        for (p, f) in &grid {
            let direct = sim.expectation(p).unwrap();
            assert!((direct - f).abs() < 1e-9, "{p:?}: {direct} vs {f}");
        }
    }

    #[test]
    fn cache_returns_identical_optimum() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 1.0)]);
        let cache = Arc::new(OptimizationCache::new());
        let oracle = QaoaOracle::new(1).with_cache(cache.clone());
        let mut sim = Simulator::new(&g).unwrap();
        let first = oracle.optimize(&mut sim, &g).unwrap();
        let second = oracle.optimize(&mut sim, &g).unwrap();
        assert_eq!(cache.len(), 1);
        assert_eq!(first, second);
        assert_eq!(first, sim.optimize(1, &[]).unwrap());
    }

    #[test]
    fn mismatched_params_rejected() {
        let g = graph(&[(0, 1, 1.0)]);
        let bad = QaoaParams { betas: vec![0.1], gammas: vec![] };
        assert!(matches!(expectation(&g, &bad), Err(QaoaError::DepthMismatch { .. })));
        assert!(QaoaParams::new(vec![0.1], vec![]).is_err());
    }
}
