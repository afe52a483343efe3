//! Experiment configuration, single runs, and the parallel experiment driver.

use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{oracle_rng, run, CorrelationOracle, EngineConfig, RecalcInterval, Trace};
use crate::graph::{Assignment, Graph};
use crate::lp::{solve_odd_cycle_relaxation, spanning_tree_round, LpOracle};
use crate::qaoa::{OptimizationCache, QaoaOracle, QaoaParams, Simulator};
use crate::sdp::{GwOracle, SdpOracle};
use crate::seed;

use super::{approximation_ratio, exact_maxcut, local_search_baseline, BenchError, Family, InstanceSpec};
use super::baseline::EXACT_MAX_NODES;

pub const DEFAULT_RESTARTS: usize = 200;

/// A complete solution method: a shrinking run with one of the correlation
/// oracles, or the standalone algorithm behind it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Lp,
    Sdp,
    Gw,
    Qaoa,
    /// Spanning-tree rounding of the LP point.
    LpTree,
    /// Best of the sampled hyperplane roundings.
    GwRound,
    /// Optimized QAOA expectation `F`, used as the cut value.
    QaoaBare,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Lp,
        Method::Sdp,
        Method::Gw,
        Method::Qaoa,
        Method::LpTree,
        Method::GwRound,
        Method::QaoaBare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lp => "lp",
            Method::Sdp => "sdp",
            Method::Gw => "gw",
            Method::Qaoa => "qaoa",
            Method::LpTree => "lp-tree",
            Method::GwRound => "gw-round",
            Method::QaoaBare => "qaoa-bare",
        }
    }

    /// Whether the method runs the shrinking engine (and so takes `r`).
    pub fn is_shrinking(self) -> bool {
        matches!(self, Method::Lp | Method::Sdp | Method::Gw | Method::Qaoa)
    }

    pub fn uses_depth(self) -> bool {
        matches!(self, Method::Qaoa | Method::QaoaBare)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown oracle {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub method: Method,
    /// Ignored by the non-shrinking methods.
    pub recalc: RecalcInterval,
    pub depth: usize,
    pub seed: u64,
    pub init: Vec<QaoaParams>,
    pub cache: Option<Arc<OptimizationCache>>,
}

impl SolveRequest {
    pub fn new(method: Method, recalc: RecalcInterval, seed: u64) -> Self {
        SolveRequest { method, recalc, depth: 1, seed, init: Vec::new(), cache: None }
    }

    fn qaoa(&self) -> QaoaOracle {
        QaoaOracle { depth: self.depth, init: self.init.clone(), cache: self.cache.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub cut_value: f64,
    /// Absent for the bare QAOA expectation, which is not a cut.
    pub assignment: Option<Assignment>,
    pub trace: Option<Trace>,
    pub recalculations: usize,
}

/// Runs one method on one graph. Shrinking runs and the standalone rounding
/// algorithms draw from the same oracle stream, so `gw-round` reproduces the
/// hyperplane chosen by the first GW recalculation under the same seed.
pub fn solve(g: &Graph, req: &SolveRequest) -> Result<SolveOutcome, BenchError> {
    let shrink = |oracle: &dyn CorrelationOracle| -> Result<SolveOutcome, BenchError> {
        let out = run(g, oracle, &EngineConfig { recalc: req.recalc, seed: req.seed })?;
        Ok(SolveOutcome {
            cut_value: out.cut_value,
            assignment: Some(out.assignment),
            recalculations: out.trace.recalculations,
            trace: Some(out.trace),
        })
    };
    let single = |cut_value: f64, assignment: Option<Assignment>| SolveOutcome {
        cut_value,
        assignment,
        trace: None,
        recalculations: 1,
    };
    match req.method {
        Method::Lp => shrink(&LpOracle),
        Method::Sdp => shrink(&SdpOracle::default()),
        Method::Gw => shrink(&GwOracle::default()),
        Method::Qaoa => shrink(&req.qaoa()),
        Method::LpTree => {
            let relax = solve_odd_cycle_relaxation(g)?;
            let a = spanning_tree_round(g, &relax.y);
            Ok(single(g.cut_value(&a)?, Some(a)))
        }
        Method::GwRound => {
            let (_, rounding) = GwOracle::default().round(g, &mut oracle_rng(req.seed, 0));
            Ok(single(rounding.cut_value, Some(rounding.assignment)))
        }
        Method::QaoaBare => {
            let mut sim = Simulator::new(g)?;
            let best = req.qaoa().optimize(&mut sim, g)?;
            Ok(single(best.value, None))
        }
    }
}

fn default_instances() -> usize {
    1
}
fn default_recalc() -> Vec<RecalcInterval> {
    vec![RecalcInterval::every(1)]
}
fn default_depths() -> Vec<usize> {
    vec![1]
}
fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

/// JSON experiment description; the run set is the full cross product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub families: Vec<Family>,
    pub sizes: Vec<usize>,
    /// Edge probabilities for the `er` family.
    #[serde(default)]
    pub densities: Vec<f64>,
    /// Degrees for the `regular` family.
    #[serde(default)]
    pub degrees: Vec<usize>,
    /// Instances per (family, size, density or degree).
    #[serde(default = "default_instances")]
    pub instances: usize,
    pub oracles: Vec<Method>,
    #[serde(default = "default_recalc")]
    pub recalc: Vec<RecalcInterval>,
    #[serde(default = "default_depths")]
    pub depths: Vec<usize>,
    pub repetitions: usize,
    pub master_seed: u64,
    /// Local-search restarts for instances beyond exact reach.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub init_angles: Vec<QaoaParams>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let fail = |msg: &str| Err(BenchError::Config(msg.to_string()));
        if self.families.is_empty() || self.sizes.is_empty() || self.oracles.is_empty() {
            return fail("families, sizes and oracles must be non-empty");
        }
        if self.repetitions == 0 || self.instances == 0 || self.restarts == 0 {
            return fail("repetitions, instances and restarts must be positive");
        }
        if self.families.contains(&Family::Er) && self.densities.is_empty() {
            return fail("the er family needs densities");
        }
        if self.densities.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return fail("densities must lie in [0, 1]");
        }
        if self.families.contains(&Family::Regular) && self.degrees.is_empty() {
            return fail("the regular family needs degrees");
        }
        if self.oracles.iter().any(|m| m.is_shrinking()) && self.recalc.is_empty() {
            return fail("recalc must be non-empty for shrinking oracles");
        }
        if self.oracles.iter().any(|m| m.uses_depth()) && (self.depths.is_empty() || self.depths.contains(&0)) {
            return fail("depths must be non-empty and positive for QAOA oracles");
        }
        if self.init_angles.iter().any(|q| q.betas.len() != q.gammas.len() || q.betas.is_empty()) {
            return fail("init_angles entries need equal, non-empty betas and gammas");
        }
        Ok(())
    }

    /// Instance ids and specs in canonical order.
    pub fn instances(&self) -> Vec<(String, InstanceSpec)> {
        let mut out = Vec::new();
        for &family in &self.families {
            for &n in &self.sizes {
                let params: Vec<f64> = match family {
                    Family::Er => self.densities.clone(),
                    Family::Regular => self.degrees.iter().map(|&k| k as f64).collect(),
                };
                for param in params {
                    for i in 0..self.instances {
                        let seed = seed::derive_seed(
                            self.master_seed,
                            &[0x696e_7374, family as u64, n as u64, param.to_bits(), i as u64],
                        );
                        let (id, spec) = match family {
                            Family::Er => (
                                format!("er-n{n}-d{param}-{i:03}"),
                                InstanceSpec::ErdosRenyi { n, density: param, seed },
                            ),
                            Family::Regular => (
                                format!("regular-n{n}-k{param}-{i:03}"),
                                InstanceSpec::RandomRegular { n, degree: param as usize, seed },
                            ),
                        };
                        out.push((id, spec));
                    }
                }
            }
        }
        out
    }

    /// Seed of repetition `rep` on instance `id`.
    pub fn run_seed(&self, id: &str, rep: usize) -> u64 {
        seed::derive_seed(self.master_seed, &[seed::hash_str(id), rep as u64])
    }
}

/// One row of the records table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub density: f64,
    pub oracle: String,
    pub r: Option<RecalcInterval>,
    pub p: Option<usize>,
    pub repetition: usize,
    pub seed: u64,
    pub cut_value: f64,
    pub baseline_value: f64,
    pub ratio: f64,
    pub wall_time_ms: f64,
    pub recalculations: usize,
}

impl RunRecord {
    /// A ratio above 1 means the heuristic baseline was beaten, not that
    /// the method exceeded the optimum.
    pub fn exceeds_baseline(&self) -> bool {
        self.ratio > 1.0 + 1e-12
    }
}

/// [`run_experiment_with`] without progress reporting.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, BenchError> {
    run_experiment_with(cfg, &|_| {})
}

/// Runs the full cross product. Instances are processed in parallel and
/// `on_record` sees each record as it completes; the returned list is in
/// canonical order (instance, oracle, r, p, repetition) regardless.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    on_record: &(dyn Fn(&RunRecord) + Sync),
) -> Result<Vec<RunRecord>, BenchError> {
    cfg.validate()?;
    let instances = cfg.instances();
    let per_instance: Vec<Vec<RunRecord>> = instances
        .par_iter()
        .map(|(id, spec)| run_instance(cfg, id, spec, on_record))
        .collect::<Result<_, _>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}

fn run_instance(
    cfg: &ExperimentConfig,
    id: &str,
    spec: &InstanceSpec,
    on_record: &(dyn Fn(&RunRecord) + Sync),
) -> Result<Vec<RunRecord>, BenchError> {
    let g = spec.generate()?;
    let baseline = if g.node_count() <= EXACT_MAX_NODES {
        exact_maxcut(&g)?.0
    } else {
        let seed = seed::derive_seed(cfg.master_seed, &[seed::hash_str(id), 0x6261_7365]);
        local_search_baseline(&g, cfg.restarts, seed)
    };
    // one cache per instance: bare QAOA, r = ∞ and the first r = 1 step all
    // optimize the same graph
    let cache = Arc::new(OptimizationCache::new());

    let mut oracles = cfg.oracles.clone();
    oracles.sort();
    oracles.dedup();
    let recalcs: Vec<Option<RecalcInterval>> = cfg.recalc.iter().copied().map(Some).collect();
    let depths: Vec<Option<usize>> = cfg.depths.iter().copied().map(Some).collect();

    let mut records = Vec::new();
    for method in oracles {
        let rs = if method.is_shrinking() { recalcs.clone() } else { vec![None] };
        let ps = if method.uses_depth() { depths.clone() } else { vec![None] };
        for &r in &rs {
            for &p in &ps {
                for rep in 0..cfg.repetitions {
                    let seed = cfg.run_seed(id, rep);
                    let req = SolveRequest {
                        method,
                        recalc: r.unwrap_or(RecalcInterval::Never),
                        depth: p.unwrap_or(1),
                        seed,
                        init: cfg.init_angles.clone(),
                        cache: Some(cache.clone()),
                    };
                    let start = Instant::now();
                    let out = solve(&g, &req)?;
                    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
                    let ratio = match approximation_ratio(out.cut_value, baseline) {
                        Ok(ratio) => ratio,
                        // no edges: every cut is optimal
                        Err(BenchError::ZeroBaseline) if g.edge_count() == 0 => 1.0,
                        Err(e) => return Err(e),
                    };
                    let record = RunRecord {
                        instance_id: id.to_string(),
                        family: spec.family(),
                        n: g.node_count(),
                        m: g.edge_count(),
                        density: spec.density(),
                        oracle: method.as_str().to_string(),
                        r,
                        p,
                        repetition: rep,
                        seed,
                        cut_value: out.cut_value,
                        baseline_value: baseline,
                        ratio,
                        wall_time_ms,
                        recalculations: out.recalculations,
                    };
                    on_record(&record);
                    records.push(record);
                }
            }
        }
    }
    Ok(records)
}

pub fn write_records<W: Write>(out: W, records: &[RunRecord]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<RunRecord>, BenchError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(BenchError::from))
        .collect()
}
