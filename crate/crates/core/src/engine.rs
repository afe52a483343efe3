//! The recursive shrinking loop.
//!
//! Correlations are requested from an oracle, consumed in descending `|b|`
//! order, and every consumed correlation merges two nodes until two remain.
//! Correlations are recomputed on the shrunk graph every `r` counted steps.
//! The final two-node graph is solved directly and the history lifts the
//! solution back to the original graph.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use rand::{Rng as _, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::{Assignment, Graph, GraphError, NodeId, Remapped, ShrinkHistory, ShrinkStep, Sign};
use crate::lp::LpError;
use crate::qaoa::QaoaError;
use crate::seed::{self, Rng};

/// Slack allowed on `|b| <= 1` before clamping.
pub const CORRELATION_SLACK: f64 = 1e-9;

/// Resolution at which two `|b|` values count as tied.
const TIE_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Qaoa(#[from] QaoaError),
    #[error("correlation {b} on pair {pair:?} is outside [-1, 1]")]
    OutOfRange { pair: (NodeId, NodeId), b: f64 },
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("terminal solve needs exactly 2 nodes, got {0}")]
    WrongSize(usize),
    #[error("oracle failure: {0}")]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub pair: (NodeId, NodeId),
    pub b: f64,
}

/// Per-pair correlations computed for one graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorrelationSet {
    entries: Vec<Correlation>,
}

impl CorrelationSet {
    /// Validates and clamps the raw values to `[-1, 1]`.
    pub fn new(entries: impl IntoIterator<Item = ((NodeId, NodeId), f64)>) -> Result<Self, OracleError> {
        let entries = entries
            .into_iter()
            .map(|(pair, b)| {
                if !b.is_finite() || b.abs() > 1.0 + CORRELATION_SLACK {
                    Err(OracleError::OutOfRange { pair, b })
                } else {
                    Ok(Correlation { pair, b: b.clamp(-1.0, 1.0) })
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(CorrelationSet { entries })
    }

    /// Builds a set from values already known to lie in `[-1, 1]` up to
    /// rounding; anything outside is clamped.
    pub fn clamped(entries: impl IntoIterator<Item = ((NodeId, NodeId), f64)>) -> Self {
        CorrelationSet {
            entries: entries
                .into_iter()
                .map(|(pair, b)| Correlation { pair, b: b.clamp(-1.0, 1.0) })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[Correlation] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, pair: (NodeId, NodeId)) -> Option<f64> {
        self.entries.iter().find(|c| c.pair == pair).map(|c| c.b)
    }
}

/// A source of pairwise correlations for a (possibly shrunk) graph.
pub trait CorrelationOracle: Sync {
    fn name(&self) -> &str;

    fn correlations(&self, g: &Graph, rng: &mut dyn RngCore) -> Result<CorrelationSet, OracleError>;
}

/// How many counted steps share one correlation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RecalcInterval {
    Every(NonZeroUsize),
    Never,
}

impl RecalcInterval {
    pub fn every(r: usize) -> Self {
        RecalcInterval::Every(NonZeroUsize::new(r).expect("recalculation interval must be >= 1"))
    }

    /// Whether a recalculation is scheduled at counted step `step`.
    pub fn is_due(self, step: usize) -> bool {
        match self {
            RecalcInterval::Every(r) => step.is_multiple_of(r.get()),
            RecalcInterval::Never => step == 0,
        }
    }
}

impl fmt::Display for RecalcInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecalcInterval::Every(r) => write!(f, "{r}"),
            RecalcInterval::Never => write!(f, "inf"),
        }
    }
}

impl FromStr for RecalcInterval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "Infinity" => Ok(RecalcInterval::Never),
            other => other
                .parse::<usize>()
                .ok()
                .and_then(NonZeroUsize::new)
                .map(RecalcInterval::Every)
                .ok_or_else(|| format!("invalid recalculation interval `{s}` (positive integer or `inf`)")),
        }
    }
}

impl Serialize for RecalcInterval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RecalcInterval::Every(r) => s.serialize_u64(r.get() as u64),
            RecalcInterval::Never => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for RecalcInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = RecalcInterval;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive integer or \"inf\"")
            }
            fn visit_u64<E: serde::de::Error>(self, r: u64) -> Result<Self::Value, E> {
                self.visit_str(&r.to_string())
            }
            fn visit_i64<E: serde::de::Error>(self, r: i64) -> Result<Self::Value, E> {
                self.visit_str(&r.to_string())
            }
            fn visit_f64<E: serde::de::Error>(self, r: f64) -> Result<Self::Value, E> {
                match r {
                    f64::INFINITY => Ok(RecalcInterval::Never),
                    r if r.fract() == 0.0 && r >= 1.0 => self.visit_u64(r as u64),
                    _ => Err(E::invalid_value(serde::de::Unexpected::Float(r), &self)),
                }
            }
            fn visit_str<E: serde::de::Error>(self, s: &str) -> Result<Self::Value, E> {
                s.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub recalc: RecalcInterval,
    pub seed: u64,
}

/// Stream used for the `index`-th oracle invocation of a run seeded with `seed`.
pub fn oracle_rng(seed: u64, index: usize) -> Rng {
    seed::rng_from(seed, &[0x6f72_6163, index as u64])
}

fn tie_key(abs_b: f64) -> u64 {
    (abs_b / TIE_RESOLUTION).round() as u64
}

/// Correlations awaiting consumption, strongest last.
#[derive(Debug, Clone, Default)]
pub struct CorrelationQueue {
    entries: Vec<(u64, Correlation)>,
}

impl CorrelationQueue {
    pub fn new(set: &CorrelationSet) -> Self {
        let mut entries: Vec<_> = set.entries().iter().map(|c| (tie_key(c.b.abs()), *c)).collect();
        entries.sort_by_key(|&(key, _)| key);
        CorrelationQueue { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Removes a uniformly random entry among those tied for the largest `|b|`.
    fn pop_strongest(&mut self, rng: &mut impl RngCore) -> Option<Correlation> {
        let &(top, _) = self.entries.last()?;
        let block_start = self.entries.partition_point(|&(key, _)| key < top);
        let block_len = self.entries.len() - block_start;
        let pick = if block_len > 1 {
            block_start + rng.gen_range(0..block_len)
        } else {
            block_start
        };
        Some(self.entries.swap_remove(pick).1)
    }
}

/// The next merge chosen from the queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub removed: NodeId,
    pub kept: NodeId,
    pub sigma: Sign,
    pub abs_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectOutcome {
    Step { selection: Selection, skipped: usize },
    Exhausted { skipped: usize },
}

/// Pops correlations (strongest first, ties at random) until one maps to two
/// distinct live nodes. The first endpoint of the remapped pair is removed.
pub fn select_step(queue: &mut CorrelationQueue, history: &ShrinkHistory, rng: &mut impl RngCore) -> SelectOutcome {
    let mut skipped = 0;
    while let Some(c) = queue.pop_strongest(rng) {
        match history.remap_correlation(c.pair, c.b) {
            Remapped::Degenerate => skipped += 1,
            Remapped::Pair { pair, b } => {
                return SelectOutcome::Step {
                    selection: Selection {
                        removed: pair.0,
                        kept: pair.1,
                        sigma: Sign::of(b),
                        abs_b: b.abs(),
                    },
                    skipped,
                }
            }
        }
    }
    SelectOutcome::Exhausted { skipped }
}

/// Optimal labels for a two-node graph. A zero or absent edge gets opposite
/// labels.
pub fn solve_terminal(g: &Graph) -> Result<Assignment, EngineError> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    let &[a, b] = nodes.as_slice() else {
        return Err(EngineError::WrongSize(nodes.len()));
    };
    let w = g.weight(a, b).unwrap_or(0.0);
    let label_b = if w < 0.0 { Sign::Plus } else { Sign::Minus };
    Ok([(a, Sign::Plus), (b, label_b)].into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    /// `(removed, kept)`.
    pub pair: (NodeId, NodeId),
    pub sigma: i8,
    pub abs_b: f64,
    pub recalculated: bool,
    pub skipped_count: usize,
    pub offset: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub recalculations: usize,
    /// Steps taken without a correlation because no edges were left.
    pub forced_merges: usize,
}

impl Trace {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        self.steps
            .iter()
            .map(|s| serde_json::to_string(s).expect("trace step serializes") + "\n")
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub assignment: Assignment,
    pub cut_value: f64,
    pub trace: Trace,
}

/// Runs the shrinking algorithm to completion.
pub fn run(g: &Graph, oracle: &dyn CorrelationOracle, cfg: &EngineConfig) -> Result<RunOutcome, EngineError> {
    let n = g.node_count();
    if n == 0 {
        return Err(EngineError::EmptyGraph);
    }
    if n == 1 {
        let assignment = Assignment::uniform(g, Sign::Plus);
        return Ok(RunOutcome { assignment, cut_value: 0.0, trace: Trace::default() });
    }

    let mut rng = seed::rng_from(cfg.seed, &[0x7469_6573]);
    let mut live = g.clone();
    let mut history = ShrinkHistory::new();
    let mut trace = Trace::default();
    let mut queue = CorrelationQueue::default();
    let mut last_recalc: Option<usize> = None;

    let recalc = |live: &Graph, trace: &mut Trace| -> Result<CorrelationQueue, EngineError> {
        let mut orng = oracle_rng(cfg.seed, trace.recalculations);
        let set = oracle.correlations(live, &mut orng)?;
        trace.recalculations += 1;
        Ok(CorrelationQueue::new(&set))
    };

    let target = n - 2;
    let mut counted = 0;
    while counted < target {
        let mut recalculated = false;
        if cfg.recalc.is_due(counted) && last_recalc != Some(counted) {
            queue = recalc(&live, &mut trace)?;
            last_recalc = Some(counted);
            recalculated = true;
        }

        let mut outcome = select_step(&mut queue, &history, &mut rng);
        let mut skipped = 0;
        if let SelectOutcome::Exhausted { skipped: s } = outcome {
            skipped += s;
            if !recalculated {
                queue = recalc(&live, &mut trace)?;
                last_recalc = Some(counted);
                recalculated = true;
                outcome = select_step(&mut queue, &history, &mut rng);
            }
        }

        let selection = match outcome {
            SelectOutcome::Step { selection, skipped: s } => {
                skipped += s;
                selection
            }
            SelectOutcome::Exhausted { skipped: s } => {
                // No edges left: any relative sign is optimal.
                skipped += s;
                trace.forced_merges += 1;
                let mut nodes = live.nodes();
                let kept = nodes.next().expect("at least three live nodes");
                let removed = nodes.next().expect("at least three live nodes");
                Selection { removed, kept, sigma: Sign::Plus, abs_b: 0.0 }
            }
        };

        let offset = live.shrink_edge_in_place(selection.removed, selection.kept, selection.sigma)?;
        history.push(ShrinkStep {
            kept: selection.kept,
            removed: selection.removed,
            sigma: selection.sigma,
            offset,
        });
        trace.steps.push(TraceStep {
            step: counted,
            pair: (selection.removed, selection.kept),
            sigma: selection.sigma.as_i8(),
            abs_b: selection.abs_b,
            recalculated,
            skipped_count: skipped,
            offset,
        });
        counted += 1;
    }

    let terminal = solve_terminal(&live)?;
    let assignment = history.reconstruct(&terminal)?;
    let cut_value = g.cut_value(&assignment)?;
    Ok(RunOutcome { assignment, cut_value, trace })
}
