//! Recursive correlation-guided shrinking for weighted MaxCut.
//!
//! A [`CorrelationOracle`] estimates `⟨x_i x_j⟩` on the edges of the current
//! graph; the [`engine`] repeatedly merges the most strongly correlated pair,
//! then lifts the two-node solution back through the shrink history.

pub mod bench;
pub mod engine;
pub mod graph;
pub mod instance;
pub mod lp;
pub mod qaoa;
pub mod sdp;
pub mod seed;

pub use engine::{
    run, CorrelationOracle, CorrelationSet, EngineConfig, EngineError, OracleError, RecalcInterval,
    RunOutcome, Trace,
};
pub use graph::{Assignment, Graph, GraphError, NodeId, Sign};
pub use instance::{parse_instance, write_instance, ParseError};
pub use lp::LpOracle;
pub use qaoa::QaoaOracle;
pub use sdp::{GwOracle, SdpOracle};
