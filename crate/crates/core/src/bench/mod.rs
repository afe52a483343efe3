//! Benchmark harness: instance ensembles, reference baselines, experiment
//! orchestration and median/quartile summaries of approximation ratios.

mod baseline;
mod experiment;
mod generate;
mod summary;

use thiserror::Error;

use crate::engine::EngineError;
use crate::graph::GraphError;
use crate::lp::LpError;
use crate::qaoa::QaoaError;

pub use baseline::{approximation_ratio, exact_maxcut, local_search, local_search_baseline, EXACT_MAX_NODES};
pub use experiment::{
    read_records, run_experiment, run_experiment_with, solve, write_records, ExperimentConfig, Method, RunRecord,
    SolveOutcome, SolveRequest, DEFAULT_RESTARTS,
};
pub use generate::{gen_erdos_renyi, gen_random_regular, Family, InstanceSpec, REGULAR_ATTEMPTS};
pub use summary::{quantile, summarize, write_summaries, Summary};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid instance parameters: {0}")]
    InvalidSpec(String),
    #[error("pairing model failed after {0} attempts")]
    GenerationFailed(usize),
    #[error("exact search supports at most {EXACT_MAX_NODES} nodes, got {0}")]
    TooLarge(usize),
    #[error("baseline cut value is not positive")]
    ZeroBaseline,
    #[error("no records to summarize")]
    EmptyGroup,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Qaoa(#[from] QaoaError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BenchError {
    /// Whether the failure is a size or iteration cap rather than bad input.
    pub fn is_resource_cap(&self) -> bool {
        use crate::engine::OracleError;
        matches!(
            self,
            BenchError::TooLarge(_)
                | BenchError::Qaoa(QaoaError::TooManyQubits(_))
                | BenchError::Lp(LpError::IterationLimit)
                | BenchError::Engine(EngineError::Oracle(OracleError::Lp(LpError::IterationLimit)))
                | BenchError::Engine(EngineError::Oracle(OracleError::Qaoa(QaoaError::TooManyQubits(_))))
        )
    }
}
