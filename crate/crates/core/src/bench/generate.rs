//! Seeded instance ensembles: Erdős–Rényi and random regular graphs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{edge_key, Graph};
use crate::seed;

use super::BenchError;

/// Pairing-model attempts before giving up.
pub const REGULAR_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[serde(alias = "erdos_renyi")]
    Er,
    #[serde(alias = "random_regular")]
    Regular,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Er => "er",
            Family::Regular => "regular",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "er" | "erdos_renyi" => Ok(Family::Er),
            "regular" | "random_regular" => Ok(Family::Regular),
            other => Err(BenchError::Config(format!("unknown family {other:?}"))),
        }
    }
}

/// What to generate: `param` is the edge probability for [`Family::Er`] and
/// the degree for [`Family::Regular`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstanceSpec {
    ErdosRenyi { n: usize, density: f64, seed: u64 },
    RandomRegular { n: usize, degree: usize, seed: u64 },
}

impl InstanceSpec {
    pub fn family(&self) -> Family {
        match self {
            InstanceSpec::ErdosRenyi { .. } => Family::Er,
            InstanceSpec::RandomRegular { .. } => Family::Regular,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            InstanceSpec::ErdosRenyi { n, .. } | InstanceSpec::RandomRegular { n, .. } => n,
        }
    }

    /// Edge probability, or `k / (n - 1)` for a `k`-regular graph.
    pub fn density(&self) -> f64 {
        match *self {
            InstanceSpec::ErdosRenyi { density, .. } => density,
            InstanceSpec::RandomRegular { n, degree, .. } if n > 1 => degree as f64 / (n - 1) as f64,
            InstanceSpec::RandomRegular { .. } => 0.0,
        }
    }

    pub fn generate(&self) -> Result<Graph, BenchError> {
        match *self {
            InstanceSpec::ErdosRenyi { n, density, seed } => gen_erdos_renyi(n, density, seed),
            InstanceSpec::RandomRegular { n, degree, seed } => gen_random_regular(n, degree, seed),
        }
    }
}

/// Every pair joined independently with probability `d`, unit weights.
pub fn gen_erdos_renyi(n: usize, d: f64, seed: u64) -> Result<Graph, BenchError> {
    if !(0.0..=1.0).contains(&d) {
        return Err(BenchError::InvalidSpec(format!("density {d} outside [0, 1]")));
    }
    let mut rng = seed::rng_from(seed, &[0x6572]);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < d {
                edges.push((u, v, 1.0));
            }
        }
    }
    Ok(Graph::from_edges(0..n, edges)?)
}

/// Pairing model: shuffle `n·k` stubs, match consecutive ones, and start over
/// if a loop or repeated pair appears.
pub fn gen_random_regular(n: usize, k: usize, seed: u64) -> Result<Graph, BenchError> {
    if k >= n.max(1) || (n * k) % 2 == 1 {
        return Err(BenchError::InvalidSpec(format!("no simple {k}-regular graph on {n} nodes")));
    }
    let mut rng = seed::rng_from(seed, &[0x0072_6567]);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
    'attempt: for _ in 0..REGULAR_ATTEMPTS {
        stubs.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        for pair in stubs.chunks_exact(2) {
            if pair[0] == pair[1] || !seen.insert(edge_key(pair[0], pair[1])) {
                continue 'attempt;
            }
        }
        return Ok(Graph::from_edges(0..n, seen.into_iter().map(|(u, v)| (u, v, 1.0)))?);
    }
    Err(BenchError::GenerationFailed(REGULAR_ATTEMPTS))
}
