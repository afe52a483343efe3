//! Median and quartiles of approximation ratios per setting.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::engine::RecalcInterval;

use super::{BenchError, RunRecord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub oracle: String,
    pub r: Option<RecalcInterval>,
    pub density: f64,
    pub p: Option<usize>,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub count: usize,
}

/// Inclusive linear interpolation between order statistics: position
/// `(n - 1) q` in the sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> Result<f64, BenchError> {
    if sorted.is_empty() {
        return Err(BenchError::EmptyGroup);
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

type GroupKey = (String, Option<RecalcInterval>, u64, Option<usize>);

/// Groups by `(oracle, r, density, p)`; groups come out in key order.
pub fn summarize(records: &[RunRecord]) -> Result<Vec<Summary>, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyGroup);
    }
    let mut groups: BTreeMap<GroupKey, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.oracle.clone(), r.r, r.density.to_bits(), r.p))
            .or_default()
            .push(r.ratio);
    }
    let mut out: Vec<Summary> = groups
        .into_iter()
        .map(|((oracle, r, density, p), mut ratios)| {
            ratios.sort_by(f64::total_cmp);
            Ok(Summary {
                oracle,
                r,
                density: f64::from_bits(density),
                p,
                median: quantile(&ratios, 0.5)?,
                q1: quantile(&ratios, 0.25)?,
                q3: quantile(&ratios, 0.75)?,
                count: ratios.len(),
            })
        })
        .collect::<Result<_, BenchError>>()?;
    out.sort_by(|a, b| {
        (&a.oracle, a.r, a.p)
            .cmp(&(&b.oracle, b.r, b.p))
            .then(a.density.total_cmp(&b.density))
    });
    Ok(out)
}

pub fn write_summaries<W: Write>(out: W, summaries: &[Summary]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for s in summaries {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}
