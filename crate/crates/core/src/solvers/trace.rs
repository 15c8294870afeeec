//! Per-iteration run records shared by the box-shrinking solvers.

use std::io;

use serde::{Deserialize, Serialize};

use crate::geometry::Bounds;

/// One solver iteration: the box it started from, the box it shrank to, and
/// the incumbent (best grid point) that centered the shrink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub index: usize,
    pub box_before: Bounds,
    pub box_after: Bounds,
    pub incumbent: Vec<f64>,
    pub incumbent_value: f64,
    pub oracle_calls: u64,
}

/// Full trace of a box-shrinking run.
///
/// Invariants maintained by the solvers: `box_after` is contained in
/// `box_before` on every record (boxes only ever shrink), and
/// `total_calls` equals the sum of the per-iteration call counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub iterations: Vec<IterationRecord>,
    pub final_point: Vec<f64>,
    pub total_calls: u64,
}

/// Compact JSON summary of a [`RunTrace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub final_point: Vec<f64>,
    pub total_calls: u64,
    pub iterations: usize,
}

impl RunTrace {
    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            final_point: self.final_point.clone(),
            total_calls: self.total_calls,
            iterations: self.iterations.len(),
        }
    }

    /// Writes one CSV row per iteration with columns
    /// `index, max_edge, diameter, incumbent_value, distance_to_xstar,
    /// cumulative_calls`.
    ///
    /// `max_edge` and `diameter` describe the box *after* the iteration, so
    /// the column traces the solver's geometric convergence.
    /// `distance_to_xstar` is the Euclidean distance from the incumbent to
    /// `x_star` and is left empty when the minimizer is unknown.
    pub fn write_csv<W: io::Write>(&self, writer: W, x_star: Option<&[f64]>) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "index",
            "max_edge",
            "diameter",
            "incumbent_value",
            "distance_to_xstar",
            "cumulative_calls",
        ])?;
        let mut cumulative = 0u64;
        for rec in &self.iterations {
            cumulative += rec.oracle_calls;
            let distance = x_star.map(|xs| {
                rec.incumbent
                    .iter()
                    .zip(xs)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            });
            w.write_record([
                rec.index.to_string(),
                rec.box_after.max_edge().to_string(),
                rec.box_after.diameter().to_string(),
                rec.incumbent_value.to_string(),
                distance.map(|d| d.to_string()).unwrap_or_default(),
                cumulative.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
