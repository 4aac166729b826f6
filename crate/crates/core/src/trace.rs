use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::pathcodec::{Path, PriorityVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    /// 1-based generation index.
    pub generation: usize,
    pub best_cost_so_far: f64,
    pub generation_best_cost: f64,
}

/// Per-generation best costs of one optimizer run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GenerationTrace(Vec<GenerationRecord>);

impl GenerationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends generation `len() + 1` with this generation's best cost.
    pub fn record(&mut self, generation_best_cost: f64) {
        let best_cost_so_far = self.0.last().map_or(generation_best_cost, |r| {
            r.best_cost_so_far.min(generation_best_cost)
        });
        self.0.push(GenerationRecord {
            generation: self.0.len() + 1,
            best_cost_so_far,
            generation_best_cost,
        });
    }

    pub fn records(&self) -> &[GenerationRecord] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.0
            .windows(2)
            .all(|w| w[1].best_cost_so_far <= w[0].best_cost_so_far)
    }

    /// CSV with header `generation,best_cost_so_far,generation_best_cost`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best_cost_so_far,generation_best_cost\n");
        for r in &self.0 {
            let _ = writeln!(
                out,
                "{},{},{}",
                r.generation, r.best_cost_so_far, r.generation_best_cost
            );
        }
        out
    }
}

/// What an optimizer run returns: the best route seen, the genome that
/// decoded to it, and the convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Path,
    pub best_keys: PriorityVector,
    pub trace: GenerationTrace,
    /// Optimizer loop only; excludes scenario and cost-matrix construction.
    pub wall_time: Duration,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_so_far_tracks_minimum() {
        let mut t = GenerationTrace::new();
        for c in [3.0, 4.0, 2.0, 2.5] {
            t.record(c);
        }
        let so_far: Vec<f64> = t.records().iter().map(|r| r.best_cost_so_far).collect();
        assert_eq!(so_far, vec![3.0, 3.0, 2.0, 2.0]);
        assert!(t.is_non_increasing());
        assert_eq!(t.records()[3].generation, 4);
    }

    #[test]
    fn csv_layout() {
        let mut t = GenerationTrace::new();
        t.record(0.5);
        t.record(0.25);
        assert_eq!(
            t.to_csv(),
            "generation,best_cost_so_far,generation_best_cost\n1,0.5,0.5\n2,0.25,0.25\n"
        );
    }
}
