//! Experiment harness: sweeps node count × generation budget × seeds ×
//! algorithm, scores every run against the exact optimum, and writes
//! results, Table-1 style summaries and convergence traces as CSV.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path as FsPath;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bbbc::{run_bbbc, BbbcParams, CenterMode};
use crate::bbo::{run_bbo, BboParams};
use crate::error::{Error, Result};
use crate::fuzzycost::{build_cost_matrix, CostMatrix};
use crate::oracle::{percent_error, shortest_path};
use crate::pathcodec::Path;
use crate::topology::{generate_scenario, Placement, DEFAULT_RADIO_RANGE};
use crate::trace::{GenerationTrace, SearchResult};

/// Node counts above this are only run with `include_large`.
pub const LARGE_NODE_COUNT: usize = 100;

pub const RESULTS_HEADER: &str =
    "algorithm,n_nodes,generations,scenario_seed,opt_seed,best_cost,oracle_cost,percent_error,wall_time_ms";
pub const SUMMARY_HEADER: &str = "n_nodes,generations,bbbc_cost,bbbc_percent_error,bbbc_time_ms,bbo_cost,bbo_percent_error,bbo_time_ms,bbo_bbbc_time_ratio";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bbbc,
    Bbo,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bbbc => "bbbc",
            Algorithm::Bbo => "bbo",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bbbc" => Ok(Algorithm::Bbbc),
            "bbo" => Ok(Algorithm::Bbo),
            other => Err(Error::InvalidParam(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Every tunable of both optimizers; echoed into each result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerParams {
    pub population_size: usize,
    pub center_mode: CenterMode,
    pub upper_limit: f64,
    pub max_immigration: f64,
    pub max_emigration: f64,
    pub max_mutation: f64,
    pub elite_count: usize,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        let bbbc = BbbcParams::default();
        let bbo = BboParams::default();
        Self {
            population_size: bbbc.population_size,
            center_mode: bbbc.center_mode,
            upper_limit: bbbc.upper_limit,
            max_immigration: bbo.max_immigration,
            max_emigration: bbo.max_emigration,
            max_mutation: bbo.max_mutation,
            elite_count: bbo.elite_count,
        }
    }
}

impl OptimizerParams {
    pub fn bbbc(&self, generations: usize, seed: u64) -> BbbcParams {
        BbbcParams {
            population_size: self.population_size,
            max_generations: generations,
            upper_limit: self.upper_limit,
            center_mode: self.center_mode,
            rng_seed: seed,
        }
    }

    pub fn bbo(&self, generations: usize, seed: u64) -> BboParams {
        BboParams {
            population_size: self.population_size,
            max_generations: generations,
            max_immigration: self.max_immigration,
            max_emigration: self.max_emigration,
            max_mutation: self.max_mutation,
            elite_count: self.elite_count,
            rng_seed: seed,
        }
    }

    /// Runs `algorithm` for `generations` with optimizer seed `seed`.
    pub fn solve(
        &self,
        algorithm: Algorithm,
        cm: &CostMatrix,
        source: usize,
        terminal: usize,
        generations: usize,
        seed: u64,
    ) -> Result<SearchResult> {
        match algorithm {
            Algorithm::Bbbc => run_bbbc(cm, source, terminal, &self.bbbc(generations, seed)),
            Algorithm::Bbo => run_bbo(cm, source, terminal, &self.bbo(generations, seed)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPair {
    pub scenario_seed: u64,
    pub opt_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchPlan {
    pub node_counts: Vec<usize>,
    pub generation_budgets: Vec<usize>,
    pub seeds: Vec<SeedPair>,
    pub algorithms: Vec<Algorithm>,
    pub placement: Placement,
    pub radio_range: f64,
    pub params: OptimizerParams,
    /// Keep node counts above [`LARGE_NODE_COUNT`].
    pub include_large: bool,
    /// Run cells one at a time so wall times are not contended.
    pub serial_timing: bool,
}

impl Default for BenchPlan {
    fn default() -> Self {
        Self {
            node_counts: vec![25, 64, 100, 2500],
            generation_budgets: vec![30, 50, 100],
            seeds: (1..=10)
                .map(|s| SeedPair {
                    scenario_seed: s,
                    opt_seed: s,
                })
                .collect(),
            algorithms: vec![Algorithm::Bbbc, Algorithm::Bbo],
            placement: Placement::Grid,
            radio_range: DEFAULT_RADIO_RANGE,
            params: OptimizerParams::default(),
            include_large: false,
            serial_timing: false,
        }
    }
}

impl BenchPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Node counts that will actually run.
    pub fn active_node_counts(&self) -> Vec<usize> {
        self.node_counts
            .iter()
            .copied()
            .filter(|&n| self.include_large || n <= LARGE_NODE_COUNT)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParam(msg.to_string()));
        if self.active_node_counts().is_empty() {
            return bad("plan has no node counts to run");
        }
        if self.generation_budgets.is_empty() || self.generation_budgets.contains(&0) {
            return bad("plan needs positive generation budgets");
        }
        if self.seeds.is_empty() {
            return bad("plan has no seeds");
        }
        if self.algorithms.is_empty() {
            return bad("plan has no algorithms");
        }
        for &n in &self.active_node_counts() {
            if n < 2 {
                return bad("node counts must be at least 2");
            }
            if self.placement == Placement::Grid {
                let side = (n as f64).sqrt().round() as usize;
                if side * side != n {
                    return Err(Error::NotPerfectSquare(n));
                }
            }
        }
        self.params.bbbc(1, 0).validate()?;
        self.params.bbo(1, 0).validate()?;
        Ok(())
    }
}

/// One optimizer run scored against the exact optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub n_nodes: usize,
    pub generations: usize,
    pub scenario_seed: u64,
    pub opt_seed: u64,
    pub path: Path,
    pub best_cost: f64,
    pub oracle_path: Path,
    pub oracle_cost: f64,
    pub percent_error: f64,
    pub wall_time_ms: f64,
    pub trace: GenerationTrace,
    pub params: OptimizerParams,
}

impl RunResult {
    pub fn from_search(
        algorithm: Algorithm,
        scenario_seed: u64,
        opt_seed: u64,
        search: SearchResult,
        oracle_path: Path,
        params: OptimizerParams,
        n_nodes: usize,
    ) -> Result<Self> {
        let percent_error = percent_error(search.best.cost, oracle_path.cost)?;
        Ok(Self {
            algorithm,
            n_nodes,
            generations: search.trace.len(),
            scenario_seed,
            opt_seed,
            best_cost: search.best.cost,
            path: search.best,
            oracle_cost: oracle_path.cost,
            oracle_path,
            percent_error,
            wall_time_ms: search.wall_time.as_secs_f64() * 1e3,
            trace: search.trace,
            params,
        })
    }

    pub fn wall_time_per_generation_ms(&self) -> f64 {
        self.wall_time_ms / self.generations as f64
    }

    pub fn trace_file_name(&self) -> String {
        format!(
            "{}_n{}_g{}_s{}_o{}.csv",
            self.algorithm, self.n_nodes, self.generations, self.scenario_seed, self.opt_seed
        )
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.n_nodes,
            self.generations,
            self.scenario_seed,
            self.opt_seed,
            self.best_cost,
            self.oracle_cost,
            self.percent_error,
            self.wall_time_ms
        )
    }
}

struct Prepared {
    cm: CostMatrix,
    oracle: Path,
}

fn prepare(plan: &BenchPlan, n: usize, scenario_seed: u64) -> Result<Prepared> {
    let scenario = generate_scenario(n, plan.placement, scenario_seed, plan.radio_range)?;
    let cm = build_cost_matrix(&scenario)?;
    let oracle = shortest_path(&cm, scenario.source(), scenario.terminal())?.path;
    Ok(Prepared { cm, oracle })
}

fn cell_err(cell: String) -> impl FnOnce(Error) -> Error {
    move |e| Error::Cell {
        cell,
        source: Box::new(e),
    }
}

/// Runs every cell of `plan`. Scenario, cost matrix and oracle are built
/// once per `(n, scenario seed)` and excluded from the reported wall time.
/// Results come back in plan order: node count, generation budget,
/// algorithm, seed.
pub fn run_plan(plan: &BenchPlan) -> Result<Vec<RunResult>> {
    plan.validate()?;
    let node_counts = plan.active_node_counts();

    let mut keys: Vec<(usize, u64)> = Vec::new();
    for &n in &node_counts {
        for s in &plan.seeds {
            if !keys.contains(&(n, s.scenario_seed)) {
                keys.push((n, s.scenario_seed));
            }
        }
    }
    let build = |&(n, seed): &(usize, u64)| {
        prepare(plan, n, seed)
            .map(|p| ((n, seed), p))
            .map_err(cell_err(format!("scenario n={n} seed={seed}")))
    };
    let prepared: HashMap<(usize, u64), Prepared> = if plan.serial_timing {
        keys.iter().map(build).collect::<Result<_>>()?
    } else {
        keys.par_iter().map(build).collect::<Result<_>>()?
    };

    let mut jobs = Vec::new();
    for &n in &node_counts {
        for &generations in &plan.generation_budgets {
            for &algorithm in &plan.algorithms {
                for &seeds in &plan.seeds {
                    jobs.push((n, generations, algorithm, seeds));
                }
            }
        }
    }
    let run = |&(n, generations, algorithm, seeds): &(usize, usize, Algorithm, SeedPair)| {
        let cell = format!(
            "{algorithm} n={n} gens={generations} scenario_seed={} opt_seed={}",
            seeds.scenario_seed, seeds.opt_seed
        );
        let prep = &prepared[&(n, seeds.scenario_seed)];
        let source = 0;
        let terminal = n - 1;
        plan.params
            .solve(
                algorithm,
                &prep.cm,
                source,
                terminal,
                generations,
                seeds.opt_seed,
            )
            .and_then(|search| {
                RunResult::from_search(
                    algorithm,
                    seeds.scenario_seed,
                    seeds.opt_seed,
                    search,
                    prep.oracle.clone(),
                    plan.params.clone(),
                    n,
                )
            })
            .map_err(cell_err(cell))
    };
    if plan.serial_timing {
        jobs.iter().map(run).collect()
    } else {
        jobs.par_iter().map(run).collect()
    }
}

/// Lower median: the element at index `(len - 1) / 2` after sorting.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.get(v.len().checked_sub(1)? / 2).copied()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n_nodes: usize,
    pub generations: usize,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub median_cost: f64,
    pub median_percent_error: f64,
    pub median_wall_time_ms: f64,
}

/// Medians over seeds per `(n, generations, algorithm)`, ordered by node
/// count, then generations, then algorithm.
pub fn summarize(results: &[RunResult]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, usize, Algorithm), Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        groups
            .entry((r.n_nodes, r.generations, r.algorithm))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((n_nodes, generations, algorithm), rs)| {
            let median = |f: fn(&RunResult) -> f64| {
                lower_median(&rs.iter().map(|r| f(r)).collect::<Vec<_>>())
                    .expect("groups are non-empty")
            };
            SummaryRow {
                n_nodes,
                generations,
                algorithm,
                runs: rs.len(),
                median_cost: median(|r| r.best_cost),
                median_percent_error: median(|r| r.percent_error),
                median_wall_time_ms: median(|r| r.wall_time_ms),
            }
        })
        .collect()
}

/// One Table-1 line: both algorithms side by side for `(n, generations)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub n_nodes: usize,
    pub generations: usize,
    pub bbbc: Option<SummaryRow>,
    pub bbo: Option<SummaryRow>,
}

impl TableRow {
    /// Median BBO wall time over median BB-BC wall time.
    pub fn time_ratio(&self) -> Option<f64> {
        match (&self.bbbc, &self.bbo) {
            (Some(a), Some(b)) if a.median_wall_time_ms > 0.0 => {
                Some(b.median_wall_time_ms / a.median_wall_time_ms)
            }
            _ => None,
        }
    }
}

pub fn table_rows(summary: &[SummaryRow]) -> Vec<TableRow> {
    let mut rows: Vec<TableRow> = Vec::new();
    for s in summary {
        let row = match rows.last_mut() {
            Some(r) if (r.n_nodes, r.generations) == (s.n_nodes, s.generations) => r,
            _ => {
                rows.push(TableRow {
                    n_nodes: s.n_nodes,
                    generations: s.generations,
                    bbbc: None,
                    bbo: None,
                });
                rows.last_mut().expect("just pushed")
            }
        };
        match s.algorithm {
            Algorithm::Bbbc => row.bbbc = Some(s.clone()),
            Algorithm::Bbo => row.bbo = Some(s.clone()),
        }
    }
    rows
}

pub fn results_csv(results: &[RunResult]) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for r in results {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn summary_csv(summary: &[SummaryRow]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in table_rows(summary) {
        let _ = write!(out, "{},{}", row.n_nodes, row.generations);
        for s in [&row.bbbc, &row.bbo] {
            let _ = write!(
                out,
                ",{},{},{}",
                opt(s.as_ref().map(|s| s.median_cost)),
                opt(s.as_ref().map(|s| s.median_percent_error)),
                opt(s.as_ref().map(|s| s.median_wall_time_ms)),
            );
        }
        let _ = writeln!(out, ",{}", opt(row.time_ratio()));
    }
    out
}

/// Writes `result`'s convergence trace as CSV.
pub fn emit_trace(result: &RunResult, path: impl AsRef<FsPath>) -> Result<()> {
    if result.trace.is_empty() {
        return Err(Error::InvalidParam("cannot emit an empty trace".into()));
    }
    fs::write(path, result.trace.to_csv())?;
    Ok(())
}

/// Writes `results.csv`, `summary.csv`, `plan.json` and `traces/<run>.csv`
/// under `dir`.
pub fn write_outputs(
    plan: &BenchPlan,
    results: &[RunResult],
    dir: impl AsRef<FsPath>,
) -> Result<()> {
    let dir = dir.as_ref();
    let traces = dir.join("traces");
    fs::create_dir_all(&traces)?;
    fs::write(dir.join("results.csv"), results_csv(results))?;
    fs::write(dir.join("summary.csv"), summary_csv(&summarize(results)))?;
    let mut plan_json = serde_json::to_string_pretty(plan)?;
    plan_json.push('\n');
    fs::write(dir.join("plan.json"), plan_json)?;
    for r in results {
        emit_trace(r, traces.join(r.trace_file_name()))?;
    }
    Ok(())
}
