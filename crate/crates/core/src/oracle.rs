//! Exact minimum-cost routes: Dijkstra with a lexicographic tie-break, and
//! an exhaustive enumerator to check it on small graphs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzycost::CostMatrix;
use crate::pathcodec::Path;

pub const BRUTE_FORCE_MAX_NODES: usize = 12;
/// Slack allowed when a found cost undercuts the optimum through rounding.
pub const COST_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub path: Path,
}

impl OracleResult {
    pub fn cost(&self) -> f64 {
        self.path.cost
    }
}

fn check_endpoints(cm: &CostMatrix, source: usize, terminal: usize) -> Result<()> {
    let n = cm.node_count();
    if source >= n || terminal >= n || source == terminal {
        return Err(Error::InvalidParam(format!(
            "source {source} / terminal {terminal} invalid for {n} nodes"
        )));
    }
    Ok(())
}

/// `(cost, path)` order: cheaper first, then lexicographically smaller.
fn better(cost: f64, path: &[usize], than_cost: f64, than_path: &[usize]) -> bool {
    match cost.total_cmp(&than_cost) {
        Ordering::Less => true,
        Ordering::Equal => path < than_path,
        Ordering::Greater => false,
    }
}

#[derive(PartialEq)]
struct Entry {
    cost: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Label-setting shortest path. Equal-cost routes resolve to the
/// lexicographically smallest node sequence.
pub fn shortest_path(cm: &CostMatrix, source: usize, terminal: usize) -> Result<OracleResult> {
    check_endpoints(cm, source, terminal)?;
    let n = cm.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut route: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();

    dist[source] = 0.0;
    route[source] = Some(vec![source]);
    heap.push(Entry {
        cost: 0.0,
        node: source,
    });

    while let Some(Entry { cost, node }) = heap.pop() {
        if settled[node] || cost > dist[node] {
            continue;
        }
        settled[node] = true;
        if node == terminal {
            break;
        }
        let here = route[node].clone().expect("reached nodes carry a route");
        for &(next, c) in cm.neighbors(node) {
            if settled[next] {
                continue;
            }
            let cand = cost + c;
            let mut cand_route = here.clone();
            cand_route.push(next);
            let improves = match &route[next] {
                None => true,
                Some(existing) => better(cand, &cand_route, dist[next], existing),
            };
            if improves {
                if cand < dist[next] {
                    heap.push(Entry {
                        cost: cand,
                        node: next,
                    });
                }
                dist[next] = cand;
                route[next] = Some(cand_route);
            }
        }
    }

    match route[terminal].take() {
        Some(nodes) if settled[terminal] => Ok(OracleResult {
            path: Path {
                nodes,
                cost: dist[terminal],
            },
        }),
        _ => Err(Error::Unreachable {
            start: source,
            terminal,
        }),
    }
}

/// Enumerates every loop-free route. Limited to graphs of at most
/// [`BRUTE_FORCE_MAX_NODES`] nodes.
pub fn brute_force(cm: &CostMatrix, source: usize, terminal: usize) -> Result<OracleResult> {
    let n = cm.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooManyNodes(n));
    }
    check_endpoints(cm, source, terminal)?;

    struct Search<'a> {
        cm: &'a CostMatrix,
        terminal: usize,
        on_path: Vec<bool>,
        path: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
    }

    impl Search<'_> {
        fn walk(&mut self, node: usize, cost: f64) {
            if node == self.terminal {
                let wins = self
                    .best
                    .as_ref()
                    .is_none_or(|(c, p)| better(cost, &self.path, *c, p));
                if wins {
                    self.best = Some((cost, self.path.clone()));
                }
                return;
            }
            for &(next, c) in self.cm.neighbors(node) {
                if self.on_path[next] {
                    continue;
                }
                self.on_path[next] = true;
                self.path.push(next);
                self.walk(next, cost + c);
                self.path.pop();
                self.on_path[next] = false;
            }
        }
    }

    let mut search = Search {
        cm,
        terminal,
        on_path: vec![false; n],
        path: vec![source],
        best: None,
    };
    search.on_path[source] = true;
    search.walk(source, 0.0);

    search
        .best
        .map(|(cost, nodes)| OracleResult {
            path: Path { nodes, cost },
        })
        .ok_or(Error::Unreachable {
            start: source,
            terminal,
        })
}

/// `100 (found - optimal) / optimal`.
pub fn percent_error(found_cost: f64, optimal_cost: f64) -> Result<f64> {
    if !(optimal_cost > 0.0) {
        return Err(Error::InvalidParam(format!(
            "optimal cost {optimal_cost} must be positive"
        )));
    }
    if found_cost < optimal_cost - COST_TOLERANCE {
        return Err(Error::BelowOptimum {
            found: found_cost,
            optimal: optimal_cost,
        });
    }
    Ok((100.0 * (found_cost - optimal_cost) / optimal_cost).max(0.0))
}
