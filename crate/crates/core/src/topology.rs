//! Mesh scenarios: node placement, radio-range connectivity and synthetic
//! per-link metrics, plus the versioned JSON scenario file.

use std::collections::VecDeque;
use std::fs;
use std::path::Path as FsPath;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radio range of every node, in meters.
pub const DEFAULT_RADIO_RANGE: f64 = 250.0;
/// Lattice pitch used by grid placement, in meters.
pub const GRID_SPACING: f64 = 200.0;
/// Maximum number of whole-scenario redraws for uniform-random placement.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;

/// Throughput range of synthesized links, Mbps. The upper end is the 2 Mbps
/// 802.11b data rate.
pub const THROUGHPUT_RANGE: (f64, f64) = (0.2, 2.0);
/// Delay range of synthesized links, ms.
pub const DELAY_RANGE: (f64, f64) = (1.0, 100.0);
/// Jitter range of synthesized links, ms.
pub const JITTER_RANGE: (f64, f64) = (0.0, 20.0);

const SCENARIO_VERSION: u32 = 1;

/// Side of the square area for `n` nodes at the reference density of 25
/// nodes per 1500 m square.
pub fn area_side_for(n: usize) -> f64 {
    1500.0 * (n as f64 / 25.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    Grid,
    #[serde(alias = "random")]
    UniformRandom,
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Placement::Grid),
            "random" | "uniform-random" => Ok(Placement::UniformRandom),
            other => Err(Error::InvalidParam(format!("unknown placement {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeSite {
    pub id: usize,
    #[serde(rename = "x_m")]
    pub x: f64,
    #[serde(rename = "y_m")]
    pub y: f64,
}

impl NodeSite {
    pub fn distance(&self, other: &NodeSite) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Measured (here: synthesized) quality of one directed link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkObservation {
    pub from: usize,
    pub to: usize,
    #[serde(rename = "throughput_mbps")]
    pub throughput: f64,
    #[serde(rename = "delay_ms")]
    pub delay: f64,
    #[serde(rename = "jitter_ms")]
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkScenario {
    pub version: u32,
    pub seed: u64,
    #[serde(rename = "area_side_m")]
    pub area_side: f64,
    #[serde(rename = "radio_range_m")]
    pub radio_range: f64,
    pub nodes: Vec<NodeSite>,
    pub links: Vec<LinkObservation>,
}

impl NetworkScenario {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Conventional source: the first node.
    pub fn source(&self) -> usize {
        0
    }

    /// Conventional terminal: the last node.
    pub fn terminal(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn link(&self, from: usize, to: usize) -> Option<&LinkObservation> {
        self.links
            .binary_search_by(|l| (l.from, l.to).cmp(&(from, to)))
            .ok()
            .map(|i| &self.links[i])
    }

    /// Checks every structural invariant a scenario file must satisfy.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.version != SCENARIO_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        if self.nodes.len() < 2 {
            return bad(format!("need at least 2 nodes, got {}", self.nodes.len()));
        }
        if !(self.radio_range > 0.0) || !(self.area_side > 0.0) {
            return bad("radio range and area side must be positive".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return bad(format!("node at index {i} has id {}", node.id));
            }
            let inside = |v: f64| (0.0..=self.area_side).contains(&v);
            if !inside(node.x) || !inside(node.y) {
                return bad(format!("node {i} lies outside the area"));
            }
        }
        let expected = in_range_pairs(&self.nodes, self.radio_range);
        if expected.len() != self.links.len()
            || expected
                .iter()
                .zip(&self.links)
                .any(|(&(f, t), l)| (f, t) != (l.from, l.to))
        {
            return bad("link set does not match the radio-range rule".into());
        }
        for l in &self.links {
            if !(l.throughput > 0.0) || !(l.delay >= 0.0) || !(l.jitter >= 0.0) {
                return bad(format!("link {} -> {} has invalid metrics", l.from, l.to));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: NetworkScenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn write(&self, path: impl AsRef<FsPath>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Builds a scenario. Pure in its arguments: the same inputs always give a
/// bit-identical scenario.
pub fn generate_scenario(
    n: usize,
    placement: Placement,
    seed: u64,
    radio_range: f64,
) -> Result<NetworkScenario> {
    if n < 2 {
        return Err(Error::InvalidParam(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    if !(radio_range > 0.0) || !radio_range.is_finite() {
        return Err(Error::InvalidParam(format!("radio range {radio_range}")));
    }
    let area_side = area_side_for(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let nodes = match placement {
        Placement::Grid => grid_sites(n)?,
        Placement::UniformRandom => {
            let mut attempt = 0;
            loop {
                if attempt == MAX_PLACEMENT_ATTEMPTS {
                    return Err(Error::ConnectivityNotAchieved {
                        start: 0,
                        terminal: n - 1,
                        attempts: attempt,
                    });
                }
                attempt += 1;
                let sites: Vec<NodeSite> = (0..n)
                    .map(|id| NodeSite {
                        id,
                        x: rng.random_range(0.0..area_side),
                        y: rng.random_range(0.0..area_side),
                    })
                    .collect();
                if reachable(&sites, radio_range, 0, n - 1) {
                    break sites;
                }
            }
        }
    };

    let links = in_range_pairs(&nodes, radio_range)
        .into_iter()
        .map(|(from, to)| {
            let (throughput, delay, jitter) = synthesize_metrics(&mut rng);
            LinkObservation {
                from,
                to,
                throughput,
                delay,
                jitter,
            }
        })
        .collect();

    Ok(NetworkScenario {
        version: SCENARIO_VERSION,
        seed,
        area_side,
        radio_range,
        nodes,
        links,
    })
}

fn grid_sites(n: usize) -> Result<Vec<NodeSite>> {
    let side = (n as f64).sqrt().round() as usize;
    if side * side != n {
        return Err(Error::NotPerfectSquare(n));
    }
    Ok((0..n)
        .map(|id| NodeSite {
            id,
            x: (id % side) as f64 * GRID_SPACING,
            y: (id / side) as f64 * GRID_SPACING,
        })
        .collect())
}

/// Ordered pairs `(i, j)`, `i != j`, within range, sorted by `(i, j)`.
fn in_range_pairs(nodes: &[NodeSite], radio_range: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for a in nodes {
        for b in nodes {
            if a.id != b.id && a.distance(b) <= radio_range {
                pairs.push((a.id, b.id));
            }
        }
    }
    pairs
}

fn reachable(nodes: &[NodeSite], radio_range: f64, from: usize, to: usize) -> bool {
    let mut seen = vec![false; nodes.len()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(u) = queue.pop_front() {
        if u == to {
            return true;
        }
        for v in 0..nodes.len() {
            if !seen[v] && nodes[u].distance(&nodes[v]) <= radio_range {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    false
}

/// Row-major `n x n` adjacency: entry `(i, j)` is true iff `i != j` and the
/// nodes are within radio range.
pub fn connectivity_matrix(s: &NetworkScenario) -> Vec<Vec<bool>> {
    s.nodes
        .iter()
        .map(|a| {
            s.nodes
                .iter()
                .map(|b| a.id != b.id && a.distance(b) <= s.radio_range)
                .collect()
        })
        .collect()
}

/// One `(throughput, delay, jitter)` draw. Callers draw links in `(from, to)`
/// order so a seed fixes every metric.
pub fn synthesize_metrics<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64, f64) {
    let throughput = rng.random_range(THROUGHPUT_RANGE.0..=THROUGHPUT_RANGE.1);
    let delay = rng.random_range(DELAY_RANGE.0..=DELAY_RANGE.1);
    let jitter = rng.random_range(JITTER_RANGE.0..=JITTER_RANGE.1);
    (throughput, delay, jitter)
}
