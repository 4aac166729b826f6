//! Random-keys candidate encoding shared by both optimizers.
//!
//! A candidate is one priority key per node. Decoding runs a depth-first
//! search from the source that always tries the unvisited neighbor with the
//! highest key first (ties to the lower node id) and returns the search stack
//! the moment the terminal is reached. Backtracking means every vector
//! decodes to a loop-free path whenever the terminal is reachable.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzycost::CostMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriorityVector(Vec<f64>);

impl PriorityVector {
    /// Wraps `keys`; every key must lie in [0, 1].
    pub fn new(keys: Vec<f64>) -> Result<Self> {
        if let Some(&k) = keys.iter().find(|k| !(0.0..=1.0).contains(*k)) {
            return Err(Error::InvalidParam(format!(
                "priority key {k} outside [0, 1]"
            )));
        }
        Ok(Self(keys))
    }

    /// Wraps `keys` without checking the bounds. Callers keep keys in [0, 1].
    pub(crate) fn from_raw(keys: Vec<f64>) -> Self {
        debug_assert!(keys.iter().all(|k| (0.0..=1.0).contains(k)));
        Self(keys)
    }

    pub fn keys(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn keys_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A loop-free source-to-terminal route and its total ILC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub cost: f64,
}

impl Path {
    /// Costs `nodes` against `cm`.
    pub fn priced(nodes: Vec<usize>, cm: &CostMatrix) -> Result<Self> {
        let cost = path_cost(&nodes, cm)?;
        Ok(Self { nodes, cost })
    }

    pub fn source(&self) -> usize {
        self.nodes[0]
    }

    pub fn terminal(&self) -> usize {
        *self.nodes.last().expect("paths are non-empty")
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// `n` i.i.d. Uniform[0, 1] keys.
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PriorityVector {
    PriorityVector((0..n).map(|_| rng.random::<f64>()).collect())
}

/// Sum of link ILCs along `nodes`, accumulated from the source forward.
pub fn path_cost(nodes: &[usize], cm: &CostMatrix) -> Result<f64> {
    nodes.windows(2).try_fold(0.0, |acc, w| {
        cm.get(w[0], w[1])
            .map(|c| acc + c)
            .ok_or(Error::BrokenPath {
                from: w[0],
                to: w[1],
            })
    })
}

/// Priority-ordered DFS decode of `keys` into a path.
pub fn decode(
    keys: &PriorityVector,
    cm: &CostMatrix,
    source: usize,
    terminal: usize,
) -> Result<Path> {
    let n = cm.node_count();
    if keys.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: keys.len(),
        });
    }
    if source >= n || terminal >= n {
        return Err(Error::InvalidParam(format!(
            "source {source} / terminal {terminal} out of range for {n} nodes"
        )));
    }
    if source == terminal {
        return Err(Error::InvalidParam(
            "source and terminal must differ".into(),
        ));
    }

    let k = keys.keys();
    let ordered = |node: usize| -> Vec<(usize, f64)> {
        let mut next = cm.neighbors(node).to_vec();
        // descending key, then ascending id; neighbors arrive ascending by id
        next.sort_by(|a, b| k[b.0].total_cmp(&k[a.0]));
        next
    };

    let mut visited = vec![false; n];
    visited[source] = true;
    // (node, cost so far, candidates, next candidate index)
    let mut stack = vec![(source, 0.0, ordered(source), 0usize)];
    while let Some(top) = stack.last_mut() {
        let (_, cost_here, ref cands, ref mut idx) = *top;
        let step = cands[*idx..].iter().position(|&(v, _)| !visited[v]);
        match step {
            Some(offset) => {
                let (v, c) = cands[*idx + offset];
                *idx += offset + 1;
                visited[v] = true;
                let cost = cost_here + c;
                if v == terminal {
                    let mut nodes: Vec<usize> = stack.iter().map(|f| f.0).collect();
                    nodes.push(v);
                    return Ok(Path { nodes, cost });
                }
                stack.push((v, cost, ordered(v), 0));
            }
            None => {
                stack.pop();
            }
        }
    }
    Err(Error::NoPath {
        start: source,
        terminal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn undirected(n: usize, edges: &[(usize, usize, f64)]) -> CostMatrix {
        CostMatrix::from_edges(
            n,
            edges.iter().flat_map(|&(a, b, c)| [(a, b, c), (b, a, c)]),
        )
        .unwrap()
    }

    fn keys(v: &[f64]) -> PriorityVector {
        PriorityVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn line_graph_unique_path() {
        let cm = undirected(3, &[(0, 1, 0.2), (1, 2, 0.3)]);
        for k in [[0.0, 0.0, 0.0], [0.9, 0.1, 0.5], [1.0, 1.0, 1.0]] {
            let p = decode(&keys(&k), &cm, 0, 2).unwrap();
            assert_eq!(p.nodes, vec![0, 1, 2]);
            assert!((p.cost - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn diamond_follows_higher_key() {
        let cm = undirected(4, &[(0, 1, 0.5), (0, 2, 0.1), (1, 3, 0.5), (2, 3, 0.1)]);
        let p = decode(&keys(&[0.0, 0.9, 0.1, 0.0]), &cm, 0, 3).unwrap();
        assert_eq!(p.nodes, vec![0, 1, 3]);
        let p = decode(&keys(&[0.0, 0.1, 0.9, 0.0]), &cm, 0, 3).unwrap();
        assert_eq!(p.nodes, vec![0, 2, 3]);
    }

    #[test]
    fn equal_keys_prefer_lower_id() {
        let cm = undirected(4, &[(0, 1, 0.5), (0, 2, 0.1), (1, 3, 0.5), (2, 3, 0.1)]);
        let p = decode(&keys(&[0.3, 0.5, 0.5, 0.3]), &cm, 0, 3).unwrap();
        assert_eq!(p.nodes, vec![0, 1, 3]);
    }

    #[test]
    fn dead_end_backtracks() {
        // 0-1 is a dead end; 0-2-3 reaches the terminal.
        // DFS: at 0 try 1 (key 0.9), 1 has no unvisited neighbors, pop;
        // try 2 (key 0.1), then 3 = terminal.
        let cm = undirected(4, &[(0, 1, 0.1), (0, 2, 0.4), (2, 3, 0.4)]);
        let p = decode(&keys(&[0.5, 0.9, 0.1, 0.2]), &cm, 0, 3).unwrap();
        assert_eq!(p.nodes, vec![0, 2, 3]);
        assert!((p.cost - 0.8).abs() < 1e-12);
    }

    #[test]
    fn unreachable_terminal() {
        let cm = undirected(4, &[(0, 1, 0.1), (2, 3, 0.4)]);
        assert!(matches!(
            decode(&keys(&[0.5; 4]), &cm, 0, 3),
            Err(Error::NoPath {
                start: 0,
                terminal: 3
            })
        ));
    }

    #[test]
    fn decode_preconditions() {
        let cm = undirected(3, &[(0, 1, 0.2), (1, 2, 0.3)]);
        assert!(decode(&keys(&[0.5; 3]), &cm, 0, 0).is_err());
        assert!(matches!(
            decode(&keys(&[0.5; 2]), &cm, 0, 2),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn path_cost_examples() {
        let cm = undirected(2, &[(0, 1, 0.0833)]);
        assert_eq!(path_cost(&[0, 1], &cm).unwrap(), 0.0833);

        let edges: Vec<_> = (0..8).map(|i| (i, i + 1, 0.067)).collect();
        let cm = undirected(9, &edges);
        let nodes: Vec<usize> = (0..9).collect();
        assert!((path_cost(&nodes, &cm).unwrap() - 0.536).abs() < 1e-12);

        assert!(matches!(
            path_cost(&[0, 2], &cm),
            Err(Error::BrokenPath { from: 0, to: 2 })
        ));
    }

    #[test]
    fn random_vectors() {
        let a = random_vector(&mut ChaCha8Rng::seed_from_u64(3), 10);
        let b = random_vector(&mut ChaCha8Rng::seed_from_u64(3), 10);
        assert_eq!(a, b);
        assert!(a.keys().iter().all(|k| (0.0..=1.0).contains(k)));

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut prev = random_vector(&mut rng, 10);
        for _ in 0..100 {
            let next = random_vector(&mut rng, 10);
            assert_ne!(prev, next);
            prev = next;
        }
    }

    #[test]
    fn key_bounds_checked() {
        assert!(PriorityVector::new(vec![0.0, 1.0]).is_ok());
        assert!(PriorityVector::new(vec![0.0, 1.5]).is_err());
    }
}
