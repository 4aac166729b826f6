//! Integrated Link Cost (ILC): a Mamdani fuzzy system mapping a link's
//! throughput, delay and jitter to a scalar cost in (0, 1].
//!
//! Each input is normalized to [0, 1] and fuzzified by three triangles
//! (low, medium, high). The 27 rules AND their antecedents with `min`, clip
//! one of five output triangles, aggregate with `max`, and the result is the
//! centroid of the aggregate sampled at 101 evenly spaced points.

use std::fs;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{
    LinkObservation, NetworkScenario, DELAY_RANGE, JITTER_RANGE, THROUGHPUT_RANGE,
};

/// Lower clamp on every ILC so `1 / cost` stays finite.
pub const ILC_FLOOR: f64 = 1e-6;
/// Samples used by the discrete centroid.
pub const CENTROID_SAMPLES: usize = 101;

pub const INPUT_LEVELS: usize = 3;
pub const OUTPUT_LEVELS: usize = 5;

/// Triangular membership function `(left foot, peak, right foot)`.
/// A foot equal to the peak gives a shoulder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipFunction {
    left: f64,
    peak: f64,
    right: f64,
}

impl MembershipFunction {
    pub fn triangular(left: f64, peak: f64, right: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&left) || !(left <= peak && peak <= right && right <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "triangle ({left}, {peak}, {right}) must be ascending within [0, 1]"
            )));
        }
        Ok(Self { left, peak, right })
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            left: self.left * factor,
            peak: self.peak * factor,
            right: self.right * factor,
        }
    }

    pub fn degree(&self, x: f64) -> f64 {
        if x == self.peak {
            1.0
        } else if x < self.peak {
            if x <= self.left {
                0.0
            } else {
                (x - self.left) / (self.peak - self.left)
            }
        } else if x >= self.right {
            0.0
        } else {
            (self.right - x) / (self.right - self.peak)
        }
    }
}

/// Evenly spaced triangles with peaks at `i / (count - 1)` and feet one
/// interval either side, clipped to [0, 1].
fn partition(count: usize) -> Vec<MembershipFunction> {
    let step = 1.0 / (count - 1) as f64;
    (0..count)
        .map(|i| {
            let peak = i as f64 * step;
            MembershipFunction {
                left: (peak - step).max(0.0),
                peak,
                right: (peak + step).min(1.0),
            }
        })
        .collect()
}

/// Input level index: 0 = low, 1 = medium, 2 = high.
pub type Level = usize;

/// Output level from the symmetric score rule: good throughput lowers the
/// score, delay and jitter raise it, and the 0..=6 score is rounded (half up)
/// onto the five output levels.
pub fn consequent_of(throughput: Level, delay: Level, jitter: Level) -> usize {
    let score = (2 - throughput) + delay + jitter;
    // round(score * 4 / 6), half up
    (score * 4 + 3) / 6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleEntry {
    pub thr: Level,
    pub delay: Level,
    pub jitter: Level,
    pub out: usize,
}

/// One consequent per `(throughput, delay, jitter)` level triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleBase {
    consequents: [[[usize; INPUT_LEVELS]; INPUT_LEVELS]; INPUT_LEVELS],
}

impl Default for RuleBase {
    fn default() -> Self {
        let mut consequents = [[[0; INPUT_LEVELS]; INPUT_LEVELS]; INPUT_LEVELS];
        for (t, plane) in consequents.iter_mut().enumerate() {
            for (d, row) in plane.iter_mut().enumerate() {
                for (j, out) in row.iter_mut().enumerate() {
                    *out = consequent_of(t, d, j);
                }
            }
        }
        Self { consequents }
    }
}

impl RuleBase {
    pub fn consequent(&self, thr: Level, delay: Level, jitter: Level) -> usize {
        self.consequents[thr][delay][jitter]
    }

    /// Builds a rule base from explicit entries. There must be exactly one
    /// entry per level triple, and consequents must not decrease with delay
    /// or jitter nor increase with throughput.
    pub fn from_entries(entries: &[RuleEntry]) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidRuleBase(msg));
        if entries.len() != INPUT_LEVELS.pow(3) {
            return bad(format!("expected 27 rules, got {}", entries.len()));
        }
        let mut slots = [[[None; INPUT_LEVELS]; INPUT_LEVELS]; INPUT_LEVELS];
        for e in entries {
            if e.thr >= INPUT_LEVELS || e.delay >= INPUT_LEVELS || e.jitter >= INPUT_LEVELS {
                return bad(format!("level out of range in {e:?}"));
            }
            if e.out >= OUTPUT_LEVELS {
                return bad(format!("output level out of range in {e:?}"));
            }
            let slot = &mut slots[e.thr][e.delay][e.jitter];
            if slot.is_some() {
                return bad(format!(
                    "duplicate rule for ({}, {}, {})",
                    e.thr, e.delay, e.jitter
                ));
            }
            *slot = Some(e.out);
        }
        let mut consequents = [[[0; INPUT_LEVELS]; INPUT_LEVELS]; INPUT_LEVELS];
        for t in 0..INPUT_LEVELS {
            for d in 0..INPUT_LEVELS {
                for j in 0..INPUT_LEVELS {
                    // all 27 slots are filled: 27 distinct entries
                    consequents[t][d][j] = slots[t][d][j].expect("complete");
                }
            }
        }
        for t in 0..INPUT_LEVELS {
            for d in 0..INPUT_LEVELS {
                for j in 0..INPUT_LEVELS {
                    let c = consequents[t][d][j];
                    if t + 1 < INPUT_LEVELS && consequents[t + 1][d][j] > c {
                        return bad(format!(
                            "consequent rises with throughput at ({t}, {d}, {j})"
                        ));
                    }
                    if d + 1 < INPUT_LEVELS && consequents[t][d + 1][j] < c {
                        return bad(format!("consequent falls with delay at ({t}, {d}, {j})"));
                    }
                    if j + 1 < INPUT_LEVELS && consequents[t][d][j + 1] < c {
                        return bad(format!("consequent falls with jitter at ({t}, {d}, {j})"));
                    }
                }
            }
        }
        Ok(Self { consequents })
    }

    pub fn entries(&self) -> Vec<RuleEntry> {
        let mut out = Vec::with_capacity(27);
        for thr in 0..INPUT_LEVELS {
            for delay in 0..INPUT_LEVELS {
                for jitter in 0..INPUT_LEVELS {
                    out.push(RuleEntry {
                        thr,
                        delay,
                        jitter,
                        out: self.consequent(thr, delay, jitter),
                    });
                }
            }
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let entries: Vec<RuleEntry> = serde_json::from_str(text)?;
        Self::from_entries(&entries)
    }

    pub fn read(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// `[min, max]` normalization range of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    /// Affine map onto [0, 1], clamping values outside the range.
    pub fn normalize(&self, value: f64) -> Result<f64> {
        if !(self.max > self.min) {
            return Err(Error::DegenerateBounds {
                min: self.min,
                max: self.max,
            });
        }
        Ok(((value - self.min) / (self.max - self.min)).clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricBounds {
    pub throughput: Range,
    pub delay: Range,
    pub jitter: Range,
}

impl Default for MetricBounds {
    /// The synthesis ranges of the topology generator.
    fn default() -> Self {
        Self {
            throughput: Range::new(THROUGHPUT_RANGE.0, THROUGHPUT_RANGE.1),
            delay: Range::new(DELAY_RANGE.0, DELAY_RANGE.1),
            jitter: Range::new(JITTER_RANGE.0, JITTER_RANGE.1),
        }
    }
}

/// Normalized `(throughput, delay, jitter)`, each in [0, 1].
pub fn normalize_inputs(obs: &LinkObservation, bounds: &MetricBounds) -> Result<[f64; 3]> {
    Ok([
        bounds.throughput.normalize(obs.throughput)?,
        bounds.delay.normalize(obs.delay)?,
        bounds.jitter.normalize(obs.jitter)?,
    ])
}

/// The fuzzy cost evaluator.
#[derive(Debug, Clone)]
pub struct FuzzyCost {
    inputs: Vec<MembershipFunction>,
    outputs: Vec<MembershipFunction>,
    rules: RuleBase,
}

impl Default for FuzzyCost {
    fn default() -> Self {
        Self::new(RuleBase::default())
    }
}

impl FuzzyCost {
    pub fn new(rules: RuleBase) -> Self {
        Self {
            inputs: partition(INPUT_LEVELS),
            outputs: partition(OUTPUT_LEVELS),
            rules,
        }
    }

    pub fn rules(&self) -> &RuleBase {
        &self.rules
    }

    /// ILC of normalized `(throughput, delay, jitter)`.
    pub fn evaluate(&self, normalized: [f64; 3]) -> Result<f64> {
        for &x in &normalized {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InputOutOfRange(x));
            }
        }
        let degrees = normalized.map(|x| {
            self.inputs
                .iter()
                .map(|mf| mf.degree(x))
                .collect::<Vec<_>>()
        });

        let mut clip = [0.0f64; OUTPUT_LEVELS];
        for (t, &mt) in degrees[0].iter().enumerate() {
            for (d, &md) in degrees[1].iter().enumerate() {
                for (j, &mj) in degrees[2].iter().enumerate() {
                    let strength = mt.min(md).min(mj);
                    let out = self.rules.consequent(t, d, j);
                    clip[out] = clip[out].max(strength);
                }
            }
        }

        // Sample in axis units (0..=100) so triangle vertices on the 0.25
        // grid are exact integers, and accumulate first moments about the
        // midpoint in mirrored pairs: a symmetric aggregate cancels exactly.
        let last = CENTROID_SAMPLES - 1;
        let scale = last as f64;
        let aggregate: Vec<f64> = (0..=last)
            .map(|i| {
                self.outputs
                    .iter()
                    .zip(&clip)
                    .map(|(mf, &c)| mf.scaled(scale).degree(i as f64).min(c))
                    .fold(0.0, f64::max)
            })
            .collect();
        let mass: f64 = aggregate.iter().sum();
        let mid = scale / 2.0;
        let moment: f64 = (0..CENTROID_SAMPLES / 2)
            .map(|i| (i as f64 - mid) * (aggregate[i] - aggregate[last - i]))
            .sum();
        // the input triangles sum to one, so some rule always fires
        debug_assert!(mass > 0.0);
        let centroid = 0.5 + moment / (mass * scale);
        Ok(centroid.clamp(ILC_FLOOR, 1.0))
    }

    pub fn link_cost(&self, obs: &LinkObservation, bounds: &MetricBounds) -> Result<f64> {
        self.evaluate(normalize_inputs(obs, bounds)?)
    }
}

/// ILC with the default rule base.
pub fn evaluate_ilc(normalized: [f64; 3]) -> Result<f64> {
    FuzzyCost::default().evaluate(normalized)
}

/// Sparse directed cost graph: ILC per link, absent where nodes are out of
/// range.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    // per node, (neighbor, cost) sorted by neighbor
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl CostMatrix {
    /// Empty matrix with `n` nodes.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adjacency: vec![Vec::new(); n],
        }
    }

    /// Builds from `(from, to, cost)` triples. Costs must be positive and
    /// finite, endpoints distinct and in range, and each pair listed once.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut m = Self::new(n);
        for (from, to, cost) in edges {
            if from >= n || to >= n || from == to {
                return Err(Error::InvalidParam(format!("bad edge {from} -> {to}")));
            }
            if !(cost > 0.0) || !cost.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "edge {from} -> {to} has cost {cost}"
                )));
            }
            m.adjacency[from].push((to, cost));
        }
        for (from, row) in m.adjacency.iter_mut().enumerate() {
            row.sort_by_key(|&(to, _)| to);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidParam(format!(
                    "duplicate edge {from} -> {}",
                    w[0].0
                )));
            }
        }
        Ok(m)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn get(&self, from: usize, to: usize) -> Option<f64> {
        let row = self.adjacency.get(from)?;
        row.binary_search_by_key(&to, |&(v, _)| v)
            .ok()
            .map(|i| row[i].1)
    }

    /// Outgoing `(neighbor, cost)` pairs of `node`, ascending by neighbor.
    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(from, row)| row.iter().map(move |&(to, c)| (from, to, c)))
    }
}

/// ILC for every link of the scenario, using the default fuzzy system and
/// the synthesis bounds.
pub fn build_cost_matrix(s: &NetworkScenario) -> Result<CostMatrix> {
    build_cost_matrix_with(s, &FuzzyCost::default(), &MetricBounds::default())
}

pub fn build_cost_matrix_with(
    s: &NetworkScenario,
    fis: &FuzzyCost,
    bounds: &MetricBounds,
) -> Result<CostMatrix> {
    let edges = s
        .links
        .iter()
        .map(|l| Ok((l.from, l.to, fis.link_cost(l, bounds)?)))
        .collect::<Result<Vec<_>>>()?;
    CostMatrix::from_edges(s.node_count(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_scenario, Placement};

    /// Continuous centroid of a triangle, for checking the sampled one.
    fn triangle_centroid(a: f64, b: f64, c: f64) -> f64 {
        (a + b + c) / 3.0
    }

    #[test]
    fn normalize_examples() {
        let b = MetricBounds::default();
        assert_eq!(b.throughput.normalize(2.0).unwrap(), 1.0);
        assert_eq!(b.delay.normalize(50.5).unwrap(), 0.5);
        assert_eq!(b.jitter.normalize(25.0).unwrap(), 1.0);
        assert_eq!(b.jitter.normalize(-3.0).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_bounds_rejected() {
        assert!(matches!(
            Range::new(1.0, 1.0).normalize(1.0),
            Err(Error::DegenerateBounds { .. })
        ));
    }

    #[test]
    fn membership_shapes() {
        let mfs = partition(3);
        assert_eq!(
            mfs[0],
            MembershipFunction {
                left: 0.0,
                peak: 0.0,
                right: 0.5
            }
        );
        assert_eq!(
            mfs[1],
            MembershipFunction {
                left: 0.0,
                peak: 0.5,
                right: 1.0
            }
        );
        assert_eq!(
            mfs[2],
            MembershipFunction {
                left: 0.5,
                peak: 1.0,
                right: 1.0
            }
        );
        assert_eq!(mfs[0].degree(0.0), 1.0);
        assert_eq!(mfs[0].degree(0.25), 0.5);
        assert_eq!(mfs[2].degree(1.0), 1.0);
        assert_eq!(mfs[1].degree(0.75), 0.5);
        let outs = partition(5);
        assert_eq!(
            outs[1],
            MembershipFunction {
                left: 0.0,
                peak: 0.25,
                right: 0.5
            }
        );
        assert_eq!(
            outs[4],
            MembershipFunction {
                left: 0.75,
                peak: 1.0,
                right: 1.0
            }
        );
        assert!(MembershipFunction::triangular(0.5, 0.2, 1.0).is_err());
    }

    #[test]
    fn consequent_examples() {
        assert_eq!(consequent_of(2, 0, 0), 0);
        assert_eq!(consequent_of(0, 2, 2), 4);
        assert_eq!(consequent_of(1, 1, 1), 2);
    }

    #[test]
    fn default_rule_base_is_valid() {
        let rb = RuleBase::default();
        assert_eq!(RuleBase::from_entries(&rb.entries()).unwrap(), rb);
    }

    #[test]
    fn rule_base_json_validation() {
        let rb = RuleBase::default();
        let text = serde_json::to_string(&rb.entries()).unwrap();
        assert_eq!(RuleBase::from_json(&text).unwrap(), rb);

        let mut entries = rb.entries();
        entries.pop();
        assert!(RuleBase::from_entries(&entries).is_err());

        let mut entries = rb.entries();
        entries[26] = entries[0];
        assert!(RuleBase::from_entries(&entries).is_err());

        // (low, low, low) -> very-high breaks monotonicity in delay
        let mut entries = rb.entries();
        entries[0].out = 4;
        let err = RuleBase::from_entries(&entries).unwrap_err();
        assert!(err.to_string().contains("falls with"), "{err}");
    }

    #[test]
    fn all_medium_is_half() {
        assert_eq!(evaluate_ilc([0.5, 0.5, 0.5]).unwrap(), 0.5);
    }

    #[test]
    fn extreme_links_match_single_triangle_centroids() {
        let best = evaluate_ilc([1.0, 0.0, 0.0]).unwrap();
        assert!(
            (best - triangle_centroid(0.0, 0.0, 0.25)).abs() < 0.01,
            "{best}"
        );
        let worst = evaluate_ilc([0.0, 1.0, 1.0]).unwrap();
        assert!(
            (worst - triangle_centroid(0.75, 1.0, 1.0)).abs() < 0.01,
            "{worst}"
        );
    }

    #[test]
    fn out_of_range_input_rejected() {
        assert!(matches!(
            evaluate_ilc([1.2, 0.0, 0.0]),
            Err(Error::InputOutOfRange(_))
        ));
        assert!(evaluate_ilc([0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn cost_matrix_from_scenario() {
        let s = generate_scenario(25, Placement::Grid, 42, 250.0).unwrap();
        let cm = build_cost_matrix(&s).unwrap();
        assert_eq!(cm.edge_count(), 80);
        for (_, _, c) in cm.edges() {
            assert!(c > 0.0 && c <= 1.0);
        }
        assert!(cm.get(0, 1).is_some());
        assert_eq!(cm.get(0, 6), None);
        assert_eq!(cm.get(0, 0), None);

        let empty = generate_scenario(4, Placement::Grid, 7, 150.0).unwrap();
        assert_eq!(build_cost_matrix(&empty).unwrap().edge_count(), 0);
    }

    #[test]
    fn identical_metrics_identical_cost() {
        let fis = FuzzyCost::default();
        let b = MetricBounds::default();
        let a = LinkObservation {
            from: 0,
            to: 1,
            throughput: 1.1,
            delay: 30.0,
            jitter: 4.0,
        };
        let c = LinkObservation {
            from: 3,
            to: 2,
            ..a
        };
        assert_eq!(
            fis.link_cost(&a, &b).unwrap(),
            fis.link_cost(&c, &b).unwrap()
        );
    }

    #[test]
    fn cost_matrix_rejects_bad_edges() {
        assert!(CostMatrix::from_edges(2, [(0, 1, 0.0)]).is_err());
        assert!(CostMatrix::from_edges(2, [(0, 0, 1.0)]).is_err());
        assert!(CostMatrix::from_edges(2, [(0, 2, 1.0)]).is_err());
        assert!(CostMatrix::from_edges(2, [(0, 1, 1.0), (0, 1, 2.0)]).is_err());
    }
}
