//! Big Bang–Big Crunch search over priority vectors.
//!
//! Each generation the population is decoded and costed, crunched to a
//! center (the cost-weighted center of mass, or the best candidate), and
//! re-exploded around that center with a normal perturbation whose spread
//! shrinks as `l / k`. The best vector found so far is carried over intact.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzycost::CostMatrix;
use crate::pathcodec::{decode, random_vector, Path, PriorityVector};
use crate::trace::{GenerationTrace, SearchResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterMode {
    /// Center of mass with weights `1 / cost`.
    #[default]
    WeightedCenter,
    /// The best candidate of the generation.
    BestIndividual,
}

impl std::str::FromStr for CenterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted-center" => Ok(CenterMode::WeightedCenter),
            "best-individual" => Ok(CenterMode::BestIndividual),
            other => Err(Error::InvalidParam(format!(
                "unknown center mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbbcParams {
    pub population_size: usize,
    pub max_generations: usize,
    /// Upper limit `l` of each dimension; scales the explosion radius.
    pub upper_limit: f64,
    pub center_mode: CenterMode,
    pub rng_seed: u64,
}

impl Default for BbbcParams {
    fn default() -> Self {
        Self {
            population_size: 50,
            max_generations: 100,
            upper_limit: 1.0,
            center_mode: CenterMode::default(),
            rng_seed: 0,
        }
    }
}

impl BbbcParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidParam(format!(
                "population size {} < 2",
                self.population_size
            )));
        }
        if self.max_generations == 0 {
            return Err(Error::InvalidParam(
                "max_generations must be positive".into(),
            ));
        }
        if !(self.upper_limit > 0.0) || !self.upper_limit.is_finite() {
            return Err(Error::InvalidParam(format!(
                "upper limit {}",
                self.upper_limit
            )));
        }
        Ok(())
    }
}

/// Per-dimension `sum(x_i / f_i) / sum(1 / f_i)`.
pub fn center_of_mass(candidates: &[PriorityVector], fitnesses: &[f64]) -> Result<PriorityVector> {
    let first = candidates.first().ok_or(Error::EmptyPopulation)?;
    if fitnesses.len() != candidates.len() {
        return Err(Error::LengthMismatch {
            expected: candidates.len(),
            actual: fitnesses.len(),
        });
    }
    if let Some(&f) = fitnesses.iter().find(|&&f| !(f > 0.0)) {
        return Err(Error::NonPositiveFitness(f));
    }
    let dims = first.len();
    if let Some(c) = candidates.iter().find(|c| c.len() != dims) {
        return Err(Error::LengthMismatch {
            expected: dims,
            actual: c.len(),
        });
    }

    let total: f64 = fitnesses.iter().map(|f| 1.0 / f).sum();
    let center = (0..dims)
        .map(|d| {
            let weighted: f64 = candidates
                .iter()
                .zip(fitnesses)
                .map(|(c, f)| c.keys()[d] / f)
                .sum();
            // weighted mean of values in [0, 1]; clamp absorbs rounding
            (weighted / total).clamp(0.0, 1.0)
        })
        .collect();
    Ok(PriorityVector::from_raw(center))
}

/// One coordinate of the explosion: `center + l * r / k`, clamped to [0, 1].
pub fn perturb(center: f64, upper_limit: f64, r: f64, k: usize) -> f64 {
    (center + upper_limit * r / k as f64).clamp(0.0, 1.0)
}

/// New candidate around `center` with an independent standard-normal `r`
/// per dimension. `k` is the 1-based generation index.
pub fn spawn<R: Rng + ?Sized>(
    center: &PriorityVector,
    upper_limit: f64,
    k: usize,
    rng: &mut R,
) -> PriorityVector {
    assert!(k >= 1, "generation index is 1-based");
    let keys = center
        .keys()
        .iter()
        .map(|&c| perturb(c, upper_limit, rng.sample(StandardNormal), k))
        .collect();
    PriorityVector::from_raw(keys)
}

pub fn run_bbbc(
    cm: &CostMatrix,
    source: usize,
    terminal: usize,
    params: &BbbcParams,
) -> Result<SearchResult> {
    params.validate()?;
    let start = Instant::now();
    let n = cm.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut trace = GenerationTrace::new();

    // Big Bang
    let mut population: Vec<PriorityVector> = (0..params.population_size)
        .map(|_| random_vector(&mut rng, n))
        .collect();
    let mut best: Option<(Path, PriorityVector)> = None;

    for generation in 1..=params.max_generations {
        let mut scored = population
            .into_iter()
            .map(|keys| Ok((decode(&keys, cm, source, terminal)?, keys)))
            .collect::<Result<Vec<_>>>()?;
        scored.sort_by(|a, b| a.0.cost.total_cmp(&b.0.cost));

        let leader = &scored[0];
        trace.record(leader.0.cost);
        if best.as_ref().is_none_or(|(p, _)| leader.0.cost < p.cost) {
            best = Some(leader.clone());
        }
        if generation == params.max_generations {
            break;
        }

        // Big Crunch
        let center = match params.center_mode {
            CenterMode::WeightedCenter => {
                let (paths, keys): (Vec<Path>, Vec<PriorityVector>) = scored.into_iter().unzip();
                let costs: Vec<f64> = paths.iter().map(|p| p.cost).collect();
                center_of_mass(&keys, &costs)?
            }
            CenterMode::BestIndividual => scored.swap_remove(0).1,
        };

        let elite = best.as_ref().expect("set in generation 1").1.clone();
        population = std::iter::once(elite)
            .chain(
                (1..params.population_size)
                    .map(|_| spawn(&center, params.upper_limit, generation, &mut rng)),
            )
            .collect();
    }

    let (best, best_keys) = best.expect("at least one generation");
    Ok(SearchResult {
        best,
        best_keys,
        trace,
        wall_time: start.elapsed(),
    })
}
