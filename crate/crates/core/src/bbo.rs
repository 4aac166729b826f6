//! Biogeography-based optimization over priority vectors.
//!
//! Habitats are ranked by path cost and given species counts `k = n - rank`.
//! Immigration `λ_k = I (1 - k/n)` and emigration `μ_k = E k/n` drive
//! SIV migration between habitats. A single species-count probability
//! vector `P_0..P_n` evolves by the birth/death master equation, and each
//! non-elite habitat mutates with rate `m_max (1 - P_k / P_max)`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzycost::CostMatrix;
use crate::pathcodec::{decode, random_vector, Path, PriorityVector};
use crate::trace::{GenerationTrace, SearchResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BboParams {
    pub population_size: usize,
    pub max_generations: usize,
    /// Maximum immigration rate `I`.
    pub max_immigration: f64,
    /// Maximum emigration rate `E`.
    pub max_emigration: f64,
    pub max_mutation: f64,
    pub elite_count: usize,
    pub rng_seed: u64,
}

impl Default for BboParams {
    fn default() -> Self {
        Self {
            population_size: 50,
            max_generations: 100,
            max_immigration: 1.0,
            max_emigration: 1.0,
            max_mutation: 0.01,
            elite_count: 2,
            rng_seed: 0,
        }
    }
}

impl BboParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if self.population_size < 2 {
            return bad(format!("population size {} < 2", self.population_size));
        }
        if self.max_generations == 0 {
            return bad("max_generations must be positive".into());
        }
        if !(self.max_immigration > 0.0) || !(self.max_emigration > 0.0) {
            return bad("maximum immigration and emigration rates must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.max_mutation) {
            return bad(format!(
                "max mutation rate {} outside [0, 1]",
                self.max_mutation
            ));
        }
        if self.elite_count >= self.population_size {
            return bad(format!(
                "elite count {} must be below population size {}",
                self.elite_count, self.population_size
            ));
        }
        Ok(())
    }
}

/// Immigration and emigration rate of one species count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub immigration: f64,
    pub emigration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Habitat {
    pub siv: PriorityVector,
    /// Decoded route; its cost is the habitat's HSI (lower is better).
    pub path: Path,
    pub species: usize,
    pub p_s: f64,
}

impl Habitat {
    pub fn new(siv: PriorityVector, path: Path) -> Self {
        Self {
            siv,
            path,
            species: 0,
            p_s: 0.0,
        }
    }

    pub fn cost(&self) -> f64 {
        self.path.cost
    }
}

/// Species count of the habitat at 0-based cost rank `rank`: the best
/// habitat hosts `max_species`.
pub fn rank_to_species(rank: usize, max_species: usize) -> usize {
    max_species - rank
}

pub fn migration_rates(k: usize, n: usize, max_immigration: f64, max_emigration: f64) -> Rates {
    let fill = k as f64 / n as f64;
    Rates {
        immigration: max_immigration * (1.0 - fill),
        emigration: max_emigration * fill,
    }
}

/// Roulette over `weights` with index `skip` excluded.
fn roulette<R: Rng + ?Sized>(weights: &[f64], skip: usize, rng: &mut R) -> Option<usize> {
    let total: f64 = weights
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != skip)
        .map(|(_, w)| w)
        .sum();
    if !(total > 0.0) {
        return None;
    }
    let mut pick = rng.random::<f64>() * total;
    let mut last = None;
    for (j, &w) in weights.iter().enumerate() {
        if j == skip || w <= 0.0 {
            continue;
        }
        if pick < w {
            return Some(j);
        }
        pick -= w;
        last = Some(j);
    }
    // rounding left `pick` just past the final bucket
    last
}

/// Immigrates SIVs into every non-elite habitat. `population` is sorted
/// best first and `rates[i]` belongs to `population[i]`; the first
/// `elite_count` habitats are left alone. Donors are drawn from the
/// population as it was before this call.
pub fn migrate<R, F>(
    population: &mut [Habitat],
    rates: &[Rates],
    elite_count: usize,
    rng: &mut R,
    mut recost: F,
) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(&PriorityVector) -> Result<Path>,
{
    if rates.len() != population.len() {
        return Err(Error::LengthMismatch {
            expected: population.len(),
            actual: rates.len(),
        });
    }
    let donors: Vec<PriorityVector> = population.iter().map(|h| h.siv.clone()).collect();
    let emigration: Vec<f64> = rates.iter().map(|r| r.emigration).collect();

    for (i, habitat) in population.iter_mut().enumerate().skip(elite_count) {
        let lambda = rates[i].immigration;
        let mut changed = false;
        for d in 0..habitat.siv.len() {
            if rng.random::<f64>() < lambda {
                let j = roulette(&emigration, i, rng).ok_or_else(|| {
                    Error::InvalidParam("every donor has zero emigration rate".into())
                })?;
                habitat.siv.keys_mut()[d] = donors[j].keys()[d];
                changed = true;
            }
        }
        if changed {
            habitat.path = recost(&habitat.siv)?;
        }
    }
    Ok(())
}

/// Right-hand side of the species-count master equation. Transitions that
/// would leave `0..=n` are dropped, so the entries always sum to zero.
pub fn species_derivative(p: &[f64], rates: &[Rates]) -> Result<Vec<f64>> {
    if p.len() != rates.len() || p.is_empty() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            actual: rates.len(),
        });
    }
    let n = p.len() - 1;
    Ok((0..=n)
        .map(|k| {
            let mut dp = 0.0;
            if k < n {
                dp -= rates[k].immigration * p[k];
                dp += rates[k + 1].emigration * p[k + 1];
            }
            if k > 0 {
                dp -= rates[k].emigration * p[k];
                dp += rates[k - 1].immigration * p[k - 1];
            }
            dp
        })
        .collect())
}

/// One explicit Euler step of size `dt`, then negatives clamped to zero and
/// the vector renormalized to sum 1.
pub fn update_probability(p: &[f64], rates: &[Rates], dt: f64) -> Result<Vec<f64>> {
    let dp = species_derivative(p, rates)?;
    let mut next: Vec<f64> = p
        .iter()
        .zip(&dp)
        .map(|(pk, d)| (pk + dt * d).max(0.0))
        .collect();
    let total: f64 = next.iter().sum();
    if total > 0.0 {
        next.iter_mut().for_each(|x| *x /= total);
    } else {
        let uniform = 1.0 / next.len() as f64;
        next.iter_mut().for_each(|x| *x = uniform);
    }
    Ok(next)
}

/// Mutation rate of a habitat whose species probability is `p_s`.
pub fn mutation_rate(p_s: f64, p_max: f64, max_mutation: f64) -> f64 {
    if p_max > 0.0 {
        max_mutation * (1.0 - p_s / p_max)
    } else {
        0.0
    }
}

/// Replaces each SIV of each non-elite habitat with a fresh Uniform[0, 1]
/// draw at the habitat's mutation rate.
pub fn mutate<R, F>(
    population: &mut [Habitat],
    max_mutation: f64,
    elite_count: usize,
    rng: &mut R,
    mut recost: F,
) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(&PriorityVector) -> Result<Path>,
{
    let p_max = population.iter().map(|h| h.p_s).fold(0.0, f64::max);
    for habitat in population.iter_mut().skip(elite_count) {
        let rate = mutation_rate(habitat.p_s, p_max, max_mutation);
        let mut changed = false;
        for key in habitat.siv.keys_mut() {
            if rng.random::<f64>() < rate {
                *key = rng.random::<f64>();
                changed = true;
            }
        }
        if changed {
            habitat.path = recost(&habitat.siv)?;
        }
    }
    Ok(())
}

fn sort_by_cost(population: &mut [Habitat]) {
    population.sort_by(|a, b| a.cost().total_cmp(&b.cost()));
}

pub fn run_bbo(
    cm: &CostMatrix,
    source: usize,
    terminal: usize,
    params: &BboParams,
) -> Result<SearchResult> {
    params.validate()?;
    let start = Instant::now();
    let n = cm.node_count();
    let n_pop = params.population_size;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut trace = GenerationTrace::new();
    let recost = |keys: &PriorityVector| decode(keys, cm, source, terminal);

    let mut population = (0..n_pop)
        .map(|_| {
            let siv = random_vector(&mut rng, n);
            let path = recost(&siv)?;
            Ok(Habitat::new(siv, path))
        })
        .collect::<Result<Vec<_>>>()?;

    // species counts run 0..=n_pop
    let rates_by_species: Vec<Rates> = (0..=n_pop)
        .map(|k| migration_rates(k, n_pop, params.max_immigration, params.max_emigration))
        .collect();
    let mut probability = vec![1.0 / (n_pop + 1) as f64; n_pop + 1];
    let mut best: Option<Habitat> = None;

    for generation in 1..=params.max_generations {
        sort_by_cost(&mut population);
        let leader = &population[0];
        trace.record(leader.cost());
        if best.as_ref().is_none_or(|b| leader.cost() < b.cost()) {
            best = Some(leader.clone());
        }
        if generation == params.max_generations {
            break;
        }

        for (rank, habitat) in population.iter_mut().enumerate() {
            habitat.species = rank_to_species(rank, n_pop);
        }
        let rates: Vec<Rates> = population
            .iter()
            .map(|h| rates_by_species[h.species])
            .collect();
        migrate(
            &mut population,
            &rates,
            params.elite_count,
            &mut rng,
            recost,
        )?;

        probability = update_probability(&probability, &rates_by_species, 1.0)?;
        for habitat in &mut population {
            habitat.p_s = probability[habitat.species];
        }
        mutate(
            &mut population,
            params.max_mutation,
            params.elite_count,
            &mut rng,
            recost,
        )?;
    }

    let best = best.expect("at least one generation");
    Ok(SearchResult {
        best: best.path,
        best_keys: best.siv,
        trace,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn habitat(keys: &[f64], cost: f64) -> Habitat {
        Habitat::new(
            PriorityVector::new(keys.to_vec()).unwrap(),
            Path {
                nodes: vec![0, 1],
                cost,
            },
        )
    }

    fn no_recost(_: &PriorityVector) -> Result<Path> {
        Ok(Path {
            nodes: vec![0, 1],
            cost: 9.0,
        })
    }

    #[test]
    fn species_from_rank() {
        assert_eq!(rank_to_species(0, 50), 50);
        assert_eq!(rank_to_species(49, 50), 1);
        let ks: Vec<usize> = (0..50).map(|r| rank_to_species(r, 50)).collect();
        assert!(ks.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn rate_examples() {
        assert_eq!(
            migration_rates(0, 50, 1.0, 0.7),
            Rates {
                immigration: 1.0,
                emigration: 0.0
            }
        );
        assert_eq!(
            migration_rates(50, 50, 0.7, 1.0),
            Rates {
                immigration: 0.0,
                emigration: 1.0
            }
        );
        assert_eq!(
            migration_rates(25, 50, 1.0, 1.0),
            Rates {
                immigration: 0.5,
                emigration: 0.5
            }
        );
    }

    #[test]
    fn zero_immigration_leaves_population() {
        let mut pop = vec![
            habitat(&[0.1, 0.2], 1.0),
            habitat(&[0.3, 0.4], 2.0),
            habitat(&[0.5, 0.6], 3.0),
        ];
        let before = pop.clone();
        let rates = vec![
            Rates {
                immigration: 0.0,
                emigration: 1.0
            };
            3
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        migrate(&mut pop, &rates, 0, &mut rng, no_recost).unwrap();
        assert_eq!(pop, before);
    }

    #[test]
    fn forced_migration_copies_single_donor() {
        let mut pop = vec![
            habitat(&[0.1, 0.2, 0.3], 1.0),
            habitat(&[0.7, 0.8, 0.9], 2.0),
        ];
        let rates = vec![
            Rates {
                immigration: 0.0,
                emigration: 1.0,
            },
            Rates {
                immigration: 1.0,
                emigration: 0.0,
            },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        migrate(&mut pop, &rates, 0, &mut rng, no_recost).unwrap();
        assert_eq!(pop[1].siv.keys(), &[0.1, 0.2, 0.3]);
        assert_eq!(pop[1].cost(), 9.0);
        assert_eq!(pop[0].siv.keys(), &[0.1, 0.2, 0.3]);
    }

    #[test]
    fn elites_untouched_by_migration() {
        let mut pop = vec![
            habitat(&[0.1, 0.2], 1.0),
            habitat(&[0.3, 0.4], 2.0),
            habitat(&[0.5, 0.6], 3.0),
        ];
        let before = pop.clone();
        let rates = vec![
            Rates {
                immigration: 1.0,
                emigration: 1.0
            };
            3
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        migrate(&mut pop, &rates, 2, &mut rng, no_recost).unwrap();
        assert_eq!(pop[..2], before[..2]);
        assert_ne!(pop[2], before[2]);
    }

    #[test]
    fn all_zero_emigration_is_an_error() {
        let mut pop = vec![habitat(&[0.1], 1.0), habitat(&[0.3], 2.0)];
        let rates = vec![
            Rates {
                immigration: 1.0,
                emigration: 0.0
            };
            2
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(migrate(&mut pop, &rates, 0, &mut rng, no_recost).is_err());
    }

    #[test]
    fn static_probability_without_dynamics() {
        let p = vec![0.2, 0.3, 0.5];
        let rates = vec![
            Rates {
                immigration: 0.0,
                emigration: 0.0
            };
            3
        ];
        assert_eq!(update_probability(&p, &rates, 1.0).unwrap(), p);
    }

    #[test]
    fn two_state_step() {
        let rates = vec![
            Rates {
                immigration: 1.0,
                emigration: 0.0,
            },
            Rates {
                immigration: 0.0,
                emigration: 1.0,
            },
        ];
        assert_eq!(
            update_probability(&[1.0, 0.0], &rates, 1.0).unwrap(),
            vec![0.0, 1.0]
        );
    }

    #[test]
    fn probability_length_mismatch() {
        let rates = vec![
            Rates {
                immigration: 0.0,
                emigration: 0.0
            };
            2
        ];
        assert!(update_probability(&[0.5, 0.25, 0.25], &rates, 1.0).is_err());
    }

    #[test]
    fn mutation_rate_examples() {
        assert_eq!(mutation_rate(0.3, 0.3, 0.01), 0.0);
        assert_eq!(mutation_rate(0.0, 0.3, 0.01), 0.01);
        assert_eq!(mutation_rate(0.0, 0.0, 0.01), 0.0);
    }

    #[test]
    fn no_mutation_when_rate_zero() {
        let mut pop = vec![habitat(&[0.1, 0.2], 1.0), habitat(&[0.3, 0.4], 2.0)];
        pop[1].p_s = 0.0;
        pop[0].p_s = 0.5;
        let before = pop.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        mutate(&mut pop, 0.0, 0, &mut rng, no_recost).unwrap();
        assert_eq!(pop, before);
    }

    #[test]
    fn mutation_frequency() {
        // one habitat at P_max (never mutates) and one at P = 0 (rate 0.01)
        let dims = 100_000;
        let mut pop = vec![
            habitat(&vec![0.5; dims], 1.0),
            habitat(&vec![2.0 / 3.0; dims], 2.0),
        ];
        pop[0].p_s = 0.4;
        pop[1].p_s = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        mutate(&mut pop, 0.01, 0, &mut rng, no_recost).unwrap();
        assert!(pop[0].siv.keys().iter().all(|&k| k == 0.5));
        let flipped = pop[1]
            .siv
            .keys()
            .iter()
            .filter(|&&k| k != 2.0 / 3.0)
            .count();
        let freq = flipped as f64 / dims as f64;
        assert!((freq - 0.01).abs() <= 0.003, "{freq}");
    }

    #[test]
    fn params_validated() {
        assert!(BboParams::default().validate().is_ok());
        assert!(BboParams {
            elite_count: 50,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(BboParams {
            max_immigration: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(BboParams {
            max_mutation: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
