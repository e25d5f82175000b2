use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{mutate, sort_best_first, GenomeInit, Individual, OptimizerOutcome, RankSelector};
use crate::budget::{Budget, Evaluator};
use crate::grid::Grid;
use crate::objective::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionParams {
    pub mu: usize,
    pub lambda: usize,
    /// Size of the parent pool; `None` means all `mu` survivors.
    pub rho: Option<usize>,
    /// Per-tile flip probability.
    pub mutation_rate: f64,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        Self {
            mu: 10,
            lambda: 20,
            rho: None,
            mutation_rate: 0.05,
        }
    }
}

impl EvolutionParams {
    pub fn rho(&self) -> usize {
        self.rho.unwrap_or(self.mu)
    }
}

/// Plus-selection evolution strategy, `(mu/rho + lambda)`.
///
/// Each generation breeds `lambda` offspring from parents rank-selected among
/// the `rho` best survivors, then keeps the best `mu` of parents and offspring.
/// Offspring are ranked ahead of parents with equal fitness.
pub fn evolution_strategy<R: Rng + ?Sized>(
    objective: &Objective,
    init: GenomeInit,
    budget: Budget,
    params: &EvolutionParams,
    rng: &mut R,
) -> OptimizerOutcome {
    let rho = params.rho();
    assert!(
        params.mu >= 1 && params.lambda >= 1 && (1..=params.mu).contains(&rho),
        "evolution strategy needs mu >= 1, lambda >= 1, 1 <= rho <= mu"
    );
    let mut ev = Evaluator::new(objective, budget);
    let mut population = Vec::with_capacity(params.mu + params.lambda);
    for _ in 0..params.mu {
        let genome = Grid::random(init.width, init.height, init.empty_pct, rng)
            .expect("init dimensions are validated by the caller");
        let Some(f) = ev.evaluate(&genome) else {
            break;
        };
        let ind = Individual {
            genome,
            fitness: f.value,
        };
        if f.solution {
            return OptimizerOutcome::new(true, ind, 0, vec![f.value], &ev);
        }
        population.push(ind);
    }
    sort_best_first(&mut population);
    let mut history = vec![population[0].fitness];
    let mut generations = 0;

    while !ev.exhausted() {
        let selector = RankSelector::new(&population[..rho.min(population.len())]);
        let mut pool = Vec::with_capacity(params.mu + params.lambda);
        for _ in 0..params.lambda {
            let parent = &population[selector.pick(rng)];
            let mut genome = parent.genome.clone();
            mutate(&mut genome, params.mutation_rate, rng);
            let Some(f) = ev.evaluate(&genome) else {
                break;
            };
            let child = Individual {
                genome,
                fitness: f.value,
            };
            if f.solution {
                history.push(f.value);
                return OptimizerOutcome::new(true, child, generations + 1, history, &ev);
            }
            pool.push(child);
        }
        if ev.exhausted() && pool.is_empty() {
            break;
        }
        pool.append(&mut population);
        sort_best_first(&mut pool);
        pool.truncate(params.mu);
        population = pool;
        generations += 1;
        history.push(population[0].fitness);
    }
    let best = population.swap_remove(0);
    OptimizerOutcome::new(false, best, generations, history, &ev)
}
