use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{mutate, sort_best_first, GenomeInit, Individual, OptimizerOutcome, RankSelector};
use crate::budget::{Budget, Evaluator};
use crate::grid::Grid;
use crate::objective::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneticParams {
    pub population: usize,
    pub crossover_rate: f64,
    /// Per-gene flip probability.
    pub mutation_rate: f64,
    /// Individuals copied unchanged into the next generation.
    pub elites: usize,
}

impl Default for GeneticParams {
    fn default() -> Self {
        Self {
            population: 200,
            crossover_rate: 0.8,
            mutation_rate: 0.05,
            elites: 1,
        }
    }
}

/// Child with `a`'s tiles before `cut` and `b`'s from `cut` on (row-major).
pub fn single_point_crossover(a: &Grid, b: &Grid, cut: usize) -> Grid {
    let mut child = a.clone();
    for i in cut..a.len() {
        child.set(i, b.is_wall(i));
    }
    child
}

pub fn genetic_algorithm<R: Rng + ?Sized>(
    objective: &Objective,
    init: GenomeInit,
    budget: Budget,
    params: &GeneticParams,
    rng: &mut R,
) -> OptimizerOutcome {
    assert!(
        params.population >= 2 && params.elites < params.population,
        "genetic algorithm needs population >= 2 and elites < population"
    );
    let mut ev = Evaluator::new(objective, budget);
    let mut population = Vec::with_capacity(params.population);
    for _ in 0..params.population {
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
    let tiles = init.width * init.height;

    while !ev.exhausted() {
        let selector = RankSelector::new(&population);
        let mut next: Vec<Individual> = population.iter().take(params.elites).cloned().collect();
        while next.len() < params.population {
            let a = &population[selector.pick(rng)];
            let b = &population[selector.pick(rng)];
            let mut genome = if tiles >= 2 && rng.random_bool(params.crossover_rate) {
                single_point_crossover(&a.genome, &b.genome, rng.random_range(1..tiles))
            } else {
                a.genome.clone()
            };
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
            next.push(child);
        }
        if ev.exhausted() {
            if next.len() == params.elites {
                break;
            }
            // partial generation: survivors fill the gap
            next.append(&mut population);
        }
        population = next;
        sort_best_first(&mut population);
        population.truncate(params.population);
        generations += 1;
        history.push(population[0].fitness);
    }
    let best = population.swap_remove(0);
    OptimizerOutcome::new(false, best, generations, history, &ev)
}
