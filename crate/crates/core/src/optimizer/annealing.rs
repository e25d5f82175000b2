use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Individual, OptimizerOutcome};
use crate::budget::{Budget, Evaluator};
use crate::grid::Grid;
use crate::objective::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealingParams {
    pub initial_temperature: f64,
    /// Multiplier applied to the temperature before every step, in `(0, 1)`.
    pub cooling: f64,
}

impl Default for AnnealingParams {
    fn default() -> Self {
        Self {
            initial_temperature: 10.0,
            cooling: 0.99,
        }
    }
}

/// `exp(-d / T)`, with `d = 0` always accepted (including at `T = 0`).
pub fn acceptance_probability(d: f64, temperature: f64) -> f64 {
    if d <= 0.0 {
        1.0
    } else if temperature <= 0.0 {
        0.0
    } else {
        (-d / temperature).exp()
    }
}

/// One Bernoulli draw deciding whether a non-improving move is taken.
pub fn accept_worse<R: Rng + ?Sized>(d: f64, temperature: f64, rng: &mut R) -> bool {
    let p = acceptance_probability(d, temperature);
    p >= 1.0 || rng.random::<f64>() < p
}

pub fn simulated_annealing<R: Rng + ?Sized>(
    objective: &Objective,
    start: Grid,
    budget: Budget,
    params: &AnnealingParams,
    rng: &mut R,
) -> OptimizerOutcome {
    assert!(
        params.cooling > 0.0 && params.cooling < 1.0 && params.initial_temperature > 0.0,
        "annealing needs 0 < cooling < 1 and a positive start temperature"
    );
    let mut ev = Evaluator::new(objective, budget);
    let fit = ev
        .evaluate(&start)
        .expect("the first evaluation is always granted");
    let mut best = Individual {
        genome: start.clone(),
        fitness: fit.value,
    };
    let mut history = vec![fit.value];
    if fit.solution {
        return OptimizerOutcome::new(true, best, 0, history, &ev);
    }
    let mut current = start;
    let mut current_score = fit.value;
    let mut temperature = params.initial_temperature;
    let mut steps = 0;

    loop {
        temperature *= params.cooling;
        let i = rng.random_range(0..current.len());
        current.toggle(i);
        let Some(f) = ev.evaluate(&current) else {
            current.toggle(i);
            break;
        };
        steps += 1;
        if f.solution {
            history.push(f.value);
            let solved = Individual {
                genome: current,
                fitness: f.value,
            };
            return OptimizerOutcome::new(true, solved, steps, history, &ev);
        }
        let accepted = f.value > current_score
            || accept_worse((current_score - f.value).abs(), temperature, rng);
        if accepted {
            current_score = f.value;
            if f.value > best.fitness {
                best = Individual {
                    genome: current.clone(),
                    fitness: f.value,
                };
            }
        } else {
            current.toggle(i);
        }
        history.push(best.fitness);
    }
    OptimizerOutcome::new(false, best, steps, history, &ev)
}
