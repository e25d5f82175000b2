use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Individual, OptimizerOutcome};
use crate::budget::{Budget, Evaluator};
use crate::grid::Grid;
use crate::objective::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HillClimbParams {
    /// Restart from a fresh random map with this empty-tile probability when
    /// stuck. `None` stops at the first local optimum.
    pub restart_empty_pct: Option<f64>,
}

/// Steepest-ascent hill climbing over single-tile flips.
///
/// Every step scores all `t` neighbours and moves to the best strictly
/// improving one, breaking ties uniformly at random.
pub fn hill_climb<R: Rng + ?Sized>(
    objective: &Objective,
    start: Grid,
    budget: Budget,
    params: &HillClimbParams,
    rng: &mut R,
) -> OptimizerOutcome {
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
    let mut steps = 0;
    let mut ties = Vec::new();

    loop {
        let mut top = current_score;
        ties.clear();
        for i in 0..current.len() {
            current.toggle(i);
            let Some(f) = ev.evaluate(&current) else {
                current.toggle(i);
                return OptimizerOutcome::new(false, best, steps, history, &ev);
            };
            if f.solution {
                steps += 1;
                history.push(f.value);
                let solved = Individual {
                    genome: current,
                    fitness: f.value,
                };
                return OptimizerOutcome::new(true, solved, steps, history, &ev);
            }
            current.toggle(i);
            if f.value > top {
                top = f.value;
                ties.clear();
                ties.push(i);
            } else if f.value == top && !ties.is_empty() {
                ties.push(i);
            }
        }

        if ties.is_empty() {
            let Some(pct) = params.restart_empty_pct else {
                break;
            };
            current = Grid::random(current.width(), current.height(), pct, rng)
                .expect("dimensions come from a valid grid");
            let Some(f) = ev.evaluate(&current) else {
                break;
            };
            current_score = f.value;
            if f.value > best.fitness {
                best = Individual {
                    genome: current.clone(),
                    fitness: f.value,
                };
            }
            if f.solution {
                return OptimizerOutcome::new(true, best, steps, history, &ev);
            }
            continue;
        }

        let pick = ties[rng.random_range(0..ties.len())];
        current.toggle(pick);
        debug_assert!(top > current_score);
        current_score = top;
        steps += 1;
        history.push(top);
        if top > best.fitness {
            best = Individual {
                genome: current.clone(),
                fitness: top,
            };
        }
    }
    OptimizerOutcome::new(false, best, steps, history, &ev)
}
