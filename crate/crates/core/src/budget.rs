//! Run budgets and the counting evaluator every generator scores through.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::objective::{Fitness, Objective};

/// Wall-clock and evaluation limits for one run. Whichever trips first ends it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    pub max_ms: u64,
    pub max_evaluations: u64,
}

impl Budget {
    pub const UNLIMITED: Budget = Budget {
        max_ms: u64::MAX,
        max_evaluations: u64::MAX,
    };

    /// Evaluation-count budget with no practical time limit. Runs under this
    /// budget are deterministic.
    pub fn evaluations(max_evaluations: u64) -> Self {
        Budget {
            max_ms: u64::MAX,
            max_evaluations,
        }
    }

    pub fn millis(max_ms: u64) -> Self {
        Budget {
            max_ms,
            max_evaluations: u64::MAX,
        }
    }
}

/// Wraps an objective, counting every call and enforcing the budget.
///
/// The first evaluation of a run (the starting map) is always granted so that
/// every run has a scored map to report; after that, evaluation `k + 1` is
/// refused once `k >= max_evaluations` or the clock has run out.
#[derive(Debug)]
pub struct Evaluator<'a> {
    objective: &'a Objective,
    budget: Budget,
    start: Instant,
    deadline: Option<Instant>,
    evaluations: u64,
    exhausted: bool,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a Objective, budget: Budget) -> Self {
        let start = Instant::now();
        let deadline = start.checked_add(Duration::from_millis(budget.max_ms));
        Self {
            objective,
            budget,
            start,
            deadline,
            evaluations: 0,
            exhausted: false,
        }
    }

    pub fn objective(&self) -> &Objective {
        self.objective
    }

    /// Scores `grid`, or returns `None` once the budget is spent.
    #[inline]
    pub fn evaluate(&mut self, grid: &Grid) -> Option<Fitness> {
        if self.evaluations > 0 && !self.has_room() {
            self.exhausted = true;
            return None;
        }
        self.evaluations += 1;
        Some(self.objective.evaluate(grid))
    }

    fn has_room(&self) -> bool {
        if self.evaluations >= self.budget.max_evaluations {
            return false;
        }
        match self.deadline {
            Some(d) => Instant::now() < d,
            None => true,
        }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// True once an evaluation has been refused.
    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }
}
