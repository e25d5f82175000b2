//! Optimization generators working directly on the grid genome, with the
//! single-tile flip as the neighbourhood move.

mod annealing;
mod evolution;
mod genetic;
mod hill_climb;
mod selection;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::budget::Evaluator;
use crate::grid::Grid;

pub use annealing::{accept_worse, acceptance_probability, simulated_annealing, AnnealingParams};
pub use evolution::{evolution_strategy, EvolutionParams};
pub use genetic::{genetic_algorithm, single_point_crossover, GeneticParams};
pub use hill_climb::{hill_climb, HillClimbParams};
pub use selection::{rank_select, RankSelector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Hc,
    Sa,
    Es,
    Ga,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 4] = [Self::Hc, Self::Sa, Self::Es, Self::Ga];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hc => "hc",
            Self::Sa => "sa",
            Self::Es => "es",
            Self::Ga => "ga",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hc" => Ok(Self::Hc),
            "sa" => Ok(Self::Sa),
            "es" => Ok(Self::Es),
            "ga" => Ok(Self::Ga),
            other => Err(format!("unknown optimizer {other:?}")),
        }
    }
}

/// A population member with its cached fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: Grid,
    pub fitness: f64,
}

/// How initial genomes are drawn for the population-based optimizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenomeInit {
    pub width: usize,
    pub height: usize,
    pub empty_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOutcome {
    pub solved: bool,
    pub map: Grid,
    pub best_score: f64,
    /// Steps for HC/SA, generations for ES/GA.
    pub iterations: u64,
    pub evaluations: u64,
    pub elapsed_ms: f64,
    /// HC: current score after each step (start included). SA: best-ever
    /// score after each step. ES/GA: best fitness after each generation.
    pub history: Vec<f64>,
}

impl OptimizerOutcome {
    fn new(
        solved: bool,
        best: Individual,
        iterations: u64,
        history: Vec<f64>,
        ev: &Evaluator<'_>,
    ) -> Self {
        Self {
            solved,
            map: best.genome,
            best_score: best.fitness,
            iterations,
            evaluations: ev.evaluations(),
            elapsed_ms: ev.elapsed_ms(),
            history,
        }
    }
}

/// Descending by fitness; stable, so earlier entries win ties.
fn sort_best_first(pop: &mut [Individual]) {
    pop.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
}

fn mutate<R: rand::Rng + ?Sized>(genome: &mut Grid, rate: f64, rng: &mut R) {
    if rate <= 0.0 {
        return;
    }
    for i in 0..genome.len() {
        if rng.random_bool(rate) {
            genome.toggle(i);
        }
    }
}
