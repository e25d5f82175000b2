//! Experiment runner: config enumeration, seeded single runs, parallel sweeps
//! and the results CSV.

mod config;
mod records;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::grid::Grid;
use crate::optimizer::{
    evolution_strategy, genetic_algorithm, hill_climb, simulated_annealing, GenomeInit,
    OptimizerKind, OptimizerOutcome,
};
use crate::representation::ReprState;
use crate::tree_search::{best_first, bfs, dfs, mcts, SearchOutcome, TreeAlgorithm};

pub use config::{
    derive_seed, Algorithm, AlgorithmParams, BudgetSpec, ConfigError, ConfigKey, ExperimentSpec,
    RunConfig, SpecError,
};
pub use records::{
    read_results, write_results, ResultsWriter, RowWarning, RunRecord, RESULTS_HEADER,
};

/// Environment variable that overrides the sweep worker count.
pub const JOBS_ENV: &str = "MAPGEN_JOBS";

/// Worker count from [`JOBS_ENV`], if set to a positive integer.
pub fn jobs_from_env() -> Option<usize> {
    std::env::var(JOBS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// Starting map: each tile independently empty with probability `empty_pct`.
pub fn init_grid<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    empty_pct: f64,
    rng: &mut R,
) -> Grid {
    Grid::random(width, height, empty_pct, rng).expect("map size is validated before a run starts")
}

/// What any generator reports back to the harness.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub solved: bool,
    pub map: Grid,
    pub best_score: f64,
    pub evaluations: u64,
    pub iterations: u64,
    pub max_depth: Option<usize>,
    pub solution_depth: Option<usize>,
}

impl From<SearchOutcome> for Outcome {
    fn from(o: SearchOutcome) -> Self {
        Self {
            solved: o.solved,
            map: o.map,
            best_score: o.best_score,
            evaluations: o.evaluations,
            iterations: o.nodes_expanded,
            max_depth: Some(o.max_depth_reached),
            solution_depth: o.solution_depth,
        }
    }
}

impl From<OptimizerOutcome> for Outcome {
    fn from(o: OptimizerOutcome) -> Self {
        Self {
            solved: o.solved,
            map: o.map,
            best_score: o.best_score,
            evaluations: o.evaluations,
            iterations: o.iterations,
            max_depth: None,
            solution_depth: None,
        }
    }
}

/// Runs the generator described by `cfg` once. `cfg` must be valid.
///
/// Tree searches and the single-map optimizers start from one [`init_grid`]
/// draw; ES and GA draw their whole initial population from the same stream,
/// so their first individual plays the part of the initial map.
pub fn generate(cfg: &RunConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rng = &mut rng;
    let (w, h, pct) = (cfg.width, cfg.height, cfg.init_empty_pct);
    let obj = &cfg.objective;
    let p = &cfg.params;
    match cfg.algorithm {
        Algorithm::Tree(t) => {
            let repr = cfg
                .representation
                .expect("validated: tree searches have a representation");
            let root = ReprState::initial(repr, init_grid(w, h, pct, rng), rng);
            match t {
                TreeAlgorithm::Bfs => bfs(obj, root, cfg.budget),
                TreeAlgorithm::Dfs => dfs(obj, root, cfg.budget),
                TreeAlgorithm::BestFirst => best_first(obj, root, cfg.budget),
                TreeAlgorithm::Mcts => mcts(obj, root, cfg.budget, &p.mcts, rng),
            }
            .into()
        }
        Algorithm::Optimizer(k) => {
            let init = GenomeInit {
                width: w,
                height: h,
                empty_pct: pct,
            };
            match k {
                OptimizerKind::Hc => {
                    hill_climb(obj, init_grid(w, h, pct, rng), cfg.budget, &p.hc, rng)
                }
                OptimizerKind::Sa => {
                    simulated_annealing(obj, init_grid(w, h, pct, rng), cfg.budget, &p.sa, rng)
                }
                OptimizerKind::Es => evolution_strategy(obj, init, cfg.budget, &p.es, rng),
                OptimizerKind::Ga => genetic_algorithm(obj, init, cfg.budget, &p.ga, rng),
            }
            .into()
        }
    }
}

/// Runs `cfg` and measures it. Invalid configs and panics inside a generator
/// become error records rather than aborting the caller.
pub fn run_one(cfg: &RunConfig) -> RunRecord {
    let start = Instant::now();
    let result = cfg.validate().map_err(|e| e.to_string()).and_then(|()| {
        catch_unwind(AssertUnwindSafe(|| generate(cfg))).map_err(|panic| {
            panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "generator panicked".to_string())
        })
    });
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok(out) => RunRecord::from_outcome(cfg, out, wall_ms),
        Err(e) => {
            log::warn!("run {} failed: {e}", cfg.run_id);
            RunRecord::from_error(cfg, e, wall_ms)
        }
    }
}

/// Runs every run of `spec` on `jobs` worker threads. Records come back
/// sorted by `run_id` whatever the scheduling.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Vec<RunRecord> {
    run_configs(&spec.runs(), jobs)
}

/// Runs an explicit list of configs in parallel, sorted by `run_id`.
pub fn run_configs(runs: &[RunConfig], jobs: usize) -> Vec<RunRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("failed to start worker threads");
    let mut out: Vec<RunRecord> = pool.install(|| runs.par_iter().map(run_one).collect());
    out.sort_by_key(|r| r.run_id);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::objective::Objective;
    use crate::representation::RepresentationKind;

    fn small_spec() -> ExperimentSpec {
        let mut spec = ExperimentSpec::desk();
        spec.width = 4;
        spec.height = 4;
        spec.runs_per_config = 2;
        spec.budget = BudgetSpec {
            max_ms: None,
            max_evaluations: Some(300),
        };
        spec.objectives = vec![
            Objective::EmptyTiles { r1: 7, r2: 9 },
            Objective::PathLength { goal: 8 },
            Objective::Connectivity,
        ];
        spec
    }

    fn strip_time(mut records: Vec<RunRecord>) -> Vec<RunRecord> {
        for r in &mut records {
            r.wall_ms = 0.0;
        }
        records
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let spec = small_spec();
        let one = strip_time(run_experiment(&spec, 1));
        let four = strip_time(run_experiment(&spec, 4));
        assert_eq!(one.len(), 96);
        assert_eq!(one, four);
        assert!(one.iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn init_solution_costs_one_evaluation() {
        let mut cfg = small_spec().runs().remove(0);
        cfg.objective = Objective::EmptyTiles { r1: 0, r2: 16 };
        let rec = run_one(&cfg);
        assert!(rec.solved);
        assert_eq!(rec.evaluations, 1);
        assert_eq!(rec.solution_depth, Some(0));
    }

    #[test]
    fn zero_evaluations_leaves_unsolved() {
        let mut cfg = small_spec().runs().remove(0);
        cfg.budget = Budget::evaluations(0);
        cfg.objective = Objective::PathLength { goal: 30 };
        let rec = run_one(&cfg);
        assert!(!rec.solved);
        assert_eq!(rec.evaluations, 1);
    }

    #[test]
    fn invalid_config_becomes_error_row() {
        let mut cfg = small_spec().runs().remove(0);
        cfg.representation = None;
        let rec = run_one(&cfg);
        assert!(rec.error.is_some());
        assert!(!rec.solved);
        assert_eq!(rec.map, None);

        cfg.representation = Some(RepresentationKind::Narrow);
        cfg.params.mcts.rollout_depth = 0;
        cfg.algorithm = Algorithm::Tree(TreeAlgorithm::Mcts);
        assert!(run_one(&cfg).error.unwrap().contains("rollout_depth"));
    }

    #[test]
    fn init_grid_is_seeded() {
        let a = init_grid(10, 10, 0.25, &mut ChaCha8Rng::seed_from_u64(5));
        let b = init_grid(10, 10, 0.25, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        let dense = init_grid(10, 10, 0.999, &mut ChaCha8Rng::seed_from_u64(5));
        assert!(dense.count_empty() >= 98);
    }
}
