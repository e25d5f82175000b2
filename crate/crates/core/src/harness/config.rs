use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budget::Budget;
use crate::objective::{Objective, ObjectiveError, ObjectiveKind};
use crate::optimizer::{
    AnnealingParams, EvolutionParams, GeneticParams, HillClimbParams, OptimizerKind,
};
use crate::representation::RepresentationKind;
use crate::tree_search::{MctsParams, TreeAlgorithm};

/// One of the eight generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    Tree(TreeAlgorithm),
    Optimizer(OptimizerKind),
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Tree(TreeAlgorithm::Bfs),
        Algorithm::Tree(TreeAlgorithm::Dfs),
        Algorithm::Tree(TreeAlgorithm::BestFirst),
        Algorithm::Tree(TreeAlgorithm::Mcts),
        Algorithm::Optimizer(OptimizerKind::Hc),
        Algorithm::Optimizer(OptimizerKind::Sa),
        Algorithm::Optimizer(OptimizerKind::Es),
        Algorithm::Optimizer(OptimizerKind::Ga),
    ];

    pub fn is_tree_search(self) -> bool {
        matches!(self, Algorithm::Tree(_))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Tree(t) => t.as_str(),
            Algorithm::Optimizer(o) => o.as_str(),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(t) = s.parse::<TreeAlgorithm>() {
            return Ok(Algorithm::Tree(t));
        }
        s.parse::<OptimizerKind>().map(Algorithm::Optimizer).map_err(|_| {
            format!("unknown algorithm {s:?} (expected bfs | dfs | bestfs | mcts | hc | sa | es | ga)")
        })
    }
}

impl TryFrom<String> for Algorithm {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> Self {
        a.as_str().to_string()
    }
}

/// Hyperparameters for every algorithm; each run uses the block for its own.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmParams {
    pub mcts: MctsParams,
    pub hc: HillClimbParams,
    pub sa: AnnealingParams,
    pub es: EvolutionParams,
    pub ga: GeneticParams,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("tree search {0} needs a representation")]
    MissingRepresentation(Algorithm),
    #[error("optimizer {0} does not take a representation (got {1})")]
    UnexpectedRepresentation(Algorithm, RepresentationKind),
    #[error("map size must be positive, got {0}x{1}")]
    BadSize(usize, usize),
    #[error("initial empty-tile probability must be in (0, 1), got {0}")]
    BadInitPct(f64),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("invalid hyperparameter: {0}")]
    BadParam(String),
}

/// Budget as written in config files; a missing limit means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    #[serde(default)]
    pub max_ms: Option<u64>,
    #[serde(default)]
    pub max_evaluations: Option<u64>,
}

impl From<BudgetSpec> for Budget {
    fn from(b: BudgetSpec) -> Self {
        Budget {
            max_ms: b.max_ms.unwrap_or(u64::MAX),
            max_evaluations: b.max_evaluations.unwrap_or(u64::MAX),
        }
    }
}

/// Everything needed to reproduce one generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub run_id: u64,
    pub algorithm: Algorithm,
    pub representation: Option<RepresentationKind>,
    pub objective: Objective,
    pub width: usize,
    pub height: usize,
    pub init_empty_pct: f64,
    pub seed: u64,
    pub budget: Budget,
    pub params: AlgorithmParams,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match (self.algorithm, self.representation) {
            (Algorithm::Tree(_), None) => {
                return Err(ConfigError::MissingRepresentation(self.algorithm))
            }
            (Algorithm::Optimizer(_), Some(r)) => {
                return Err(ConfigError::UnexpectedRepresentation(self.algorithm, r))
            }
            _ => {}
        }
        if self.width == 0 || self.height == 0 {
            return Err(ConfigError::BadSize(self.width, self.height));
        }
        if !(self.init_empty_pct > 0.0 && self.init_empty_pct < 1.0) {
            return Err(ConfigError::BadInitPct(self.init_empty_pct));
        }
        self.objective.validate(self.width * self.height)?;
        validate_params(&self.params, self.algorithm)
    }
}

fn validate_params(p: &AlgorithmParams, algorithm: Algorithm) -> Result<(), ConfigError> {
    let bad = |m: &str| Err(ConfigError::BadParam(m.to_string()));
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    match algorithm {
        Algorithm::Tree(TreeAlgorithm::Mcts) => {
            if p.mcts.rollout_depth == 0 {
                return bad("mcts.rollout_depth must be at least 1");
            }
            if !p.mcts.epsilon_c.is_finite() || p.mcts.epsilon_c <= 0.0 {
                return bad("mcts.epsilon_c must be positive");
            }
        }
        Algorithm::Optimizer(OptimizerKind::Hc) => {
            if let Some(pct) = p.hc.restart_empty_pct {
                if !(pct > 0.0 && pct < 1.0) {
                    return bad("hc.restart_empty_pct must be in (0, 1)");
                }
            }
        }
        Algorithm::Optimizer(OptimizerKind::Sa) => {
            if !(p.sa.cooling > 0.0 && p.sa.cooling < 1.0) {
                return bad("sa.cooling must be in (0, 1)");
            }
            if !p.sa.initial_temperature.is_finite() || p.sa.initial_temperature <= 0.0 {
                return bad("sa.initial_temperature must be positive");
            }
        }
        Algorithm::Optimizer(OptimizerKind::Es) => {
            let rho = p.es.rho();
            if p.es.mu == 0 || p.es.lambda == 0 || rho == 0 || rho > p.es.mu {
                return bad("es needs mu >= 1, lambda >= 1 and 1 <= rho <= mu");
            }
            if !unit(p.es.mutation_rate) {
                return bad("es.mutation_rate must be in [0, 1]");
            }
        }
        Algorithm::Optimizer(OptimizerKind::Ga) => {
            if p.ga.population < 2 || p.ga.elites >= p.ga.population {
                return bad("ga needs population >= 2 and elites < population");
            }
            if !unit(p.ga.crossover_rate) || !unit(p.ga.mutation_rate) {
                return bad("ga rates must be in [0, 1]");
            }
        }
        _ => {}
    }
    Ok(())
}

/// One of the compared configurations: algorithm, representation (tree
/// searches only) and objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigKey {
    pub algorithm: Algorithm,
    pub representation: Option<RepresentationKind>,
    pub objective: ObjectiveKind,
}

impl ConfigKey {
    /// Short label such as `bfs-narrow` or `ga`.
    pub fn label(&self) -> String {
        match self.representation {
            Some(r) => format!("{}-{}", self.algorithm, r),
            None => self.algorithm.to_string(),
        }
    }
}

/// A full experiment protocol, as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub base_seed: u64,
    pub width: usize,
    pub height: usize,
    /// Runs per configuration, spread round-robin over `init_pcts`.
    pub runs_per_config: usize,
    pub init_pcts: Vec<f64>,
    pub budget: BudgetSpec,
    #[serde(default)]
    pub tree_algorithms: Vec<TreeAlgorithm>,
    #[serde(default)]
    pub representations: Vec<RepresentationKind>,
    #[serde(default)]
    pub optimizers: Vec<OptimizerKind>,
    pub objectives: Vec<Objective>,
    #[serde(default)]
    pub params: AlgorithmParams,
}

impl ExperimentSpec {
    fn all_algorithms(runs_per_config: usize, budget: BudgetSpec) -> Self {
        Self {
            base_seed: 7,
            width: 10,
            height: 10,
            runs_per_config,
            init_pcts: vec![0.25, 0.5, 0.75],
            budget,
            tree_algorithms: TreeAlgorithm::ALL.to_vec(),
            representations: RepresentationKind::ALL.to_vec(),
            optimizers: OptimizerKind::ALL.to_vec(),
            objectives: ObjectiveKind::ALL
                .iter()
                .map(|&k| Objective::default_for(k))
                .collect(),
            params: AlgorithmParams::default(),
        }
    }

    /// 3000 runs per configuration, 60 s wall clock per run.
    pub fn full() -> Self {
        Self::all_algorithms(
            3000,
            BudgetSpec {
                max_ms: Some(60_000),
                max_evaluations: None,
            },
        )
    }

    /// 100 runs per configuration, 50 000 evaluations or 5 s per run.
    pub fn desk() -> Self {
        Self::all_algorithms(
            100,
            BudgetSpec {
                max_ms: Some(5_000),
                max_evaluations: Some(50_000),
            },
        )
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: ExperimentSpec =
            serde_path_to_error::deserialize(de).map_err(|e| SpecError::Schema {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let field = |path: &str, e: String| SpecError::Invalid {
            path: path.to_string(),
            message: e,
        };
        if self.width == 0 || self.height == 0 {
            return Err(field("width", "map size must be positive".into()));
        }
        if !self.tree_algorithms.is_empty() && self.representations.is_empty() {
            return Err(field(
                "representations",
                "tree algorithms need at least one representation".into(),
            ));
        }
        if self.runs_per_config > 0 && self.init_pcts.is_empty() {
            return Err(field(
                "init_pcts",
                "at least one initial empty probability is required".into(),
            ));
        }
        for (i, &p) in self.init_pcts.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(field(
                    &format!("init_pcts[{i}]"),
                    format!("{p} is not in (0, 1)"),
                ));
            }
        }
        for (i, o) in self.objectives.iter().enumerate() {
            o.validate(self.width * self.height)
                .map_err(|e| field(&format!("objectives[{i}]"), e.to_string()))?;
        }
        for algorithm in self.configs().iter().map(|k| k.algorithm) {
            validate_params(&self.params, algorithm).map_err(|e| field("params", e.to_string()))?;
        }
        Ok(())
    }

    fn objective_for(&self, kind: ObjectiveKind) -> Objective {
        *self
            .objectives
            .iter()
            .find(|o| o.kind() == kind)
            .expect("config keys come from the objective list")
    }

    /// The compared configurations: every tree search x representation x
    /// objective, then every optimizer x objective.
    pub fn configs(&self) -> Vec<ConfigKey> {
        let mut out = Vec::new();
        for &t in &self.tree_algorithms {
            for &r in &self.representations {
                for o in &self.objectives {
                    out.push(ConfigKey {
                        algorithm: Algorithm::Tree(t),
                        representation: Some(r),
                        objective: o.kind(),
                    });
                }
            }
        }
        for &k in &self.optimizers {
            for o in &self.objectives {
                out.push(ConfigKey {
                    algorithm: Algorithm::Optimizer(k),
                    representation: None,
                    objective: o.kind(),
                });
            }
        }
        out
    }

    /// Every run of the protocol, in `run_id` order.
    pub fn runs(&self) -> Vec<RunConfig> {
        let budget = Budget::from(self.budget);
        let mut out = Vec::with_capacity(self.configs().len() * self.runs_per_config);
        for (j, key) in self.configs().into_iter().enumerate() {
            for i in 0..self.runs_per_config {
                out.push(RunConfig {
                    run_id: (j * self.runs_per_config + i) as u64,
                    algorithm: key.algorithm,
                    representation: key.representation,
                    objective: self.objective_for(key.objective),
                    width: self.width,
                    height: self.height,
                    init_empty_pct: self.init_pcts[i % self.init_pcts.len()],
                    seed: derive_seed(self.base_seed, j as u64, i as u64),
                    budget,
                    params: self.params,
                });
            }
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("config schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid config value at `{path}`: {message}")]
    Invalid { path: String, message: String },
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for run `run` of configuration `config`:
/// `splitmix64(splitmix64(splitmix64(base) ^ config) ^ run)`.
///
/// splitmix64 is a bijection on `u64`, so for a fixed base and config distinct
/// runs always get distinct seeds.
pub fn derive_seed(base: u64, config: u64, run: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ config) ^ run)
}
