use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mapgen::analysis::{build_report, DEFAULT_BINS};
use mapgen::harness::{
    self, read_results, run_experiment, run_one, Algorithm, AlgorithmParams, ExperimentSpec,
    ResultsWriter, RunConfig,
};
use mapgen::objective::{DEFAULT_GOAL, DEFAULT_R1, DEFAULT_R2};
use mapgen::oracle::{self, MetricFns};
use mapgen::{Budget, Grid, Objective, ObjectiveKind, RepresentationKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Generate binary grid maps with tree search or optimization, run
/// experiment sweeps and analyze their results.
#[derive(Parser, Debug)]
#[command(name = "mapgen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one generator and print the map and a JSON outcome line.
    /// Exits 0 if the map is a solution and 2 if not.
    Generate(GenerateArgs),
    /// Run every configuration of an experiment config file.
    Sweep(SweepArgs),
    /// Summarize a results file into CSV tables and SVG plots.
    Analyze(AnalyzeArgs),
    /// Check the grid metrics and BFS against brute-force oracles.
    OracleCheck(OracleArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// bfs | dfs | bestfs | mcts | hc | sa | es | ga
    #[arg(long)]
    algorithm: Algorithm,
    /// narrow | turtle | wide (tree searches only)
    #[arg(long)]
    representation: Option<RepresentationKind>,
    /// empty | path | connectivity
    #[arg(long)]
    objective: ObjectiveKind,
    #[arg(long, default_value_t = 10)]
    width: usize,
    #[arg(long, default_value_t = 10)]
    height: usize,
    /// Probability that a starting tile is empty.
    #[arg(long, default_value_t = 0.25)]
    init_pct: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock limit in milliseconds.
    #[arg(long, default_value_t = 60_000)]
    max_ms: u64,
    /// Evaluation limit (unlimited if omitted).
    #[arg(long)]
    max_evals: Option<u64>,

    /// Lower end of the empty-tile range.
    #[arg(long, default_value_t = DEFAULT_R1, help_heading = "Objective")]
    r1: usize,
    /// Upper end of the empty-tile range.
    #[arg(long, default_value_t = DEFAULT_R2, help_heading = "Objective")]
    r2: usize,
    /// Target longest shortest path.
    #[arg(long, default_value_t = DEFAULT_GOAL, help_heading = "Objective")]
    goal: usize,

    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args, Debug)]
#[command(next_help_heading = "Hyperparameters")]
struct HyperArgs {
    #[arg(long)]
    rollout_depth: Option<usize>,
    #[arg(long)]
    epsilon_c: Option<f64>,
    /// Hill climbing restarts from a fresh map with this empty probability
    /// when stuck.
    #[arg(long)]
    restart_empty_pct: Option<f64>,
    #[arg(long)]
    initial_temperature: Option<f64>,
    #[arg(long)]
    cooling: Option<f64>,
    #[arg(long)]
    mu: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    rho: Option<usize>,
    #[arg(long)]
    es_mutation_rate: Option<f64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    #[arg(long)]
    ga_mutation_rate: Option<f64>,
    #[arg(long)]
    elites: Option<usize>,
}

impl HyperArgs {
    fn params(&self) -> AlgorithmParams {
        let mut p = AlgorithmParams::default();
        macro_rules! set {
            ($($flag:ident => $($field:ident).+;)*) => {$(
                if let Some(v) = self.$flag { p.$($field).+ = v; }
            )*};
        }
        set! {
            rollout_depth => mcts.rollout_depth;
            epsilon_c => mcts.epsilon_c;
            initial_temperature => sa.initial_temperature;
            cooling => sa.cooling;
            mu => es.mu;
            lambda => es.lambda;
            es_mutation_rate => es.mutation_rate;
            population => ga.population;
            crossover_rate => ga.crossover_rate;
            ga_mutation_rate => ga.mutation_rate;
            elites => ga.elites;
        }
        p.hc.restart_empty_pct = self.restart_empty_pct;
        p.es.rho = self.rho;
        p
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Results CSV to write. The manifest goes next to it.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, env = harness::JOBS_ENV, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Results CSV.
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Include unsolved runs in the expressive-range tables.
    #[arg(long)]
    all_maps: bool,
    /// Map width, for non-square maps.
    #[arg(long, requires = "height")]
    width: Option<usize>,
    #[arg(long, requires = "width")]
    height: Option<usize>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Random instances per representation for the BFS depth check.
    #[arg(long, default_value_t = 200)]
    sample: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the region counter with a broken one.
    #[arg(long, hide = true)]
    corrupt_regions: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Sweep(a) => sweep(a).map(|()| ExitCode::SUCCESS),
        Command::Analyze(a) => analyze(a).map(|()| ExitCode::SUCCESS),
        Command::OracleCheck(a) => oracle_check(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}

fn generate(a: GenerateArgs) -> Result<ExitCode> {
    let objective = match a.objective {
        ObjectiveKind::EmptyTiles => Objective::EmptyTiles { r1: a.r1, r2: a.r2 },
        ObjectiveKind::PathLength => Objective::PathLength { goal: a.goal },
        ObjectiveKind::Connectivity => Objective::Connectivity,
    };
    let cfg = RunConfig {
        run_id: 0,
        algorithm: a.algorithm,
        representation: a.representation,
        objective,
        width: a.width,
        height: a.height,
        init_empty_pct: a.init_pct,
        seed: a.seed,
        budget: Budget {
            max_ms: a.max_ms,
            max_evaluations: a.max_evals.unwrap_or(u64::MAX),
        },
        params: a.hyper.params(),
    };
    cfg.validate()?;
    let rec = run_one(&cfg);
    if let Some(e) = &rec.error {
        bail!("generation failed: {e}");
    }
    let map = rec.map.as_ref().expect("successful runs carry a map");
    print!("{}", map.to_text());
    let outcome = json!({
        "algorithm": rec.algorithm.as_str(),
        "representation": rec.representation.map(|r| r.as_str()),
        "objective": rec.objective.as_str(),
        "seed": rec.seed,
        "solved": rec.solved,
        "final_score": rec.final_score,
        "evaluations": rec.evaluations,
        "iterations": rec.iterations,
        "max_depth": rec.max_depth,
        "solution_depth": rec.solution_depth,
        "empty_count": rec.empty_count,
        "path_length": rec.path_length,
        "region_count": rec.region_count,
        "wall_ms": (rec.wall_ms * 1e3).round() / 1e3,
    });
    println!("{outcome}");
    Ok(if rec.solved {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config)
        .with_context(|| format!("cannot read {}", a.config.display()))?;
    let spec =
        ExperimentSpec::from_json(&text).with_context(|| format!("in {}", a.config.display()))?;
    let jobs = a.jobs.max(1);
    let configs = spec.configs().len();
    log::info!(
        "running {} configurations x {} runs on {jobs} worker(s)",
        configs,
        spec.runs_per_config
    );
    let records = run_experiment(&spec, jobs);
    let file =
        fs::File::create(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let mut w = ResultsWriter::new(std::io::BufWriter::new(file))?;
    for r in &records {
        w.write(r)?;
    }
    w.finish()?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "base_seed": spec.base_seed,
        "configurations": configs,
        "runs": records.len(),
        "failed_runs": failed,
        "jobs": jobs,
        "results": a.out.display().to_string(),
        "config": spec,
    });
    let mpath = manifest_path(&a.out);
    fs::write(&mpath, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("cannot write {}", mpath.display()))?;
    let solved = records.iter().filter(|r| r.solved).count();
    log::info!(
        "{} runs, {solved} solved, {failed} failed; results in {}",
        records.len(),
        a.out.display()
    );
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let file =
        fs::File::open(&a.input).with_context(|| format!("cannot open {}", a.input.display()))?;
    let dims = a.width.zip(a.height);
    let (records, warnings) =
        read_results(std::io::BufReader::new(file), dims).map_err(anyhow::Error::msg)?;
    for w in &warnings {
        log::warn!("{}: skipped {w}", a.input.display());
    }
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let report = build_report(&records, a.bins, !a.all_maps, dims.map(|(w, h)| w * h));
    for (name, contents) in &report.files {
        let path = a.out.join(name);
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    }
    log::info!(
        "{} records read, {} rows skipped, {} configurations summarized",
        records.len(),
        warnings.len(),
        report.summary.len()
    );
    Ok(())
}

fn oracle_check(a: OracleArgs) -> Result<ExitCode> {
    let broken = |g: &Grid| g.count_regions() + usize::from(g.count_regions() == 2);
    let fns = if a.corrupt_regions {
        MetricFns {
            regions: &broken,
            path: &Grid::longest_shortest_path,
        }
    } else {
        MetricFns::default()
    };
    let report = |r: Result<usize, oracle::Counterexample>, what: &str| match r {
        Ok(n) => {
            println!("ok: {what} ({n} cases)");
            true
        }
        Err(c) => {
            println!("FAILED: {c}");
            false
        }
    };
    if !report(
        oracle::check_metrics_exhaustive(3, 3, &fns),
        "metrics on every 3x3 grid",
    ) {
        return Ok(ExitCode::from(1));
    }
    if a.sample > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        for kind in RepresentationKind::ALL {
            let r = oracle::check_bfs_optimality(kind, a.sample, &mut rng);
            if !report(r, &format!("bfs depth, {}", kind.as_str())) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
