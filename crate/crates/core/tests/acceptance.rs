//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria 1-6 and 12 check correctness and make the process fail. Criteria
//! 7-11 compare observed trends on the desk protocol; they are reported but
//! do not fail the build.

use std::collections::BTreeMap;
use std::time::Instant;

use mapgen::analysis::{build_report, histogram_1d, DEFAULT_BINS};
use mapgen::harness::{
    read_results, run_experiment, run_one, write_results, Algorithm, BudgetSpec, ExperimentSpec,
    RunRecord,
};
use mapgen::objective::{connectivity_fitness, empty_tiles_fitness, path_length_fitness};
use mapgen::optimizer::{
    accept_worse, acceptance_probability, evolution_strategy, genetic_algorithm, hill_climb,
    EvolutionParams, GeneticParams, GenomeInit, HillClimbParams, OptimizerKind,
};
use mapgen::oracle::{check_bfs_optimality, check_metrics_exhaustive, MetricFns};
use mapgen::tree_search::{mcts_observed, MctsParams, MctsTree, TreeAlgorithm};
use mapgen::{Budget, Grid, Objective, ObjectiveKind, ReprState, RepresentationKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fitness_oracles() -> Check {
    let n = check_metrics_exhaustive(3, 3, &MetricFns::default()).map_err(|c| c.to_string())?;
    let points = [
        (empty_tiles_fitness(50, 100, 45, 65).value, 1.0),
        (empty_tiles_fitness(9, 100, 45, 65).value, 9.0 / 45.0),
        (empty_tiles_fitness(79, 100, 45, 65).value, 21.0 / 35.0),
        (empty_tiles_fitness(45, 100, 45, 65).value, 1.0),
        (empty_tiles_fitness(65, 100, 45, 65).value, 1.0),
        (path_length_fitness(13, 26).value, 0.5),
        (path_length_fitness(30, 26).value, 1.0),
        (path_length_fitness(26, 26).value, 1.0),
        (connectivity_fitness(2).value, 0.5),
        (connectivity_fitness(1).value, 1.0),
        (connectivity_fitness(0).value, 0.0),
    ];
    for (i, (got, want)) in points.iter().enumerate() {
        ensure(got == want, || {
            format!("example {i}: got {got}, want {want}")
        })?;
    }
    let open = Grid::filled(10, 10, false).unwrap();
    ensure(
        !Objective::PathLength { goal: 26 }.is_solution(&open),
        || "open 10x10 solved path 26".into(),
    )?;
    ensure(open.longest_shortest_path() == 18, || {
        "open 10x10 path is not 18".into()
    })?;
    ensure(
        !Objective::Connectivity.is_solution(&Grid::filled(3, 3, true).unwrap()),
        || "all-wall grid counted as connected".into(),
    )?;
    Ok(format!(
        "{n} grids match both oracles; {} score points exact",
        points.len()
    ))
}

fn bfs_optimality() -> Check {
    let mut r = rng(2);
    let mut parts = Vec::new();
    for kind in RepresentationKind::ALL {
        let n = check_bfs_optimality(kind, 250, &mut r).map_err(|c| c.to_string())?;
        parts.push(format!("{} {n}", kind.as_str()));
    }
    Ok(format!("instances with exact depth: {}", parts.join(", ")))
}

fn strip_wall(records: &mut [RunRecord]) {
    for r in records {
        r.wall_ms = 0.0;
    }
}

fn determinism() -> Check {
    let mut spec = ExperimentSpec::desk();
    spec.runs_per_config = 6;
    spec.budget = BudgetSpec {
        max_ms: None,
        max_evaluations: Some(3000),
    };
    let mut serial = run_experiment(&spec, 1);
    let mut parallel = run_experiment(&spec, 8);
    strip_wall(&mut serial);
    strip_wall(&mut parallel);
    let a = write_results(&serial, Vec::new()).map_err(|e| e.to_string())?;
    let b = write_results(&parallel, Vec::new()).map_err(|e| e.to_string())?;
    ensure(a == b, || "8-way sweep differs from serial sweep".into())?;
    let mut repeats = 0;
    for cfg in spec.runs().iter().step_by(7) {
        let mut x = [run_one(cfg)];
        let mut y = [run_one(cfg)];
        strip_wall(&mut x);
        strip_wall(&mut y);
        let (x, y) = (
            write_results(&x, Vec::new()).unwrap(),
            write_results(&y, Vec::new()).unwrap(),
        );
        ensure(x == y, || format!("run {} differs on repeat", cfg.run_id))?;
        repeats += 1;
    }
    Ok(format!(
        "{} records identical at 1 and 8 workers; {repeats} repeated runs identical",
        serial.len()
    ))
}

fn monotonicity() -> Check {
    let obj = Objective::PathLength { goal: 60 };
    let init = GenomeInit {
        width: 10,
        height: 10,
        empty_pct: 0.5,
    };
    let es = EvolutionParams::default();
    let ga = GeneticParams::default();
    let es_budget = (es.mu + 200 * es.lambda) as u64;
    let ga_budget = (ga.population + 200 * (ga.population - ga.elites)) as u64;
    let mut generations = 0;
    for seed in 0..50 {
        for (name, out) in [
            (
                "es",
                evolution_strategy(
                    &obj,
                    init,
                    Budget::evaluations(es_budget),
                    &es,
                    &mut rng(seed),
                ),
            ),
            (
                "ga",
                genetic_algorithm(
                    &obj,
                    init,
                    Budget::evaluations(ga_budget),
                    &ga,
                    &mut rng(seed),
                ),
            ),
        ] {
            ensure(out.solved || out.iterations == 200, || {
                format!("{name} seed {seed}: {} generations", out.iterations)
            })?;
            ensure(out.history.windows(2).all(|w| w[0] <= w[1]), || {
                format!("{name} seed {seed}: best fitness decreased")
            })?;
            generations += out.iterations;
        }
        let mut r = rng(seed);
        let start = Grid::random(10, 10, 0.5, &mut r).unwrap();
        let hc = hill_climb(
            &obj,
            start,
            Budget::evaluations(20_000),
            &HillClimbParams::default(),
            &mut r,
        );
        ensure(hc.history.windows(2).all(|w| w[0] < w[1]), || {
            format!("hc seed {seed}: not strictly increasing")
        })?;
    }
    Ok(format!(
        "{generations} ES/GA generations and 50 HC trajectories, zero violations"
    ))
}

fn annealing_calibration() -> Check {
    let trials = 100_000;
    let mut r = rng(5);
    let mut parts = Vec::new();
    for (d, t) in [(0.1, 0.2), (0.5, 1.0), (0.02, 0.01)] {
        let p = acceptance_probability(d, t);
        let hits = (0..trials).filter(|_| accept_worse(d, t, &mut r)).count();
        let freq = hits as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        ensure((freq - p).abs() <= 3.0 * sigma, || {
            format!(
                "d={d} T={t}: frequency {freq:.5} vs exp(-d/T) {p:.5} (3 sigma {:.5})",
                3.0 * sigma
            )
        })?;
        parts.push(format!("d={d},T={t}: {freq:.4} vs {p:.4}"));
    }
    Ok(parts.join("; "))
}

fn mcts_statistics() -> Check {
    let mut iterations = 0u64;
    let mut spot_checks = 0u64;
    let mut failure: Option<String> = None;
    for seed in 0..20 {
        let kind = RepresentationKind::ALL[seed as usize % 3];
        let obj = [
            Objective::PathLength { goal: 40 },
            Objective::Connectivity,
            Objective::EmptyTiles { r1: 80, r2: 90 },
        ][seed as usize % 3];
        let mut r = rng(seed);
        let root = ReprState::initial(kind, Grid::random(8, 8, 0.3, &mut r).unwrap(), &mut r);
        let mut observe = |tree: &MctsTree| {
            iterations += 1;
            if failure.is_some() {
                return;
            }
            if let Err(e) = tree.check_invariants() {
                failure = Some(format!("seed {seed}: {e}"));
                return;
            }
            for (id, node) in tree.nodes().iter().enumerate() {
                let means: Vec<f64> = node
                    .children
                    .iter()
                    .map(|&c| &tree.nodes()[c])
                    .filter(|c| c.visits > 0)
                    .map(|c| c.mean_reward())
                    .collect();
                let spread = means.iter().copied().fold(f64::MIN, f64::max)
                    - means.iter().copied().fold(f64::MAX, f64::min);
                let want = if means.len() < 2 || spread == 0.0 {
                    0.01
                } else {
                    spread
                };
                let got = tree.exploration_constant(id);
                if (got - want).abs() > 1e-12 {
                    failure = Some(format!(
                        "seed {seed} node {id}: C = {got}, child means give {want}"
                    ));
                    return;
                }
                spot_checks += 1;
            }
        };
        mcts_observed(
            &obj,
            root,
            Budget::evaluations(4000),
            &MctsParams::default(),
            &mut r,
            &mut observe,
        );
    }
    if let Some(f) = failure {
        return Err(f);
    }
    Ok(format!(
        "{iterations} iterations over 20 runs; {spot_checks} node C values checked"
    ))
}

type Rates = BTreeMap<(Algorithm, Option<RepresentationKind>, ObjectiveKind), (usize, usize)>;

fn rates(records: &[RunRecord]) -> Rates {
    let mut out = Rates::new();
    for r in records {
        let e = out
            .entry((r.algorithm, r.representation, r.objective))
            .or_default();
        e.0 += usize::from(r.solved);
        e.1 += 1;
    }
    out
}

fn rate(rates: &Rates, a: Algorithm, rep: Option<RepresentationKind>, o: ObjectiveKind) -> f64 {
    let (s, n) = rates[&(a, rep, o)];
    100.0 * s as f64 / n as f64
}

const BFS: Algorithm = Algorithm::Tree(TreeAlgorithm::Bfs);
const DFS: Algorithm = Algorithm::Tree(TreeAlgorithm::Dfs);
const BESTFS: Algorithm = Algorithm::Tree(TreeAlgorithm::BestFirst);
const MCTS: Algorithm = Algorithm::Tree(TreeAlgorithm::Mcts);

fn es_ga_rates(rates: &Rates) -> Check {
    let es = rate(
        rates,
        Algorithm::Optimizer(OptimizerKind::Es),
        None,
        ObjectiveKind::EmptyTiles,
    );
    let ga = rate(
        rates,
        Algorithm::Optimizer(OptimizerKind::Ga),
        None,
        ObjectiveKind::EmptyTiles,
    );
    let msg = format!("empty-tiles solution rate: es {es:.0}%, ga {ga:.0}%");
    if es >= 90.0 && ga >= 90.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn dfs_vs_bfs(rates: &Rates) -> Check {
    let mut wins = 0;
    let mut parts = Vec::new();
    for rep in RepresentationKind::ALL {
        for o in ObjectiveKind::ALL {
            let (d, b) = (
                rate(rates, DFS, Some(rep), o),
                rate(rates, BFS, Some(rep), o),
            );
            wins += usize::from(d >= b);
            parts.push(format!("{}/{} {d:.0}-{b:.0}", rep.as_str(), o.as_str()));
        }
    }
    let msg = format!("dfs >= bfs in {wins}/9 ({})", parts.join(", "));
    if wins >= 6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn path_is_hardest(rates: &Rates) -> Check {
    let mean = |o: ObjectiveKind| {
        let v: Vec<f64> = rates
            .iter()
            .filter(|(k, _)| k.2 == o)
            .map(|(_, &(s, n))| 100.0 * s as f64 / n as f64)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (e, p, c) = (
        mean(ObjectiveKind::EmptyTiles),
        mean(ObjectiveKind::PathLength),
        mean(ObjectiveKind::Connectivity),
    );
    let msg = format!("mean solution rate: empty {e:.1}%, path {p:.1}%, connectivity {c:.1}%");
    if p < e && p < c {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn mcts_wide_vs_narrow(rates: &Rates) -> Check {
    let mut below = 0;
    let mut parts = Vec::new();
    for o in ObjectiveKind::ALL {
        let (w, n) = (
            rate(rates, MCTS, Some(RepresentationKind::Wide), o),
            rate(rates, MCTS, Some(RepresentationKind::Narrow), o),
        );
        below += usize::from(w < n);
        parts.push(format!("{} wide {w:.0}% narrow {n:.0}%", o.as_str()));
    }
    let msg = format!("wide below narrow for {below}/3 ({})", parts.join(", "));
    if below >= 2 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn bfs_depth_on_wide(records: &[RunRecord]) -> Check {
    let mean_depth = |a: Algorithm| {
        let d: Vec<f64> = records
            .iter()
            .filter(|r| r.algorithm == a && r.representation == Some(RepresentationKind::Wide))
            .filter_map(|r| r.max_depth)
            .map(|d| d as f64)
            .collect();
        d.iter().sum::<f64>() / d.len() as f64
    };
    let (b, d, f) = (mean_depth(BFS), mean_depth(DFS), mean_depth(BESTFS));
    let msg = format!("mean max depth on wide: bfs {b:.2}, dfs {d:.2}, bestfs {f:.2}");
    if b < d && b < f {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn expressive_pipeline(records: &[RunRecord]) -> Check {
    let csv = write_results(records, Vec::new()).map_err(|e| e.to_string())?;
    let (back, warnings) = read_results(csv.as_slice(), None)?;
    ensure(warnings.is_empty(), || {
        format!("{} rows rejected on read-back", warnings.len())
    })?;
    let report = build_report(&back, DEFAULT_BINS, true, None);
    ensure(report.summary.len() == 48, || {
        format!("{} summary rows", report.summary.len())
    })?;
    ensure(report.tables.len() == 3, || {
        format!("{} tables", report.tables.len())
    })?;
    let mut masses = Vec::new();
    for t in &report.tables {
        let contributing = back
            .iter()
            .filter(|r| r.objective == t.driving && r.solved)
            .count() as u64;
        ensure(t.total_mass() == contributing, || {
            format!(
                "{}: mass {} vs {contributing} records",
                t.driving.as_str(),
                t.total_mass()
            )
        })?;
        let hx = histogram_1d(&back, t.driving, t.x, true);
        let hy = histogram_1d(&back, t.driving, t.y, true);
        for (k, h) in &t.histograms {
            ensure(h.marginal_x() == hx[k] && h.marginal_y() == hy[k], || {
                format!("{} {}: marginal mismatch", t.driving.as_str(), k.label())
            })?;
        }
        masses.push(format!("{} {}", t.driving.as_str(), t.total_mass()));
    }
    Ok(format!(
        "48 summary rows; table masses {}; marginals consistent",
        masses.join(", ")
    ))
}

fn main() {
    let mut hard_failures = 0;
    let mut report = |n: u32, name: &str, hard: bool, result: Check| {
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        println!("criterion {n:>2} {tag}  {name}: {detail}");
        if result.is_err() && hard {
            hard_failures += 1;
        }
    };
    report(1, "fitness oracles", true, fitness_oracles());
    report(2, "bfs optimality", true, bfs_optimality());
    report(3, "determinism", true, determinism());
    report(4, "monotonicity", true, monotonicity());
    report(
        5,
        "annealing acceptance calibration",
        true,
        annealing_calibration(),
    );
    report(6, "mcts statistics", true, mcts_statistics());

    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let start = Instant::now();
    let records = run_experiment(&ExperimentSpec::desk(), jobs);
    println!(
        "desk sweep: {} runs in {:.1} s on {jobs} worker(s)",
        records.len(),
        start.elapsed().as_secs_f64()
    );
    let r = rates(&records);
    report(7, "es and ga on empty tiles", false, es_ga_rates(&r));
    report(8, "dfs vs bfs", false, dfs_vs_bfs(&r));
    report(9, "path length hardest", false, path_is_hardest(&r));
    report(10, "mcts wide vs narrow", false, mcts_wide_vs_narrow(&r));
    report(11, "bfs depth on wide", false, bfs_depth_on_wide(&records));
    report(
        12,
        "expressive-range pipeline",
        true,
        expressive_pipeline(&records),
    );

    if hard_failures > 0 {
        eprintln!("{hard_failures} correctness criteria failed");
        std::process::exit(1);
    }
}
