//! Aggregation of results files: per-configuration summaries and
//! expressive-range histograms, with CSV and SVG output.

mod svg;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::harness::{ConfigKey, RunRecord};
use crate::objective::ObjectiveKind;

pub use svg::{cell_intensity, render_expressive_svg, render_summary_svg};

pub const DEFAULT_BINS: usize = 20;

fn key_of(r: &RunRecord) -> ConfigKey {
    ConfigKey {
        algorithm: r.algorithm,
        representation: r.representation,
        objective: r.objective,
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub key: ConfigKey,
    pub runs: usize,
    pub solved: usize,
    pub solution_pct: f64,
    /// Over all runs, solved or not.
    pub mean_wall_ms: f64,
    pub median_wall_ms: f64,
    pub mean_evaluations: f64,
    /// Tree searches only.
    pub mean_max_depth: Option<f64>,
    /// Tree searches only; unsolved runs count as one past their deepest node.
    pub mean_solution_depth: Option<f64>,
    pub mean_final_score: Option<f64>,
}

/// One row per configuration that has records, in configuration order.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<ConfigKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(key_of(r)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(key, rs)| {
            let runs = rs.len();
            let solved = rs.iter().filter(|r| r.solved).count();
            let walls: Vec<f64> = rs.iter().map(|r| r.wall_ms).collect();
            SummaryRow {
                key,
                runs,
                solved,
                solution_pct: 100.0 * solved as f64 / runs as f64,
                mean_wall_ms: mean(walls.iter().copied()).unwrap_or(0.0),
                median_wall_ms: median(walls).unwrap_or(0.0),
                mean_evaluations: mean(rs.iter().map(|r| r.evaluations as f64)).unwrap_or(0.0),
                mean_max_depth: mean(rs.iter().filter_map(|r| r.max_depth).map(|d| d as f64)),
                mean_solution_depth: mean(
                    rs.iter()
                        .filter_map(|r| r.depth_with_fallback())
                        .map(|d| d as f64),
                ),
                mean_final_score: mean(rs.iter().filter_map(|r| r.final_score)),
            }
        })
        .collect()
}

pub const SUMMARY_HEADER: &str =
    "config,algorithm,representation,objective,runs,solved,solution_pct,\
mean_wall_ms,median_wall_ms,mean_evaluations,mean_max_depth,mean_solution_depth,mean_final_score";

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{},{},{}",
            r.key.label(),
            r.key.algorithm,
            r.key.representation.map(|k| k.as_str()).unwrap_or(""),
            r.key.objective.as_str(),
            r.runs,
            r.solved,
            r.solution_pct,
            r.mean_wall_ms,
            r.median_wall_ms,
            r.mean_evaluations,
            opt(r.mean_max_depth),
            opt(r.mean_solution_depth),
            opt(r.mean_final_score),
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    EmptyCount,
    PathLength,
    RegionCount,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::EmptyCount => "empty_count",
            Metric::PathLength => "path_length",
            Metric::RegionCount => "region_count",
        }
    }

    pub fn of(self, r: &RunRecord) -> Option<usize> {
        match self {
            Metric::EmptyCount => r.empty_count,
            Metric::PathLength => r.path_length,
            Metric::RegionCount => r.region_count,
        }
    }

    /// The two metrics not driven by `objective`, as (x, y).
    pub fn others(objective: ObjectiveKind) -> (Metric, Metric) {
        match objective {
            ObjectiveKind::EmptyTiles => (Metric::PathLength, Metric::RegionCount),
            ObjectiveKind::PathLength => (Metric::EmptyCount, Metric::RegionCount),
            ObjectiveKind::Connectivity => (Metric::EmptyCount, Metric::PathLength),
        }
    }
}

/// Fixed bin edges for one metric on maps of `tiles` tiles.
///
/// Empty count spans `[0, t]` and path length `[0, 2t]`, each cut into
/// `bins` equal-width bins. Region count uses unit-width bins `0, 1, ...`
/// up to `min(bins, t/2 + 1)` bins, the last one also taking every larger
/// count. Out-of-range values clamp to the last bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Axis {
    pub metric: Metric,
    pub bins: usize,
    /// Upper end of the value range.
    pub max: usize,
}

impl Axis {
    pub fn new(metric: Metric, bins: usize, tiles: usize) -> Self {
        let bins = bins.max(1);
        let tiles = tiles.max(1);
        match metric {
            Metric::EmptyCount => Axis {
                metric,
                bins,
                max: tiles,
            },
            Metric::PathLength => Axis {
                metric,
                bins,
                max: 2 * tiles,
            },
            Metric::RegionCount => Axis {
                metric,
                bins: bins.min(tiles / 2 + 1),
                max: tiles / 2,
            },
        }
    }

    pub fn bin(&self, value: usize) -> usize {
        let b = match self.metric {
            Metric::RegionCount => value,
            _ => value * self.bins / self.max,
        };
        b.min(self.bins - 1)
    }

    /// Lower edge of bin `b`.
    pub fn lower_edge(&self, b: usize) -> f64 {
        match self.metric {
            Metric::RegionCount => b as f64,
            _ => (b * self.max) as f64 / self.bins as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram2d {
    pub x_bins: usize,
    pub y_bins: usize,
    /// Row-major by x: `counts[x * y_bins + y]`.
    pub counts: Vec<u64>,
    pub samples: u64,
}

impl Histogram2d {
    fn new(x_bins: usize, y_bins: usize) -> Self {
        Self {
            x_bins,
            y_bins,
            counts: vec![0; x_bins * y_bins],
            samples: 0,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.counts[x * self.y_bins + y]
    }

    pub fn mass(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Sum over y for each x bin.
    pub fn marginal_x(&self) -> Vec<u64> {
        (0..self.x_bins)
            .map(|x| (0..self.y_bins).map(|y| self.get(x, y)).sum())
            .collect()
    }

    /// Sum over x for each y bin.
    pub fn marginal_y(&self) -> Vec<u64> {
        (0..self.y_bins)
            .map(|y| (0..self.x_bins).map(|x| self.get(x, y)).sum())
            .collect()
    }
}

/// Per-configuration histograms of the two metrics an objective does not
/// drive, over the final maps of runs with that objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressiveRangeTable {
    pub driving: ObjectiveKind,
    pub x: Axis,
    pub y: Axis,
    pub solved_only: bool,
    pub histograms: BTreeMap<ConfigKey, Histogram2d>,
}

impl ExpressiveRangeTable {
    pub fn total_mass(&self) -> u64 {
        self.histograms.values().map(Histogram2d::mass).sum()
    }

    /// Long-form CSV of the non-empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config,bin_x,bin_y,count\n");
        for (key, h) in &self.histograms {
            for x in 0..h.x_bins {
                for y in 0..h.y_bins {
                    let c = h.get(x, y);
                    if c > 0 {
                        let _ = writeln!(out, "{},{x},{y},{c}", key.label());
                    }
                }
            }
        }
        out
    }
}

fn contributes(r: &RunRecord, driving: ObjectiveKind, solved_only: bool) -> bool {
    r.objective == driving && r.map.is_some() && (r.solved || !solved_only)
}

pub fn expressive_range(
    records: &[RunRecord],
    driving: ObjectiveKind,
    bins: usize,
    solved_only: bool,
    tiles: usize,
) -> ExpressiveRangeTable {
    let (mx, my) = Metric::others(driving);
    let x = Axis::new(mx, bins, tiles);
    let y = Axis::new(my, bins, tiles);
    let mut histograms = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| contributes(r, driving, solved_only))
    {
        let (Some(vx), Some(vy)) = (mx.of(r), my.of(r)) else {
            continue;
        };
        let h = histograms
            .entry(key_of(r))
            .or_insert_with(|| Histogram2d::new(x.bins, y.bins));
        h.counts[x.bin(vx) * y.bins + y.bin(vy)] += 1;
        h.samples += 1;
    }
    ExpressiveRangeTable {
        driving,
        x,
        y,
        solved_only,
        histograms,
    }
}

/// Per-configuration 1D histogram of one metric, with the same filtering as
/// [`expressive_range`].
pub fn histogram_1d(
    records: &[RunRecord],
    driving: ObjectiveKind,
    axis: Axis,
    solved_only: bool,
) -> BTreeMap<ConfigKey, Vec<u64>> {
    let mut out: BTreeMap<ConfigKey, Vec<u64>> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| contributes(r, driving, solved_only))
    {
        if let Some(v) = axis.metric.of(r) {
            out.entry(key_of(r)).or_insert_with(|| vec![0; axis.bins])[axis.bin(v)] += 1;
        }
    }
    out
}

/// Everything the analysis step writes, as file name and contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub summary: Vec<SummaryRow>,
    pub tables: Vec<ExpressiveRangeTable>,
    pub files: Vec<(String, String)>,
}

/// Builds `summary.csv`, `expressive_<objective>.csv` for each objective and
/// an `.svg` next to each. `tiles` defaults to the size of the first map.
pub fn build_report(
    records: &[RunRecord],
    bins: usize,
    solved_only: bool,
    tiles: Option<usize>,
) -> Report {
    let tiles = tiles
        .or_else(|| records.iter().find_map(|r| r.map.as_ref().map(|m| m.len())))
        .unwrap_or(100);
    let summary = summarize(records);
    let mut files = vec![
        ("summary.csv".to_string(), summary_csv(&summary)),
        ("summary.svg".to_string(), render_summary_svg(&summary)),
    ];
    let tables: Vec<ExpressiveRangeTable> = ObjectiveKind::ALL
        .iter()
        .map(|&k| expressive_range(records, k, bins, solved_only, tiles))
        .collect();
    for t in &tables {
        let stem = format!("expressive_{}", t.driving.as_str());
        files.push((format!("{stem}.csv"), t.to_csv()));
        files.push((format!("{stem}.svg"), render_expressive_svg(t)));
    }
    Report {
        summary,
        tables,
        files,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::harness::Algorithm;
    use crate::optimizer::OptimizerKind;
    use crate::representation::RepresentationKind;
    use crate::tree_search::TreeAlgorithm;

    fn record(
        algorithm: Algorithm,
        objective: ObjectiveKind,
        solved: bool,
        map: Grid,
    ) -> RunRecord {
        let m = map.metrics();
        RunRecord {
            run_id: 0,
            algorithm,
            representation: algorithm
                .is_tree_search()
                .then_some(RepresentationKind::Wide),
            objective,
            init_pct: 0.5,
            seed: 1,
            solved,
            wall_ms: 1.0,
            evaluations: 10,
            iterations: 3,
            max_depth: algorithm.is_tree_search().then_some(12),
            solution_depth: (solved && algorithm.is_tree_search()).then_some(4),
            final_score: Some(if solved { 1.0 } else { 0.5 }),
            empty_count: Some(m.empty_count),
            path_length: Some(m.longest_shortest_path),
            region_count: Some(m.region_count),
            map: Some(map),
            error: None,
        }
    }

    const BFS: Algorithm = Algorithm::Tree(TreeAlgorithm::Bfs);
    const GA: Algorithm = Algorithm::Optimizer(OptimizerKind::Ga);

    #[test]
    fn solution_rate_and_depth_fallback() {
        let g = Grid::filled(3, 3, false).unwrap();
        let mut rs: Vec<RunRecord> = (0..10)
            .map(|i| record(BFS, ObjectiveKind::EmptyTiles, i < 7, g.clone()))
            .collect();
        rs[0].wall_ms = 100.0;
        let rows = summarize(&rs);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].solution_pct, 70.0);
        assert_eq!(rows[0].median_wall_ms, 1.0);
        assert!((rows[0].mean_wall_ms - 10.9).abs() < 1e-12);
        assert_eq!(rows[0].mean_max_depth, Some(12.0));
        // 7 solved at depth 4, 3 unsolved at 12 + 1.
        assert!(
            (rows[0].mean_solution_depth.unwrap() - (7.0 * 4.0 + 3.0 * 13.0) / 10.0).abs() < 1e-12
        );

        let ga = summarize(&[record(GA, ObjectiveKind::EmptyTiles, true, g)]);
        assert_eq!(ga[0].mean_max_depth, None);
        assert_eq!(ga[0].mean_solution_depth, None);
        assert!(summarize(&[]).is_empty());
    }

    #[test]
    fn single_record_single_cell() {
        let g = Grid::from_text("0101\n0000\n1111\n0010\n").unwrap();
        let rs = [record(GA, ObjectiveKind::PathLength, true, g)];
        for bins in [1, 3, 20] {
            let t = expressive_range(&rs, ObjectiveKind::PathLength, bins, true, 16);
            assert_eq!(t.total_mass(), 1);
            assert_eq!(
                t.histograms
                    .values()
                    .next()
                    .unwrap()
                    .counts
                    .iter()
                    .filter(|&&c| c > 0)
                    .count(),
                1
            );
        }
    }

    #[test]
    fn all_empty_maps_land_on_one_cell() {
        let g = Grid::filled(10, 10, false).unwrap();
        let rs: Vec<RunRecord> = (0..5)
            .map(|_| record(GA, ObjectiveKind::EmptyTiles, true, g.clone()))
            .collect();
        let t = expressive_range(&rs, ObjectiveKind::EmptyTiles, 20, true, 100);
        let h = t.histograms.values().next().unwrap();
        assert_eq!(h.get(t.x.bin(18), t.y.bin(1)), 5);
        assert_eq!(t.x.bin(18), 1);
        assert_eq!(t.y.bin(1), 1);
    }

    #[test]
    fn solved_only_filters() {
        let g = Grid::filled(3, 3, false).unwrap();
        let rs = [
            record(GA, ObjectiveKind::Connectivity, true, g.clone()),
            record(GA, ObjectiveKind::Connectivity, false, g.clone()),
            record(GA, ObjectiveKind::EmptyTiles, true, g),
        ];
        assert_eq!(
            expressive_range(&rs, ObjectiveKind::Connectivity, 20, true, 9).total_mass(),
            1
        );
        assert_eq!(
            expressive_range(&rs, ObjectiveKind::Connectivity, 20, false, 9).total_mass(),
            2
        );
    }

    #[test]
    fn bin_edges() {
        let e = Axis::new(Metric::EmptyCount, 20, 100);
        assert_eq!(
            (e.bin(0), e.bin(4), e.bin(5), e.bin(99), e.bin(100)),
            (0, 0, 1, 19, 19)
        );
        let p = Axis::new(Metric::PathLength, 20, 100);
        assert_eq!(
            (p.bin(9), p.bin(10), p.bin(200), p.bin(500)),
            (0, 1, 19, 19)
        );
        let r = Axis::new(Metric::RegionCount, 20, 100);
        assert_eq!((r.bins, r.bin(3), r.bin(19), r.bin(50)), (20, 3, 19, 19));
        let small = Axis::new(Metric::RegionCount, 20, 9);
        assert_eq!((small.bins, small.bin(4), small.bin(5)), (5, 4, 4));
    }

    #[test]
    fn marginals_match_1d() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut rs = Vec::new();
        for s in 0..60u64 {
            let g = Grid::random(5, 5, 0.6, &mut rng).unwrap();
            let algo = if s % 2 == 0 { GA } else { BFS };
            rs.push(record(algo, ObjectiveKind::Connectivity, s % 3 != 0, g));
        }
        let t = expressive_range(&rs, ObjectiveKind::Connectivity, 7, true, 25);
        let hx = histogram_1d(&rs, ObjectiveKind::Connectivity, t.x, true);
        let hy = histogram_1d(&rs, ObjectiveKind::Connectivity, t.y, true);
        for (k, h) in &t.histograms {
            assert_eq!(h.marginal_x(), hx[k]);
            assert_eq!(h.marginal_y(), hy[k]);
            assert_eq!(h.mass(), h.samples);
        }
        assert_eq!(
            t.total_mass(),
            rs.iter().filter(|r| r.solved).count() as u64
        );
    }

    #[test]
    fn report_is_deterministic() {
        let g = Grid::filled(3, 3, false).unwrap();
        let rs = [record(BFS, ObjectiveKind::PathLength, true, g)];
        let a = build_report(&rs, 20, true, None);
        let b = build_report(&rs, 20, true, None);
        assert_eq!(a, b);
        let names: Vec<&str> = a.files.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(
            names,
            [
                "summary.csv",
                "summary.svg",
                "expressive_empty.csv",
                "expressive_empty.svg",
                "expressive_path.csv",
                "expressive_path.svg",
                "expressive_connectivity.csv",
                "expressive_connectivity.svg"
            ]
        );
        let empty = build_report(&[], 20, true, None);
        assert_eq!(empty.files[0].1, format!("{SUMMARY_HEADER}\n"));
        assert_eq!(empty.files[2].1, "config,bin_x,bin_y,count\n");
    }
}
