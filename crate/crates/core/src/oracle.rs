//! Slow, independent reference implementations used to check the fast code:
//! union-find region counts, Floyd-Warshall path lengths, and exhaustive
//! minimal solution depths for each representation.

use std::fmt;

use rand::Rng;

use crate::budget::Budget;
use crate::grid::Grid;
use crate::objective::Objective;
use crate::representation::{ReprState, RepresentationKind};
use crate::tree_search::bfs;

fn neighbours(g: &Grid, i: usize) -> impl Iterator<Item = usize> + '_ {
    let (x, y) = g.coords(i);
    let (w, h) = (g.width(), g.height());
    [
        (x > 0).then(|| i - 1),
        (x + 1 < w).then(|| i + 1),
        (y > 0).then(|| i - w),
        (y + 1 < h).then(|| i + w),
    ]
    .into_iter()
    .flatten()
}

/// Connected empty regions (4-neighbourhood) by union-find.
pub fn union_find_regions(g: &Grid) -> usize {
    let n = g.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        if g.is_wall(i) {
            continue;
        }
        for j in neighbours(g, i).filter(|&j| j > i && !g.is_wall(j)) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a] = b;
        }
    }
    (0..n)
        .filter(|&i| !g.is_wall(i) && find(&mut parent, i) == i)
        .count()
}

/// Largest finite shortest-path distance between two empty tiles, by
/// Floyd-Warshall over the empty tiles.
pub fn floyd_warshall_longest(g: &Grid) -> usize {
    const INF: usize = usize::MAX / 4;
    let n = g.len();
    let mut d = vec![INF; n * n];
    for i in (0..n).filter(|&i| !g.is_wall(i)) {
        d[i * n + i] = 0;
        for j in neighbours(g, i).filter(|&j| !g.is_wall(j)) {
            d[i * n + j] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == INF {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    d.into_iter().filter(|&v| v < INF).max().unwrap_or(0)
}

/// Every grid of the given size, in binary counting order.
pub fn all_grids(width: usize, height: usize) -> impl Iterator<Item = Grid> {
    let t = width * height;
    assert!(t <= 20, "too many grids to enumerate");
    (0u32..1 << t).map(move |bits| {
        let tiles: Vec<bool> = (0..t).map(|i| bits >> i & 1 == 1).collect();
        Grid::from_tiles(width, height, &tiles).expect("positive size")
    })
}

/// A failed oracle comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub check: String,
    pub grid: Grid,
    pub expected: Option<usize>,
    pub actual: Option<usize>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: expected {:?}, got {:?} on grid",
            self.check, self.expected, self.actual
        )?;
        write!(f, "{}", self.grid.to_text())
    }
}

/// The metric functions under test; swap one out to confirm the checks bite.
pub struct MetricFns<'a> {
    pub regions: &'a dyn Fn(&Grid) -> usize,
    pub path: &'a dyn Fn(&Grid) -> usize,
}

impl Default for MetricFns<'static> {
    fn default() -> Self {
        MetricFns {
            regions: &Grid::count_regions,
            path: &Grid::longest_shortest_path,
        }
    }
}

/// Compares region counts and path lengths against the oracles on every
/// grid of the given size. Returns the number of grids checked.
pub fn check_metrics_exhaustive(
    width: usize,
    height: usize,
    fns: &MetricFns<'_>,
) -> Result<usize, Counterexample> {
    let mut checked = 0;
    for g in all_grids(width, height) {
        let (want_r, got_r) = (union_find_regions(&g), (fns.regions)(&g));
        if want_r != got_r {
            return Err(Counterexample {
                check: "region count".into(),
                grid: g,
                expected: Some(want_r),
                actual: Some(got_r),
            });
        }
        let (want_p, got_p) = (floyd_warshall_longest(&g), (fns.path)(&g));
        if want_p != got_p {
            return Err(Counterexample {
                check: "longest shortest path".into(),
                grid: g,
                expected: Some(want_p),
                actual: Some(got_p),
            });
        }
        checked += 1;
    }
    Ok(checked)
}

/// Fewest actions from `root` to any solution, found by enumerating every
/// target grid rather than searching. `None` if no grid is a solution.
///
/// Wide: the Hamming distance. Narrow: one past the latest position in the
/// tile order that has to change. Turtle: the number of tiles to change plus
/// the shortest walk from the start visiting them all.
pub fn min_solution_depth(root: &ReprState, objective: &Objective) -> Option<usize> {
    let g0 = root.grid();
    all_grids(g0.width(), g0.height())
        .filter(|g| objective.is_solution(g))
        .filter_map(|g| {
            let diff: Vec<usize> = (0..g.len())
                .filter(|&i| g.is_wall(i) != g0.is_wall(i))
                .collect();
            cost_to_reach(root, &diff)
        })
        .min()
}

fn cost_to_reach(root: &ReprState, diff: &[usize]) -> Option<usize> {
    if diff.is_empty() {
        return Some(0);
    }
    match root {
        ReprState::Wide(_) => Some(diff.len()),
        ReprState::Narrow(s) => {
            let mut pos = vec![usize::MAX; s.order.len()];
            for (p, &tile) in s.order.iter().enumerate() {
                pos[tile] = p;
            }
            let last = diff.iter().map(|&i| pos[i]).max()?;
            (last >= s.cursor).then_some(last + 1 - s.cursor)
        }
        ReprState::Turtle(s) => {
            let g = &s.grid;
            let pts: Vec<(usize, usize)> = diff.iter().map(|&i| g.coords(i)).collect();
            Some(diff.len() + shortest_visiting_walk(s.pos, &pts))
        }
    }
}

fn manhattan(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

/// Held-Karp: shortest open walk from `start` through every point.
fn shortest_visiting_walk(start: (usize, usize), pts: &[(usize, usize)]) -> usize {
    let k = pts.len();
    let full = (1usize << k) - 1;
    let mut best = vec![usize::MAX; (1 << k) * k];
    for j in 0..k {
        best[(1 << j) * k + j] = manhattan(start, pts[j]);
    }
    for mask in 1..=full {
        for j in (0..k).filter(|&j| mask >> j & 1 == 1) {
            let here = best[mask * k + j];
            if here == usize::MAX {
                continue;
            }
            for n in (0..k).filter(|&n| mask >> n & 1 == 0) {
                let slot = &mut best[(mask | 1 << n) * k + n];
                *slot = (*slot).min(here + manhattan(pts[j], pts[n]));
            }
        }
    }
    (0..k).map(|j| best[full * k + j]).min().unwrap_or(0)
}

/// A random objective whose parameters make sense for `tiles` tiles.
pub fn random_objective<R: Rng + ?Sized>(tiles: usize, rng: &mut R) -> Objective {
    match rng.random_range(0..3) {
        0 => {
            let r1 = rng.random_range(0..=tiles);
            let r2 = rng.random_range(r1..=tiles);
            Objective::EmptyTiles { r1, r2 }
        }
        1 => Objective::PathLength {
            goal: rng.random_range(1..=tiles),
        },
        _ => Objective::Connectivity,
    }
}

/// Deepest oracle depth accepted as a "shallow" sampled instance.
pub const SHALLOW_DEPTH: usize = 6;

/// Draws `samples` random 2x2 / 3x3 instances for `kind` whose minimal
/// solution depth is at most [`SHALLOW_DEPTH`], and checks that BFS finds a
/// solution at exactly that depth.
pub fn check_bfs_optimality<R: Rng + ?Sized>(
    kind: RepresentationKind,
    samples: usize,
    rng: &mut R,
) -> Result<usize, Counterexample> {
    let mut done = 0;
    while done < samples {
        let side = rng.random_range(2..=3);
        let g = Grid::random(side, side, rng.random_range(0.2..0.8), rng).expect("positive size");
        let objective = random_objective(side * side, rng);
        let root = ReprState::initial(kind, g, rng);
        let Some(want) = min_solution_depth(&root, &objective) else {
            continue;
        };
        if want > SHALLOW_DEPTH {
            continue;
        }
        let out = bfs(&objective, root.clone(), Budget::UNLIMITED);
        if out.solution_depth != Some(want) {
            return Err(Counterexample {
                check: format!("bfs depth ({}, {objective:?})", kind.as_str()),
                grid: root.grid().clone(),
                expected: Some(want),
                actual: out.solution_depth,
            });
        }
        done += 1;
    }
    Ok(done)
}
