use mapgen::oracle::{
    all_grids, check_metrics_exhaustive, floyd_warshall_longest, union_find_regions, MetricFns,
};
use mapgen::{Grid, Objective};
use proptest::prelude::*;

#[test]
fn every_3x3_grid_matches_oracles() {
    assert_eq!(
        check_metrics_exhaustive(3, 3, &MetricFns::default()),
        Ok(512)
    );
}

#[test]
fn every_small_grid_matches_oracles() {
    for (w, h) in [(1, 1), (1, 5), (2, 3), (4, 2), (3, 4)] {
        let n = check_metrics_exhaustive(w, h, &MetricFns::default()).unwrap();
        assert_eq!(n, 1 << (w * h));
    }
}

#[test]
fn multiword_path_agrees_on_every_3x3_grid() {
    for g in all_grids(3, 3) {
        assert_eq!(g.metrics(), g.metrics_multiword(), "{}", g.to_text());
    }
}

fn grid_strategy(max_side: usize) -> impl Strategy<Value = Grid> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<bool>(), w * h)
            .prop_map(move |t| Grid::from_tiles(w, h, &t).unwrap())
    })
}

fn transform(g: &Grid, k: usize) -> Grid {
    let (w, h) = (g.width(), g.height());
    let swap = k & 4 != 0;
    let (nw, nh) = if swap { (h, w) } else { (w, h) };
    let mut tiles = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let (mut a, mut b) = if swap { (y, x) } else { (x, y) };
            if k & 1 != 0 {
                a = nw - 1 - a;
            }
            if k & 2 != 0 {
                b = nh - 1 - b;
            }
            tiles[b * nw + a] = g.is_wall(g.index(x, y));
        }
    }
    Grid::from_tiles(nw, nh, &tiles).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metrics_invariant_under_symmetries(g in grid_strategy(12)) {
        let m = g.metrics();
        for k in 0..8 {
            prop_assert_eq!(transform(&g, k).metrics(), m);
        }
    }

    #[test]
    fn large_grids_match_oracles(g in grid_strategy(14)) {
        prop_assert_eq!(g.count_regions(), union_find_regions(&g));
        prop_assert_eq!(g.longest_shortest_path(), floyd_warshall_longest(&g));
        prop_assert_eq!(g.metrics(), g.metrics_multiword());
    }

    #[test]
    fn single_flip_region_change(g in grid_strategy(8)) {
        let r = g.count_regions() as i64;
        for i in 0..g.len() {
            let mut f = g.clone();
            f.toggle(i);
            let dr = f.count_regions() as i64 - r;
            prop_assert!(dr.abs() <= 3);
            // Opening a wall merges its distinct neighbouring regions into one.
            let (opened, closed) = if g.is_wall(i) { (&f, &g) } else { (&g, &f) };
            let (x, y) = opened.coords(i);
            let mut labels: Vec<usize> = Vec::new();
            for (nx, ny) in [(x.wrapping_sub(1), y), (x + 1, y), (x, y.wrapping_sub(1)), (x, y + 1)] {
                if nx < g.width() && ny < g.height() && !closed.is_wall(closed.index(nx, ny)) {
                    labels.push(region_label(closed, closed.index(nx, ny)));
                }
            }
            labels.sort_unstable();
            labels.dedup();
            let expect = closed.count_regions() as i64 + 1 - labels.len() as i64;
            prop_assert_eq!(opened.count_regions() as i64, expect);
        }
    }

    #[test]
    fn scores_stay_in_unit_interval(g in grid_strategy(10), a in 0usize..=100, b in 0usize..=100, goal in 1usize..60) {
        let t = g.len();
        let (r1, r2) = (a.min(b) * t / 100, a.max(b) * t / 100);
        for obj in [Objective::EmptyTiles { r1, r2 }, Objective::PathLength { goal }, Objective::Connectivity] {
            let f = obj.evaluate(&g);
            prop_assert!((0.0..=1.0).contains(&f.value));
            prop_assert_eq!(f.solution, f.value == 1.0);
        }
        let e = g.count_empty();
        prop_assert_eq!(Objective::EmptyTiles { r1, r2 }.is_solution(&g), r1 <= e && e <= r2);
        prop_assert_eq!(Objective::PathLength { goal }.is_solution(&g), g.longest_shortest_path() >= goal);
        let r = g.count_regions();
        prop_assert_eq!(Objective::Connectivity.is_solution(&g), r == 1);
        if r >= 1 {
            prop_assert_eq!(Objective::Connectivity.score(&g), 1.0 / r as f64);
        }
    }
}

/// Smallest empty index reachable from `start`, as a region label.
fn region_label(g: &Grid, start: usize) -> usize {
    let mut seen = vec![false; g.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut low = start;
    while let Some(i) = stack.pop() {
        low = low.min(i);
        let (x, y) = g.coords(i);
        for (nx, ny) in [
            (x.wrapping_sub(1), y),
            (x + 1, y),
            (x, y.wrapping_sub(1)),
            (x, y + 1),
        ] {
            if nx < g.width() && ny < g.height() {
                let j = g.index(nx, ny);
                if !g.is_wall(j) && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    low
}

#[test]
fn empty_tiles_score_shape() {
    let t = 100;
    let obj = Objective::EmptyTiles { r1: 45, r2: 65 };
    let scores: Vec<f64> = (0..=t)
        .map(|e| {
            let tiles: Vec<bool> = (0..t).map(|i| i >= e).collect();
            obj.score(&Grid::from_tiles(10, 10, &tiles).unwrap())
        })
        .collect();
    assert!(scores[..=45].windows(2).all(|w| w[0] <= w[1]));
    assert!(scores[45..=65].iter().all(|&s| s == 1.0));
    assert!(scores[65..].windows(2).all(|w| w[0] >= w[1]));
}
