//! UCT Monte Carlo tree search with a per-parent exploration constant.
//!
//! The exploration constant of a parent is the spread between its best and
//! worst expanded child's mean reward, falling back to `epsilon_c` when that
//! spread is zero or the parent has a single child. A rollout's reward is the
//! best score seen along it, and any state scoring 1 (in the tree or in a
//! rollout) ends the search.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SearchOutcome;
use crate::budget::{Budget, Evaluator};
use crate::grid::Grid;
use crate::objective::{Fitness, Objective};
use crate::representation::{Action, ReprState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MctsParams {
    /// Maximum number of random actions per rollout.
    pub rollout_depth: usize,
    /// Exploration constant used when child means do not spread.
    pub epsilon_c: f64,
}

impl Default for MctsParams {
    fn default() -> Self {
        Self {
            rollout_depth: 100,
            epsilon_c: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MctsNode {
    pub state: ReprState,
    pub depth: usize,
    pub parent: Option<usize>,
    pub action: Option<Action>,
    pub score: f64,
    pub visits: u64,
    pub total_reward: f64,
    pub children: Vec<usize>,
    pub untried: Vec<Action>,
    /// Set once this subtree holds nothing left to expand.
    pub exhausted: bool,
}

impl MctsNode {
    fn new(
        state: ReprState,
        depth: usize,
        parent: Option<usize>,
        action: Option<Action>,
        score: f64,
    ) -> Self {
        let untried = state.legal_actions();
        Self {
            exhausted: untried.is_empty(),
            state,
            depth,
            parent,
            action,
            score,
            visits: 0,
            total_reward: 0.0,
            children: Vec::new(),
            untried,
        }
    }

    pub fn mean_reward(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.total_reward / self.visits as f64
        }
    }
}

#[derive(Debug)]
pub struct MctsTree {
    nodes: Vec<MctsNode>,
    epsilon_c: f64,
}

impl MctsTree {
    pub fn nodes(&self) -> &[MctsNode] {
        &self.nodes
    }

    pub fn root(&self) -> &MctsNode {
        &self.nodes[0]
    }

    /// Exploration constant used when choosing among the children of `id`.
    pub fn exploration_constant(&self, id: usize) -> f64 {
        let children = &self.nodes[id].children;
        if children.len() < 2 {
            return self.epsilon_c;
        }
        let (lo, hi) = children
            .iter()
            .map(|&c| self.nodes[c].mean_reward())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| {
                (lo.min(m), hi.max(m))
            });
        let spread = hi - lo;
        if spread > 0.0 {
            spread
        } else {
            self.epsilon_c
        }
    }

    /// Child of `id` with the highest UCT value, skipping exhausted subtrees.
    fn select_child(&self, id: usize) -> Option<usize> {
        let node = &self.nodes[id];
        let c = self.exploration_constant(id);
        let ln_n = (node.visits.max(1) as f64).ln();
        let mut best: Option<(usize, f64)> = None;
        for &child in &node.children {
            let ch = &self.nodes[child];
            if ch.exhausted {
                continue;
            }
            let v = ch.visits.max(1) as f64;
            let uct = ch.mean_reward() + c * (ln_n / v).sqrt();
            if best.is_none_or(|(_, b)| uct > b) {
                best = Some((child, uct));
            }
        }
        best.map(|(c, _)| c)
    }

    fn backpropagate(&mut self, from: usize, reward: f64) {
        let mut cur = Some(from);
        while let Some(id) = cur {
            let n = &mut self.nodes[id];
            n.visits += 1;
            n.total_reward += reward;
            cur = n.parent;
        }
        self.debug_check_path(from);
    }

    fn mark_exhausted(&mut self, from: usize) {
        let mut cur = Some(from);
        while let Some(id) = cur {
            let n = &self.nodes[id];
            let done = n.untried.is_empty() && n.children.iter().all(|&c| self.nodes[c].exhausted);
            if !done {
                break;
            }
            self.nodes[id].exhausted = true;
            cur = self.nodes[id].parent;
        }
    }

    /// Only nodes on the backpropagated path change, so checking them after
    /// each iteration keeps the whole tree checked.
    fn debug_check_path(&self, from: usize) {
        if cfg!(debug_assertions) {
            let mut cur = Some(from);
            while let Some(id) = cur {
                if let Err(e) = self.check_node(id) {
                    panic!("MCTS invariant violated: {e}");
                }
                cur = self.nodes[id].parent;
            }
        }
    }

    fn check_node(&self, id: usize) -> Result<(), String> {
        let n = &self.nodes[id];
        if n.total_reward < 0.0 || n.total_reward > n.visits as f64 + 1e-9 {
            return Err(format!(
                "node {id}: total_reward {} outside [0, visits={}]",
                n.total_reward, n.visits
            ));
        }
        let child_visits: u64 = n.children.iter().map(|&c| self.nodes[c].visits).sum();
        if child_visits > n.visits {
            return Err(format!(
                "node {id}: children visits {child_visits} exceed own visits {}",
                n.visits
            ));
        }
        if let Some(p) = n.parent {
            if self.nodes[p].depth + 1 != n.depth {
                return Err(format!(
                    "node {id}: depth {} under parent depth {}",
                    n.depth, self.nodes[p].depth
                ));
            }
        }
        Ok(())
    }

    /// Checks the statistics invariants on every node.
    pub fn check_invariants(&self) -> Result<(), String> {
        (0..self.nodes.len()).try_for_each(|id| self.check_node(id))
    }
}

pub fn mcts<R: Rng + ?Sized>(
    objective: &Objective,
    root: ReprState,
    budget: Budget,
    params: &MctsParams,
    rng: &mut R,
) -> SearchOutcome {
    mcts_observed(objective, root, budget, params, rng, &mut |_| {})
}

struct Best {
    grid: Grid,
    score: f64,
}

fn finish(
    best: Best,
    solution_depth: Option<usize>,
    max_depth: usize,
    expansions: u64,
    ev: &Evaluator<'_>,
) -> SearchOutcome {
    SearchOutcome {
        solved: solution_depth.is_some(),
        map: best.grid,
        best_score: best.score,
        nodes_expanded: expansions,
        max_depth_reached: max_depth,
        solution_depth,
        elapsed_ms: ev.elapsed_ms(),
        evaluations: ev.evaluations(),
    }
}

impl Best {
    fn offer(&mut self, state: &ReprState, fit: Fitness) {
        if fit.value > self.score {
            self.score = fit.value;
            self.grid = state.grid().clone();
        }
    }
}

/// Runs MCTS, calling `observer` with the tree after every iteration.
pub fn mcts_observed<R: Rng + ?Sized>(
    objective: &Objective,
    root: ReprState,
    budget: Budget,
    params: &MctsParams,
    rng: &mut R,
    observer: &mut dyn FnMut(&MctsTree),
) -> SearchOutcome {
    assert!(
        params.rollout_depth >= 1,
        "rollout_depth must be at least 1"
    );
    let mut ev = Evaluator::new(objective, budget);
    let root_fit = ev
        .evaluate(root.grid())
        .expect("the first evaluation is always granted");
    let mut best = Best {
        grid: root.grid().clone(),
        score: root_fit.value,
    };
    let mut tree = MctsTree {
        nodes: vec![MctsNode::new(root, 0, None, None, root_fit.value)],
        epsilon_c: params.epsilon_c,
    };
    let mut max_depth = 0;
    let mut expansions = 0u64;

    if root_fit.solution {
        return finish(best, Some(0), 0, 0, &ev);
    }

    while !tree.nodes[0].exhausted {
        // selection
        let mut id = 0;
        while tree.nodes[id].untried.is_empty() {
            match tree.select_child(id) {
                Some(c) => id = c,
                None => break,
            }
        }

        if tree.nodes[id].untried.is_empty() {
            // terminal leaf: nothing to expand or roll out
            let reward = tree.nodes[id].score;
            tree.nodes[id].exhausted = true;
            tree.backpropagate(id, reward);
            tree.mark_exhausted(id);
            observer(&tree);
            continue;
        }

        // expansion
        let k = rng.random_range(0..tree.nodes[id].untried.len());
        let action = tree.nodes[id].untried.swap_remove(k);
        let state = tree.nodes[id]
            .state
            .apply(action)
            .expect("untried actions are legal");
        let Some(fit) = ev.evaluate(state.grid()) else {
            break;
        };
        best.offer(&state, fit);
        let depth = tree.nodes[id].depth + 1;
        max_depth = max_depth.max(depth);
        expansions += 1;
        if fit.solution {
            best.grid = state.grid().clone();
            best.score = fit.value;
            return finish(best, Some(depth), max_depth, expansions, &ev);
        }
        let child = tree.nodes.len();
        tree.nodes.push(MctsNode::new(
            state,
            depth,
            Some(id),
            Some(action),
            fit.value,
        ));
        tree.nodes[id].children.push(child);

        // rollout
        let mut reward = fit.value;
        let mut sim = tree.nodes[child].state.clone();
        let mut out_of_budget = false;
        for _ in 0..params.rollout_depth {
            let Some(a) = sim.random_action(rng) else {
                break;
            };
            sim = sim.apply(a).expect("random_action is legal");
            let Some(f) = ev.evaluate(sim.grid()) else {
                out_of_budget = true;
                break;
            };
            best.offer(&sim, f);
            reward = reward.max(f.value);
            if f.solution {
                best.grid = sim.grid().clone();
                best.score = f.value;
                return finish(best, Some(depth), max_depth, expansions, &ev);
            }
        }

        tree.backpropagate(child, reward);
        tree.mark_exhausted(child);
        observer(&tree);
        if out_of_budget {
            break;
        }
    }

    finish(best, None, max_depth, expansions, &ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representation::RepresentationKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tree_with_means(means: &[f64]) -> MctsTree {
        let grid = Grid::filled(2, 2, true).unwrap();
        let state = ReprState::initial(
            RepresentationKind::Wide,
            grid,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        let mut nodes = vec![MctsNode::new(state.clone(), 0, None, None, 0.0)];
        for (i, &m) in means.iter().enumerate() {
            let mut n = MctsNode::new(state.clone(), 1, Some(0), None, 0.0);
            n.visits = 10;
            n.total_reward = m * 10.0;
            nodes.push(n);
            nodes[0].children.push(i + 1);
        }
        nodes[0].visits = 10 * means.len() as u64;
        MctsTree {
            nodes,
            epsilon_c: 0.01,
        }
    }

    #[test]
    fn exploration_constant_is_child_spread() {
        let t = tree_with_means(&[0.8, 0.2]);
        assert!((t.exploration_constant(0) - 0.6).abs() < 1e-12);
        assert_eq!(
            tree_with_means(&[0.5, 0.5, 0.5]).exploration_constant(0),
            0.01
        );
        assert_eq!(tree_with_means(&[0.7]).exploration_constant(0), 0.01);
        assert_eq!(tree_with_means(&[]).exploration_constant(0), 0.01);
    }

    #[test]
    fn first_iteration_expands_the_only_action() {
        // 1x1 narrow: a single tile, root has untried [Skip, Flip]
        let grid = Grid::filled(1, 1, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let root = ReprState::initial(RepresentationKind::Narrow, grid, &mut rng);
        let mut sizes = Vec::new();
        let obj = Objective::PathLength { goal: 5 };
        let out = mcts_observed(
            &obj,
            root,
            Budget::UNLIMITED,
            &MctsParams::default(),
            &mut rng,
            &mut |t| {
                sizes.push(t.nodes().len());
                t.check_invariants().unwrap();
            },
        );
        // both children expanded, then the exhausted tree stops the search
        assert_eq!(sizes, vec![2, 3]);
        assert!(!out.solved);
        assert_eq!(out.max_depth_reached, 1);
        assert_eq!(out.nodes_expanded, 2);
    }

    #[test]
    fn solves_easy_instance_and_reports_tree_depth() {
        let grid = Grid::filled(3, 3, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let root = ReprState::initial(RepresentationKind::Wide, grid, &mut rng);
        let obj = Objective::EmptyTiles { r1: 4, r2: 5 };
        let out = mcts(
            &obj,
            root,
            Budget::evaluations(10_000),
            &MctsParams::default(),
            &mut rng,
        );
        assert!(out.solved);
        assert_eq!(out.best_score, 1.0);
        assert!(obj.is_solution(&out.map));
        // the first rollout already passes through 4 empty tiles
        assert_eq!(out.solution_depth, Some(1));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let grid = Grid::from_text("0110\n1001\n0110\n1011\n").unwrap();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let root = ReprState::initial(RepresentationKind::Turtle, grid.clone(), &mut rng);
            let mut out = mcts(
                &Objective::PathLength { goal: 12 },
                root,
                Budget::evaluations(3000),
                &MctsParams::default(),
                &mut rng,
            );
            out.elapsed_ms = 0.0;
            out
        };
        assert_eq!(run(), run());
    }
}
