//! Tree-search generators over the representation state machines.
//!
//! All four searches score a node when it is generated and stop on the first
//! solution. BFS, DFS and best-first share [`frontier_search`] and
//! deduplicate on [`StateKey`]; MCTS builds a plain tree.

mod mcts;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::budget::{Budget, Evaluator};
use crate::grid::Grid;
use crate::objective::Objective;
use crate::representation::{Action, ReprState, StateKey};

pub use mcts::{mcts, mcts_observed, MctsNode, MctsParams, MctsTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeAlgorithm {
    Bfs,
    Dfs,
    #[serde(rename = "bestfs")]
    BestFirst,
    Mcts,
}

impl TreeAlgorithm {
    pub const ALL: [TreeAlgorithm; 4] = [Self::Bfs, Self::Dfs, Self::BestFirst, Self::Mcts];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bfs => "bfs",
            Self::Dfs => "dfs",
            Self::BestFirst => "bestfs",
            Self::Mcts => "mcts",
        }
    }
}

impl fmt::Display for TreeAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TreeAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bfs" => Ok(Self::Bfs),
            "dfs" => Ok(Self::Dfs),
            "bestfs" => Ok(Self::BestFirst),
            "mcts" => Ok(Self::Mcts),
            other => Err(format!("unknown tree search {other:?}")),
        }
    }
}

/// A node of a BFS/DFS/best-first search tree.
#[derive(Debug, Clone)]
pub struct SearchNode {
    pub state: ReprState,
    pub depth: usize,
    pub parent: Option<usize>,
    pub action: Option<Action>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub solved: bool,
    /// The solution if one was found, otherwise the best-scoring map seen.
    pub map: Grid,
    pub best_score: f64,
    pub nodes_expanded: u64,
    pub max_depth_reached: usize,
    pub solution_depth: Option<usize>,
    pub elapsed_ms: f64,
    pub evaluations: u64,
}

impl SearchOutcome {
    /// Solution depth, or one level past the deepest node for unsolved runs.
    pub fn depth_with_fallback(&self) -> usize {
        self.solution_depth.unwrap_or(self.max_depth_reached + 1)
    }
}

/// Hooks for instrumenting a frontier search.
pub trait SearchObserver {
    /// Called before the children of `node` are generated.
    fn expanding(&mut self, _node: &SearchNode) {}
    /// Called for every newly generated, scored node (the root included).
    fn generated(&mut self, _node: &SearchNode) {}
}

impl SearchObserver for () {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontierOrder {
    Fifo,
    Lifo,
    BestFirst,
}

pub fn bfs(objective: &Objective, root: ReprState, budget: Budget) -> SearchOutcome {
    frontier_search(FrontierOrder::Fifo, objective, root, budget, &mut ())
}

pub fn dfs(objective: &Objective, root: ReprState, budget: Budget) -> SearchOutcome {
    frontier_search(FrontierOrder::Lifo, objective, root, budget, &mut ())
}

pub fn best_first(objective: &Objective, root: ReprState, budget: Budget) -> SearchOutcome {
    frontier_search(FrontierOrder::BestFirst, objective, root, budget, &mut ())
}

#[derive(Debug, PartialEq)]
struct Prioritized {
    score: f64,
    seq: u64,
    node: usize,
}

impl Eq for Prioritized {}

impl Ord for Prioritized {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Prioritized {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

enum Frontier {
    Fifo(VecDeque<usize>),
    Lifo(Vec<usize>),
    Best(BinaryHeap<Prioritized>, u64),
}

impl Frontier {
    fn new(order: FrontierOrder) -> Self {
        match order {
            FrontierOrder::Fifo => Frontier::Fifo(VecDeque::new()),
            FrontierOrder::Lifo => Frontier::Lifo(Vec::new()),
            FrontierOrder::BestFirst => Frontier::Best(BinaryHeap::new(), 0),
        }
    }

    /// Adds children listed in action order.
    fn push_children(&mut self, children: &[(usize, f64)]) {
        match self {
            Frontier::Fifo(q) => q.extend(children.iter().map(|c| c.0)),
            // reversed so the first action is popped first
            Frontier::Lifo(s) => s.extend(children.iter().rev().map(|c| c.0)),
            Frontier::Best(h, seq) => {
                for &(node, score) in children {
                    h.push(Prioritized {
                        score,
                        seq: *seq,
                        node,
                    });
                    *seq += 1;
                }
            }
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            Frontier::Fifo(q) => q.pop_front(),
            Frontier::Lifo(s) => s.pop(),
            Frontier::Best(h, _) => h.pop().map(|p| p.node),
        }
    }
}

struct Tracker {
    best: usize,
    best_score: f64,
    max_depth: usize,
    expanded: u64,
}

impl Tracker {
    fn finish(
        self,
        nodes: Vec<SearchNode>,
        solution: Option<usize>,
        ev: &Evaluator<'_>,
    ) -> SearchOutcome {
        let pick = solution.unwrap_or(self.best);
        let node = nodes.into_iter().nth(pick).expect("tracked node exists");
        SearchOutcome {
            solved: solution.is_some(),
            best_score: node.score,
            solution_depth: solution.map(|_| node.depth),
            map: node.state.into_grid(),
            nodes_expanded: self.expanded,
            max_depth_reached: self.max_depth,
            elapsed_ms: ev.elapsed_ms(),
            evaluations: ev.evaluations(),
        }
    }
}

/// Shared BFS / DFS / best-first driver.
pub fn frontier_search(
    order: FrontierOrder,
    objective: &Objective,
    root: ReprState,
    budget: Budget,
    observer: &mut dyn SearchObserver,
) -> SearchOutcome {
    let mut ev = Evaluator::new(objective, budget);
    let root_fit = ev
        .evaluate(root.grid())
        .expect("the first evaluation is always granted");
    let mut visited: HashSet<StateKey> = HashSet::new();
    visited.insert(root.key());
    let mut nodes = vec![SearchNode {
        state: root,
        depth: 0,
        parent: None,
        action: None,
        score: root_fit.value,
    }];
    observer.generated(&nodes[0]);
    let mut track = Tracker {
        best: 0,
        best_score: root_fit.value,
        max_depth: 0,
        expanded: 0,
    };
    if root_fit.solution {
        return track.finish(nodes, Some(0), &ev);
    }

    let mut frontier = Frontier::new(order);
    frontier.push_children(&[(0, root_fit.value)]);
    let mut actions = Vec::new();
    let mut children = Vec::new();

    while let Some(id) = frontier.pop() {
        observer.expanding(&nodes[id]);
        track.expanded += 1;
        nodes[id].state.legal_actions_into(&mut actions);
        children.clear();
        for &action in &actions {
            let state = nodes[id]
                .state
                .apply(action)
                .expect("actions come from legal_actions");
            if !visited.insert(state.key()) {
                continue;
            }
            let Some(fit) = ev.evaluate(state.grid()) else {
                return track.finish(nodes, None, &ev);
            };
            let depth = nodes[id].depth + 1;
            let child = nodes.len();
            nodes.push(SearchNode {
                state,
                depth,
                parent: Some(id),
                action: Some(action),
                score: fit.value,
            });
            observer.generated(&nodes[child]);
            track.max_depth = track.max_depth.max(depth);
            if fit.value > track.best_score {
                track.best = child;
                track.best_score = fit.value;
            }
            if fit.solution {
                return track.finish(nodes, Some(child), &ev);
            }
            children.push((child, fit.value));
        }
        frontier.push_children(&children);
    }
    // whole reachable space enumerated without a solution
    track.finish(nodes, None, &ev)
}
