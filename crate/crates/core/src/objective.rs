//! Map objectives. Each maps a grid to a score in `[0, 1]`; a score of
//! exactly 1 marks a solution.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    EmptyTiles,
    PathLength,
    Connectivity,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [Self::EmptyTiles, Self::PathLength, Self::Connectivity];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::EmptyTiles => "empty",
            Self::PathLength => "path",
            Self::Connectivity => "connectivity",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "empty" | "empty_tiles" => Ok(Self::EmptyTiles),
            "path" | "path_length" => Ok(Self::PathLength),
            "connectivity" => Ok(Self::Connectivity),
            other => Err(format!(
                "unknown objective {other:?} (expected empty | path | connectivity)"
            )),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObjectiveError {
    #[error("empty-tile range requires r1 <= r2 <= {tiles}, got r1={r1} r2={r2}")]
    BadRange { r1: usize, r2: usize, tiles: usize },
    #[error("path goal length must be at least 1")]
    ZeroGoal,
}

/// An objective together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// Full score while the empty-tile count lies in `[r1, r2]`.
    EmptyTiles { r1: usize, r2: usize },
    /// Full score once the longest shortest path reaches `goal` steps.
    PathLength { goal: usize },
    /// Reciprocal of the number of empty regions.
    Connectivity,
}

/// Default range and goal for 10x10 maps.
pub const DEFAULT_R1: usize = 45;
pub const DEFAULT_R2: usize = 65;
pub const DEFAULT_GOAL: usize = 26;

/// The result of scoring a grid. `solution` is set by the constant-1 branch
/// of the objective, never by comparing floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fitness {
    pub value: f64,
    pub solution: bool,
}

impl Fitness {
    const SOLVED: Fitness = Fitness {
        value: 1.0,
        solution: true,
    };

    fn partial(value: f64) -> Self {
        Fitness {
            value,
            solution: false,
        }
    }
}

impl Objective {
    pub fn default_for(kind: ObjectiveKind) -> Self {
        match kind {
            ObjectiveKind::EmptyTiles => Self::EmptyTiles {
                r1: DEFAULT_R1,
                r2: DEFAULT_R2,
            },
            ObjectiveKind::PathLength => Self::PathLength { goal: DEFAULT_GOAL },
            ObjectiveKind::Connectivity => Self::Connectivity,
        }
    }

    pub fn kind(&self) -> ObjectiveKind {
        match self {
            Self::EmptyTiles { .. } => ObjectiveKind::EmptyTiles,
            Self::PathLength { .. } => ObjectiveKind::PathLength,
            Self::Connectivity => ObjectiveKind::Connectivity,
        }
    }

    /// Checks the parameters against a map of `tiles` total tiles.
    pub fn validate(&self, tiles: usize) -> Result<(), ObjectiveError> {
        match *self {
            Self::EmptyTiles { r1, r2 } if r1 > r2 || r2 > tiles => {
                Err(ObjectiveError::BadRange { r1, r2, tiles })
            }
            Self::PathLength { goal: 0 } => Err(ObjectiveError::ZeroGoal),
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, grid: &Grid) -> Fitness {
        match *self {
            Self::EmptyTiles { r1, r2 } => {
                empty_tiles_fitness(grid.count_empty(), grid.len(), r1, r2)
            }
            Self::PathLength { goal } => path_length_fitness(grid.longest_shortest_path(), goal),
            Self::Connectivity => connectivity_fitness(grid.count_regions()),
        }
    }

    pub fn score(&self, grid: &Grid) -> f64 {
        self.evaluate(grid).value
    }

    pub fn is_solution(&self, grid: &Grid) -> bool {
        self.evaluate(grid).solution
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind().as_str())
    }
}

/// Piecewise empty-tile score. The outer branches are only evaluated when
/// reachable, so `r1 = 0` or `r2 = tiles` never divides by zero.
pub fn empty_tiles_fitness(empty: usize, tiles: usize, r1: usize, r2: usize) -> Fitness {
    if empty < r1 {
        Fitness::partial(empty as f64 / r1 as f64)
    } else if empty <= r2 {
        Fitness::SOLVED
    } else {
        Fitness::partial((tiles - empty) as f64 / (tiles - r2) as f64)
    }
}

pub fn path_length_fitness(path: usize, goal: usize) -> Fitness {
    if path < goal {
        Fitness::partial(path as f64 / goal as f64)
    } else {
        Fitness::SOLVED
    }
}

pub fn connectivity_fitness(regions: usize) -> Fitness {
    match regions {
        0 => Fitness::partial(0.0),
        1 => Fitness::SOLVED,
        r => Fitness::partial(1.0 / r as f64),
    }
}
