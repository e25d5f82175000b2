//! Search-space encodings that turn map editing into a tree.
//!
//! * **Narrow**: tiles are visited in a fixed random order; at each tile the
//!   search either skips it or flips it.
//! * **Turtle**: a cursor walks the map in the four cardinal directions and may
//!   flip the tile under it.
//! * **Wide**: any tile not yet flipped on the current path may be flipped.
//!
//! States are values: [`ReprState::apply`] returns a new state and leaves the
//! input untouched.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationKind {
    Narrow,
    Turtle,
    Wide,
}

impl RepresentationKind {
    pub const ALL: [RepresentationKind; 3] = [Self::Narrow, Self::Turtle, Self::Wide];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Narrow => "narrow",
            Self::Turtle => "turtle",
            Self::Wide => "wide",
        }
    }
}

impl fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepresentationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "narrow" => Ok(Self::Narrow),
            "turtle" => Ok(Self::Turtle),
            "wide" => Ok(Self::Wide),
            other => Err(format!(
                "unknown representation {other:?} (expected narrow | turtle | wide)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    /// Narrow: leave the current tile and advance.
    Skip,
    /// Narrow and turtle: toggle the current tile.
    Flip,
    MoveUp,
    MoveDown,
    MoveLeft,
    MoveRight,
    /// Wide: toggle the tile at this index.
    FlipAt(usize),
}

impl Action {
    /// True for actions that change exactly one tile.
    pub fn is_flip(self) -> bool {
        matches!(self, Action::Flip | Action::FlipAt(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("action {action:?} is not legal in this {representation} state")]
pub struct IllegalAction {
    pub representation: RepresentationKind,
    pub action: Action,
}

/// Small bitset over tile indices.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct TileSet {
    words: SmallVec<[u64; 2]>,
    len: usize,
}

impl TileSet {
    pub fn new(capacity: usize) -> Self {
        Self {
            words: smallvec![0; capacity.div_ceil(64)],
            len: 0,
        }
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    /// Returns false if `i` was already present.
    pub fn insert(&mut self, i: usize) -> bool {
        let w = &mut self.words[i / 64];
        let bit = 1u64 << (i % 64);
        if *w & bit != 0 {
            return false;
        }
        *w |= bit;
        self.len += 1;
        true
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

impl fmt::Debug for TileSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NarrowState {
    pub grid: Grid,
    /// Tile visiting order, shared by every node of one search.
    pub order: Arc<[usize]>,
    /// Number of tiles already decided.
    pub cursor: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurtleState {
    pub grid: Grid,
    pub pos: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WideState {
    pub grid: Grid,
    /// Tiles flipped on the path from the root; pruned from the children.
    pub flipped: TileSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReprState {
    Narrow(NarrowState),
    Turtle(TurtleState),
    Wide(WideState),
}

/// Identity of a state for duplicate detection. The wide flipped set is path
/// bookkeeping and is not part of the key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateKey {
    Narrow(Grid, usize),
    Turtle(Grid, (usize, usize)),
    Wide(Grid),
}

impl ReprState {
    pub fn initial<R: Rng + ?Sized>(kind: RepresentationKind, grid: Grid, rng: &mut R) -> Self {
        match kind {
            RepresentationKind::Narrow => {
                let mut order: Vec<usize> = (0..grid.len()).collect();
                order.shuffle(rng);
                ReprState::Narrow(NarrowState {
                    grid,
                    order: order.into(),
                    cursor: 0,
                })
            }
            RepresentationKind::Turtle => {
                let idx = rng.random_range(0..grid.len());
                let pos = grid.coords(idx);
                ReprState::Turtle(TurtleState { grid, pos })
            }
            RepresentationKind::Wide => {
                let flipped = TileSet::new(grid.len());
                ReprState::Wide(WideState { grid, flipped })
            }
        }
    }

    pub fn kind(&self) -> RepresentationKind {
        match self {
            ReprState::Narrow(_) => RepresentationKind::Narrow,
            ReprState::Turtle(_) => RepresentationKind::Turtle,
            ReprState::Wide(_) => RepresentationKind::Wide,
        }
    }

    pub fn grid(&self) -> &Grid {
        match self {
            ReprState::Narrow(s) => &s.grid,
            ReprState::Turtle(s) => &s.grid,
            ReprState::Wide(s) => &s.grid,
        }
    }

    pub fn into_grid(self) -> Grid {
        match self {
            ReprState::Narrow(s) => s.grid,
            ReprState::Turtle(s) => s.grid,
            ReprState::Wide(s) => s.grid,
        }
    }

    /// Legal actions in their fixed order: narrow `[Skip, Flip]`; turtle
    /// `[Flip, Up, Down, Left, Right]` minus out-of-bounds moves; wide every
    /// unflipped index ascending.
    pub fn legal_actions(&self) -> Vec<Action> {
        let mut out = Vec::new();
        self.legal_actions_into(&mut out);
        out
    }

    pub fn legal_actions_into(&self, out: &mut Vec<Action>) {
        out.clear();
        match self {
            ReprState::Narrow(s) => {
                if s.cursor < s.grid.len() {
                    out.extend([Action::Skip, Action::Flip]);
                }
            }
            ReprState::Turtle(s) => {
                let (x, y) = s.pos;
                out.push(Action::Flip);
                if y > 0 {
                    out.push(Action::MoveUp);
                }
                if y + 1 < s.grid.height() {
                    out.push(Action::MoveDown);
                }
                if x > 0 {
                    out.push(Action::MoveLeft);
                }
                if x + 1 < s.grid.width() {
                    out.push(Action::MoveRight);
                }
            }
            ReprState::Wide(s) => {
                out.extend(
                    (0..s.grid.len())
                        .filter(|&i| !s.flipped.contains(i))
                        .map(Action::FlipAt),
                );
            }
        }
    }

    pub fn is_terminal(&self) -> bool {
        match self {
            ReprState::Narrow(s) => s.cursor >= s.grid.len(),
            ReprState::Turtle(_) => false,
            ReprState::Wide(s) => s.flipped.len() >= s.grid.len(),
        }
    }

    /// A uniformly random legal action, without building the full list.
    pub fn random_action<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Action> {
        match self {
            ReprState::Wide(s) => {
                let free = s.grid.len() - s.flipped.len();
                if free == 0 {
                    return None;
                }
                let k = rng.random_range(0..free);
                (0..s.grid.len())
                    .filter(|&i| !s.flipped.contains(i))
                    .nth(k)
                    .map(Action::FlipAt)
            }
            ReprState::Narrow(s) => {
                if s.cursor >= s.grid.len() {
                    None
                } else if rng.random_bool(0.5) {
                    Some(Action::Flip)
                } else {
                    Some(Action::Skip)
                }
            }
            ReprState::Turtle(_) => {
                let mut actions = Vec::with_capacity(5);
                self.legal_actions_into(&mut actions);
                let i = rng.random_range(0..actions.len());
                Some(actions[i])
            }
        }
    }

    pub fn apply(&self, action: Action) -> Result<ReprState, IllegalAction> {
        let illegal = || IllegalAction {
            representation: self.kind(),
            action,
        };
        match (self, action) {
            (ReprState::Narrow(s), Action::Skip | Action::Flip) => {
                if s.cursor >= s.grid.len() {
                    return Err(illegal());
                }
                let mut grid = s.grid.clone();
                if action == Action::Flip {
                    grid.toggle(s.order[s.cursor]);
                }
                Ok(ReprState::Narrow(NarrowState {
                    grid,
                    order: Arc::clone(&s.order),
                    cursor: s.cursor + 1,
                }))
            }
            (ReprState::Turtle(s), _) => {
                let (x, y) = s.pos;
                let (w, h) = (s.grid.width(), s.grid.height());
                let mut grid = s.grid.clone();
                let pos = match action {
                    Action::Flip => {
                        grid.toggle(s.grid.index(x, y));
                        (x, y)
                    }
                    Action::MoveUp if y > 0 => (x, y - 1),
                    Action::MoveDown if y + 1 < h => (x, y + 1),
                    Action::MoveLeft if x > 0 => (x - 1, y),
                    Action::MoveRight if x + 1 < w => (x + 1, y),
                    _ => return Err(illegal()),
                };
                Ok(ReprState::Turtle(TurtleState { grid, pos }))
            }
            (ReprState::Wide(s), Action::FlipAt(i)) => {
                if i >= s.grid.len() || s.flipped.contains(i) {
                    return Err(illegal());
                }
                let mut grid = s.grid.clone();
                grid.toggle(i);
                let mut flipped = s.flipped.clone();
                flipped.insert(i);
                Ok(ReprState::Wide(WideState { grid, flipped }))
            }
            _ => Err(illegal()),
        }
    }

    pub fn key(&self) -> StateKey {
        match self {
            ReprState::Narrow(s) => StateKey::Narrow(s.grid.clone(), s.cursor),
            ReprState::Turtle(s) => StateKey::Turtle(s.grid.clone(), s.pos),
            ReprState::Wide(s) => StateKey::Wide(s.grid.clone()),
        }
    }
}
