//! Binary tile grid and the graph metrics every objective is built on.
//!
//! Tiles are stored row-major (`index = y * width + x`, origin top-left) as a
//! packed bitset where a set bit is a wall and a clear bit is empty space.
//! Connectivity is 4-neighbour only.
//!
//! Region counting and longest-shortest-path both run as bit-parallel BFS:
//! a whole frontier is advanced one step with a handful of shifts and masks.
//! Grids of up to 128 tiles take a `u128` fast path; larger grids use the
//! multi-word path.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

const WORD_BITS: usize = 64;

type Words = SmallVec<[u64; 2]>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("grid dimensions must be positive, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("expected {expected} tiles, got {actual}")]
    TileCount { expected: usize, actual: usize },
    #[error("line {line}: expected {expected} characters, got {actual}")]
    RowLength {
        line: usize,
        expected: usize,
        actual: usize,
    },
    #[error("line {line}, column {column}: invalid tile character {ch:?}")]
    BadTile {
        line: usize,
        column: usize,
        ch: char,
    },
    #[error("map text is empty")]
    NoRows,
}

/// A `width x height` map of empty (`false`) and wall (`true`) tiles.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    width: usize,
    height: usize,
    walls: Words,
}

/// The three raw map measurements: empty tiles, regions, longest shortest path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridMetrics {
    pub empty_count: usize,
    pub region_count: usize,
    pub longest_shortest_path: usize,
}

impl Grid {
    /// A grid with every tile set to `wall`.
    pub fn filled(width: usize, height: usize, wall: bool) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyDimensions { width, height });
        }
        let len = width * height;
        let mut walls: Words = smallvec![0; len.div_ceil(WORD_BITS)];
        if wall {
            for w in walls.iter_mut() {
                *w = u64::MAX;
            }
            clear_tail(&mut walls, len);
        }
        Ok(Self {
            width,
            height,
            walls,
        })
    }

    /// Each tile independently empty with probability `empty_pct`.
    pub fn random<R: Rng + ?Sized>(
        width: usize,
        height: usize,
        empty_pct: f64,
        rng: &mut R,
    ) -> Result<Self, GridError> {
        let mut g = Self::filled(width, height, false)?;
        for i in 0..g.len() {
            if !rng.random_bool(empty_pct) {
                g.set(i, true);
            }
        }
        Ok(g)
    }

    pub fn from_tiles(width: usize, height: usize, tiles: &[bool]) -> Result<Self, GridError> {
        let mut g = Self::filled(width, height, false)?;
        if tiles.len() != g.len() {
            return Err(GridError::TileCount {
                expected: g.len(),
                actual: tiles.len(),
            });
        }
        for (i, &t) in tiles.iter().enumerate() {
            g.set(i, t);
        }
        Ok(g)
    }

    /// Parses the map text format: `height` lines of `width` characters,
    /// `'0'` empty and `'1'` wall, each line newline-terminated.
    pub fn from_text(text: &str) -> Result<Self, GridError> {
        let rows: Vec<&str> = text.lines().collect();
        if rows.is_empty() {
            return Err(GridError::NoRows);
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut tiles = Vec::with_capacity(width * height);
        for (line, row) in rows.iter().enumerate() {
            let n = row.chars().count();
            if n != width {
                return Err(GridError::RowLength {
                    line: line + 1,
                    expected: width,
                    actual: n,
                });
            }
            for (column, ch) in row.chars().enumerate() {
                tiles.push(parse_tile(ch).ok_or(GridError::BadTile {
                    line: line + 1,
                    column: column + 1,
                    ch,
                })?);
            }
        }
        Self::from_tiles(width, height, &tiles)
    }

    /// Parses the row-concatenated `0`/`1` string used in results files.
    pub fn from_flat(width: usize, height: usize, flat: &str) -> Result<Self, GridError> {
        let mut tiles = Vec::with_capacity(flat.len());
        for (column, ch) in flat.chars().enumerate() {
            tiles.push(parse_tile(ch).ok_or(GridError::BadTile {
                line: 1,
                column: column + 1,
                ch,
            })?);
        }
        Self::from_tiles(width, height, &tiles)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(tile_char(self.is_wall(self.index(x, y))));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_flat(&self) -> String {
        (0..self.len())
            .map(|i| tile_char(self.is_wall(i)))
            .collect()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Total tile count, `width * height`.
    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    #[inline]
    pub fn is_wall(&self, index: usize) -> bool {
        assert!(index < self.len(), "tile {index} out of bounds");
        self.walls[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn is_empty_tile(&self, index: usize) -> bool {
        !self.is_wall(index)
    }

    #[inline]
    pub fn set(&mut self, index: usize, wall: bool) {
        assert!(index < self.len(), "tile {index} out of bounds");
        let bit = 1u64 << (index % WORD_BITS);
        if wall {
            self.walls[index / WORD_BITS] |= bit;
        } else {
            self.walls[index / WORD_BITS] &= !bit;
        }
    }

    #[inline]
    pub fn toggle(&mut self, index: usize) {
        assert!(index < self.len(), "tile {index} out of bounds");
        self.walls[index / WORD_BITS] ^= 1u64 << (index % WORD_BITS);
    }

    /// Tiles in row-major order, `true` for walls.
    pub fn tiles(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(|i| self.is_wall(i))
    }

    /// Number of tiles that differ from `other`. Panics on a size mismatch.
    pub fn hamming(&self, other: &Grid) -> usize {
        assert_eq!((self.width, self.height), (other.width, other.height));
        self.walls
            .iter()
            .zip(&other.walls)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn count_empty(&self) -> usize {
        let walls: usize = self.walls.iter().map(|w| w.count_ones() as usize).sum();
        self.len() - walls
    }

    /// Number of 4-connected components of empty tiles.
    pub fn count_regions(&self) -> usize {
        if self.len() <= 128 {
            Small::new(self).count_regions()
        } else {
            Wide::new(self).count_regions()
        }
    }

    /// Longest BFS distance, in steps, between two empty tiles of the same region.
    pub fn longest_shortest_path(&self) -> usize {
        if self.len() <= 128 {
            Small::new(self).longest_shortest_path()
        } else {
            Wide::new(self).longest_shortest_path()
        }
    }

    pub fn metrics(&self) -> GridMetrics {
        GridMetrics {
            empty_count: self.count_empty(),
            region_count: self.count_regions(),
            longest_shortest_path: self.longest_shortest_path(),
        }
    }

    /// Exposes the multi-word code path regardless of size, for cross-checking.
    #[doc(hidden)]
    pub fn metrics_multiword(&self) -> GridMetrics {
        let w = Wide::new(self);
        GridMetrics {
            empty_count: self.count_empty(),
            region_count: w.count_regions(),
            longest_shortest_path: w.longest_shortest_path(),
        }
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Grid {}x{}", self.width, self.height)?;
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_tile(ch: char) -> Option<bool> {
    match ch {
        '0' => Some(false),
        '1' => Some(true),
        _ => None,
    }
}

fn tile_char(wall: bool) -> char {
    if wall {
        '1'
    } else {
        '0'
    }
}

fn clear_tail(words: &mut [u64], len: usize) {
    let rem = len % WORD_BITS;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

/// `u128` bitboard for grids with at most 128 tiles.
struct Small {
    width: u32,
    empty: u128,
    not_first_col: u128,
    not_last_col: u128,
}

impl Small {
    fn new(g: &Grid) -> Self {
        let len = g.len();
        let mut walls = g.walls[0] as u128;
        if g.walls.len() > 1 {
            walls |= (g.walls[1] as u128) << 64;
        }
        let valid = if len == 128 {
            u128::MAX
        } else {
            (1u128 << len) - 1
        };
        let mut first_col = 0u128;
        let mut last_col = 0u128;
        for y in 0..g.height {
            first_col |= 1u128 << (y * g.width);
            last_col |= 1u128 << (y * g.width + g.width - 1);
        }
        Self {
            width: g.width as u32,
            empty: !walls & valid,
            not_first_col: !first_col,
            not_last_col: !last_col,
        }
    }

    #[inline(always)]
    fn step(&self, f: u128) -> u128 {
        ((f << 1) & self.not_first_col)
            | ((f >> 1) & self.not_last_col)
            | f.checked_shl(self.width).unwrap_or(0)
            | f.checked_shr(self.width).unwrap_or(0)
    }

    fn count_regions(&self) -> usize {
        let mut remaining = self.empty;
        let mut count = 0;
        while remaining != 0 {
            let seed = remaining & remaining.wrapping_neg();
            let mut seen = seed;
            let mut frontier = seed;
            while frontier != 0 {
                frontier = self.step(frontier) & self.empty & !seen;
                seen |= frontier;
            }
            remaining &= !seen;
            count += 1;
        }
        count
    }

    fn longest_shortest_path(&self) -> usize {
        let mut best = 0;
        let mut sources = self.empty;
        while sources != 0 {
            let src = sources & sources.wrapping_neg();
            sources &= sources - 1;
            let mut seen = src;
            let mut frontier = src;
            let mut level = 0;
            loop {
                frontier = self.step(frontier) & self.empty & !seen;
                if frontier == 0 {
                    break;
                }
                seen |= frontier;
                level += 1;
            }
            best = best.max(level);
        }
        best
    }
}

/// Multi-word bitboard for arbitrary grid sizes.
struct Wide {
    width: usize,
    len: usize,
    empty: Vec<u64>,
    not_first_col: Vec<u64>,
    not_last_col: Vec<u64>,
}

impl Wide {
    fn new(g: &Grid) -> Self {
        let len = g.len();
        let n = len.div_ceil(WORD_BITS);
        let mut empty: Vec<u64> = g.walls.iter().map(|w| !w).collect();
        clear_tail(&mut empty, len);
        let mut not_first_col = vec![u64::MAX; n];
        let mut not_last_col = vec![u64::MAX; n];
        for y in 0..g.height {
            let a = y * g.width;
            let b = a + g.width - 1;
            not_first_col[a / WORD_BITS] &= !(1u64 << (a % WORD_BITS));
            not_last_col[b / WORD_BITS] &= !(1u64 << (b % WORD_BITS));
        }
        Self {
            width: g.width,
            len,
            empty,
            not_first_col,
            not_last_col,
        }
    }

    /// `out = step(f) & empty & !seen`; returns whether `out` is non-zero.
    fn step_into(&self, f: &[u64], seen: &[u64], out: &mut [u64]) -> bool {
        let n = f.len();
        let mut any = 0u64;
        for i in 0..n {
            let left = shl_word(f, i, 1) & self.not_first_col[i];
            let right = shr_word(f, i, 1) & self.not_last_col[i];
            let down = shl_word(f, i, self.width);
            let up = shr_word(f, i, self.width);
            let v = (left | right | down | up) & self.empty[i] & !seen[i];
            out[i] = v;
            any |= v;
        }
        // Bits shifted past the last tile are not in `empty`, so no tail clear needed.
        any != 0
    }

    fn bfs_levels(
        &self,
        src: usize,
        seen: &mut [u64],
        frontier: &mut Vec<u64>,
        next: &mut Vec<u64>,
    ) -> usize {
        seen.fill(0);
        frontier.fill(0);
        seen[src / WORD_BITS] |= 1 << (src % WORD_BITS);
        frontier[src / WORD_BITS] |= 1 << (src % WORD_BITS);
        let mut level = 0;
        while self.step_into(frontier, seen, next) {
            for (s, n) in seen.iter_mut().zip(next.iter()) {
                *s |= n;
            }
            std::mem::swap(frontier, next);
            level += 1;
        }
        level
    }

    fn count_regions(&self) -> usize {
        let n = self.empty.len();
        let mut assigned = vec![0u64; n];
        let mut seen = vec![0u64; n];
        let mut frontier = vec![0u64; n];
        let mut next = vec![0u64; n];
        let mut count = 0;
        for idx in 0..self.len {
            let (w, b) = (idx / WORD_BITS, 1u64 << (idx % WORD_BITS));
            if self.empty[w] & b == 0 || assigned[w] & b != 0 {
                continue;
            }
            self.bfs_levels(idx, &mut seen, &mut frontier, &mut next);
            for (a, s) in assigned.iter_mut().zip(&seen) {
                *a |= s;
            }
            count += 1;
        }
        count
    }

    fn longest_shortest_path(&self) -> usize {
        let n = self.empty.len();
        let mut seen = vec![0u64; n];
        let mut frontier = vec![0u64; n];
        let mut next = vec![0u64; n];
        let mut best = 0;
        for idx in 0..self.len {
            if self.empty[idx / WORD_BITS] >> (idx % WORD_BITS) & 1 == 0 {
                continue;
            }
            best = best.max(self.bfs_levels(idx, &mut seen, &mut frontier, &mut next));
        }
        best
    }
}

/// Word `i` of the multi-word value `f << k`.
#[inline]
fn shl_word(f: &[u64], i: usize, k: usize) -> u64 {
    let (ws, bs) = (k / WORD_BITS, k % WORD_BITS);
    if i < ws {
        return 0;
    }
    let src = i - ws;
    let mut v = f[src] << bs;
    if bs != 0 && src > 0 {
        v |= f[src - 1] >> (WORD_BITS - bs);
    }
    v
}

/// Word `i` of the multi-word value `f >> k`.
#[inline]
fn shr_word(f: &[u64], i: usize, k: usize) -> u64 {
    let (ws, bs) = (k / WORD_BITS, k % WORD_BITS);
    let src = i + ws;
    if src >= f.len() {
        return 0;
    }
    let mut v = f[src] >> bs;
    if bs != 0 && src + 1 < f.len() {
        v |= f[src + 1] << (WORD_BITS - bs);
    }
    v
}
