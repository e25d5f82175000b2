//! Tree search and optimization generators for binary grid maps.
//!
//! Maps are grids of empty and wall tiles ([`grid::Grid`]). Three objectives
//! ([`objective::Objective`]) score them in `[0, 1]`. Four tree searches run
//! over three map-editing representations ([`representation`]), and four
//! optimizers work on the grid directly ([`optimizer`]). The [`harness`]
//! sweeps configurations and writes results; [`analysis`] summarizes them.
//! [`oracle`] holds brute-force reference versions of the metrics and of the
//! minimal solution depth.

pub mod analysis;
pub mod budget;
pub mod grid;
pub mod harness;
pub mod objective;
pub mod optimizer;
pub mod oracle;
pub mod representation;
pub mod tree_search;

pub use budget::{Budget, Evaluator};
pub use grid::{Grid, GridMetrics};
pub use objective::{Objective, ObjectiveKind};
pub use representation::{Action, ReprState, RepresentationKind};
