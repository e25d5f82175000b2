use rand::Rng;

use super::Individual;

/// Linear rank selection: sorted ascending by fitness, the individual at rank
/// `i` (1-based) is drawn with probability `i / (N (N + 1) / 2)`.
#[derive(Debug, Clone)]
pub struct RankSelector {
    /// Population indices, worst first.
    by_rank: Vec<usize>,
    total: u64,
}

impl RankSelector {
    /// Panics on an empty population.
    pub fn new(population: &[Individual]) -> Self {
        assert!(
            !population.is_empty(),
            "rank selection needs a non-empty population"
        );
        let mut by_rank: Vec<usize> = (0..population.len()).collect();
        by_rank.sort_by(|&a, &b| population[a].fitness.total_cmp(&population[b].fitness));
        let n = by_rank.len() as u64;
        Self {
            by_rank,
            total: n * (n + 1) / 2,
        }
    }

    /// Selection probability of the individual at 1-based ascending `rank`.
    pub fn probability(&self, rank: usize) -> f64 {
        rank as f64 / self.total as f64
    }

    /// Population indices from worst to best.
    pub fn ranking(&self) -> &[usize] {
        &self.by_rank
    }

    /// Draws a population index.
    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random_range(0..self.total);
        self.by_rank[rank_for(u) - 1]
    }
}

/// Smallest `r` with `r (r + 1) / 2 > u`.
fn rank_for(u: u64) -> usize {
    let mut r = ((((8 * u + 1) as f64).sqrt() - 1.0) / 2.0) as u64;
    while r * (r + 1) / 2 <= u {
        r += 1;
    }
    while r > 1 && (r - 1) * r / 2 > u {
        r -= 1;
    }
    r as usize
}

pub fn rank_select<'a, R: Rng + ?Sized>(
    population: &'a [Individual],
    rng: &mut R,
) -> &'a Individual {
    &population[RankSelector::new(population).pick(rng)]
}
