//! Ground truth: validating embeddings, exhaustive containment on tiny
//! instances, and seeded Monte Carlo trials of the randomized phases.

mod brute;
mod trials;

use crate::digraph::Digraph;
use crate::embedding::Embedding;
use crate::tree::OrientedTree;

pub use brute::{brute_force_contains, BRUTE_FORCE_LIMIT};
pub use trials::{
    parse_experiments, parse_experiments_seeded, run_trials, summarize, Target, TrialConfig, TrialReport, TrialSummary,
    CSV_HEADER,
};

/// Whether `phi` is a copy of `tree` in `d`: total, injective, in range, and
/// every tree edge `u → w` maps to a host edge `φ(u) → φ(w)`.
///
/// Reads only the plain map, so it checks injectivity itself.
pub fn verify_embedding(d: &Digraph, tree: &OrientedTree, phi: &Embedding) -> bool {
    let Some(map) = phi.to_vec() else {
        return false;
    };
    verify_map(d, tree, &map)
}

/// [`verify_embedding`] for a plain vector `map[u] = φ(u)`.
pub fn verify_map(d: &Digraph, tree: &OrientedTree, map: &[usize]) -> bool {
    if map.len() != tree.n() {
        return false;
    }
    let mut seen = vec![false; d.n()];
    for &x in map {
        if x >= d.n() || std::mem::replace(&mut seen[x], true) {
            return false;
        }
    }
    tree.edges().iter().all(|&(u, w)| d.has_edge(map[u], map[w]))
}
