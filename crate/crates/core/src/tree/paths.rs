//! Bare paths: paths whose interior vertices have degree 2 in the tree.

use serde::{Deserialize, Serialize};

use super::OrientedTree;

/// A path given by its vertex sequence; its length is the number of edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarePath {
    pub vertices: Vec<usize>,
}

impl BarePath {
    pub fn length(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.vertices[0], *self.vertices.last().expect("non-empty path"))
    }

    pub fn interior(&self) -> &[usize] {
        let len = self.vertices.len();
        if len <= 2 {
            &[]
        } else {
            &self.vertices[1..len - 1]
        }
    }

    /// Whether the path is a bare path of `tree`: consecutive vertices are
    /// adjacent and every interior vertex has degree 2.
    pub fn is_bare_in(&self, tree: &OrientedTree) -> bool {
        self.vertices
            .windows(2)
            .all(|w| tree.sign_between(w[0], w[1]).is_some())
            && self.interior().iter().all(|&v| tree.degree(v) == 2)
    }
}

/// The bound `6mt + 2|T|/(m+1)` on the number of vertices left after deleting
/// the interiors of the paths returned by [`find_bare_paths`], where `t` is
/// the number of leaves.
pub fn bare_path_bound(tree: &OrientedTree, m: usize) -> f64 {
    let leaves = tree.leaves().len();
    6.0 * (m * leaves) as f64 + 2.0 * tree.n() as f64 / (m + 1) as f64
}

/// All maximal bare paths: walks between consecutive vertices of degree
/// other than 2, where vertices in `breaks` also end a walk. Every edge of the
/// tree lies on exactly one returned path. A tree that is a single vertex has
/// no paths.
pub fn maximal_bare_paths(tree: &OrientedTree, breaks: &[usize]) -> Vec<Vec<usize>> {
    let n = tree.n();
    let mut is_break = vec![false; n];
    for &b in breaks {
        is_break[b] = true;
    }
    let stop = |v: usize| is_break[v] || tree.degree(v) != 2;
    let mut paths = Vec::new();
    for a in (0..n).filter(|&a| stop(a)) {
        for &(first, _) in tree.neighbors(a) {
            let mut walk = vec![a, first];
            while !stop(*walk.last().unwrap()) {
                let len = walk.len();
                let (cur, prev) = (walk[len - 1], walk[len - 2]);
                let next = tree.neighbors(cur).iter().map(|&(w, _)| w).find(|&w| w != prev);
                walk.push(next.expect("degree-2 vertex has two neighbours"));
            }
            // Each path is found once from each end; keep the lexicographically
            // smaller orientation.
            let rev_key = (walk[walk.len() - 1], walk[walk.len() - 2]);
            if (walk[0], walk[1]) <= rev_key {
                paths.push(walk);
            }
        }
    }
    // Cycles are impossible in a tree, so if no stop vertex exists the tree
    // is empty of edges.
    paths
}

/// Vertex-disjoint bare paths of length exactly `m`.
///
/// Each maximal bare path with `L` edges is cut into `⌊(L+1)/(m+1)⌋`
/// consecutive length-`m` pieces; a piece is skipped when it would share an
/// endpoint with a piece already taken from another maximal path. The bound of
/// [`bare_path_bound`] is asserted on every call.
pub fn find_bare_paths(tree: &OrientedTree, m: usize) -> Vec<BarePath> {
    let paths = find_bare_paths_avoiding(tree, m, &[]);
    let removed: usize = paths.iter().map(|p| p.interior().len()).sum();
    let left = tree.n() - removed;
    // The bound presumes at least two leaves, which fails only for n = 1.
    assert!(
        tree.n() < 2 || left as f64 <= bare_path_bound(tree, m) + 1e-9,
        "bare path bound violated: {left} vertices left"
    );
    paths
}

/// Like [`find_bare_paths`], but no returned path contains a vertex of
/// `avoid`.
pub fn find_bare_paths_avoiding(tree: &OrientedTree, m: usize, avoid: &[usize]) -> Vec<BarePath> {
    assert!(m >= 2, "bare paths need length at least 2");
    let mut used = vec![false; tree.n()];
    for &a in avoid {
        used[a] = true;
    }
    let mut out = Vec::new();
    for walk in maximal_bare_paths(tree, avoid) {
        // Drop avoided endpoints so no piece touches them.
        let lo = usize::from(avoid.contains(&walk[0]));
        let hi = walk.len() - usize::from(avoid.contains(&walk[walk.len() - 1]));
        if hi <= lo {
            continue;
        }
        let segment = &walk[lo..hi];
        let pieces = segment.len() / (m + 1);
        for p in 0..pieces {
            let piece = &segment[p * (m + 1)..p * (m + 1) + m + 1];
            if piece.iter().any(|&v| used[v]) {
                continue;
            }
            for &v in piece {
                used[v] = true;
            }
            out.push(BarePath {
                vertices: piece.to_vec(),
            });
        }
    }
    out
}
