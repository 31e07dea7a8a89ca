//! Splitting a tree into two edge-disjoint subtrees, one of controlled size.

use serde::{Deserialize, Serialize};

use super::OrientedTree;
use crate::digraph::VertexSet;
use crate::error::{Error, Result};

/// Two subtrees covering every edge exactly once and sharing one vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    /// The larger side.
    pub first: VertexSet,
    /// The side with `m ≤ |second| ≤ 3m`.
    pub second: VertexSet,
    pub shared: usize,
}

/// Splits `tree` into edge-disjoint subtrees `T1`, `T2` sharing one vertex
/// with `m ≤ |T2| ≤ 3m`. Requires `1 ≤ m ≤ |T|/3`. Rooted at the tree's
/// designated vertex (or 0), which always lands in `T1`.
pub fn split_tree(tree: &OrientedTree, m: usize) -> Result<Split> {
    split_tree_keeping(tree, m, tree.t_or_default())
}

/// Like [`split_tree`], with `keep` guaranteed to lie in `T1` (possibly as
/// the shared vertex).
///
/// Walks down from `keep` while some child subtree has at least `m`
/// vertices, stopping at a vertex `u` all of whose child subtrees are smaller
/// than `m`. Whole child subtrees of `u` are then collected until their total
/// reaches `m - 1`, so `T2` has between `m` and `2m - 1` vertices.
pub fn split_tree_keeping(tree: &OrientedTree, m: usize, keep: usize) -> Result<Split> {
    let n = tree.n();
    if m == 0 || 3 * m > n {
        return Err(Error::InvalidParameter(format!(
            "split size m={m} must satisfy 1 ≤ m ≤ n/3 with n={n}"
        )));
    }
    if keep >= n {
        return Err(Error::InvalidParameter(format!("vertex {keep} out of range")));
    }
    let (order, parent) = tree.bfs(keep);
    let mut size = vec![1usize; n];
    for &v in order.iter().rev() {
        if let Some(p) = parent[v] {
            size[p] += size[v];
        }
    }
    let parent = &parent;
    let children = |u: usize| {
        tree.neighbors(u)
            .iter()
            .map(|&(w, _)| w)
            .filter(move |&w| parent[w] == Some(u))
    };
    let mut u = keep;
    while let Some(c) = children(u)
        .filter(|&c| size[c] >= m)
        .max_by_key(|&c| (size[c], std::cmp::Reverse(c)))
    {
        u = c;
    }
    let mut chosen = Vec::new();
    let mut total = 1;
    for c in children(u) {
        if total >= m {
            break;
        }
        chosen.push(c);
        total += size[c];
    }
    let mut in_second = vec![false; n];
    in_second[u] = true;
    let mut stack = chosen;
    while let Some(v) = stack.pop() {
        in_second[v] = true;
        stack.extend(children(v));
    }
    let second: VertexSet = (0..n).filter(|&v| in_second[v]).collect();
    let first: VertexSet = (0..n).filter(|&v| !in_second[v] || v == u).collect();
    debug_assert!(second.len() >= m && second.len() < 2 * m.max(1) + 1);
    Ok(Split {
        first,
        second,
        shared: u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::tests::{dipath, out_star};
    use crate::tree::{gen_random_tree, TreeFamily};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check(tree: &OrientedTree, m: usize, split: &Split) {
        assert!(split.second.len() >= m && split.second.len() <= 3 * m);
        assert_eq!(split.first.len() + split.second.len(), tree.n() + 1);
        let shared: Vec<usize> = split
            .first
            .iter()
            .copied()
            .filter(|&v| split.second.contains(v))
            .collect();
        assert_eq!(shared, vec![split.shared]);
        // Each side is a subtree; induced edges partition the edge set.
        let (a, _) = tree.subtree(&split.first).unwrap();
        let (b, _) = tree.subtree(&split.second).unwrap();
        assert_eq!(a.edges().len() + b.edges().len(), tree.edges().len());
    }

    #[test]
    fn path_and_star() {
        let p = dipath(12);
        check(&p, 3, &split_tree(&p, 3).unwrap());
        let s = out_star(11);
        let split = split_tree_keeping(&s, 3, 5).unwrap();
        check(&s, 3, &split);
        assert_eq!(split.shared, 0);
        assert!(split.first.contains(5));
        assert!(split_tree(&p, 5).is_err());
        assert!(split_tree(&p, 0).is_err());
        let split = split_tree(&p, 4).unwrap();
        assert!(split.second.len() <= 12);
    }

    proptest! {
        #[test]
        fn bounds_hold(seed in any::<u64>(), n in 3usize..300, frac in 0.0f64..1.0, keep_pick in any::<usize>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tree = gen_random_tree(n, 3, TreeFamily::Uniform, &mut rng).unwrap();
            let m = 1 + ((n / 3 - 1) as f64 * frac) as usize;
            let keep = keep_pick % n;
            let split = split_tree_keeping(&tree, m, keep).unwrap();
            check(&tree, m, &split);
            prop_assert!(split.first.contains(keep));
        }
    }
}
