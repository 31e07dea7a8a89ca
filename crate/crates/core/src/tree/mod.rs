//! Oriented trees and their structural decompositions.
//!
//! Trees are unrooted; edge orientation is stored on the edges. Algorithms
//! that need a root (orderings, canonical forms, splits) take one as an
//! argument.

pub(crate) mod canon;
mod decompose;
mod generate;
mod order;
mod paths;
mod split;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::digraph::{Sign, VertexSet};
use crate::error::{Error, Result};

pub use canon::{canonical_order, canonical_rooted_form, canonical_unrooted_form, centers};
pub use decompose::{
    decompose, decompose_lenient, find_independent_leaves, DecompositionStats, PathAttachment, StarTree,
    TreeDecomposition, Violation,
};
pub use generate::{gen_random_tree, TreeFamily};
pub use order::{prefix_order, OrderPolicy, PrefixOrdering};
pub use paths::{bare_path_bound, find_bare_paths, find_bare_paths_avoiding, maximal_bare_paths, BarePath};
pub use split::{split_tree, split_tree_keeping, Split};

/// A tree on vertices `0..n` whose edges carry an orientation, with an
/// optional distinguished vertex `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedTree {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, Sign)>>,
    t: Option<usize>,
}

impl OrientedTree {
    /// Builds a tree from `(tail, head)` pairs, checking that the underlying
    /// graph is connected and acyclic.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTree("a tree needs at least one vertex".into()));
        }
        let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges on {n} vertices, expected {}",
                edges.len(),
                n - 1
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, w) in &edges {
            if u >= n || w >= n {
                return Err(Error::InvalidTree(format!("edge {u}->{w} out of range for n={n}")));
            }
            if u == w {
                return Err(Error::InvalidTree(format!("self-loop at {u}")));
            }
            adj[u].push((w, Sign::Plus));
            adj[w].push((u, Sign::Minus));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        edges.sort_unstable();
        let tree = OrientedTree { n, edges, adj, t: None };
        let reached = tree.bfs(0).0.len();
        if reached != n {
            return Err(Error::InvalidTree(format!(
                "underlying graph is disconnected ({reached} of {n} reachable)"
            )));
        }
        Ok(tree)
    }

    /// The single-vertex tree.
    pub fn singleton() -> Self {
        OrientedTree {
            n: 1,
            edges: Vec::new(),
            adj: vec![Vec::new()],
            t: None,
        }
    }

    /// Sets the distinguished vertex.
    pub fn with_t(mut self, t: usize) -> Result<Self> {
        if t >= self.n {
            return Err(Error::InvalidTree(format!("t={t} out of range for n={}", self.n)));
        }
        self.t = Some(t);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> Option<usize> {
        self.t
    }

    /// The distinguished vertex, or 0 when none is set.
    pub fn t_or_default(&self) -> usize {
        self.t.unwrap_or(0)
    }

    /// Edges as `(tail, head)`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbours of `u` as `(w, s)` with `w ∈ N^s(u)`, sorted by `w`.
    #[inline]
    pub fn neighbors(&self, u: usize) -> &[(usize, Sign)] {
        &self.adj[u]
    }

    /// Underlying (undirected) degree.
    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn semidegree(&self, u: usize, sign: Sign) -> usize {
        self.adj[u].iter().filter(|&&(_, s)| s == sign).count()
    }

    /// `(Δ⁺, Δ⁻)`.
    pub fn max_semidegree(&self) -> (usize, usize) {
        (0..self.n).fold((0, 0), |(o, i), u| {
            (
                o.max(self.semidegree(u, Sign::Plus)),
                i.max(self.semidegree(u, Sign::Minus)),
            )
        })
    }

    pub fn is_leaf(&self, u: usize) -> bool {
        self.adj[u].len() == 1
    }

    pub fn leaves(&self) -> VertexSet {
        VertexSet::from_sorted((0..self.n).filter(|&u| self.is_leaf(u)).collect())
    }

    /// The sign `s` with `w ∈ N^s(u)`, if `u` and `w` are adjacent.
    pub fn sign_between(&self, u: usize, w: usize) -> Option<Sign> {
        self.adj[u]
            .binary_search_by_key(&w, |&(x, _)| x)
            .ok()
            .map(|i| self.adj[u][i].1)
    }

    /// BFS order from `root` together with each vertex's parent.
    pub fn bfs(&self, root: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        self.bfs_within(root, |_| true)
    }

    /// BFS restricted to vertices accepted by `keep` (the root is always
    /// visited).
    pub(crate) fn bfs_within(&self, root: usize, keep: impl Fn(usize) -> bool) -> (Vec<usize>, Vec<Option<usize>>) {
        let mut parent = vec![None; self.n];
        let mut seen = vec![false; self.n];
        let mut order = Vec::new();
        seen[root] = true;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &(w, _) in &self.adj[u] {
                if !seen[w] && keep(w) {
                    seen[w] = true;
                    parent[w] = Some(u);
                    order.push(w);
                }
            }
        }
        (order, parent)
    }

    /// Connected components of the subgraph induced on vertices with
    /// `keep[v]`, each sorted.
    pub fn components(&self, keep: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if !keep[s] || seen[s] {
                continue;
            }
            let (mut comp, _) = self.bfs_within(s, |w| keep[w]);
            for &v in &comp {
                seen[v] = true;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// The subtree induced on `vertices`, relabelled to `0..len` in sorted
    /// order, with the map from new labels to old ones. Fails if the vertices
    /// do not induce a connected subgraph.
    pub fn subtree(&self, vertices: &[usize]) -> Result<(OrientedTree, Vec<usize>)> {
        let mut labels: Vec<usize> = vertices.to_vec();
        labels.sort_unstable();
        labels.dedup();
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in labels.iter().enumerate() {
            index[v] = i;
        }
        let edges: Vec<(usize, usize)> = labels
            .iter()
            .flat_map(|&u| {
                let index = &index;
                self.adj[u]
                    .iter()
                    .filter(move |&&(w, s)| s == Sign::Plus && index[w] != usize::MAX)
                    .map(move |&(w, _)| (index[u], index[w]))
            })
            .collect();
        let sub = OrientedTree::from_edges(labels.len(), edges)
            .map_err(|e| Error::InvalidTree(format!("vertex set does not induce a subtree: {e}")))?;
        Ok((sub, labels))
    }

    /// Canonical text form: `tree <n>` (plus ` t=<v>` when set) followed by
    /// sorted `u v` edge lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match self.t {
            Some(t) => {
                let _ = writeln!(s, "tree {} t={t}", self.n);
            }
            None => {
                let _ = writeln!(s, "tree {}", self.n);
            }
        }
        for &(u, w) in &self.edges {
            let _ = writeln!(s, "{u} {w}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut header: Option<(usize, Option<usize>)> = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if header.is_none() {
                if fields.first() != Some(&"tree") || fields.len() < 2 || fields.len() > 3 {
                    return Err(err("expected header `tree <n> [t=<vertex>]`".into()));
                }
                let n = fields[1]
                    .parse()
                    .map_err(|_| err(format!("bad vertex count `{}`", fields[1])))?;
                let t = match fields.get(2) {
                    None => None,
                    Some(f) => Some(
                        f.strip_prefix("t=")
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| err(format!("bad designated vertex `{f}`")))?,
                    ),
                };
                header = Some((n, t));
                continue;
            }
            if fields.len() != 2 {
                return Err(err(format!("expected `u v`, got `{line}`")));
            }
            let parse = |f: &str| f.parse::<usize>().map_err(|_| err(format!("bad vertex `{f}`")));
            edges.push((parse(fields[0])?, parse(fields[1])?));
        }
        let (n, t) = header.ok_or(Error::Parse {
            line: 0,
            msg: "empty input".into(),
        })?;
        let tree = OrientedTree::from_edges(n, edges)?;
        match t {
            Some(t) => tree.with_t(t),
            None => Ok(tree),
        }
    }
}

impl Serialize for OrientedTree {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            n: usize,
            t: Option<usize>,
            edges: &'a [(usize, usize)],
        }
        Repr {
            n: self.n,
            t: self.t,
            edges: &self.edges,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OrientedTree {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            n: usize,
            t: Option<usize>,
            edges: Vec<(usize, usize)>,
        }
        let r = Repr::deserialize(deserializer)?;
        let tree = OrientedTree::from_edges(r.n, r.edges).map_err(serde::de::Error::custom)?;
        match r.t {
            Some(t) => tree.with_t(t).map_err(serde::de::Error::custom),
            None => Ok(tree),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Directed path `0 → 1 → … → n-1`.
    pub(crate) fn dipath(n: usize) -> OrientedTree {
        OrientedTree::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    /// Out-star with centre 0.
    pub(crate) fn out_star(leaves: usize) -> OrientedTree {
        OrientedTree::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).unwrap()
    }

    #[test]
    fn semidegrees() {
        assert_eq!(dipath(4).max_semidegree(), (1, 1));
        // Each leaf of an out-star has in-degree 1.
        assert_eq!(out_star(5).max_semidegree(), (5, 1));
        // 0→1←2→3: vertex 2 has two out-neighbours, vertex 1 two in-neighbours.
        let anti = OrientedTree::from_edges(4, [(0, 1), (2, 1), (2, 3)]).unwrap();
        assert_eq!(anti.semidegree(2, Sign::Plus), 2);
        assert_eq!(anti.semidegree(1, Sign::Minus), 2);
        assert_eq!(anti.max_semidegree(), (2, 2));
    }

    #[test]
    fn rejects_non_trees() {
        assert!(OrientedTree::from_edges(3, [(0, 1)]).is_err());
        assert!(OrientedTree::from_edges(4, [(0, 1), (1, 0), (2, 3)]).is_err());
        assert!(OrientedTree::from_edges(3, [(0, 0), (1, 2)]).is_err());
        assert!(OrientedTree::from_edges(0, []).is_err());
        assert!(OrientedTree::from_edges(1, []).is_ok());
    }

    #[test]
    fn text_round_trip() {
        let tree = OrientedTree::from_edges(4, [(2, 1), (0, 1), (1, 3)])
            .unwrap()
            .with_t(2)
            .unwrap();
        let text = tree.to_text();
        assert_eq!(text, "tree 4 t=2\n0 1\n1 3\n2 1\n");
        assert_eq!(OrientedTree::from_text(&text).unwrap(), tree);
        assert!(OrientedTree::from_text("tree 3 x=1\n0 1\n1 2\n").is_err());
        assert!(OrientedTree::from_text("tree 3\n0 1\n").is_err());
        let json = serde_json::to_string(&tree).unwrap();
        let back: OrientedTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tree);
    }

    #[test]
    fn subtree_extraction() {
        let p = dipath(6);
        let (sub, map) = p.subtree(&[2, 3, 4]).unwrap();
        assert_eq!(map, vec![2, 3, 4]);
        assert_eq!(sub.edges(), &[(0, 1), (1, 2)]);
        assert!(p.subtree(&[1, 3]).is_err());
    }

    #[test]
    fn components_of_induced_forest() {
        let p = dipath(7);
        let keep: Vec<bool> = (0..7).map(|v| v != 3).collect();
        assert_eq!(p.components(&keep), vec![vec![0, 1, 2], vec![4, 5, 6]]);
    }
}
