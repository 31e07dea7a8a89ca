//! Directed bipartite matchings with Hall certificates.
//!
//! A ◇-matching from `A` into `B` is a set of disjoint edges each running
//! from a vertex `a ∈ A` to a vertex `b ∈ N^◇(a)`. Patterns are stored with
//! local indices on both sides; labels map them back to host vertices.

mod copies;

use serde::{Deserialize, Serialize};

use crate::digraph::{Digraph, Sign, VertexSet};
use crate::error::{Error, Result};

pub use copies::{chain_copies, embed_small_forest, embed_small_forest_in, embed_tree_copies, ForestReport};

/// A bipartite pattern between labelled sides `A` (left) and `B` (right).
/// `adj[i]` lists the right indices `j` with `right[j] ∈ N^sign(left[i])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartitePattern {
    left: Vec<usize>,
    right: Vec<usize>,
    sign: Sign,
    adj: Vec<Vec<usize>>,
}

impl BipartitePattern {
    /// The pattern of ◇-edges of `d` from `a` into `b`. The sides must be
    /// disjoint.
    pub fn from_digraph(d: &Digraph, a: &VertexSet, b: &VertexSet, sign: Sign) -> Result<Self> {
        if !a.is_disjoint(b) {
            return Err(Error::MatchingPrecondition("pattern sides overlap".into()));
        }
        let mut index = vec![usize::MAX; d.n()];
        for (j, &w) in b.iter().enumerate() {
            index[w] = j;
        }
        let adj = a
            .iter()
            .map(|&v| {
                let row = d.neighbor_bits(v, sign);
                // Scan whichever side is smaller.
                if b.len() < d.degree(v, sign) {
                    b.iter()
                        .enumerate()
                        .filter(|&(_, &w)| row.contains(w))
                        .map(|(j, _)| j)
                        .collect()
                } else {
                    let mut r: Vec<usize> = d
                        .neighbors_of(v, sign)
                        .iter()
                        .filter(|&&w| index[w] != usize::MAX)
                        .map(|&w| index[w])
                        .collect();
                    r.sort_unstable();
                    r
                }
            })
            .collect();
        Ok(BipartitePattern {
            left: a.to_vec(),
            right: b.to_vec(),
            sign,
            adj,
        })
    }

    /// A synthetic pattern from labelled edges `(a, b)`. Labels on the two
    /// sides are independent namespaces.
    pub fn from_edges(
        left: Vec<usize>,
        right: Vec<usize>,
        sign: Sign,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let find = |side: &[usize], x: usize, what: &str| {
            side.iter()
                .position(|&y| y == x)
                .ok_or_else(|| Error::MatchingPrecondition(format!("{what} endpoint {x} is not in the pattern")))
        };
        let mut adj = vec![Vec::new(); left.len()];
        for (a, b) in edges {
            let i = find(&left, a, "left")?;
            let j = find(&right, b, "right")?;
            adj[i].push(j);
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        Ok(BipartitePattern { left, right, sign, adj })
    }

    /// A pattern on local indices `0..n_left` and `0..n_right`.
    pub fn from_local(n_left: usize, n_right: usize, sign: Sign, mut adj: Vec<Vec<usize>>) -> Self {
        assert_eq!(adj.len(), n_left, "one adjacency row per left vertex");
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
            assert!(row.last().is_none_or(|&j| j < n_right), "right index out of range");
        }
        BipartitePattern {
            left: (0..n_left).collect(),
            right: (0..n_right).collect(),
            sign,
            adj,
        }
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// Right indices adjacent to left index `i`.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// `d^◇(a, B)` for every left vertex.
    pub fn left_degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    /// `d^∘(b, A)` (with `∘ ≠ ◇`) for every right vertex.
    pub fn right_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.right.len()];
        for row in &self.adj {
            for &j in row {
                deg[j] += 1;
            }
        }
        deg
    }
}

/// A set of disjoint pattern edges, by label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub sign: Option<Sign>,
    /// `(a, b)` pairs sorted by `a`.
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The partner of left label `a`.
    pub fn partner(&self, a: usize) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&a, |&(x, _)| x)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    /// Whether every left vertex of `p` is matched.
    pub fn covers_left(&self, p: &BipartitePattern) -> bool {
        self.pairs.len() == p.left.len()
    }

    /// Whether this is a matching of `p`: disjoint pairs, all pattern edges.
    pub fn is_valid_for(&self, p: &BipartitePattern) -> bool {
        let mut seen_a = std::collections::HashSet::new();
        let mut seen_b = std::collections::HashSet::new();
        self.pairs.iter().all(|&(a, b)| {
            let Some(i) = p.left.iter().position(|&x| x == a) else {
                return false;
            };
            let Some(j) = p.right.iter().position(|&y| y == b) else {
                return false;
            };
            seen_a.insert(a) && seen_b.insert(b) && p.adj[i].binary_search(&j).is_ok()
        })
    }

    /// One `a b` line per pair, sorted by `a`.
    pub fn to_text(&self) -> String {
        self.pairs.iter().map(|(a, b)| format!("{a} {b}\n")).collect()
    }
}

/// Hopcroft–Karp on local indices. Returns `mate_left[i]`.
fn hopcroft_karp(n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut mate_l: Vec<Option<usize>> = vec![None; n_left];
    let mut mate_r: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![u32::MAX; n_left];
    // Cheap greedy start.
    for i in 0..n_left {
        if let Some(&j) = adj[i].iter().find(|&&j| mate_r[j].is_none()) {
            mate_l[i] = Some(j);
            mate_r[j] = Some(i);
        }
    }
    let mut queue = Vec::with_capacity(n_left);
    loop {
        // BFS layering from free left vertices.
        queue.clear();
        for i in 0..n_left {
            if mate_l[i].is_none() {
                dist[i] = 0;
                queue.push(i);
            } else {
                dist[i] = u32::MAX;
            }
        }
        let mut found = false;
        let mut head = 0;
        while head < queue.len() {
            let i = queue[head];
            head += 1;
            for &j in &adj[i] {
                match mate_r[j] {
                    None => found = true,
                    Some(i2) if dist[i2] == u32::MAX => {
                        dist[i2] = dist[i] + 1;
                        queue.push(i2);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }
        // Iterative DFS along the layers.
        let mut next = vec![0usize; n_left];
        for start in 0..n_left {
            if mate_l[start].is_some() {
                continue;
            }
            let mut stack = vec![start];
            while let Some(&i) = stack.last() {
                if next[i] == adj[i].len() {
                    dist[i] = u32::MAX;
                    stack.pop();
                    continue;
                }
                let j = adj[i][next[i]];
                next[i] += 1;
                match mate_r[j] {
                    None => {
                        // Augment along the stack.
                        let mut j = j;
                        while let Some(i) = stack.pop() {
                            let prev = mate_l[i];
                            mate_l[i] = Some(j);
                            mate_r[j] = Some(i);
                            match prev {
                                Some(p) => j = p,
                                None => break,
                            }
                        }
                        stack.clear();
                    }
                    Some(i2) if dist[i2] == dist[i] + 1 => stack.push(i2),
                    Some(_) => {}
                }
            }
        }
    }
    mate_l
}

fn to_matching(p: &BipartitePattern, mate: &[Option<usize>]) -> Matching {
    let mut pairs: Vec<(usize, usize)> = mate
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|j| (p.left[i], p.right[j])))
        .collect();
    pairs.sort_unstable();
    Matching {
        sign: Some(p.sign),
        pairs,
    }
}

/// A maximum-cardinality matching, deterministic given the pattern.
pub fn max_matching(p: &BipartitePattern) -> Matching {
    to_matching(p, &hopcroft_karp(p.right.len(), &p.adj))
}

/// Left vertices reachable by alternating paths from unmatched left vertices,
/// given a maximum matching. Their neighbourhood is matched into the set
/// itself, so it is smaller than the set whenever some left vertex is free.
fn violator_from(p: &BipartitePattern, mate_l: &[Option<usize>]) -> Option<VertexSet> {
    let mut mate_r = vec![None; p.right.len()];
    for (i, m) in mate_l.iter().enumerate() {
        if let Some(j) = *m {
            mate_r[j] = Some(i);
        }
    }
    let mut seen_l = vec![false; p.left.len()];
    let mut seen_r = vec![false; p.right.len()];
    let mut stack: Vec<usize> = (0..p.left.len()).filter(|&i| mate_l[i].is_none()).collect();
    if stack.is_empty() {
        return None;
    }
    for &i in &stack {
        seen_l[i] = true;
    }
    while let Some(i) = stack.pop() {
        for &j in &p.adj[i] {
            if seen_r[j] {
                continue;
            }
            seen_r[j] = true;
            let i2 = mate_r[j].expect("maximum matching leaves no augmenting path");
            if !seen_l[i2] {
                seen_l[i2] = true;
                stack.push(i2);
            }
        }
    }
    Some((0..p.left.len()).filter(|&i| seen_l[i]).map(|i| p.left[i]).collect())
}

/// A set `S ⊆ A` with `|N^◇(S, B)| < |S|`, or `None` if some matching
/// covers `A`.
pub fn hall_violator(p: &BipartitePattern) -> Option<VertexSet> {
    violator_from(p, &hopcroft_karp(p.right.len(), &p.adj))
}

/// `N^◇(S, B)` for a set of left labels.
pub fn neighborhood(p: &BipartitePattern, s: &VertexSet) -> VertexSet {
    p.left
        .iter()
        .enumerate()
        .filter(|&(_, a)| s.contains(*a))
        .flat_map(|(i, _)| p.adj[i].iter().map(|&j| p.right[j]))
        .collect()
}

/// Whether every left vertex has at least `a` pattern neighbours and every
/// right vertex at most `b`.
pub fn is_skew_bounded(p: &BipartitePattern, a: usize, b: usize) -> bool {
    p.adj.iter().all(|row| row.len() >= a) && p.right_degrees().into_iter().all(|d| d <= b)
}

/// A matching covering `A` for an `(a, b)`-skew-bounded pattern with
/// `a ≥ b ≥ 1`.
///
/// # Panics
/// If no covering matching exists although the pattern is skew-bounded:
/// double counting edges from any `S ⊆ A` forbids that, so it would be a bug.
pub fn matching_from_skew(p: &BipartitePattern, a: usize, b: usize) -> Result<Matching> {
    if a < b {
        return Err(Error::MatchingPrecondition(format!("a={a} is smaller than b={b}")));
    }
    if !is_skew_bounded(p, a, b) {
        return Err(Error::MatchingPrecondition(format!(
            "pattern is not ({a}, {b})-skew-bounded"
        )));
    }
    let m = max_matching(p);
    assert!(
        m.covers_left(p),
        "skew-bounded pattern without a covering matching ({} of {})",
        m.len(),
        p.left.len()
    );
    Ok(m)
}

/// A perfect ◇-matching from `a` into `b` in `d`, or the Hall violator.
pub fn find_perfect_matching(d: &Digraph, a: &VertexSet, b: &VertexSet, sign: Sign) -> Result<Matching> {
    if a.len() != b.len() {
        return Err(Error::MatchingPrecondition(format!(
            "|A|={} differs from |B|={}",
            a.len(),
            b.len()
        )));
    }
    let p = BipartitePattern::from_digraph(d, a, b, sign)?;
    covering_matching(&p)
}

/// A matching covering the left side of `p`, or its Hall violator.
pub fn covering_matching(p: &BipartitePattern) -> Result<Matching> {
    let mate = hopcroft_karp(p.right.len(), &p.adj);
    match violator_from(p, &mate) {
        None => Ok(to_matching(p, &mate)),
        Some(violator) => Err(Error::NoPerfectMatching { violator }),
    }
}
