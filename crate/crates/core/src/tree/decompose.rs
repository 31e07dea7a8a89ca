//! Layered decomposition `T0 ⊂ T1 ⊂ T2 ⊂ T3 = T` of a tree.
//!
//! * `T0` is a small core forest containing `t`.
//! * `T1` adds, for each core vertex, the subtrees hanging off it, each with
//!   at most `K` vertices and joined to the core by a single edge.
//! * `T2` adds trees `Q` of size between `k` and `K`, each joined to `T1`
//!   through two bare paths of length 2, `a - x - q` and `q' - y - b`.
//! * `T3 \ T2` is what hangs off the attachment vertices `x`, `y`.
//!
//! The construction strips independent leaves in rounds, drops the leaves of
//! what remains to get `S'`, and then cuts the long bare paths of `S'` into
//! consecutive pieces, each as large as `K` allows. Consecutive pieces on the
//! same bare path are separated by a single core vertex, which keeps the core
//! small when `k` is small compared to `1/η`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{maximal_bare_paths, OrientedTree};
use crate::digraph::{Sign, VertexSet};
use crate::error::{Error, Result};
use crate::params::ParamSchedule;

/// A subtree of `T1 \ T0` together with the core vertex it hangs from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarTree {
    /// The core vertex.
    pub center: usize,
    /// The neighbour of `center` inside the subtree.
    pub root: usize,
    /// `root ∈ N^sign(center)`.
    pub sign: Sign,
    /// All vertices of the subtree, sorted.
    pub vertices: Vec<usize>,
}

/// A tree `Q` joined to `T1` by the bare paths `x_anchor - x - (first of
/// path)` and `(last of path) - y - y_anchor`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathAttachment {
    pub x: usize,
    pub y: usize,
    pub x_anchor: usize,
    pub y_anchor: usize,
    /// The bare path from `x_anchor` to `y_anchor`.
    pub path: Vec<usize>,
    /// Vertices of `Q`, sorted: the path strictly between `x` and `y` plus
    /// everything hanging off it.
    pub q: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionStats {
    pub rounds: usize,
    pub strip_threshold: usize,
    pub stripped: usize,
    pub s_prime: usize,
    pub bare_walks: usize,
    pub pieces: usize,
    pub sizes: [usize; 4],
}

/// A failed structural property.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    #[error("P1: core has {size} vertices, limit {limit}")]
    CoreTooLarge { size: usize, limit: usize },
    #[error("P1: designated vertex {t} is not in the core")]
    TNotInCore { t: usize },
    #[error("P2: hanging tree at {root} has {size} vertices, limit {limit}")]
    StarTooLarge { root: usize, size: usize, limit: usize },
    #[error("P2: hanging tree at {root} meets the core through {edges} edges")]
    StarAttachment { root: usize, edges: usize },
    #[error("P3: path-attached tree at {x} has {size} vertices, outside [{min}, {max}]")]
    PathTreeSize {
        x: usize,
        size: usize,
        min: usize,
        max: usize,
    },
    #[error("P3: path-attached tree at {x} is not joined by two bare paths of length 2")]
    PathAttachment { x: usize },
    #[error("P3: vertex {vertex} of T2 \\ T1 belongs to no path-attached tree")]
    UncoveredPathVertex { vertex: usize },
    #[error("P4: {size} vertices outside T2, limit {limit}")]
    LeftoverTooLarge { size: usize, limit: usize },
    #[error("T2 is not connected")]
    T2Disconnected,
}

/// The decomposition: per-vertex layer plus the attachment records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub t: usize,
    /// Smallest `i` with the vertex in `Tᵢ`.
    pub layer: Vec<u8>,
    pub stars: Vec<StarTree>,
    pub path_trees: Vec<PathAttachment>,
    /// `T3 \ T2` in an order where every vertex comes after its neighbour
    /// towards `T2`.
    pub leftover: Vec<usize>,
    pub stats: DecompositionStats,
}

impl TreeDecomposition {
    /// Vertices of `Tᵢ`.
    pub fn layer_set(&self, i: u8) -> VertexSet {
        VertexSet::from_sorted((0..self.layer.len()).filter(|&v| self.layer[v] <= i).collect())
    }

    pub fn t0(&self) -> VertexSet {
        self.layer_set(0)
    }

    pub fn t1(&self) -> VertexSet {
        self.layer_set(1)
    }

    pub fn t2(&self) -> VertexSet {
        self.layer_set(2)
    }

    /// Checks the structural properties against `tree` with the given
    /// bounds, returning every failure.
    pub fn violations(&self, tree: &OrientedTree, eta: f64, k: usize, big_k: usize) -> Vec<Violation> {
        let n = tree.n();
        let layer = &self.layer;
        let mut out = Vec::new();
        let limit = (eta * n as f64).floor() as usize;
        let size0 = layer.iter().filter(|&&l| l == 0).count();
        if size0 > limit {
            out.push(Violation::CoreTooLarge { size: size0, limit });
        }
        if layer[self.t] != 0 {
            out.push(Violation::TNotInCore { t: self.t });
        }
        let is1: Vec<bool> = layer.iter().map(|&l| l == 1).collect();
        for comp in tree.components(&is1) {
            let edges: Vec<usize> = comp
                .iter()
                .flat_map(|&u| tree.neighbors(u).iter().map(|&(w, _)| w))
                .filter(|&w| layer[w] == 0)
                .collect();
            if comp.len() > big_k {
                out.push(Violation::StarTooLarge {
                    root: comp[0],
                    size: comp.len(),
                    limit: big_k,
                });
            }
            if edges.len() != 1 {
                out.push(Violation::StarAttachment {
                    root: comp[0],
                    edges: edges.len(),
                });
            }
        }
        let mut covered = vec![false; n];
        for pa in &self.path_trees {
            let size = pa.q.len();
            if size < k || size > big_k {
                out.push(Violation::PathTreeSize {
                    x: pa.x,
                    size,
                    min: k,
                    max: big_k,
                });
            }
            if !self.attachment_ok(tree, pa) {
                out.push(Violation::PathAttachment { x: pa.x });
            }
            for &v in pa.q.iter().chain([&pa.x, &pa.y]) {
                covered[v] = true;
            }
        }
        for v in 0..n {
            if layer[v] == 2 && !covered[v] {
                out.push(Violation::UncoveredPathVertex { vertex: v });
            }
        }
        let size3 = layer.iter().filter(|&&l| l == 3).count();
        if size3 > limit {
            out.push(Violation::LeftoverTooLarge { size: size3, limit });
        }
        let in2: Vec<bool> = layer.iter().map(|&l| l <= 2).collect();
        if tree.components(&in2).len() != 1 {
            out.push(Violation::T2Disconnected);
        }
        out
    }

    fn attachment_ok(&self, tree: &OrientedTree, pa: &PathAttachment) -> bool {
        let layer = &self.layer;
        let mut in_q = vec![false; tree.n()];
        for &v in &pa.q {
            in_q[v] = true;
        }
        if pa.x == pa.y || pa.q.is_empty() || pa.q.iter().any(|&v| layer[v] != 2) {
            return false;
        }
        if layer[pa.x] != 2 || layer[pa.y] != 2 || layer[pa.x_anchor] > 1 || layer[pa.y_anchor] > 1 {
            return false;
        }
        // x and y: exactly two neighbours in T2, one anchor and one in Q.
        for (v, anchor) in [(pa.x, pa.x_anchor), (pa.y, pa.y_anchor)] {
            let t2: Vec<usize> = tree
                .neighbors(v)
                .iter()
                .map(|&(w, _)| w)
                .filter(|&w| layer[w] <= 2)
                .collect();
            if t2.len() != 2 || !t2.contains(&anchor) || t2.iter().filter(|&&w| in_q[w]).count() != 1 {
                return false;
            }
        }
        // Q is connected and touches T2 outside itself only at x and y.
        let comps = tree.components(&in_q);
        if comps.len() != 1 {
            return false;
        }
        pa.q.iter().all(|&u| {
            tree.neighbors(u)
                .iter()
                .all(|&(w, _)| in_q[w] || layer[w] == 3 || w == pa.x || w == pa.y)
        })
    }
}

impl Serialize for TreeDecomposition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Dump<'a> {
            t: usize,
            t0: VertexSet,
            t1: VertexSet,
            t2: VertexSet,
            t3: VertexSet,
            stars: &'a [StarTree],
            path_trees: &'a [PathAttachment],
            leftover: &'a [usize],
            stats: &'a DecompositionStats,
        }
        Dump {
            t: self.t,
            t0: self.t0(),
            t1: self.t1(),
            t2: self.t2(),
            t3: VertexSet::range(self.layer.len()),
            stars: &self.stars,
            path_trees: &self.path_trees,
            leftover: &self.leftover,
            stats: &self.stats,
        }
        .serialize(serializer)
    }
}

/// Greedy maximal set of leaves, scanned by increasing id, no two of which
/// share a neighbour.
pub fn find_independent_leaves(tree: &OrientedTree) -> VertexSet {
    let alive = vec![true; tree.n()];
    let deg: Vec<usize> = (0..tree.n()).map(|v| tree.degree(v)).collect();
    VertexSet::from_sorted(independent_leaves_within(tree, &alive, &deg))
}

fn independent_leaves_within(tree: &OrientedTree, alive: &[bool], deg: &[usize]) -> Vec<usize> {
    let n = tree.n();
    let mut claimed = vec![false; n];
    let mut out = Vec::new();
    for v in 0..n {
        if !alive[v] || deg[v] != 1 {
            continue;
        }
        let w = tree
            .neighbors(v)
            .iter()
            .map(|&(w, _)| w)
            .find(|&w| alive[w])
            .expect("a leaf has a live neighbour");
        if !claimed[w] {
            claimed[w] = true;
            out.push(v);
        }
    }
    out
}

/// Decomposes `tree` around `t`, failing with the list of violated
/// properties if the schedule is too tight for this tree.
pub fn decompose(tree: &OrientedTree, t: usize, params: &ParamSchedule) -> Result<TreeDecomposition> {
    let d = decompose_lenient(tree, t, params)?;
    let violations = d.violations(tree, params.eta, params.k, params.big_k);
    if violations.is_empty() {
        Ok(d)
    } else {
        Err(Error::Decomposition { violations })
    }
}

/// Like [`decompose`] but returns the decomposition even when size bounds
/// fail. The layering is always nested, `T2` is always a tree and every
/// attachment record is structurally sound; only the size limits may be
/// exceeded.
pub fn decompose_lenient(tree: &OrientedTree, t: usize, params: &ParamSchedule) -> Result<TreeDecomposition> {
    let n = tree.n();
    if t >= n {
        return Err(Error::InvalidParameter(format!("t={t} out of range for n={n}")));
    }
    let k = params.k;
    let big_k = params.big_k;
    let cap = params.hang_cap();
    let window = params.path_end_window().max(1);
    let mut stats = DecompositionStats {
        strip_threshold: ((params.strip_eps() * n as f64).ceil() as usize).max(1),
        ..Default::default()
    };

    // Stripping rounds.
    let mut alive = vec![true; n];
    let mut deg: Vec<usize> = (0..n).map(|v| tree.degree(v)).collect();
    let remove = |v: usize, alive: &mut Vec<bool>, deg: &mut Vec<usize>| {
        alive[v] = false;
        for &(w, _) in tree.neighbors(v) {
            if alive[w] {
                deg[w] -= 1;
            }
        }
    };
    loop {
        let leaves = independent_leaves_within(tree, &alive, &deg);
        if leaves.len() < stats.strip_threshold {
            break;
        }
        let before = stats.stripped;
        for v in leaves.into_iter().filter(|&v| v != t) {
            remove(v, &mut alive, &mut deg);
            stats.stripped += 1;
        }
        if stats.stripped == before {
            break;
        }
        stats.rounds += 1;
    }
    // S' drops the remaining leaves, except t.
    let last_leaves: Vec<usize> = (0..n).filter(|&v| alive[v] && deg[v] == 1 && v != t).collect();
    if alive.iter().filter(|&&a| a).count() > 2 {
        for v in last_leaves {
            remove(v, &mut alive, &mut deg);
        }
    } else {
        // A single edge: keep only t.
        for v in last_leaves {
            alive[v] = false;
        }
    }
    let s_prime: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    stats.s_prime = s_prime.len();

    // For every vertex outside S', the S' vertex it hangs from and the top of
    // its hanging subtree.
    let mut owner = vec![usize::MAX; n];
    let mut top = vec![usize::MAX; n];
    let mut hang = vec![0usize; n];
    for &s in &s_prime {
        owner[s] = s;
    }
    for &s in &s_prime {
        for &(c, _) in tree.neighbors(s) {
            if alive[c] {
                continue;
            }
            let (comp, _) = tree.bfs_within(c, |w| !alive[w]);
            hang[s] += comp.len();
            for u in comp {
                owner[u] = s;
                top[u] = c;
            }
        }
    }

    // Cut the bare paths of S' into pieces.
    let (sub, labels) = tree.subtree(&s_prime)?;
    let t_sub = labels.binary_search(&t).expect("t survives stripping");
    let walks: Vec<Vec<usize>> = maximal_bare_paths(&sub, &[t_sub])
        .into_iter()
        .map(|w| w.into_iter().map(|v| labels[v]).collect())
        .collect();
    stats.bare_walks = walks.len();
    let mut layer = vec![0u8; n];
    let mut path_trees = Vec::new();
    for walk in &walks {
        for (p, r) in cut_walk(walk, &hang, k, big_k, cap, window) {
            let x = walk[p];
            let y = walk[r];
            layer[x] = 2;
            layer[y] = 2;
            for &v in &walk[p + 1..r] {
                layer[v] = 2;
            }
            path_trees.push(PathAttachment {
                x,
                y,
                x_anchor: walk[p - 1],
                y_anchor: walk[r + 1],
                path: walk[p - 1..=r + 1].to_vec(),
                q: Vec::new(),
            });
        }
    }
    stats.pieces = path_trees.len();

    // Vertices outside S' take their layer from their owner.
    let mut is_xy = vec![false; n];
    for pa in &path_trees {
        is_xy[pa.x] = true;
        is_xy[pa.y] = true;
    }
    for u in 0..n {
        if alive[u] {
            continue;
        }
        let o = owner[u];
        layer[u] = match layer[o] {
            0 => 1,
            _ if is_xy[o] => 3,
            _ => 2,
        };
    }
    // Faster membership for Q: the piece each path vertex belongs to.
    let mut piece_of = vec![usize::MAX; n];
    for (i, pa) in path_trees.iter().enumerate() {
        for &v in &pa.path[2..pa.path.len() - 2] {
            piece_of[v] = i;
        }
    }
    for u in 0..n {
        let o = owner[u];
        if o != usize::MAX && piece_of[o] != usize::MAX && layer[u] == 2 {
            path_trees[piece_of[o]].q.push(u);
        }
    }
    for pa in &mut path_trees {
        pa.q.sort_unstable();
    }

    let mut stars: Vec<StarTree> = Vec::new();
    let mut star_index = vec![usize::MAX; n];
    for u in 0..n {
        if layer[u] != 1 {
            continue;
        }
        let c = top[u];
        if star_index[c] == usize::MAX {
            star_index[c] = stars.len();
            let center = owner[u];
            stars.push(StarTree {
                center,
                root: c,
                sign: tree.sign_between(center, c).expect("top is adjacent to its owner"),
                vertices: Vec::new(),
            });
        }
        stars[star_index[c]].vertices.push(u);
    }

    // Leftover in BFS order from T2.
    let mut leftover = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut seen = vec![false; n];
    for pa in &path_trees {
        for v in [pa.x, pa.y] {
            queue.push_back(v);
            seen[v] = true;
        }
    }
    while let Some(u) = queue.pop_front() {
        for &(w, _) in tree.neighbors(u) {
            if layer[w] == 3 && !seen[w] {
                seen[w] = true;
                leftover.push(w);
                queue.push_back(w);
            }
        }
    }

    for l in 0..4u8 {
        stats.sizes[l as usize] = layer.iter().filter(|&&x| x <= l).count();
    }
    Ok(TreeDecomposition {
        t,
        layer,
        stars,
        path_trees,
        leftover,
        stats,
    })
}

/// Chooses pieces `(p, r)` on one maximal bare path: `walk[p]` and `walk[r]`
/// are the attachment vertices, `walk[p+1..r]` with its hanging subtrees is
/// `Q`. `walk[p-1]` and `walk[r+1]` stay in the core.
fn cut_walk(walk: &[usize], hang: &[usize], k: usize, big_k: usize, cap: usize, window: usize) -> Vec<(usize, usize)> {
    let len = walk.len();
    let mut out = Vec::new();
    if len < 5 {
        return out;
    }
    let last = len - 2; // last interior position
                        // prefix[i] = weight of walk[0..i].
    let mut prefix = vec![0usize; len + 1];
    for i in 0..len {
        prefix[i + 1] = prefix[i] + 1 + hang[walk[i]];
    }
    let q_weight = |p: usize, r: usize| prefix[r] - prefix[p + 1];
    let mut pos = 1;
    while pos + 2 <= last {
        // Attachment vertex x: cheapest in the window, counting both its
        // hanging subtree and the path vertices skipped into the core.
        let x = (pos..(pos + window).min(last - 1))
            .filter(|&p| hang[walk[p]] <= cap)
            .min_by_key(|&p| (hang[walk[p]] + (p - pos), p));
        let Some(p) = x else {
            pos += window;
            continue;
        };
        // Furthest end keeping |Q| ≤ K.
        let mut r_max = p + 2;
        while r_max < last && q_weight(p, r_max + 1) <= big_k {
            r_max += 1;
        }
        let y = (r_max.saturating_sub(window - 1).max(p + 2)..=r_max)
            .filter(|&r| hang[walk[r]] <= cap && q_weight(p, r) >= k && q_weight(p, r) <= big_k)
            .min_by_key(|&r| (hang[walk[r]] + (r_max - r), std::cmp::Reverse(r)));
        match y {
            Some(r) => {
                out.push((p, r));
                pos = r + 2;
            }
            None => pos = p + 1,
        }
    }
    out
}
