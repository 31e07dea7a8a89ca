//! Dense host digraphs.
//!
//! A [`Digraph`] keeps each neighbourhood twice: as a sorted vertex list for
//! iteration and as a bitset row for constant-time membership and fast
//! intersection counts. The embedding phases spend most of their time
//! intersecting two or three neighbourhoods, which is a word-wise `AND` on the
//! bitset rows.

use std::fmt::{self, Write as _};
use std::ops::Deref;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direction of an edge relative to a vertex: `Plus` for out-neighbours,
/// `Minus` for in-neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    #[inline]
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    #[inline]
    pub(crate) fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A sorted set of vertex ids without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(Vec::new())
    }

    /// Builds a set from vertices that are already sorted and distinct.
    pub(crate) fn from_sorted(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        VertexSet(v)
    }

    pub fn range(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    /// Elements of `self` not in `other`.
    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.0.iter().chain(other.0.iter()).copied().collect()
    }

    pub fn to_bitset(&self, n: usize) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(n);
        for &v in &self.0 {
            b.insert(v);
        }
        b
    }
}

impl Deref for VertexSet {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// A simple digraph on vertices `0..n`: no loops, at most one edge per ordered
/// pair. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Digraph {
    n: usize,
    adj: [Vec<Vec<usize>>; 2],
    bits: [Vec<FixedBitSet>; 2],
}

impl PartialEq for Digraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.adj[0] == other.adj[0]
    }
}

impl Eq for Digraph {}

impl Digraph {
    /// Builds a digraph from an edge list. Rejects loops, duplicate edges and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out_bits = vec![FixedBitSet::with_capacity(n); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge {u}->{v} out of range for n={n}")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            if out_bits[u].put(v) {
                return Err(Error::InvalidGraph(format!("duplicate edge {u}->{v}")));
            }
        }
        Ok(Self::from_out_bits(out_bits))
    }

    fn from_out_bits(out_bits: Vec<FixedBitSet>) -> Self {
        let n = out_bits.len();
        let mut in_bits = vec![FixedBitSet::with_capacity(n); n];
        let mut out_adj = Vec::with_capacity(n);
        let mut in_adj = vec![Vec::new(); n];
        for (u, row) in out_bits.iter().enumerate() {
            let outs: Vec<usize> = row.ones().collect();
            for &v in &outs {
                in_bits[v].insert(u);
                in_adj[v].push(u);
            }
            out_adj.push(outs);
        }
        Digraph {
            n,
            adj: [out_adj, in_adj],
            bits: [out_bits, in_bits],
        }
    }

    /// The complete digraph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let rows = (0..n)
            .map(|u| {
                let mut b = FixedBitSet::with_capacity(n);
                b.insert_range(..);
                b.set(u, false);
                b
            })
            .collect();
        Self::from_out_bits(rows)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::range(self.n)
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[0][u].contains(v)
    }

    /// Whether `w` is a `sign`-neighbour of `v`, i.e. `w ∈ N^sign(v)`.
    #[inline]
    pub fn is_neighbor(&self, v: usize, sign: Sign, w: usize) -> bool {
        self.bits[sign.index()][v].contains(w)
    }

    /// Sorted `sign`-neighbours of `v`.
    #[inline]
    pub fn neighbors_of(&self, v: usize, sign: Sign) -> &[usize] {
        &self.adj[sign.index()][v]
    }

    /// Bitset row of `N^sign(v)`.
    #[inline]
    pub fn neighbor_bits(&self, v: usize, sign: Sign) -> &FixedBitSet {
        &self.bits[sign.index()][v]
    }

    #[inline]
    pub fn degree(&self, v: usize, sign: Sign) -> usize {
        self.adj[sign.index()][v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj[0].iter().map(Vec::len).sum()
    }

    /// All edges sorted by `(tail, head)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj[0]
            .iter()
            .enumerate()
            .flat_map(|(u, outs)| outs.iter().map(move |&v| (u, v)))
    }

    /// Smallest in- or out-degree over all vertices.
    pub fn min_semidegree(&self) -> usize {
        (0..self.n)
            .flat_map(|v| Sign::BOTH.map(|s| self.degree(v, s)))
            .min()
            .unwrap_or(0)
    }

    /// `N^sign(v) ∩ restrict`.
    pub fn neighbors(&self, v: usize, sign: Sign, restrict: &VertexSet) -> VertexSet {
        let row = self.neighbor_bits(v, sign);
        VertexSet::from_sorted(restrict.iter().copied().filter(|&w| row.contains(w)).collect())
    }

    /// `|N^sign(v) ∩ restrict|` where `restrict` is a bitset.
    #[inline]
    pub fn degree_into(&self, v: usize, sign: Sign, restrict: &FixedBitSet) -> usize {
        self.neighbor_bits(v, sign).intersection_count(restrict)
    }

    /// The subgraph induced on `keep`, relabelled to `0..keep.len()` in the
    /// order of `keep`.
    pub fn induced(&self, keep: &VertexSet) -> Digraph {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let m = keep.len();
        let rows = keep
            .iter()
            .map(|&u| {
                let mut b = FixedBitSet::with_capacity(m);
                for &w in self.neighbors_of(u, Sign::Plus) {
                    if index[w] != usize::MAX {
                        b.insert(index[w]);
                    }
                }
                b
            })
            .collect();
        Self::from_out_bits(rows)
    }

    /// Canonical text form: `digraph <n>` followed by one `u v` line per edge
    /// in `(u, v)` order.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(16 + self.edge_count() * 10);
        let _ = writeln!(s, "digraph {}", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: i + 1, msg };
            let mut fields = line.split_whitespace();
            match n {
                None => {
                    if fields.next() != Some("digraph") {
                        return Err(parse_err("expected header `digraph <n>`".into()));
                    }
                    let count = fields
                        .next()
                        .and_then(|f| f.parse().ok())
                        .ok_or_else(|| parse_err("missing vertex count".into()))?;
                    if fields.next().is_some() {
                        return Err(parse_err("trailing fields in header".into()));
                    }
                    n = Some(count);
                }
                Some(_) => {
                    let mut next = || -> Result<usize> {
                        fields
                            .next()
                            .and_then(|f| f.parse().ok())
                            .ok_or_else(|| parse_err(format!("expected `u v`, got `{line}`")))
                    };
                    let (u, v) = (next()?, next()?);
                    if fields.next().is_some() {
                        return Err(parse_err(format!("trailing fields in `{line}`")));
                    }
                    edges.push((u, v));
                }
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "empty input".into(),
        })?;
        Digraph::from_edges(n, edges)
    }
}

/// Smallest in- or out-degree of `d`.
pub fn min_semidegree(d: &Digraph) -> usize {
    d.min_semidegree()
}

/// The semidegree a host on `n` vertices needs for margin `alpha`:
/// `⌈(1/2 + alpha) n⌉`.
pub fn semidegree_target(n: usize, alpha: f64) -> usize {
    ((0.5 + alpha) * n as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Random digraph with `δ⁰ ≥ ⌈(1/2+α)n⌉`.
///
/// Each ordered pair is included independently with probability
/// `min(1, 1/2 + 2α)`; vertices that fall short are then repaired by adding
/// uniformly chosen missing edges. Repairs only ever add edges, so one pass
/// over out-degrees and one over in-degrees suffices.
pub fn gen_semidegree_digraph<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<Digraph> {
    gen_semidegree_digraph_with_density(n, alpha, 0.5 + 2.0 * alpha, rng)
}

/// Like [`gen_semidegree_digraph`] but with an explicit edge probability, so
/// tests can build hosts that sit close to the semidegree threshold.
pub fn gen_semidegree_digraph_with_density<R: Rng + ?Sized>(
    n: usize,
    alpha: f64,
    density: f64,
    rng: &mut R,
) -> Result<Digraph> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1/2), got {alpha}"
        )));
    }
    if n < 4 {
        return Err(Error::InvalidParameter(format!("n must be at least 4, got {n}")));
    }
    let target = semidegree_target(n, alpha);
    if target > n - 1 {
        return Err(Error::Unrepairable {
            vertex: 0,
            target,
            max: n - 1,
        });
    }
    let density = density.clamp(0.0, 1.0);
    let mut out = vec![FixedBitSet::with_capacity(n); n];
    for (u, row) in out.iter_mut().enumerate() {
        for v in 0..n {
            if u != v && rng.gen_bool(density) {
                row.insert(v);
            }
        }
    }
    for v in 0..n {
        let deg = out[v].count_ones(..);
        if deg < target {
            let mut missing: Vec<usize> = (0..n).filter(|&w| w != v && !out[v].contains(w)).collect();
            missing.shuffle(rng);
            for &w in &missing[..target - deg] {
                out[v].insert(w);
            }
        }
    }
    let mut indeg = vec![0usize; n];
    for row in &out {
        for w in row.ones() {
            indeg[w] += 1;
        }
    }
    for v in 0..n {
        if indeg[v] < target {
            let mut missing: Vec<usize> = (0..n).filter(|&u| u != v && !out[u].contains(v)).collect();
            missing.shuffle(rng);
            for &u in &missing[..target - indeg[v]] {
                out[u].insert(v);
            }
            indeg[v] = target;
        }
    }
    Ok(Digraph::from_out_bits(out))
}

/// Pairwise-disjoint uniformly random subsets of `V(d)` with the given sizes.
pub fn sample_disjoint_subsets<R: Rng + ?Sized>(d: &Digraph, sizes: &[usize], rng: &mut R) -> Result<Vec<VertexSet>> {
    sample_disjoint_from(&d.vertices(), sizes, rng)
}

/// Pairwise-disjoint uniformly random subsets of `universe`, obtained by
/// slicing a uniform permutation into consecutive blocks.
pub fn sample_disjoint_from<R: Rng + ?Sized>(
    universe: &[usize],
    sizes: &[usize],
    rng: &mut R,
) -> Result<Vec<VertexSet>> {
    let requested: usize = sizes.iter().sum();
    if requested > universe.len() {
        return Err(Error::SizesExceed {
            requested,
            available: universe.len(),
        });
    }
    let mut perm = universe.to_vec();
    let (chosen, _) = perm.partial_shuffle(rng, requested);
    let mut out = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &s in sizes {
        out.push(chosen[start..start + s].iter().copied().collect());
        start += s;
    }
    Ok(out)
}

/// Whether every vertex of `d` has at least `(1/2 + α/2)|A|` in- and
/// out-neighbours inside `a`.
pub fn check_inherited_degree(d: &Digraph, a: &VertexSet, alpha: f64) -> bool {
    let need = (0.5 + alpha / 2.0) * a.len() as f64;
    let mask = a.to_bitset(d.n());
    (0..d.n()).all(|v| {
        Sign::BOTH
            .iter()
            .all(|&s| d.degree_into(v, s, &mask) as f64 >= need - 1e-9)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cycle3() -> Digraph {
        Digraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn semidegree_of_small_graphs() {
        assert_eq!(Digraph::complete(4).min_semidegree(), 3);
        assert_eq!(Digraph::complete(4).edge_count(), 12);
        assert_eq!(cycle3().min_semidegree(), 1);
        let with_isolated = Digraph::from_edges(4, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(min_semidegree(&with_isolated), 0);
    }

    #[test]
    fn neighbor_queries() {
        let c = cycle3();
        let all = VertexSet::range(3);
        assert_eq!(c.neighbors(0, Sign::Plus, &all).as_slice(), &[1]);
        assert_eq!(c.neighbors(0, Sign::Minus, &all).as_slice(), &[2]);
        let k4 = Digraph::complete(4);
        let r: VertexSet = [0, 1].into_iter().collect();
        assert_eq!(k4.neighbors(2, Sign::Plus, &r).as_slice(), &[0, 1]);
    }

    #[test]
    fn rejects_loops_and_duplicates() {
        assert!(Digraph::from_edges(3, [(1, 1)]).is_err());
        assert!(Digraph::from_edges(3, [(0, 1), (0, 1)]).is_err());
        assert!(Digraph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn generator_meets_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = gen_semidegree_digraph(100, 0.25, &mut rng).unwrap();
        assert!(d.min_semidegree() >= 75);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = gen_semidegree_digraph_with_density(150, 0.1, 0.55, &mut rng).unwrap();
        assert!(d.min_semidegree() >= semidegree_target(150, 0.1));
    }

    #[test]
    fn generator_near_half_is_unrepairable() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        match gen_semidegree_digraph(4, 0.49, &mut rng) {
            Err(Error::Unrepairable { target: 4, max: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(gen_semidegree_digraph(100, 0.5, &mut rng).is_err());
        assert!(gen_semidegree_digraph(3, 0.1, &mut rng).is_err());
    }

    #[test]
    fn generator_is_deterministic() {
        let a = gen_semidegree_digraph(200, 0.1, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = gen_semidegree_digraph(200, 0.1, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn adjacency_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [4, 37, 200] {
            let d = gen_semidegree_digraph(n, 0.1, &mut rng).unwrap();
            for u in 0..n {
                for v in 0..n {
                    assert_eq!(d.is_neighbor(u, Sign::Plus, v), d.is_neighbor(v, Sign::Minus, u));
                    assert_eq!(
                        d.neighbors_of(u, Sign::Plus).contains(&v),
                        d.neighbors_of(v, Sign::Minus).contains(&u)
                    );
                }
                assert!(!d.has_edge(u, u));
            }
        }
    }

    #[test]
    fn subset_sampling_shapes() {
        let d = Digraph::complete(10);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let full = sample_disjoint_subsets(&d, &[10], &mut rng).unwrap();
        assert_eq!(full[0], VertexSet::range(10));
        let parts = sample_disjoint_subsets(&d, &[4, 6], &mut rng).unwrap();
        assert_eq!(parts[0].union(&parts[1]), VertexSet::range(10));
        assert!(parts[0].is_disjoint(&parts[1]));
        assert!(sample_disjoint_subsets(&d, &[6, 6], &mut rng).is_err());
    }

    #[test]
    fn subset_sampling_is_uniform() {
        // Inclusion frequency of each vertex in the first of three 30-sets.
        let d = Digraph::complete(100);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut hits = vec![0u32; 100];
        let trials = 10_000;
        for _ in 0..trials {
            let parts = sample_disjoint_subsets(&d, &[30, 30, 30], &mut rng).unwrap();
            for &v in parts[0].iter() {
                hits[v] += 1;
            }
        }
        for h in hits {
            let f = h as f64 / trials as f64;
            assert!((f - 0.3).abs() <= 0.05, "frequency {f}");
        }
    }

    #[test]
    fn inherited_degree_examples() {
        let k = Digraph::complete(20);
        let a: VertexSet = (0..10).collect();
        assert!(check_inherited_degree(&k, &a, 0.4));
        let d = Digraph::from_edges(4, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(!check_inherited_degree(&d, &[3].into_iter().collect(), 0.1));
    }

    #[test]
    fn text_round_trip_is_canonical() {
        let d = Digraph::from_edges(4, [(2, 0), (0, 3), (0, 1)]).unwrap();
        let text = d.to_text();
        assert_eq!(text, "digraph 4\n0 1\n0 3\n2 0\n");
        let parsed = Digraph::from_text("# comment\n\ndigraph 4\n2 0 # edge\n0 1\n0 3\n").unwrap();
        assert_eq!(parsed.to_text(), text);
        assert!(Digraph::from_text("digraph x\n").is_err());
        assert!(Digraph::from_text("digraph 3\n0\n").is_err());
        assert!(Digraph::from_text("").is_err());
    }

    #[test]
    fn induced_subgraph_relabels() {
        let c = cycle3();
        let sub = c.induced(&[1, 2].into_iter().collect());
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }
}
