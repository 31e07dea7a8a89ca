//! Attaching trees between two prescribed host vertices.
//!
//! A piece is a tree with two leaves `r`, `s` whose neighbours `r'`, `s'`
//! have degree 2. With `r`, `s` already placed at anchors `a`, `b`, the rest
//! of the piece minus `r'`, `s'` is embedded as a small forest away from a
//! random buffer `B`; then every `r'` and `s'` is placed inside `B` next to
//! both of its neighbours, all connectors at once through one matching.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{in_phase, random_neighbour};
use crate::digraph::{sample_disjoint_from, Digraph, VertexSet};
use crate::embedding::Embedding;
use crate::error::{Error, FailureCause, Phase, Result};
use crate::matching::{covering_matching, embed_small_forest_in, BipartitePattern, ForestReport};
use crate::params::ParamSchedule;
use crate::tree::OrientedTree;

/// A tree with designated end leaves `r` and `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPiece {
    pub tree: OrientedTree,
    pub r: usize,
    pub s: usize,
    /// `r'`, `s'` and their neighbours on the far side.
    links: [(usize, usize); 2],
    /// The piece without `r, r', s, s'`, with labels into `tree`.
    trimmed: (OrientedTree, Vec<usize>),
}

impl PathPiece {
    /// Checks that `r`, `s` are leaves, their neighbours have degree 2, and
    /// something is left after removing all four.
    pub fn new(tree: OrientedTree, r: usize, s: usize) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidTree(format!("path piece: {msg}"));
        if r >= tree.n() || s >= tree.n() || r == s || !tree.is_leaf(r) || !tree.is_leaf(s) {
            return Err(bad("r and s must be distinct leaves"));
        }
        let link = |end: usize| -> Result<(usize, usize)> {
            let next = tree.neighbors(end)[0].0;
            if tree.degree(next) != 2 {
                return Err(bad("the neighbours of r and s need degree 2"));
            }
            let far = tree
                .neighbors(next)
                .iter()
                .map(|&(w, _)| w)
                .find(|&w| w != end)
                .expect("degree 2");
            Ok((next, far))
        };
        let links = [link(r)?, link(s)?];
        let drop = [r, s, links[0].0, links[1].0];
        if links[0].0 == links[1].0 || drop.contains(&links[0].1) || drop.contains(&links[1].1) {
            return Err(bad("r' and s' must be joined through at least one further vertex"));
        }
        let keep: Vec<usize> = (0..tree.n()).filter(|u| !drop.contains(u)).collect();
        let trimmed = tree.subtree(&keep)?;
        Ok(PathPiece {
            tree,
            r,
            s,
            links,
            trimmed,
        })
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathReport {
    pub buffer: usize,
    pub forest: ForestReport,
    /// Whether the trimmed forest fell back to random greedy placement.
    pub greedy_forest: bool,
}

/// Embeds every piece with `r → anchors[i].0` and `s → anchors[i].1`, using
/// only vertices of `available` for the rest. Returns one map per piece,
/// indexed by piece vertex.
///
/// The buffer holds the `2ℓ` connectors plus up to `βn` spare vertices
/// (at most half of the spare room).
pub fn attach_path_trees<R: Rng + ?Sized>(
    d: &Digraph,
    pieces: &[PathPiece],
    anchors: &[(usize, usize)],
    available: &VertexSet,
    params: &ParamSchedule,
    rng: &mut R,
) -> Result<(Vec<Vec<usize>>, PathReport)> {
    if pieces.len() != anchors.len() {
        return Err(Error::InvalidParameter("one anchor pair per piece".into()));
    }
    let anchor_set: VertexSet = anchors.iter().flat_map(|&(a, b)| [a, b]).collect();
    if anchors.iter().any(|&(a, b)| a == b) || !anchor_set.is_disjoint(available) {
        return Err(Error::InvalidParameter(
            "each piece needs two anchors outside the available set".into(),
        ));
    }
    if pieces.is_empty() {
        return Ok((Vec::new(), PathReport::default()));
    }
    let n = d.n();
    let ell = pieces.len();
    let trimmed_total: usize = pieces.iter().map(|p| p.trimmed.0.n()).sum();
    let need = trimmed_total + 2 * ell;
    if need >= available.len() {
        return Err(Error::SizesExceed {
            requested: need + 1,
            available: available.len(),
        });
    }
    let spare = available.len() - need;
    let extra = ((params.beta * n as f64).ceil() as usize).min(spare / 2);
    let buffer_size = 2 * ell + extra;
    let parts = sample_disjoint_from(available, &[buffer_size, available.len() - buffer_size], rng)?;
    let (buffer, rest) = (&parts[0], &parts[1]);

    let forest: Vec<OrientedTree> = pieces.iter().map(|p| p.trimmed.0.clone()).collect();
    let eps = 1.0 - trimmed_total as f64 / rest.len() as f64;
    // The class-by-class matching chain needs many copies per class; with
    // few, mostly non-isomorphic pieces it rarely closes, so a random greedy
    // embedding takes over.
    let (femb, forest_report, greedy) = match embed_small_forest_in(d, &forest, rest, eps, params.forest_repair, rng) {
        Ok((e, r)) => (e, r, false),
        Err(e) if e.is_retryable() => (greedy_forest(d, &forest, rest, rng)?, ForestReport::default(), true),
        Err(e) => return Err(in_phase(Phase::Paths)(e)),
    };

    let mut maps: Vec<Vec<usize>> = pieces.iter().map(|p| vec![usize::MAX; p.n()]).collect();
    let mut offset = 0;
    for (i, p) in pieces.iter().enumerate() {
        for (j, &u) in p.trimmed.1.iter().enumerate() {
            maps[i][u] = femb.image_of(offset + j);
        }
        offset += p.trimmed.0.n();
        maps[i][p.r] = anchors[i].0;
        maps[i][p.s] = anchors[i].1;
    }

    // Connector rows: buffer vertices adjacent, in the right directions, to
    // both the anchor and the far neighbour.
    let mask = buffer.to_bitset(n);
    let mut adj = Vec::with_capacity(2 * ell);
    let mut slots = Vec::with_capacity(2 * ell);
    for (i, p) in pieces.iter().enumerate() {
        for (end, (mid, far)) in [p.r, p.s].into_iter().zip(p.links) {
            let to_end = p.tree.sign_between(mid, end).expect("tree edge");
            let to_far = p.tree.sign_between(mid, far).expect("tree edge");
            // `end ∈ N^σ(mid)` means the image of `mid` lies in `N^σ̄(image of end)`.
            let mut row = mask.clone();
            row.intersect_with(d.neighbor_bits(maps[i][end], to_end.flip()));
            row.intersect_with(d.neighbor_bits(maps[i][far], to_far.flip()));
            adj.push(
                row.ones()
                    .map(|w| buffer.as_slice().binary_search(&w).expect("in buffer"))
                    .collect::<Vec<_>>(),
            );
            slots.push((i, mid));
        }
    }
    let pattern = BipartitePattern::from_local(2 * ell, buffer.len(), crate::digraph::Sign::Plus, adj);
    let matching = covering_matching(&pattern).map_err(|e| {
        Error::phase(
            Phase::Paths,
            FailureCause::ConnectorExhausted,
            format!("{} connectors into a buffer of {}: {e}", 2 * ell, buffer.len()),
        )
    })?;
    for &(a, b) in &matching.pairs {
        let (i, mid) = slots[a];
        maps[i][mid] = buffer[b];
    }
    Ok((
        maps,
        PathReport {
            buffer: buffer.len(),
            forest: forest_report,
            greedy_forest: greedy,
        },
    ))
}

/// Each component vertex by vertex in BFS order: the root to a random
/// unused vertex of `available`, every other vertex to a random unused
/// neighbour of its parent's image there.
fn greedy_forest<R: Rng + ?Sized>(
    d: &Digraph,
    forest: &[OrientedTree],
    available: &VertexSet,
    rng: &mut R,
) -> Result<Embedding> {
    let total: usize = forest.iter().map(OrientedTree::n).sum();
    let mut emb = Embedding::new(total, d.n());
    let allowed = available.to_bitset(d.n());
    let mut offset = 0;
    for f in forest {
        let (order, parent) = f.bfs(0);
        for &u in &order {
            let pick = match parent[u] {
                None => available
                    .iter()
                    .copied()
                    .filter(|&x| !emb.is_used(x))
                    .collect::<Vec<_>>()
                    .choose(rng)
                    .copied(),
                Some(p) => {
                    let sign = f.sign_between(p, u).expect("tree edge");
                    random_neighbour(d, emb.image_of(offset + p), sign, &allowed, &emb, rng)
                }
            };
            let x = pick.ok_or_else(|| {
                Error::phase(
                    Phase::Paths,
                    FailureCause::HallFail,
                    format!("greedy forest stuck at piece vertex {u}"),
                )
            })?;
            emb.assign(offset + u, x, Phase::Paths);
        }
        offset += f.n();
    }
    Ok(emb)
}
