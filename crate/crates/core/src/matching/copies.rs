//! Many disjoint copies of a small tree from chained matchings, and small
//! forests built from them.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{covering_matching, max_matching, BipartitePattern};
use crate::digraph::{sample_disjoint_from, Digraph, VertexSet};
use crate::embedding::Embedding;
use crate::error::{Error, FailureCause, Phase, Result};
use crate::tree::{canonical_order, canonical_unrooted_form, prefix_order, OrderPolicy, OrientedTree, PrefixOrdering};

/// Chains matchings between `blocks`, where `blocks[i]` hosts the copies of
/// `order.order[i]`. Every block must have the size of `blocks[0]`.
///
/// Returns one map per surviving copy, indexed by tree vertex. With
/// `partial` unset every matching must be perfect, so all `|blocks[0]|`
/// copies survive; otherwise maximum matchings are used and copies that
/// lose a vertex along the way are dropped.
pub fn chain_copies(
    d: &Digraph,
    tree: &OrientedTree,
    order: &PrefixOrdering,
    blocks: &[VertexSet],
    partial: bool,
) -> Result<Vec<Vec<usize>>> {
    let m = blocks.first().map_or(0, |b| b.len());
    if blocks.len() != order.len() || blocks.iter().any(|b| b.len() != m) {
        return Err(Error::MatchingPrecondition(format!(
            "need {} blocks of equal size for the tree's prefix order",
            order.len()
        )));
    }
    // images[c][i] is the host vertex of order.order[i] in copy c.
    let mut images: Vec<Vec<Option<usize>>> = blocks[0].iter().map(|&x| vec![Some(x)]).collect();
    let mut slot_of: Vec<BTreeMap<usize, usize>> = vec![blocks[0].iter().enumerate().map(|(c, &x)| (x, c)).collect()];
    for i in 1..order.len() {
        let j = order.parent[i].expect("non-root entries have a parent");
        let p = BipartitePattern::from_digraph(d, &blocks[j], &blocks[i], order.sign[i])?;
        let matching = if partial {
            max_matching(&p)
        } else {
            covering_matching(&p).map_err(|e| {
                Error::phase(
                    Phase::Forest,
                    FailureCause::HallFail,
                    format!(
                        "{} matching for tree edge {}–{} is not perfect: {e}",
                        order.sign[i], order.order[j], order.order[i]
                    ),
                )
            })?
        };
        let mut slots = BTreeMap::new();
        for img in images.iter_mut() {
            img.push(None);
        }
        for &(a, b) in &matching.pairs {
            let c = slot_of[j][&a];
            images[c][i] = Some(b);
            slots.insert(b, c);
        }
        slot_of.push(slots);
    }
    let n = tree.n();
    Ok(images
        .into_iter()
        .filter(|img| img.iter().all(Option::is_some))
        .map(|img| {
            let mut copy = vec![0; n];
            for (i, x) in img.into_iter().enumerate() {
                copy[order.order[i]] = x.expect("filtered to complete copies");
            }
            copy
        })
        .collect())
}

/// `|V1|` vertex-disjoint copies of `tree`, each sending `r` into `v1` and
/// the rest into `v2`. `v2` is split uniformly at random into `|tree| - 1`
/// blocks of size `|V1|`, joined by one perfect matching per tree edge.
pub fn embed_tree_copies<R: Rng + ?Sized>(
    d: &Digraph,
    tree: &OrientedTree,
    r: usize,
    v1: &VertexSet,
    v2: &VertexSet,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    if r >= tree.n() {
        return Err(Error::InvalidParameter(format!("root {r} is not a tree vertex")));
    }
    if v2.len() != (tree.n() - 1) * v1.len() || !v1.is_disjoint(v2) {
        return Err(Error::MatchingPrecondition(format!(
            "need disjoint V1, V2 with |V2| = {}·|V1|",
            tree.n() - 1
        )));
    }
    let order = prefix_order(tree, r, OrderPolicy::Any);
    let mut blocks = vec![v1.clone()];
    blocks.extend(sample_disjoint_from(v2, &vec![v1.len(); tree.n() - 1], rng)?);
    chain_copies(d, tree, &order, &blocks, false)
}

/// What [`embed_small_forest_in`] did, per isomorphism class.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestReport {
    /// Number of isomorphism classes among the components.
    pub classes: usize,
    /// `(component size, components needed, copies built)` per class.
    pub per_class: Vec<(usize, usize, usize)>,
}

/// Embeds the disjoint union of `forest` into `d`, component `i` occupying
/// tree labels `offset_i .. offset_i + |F_i|` in concatenation order.
pub fn embed_small_forest<R: Rng + ?Sized>(
    d: &Digraph,
    forest: &[OrientedTree],
    eps: f64,
    rng: &mut R,
) -> Result<Embedding> {
    embed_small_forest_in(d, forest, &d.vertices(), eps, false, rng).map(|(e, _)| e)
}

/// As [`embed_small_forest`], using only host vertices in `available`.
///
/// Components are grouped into isomorphism classes. Class `i`, with `t_i`
/// components of size `s_i`, gets `t_i + εm/(ℓ s_i)` root slots (floors
/// assigned by largest remainder, `m = |available|`, `ℓ` classes) and the
/// matching chain of [`embed_tree_copies`] on random disjoint blocks.
/// With `repair` set, imperfect matchings are tolerated as long as enough
/// complete copies survive.
pub fn embed_small_forest_in<R: Rng + ?Sized>(
    d: &Digraph,
    forest: &[OrientedTree],
    available: &VertexSet,
    eps: f64,
    repair: bool,
    rng: &mut R,
) -> Result<(Embedding, ForestReport)> {
    let total: usize = forest.iter().map(OrientedTree::n).sum();
    let m = available.len();
    if total as f64 > (1.0 - eps) * m as f64 + 1e-9 {
        return Err(Error::SizesExceed {
            requested: total,
            available: m,
        });
    }
    let mut offsets = Vec::with_capacity(forest.len());
    let mut acc = 0;
    for f in forest {
        offsets.push(acc);
        acc += f.n();
    }
    // Classes keyed by canonical form; each member keeps its canonical root
    // so one copy order serves the whole class.
    let mut classes: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, f) in forest.iter().enumerate() {
        let (form, root) = canonical_unrooted_form(f);
        classes.entry(form).or_default().push((i, root));
    }
    let ell = classes.len();
    let classes: Vec<Vec<(usize, usize)>> = classes.into_values().collect();
    let sizes: Vec<usize> = classes.iter().map(|c| forest[c[0].0].n()).collect();
    let counts: Vec<usize> = classes.iter().map(Vec::len).collect();
    let slots = slot_counts(&sizes, &counts, m, eps);

    let block_sizes: Vec<usize> = (0..ell).flat_map(|i| std::iter::repeat_n(slots[i], sizes[i])).collect();
    let blocks = sample_disjoint_from(available, &block_sizes, rng)?;

    let mut emb = Embedding::new(total, d.n());
    let mut report = ForestReport {
        classes: ell,
        per_class: Vec::with_capacity(ell),
    };
    let mut next_block = 0;
    for (i, members) in classes.iter().enumerate() {
        let (rep, rep_root) = members[0];
        let rep_tree = &forest[rep];
        let order = prefix_order(rep_tree, rep_root, OrderPolicy::Any);
        let class_blocks = &blocks[next_block..next_block + sizes[i]];
        next_block += sizes[i];
        let copies = chain_copies(d, rep_tree, &order, class_blocks, repair)?;
        report.per_class.push((sizes[i], counts[i], copies.len()));
        if copies.len() < counts[i] {
            return Err(Error::phase(
                Phase::Forest,
                FailureCause::HallFail,
                format!(
                    "class of size {} built {} of {} copies",
                    sizes[i],
                    copies.len(),
                    counts[i]
                ),
            ));
        }
        let rep_canon = canonical_order(rep_tree, rep_root);
        for (&(comp, root), copy) in members.iter().zip(&copies) {
            // Align the member with the representative through their
            // canonical orders, which agree position by position.
            let canon = canonical_order(&forest[comp], root);
            for (&u, &w) in canon.iter().zip(&rep_canon) {
                emb.assign(offsets[comp] + u, copy[w], Phase::Forest);
            }
        }
    }
    Ok((emb, report))
}

/// Root slots per class: `t_i + ε m / (ℓ s_i)`, floored, with leftover
/// vertices handed out by largest remainder.
fn slot_counts(sizes: &[usize], counts: &[usize], m: usize, eps: f64) -> Vec<usize> {
    let ell = sizes.len();
    if ell == 0 {
        return Vec::new();
    }
    let extra: Vec<f64> = sizes
        .iter()
        .map(|&s| eps * m as f64 / (ell as f64 * s as f64))
        .collect();
    let mut slots: Vec<usize> = (0..ell).map(|i| counts[i] + extra[i].floor() as usize).collect();
    let used: usize = (0..ell).map(|i| slots[i] * sizes[i]).sum();
    let mut spare = m.saturating_sub(used);
    let mut by_remainder: Vec<usize> = (0..ell).collect();
    by_remainder.sort_by(|&a, &b| {
        let ra = extra[a] - extra[a].floor();
        let rb = extra[b] - extra[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for i in by_remainder {
        if extra[i] - extra[i].floor() > 0.0 && sizes[i] <= spare {
            slots[i] += 1;
            spare -= sizes[i];
        }
    }
    slots
}
