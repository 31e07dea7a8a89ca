//! Attaching many small trees to a small core, each by a single edge.
//!
//! The hanging trees are grouped into batches: by attachment sign, or by
//! attachment sign and isomorphism class. The core plus every batch's roots
//! go through [`embed_core_with_leaf_sets`]. The rest of each batch then
//! follows, either as perfect copies chained through matchings (one batch
//! per class) or one depth layer at a time, each layer matched into a fresh
//! random slice of the batch's part (one batch per sign).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{apportion, embed_core_with_leaf_sets, in_phase, partition_around, CoreReport, CoreTask};
use crate::digraph::{Digraph, Sign, VertexSet};
use crate::embedding::Embedding;
use crate::error::{Error, FailureCause, Phase, Result};
use crate::guides::{set_size, GuideSchedule, GuideSystem, RestrictMode};
use crate::matching::{covering_matching, embed_tree_copies, BipartitePattern};
use crate::params::{CoreGuides, ParamSchedule, StarMode};
use crate::tree::{canonical_order, canonical_rooted_form, OrientedTree, StarTree};

/// The tree side of the star phase.
#[derive(Debug, Clone, Copy)]
pub struct StarTask<'a> {
    pub tree: &'a OrientedTree,
    pub t: usize,
    /// The core `T'`, possibly a forest.
    pub core: &'a VertexSet,
    /// Trees hanging off the core by one edge each.
    pub stars: &'a [StarTree],
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarReport {
    pub batches: usize,
    /// `|V₀|`, then the root part and the body part of every batch. They
    /// partition the host, so they sum to at most `n`.
    pub part_sizes: Vec<usize>,
    pub core: CoreReport,
}

struct Batch {
    sign: Sign,
    members: Vec<usize>,
    body: usize,
}

/// Embeds the core and all hanging trees into `host` with `t → v`.
///
/// The host is split into `V₀` (the core plus a `q` share of the spare
/// vertices), one root part and one body part per batch; the remaining spare
/// vertices go to the batches in proportion to their sizes.
pub fn embed_stars<R: Rng + ?Sized>(
    d: &Digraph,
    task: &StarTask<'_>,
    host: &VertexSet,
    v: usize,
    params: &ParamSchedule,
    rng: &mut R,
) -> Result<(Embedding, StarReport)> {
    let tree = task.tree;
    let n = d.n();
    let batches = group(tree, task.stars, params.star_mode)?;
    let star_total: usize = task.stars.iter().map(|s| s.vertices.len()).sum();
    let need = task.core.len() + star_total;
    if need > host.len() {
        return Err(Error::SizesExceed {
            requested: need,
            available: host.len(),
        });
    }
    let slack = host.len() - need;
    let core_extra = ((params.q * slack as f64).floor() as usize).min(slack);
    let by_class = params.star_mode == StarMode::ByClass;
    // Weights for the spare vertices: per batch (root part, body part). In
    // class mode the body part must have exactly (|R|-1)·|U| vertices.
    let weights: Vec<usize> = batches
        .iter()
        .flat_map(|b| {
            if by_class {
                [b.members.len() + b.body, 0]
            } else {
                [b.members.len(), b.body]
            }
        })
        .collect();
    let extras = apportion(slack - core_extra, &weights);
    let mut sizes = vec![task.core.len() + core_extra];
    sizes.extend(batches.iter().enumerate().map(|(i, b)| b.members.len() + extras[2 * i]));
    sizes.extend(batches.iter().enumerate().map(|(i, b)| b.body + extras[2 * i + 1]));
    if batches.is_empty() {
        sizes[0] = host.len();
    }
    let parts = partition_around(host, &sizes, v, 0, params.conditioning, Phase::Stars, rng)?;
    let k = batches.len();
    let (v0, rest) = parts.split_first().expect("V0 exists");
    let (root_parts, body_parts) = rest.split_at(k);

    let leaf_parts: Vec<VertexSet> = batches
        .iter()
        .map(|b| b.members.iter().map(|&m| task.stars[m].root).collect())
        .collect();
    let core_task = CoreTask {
        tree,
        t: task.t,
        core: task.core,
        leaf_parts: &leaf_parts,
    };
    let schedule = GuideSchedule::from_params(params, v0.len() as f64 / n as f64, RestrictMode::Unchecked);
    let guided = match params.core_guides {
        CoreGuides::On => true,
        CoreGuides::Off => false,
        CoreGuides::Auto => set_size(schedule.restrict.mu * n as f64) > params.max_tree_semidegree,
    };
    let (mut emb, core_report) = if guided {
        let mut guides = GuideSystem::new(d, schedule, v0.clone(), root_parts.to_vec());
        embed_core_with_leaf_sets(d, &core_task, v0, root_parts, v, Some(&mut guides), rng)?
    } else {
        embed_core_with_leaf_sets(d, &core_task, v0, root_parts, v, None, rng)?
    };

    for (i, batch) in batches.iter().enumerate() {
        if by_class {
            graft_copies(d, tree, task.stars, batch, &body_parts[i], &mut emb, rng)?;
        } else {
            grow_layers(d, tree, task.stars, batch, &body_parts[i], params, &mut emb, rng)?;
        }
    }
    emb.telemetry.bump("stars.batches", k as u64);
    Ok((
        emb,
        StarReport {
            batches: k,
            part_sizes: sizes,
            core: core_report,
        },
    ))
}

fn group(tree: &OrientedTree, stars: &[StarTree], mode: StarMode) -> Result<Vec<Batch>> {
    let mut keyed: BTreeMap<(String, bool), Batch> = BTreeMap::new();
    for (i, star) in stars.iter().enumerate() {
        let form = match mode {
            StarMode::ByClass => {
                let (sub, labels) = tree.subtree(&star.vertices)?;
                let root = local(&labels, star.root);
                canonical_rooted_form(&sub, root)
            }
            StarMode::BySign => String::new(),
        };
        let batch = keyed.entry((form, star.sign == Sign::Plus)).or_insert(Batch {
            sign: star.sign,
            members: Vec::new(),
            body: 0,
        });
        batch.members.push(i);
        batch.body += star.vertices.len() - 1;
    }
    Ok(keyed.into_values().collect())
}

fn local(labels: &[usize], u: usize) -> usize {
    labels.binary_search(&u).expect("vertex belongs to the subtree")
}

/// Class mode: perfect copies of the class representative chained from the
/// embedded roots, then aligned onto every member.
fn graft_copies<R: Rng + ?Sized>(
    d: &Digraph,
    tree: &OrientedTree,
    stars: &[StarTree],
    batch: &Batch,
    body: &VertexSet,
    emb: &mut Embedding,
    rng: &mut R,
) -> Result<()> {
    let rep = &stars[batch.members[0]];
    if rep.vertices.len() == 1 {
        return Ok(());
    }
    let (rep_tree, rep_labels) = tree.subtree(&rep.vertices)?;
    let rep_root = local(&rep_labels, rep.root);
    let member_of: BTreeMap<usize, usize> = batch
        .members
        .iter()
        .map(|&m| (emb.image_of(stars[m].root), m))
        .collect();
    let roots: VertexSet = member_of.keys().copied().collect();
    let copies = embed_tree_copies(d, &rep_tree, rep_root, &roots, body, rng).map_err(in_phase(Phase::Stars))?;
    let rep_canon = canonical_order(&rep_tree, rep_root);
    for copy in copies {
        let star = &stars[member_of[&copy[rep_root]]];
        let (sub, labels) = tree.subtree(&star.vertices)?;
        let canon = canonical_order(&sub, local(&labels, star.root));
        for (&u, &w) in canon.iter().zip(&rep_canon).skip(1) {
            emb.assign(labels[u], copy[w], Phase::Stars);
        }
    }
    Ok(())
}

/// Sign mode: the non-root vertices of all members, one depth layer at a
/// time. Each layer is matched into a random slice of the unused part of
/// `body`, sized to the layer plus its share of the spare vertices (at
/// least `pn`); the last layer sees everything left.
#[allow(clippy::too_many_arguments)]
fn grow_layers<R: Rng + ?Sized>(
    d: &Digraph,
    tree: &OrientedTree,
    stars: &[StarTree],
    batch: &Batch,
    body: &VertexSet,
    params: &ParamSchedule,
    emb: &mut Embedding,
    rng: &mut R,
) -> Result<()> {
    // layers[k] holds (vertex, parent) pairs at depth k + 1.
    let mut layers: Vec<Vec<(usize, usize)>> = Vec::new();
    for &m in &batch.members {
        let star = &stars[m];
        let inside = |w: usize| star.vertices.binary_search(&w).is_ok();
        let (order, parent) = tree.bfs_within(star.root, inside);
        let mut depth = BTreeMap::from([(star.root, 0usize)]);
        for &u in &order[1..] {
            let p = parent[u].expect("bfs child has a parent");
            let k = depth[&p] + 1;
            depth.insert(u, k);
            if layers.len() < k {
                layers.resize_with(k, Vec::new);
            }
            layers[k - 1].push((u, p));
        }
    }
    let n = d.n();
    let min_extra = (params.p * n as f64).ceil() as usize;
    let mut remaining = batch.body;
    for (depth, layer) in layers.iter().enumerate() {
        let mut free: Vec<usize> = body.iter().copied().filter(|&x| !emb.is_used(x)).collect();
        let spare = free.len() - remaining;
        let share = (spare * layer.len()).div_ceil(remaining.max(1));
        let take = if depth + 1 == layers.len() {
            free.len()
        } else {
            (layer.len() + share.max(min_extra)).min(free.len())
        };
        free.shuffle(rng);
        free.truncate(take);
        free.sort_unstable();
        let slice = VertexSet::from_sorted(free);
        let mask = slice.to_bitset(n);
        let adj: Vec<Vec<usize>> = layer
            .iter()
            .map(|&(u, p)| {
                let sign = tree.sign_between(p, u).expect("tree edge");
                d.neighbor_bits(emb.image_of(p), sign)
                    .intersection(&mask)
                    .map(|w| slice.as_slice().binary_search(&w).expect("in slice"))
                    .collect()
            })
            .collect();
        let pattern = BipartitePattern::from_local(layer.len(), slice.len(), batch.sign, adj);
        let matching = covering_matching(&pattern).map_err(|e| {
            Error::phase(
                Phase::Stars,
                FailureCause::HallFail,
                format!(
                    "depth-{} layer of the {} batch ({} vertices into {}): {e}",
                    depth + 1,
                    batch.sign,
                    layer.len(),
                    slice.len()
                ),
            )
        })?;
        for &(a, b) in &matching.pairs {
            emb.assign(layer[a].0, slice[b], Phase::Stars);
        }
        remaining -= layer.len();
    }
    Ok(())
}
