//! The core embedding: a small forest `T₀` placed vertex by vertex inside
//! `V₀`, then every leaf batch `Uⱼ` attached at once through one matching
//! into its target part `Vⱼ`.
//!
//! A core vertex whose parent sits at `x` goes to a random unused member of
//! the guide set `A_{x,◇}`, and its matching row is its row in the guide
//! graph. Without guides it goes to a random unused `◇`-neighbour of `x` in
//! `V₀` and its row is its whole neighbourhood. Roots of core components
//! always use whole neighbourhoods.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::random_neighbour;
use crate::digraph::{Digraph, Sign, VertexSet};
use crate::embedding::Embedding;
use crate::error::{Error, FailureCause, Phase, Result};
use crate::guides::GuideSystem;
use crate::matching::{covering_matching, BipartitePattern};
use crate::tree::OrientedTree;

/// The tree side of a core embedding.
#[derive(Debug, Clone, Copy)]
pub struct CoreTask<'a> {
    pub tree: &'a OrientedTree,
    /// The vertex sent to the prescribed image.
    pub t: usize,
    /// `T₀`; may be a forest.
    pub core: &'a VertexSet,
    /// Leaf batches: each vertex has exactly one neighbour in the core, and
    /// all edges from one batch to the core point the same way.
    pub leaf_parts: &'a [VertexSet],
}

/// The matching pattern of one leaf batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartAudit {
    pub leaves: usize,
    pub targets: usize,
    pub min_row: usize,
    /// Largest number of rows any target vertex lies in.
    pub max_load: usize,
    /// `min_row ≥ max_load`: the skew-bounded condition that guarantees a
    /// covering matching. Batches can match without it.
    pub skew_bounded: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreReport {
    pub guided: bool,
    pub guides_built: usize,
    pub parts: Vec<PartAudit>,
}

/// Where a core vertex's matching row comes from.
#[derive(Debug, Clone, Copy)]
enum RowSource {
    Neighbourhood,
    Guide(usize, Sign),
}

/// Embeds `task.core` into `v0` with `t → s`, then each leaf batch
/// `leaf_parts[j]` into `targets[j]`. Pass `guides` (built on `v0` and
/// `targets`) to steer through guide sets.
///
/// Fails retryably when a guide set or neighbourhood runs out of unused
/// vertices, or when a batch pattern has no covering matching.
pub fn embed_core_with_leaf_sets<R: Rng + ?Sized>(
    d: &Digraph,
    task: &CoreTask<'_>,
    v0: &VertexSet,
    targets: &[VertexSet],
    s: usize,
    mut guides: Option<&mut GuideSystem<'_>>,
    rng: &mut R,
) -> Result<(Embedding, CoreReport)> {
    let tree = task.tree;
    let n = d.n();
    let batch_signs = validate(task, v0, targets, s)?;
    let mut in_core = vec![false; tree.n()];
    for &u in task.core.iter() {
        in_core[u] = true;
    }
    let mut emb = Embedding::new(tree.n(), n);
    let mut report = CoreReport {
        guided: guides.is_some(),
        ..Default::default()
    };
    let v0_bits = v0.to_bitset(n);
    let mut rows = vec![RowSource::Neighbourhood; tree.n()];

    let mut comps = tree.components(&in_core);
    comps.sort_by_key(|c| !c.contains(&task.t));
    for comp in &comps {
        let root = if comp.contains(&task.t) { task.t } else { comp[0] };
        if root == task.t {
            emb.assign(root, s, Phase::Core);
        } else {
            let free: Vec<usize> = v0.iter().copied().filter(|&x| !emb.is_used(x)).collect();
            let &x = free
                .choose(rng)
                .ok_or_else(|| Error::phase(Phase::Core, FailureCause::GuideRestrict, "V0 is full"))?;
            emb.assign(root, x, Phase::Core);
        }
        let (order, parent) = tree.bfs_within(root, |w| in_core[w]);
        for &u in &order[1..] {
            let p = parent[u].expect("bfs child has a parent");
            let sign = tree.sign_between(p, u).expect("tree edge");
            let x = emb.image_of(p);
            let pick = match guides.as_deref_mut() {
                Some(g) => {
                    let entry = g.get(x, sign)?;
                    rows[u] = RowSource::Guide(x, sign);
                    let free: Vec<usize> = entry.a.iter().copied().filter(|&w| !emb.is_used(w)).collect();
                    free.choose(rng).copied()
                }
                None => random_neighbour(d, x, sign, &v0_bits, &emb, rng),
            };
            let y = pick.ok_or_else(|| {
                Error::phase(
                    Phase::Core,
                    FailureCause::GuideRestrict,
                    format!("no unused {sign}-candidate for core vertex {u} next to host vertex {x}"),
                )
            })?;
            emb.assign(u, y, Phase::Core);
        }
    }

    for (j, (part, target)) in task.leaf_parts.iter().zip(targets).enumerate() {
        let circ = batch_signs[j];
        let mask = target.to_bitset(n);
        let index = |w: usize| {
            target
                .as_slice()
                .binary_search(&w)
                .expect("row entry lies in the target")
        };
        let mut adj = Vec::with_capacity(part.len());
        for &u in part.iter() {
            let c = core_neighbour(tree, &in_core, u);
            let y = emb.image_of(c);
            let row: Vec<usize> = match rows[c] {
                RowSource::Neighbourhood => d.neighbor_bits(y, circ).intersection(&mask).map(index).collect(),
                RowSource::Guide(x, sign) => {
                    let g = guides.as_deref_mut().expect("guide rows imply guides");
                    let entry = g.get(x, sign)?;
                    let mut row: Vec<usize> = entry
                        .row_of(y, circ)
                        .expect("core vertex is a guide member")
                        .iter()
                        .copied()
                        .filter(|&w| mask.contains(w))
                        .map(index)
                        .collect();
                    row.sort_unstable();
                    row
                }
            };
            adj.push(row);
        }
        let pattern = BipartitePattern::from_local(part.len(), target.len(), circ, adj);
        let min_row = (0..part.len()).map(|i| pattern.row(i).len()).min().unwrap_or(0);
        let max_load = pattern.right_degrees().into_iter().max().unwrap_or(0);
        report.parts.push(PartAudit {
            leaves: part.len(),
            targets: target.len(),
            min_row,
            max_load,
            skew_bounded: min_row >= max_load,
        });
        let matching = covering_matching(&pattern).map_err(|e| {
            Error::phase(
                Phase::Core,
                FailureCause::HallFail,
                format!(
                    "leaf batch {j} ({} leaves into {} targets): {e}",
                    part.len(),
                    target.len()
                ),
            )
        })?;
        for &(a, b) in &matching.pairs {
            emb.assign(part[a], target[b], Phase::Core);
        }
    }
    if let Some(g) = guides {
        report.guides_built = g.built;
    }
    let skewed = report.parts.iter().filter(|p| p.skew_bounded).count() as u64;
    emb.telemetry.bump("core.batches", report.parts.len() as u64);
    emb.telemetry.bump("core.batches_skew_bounded", skewed);
    Ok((emb, report))
}

fn core_neighbour(tree: &OrientedTree, in_core: &[bool], u: usize) -> usize {
    tree.neighbors(u)
        .iter()
        .map(|&(w, _)| w)
        .find(|&w| in_core[w])
        .expect("validated: leaf has a core neighbour")
}

/// Checks the preconditions and returns each batch's sign `∘ⱼ`, with every
/// batch vertex in `N^∘ⱼ` of its core neighbour.
fn validate(task: &CoreTask<'_>, v0: &VertexSet, targets: &[VertexSet], s: usize) -> Result<Vec<Sign>> {
    let tree = task.tree;
    let bad = |msg: String| Err(Error::InvalidParameter(msg));
    if !task.core.contains(task.t) {
        return bad(format!("t = {} is not a core vertex", task.t));
    }
    if !v0.contains(s) {
        return bad(format!("image {s} of t is not in V0"));
    }
    if task.leaf_parts.len() != targets.len() {
        return bad(format!(
            "{} leaf batches but {} target parts",
            task.leaf_parts.len(),
            targets.len()
        ));
    }
    if v0.len() < task.core.len() {
        return bad(format!(
            "V0 has {} vertices for a core of {}",
            v0.len(),
            task.core.len()
        ));
    }
    let mut signs = Vec::with_capacity(targets.len());
    for (j, (part, target)) in task.leaf_parts.iter().zip(targets).enumerate() {
        if part.len() > target.len() {
            return bad(format!(
                "leaf batch {j} has {} vertices but {} targets",
                part.len(),
                target.len()
            ));
        }
        if !target.is_disjoint(v0) {
            return bad(format!("target part {j} meets V0"));
        }
        let mut sign = None;
        for &u in part.iter() {
            let links: Vec<(usize, Sign)> = tree
                .neighbors(u)
                .iter()
                .copied()
                .filter(|&(w, _)| task.core.contains(w))
                .collect();
            if task.core.contains(u) || links.len() != 1 {
                return bad(format!(
                    "batch vertex {u} must lie outside the core with exactly one core neighbour"
                ));
            }
            // u ∈ N^∘(c) iff c ∈ N^∘̄(u).
            let circ = links[0].1.flip();
            if sign.is_some_and(|s| s != circ) {
                return bad(format!("leaf batch {j} attaches to the core in both directions"));
            }
            sign = Some(circ);
        }
        signs.push(sign.unwrap_or(Sign::Plus));
    }
    Ok(signs)
}
