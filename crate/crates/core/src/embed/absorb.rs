//! Absorption by switching.
//!
//! A tree `T` on `μn` vertices is split into a large part `T'` (containing
//! `t`) and a small part `T''` of more than `εn` vertices. `T'` is embedded
//! vertex by vertex at random, leaves last, and its image padded to a set
//! `A`. If the embedding is *switchable* (for all `x ≠ y` and both signs,
//! at least `λn` indices `i` have `vᵢ ∈ N^◇(x)` and every `T'`-neighbour of
//! `vᵢ` adjacent to `y` in the same direction), then `T` embeds into any
//! `B ⊇ A` of size `|T|`: each new vertex `y` of `B` replaces some `vᵢ`,
//! which is freed to host the next vertex of `T''`.

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{audits_enabled, random_neighbour};
use crate::digraph::{Digraph, Sign, VertexSet};
use crate::embedding::{Embedding, Telemetry};
use crate::error::{Error, FailureCause, Phase, Result};
use crate::params::ParamSchedule;
use crate::tree::{prefix_order, split_tree_keeping, OrderPolicy, OrientedTree};

/// Outcome of the switchability check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchCheck {
    /// Smallest count over the checked `(x, y, ◇)`.
    pub min_count: usize,
    /// Where the smallest count occurs.
    pub worst: (usize, usize, Sign),
    /// Number of `(x, y, ◇)` checked.
    pub checked: usize,
}

/// A switchable partial embedding of an absorbing tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorberState {
    /// The whole tree, on its own labels.
    pub tree: OrientedTree,
    pub t: usize,
    /// Image of `t`.
    pub v: usize,
    /// `T'` in embedding order `t₁ = t, t₂, …, t_ℓ`.
    pub order: Vec<usize>,
    /// `images[i]` is `vᵢ`, the image of `order[i]`.
    pub images: Vec<usize>,
    /// `T'' \ T'` in an order where each vertex follows its neighbour
    /// towards `T'`.
    pub rest: Vec<usize>,
    /// The padded image, `|A| = |T| - ⌊εn⌋`.
    pub a: VertexSet,
    /// The threshold `⌈λn⌉`.
    pub lambda_n: usize,
    pub check: SwitchCheck,
    #[serde(default)]
    pub telemetry: Telemetry,
}

impl AbsorberState {
    /// Number of new vertices a completion takes.
    pub fn missing(&self) -> usize {
        self.tree.n() - self.a.len()
    }
}

/// Builds an absorber for `tree` with `t` fixed, retrying the random
/// embedding of `T'` up to `retry_budget` times until it is switchable at
/// threshold `⌈λn⌉`. Uses `absorber_eps` as `ε` and `lambda` as `λ`.
pub fn build_absorber<R: Rng + ?Sized>(
    d: &Digraph,
    tree: &OrientedTree,
    t: usize,
    params: &ParamSchedule,
    rng: &mut R,
) -> Result<AbsorberState> {
    let n = d.n();
    let eps_n = (params.absorber_eps * n as f64).floor() as usize;
    let m = eps_n + 1;
    if t >= tree.n() || 3 * m > tree.n() || tree.n() > n {
        return Err(Error::InvalidParameter(format!(
            "absorber needs 3(⌊εn⌋+1) = {} ≤ |T| = {} ≤ n = {n}",
            3 * m,
            tree.n()
        )));
    }
    let split = split_tree_keeping(tree, m, t)?;
    let (big, labels) = tree.subtree(&split.first)?;
    let local_t = labels.binary_search(&t).expect("t lies in the large part");
    let ordering = prefix_order(&big, local_t, OrderPolicy::LeavesLastMiddlesConsecutive);
    let order: Vec<usize> = ordering.order.iter().map(|&u| labels[u]).collect();
    let in_big: Vec<bool> = (0..tree.n()).map(|u| split.first.contains(u)).collect();
    let (bfs, _) = tree.bfs(t);
    let rest: Vec<usize> = bfs.into_iter().filter(|&u| !in_big[u]).collect();
    let lambda_n = (params.lambda * n as f64).ceil() as usize;

    let mut telemetry = Telemetry::default();
    let everything = d.vertices().to_bitset(n);
    let mut last = None;
    for _ in 0..params.retry_budget.max(1) {
        // Random greedy embedding of T' from a random vertex.
        let mut emb = Embedding::new(tree.n(), n);
        let v = rng.gen_range(0..n);
        emb.assign(t, v, Phase::Absorber);
        let mut stuck = None;
        for i in 1..order.len() {
            let p = order[ordering.parent[i].expect("non-root")];
            let sign = ordering.sign[i];
            match random_neighbour(d, emb.image_of(p), sign, &everything, &emb, rng) {
                Some(y) => emb.assign(order[i], y, Phase::Absorber),
                None => {
                    stuck = Some(order[i]);
                    break;
                }
            }
        }
        if let Some(u) = stuck {
            telemetry.record_failure(Phase::Absorber, FailureCause::SFail);
            last = Some(format!("random embedding of T' got stuck at tree vertex {u}"));
            continue;
        }
        let images: Vec<usize> = order.iter().map(|&u| emb.image_of(u)).collect();
        let check = switch_check(d, tree, &in_big, &order, &images, params.s_check_samples, rng);
        if check.min_count < lambda_n {
            telemetry.record_failure(Phase::Absorber, FailureCause::SFail);
            last = Some(format!(
                "switchability {} < ⌈λn⌉ = {lambda_n} at (x, y, ◇) = {:?}",
                check.min_count, check.worst
            ));
            continue;
        }
        let target = tree.n() - eps_n;
        let mut pool: Vec<usize> = (0..n).filter(|&x| !emb.is_used(x)).collect();
        pool.shuffle(rng);
        let a: VertexSet = images
            .iter()
            .copied()
            .chain(pool.into_iter().take(target - images.len()))
            .collect();
        telemetry.bump("absorber.switch_min", check.min_count as u64);
        return Ok(AbsorberState {
            tree: tree.clone(),
            t,
            v,
            order,
            images,
            rest,
            a,
            lambda_n,
            check,
            telemetry,
        });
    }
    Err(Error::phase(
        Phase::Absorber,
        FailureCause::SFail,
        last.unwrap_or_default(),
    ))
}

/// Counts, for every checked `(x, y, ◇)` with `x ≠ y`, the indices `i` with
/// `vᵢ ∈ N^◇(x)` and `N^±_R(vᵢ) ⊆ N^±(y)`, through one bitset over indices
/// per `(x, ◇)` and per `y`. `samples = 0` checks every triple; otherwise
/// that many random pairs.
fn switch_check<R: Rng + ?Sized>(
    d: &Digraph,
    tree: &OrientedTree,
    in_big: &[bool],
    order: &[usize],
    images: &[usize],
    samples: usize,
    rng: &mut R,
) -> SwitchCheck {
    let n = d.n();
    let ell = order.len();
    let mut image_of = vec![usize::MAX; tree.n()];
    for (&u, &x) in order.iter().zip(images) {
        image_of[u] = x;
    }
    // For each index, its R-neighbours as (image, sign of the neighbour).
    let nbrs: Vec<Vec<(usize, Sign)>> = order
        .iter()
        .map(|&u| {
            tree.neighbors(u)
                .iter()
                .filter(|&&(w, _)| in_big[w])
                .map(|&(w, s)| (image_of[w], s))
                .collect()
        })
        .collect();
    let dominated = |y: usize| -> FixedBitSet {
        let mut bits = FixedBitSet::with_capacity(ell);
        for (i, list) in nbrs.iter().enumerate() {
            if list.iter().all(|&(w, s)| d.is_neighbor(y, s, w)) {
                bits.insert(i);
            }
        }
        bits
    };
    // attached[◇][x]: indices i with vᵢ ∈ N^◇(x).
    let attached: Vec<Vec<FixedBitSet>> = Sign::BOTH
        .iter()
        .map(|&sign| {
            (0..n)
                .map(|x| {
                    let mut bits = FixedBitSet::with_capacity(ell);
                    for (i, &vi) in images.iter().enumerate() {
                        if d.is_neighbor(x, sign, vi) {
                            bits.insert(i);
                        }
                    }
                    bits
                })
                .collect()
        })
        .collect();
    let mut best = SwitchCheck {
        min_count: usize::MAX,
        worst: (0, 0, Sign::Plus),
        checked: 0,
    };
    let mut consider = |x: usize, y: usize, dom: &FixedBitSet| {
        for (k, &sign) in Sign::BOTH.iter().enumerate() {
            let count = attached[k][x].intersection(dom).count();
            best.checked += 1;
            if count < best.min_count {
                best.min_count = count;
                best.worst = (x, y, sign);
            }
        }
    };
    if samples == 0 {
        for y in 0..n {
            let dom = dominated(y);
            for x in (0..n).filter(|&x| x != y) {
                consider(x, y, &dom);
            }
        }
    } else {
        for _ in 0..samples {
            let x = rng.gen_range(0..n);
            let y = rng.gen_range(0..n);
            if x != y {
                consider(x, y, &dominated(y));
            }
        }
    }
    if best.checked == 0 {
        best.min_count = 0;
    }
    best
}

/// Completes the absorber to a copy of its tree inside `b` (with `t → v`).
/// `b` must contain `A` and have exactly `|T|` vertices.
///
/// The vertices `y₁, y₂, …` of `b` outside the image of `T'` are switched
/// in one by one. For the `i`-th vertex `sᵢ` of `T''`, attached to `pᵢ` as a
/// `◇`-neighbour, the smallest index `j` is taken such that `t_j` has not
/// been switched, `v_j ∈ N^◇(φ(pᵢ))`, `t_j` has at most `4/λ` placed
/// neighbours, and all of them are adjacent to `yᵢ` in the right direction.
/// Then `t_j → yᵢ` and `sᵢ → v_j`.
pub fn complete_absorption(d: &Digraph, state: &AbsorberState, b: &VertexSet) -> Result<Embedding> {
    let tree = &state.tree;
    if !state.a.is_subset(b) || b.len() != tree.n() {
        return Err(Error::InvalidParameter(format!(
            "B must contain A and have |T| = {} vertices (has {})",
            tree.n(),
            b.len()
        )));
    }
    let image_set: VertexSet = state.images.iter().copied().collect();
    let new: Vec<usize> = b.difference(&image_set).to_vec();
    assert_eq!(new.len(), state.rest.len(), "|B \\ V(R)| = |T''| - 1");
    let n = d.n();
    let lambda = state.lambda_n.max(1) as f64 / n as f64;
    let degree_cap = (4.0 / lambda).floor() as usize;

    let mut phi = vec![usize::MAX; tree.n()];
    let mut placed = vec![false; tree.n()];
    let mut degree = vec![0usize; tree.n()];
    for (&u, &x) in state.order.iter().zip(&state.images) {
        phi[u] = x;
        placed[u] = true;
    }
    for &u in &state.order {
        degree[u] = tree.neighbors(u).iter().filter(|&&(w, _)| placed[w]).count();
    }
    let mut switched = vec![false; state.order.len()];
    switched[0] = true;
    for (step, (&s, &y)) in state.rest.iter().zip(&new).enumerate() {
        let (p, sign) = tree
            .neighbors(s)
            .iter()
            .find(|&&(w, _)| placed[w])
            .map(|&(w, sg)| (w, sg.flip()))
            .expect("rest order puts a placed neighbour first");
        let x = phi[p];
        let admissible = |j: usize| {
            let u = state.order[j];
            let vj = phi[u];
            !switched[j]
                && d.is_neighbor(x, sign, vj)
                && degree[u] <= degree_cap
                && tree
                    .neighbors(u)
                    .iter()
                    .all(|&(w, sg)| !placed[w] || d.is_neighbor(y, sg, phi[w]))
        };
        let j = (1..state.order.len()).find(|&j| admissible(j)).ok_or_else(|| {
            Error::phase(
                Phase::Absorption,
                FailureCause::SFail,
                format!(
                    "step {}: no switchable index for new vertex {y} and tree vertex {s} next to {x}",
                    step + 1
                ),
            )
        })?;
        let u = state.order[j];
        let freed = phi[u];
        phi[u] = y;
        phi[s] = freed;
        placed[s] = true;
        switched[j] = true;
        degree[p] += 1;
        degree[s] = 1;
        if audits_enabled() || cfg!(debug_assertions) {
            for z in [u, s] {
                for &(w, sg) in tree.neighbors(z) {
                    if placed[w] {
                        debug_assert!(d.is_neighbor(phi[z], sg, phi[w]), "switch broke edge {z}–{w}");
                        assert!(d.is_neighbor(phi[z], sg, phi[w]), "switch broke edge {z}–{w}");
                    }
                }
            }
        }
    }
    let mut emb = Embedding::new(tree.n(), n);
    for (u, &x) in phi.iter().enumerate() {
        emb.assign(u, x, Phase::Absorption);
    }
    emb.telemetry = state.telemetry.clone();
    emb.telemetry.bump("absorption.switches", state.rest.len() as u64);
    Ok(emb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::gen_semidegree_digraph_with_density;
    use crate::tree::{gen_random_tree, TreeFamily};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(eps: f64, lambda: f64) -> ParamSchedule {
        let mut p = ParamSchedule::with_alpha(0.2);
        p.absorber_eps = eps;
        p.lambda = lambda;
        p
    }

    fn random_b(d: &Digraph, state: &AbsorberState, rng: &mut ChaCha8Rng) -> VertexSet {
        let mut outside: Vec<usize> = (0..d.n()).filter(|&x| !state.a.contains(x)).collect();
        outside.shuffle(rng);
        state.a.union(&outside.into_iter().take(state.missing()).collect())
    }

    #[test]
    fn complete_host_always_completes() {
        let d = Digraph::complete(60);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let tree = gen_random_tree(30, 3, TreeFamily::Uniform, &mut rng).unwrap();
        let state = build_absorber(&d, &tree, 0, &params(0.05, 0.05), &mut rng).unwrap();
        assert!(state.a.contains(state.v));
        assert_eq!(state.a.len(), 30 - 3);
        // Only x itself, y and the R-neighbours of y's preimage can miss.
        assert!(state.check.min_count + 8 >= state.order.len());
        for _ in 0..5 {
            let b = random_b(&d, &state, &mut rng);
            let emb = complete_absorption(&d, &state, &b).unwrap();
            assert!(emb.is_total() && emb.respects_edges(&d, &tree));
            assert_eq!(emb.get(0), Some(state.v));
            assert_eq!(emb.image(), b);
        }
    }

    #[test]
    fn rejects_tiny_trees_and_bad_b() {
        let d = Digraph::complete(100);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = gen_random_tree(12, 3, TreeFamily::Uniform, &mut rng).unwrap();
        assert!(build_absorber(&d, &tree, 0, &params(0.05, 0.01), &mut rng).is_err());
        let tree = gen_random_tree(40, 3, TreeFamily::Uniform, &mut rng).unwrap();
        let state = build_absorber(&d, &tree, 0, &params(0.05, 0.01), &mut rng).unwrap();
        assert!(complete_absorption(&d, &state, &state.a).is_err());
    }

    #[test]
    fn switching_in_random_hosts() {
        let mut verified = 0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = gen_semidegree_digraph_with_density(300, 0.2, 0.8, &mut rng).unwrap();
            let tree = gen_random_tree(90, 3, TreeFamily::Uniform, &mut rng).unwrap();
            let Ok(state) = build_absorber(&d, &tree, 0, &params(0.03, 0.01), &mut rng) else {
                continue;
            };
            verified += 1;
            assert!(state.check.min_count >= state.lambda_n);
            let b = random_b(&d, &state, &mut rng);
            let emb = complete_absorption(&d, &state, &b).unwrap();
            assert!(emb.respects_edges(&d, &tree));
            assert_eq!(emb.image(), b);
        }
        assert!(verified >= 8, "{verified}/10");
    }

    #[test]
    fn sampled_check_is_no_smaller_than_full() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = gen_semidegree_digraph_with_density(120, 0.2, 0.8, &mut rng).unwrap();
        let tree = gen_random_tree(40, 3, TreeFamily::Uniform, &mut rng).unwrap();
        let in_big = vec![true; 40];
        let order: Vec<usize> = tree.bfs(0).0;
        let mut e = Embedding::new(40, 120);
        let images: Vec<usize> = (0..40).collect();
        for (&u, &x) in order.iter().zip(&images) {
            e.assign(u, x, Phase::Absorber);
        }
        let full = switch_check(&d, &tree, &in_big, &order, &images, 0, &mut rng);
        let sampled = switch_check(&d, &tree, &in_big, &order, &images, 500, &mut rng);
        assert_eq!(full.checked, 120 * 119 * 2);
        assert!(sampled.min_count >= full.min_count);
    }
}
