//! The embedding phases and the pipelines assembled from them.
//!
//! Each phase makes one random attempt and audits its own postcondition; a
//! failed audit is a retryable [`Error::PhaseFailed`]. The pipelines
//! ([`embed_almost_spanning`], [`embed_spanning`]) resample within the
//! schedule's retry budget and verify everything they return.

mod absorb;
mod almost;
mod core_phase;
mod paths;
mod spanning;
mod stars;

use std::sync::OnceLock;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::digraph::{sample_disjoint_from, Digraph, Sign, VertexSet};
use crate::embedding::{Embedding, Telemetry};
use crate::error::{Error, FailureCause, Phase, Result};
use crate::params::ParamSchedule;
use crate::tree::OrientedTree;

pub use absorb::{build_absorber, complete_absorption, AbsorberState, SwitchCheck};
pub use almost::{embed_almost_spanning, embed_almost_spanning_in};
pub use core_phase::{embed_core_with_leaf_sets, CoreReport, CoreTask, PartAudit};
pub use paths::{attach_path_trees, PathPiece, PathReport};
pub use spanning::{embed_spanning, is_absorption_failure};
pub use stars::{embed_stars, StarReport, StarTask};

/// Whether `ALG_DEBUG_AUDITS=1` asks for the quadratic invariant audits.
pub fn audits_enabled() -> bool {
    static FLAG: OnceLock<bool> = OnceLock::new();
    *FLAG.get_or_init(|| std::env::var("ALG_DEBUG_AUDITS").is_ok_and(|v| v == "1"))
}

/// Splits `total` in proportion to `weights`; the remainder goes out by
/// largest fractional part, ties to the lower index. All-zero weights give
/// everything to the first entry.
pub(crate) fn apportion(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    let mut out = vec![0; weights.len()];
    if weights.is_empty() {
        return out;
    }
    if sum == 0 {
        out[0] = total;
        return out;
    }
    let mut rems: Vec<(usize, usize)> = Vec::with_capacity(weights.len());
    let mut given = 0;
    for (i, &w) in weights.iter().enumerate() {
        let exact = total * w;
        out[i] = exact / sum;
        given += out[i];
        rems.push((exact % sum, i));
    }
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in rems.iter().take(total - given) {
        out[i] += 1;
    }
    out
}

/// Random disjoint parts of `host` with the given sizes, part `home`
/// containing `v`. With `conditioning` set, `v` is placed first and the rest
/// drawn uniformly; otherwise whole partitions are redrawn until one puts
/// `v` in `home`.
pub(crate) fn partition_around<R: Rng + ?Sized>(
    host: &VertexSet,
    sizes: &[usize],
    v: usize,
    home: usize,
    conditioning: bool,
    phase: Phase,
    rng: &mut R,
) -> Result<Vec<VertexSet>> {
    if !host.contains(v) || sizes[home] == 0 {
        return Err(Error::InvalidParameter(format!(
            "vertex {v} cannot be placed in part {home}"
        )));
    }
    if conditioning {
        let rest: VertexSet = host.iter().copied().filter(|&x| x != v).collect();
        let mut reduced = sizes.to_vec();
        reduced[home] -= 1;
        let mut parts = sample_disjoint_from(&rest, &reduced, rng)?;
        parts[home] = parts[home].union(&VertexSet::from_sorted(vec![v]));
        return Ok(parts);
    }
    // Each draw succeeds with probability |home|/|host|.
    let cap = 64 * host.len() / sizes[home] + 64;
    for _ in 0..cap {
        let parts = sample_disjoint_from(host, sizes, rng)?;
        if parts[home].contains(v) {
            return Ok(parts);
        }
    }
    Err(Error::phase(
        phase,
        FailureCause::Schedule,
        format!("{cap} draws never placed {v} in part {home}"),
    ))
}

/// A uniformly random unused `sign`-neighbour of `x` inside `allowed`.
pub(crate) fn random_neighbour<R: Rng + ?Sized>(
    d: &Digraph,
    x: usize,
    sign: Sign,
    allowed: &FixedBitSet,
    emb: &Embedding,
    rng: &mut R,
) -> Option<usize> {
    let cands: Vec<usize> = d
        .neighbor_bits(x, sign)
        .intersection(allowed)
        .filter(|&w| !emb.is_used(w))
        .collect();
    cands.choose(rng).copied()
}

/// Runs `attempt` until it succeeds, at most `budget` times (at least once).
/// Retryable failures are tallied in `telemetry`; other errors stop at once.
pub(crate) fn retry<T>(
    budget: usize,
    phase: Phase,
    telemetry: &mut Telemetry,
    mut attempt: impl FnMut(&mut Telemetry) -> Result<T>,
) -> Result<T> {
    let mut last = None;
    for _ in 0..budget.max(1) {
        match attempt(telemetry) {
            Ok(x) => return Ok(x),
            Err(e) if e.is_retryable() => {
                let (p, c) = match &e {
                    Error::PhaseFailed { phase, cause, .. } => (*phase, *cause),
                    other => (phase, other.cause().unwrap_or(FailureCause::HallFail)),
                };
                telemetry.record_failure(p, c);
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt ran"))
}

/// Rejects trees whose semidegree exceeds the schedule's cap.
pub(crate) fn check_degree_cap(tree: &OrientedTree, params: &ParamSchedule) -> Result<()> {
    let (out, inn) = tree.max_semidegree();
    let cap = params.max_tree_semidegree;
    if out.max(inn) > cap {
        return Err(Error::InvalidParameter(format!(
            "tree has Δ± = ({out}, {inn}), above max_tree_semidegree = {cap}"
        )));
    }
    Ok(())
}

/// Panics unless `emb` maps every vertex of `tree` and respects its edges.
/// The pipelines call this on every result they return.
pub(crate) fn assert_verified(d: &Digraph, tree: &OrientedTree, emb: &Embedding) {
    assert!(
        crate::oracle::verify_embedding(d, tree, emb),
        "pipeline produced an embedding that fails verification"
    );
}

/// Rewrites the phase of a failure raised by a helper on behalf of `phase`.
pub(crate) fn in_phase(phase: Phase) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::PhaseFailed { cause, detail, .. } => Error::PhaseFailed { phase, cause, detail },
        Error::NoPerfectMatching { violator } => Error::phase(
            phase,
            FailureCause::HallFail,
            format!("{} vertices violate Hall's condition", violator.len()),
        ),
        other => other,
    }
}
