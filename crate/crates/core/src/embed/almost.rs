//! Almost-spanning embedding: decompose the tree, then stars into `V₁`,
//! path-attached trees into `V₂` and the leftover leaves greedily into `V₃`.

use rand::Rng;

use super::{
    apportion, assert_verified, attach_path_trees, audits_enabled, check_degree_cap, embed_stars, partition_around,
    random_neighbour, retry, PathPiece, StarTask,
};
use crate::digraph::{Digraph, VertexSet};
use crate::embedding::Embedding;
use crate::error::{Error, FailureCause, Phase, Result};
use crate::params::ParamSchedule;
use crate::tree::{decompose_lenient, OrientedTree, TreeDecomposition};

/// A copy of `tree` in `d` with `t → v`. Needs `|T| ≤ (1-ε)n`.
pub fn embed_almost_spanning<R: Rng + ?Sized>(
    d: &Digraph,
    tree: &OrientedTree,
    t: usize,
    v: usize,
    params: &ParamSchedule,
    rng: &mut R,
) -> Result<Embedding> {
    embed_almost_spanning_in(d, tree, t, v, &d.vertices(), params, rng)
}

/// As [`embed_almost_spanning`], using only the vertices of `host`.
///
/// The spare vertices `|host| - |T|` are split evenly between the three
/// parts; a part whose layer of the decomposition is empty passes its share
/// to `V₁`. Each attempt redraws the partition; up to `retry_budget`
/// attempts are made.
pub fn embed_almost_spanning_in<R: Rng + ?Sized>(
    d: &Digraph,
    tree: &OrientedTree,
    t: usize,
    v: usize,
    host: &VertexSet,
    params: &ParamSchedule,
    rng: &mut R,
) -> Result<Embedding> {
    let size = tree.n();
    if t >= size || !host.contains(v) {
        return Err(Error::InvalidParameter(format!(
            "need t < |T| and v in the host (t={t}, v={v})"
        )));
    }
    if size as f64 > (1.0 - params.eps) * host.len() as f64 + 1e-9 || size > host.len() {
        return Err(Error::InvalidParameter(format!(
            "tree of {size} vertices exceeds (1-ε)·{} with ε = {}",
            host.len(),
            params.eps
        )));
    }
    check_degree_cap(tree, params)?;
    let mut emb = Embedding::new(size, d.n());
    if size == 1 {
        emb.assign(t, v, Phase::Almost);
        return Ok(emb);
    }
    let dec = decompose_lenient(tree, t, params)?;
    let layers = [
        dec.t1(),
        dec.t2().difference(&dec.t1()),
        VertexSet::range(size).difference(&dec.t2()),
    ];
    let pieces = path_pieces(tree, &dec)?;
    let slack = host.len() - size;
    let mut shares = apportion(
        slack,
        &[
            1,
            usize::from(!layers[1].is_empty()),
            usize::from(!layers[2].is_empty()),
        ],
    );
    shares[0] += slack - shares.iter().sum::<usize>();
    let sizes: Vec<usize> = layers.iter().zip(&shares).map(|(l, s)| l.len() + s).collect();

    let mut telemetry = std::mem::take(&mut emb.telemetry);
    let result = retry(params.retry_budget, Phase::Almost, &mut telemetry, |tel| {
        let parts = partition_around(host, &sizes, v, 0, params.conditioning, Phase::Almost, rng)?;
        let out = attempt(d, tree, t, v, &dec, &pieces, &parts, params, rng)?;
        tel.merge(&out.telemetry);
        if audits_enabled() {
            audit_parts(tree, &dec, &out, &parts);
        }
        Ok(out)
    });
    let mut out = result.map_err(|e| annotate(e, &telemetry))?;
    out.telemetry = telemetry;
    assert_verified(d, tree, &out);
    Ok(out)
}

fn annotate(e: Error, telemetry: &crate::embedding::Telemetry) -> Error {
    match e {
        Error::PhaseFailed { phase, cause, detail } => Error::PhaseFailed {
            phase,
            cause,
            detail: format!("{detail} (after {} failed attempts)", telemetry.total_retries()),
        },
        other => other,
    }
}

/// One piece per path-attached tree: the bare path from anchor to anchor
/// plus the tree in between, with the anchors as end leaves.
fn path_pieces(tree: &OrientedTree, dec: &TreeDecomposition) -> Result<Vec<(PathPiece, Vec<usize>)>> {
    dec.path_trees
        .iter()
        .map(|pa| {
            let mut vertices: Vec<usize> = pa.q.clone();
            vertices.extend([pa.x_anchor, pa.x, pa.y, pa.y_anchor]);
            let (sub, labels) = tree.subtree(&vertices)?;
            let at = |u: usize| labels.binary_search(&u).expect("piece vertex");
            let piece = PathPiece::new(sub, at(pa.x_anchor), at(pa.y_anchor))?;
            Ok((piece, labels))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn attempt<R: Rng + ?Sized>(
    d: &Digraph,
    tree: &OrientedTree,
    t: usize,
    v: usize,
    dec: &TreeDecomposition,
    pieces: &[(PathPiece, Vec<usize>)],
    parts: &[VertexSet],
    params: &ParamSchedule,
    rng: &mut R,
) -> Result<Embedding> {
    let core = dec.t0();
    let task = StarTask {
        tree,
        t,
        core: &core,
        stars: &dec.stars,
    };
    let (mut emb, _) = embed_stars(d, &task, &parts[0], v, params, rng)?;

    let anchors: Vec<(usize, usize)> = dec
        .path_trees
        .iter()
        .map(|pa| (emb.image_of(pa.x_anchor), emb.image_of(pa.y_anchor)))
        .collect();
    let only: Vec<PathPiece> = pieces.iter().map(|(p, _)| p.clone()).collect();
    let (maps, report) = attach_path_trees(d, &only, &anchors, &parts[1], params, rng)?;
    for ((piece, labels), map) in pieces.iter().zip(&maps) {
        for (u, &x) in map.iter().enumerate() {
            if u != piece.r && u != piece.s {
                emb.assign(labels[u], x, Phase::Paths);
            }
        }
    }
    emb.telemetry.bump("paths.buffer", report.buffer as u64);
    emb.telemetry
        .bump("paths.greedy_forest", u64::from(report.greedy_forest));

    let v3 = parts[2].to_bitset(d.n());
    for &u in &dec.leftover {
        let (p, sign) = tree
            .neighbors(u)
            .iter()
            .find(|&&(w, _)| emb.get(w).is_some())
            .map(|&(w, s)| (w, s.flip()))
            .expect("leftover order puts a mapped neighbour first");
        let x = emb.image_of(p);
        let y = random_neighbour(d, x, sign, &v3, &emb, rng).ok_or_else(|| {
            Error::phase(
                Phase::Leaves,
                FailureCause::LeafGreedyFail,
                format!("no unused {sign}-neighbour of {x} left in V3 for tree vertex {u}"),
            )
        })?;
        emb.assign(u, y, Phase::Leaves);
    }
    Ok(emb)
}

/// Every vertex of `Tᵢ \ Tᵢ₋₁` lands in `Vᵢ`, anchors excepted by
/// construction since they belong to `T₁`.
fn audit_parts(tree: &OrientedTree, dec: &TreeDecomposition, emb: &Embedding, parts: &[VertexSet]) {
    for u in 0..tree.n() {
        let layer = match dec.layer[u] {
            0 | 1 => 0,
            2 => 1,
            _ => 2,
        };
        assert!(
            parts[layer].contains(emb.image_of(u)),
            "tree vertex {u} of layer {} left its part",
            dec.layer[u]
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::gen_semidegree_digraph_with_density;
    use crate::tree::{gen_random_tree, TreeFamily};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_vertex() {
        let d = Digraph::complete(5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let emb = embed_almost_spanning(
            &d,
            &OrientedTree::singleton(),
            0,
            3,
            &ParamSchedule::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(emb.get(0), Some(3));
    }

    #[test]
    fn rejects_oversized_trees() {
        let d = Digraph::complete(10);
        let tree = gen_random_tree(10, 3, TreeFamily::Path, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let err = embed_almost_spanning(
            &d,
            &tree,
            0,
            0,
            &ParamSchedule::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn families_in_random_hosts() {
        let mut params = ParamSchedule::with_alpha(0.15);
        params.eps = 0.2;
        for family in [
            TreeFamily::Uniform,
            TreeFamily::Path,
            TreeFamily::Caterpillar,
            TreeFamily::Spider,
        ] {
            let mut ok = 0;
            for seed in 0..10 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let d = gen_semidegree_digraph_with_density(300, 0.15, 0.7, &mut rng).unwrap();
                let tree = gen_random_tree(240, 3, family, &mut rng).unwrap();
                match embed_almost_spanning(&d, &tree, 0, 7, &params, &mut rng) {
                    Ok(emb) => {
                        assert!(emb.is_total() && emb.respects_edges(&d, &tree));
                        assert_eq!(emb.get(0), Some(7));
                        ok += 1;
                    }
                    Err(e) => assert!(e.is_retryable(), "{family:?}: {e}"),
                }
            }
            assert!(ok >= 8, "{family:?}: {ok}/10");
        }
    }
}
