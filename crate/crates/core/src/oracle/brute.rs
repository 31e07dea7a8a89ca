//! Exhaustive containment search for tiny instances.

use fixedbitset::FixedBitSet;

use crate::digraph::Digraph;
use crate::embedding::Embedding;
use crate::error::{Error, Phase, Result};
use crate::tree::OrientedTree;

/// Largest tree and host the exhaustive search accepts.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// A copy of `tree` in `d` if one exists, found by backtracking. With
/// `spanning` set, only copies covering all of `d` count, so `|T| ≠ n`
/// gives `None`.
///
/// The next tree vertex is always the unmapped neighbour of the mapped part
/// with the fewest remaining candidates.
pub fn brute_force_contains(d: &Digraph, tree: &OrientedTree, spanning: bool) -> Result<Option<Embedding>> {
    let (n, m) = (d.n(), tree.n());
    if n > BRUTE_FORCE_LIMIT || m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(format!(
            "|T| = {m} and n = {n}, limit {BRUTE_FORCE_LIMIT}"
        )));
    }
    if m > n || (spanning && m != n) {
        return Ok(None);
    }
    let mut search = Search {
        d,
        tree,
        map: vec![None; m],
        used: FixedBitSet::with_capacity(n),
    };
    // The root tries every host vertex; everything else is forced adjacent.
    let root = (0..m).max_by_key(|&u| tree.degree(u)).unwrap_or(0);
    for x in 0..n {
        search.place(root, x);
        if search.extend(m - 1) {
            let map: Vec<usize> = search.map.iter().map(|x| x.expect("total")).collect();
            return Ok(Some(Embedding::from_map(&map, n, Phase::Spanning)));
        }
        search.remove(root);
    }
    Ok(None)
}

struct Search<'a> {
    d: &'a Digraph,
    tree: &'a OrientedTree,
    map: Vec<Option<usize>>,
    used: FixedBitSet,
}

impl Search<'_> {
    fn place(&mut self, u: usize, x: usize) {
        self.map[u] = Some(x);
        self.used.insert(x);
    }

    fn remove(&mut self, u: usize) {
        let x = self.map[u].take().expect("mapped");
        self.used.set(x, false);
    }

    /// Host vertices free for `u`: unused and adjacent, in the right
    /// directions, to the images of all mapped neighbours of `u`.
    fn candidates(&self, u: usize) -> Vec<usize> {
        let mut ok = FixedBitSet::with_capacity(self.d.n());
        ok.insert_range(..);
        ok.difference_with(&self.used);
        for &(w, s) in self.tree.neighbors(u) {
            if let Some(y) = self.map[w] {
                // w ∈ N^s(u), so φ(u) ∈ N^{s̄}(φ(w)).
                ok.intersect_with(self.d.neighbor_bits(y, s.flip()));
            }
        }
        ok.ones().collect()
    }

    fn extend(&mut self, left: usize) -> bool {
        if left == 0 {
            return true;
        }
        let frontier = (0..self.tree.n())
            .filter(|&u| self.map[u].is_none() && self.tree.neighbors(u).iter().any(|&(w, _)| self.map[w].is_some()));
        let Some((u, cands)) = frontier.map(|u| (u, self.candidates(u))).min_by_key(|(_, c)| c.len()) else {
            return false;
        };
        for x in cands {
            self.place(u, x);
            if self.extend(left - 1) {
                return true;
            }
            self.remove(u);
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::verify_embedding;
    use crate::tree::{gen_random_tree, TreeFamily};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path3() -> OrientedTree {
        OrientedTree::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn follows_a_directed_triangle() {
        let d = Digraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let phi = brute_force_contains(&d, &path3(), true).unwrap().unwrap();
        assert!(verify_embedding(&d, &path3(), &phi));
    }

    #[test]
    fn out_star_has_no_directed_path() {
        let d = Digraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(brute_force_contains(&d, &path3(), false).unwrap().is_none());
    }

    #[test]
    fn single_vertex_and_limits() {
        let d = Digraph::complete(3);
        let phi = brute_force_contains(&d, &OrientedTree::singleton(), false)
            .unwrap()
            .unwrap();
        assert!(phi.get(0).is_some());
        assert!(brute_force_contains(&d, &OrientedTree::singleton(), true)
            .unwrap()
            .is_none());
        assert!(brute_force_contains(&Digraph::complete(13), &path3(), false).is_err());
    }

    /// Independent count: tries every injective map of the tree.
    fn exists_by_enumeration(d: &Digraph, tree: &OrientedTree) -> bool {
        fn go(d: &Digraph, tree: &OrientedTree, map: &mut Vec<usize>) -> bool {
            if map.len() == tree.n() {
                return tree.edges().iter().all(|&(u, w)| d.has_edge(map[u], map[w]));
            }
            for x in 0..d.n() {
                if !map.contains(&x) {
                    map.push(x);
                    if go(d, tree, map) {
                        return true;
                    }
                    map.pop();
                }
            }
            false
        }
        go(d, tree, &mut Vec::new())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn agrees_with_enumeration(seed in any::<u64>(), n in 1usize..7, m in 1usize..7, density in 0.2f64..0.9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = m.min(n);
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (0..n).map(move |w| (u, w)))
                .filter(|&(u, w)| u < w)
                .filter_map(|(u, w)| {
                    use rand::Rng;
                    let r: f64 = rng.gen();
                    if r < density / 2.0 { Some((u, w)) } else if r < density { Some((w, u)) } else { None }
                })
                .collect();
            let d = Digraph::from_edges(n, edges).unwrap();
            let tree = gen_random_tree(m, m.max(1), TreeFamily::Uniform, &mut rng).unwrap();
            let found = brute_force_contains(&d, &tree, false).unwrap();
            prop_assert_eq!(found.is_some(), exists_by_enumeration(&d, &tree));
            if let Some(phi) = found {
                prop_assert!(verify_embedding(&d, &tree, &phi));
            }
        }
    }
}
