//! Random oriented trees with a cap on both semidegrees.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::OrientedTree;
use crate::digraph::Sign;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeFamily {
    /// Random recursive tree: each new vertex attaches to a uniform vertex
    /// with spare capacity.
    Uniform,
    /// Directed path `0 → 1 → … → n-1`.
    Path,
    /// Out-star centred at 0.
    Star,
    /// A spine with leaves hanging off it.
    Caterpillar,
    /// Legs of near-equal length from a centre.
    Spider,
    /// A path ending in a bushy subtree.
    Broom,
}

impl std::str::FromStr for TreeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uniform" => TreeFamily::Uniform,
            "path" => TreeFamily::Path,
            "star" => TreeFamily::Star,
            "caterpillar" => TreeFamily::Caterpillar,
            "spider" => TreeFamily::Spider,
            "broom" => TreeFamily::Broom,
            other => return Err(Error::InvalidParameter(format!("unknown tree family `{other}`"))),
        })
    }
}

/// Grows a tree one vertex at a time, orienting each new edge at random
/// among the directions the parent still has room for.
struct Builder {
    cap: usize,
    deg: Vec<[usize; 2]>,
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn new(cap: usize) -> Self {
        Builder {
            cap,
            deg: vec![[0, 0]],
            edges: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.deg.len()
    }

    fn has_room(&self, u: usize) -> bool {
        self.deg[u][0] < self.cap || self.deg[u][1] < self.cap
    }

    /// Adds a new vertex adjacent to `u`; returns its label.
    fn attach<R: Rng + ?Sized>(&mut self, u: usize, rng: &mut R) -> usize {
        let room = [self.deg[u][0] < self.cap, self.deg[u][1] < self.cap];
        let sign = match room {
            [true, true] => {
                if rng.gen_bool(0.5) {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            }
            [true, false] => Sign::Plus,
            [false, true] => Sign::Minus,
            [false, false] => panic!("vertex {u} has no spare capacity"),
        };
        let v = self.deg.len();
        self.deg.push([0, 0]);
        self.deg[u][sign.index()] += 1;
        self.deg[v][sign.flip().index()] += 1;
        self.edges.push(match sign {
            Sign::Plus => (u, v),
            Sign::Minus => (v, u),
        });
        v
    }

    fn finish(self) -> OrientedTree {
        let n = self.deg.len();
        OrientedTree::from_edges(n, self.edges).expect("builder produces a tree")
    }
}

/// A random oriented tree on `n` vertices with `Δ⁺, Δ⁻ ≤ max_semideg`.
pub fn gen_random_tree<R: Rng + ?Sized>(
    n: usize,
    max_semideg: usize,
    family: TreeFamily,
    rng: &mut R,
) -> Result<OrientedTree> {
    if n == 0 {
        return Err(Error::InvalidParameter("tree needs n ≥ 1".into()));
    }
    if max_semideg == 0 {
        return Err(Error::InvalidParameter("max_semideg must be at least 1".into()));
    }
    let cap = max_semideg;
    match family {
        TreeFamily::Path => return OrientedTree::from_edges(n, (1..n).map(|i| (i - 1, i))),
        TreeFamily::Star => {
            if n > 1 && cap < n - 1 {
                return Err(Error::InvalidParameter(format!(
                    "a star on {n} vertices needs max_semideg ≥ {}",
                    n - 1
                )));
            }
            return OrientedTree::from_edges(n, (1..n).map(|i| (0, i)));
        }
        _ => {}
    }
    let mut b = Builder::new(cap);
    match family {
        TreeFamily::Uniform => {
            // Vertices that can still take a neighbour; swap-removed when full.
            let mut open = vec![0usize];
            while b.len() < n {
                let i = rng.gen_range(0..open.len());
                let u = open[i];
                let v = b.attach(u, rng);
                if !b.has_room(u) {
                    open.swap_remove(i);
                }
                open.push(v);
            }
        }
        TreeFamily::Caterpillar => {
            let mut tip = 0;
            while b.len() < n {
                if b.len() > 1 && b.has_room(tip) && rng.gen_bool(0.5) {
                    // A leaf on the current spine vertex; it never gets
                    // further neighbours.
                    b.attach(tip, rng);
                } else {
                    tip = if b.has_room(tip) {
                        b.attach(tip, rng)
                    } else {
                        // Only reachable with cap 1, where the tip already
                        // has one edge each way; extend from the other end.
                        unreachable_tip(&b)
                    };
                }
            }
        }
        TreeFamily::Spider => {
            let legs = (2 * cap).min(n - 1).max(1);
            let mut ends = vec![0usize; legs];
            let mut leg = 0;
            while b.len() < n {
                ends[leg] = b.attach(ends[leg], rng);
                leg = (leg + 1) % legs;
            }
        }
        TreeFamily::Broom => {
            let handle = (n / 2).max(1);
            let mut tip = 0;
            while b.len() < handle {
                tip = b.attach(tip, rng);
            }
            // The bristles: a uniform tree grown from the end of the handle.
            let mut open = vec![tip];
            while b.len() < n {
                let i = rng.gen_range(0..open.len());
                let u = open[i];
                let v = b.attach(u, rng);
                if !b.has_room(u) {
                    open.swap_remove(i);
                }
                open.push(v);
            }
        }
        TreeFamily::Path | TreeFamily::Star => unreachable!(),
    }
    Ok(b.finish())
}

fn unreachable_tip(b: &Builder) -> usize {
    (0..b.len())
        .rev()
        .find(|&u| b.has_room(u))
        .expect("some vertex has spare capacity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const FAMILIES: [TreeFamily; 6] = [
        TreeFamily::Uniform,
        TreeFamily::Path,
        TreeFamily::Star,
        TreeFamily::Caterpillar,
        TreeFamily::Spider,
        TreeFamily::Broom,
    ];

    #[test]
    fn path_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = gen_random_tree(5, 1, TreeFamily::Path, &mut rng).unwrap();
        assert_eq!(p.max_semidegree(), (1, 1));
        assert_eq!(p.edges(), &[(0, 1), (1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = gen_random_tree(100, 2, TreeFamily::Uniform, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = gen_random_tree(100, 2, TreeFamily::Uniform, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn caterpillar_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = gen_random_tree(50, 4, TreeFamily::Caterpillar, &mut rng).unwrap();
        let (o, i) = t.max_semidegree();
        assert!(o <= 4 && i <= 4);
        // Removing the leaves leaves a path.
        let keep: Vec<bool> = (0..50).map(|v| !t.is_leaf(v)).collect();
        let spine: Vec<usize> = (0..50).filter(|&v| keep[v]).collect();
        let (s, _) = t.subtree(&spine).unwrap();
        assert!((0..s.n()).all(|v| s.degree(v) <= 2));
    }

    #[test]
    fn infeasible_star() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(gen_random_tree(10, 3, TreeFamily::Star, &mut rng).is_err());
        assert!(gen_random_tree(10, 9, TreeFamily::Star, &mut rng).is_ok());
        assert!(gen_random_tree(0, 3, TreeFamily::Uniform, &mut rng).is_err());
        assert!(gen_random_tree(5, 0, TreeFamily::Uniform, &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn respects_cap(seed in any::<u64>(), n in 1usize..200, cap in 1usize..5, fam in 0usize..6) {
            let family = FAMILIES[fam];
            let cap = if family == TreeFamily::Star { n.max(2) - 1 } else { cap };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = gen_random_tree(n, cap, family, &mut rng).unwrap();
            prop_assert_eq!(t.n(), n);
            let (o, i) = t.max_semidegree();
            prop_assert!(o <= cap && i <= cap);
        }
    }
}
