//! Prefix orderings: vertex orders in which every prefix spans a subtree.

use serde::{Deserialize, Serialize};

use super::OrientedTree;
use crate::digraph::Sign;

/// How [`prefix_order`] arranges the vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderPolicy {
    /// Breadth-first from the root.
    Any,
    /// Depth-first preorder over the non-leaf vertices, followed by all
    /// leaves other than the root. Because a depth-first walk always
    /// continues straight through a degree-2 vertex, the interior of every
    /// bare path that avoids the root is visited consecutively.
    LeavesLastMiddlesConsecutive,
}

/// An ordering `t₁ … t_ℓ` with `t₁` the root, where each `tᵢ` (i ≥ 2) has a
/// unique earlier neighbour `t_{jᵢ}` and `tᵢ ∈ N^{◇ᵢ}(t_{jᵢ})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixOrdering {
    /// Tree vertices in order.
    pub order: Vec<usize>,
    /// `parent[i] = jᵢ`, the position of the earlier neighbour; `None` for
    /// the root.
    pub parent: Vec<Option<usize>>,
    /// `sign[i] = ◇ᵢ`; the root's entry is unused and set to `Plus`.
    pub sign: Vec<Sign>,
}

impl PrefixOrdering {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn root(&self) -> usize {
        self.order[0]
    }

    /// Position of each tree vertex in the order (`usize::MAX` if absent).
    pub fn positions(&self, n: usize) -> Vec<usize> {
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }

    /// Builds the parent/sign arrays for an explicit vertex order, checking
    /// the prefix property. Returns `None` if some vertex has no earlier
    /// neighbour.
    pub fn from_order(tree: &OrientedTree, order: Vec<usize>) -> Option<Self> {
        let mut pos = vec![usize::MAX; tree.n()];
        let mut parent = Vec::with_capacity(order.len());
        let mut sign = Vec::with_capacity(order.len());
        for (i, &v) in order.iter().enumerate() {
            if pos[v] != usize::MAX {
                return None;
            }
            pos[v] = i;
            if i == 0 {
                parent.push(None);
                sign.push(Sign::Plus);
                continue;
            }
            let mut earlier = tree.neighbors(v).iter().filter(|&&(w, _)| pos[w] < i);
            let &(w, s) = earlier.next()?;
            if earlier.next().is_some() {
                return None;
            }
            parent.push(Some(pos[w]));
            // `w ∈ N^s(v)` means `v ∈ N^{-s}(w)`.
            sign.push(s.flip());
        }
        Some(PrefixOrdering { order, parent, sign })
    }

    /// Whether every prefix induces a connected subtree and the stored
    /// parents and signs agree with the tree.
    pub fn is_valid_for(&self, tree: &OrientedTree) -> bool {
        match PrefixOrdering::from_order(tree, self.order.clone()) {
            Some(check) => check == *self,
            None => false,
        }
    }
}

/// Orders all vertices of `tree` starting from `root` under `policy`.
pub fn prefix_order(tree: &OrientedTree, root: usize, policy: OrderPolicy) -> PrefixOrdering {
    assert!(root < tree.n(), "root {root} out of range");
    let order = match policy {
        OrderPolicy::Any => tree.bfs(root).0,
        OrderPolicy::LeavesLastMiddlesConsecutive => leaves_last(tree, root),
    };
    PrefixOrdering::from_order(tree, order).expect("constructed order has the prefix property")
}

fn leaves_last(tree: &OrientedTree, root: usize) -> Vec<usize> {
    let n = tree.n();
    let inner = |v: usize| v == root || !tree.is_leaf(v);
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        order.push(u);
        // Push in reverse so the smallest neighbour is visited first.
        for &(w, _) in tree.neighbors(u).iter().rev() {
            if !seen[w] && inner(w) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut leaves: Vec<usize> = (0..n).filter(|&v| !seen[v]).collect();
    // Every remaining vertex is a leaf hanging off an inner vertex.
    leaves.sort_by_key(|&v| (pos[tree.neighbors(v)[0].0], v));
    order.extend(leaves);
    order
}
