//! Canonical forms of rooted and unrooted oriented trees.
//!
//! The encoding is the AHU bracket string with each child prefixed by `>`
//! (the child is an out-neighbour) or `<` (an in-neighbour). Strings grow
//! with subtree size times depth, so these are meant for the small trees that
//! get grouped into isomorphism classes.

use super::OrientedTree;
use crate::digraph::Sign;

fn edge_char(s: Sign) -> char {
    match s {
        Sign::Plus => '>',
        Sign::Minus => '<',
    }
}

/// Per-vertex forms and sorted children, computed bottom-up from `root`.
fn forms(tree: &OrientedTree, root: usize) -> (Vec<String>, Vec<Vec<usize>>) {
    let n = tree.n();
    let (order, parent) = tree.bfs(root);
    let mut form = vec![String::new(); n];
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &u in order.iter().rev() {
        let mut children: Vec<(String, usize)> = tree
            .neighbors(u)
            .iter()
            .filter(|&&(w, _)| parent[w] == Some(u))
            .map(|&(w, s)| {
                let mut key = String::with_capacity(form[w].len() + 1);
                key.push(edge_char(s));
                key.push_str(&form[w]);
                (key, w)
            })
            .collect();
        children.sort();
        let mut f = String::from("(");
        for (key, _) in &children {
            f.push_str(key);
        }
        f.push(')');
        form[u] = f;
        kids[u] = children.into_iter().map(|(_, w)| w).collect();
    }
    (form, kids)
}

/// Equal for two rooted oriented trees exactly when some isomorphism maps
/// root to root and preserves every edge direction.
pub fn canonical_rooted_form(tree: &OrientedTree, root: usize) -> String {
    forms(tree, root).0.swap_remove(root)
}

/// Vertices in preorder with children visited in canonical order. Two
/// rooted trees with equal canonical forms yield orders that correspond
/// position by position under an isomorphism.
pub fn canonical_order(tree: &OrientedTree, root: usize) -> Vec<usize> {
    let (_, kids) = forms(tree, root);
    let mut order = Vec::with_capacity(tree.n());
    let mut stack = vec![root];
    while let Some(u) = stack.pop() {
        order.push(u);
        stack.extend(kids[u].iter().rev());
    }
    order
}

/// The one or two vertices minimising eccentricity.
pub fn centers(tree: &OrientedTree) -> Vec<usize> {
    let n = tree.n();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut degree: Vec<usize> = (0..n).map(|v| tree.degree(v)).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &(w, _) in tree.neighbors(v) {
                degree[w] -= 1;
                if degree[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    layer.sort_unstable();
    layer
}

/// Canonical form of the unrooted tree together with a root achieving it.
/// Isomorphic trees (ignoring roots) get equal forms, and
/// [`canonical_order`] from the returned roots aligns them.
pub fn canonical_unrooted_form(tree: &OrientedTree) -> (String, usize) {
    centers(tree)
        .into_iter()
        .map(|c| (canonical_rooted_form(tree, c), c))
        .min()
        .expect("a tree has a center")
}
