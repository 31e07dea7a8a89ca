//! Partial embeddings of a tree into a host digraph, with provenance and
//! run telemetry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::digraph::{Digraph, VertexSet};
use crate::error::{FailureCause, Phase};
use crate::tree::OrientedTree;

/// Counters collected while a pipeline runs. Everything here is a
/// deterministic function of the inputs and seed; wall-clock timings are only
/// recorded when explicitly requested.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Telemetry {
    /// Failed attempts per phase.
    pub retries: BTreeMap<Phase, usize>,
    /// Failed attempts per cause.
    pub failures: BTreeMap<FailureCause, usize>,
    /// Free-form counters (matching sizes, repaired vertices, ...).
    pub counters: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<Phase, u64>>,
}

impl Telemetry {
    pub fn record_failure(&mut self, phase: Phase, cause: FailureCause) {
        *self.retries.entry(phase).or_default() += 1;
        *self.failures.entry(cause).or_default() += 1;
    }

    pub fn bump(&mut self, counter: &str, by: u64) {
        *self.counters.entry(counter.to_string()).or_default() += by;
    }

    pub fn total_retries(&self) -> usize {
        self.retries.values().sum()
    }

    /// Adds all counts from `other`.
    pub fn merge(&mut self, other: &Telemetry) {
        for (&p, &c) in &other.retries {
            *self.retries.entry(p).or_default() += c;
        }
        for (&f, &c) in &other.failures {
            *self.failures.entry(f).or_default() += c;
        }
        for (k, &c) in &other.counters {
            *self.counters.entry(k.clone()).or_default() += c;
        }
        if let Some(t) = &other.timings_ms {
            let mine = self.timings_ms.get_or_insert_with(BTreeMap::new);
            for (&p, &ms) in t {
                *mine.entry(p).or_default() += ms;
            }
        }
    }
}

/// A partial injective map from tree vertices to host vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    map: Vec<Option<usize>>,
    #[serde(skip)]
    inverse: Vec<Option<usize>>,
    host_n: usize,
    provenance: Vec<Option<Phase>>,
    pub telemetry: Telemetry,
}

impl Embedding {
    /// The empty map from a tree on `tree_n` vertices into a host on `host_n`.
    pub fn new(tree_n: usize, host_n: usize) -> Self {
        Embedding {
            map: vec![None; tree_n],
            inverse: vec![None; host_n],
            host_n,
            provenance: vec![None; tree_n],
            telemetry: Telemetry::default(),
        }
    }

    /// A total map, all tagged with `phase`.
    pub fn from_map(map: &[usize], host_n: usize, phase: Phase) -> Self {
        let mut e = Embedding::new(map.len(), host_n);
        for (u, &x) in map.iter().enumerate() {
            e.assign(u, x, phase);
        }
        e
    }

    pub fn tree_n(&self) -> usize {
        self.map.len()
    }

    pub fn host_n(&self) -> usize {
        self.host_n
    }

    /// Maps `u` to `x`.
    ///
    /// # Panics
    /// If `u` is already mapped or `x` already used; the phases never do
    /// this on purpose, so it indicates a bug.
    pub fn assign(&mut self, u: usize, x: usize, phase: Phase) {
        assert!(self.map[u].is_none(), "tree vertex {u} mapped twice");
        assert!(self.inverse[x].is_none(), "host vertex {x} used twice");
        self.map[u] = Some(x);
        self.inverse[x] = Some(u);
        self.provenance[u] = Some(phase);
    }

    /// Moves `u` to the unused host vertex `x`, returning its old image.
    pub fn reassign(&mut self, u: usize, x: usize) -> usize {
        assert!(self.inverse[x].is_none(), "host vertex {x} used twice");
        let old = self.map[u].expect("reassigning an unmapped vertex");
        self.inverse[old] = None;
        self.inverse[x] = Some(u);
        self.map[u] = Some(x);
        old
    }

    pub fn unassign(&mut self, u: usize) -> Option<usize> {
        let old = self.map[u].take()?;
        self.inverse[old] = None;
        self.provenance[u] = None;
        Some(old)
    }

    #[inline]
    pub fn get(&self, u: usize) -> Option<usize> {
        self.map[u]
    }

    /// Image of a vertex known to be mapped.
    #[inline]
    pub fn image_of(&self, u: usize) -> usize {
        self.map[u].unwrap_or_else(|| panic!("tree vertex {u} is unmapped"))
    }

    pub fn preimage(&self, x: usize) -> Option<usize> {
        self.inverse[x]
    }

    pub fn is_used(&self, x: usize) -> bool {
        self.inverse[x].is_some()
    }

    pub fn phase_of(&self, u: usize) -> Option<Phase> {
        self.provenance[u]
    }

    pub fn mapped_count(&self) -> usize {
        self.map.iter().filter(|m| m.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.map.iter().all(Option::is_some)
    }

    /// The map as a vector, if total.
    pub fn to_vec(&self) -> Option<Vec<usize>> {
        self.map.iter().copied().collect()
    }

    /// Host vertices in use.
    pub fn image(&self) -> VertexSet {
        self.map.iter().flatten().copied().collect()
    }

    /// Copies every assignment of `other`, whose tree vertices are labelled
    /// through `labels` (local index → vertex of this tree) and whose host
    /// vertices through `host_labels`. Vertices already mapped here are
    /// skipped when they agree.
    pub fn absorb(&mut self, other: &Embedding, labels: &[usize], host_labels: &[usize], phase: Phase) {
        for (i, m) in other.map.iter().enumerate() {
            if let Some(x) = m {
                let (u, hx) = (labels[i], host_labels[*x]);
                match self.map[u] {
                    Some(y) => assert_eq!(y, hx, "conflicting images for tree vertex {u}"),
                    None => self.assign(u, hx, other.provenance[i].unwrap_or(phase)),
                }
            }
        }
        self.telemetry.merge(&other.telemetry);
    }

    /// Rebuilds the inverse after deserialization.
    pub fn restore_inverse(&mut self) -> crate::error::Result<()> {
        self.inverse = vec![None; self.host_n];
        for (u, m) in self.map.iter().enumerate() {
            if let Some(x) = *m {
                if x >= self.host_n || self.inverse[x].is_some() {
                    return Err(crate::error::Error::InvalidParameter(format!(
                        "embedding is not injective or out of range at tree vertex {u}"
                    )));
                }
                self.inverse[x] = Some(u);
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("embedding serializes")
    }

    pub fn from_json(text: &str) -> crate::error::Result<Self> {
        let mut e: Embedding = serde_json::from_str(text)?;
        if e.provenance.len() != e.map.len() {
            e.provenance.resize(e.map.len(), None);
        }
        e.restore_inverse()?;
        Ok(e)
    }

    /// Whether every edge of `tree` with both ends mapped lands on an edge of
    /// `host` in the same direction. Injectivity holds by construction.
    pub fn respects_edges(&self, host: &Digraph, tree: &OrientedTree) -> bool {
        tree.edges().iter().all(|&(u, w)| match (self.map[u], self.map[w]) {
            (Some(x), Some(y)) => host.has_edge(x, y),
            _ => true,
        })
    }
}
