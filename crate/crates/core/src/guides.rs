//! Guide sets and guide graphs.
//!
//! For a vertex `v` and sign `◇`, a guide set `A ⊆ N^◇(v)` has two guide
//! graphs `H⁺, H⁻ ⊆ D` in which every `w ∈ A` has many `∘`-neighbours while
//! no vertex of `D` has many `∘̄`-neighbours in `A`. Placing a core vertex on
//! a uniformly random vertex of `A` and later matching its leaves along `H^∘`
//! is what keeps the star matchings skew-bounded.
//!
//! Entries are built on demand: an embedding only queries the guides of the
//! few vertices it actually uses as anchors.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::digraph::{Digraph, Sign, VertexSet};
use crate::error::{Error, FailureCause, Phase, Result};
use crate::matching::BipartitePattern;
use crate::params::ParamSchedule;

/// Smallest integer at least `x`, tolerating rounding noise.
pub(crate) fn lower_bound(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// The integer nearest to `x`, but at least 1: set sizes like `μn` are
/// rarely whole numbers.
pub(crate) fn set_size(x: f64) -> usize {
    (x.round() as usize).max(1)
}

/// Largest integer at most `x`, but never 0: a degree cap below one would
/// forbid every edge, which only happens because `n` is small.
pub(crate) fn upper_bound(x: f64) -> usize {
    ((x + 1e-9).floor() as usize).max(1)
}

/// Orderings `x₁…x_n` and `y₁…y_n` of `V(D)` with
/// `|N⁻(xᵢ) ∩ N^◇(v) ∩ N⁺(yᵢ)| ≥ threshold` for every `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XYLabeling {
    pub v: usize,
    pub sign: Sign,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    /// `⌈α²n⌉`.
    pub threshold: usize,
}

impl XYLabeling {
    /// `N⁻(xᵢ) ∩ N^◇(v) ∩ N⁺(yᵢ)`.
    pub fn triple(&self, d: &Digraph, i: usize) -> FixedBitSet {
        let mut s = d.neighbor_bits(self.x[i], Sign::Minus).clone();
        s.intersect_with(d.neighbor_bits(self.v, self.sign));
        s.intersect_with(d.neighbor_bits(self.y[i], Sign::Plus));
        s
    }

    /// Whether both orderings are permutations and every triple meets the
    /// threshold.
    pub fn verify(&self, d: &Digraph) -> bool {
        let n = d.n();
        let perm = |p: &[usize]| {
            let mut seen = vec![false; n];
            p.len() == n && p.iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
        };
        perm(&self.x) && perm(&self.y) && (0..n).all(|i| self.triple(d, i).count_ones(..) >= self.threshold)
    }
}

/// Matches every `x` to a `y` whose triple intersection reaches the
/// threshold. The auxiliary graph is dense, so edges are evaluated lazily:
/// a greedy pass settles almost everything and breadth-first augmentation
/// finishes the rest.
pub fn build_xy_labeling(d: &Digraph, v: usize, sign: Sign, alpha: f64) -> Result<XYLabeling> {
    let n = d.n();
    if v >= n {
        return Err(Error::InvalidParameter(format!("vertex {v} out of range")));
    }
    let threshold = lower_bound(alpha * alpha * n as f64);
    let base: Vec<FixedBitSet> = (0..n)
        .map(|x| {
            let mut b = d.neighbor_bits(x, Sign::Minus).clone();
            b.intersect_with(d.neighbor_bits(v, sign));
            b
        })
        .collect();
    let edge = |x: usize, y: usize| base[x].intersection_count(d.neighbor_bits(y, Sign::Plus)) >= threshold;

    let mut mate_x: Vec<Option<usize>> = vec![None; n];
    let mut mate_y: Vec<Option<usize>> = vec![None; n];
    let mut cursor = 0;
    for x in 0..n {
        // Rotate the starting point so the greedy pass spreads out.
        for k in 0..n {
            let y = (cursor + k) % n;
            if mate_y[y].is_none() && edge(x, y) {
                mate_x[x] = Some(y);
                mate_y[y] = Some(x);
                cursor = y + 1;
                break;
            }
        }
    }
    let mut rows: Vec<Option<Vec<usize>>> = vec![None; n];
    for root in 0..n {
        if mate_x[root].is_some() {
            continue;
        }
        // Alternating BFS over x vertices; `via[y]` is the x that reached y.
        let mut via = vec![usize::MAX; n];
        let mut queue = vec![root];
        let mut seen_x = vec![false; n];
        seen_x[root] = true;
        let mut free = None;
        let mut head = 0;
        'bfs: while head < queue.len() {
            let x = queue[head];
            head += 1;
            let row = rows[x].get_or_insert_with(|| (0..n).filter(|&y| edge(x, y)).collect());
            for &y in row.iter() {
                if via[y] != usize::MAX {
                    continue;
                }
                via[y] = x;
                match mate_y[y] {
                    None => {
                        free = Some(y);
                        break 'bfs;
                    }
                    Some(x2) if !seen_x[x2] => {
                        seen_x[x2] = true;
                        queue.push(x2);
                    }
                    Some(_) => {}
                }
            }
        }
        let Some(mut y) = free else {
            // The reached x vertices see only y vertices matched inside
            // the set, one fewer than its size.
            let violator: VertexSet = queue.into_iter().collect();
            return Err(Error::NoPerfectMatching { violator });
        };
        loop {
            let x = via[y];
            let prev = mate_x[x];
            mate_x[x] = Some(y);
            mate_y[y] = Some(x);
            match prev {
                Some(p) => y = p,
                None => break,
            }
        }
    }
    Ok(XYLabeling {
        v,
        sign,
        x: (0..n).collect(),
        y: mate_x.into_iter().map(|m| m.expect("all x matched")).collect(),
        threshold,
    })
}

/// Sizes of one guide construction, as fractions of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuideParams {
    /// Row width `εn`: guide-graph neighbours of each member of `A`.
    pub eps: f64,
    /// Degree slack: no vertex has more than `(1+η)μεn` guide neighbours.
    pub eta: f64,
    /// Guide set size `μn`.
    pub mu: f64,
}

impl GuideParams {
    pub fn set_size(&self, n: usize) -> usize {
        set_size(self.mu * n as f64)
    }

    pub fn row_width(&self, n: usize) -> usize {
        lower_bound(self.eps * n as f64).max(1)
    }

    /// The degree cap `(1+η)μεn`, rounded down but at least 1.
    pub fn degree_cap(&self, n: usize) -> usize {
        upper_bound((1.0 + self.eta) * self.mu * self.eps * n as f64)
    }
}

/// A guide set with its two guide graphs, stored as rows: `rows[◇][i]` lists
/// the `◇`-neighbours of `a[i]` in `H^◇`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuideEntry {
    pub v: usize,
    pub sign: Sign,
    /// The guide set in the order it was built.
    pub a: Vec<usize>,
    /// `H⁺` rows: out-neighbours `x_j` of each member.
    pub plus: Vec<Vec<usize>>,
    /// `H⁻` rows: in-neighbours `y_j` of each member.
    pub minus: Vec<Vec<usize>>,
    /// Declared skew bound: rows have at least this many entries...
    pub row_min: usize,
    /// ...and no vertex lies in more than this many rows of one graph.
    pub degree_cap: usize,
    /// Smallest candidate index set seen during the construction.
    pub min_candidates: usize,
}

impl GuideEntry {
    pub fn rows(&self, circ: Sign) -> &[Vec<usize>] {
        match circ {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }

    /// The `H^∘` row of guide member `w`, if `w ∈ A`.
    pub fn row_of(&self, w: usize, circ: Sign) -> Option<&[usize]> {
        let i = self.a.iter().position(|&x| x == w)?;
        Some(&self.rows(circ)[i])
    }

    pub fn edge_count(&self, circ: Sign) -> usize {
        self.rows(circ).iter().map(Vec::len).sum()
    }

    /// `H^∘` between `A` and `target` as a bipartite pattern with sign `∘`.
    pub fn pattern(&self, circ: Sign, target: &VertexSet) -> BipartitePattern {
        let edges: Vec<(usize, usize)> = self
            .a
            .iter()
            .zip(self.rows(circ))
            .flat_map(|(&w, row)| row.iter().filter(|&&u| target.contains(u)).map(move |&u| (w, u)))
            .collect();
        BipartitePattern::from_edges(self.a.clone(), target.to_vec(), circ, edges)
            .expect("labels come from the pattern")
    }

    /// Per-vertex `∘̄`-degree in `H^∘` over all of `V(D)`.
    pub fn host_degrees(&self, circ: Sign, n: usize) -> Vec<usize> {
        let mut deg = vec![0; n];
        for row in self.rows(circ) {
            for &u in row {
                deg[u] += 1;
            }
        }
        deg
    }

    /// Every structural promise of the entry, checked exhaustively. Returns
    /// the list of broken ones.
    pub fn audit(&self, d: &Digraph) -> Vec<String> {
        let mut out = Vec::new();
        let nv = d.neighbor_bits(self.v, self.sign);
        if let Some(&w) = self.a.iter().find(|&&w| !nv.contains(w)) {
            out.push(format!("{w} is not a {}-neighbour of {}", self.sign, self.v));
        }
        let mut distinct = self.a.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != self.a.len() {
            out.push("guide set has repeats".into());
        }
        for circ in Sign::BOTH {
            for (&w, row) in self.a.iter().zip(self.rows(circ)) {
                if let Some(&u) = row.iter().find(|&&u| !d.is_neighbor(w, circ, u)) {
                    out.push(format!("H{circ} edge {w}–{u} is not a {circ}-edge of D"));
                }
                if row.len() < self.row_min {
                    out.push(format!(
                        "H{circ} row of {w} has {} < {} entries",
                        row.len(),
                        self.row_min
                    ));
                }
            }
            let worst = self.host_degrees(circ, d.n()).into_iter().max().unwrap_or(0);
            if worst > self.degree_cap {
                out.push(format!("H{circ} has a vertex of degree {worst} > {}", self.degree_cap));
            }
        }
        out
    }

    /// Whether `H^∘` is `(row_min, degree_cap, ∘)`-skew-bounded on
    /// `(A, V(D))` for both `∘`.
    pub fn is_skew_bounded(&self, n: usize) -> bool {
        let all = VertexSet::range(n);
        Sign::BOTH
            .iter()
            .all(|&circ| crate::matching::is_skew_bounded(&self.pattern(circ, &all), self.row_min, self.degree_cap))
    }

    /// An audit dump: the guide set and the host-side degrees of `H^±`.
    pub fn to_audit_json(&self, n: usize) -> serde_json::Value {
        serde_json::json!({
            "v": self.v,
            "sign": self.sign,
            "a": self.a,
            "row_min": self.row_min,
            "degree_cap": self.degree_cap,
            "h_plus_in_degrees": self.host_degrees(Sign::Plus, n),
            "h_minus_out_degrees": self.host_degrees(Sign::Minus, n),
        })
    }
}

/// A fixed pseudo-random rank for tie-breaking, so that guide sets of
/// different anchors do not all crowd onto the lowest vertex ids.
fn tie_rank(v: usize, sign: Sign, w: usize) -> u64 {
    let mut z = (v as u64) << 32 ^ (w as u64) ^ ((sign.index() as u64) << 63);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds a guide entry for `(v, ◇)` from scratch.
pub fn build_guide(d: &Digraph, v: usize, sign: Sign, alpha: f64, params: GuideParams) -> Result<GuideEntry> {
    let labeling = build_xy_labeling(d, v, sign, alpha).map_err(|e| match e {
        Error::NoPerfectMatching { violator } => Error::phase(
            Phase::Core,
            FailureCause::GuideBuild,
            format!(
                "no xy-labeling for ({v}, {sign}): {} vertices violate Hall",
                violator.len()
            ),
        ),
        other => other,
    })?;
    build_guide_from(d, &labeling, params)
}

/// The inductive construction on a given labeling. Round `i` adds one vertex
/// `wᵢ` to `A` and joins it to `x_j` in `H⁺` and from `y_j` in `H⁻` for
/// `εn` indices `j` that still have room, so `d⁻_{H⁺}(x_j) = d⁺_{H⁻}(y_j)`
/// throughout and `e(H^∘)` grows by exactly `εn` per round.
pub fn build_guide_from(d: &Digraph, labeling: &XYLabeling, params: GuideParams) -> Result<GuideEntry> {
    let n = d.n();
    let size = params.set_size(n);
    let width = params.row_width(n);
    let cap = params.degree_cap(n);
    let fail = |detail: String| Error::phase(Phase::Core, FailureCause::GuideBuild, detail);
    if width > n {
        return Err(fail(format!("row width {width} exceeds n = {n}")));
    }
    let triples: Vec<FixedBitSet> = (0..n).map(|j| labeling.triple(d, j)).collect();
    // Shared degree of index j: d⁻_{H⁺}(x_j) = d⁺_{H⁻}(y_j).
    let mut deg = vec![0usize; n];
    // Candidates: indices that can take one more edge.
    let mut in_j = vec![cap > 0; n];
    let mut candidates = if cap > 0 { n } else { 0 };
    // coverage[w] = |{j ∈ J : w ∈ triple_j}|.
    let mut coverage = vec![0usize; n];
    for t in &triples {
        for w in t.ones() {
            coverage[w] += 1;
        }
    }
    let eligible = d.neighbor_bits(labeling.v, labeling.sign);
    let mut in_a = vec![false; n];
    let mut entry = GuideEntry {
        v: labeling.v,
        sign: labeling.sign,
        a: Vec::with_capacity(size),
        plus: Vec::with_capacity(size),
        minus: Vec::with_capacity(size),
        row_min: width,
        degree_cap: cap,
        min_candidates: candidates,
    };
    for round in 0..size {
        entry.min_candidates = entry.min_candidates.min(candidates);
        let best = eligible
            .ones()
            .filter(|&w| !in_a[w])
            .max_by_key(|&w| (coverage[w], tie_rank(labeling.v, labeling.sign, w)));
        let Some(w) = best.filter(|&w| coverage[w] >= width) else {
            let got = best.map_or(0, |w| coverage[w]);
            return Err(fail(format!(
                "round {round}: best coverage {got} < row width {width} ({candidates} candidate indices)"
            )));
        };
        in_a[w] = true;
        // Any `εn` covered indices will do; the least loaded keep the
        // degrees level, so the candidate set stays large for longer.
        let mut chosen: Vec<usize> = (0..n).filter(|&j| in_j[j] && triples[j].contains(w)).collect();
        chosen.sort_by_key(|&j| (deg[j], j));
        chosen.truncate(width);
        let mut plus = Vec::with_capacity(width);
        let mut minus = Vec::with_capacity(width);
        for &j in &chosen {
            plus.push(labeling.x[j]);
            minus.push(labeling.y[j]);
            deg[j] += 1;
            if deg[j] >= cap {
                in_j[j] = false;
                candidates -= 1;
                for u in triples[j].ones() {
                    coverage[u] -= 1;
                }
            }
        }
        plus.sort_unstable();
        minus.sort_unstable();
        entry.a.push(w);
        entry.plus.push(plus);
        entry.minus.push(minus);
        debug_assert_eq!(entry.edge_count(Sign::Plus), (round + 1) * width);
    }
    Ok(entry)
}

/// Which restriction condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestrictionCheck {
    /// Too few guide members inside `V₀`.
    Q1,
    /// A guide member has too few row entries in some part.
    Q2,
    /// A vertex lies in too many rows of members inside `V₀`.
    Q3,
}

/// Outcome of checking one entry against `V₀` and the parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionReport {
    pub failed: Vec<RestrictionCheck>,
    /// Members of the unrestricted set inside `V₀`.
    pub inside: usize,
    /// Smallest row count inside a part over the checked members.
    pub min_row: usize,
    /// Largest row multiplicity over the checked vertices.
    pub max_load: usize,
}

/// How much of the restriction to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RestrictMode {
    /// All three conditions over the whole unrestricted set and all of
    /// `V(D)`.
    Strict,
    /// Only over the chosen members and the parts, which is exactly what
    /// the skew bounds on `(A, Vᵢ)` need.
    Lenient,
    /// Only the size condition; the caller relies on later matchings to
    /// detect a bad sample.
    Unchecked,
}

/// Parameters of the restricted system: `A ⊆ V₀` of size `μn`, rows of at
/// least `ε|Vᵢ|` inside each part and loads at most `(1+η)εμn`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestrictParams {
    pub eps: f64,
    pub eta: f64,
    pub mu: f64,
    pub mode: RestrictMode,
}

impl RestrictParams {
    /// The unrestricted construction whose restriction should satisfy these
    /// bounds: rows widened to `(1+η/4)ε`, slack `η/4`, set size `bar_mu`.
    pub fn build_params(&self, bar_mu: f64, row_inflation: f64) -> GuideParams {
        GuideParams {
            eps: (1.0 + self.eta / 4.0) * self.eps * row_inflation,
            eta: self.eta / 4.0,
            mu: bar_mu,
        }
    }
}

/// Restricts an entry to `v0`, checking the three conditions. On success the
/// result keeps the first `⌈μn⌉` members inside `v0` with their full rows.
pub fn restrict_guide(
    entry: &GuideEntry,
    n: usize,
    v0: &VertexSet,
    parts: &[VertexSet],
    params: RestrictParams,
) -> std::result::Result<GuideEntry, RestrictionReport> {
    let size = set_size(params.mu * n as f64);
    let inside: Vec<usize> = (0..entry.a.len()).filter(|&i| v0.contains(entry.a[i])).collect();
    let chosen: Vec<usize> = inside.iter().copied().take(size).collect();
    let mut report = RestrictionReport {
        failed: Vec::new(),
        inside: inside.len(),
        min_row: usize::MAX,
        max_load: 0,
    };
    if inside.len() < size {
        report.failed.push(RestrictionCheck::Q1);
    }
    let strict = params.mode == RestrictMode::Strict;
    let checked_rows: Vec<usize> = match params.mode {
        RestrictMode::Strict => (0..entry.a.len()).collect(),
        RestrictMode::Lenient => chosen.clone(),
        RestrictMode::Unchecked => Vec::new(),
    };
    let loaded_by: &[usize] = match params.mode {
        RestrictMode::Strict => &inside,
        RestrictMode::Lenient => &chosen,
        RestrictMode::Unchecked => &[],
    };
    let cap = upper_bound((1.0 + params.eta) * params.eps * params.mu * n as f64);
    let masks: Vec<FixedBitSet> = parts.iter().map(|p| p.to_bitset(n)).collect();
    let mut q2 = false;
    for circ in Sign::BOTH {
        let rows = entry.rows(circ);
        for (part, mask) in parts.iter().zip(&masks) {
            let need = lower_bound(params.eps * part.len() as f64);
            for &i in &checked_rows {
                let got = rows[i].iter().filter(|&&u| mask.contains(u)).count();
                report.min_row = report.min_row.min(got);
                q2 |= got < need;
            }
        }
        let mut load = vec![0usize; n];
        for &i in loaded_by {
            for &u in &rows[i] {
                load[u] += 1;
            }
        }
        let relevant = |u: usize| strict || masks.iter().any(|m| m.contains(u));
        let worst = (0..n).filter(|&u| relevant(u)).map(|u| load[u]).max().unwrap_or(0);
        report.max_load = report.max_load.max(worst);
    }
    if q2 {
        report.failed.push(RestrictionCheck::Q2);
    }
    if report.max_load > cap {
        report.failed.push(RestrictionCheck::Q3);
    }
    if !report.failed.is_empty() {
        return Err(report);
    }
    let pick = |rows: &[Vec<usize>]| chosen.iter().map(|&i| rows[i].clone()).collect();
    Ok(GuideEntry {
        v: entry.v,
        sign: entry.sign,
        a: chosen.iter().map(|&i| entry.a[i]).collect(),
        plus: pick(&entry.plus),
        minus: pick(&entry.minus),
        row_min: parts
            .iter()
            .map(|p| lower_bound(params.eps * p.len() as f64))
            .min()
            .unwrap_or(entry.row_min),
        degree_cap: cap,
        min_candidates: entry.min_candidates,
    })
}

/// The guide parameters a schedule implies for a core part `V₀` of
/// `p0·n` vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuideSchedule {
    pub alpha: f64,
    pub restrict: RestrictParams,
    pub bar_mu: f64,
    pub row_inflation: f64,
}

impl GuideSchedule {
    pub fn from_params(params: &ParamSchedule, p0: f64, mode: RestrictMode) -> Self {
        let alpha = params.alpha;
        let eta = params.guide_eta();
        GuideSchedule {
            alpha,
            restrict: RestrictParams {
                eps: params.guide_eps(),
                eta,
                mu: params.guide_mu.unwrap_or(alpha * alpha * p0 / 4.0),
                mode,
            },
            bar_mu: params.guide_bar_mu(),
            row_inflation: params.guide_row_inflation,
        }
    }

    pub fn build_params(&self) -> GuideParams {
        self.restrict.build_params(self.bar_mu, self.row_inflation)
    }
}

/// Lazily built, restricted guide entries for one choice of `V₀` and parts.
#[derive(Debug)]
pub struct GuideSystem<'a> {
    d: &'a Digraph,
    schedule: GuideSchedule,
    v0: VertexSet,
    parts: Vec<VertexSet>,
    cache: HashMap<(usize, Sign), std::result::Result<GuideEntry, String>>,
    /// Entries built so far, for telemetry.
    pub built: usize,
}

impl<'a> GuideSystem<'a> {
    pub fn new(d: &'a Digraph, schedule: GuideSchedule, v0: VertexSet, parts: Vec<VertexSet>) -> Self {
        GuideSystem {
            d,
            schedule,
            v0,
            parts,
            cache: HashMap::new(),
            built: 0,
        }
    }

    pub fn v0(&self) -> &VertexSet {
        &self.v0
    }

    pub fn parts(&self) -> &[VertexSet] {
        &self.parts
    }

    /// The restricted entry of `(v, ◇)`, building it on first use.
    pub fn get(&mut self, v: usize, sign: Sign) -> Result<&GuideEntry> {
        if !self.cache.contains_key(&(v, sign)) {
            self.built += 1;
            let value = build_guide(self.d, v, sign, self.schedule.alpha, self.schedule.build_params())
                .map_err(|e| e.to_string())
                .and_then(|full| {
                    restrict_guide(&full, self.d.n(), &self.v0, &self.parts, self.schedule.restrict)
                        .map_err(|r| format!("restriction of ({v}, {sign}) failed {:?}", r.failed))
                });
            self.cache.insert((v, sign), value);
        }
        match &self.cache[&(v, sign)] {
            Ok(e) => Ok(e),
            Err(msg) => Err(Error::phase(Phase::Core, FailureCause::GuideRestrict, msg.clone())),
        }
    }
}

/// Restricts a batch of entries eagerly; the first failure aborts.
pub fn restrict_guides(
    entries: &[GuideEntry],
    n: usize,
    v0: &VertexSet,
    parts: &[VertexSet],
    params: RestrictParams,
) -> Result<Vec<GuideEntry>> {
    entries
        .iter()
        .map(|e| {
            restrict_guide(e, n, v0, parts, params).map_err(|r| {
                Error::phase(
                    Phase::Core,
                    FailureCause::GuideRestrict,
                    format!("({}, {}) failed {:?}", e.v, e.sign, r.failed),
                )
            })
        })
        .collect()
}
