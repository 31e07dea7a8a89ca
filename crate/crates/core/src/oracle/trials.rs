//! Seeded Monte Carlo trials over a parameter grid.
//!
//! A [`TrialConfig`] names a target (one randomized construction), a grid of
//! `n`, `α` and tree families, and a trial count. Per-trial seeds are drawn
//! from the caller's generator in grid order before anything runs, so the
//! reports are the same for any number of worker threads.
//!
//! Experiment files are flat `key = value` lines grouped under `[section]`
//! headers; keys before the first header are defaults for every section.
//!
//! ```text
//! seed = 7
//! [spanning]
//! target = spanning
//! n = 200, 500
//! alpha = 0.25, 0.3
//! trials = 100
//! param.retry_budget = 10
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digraph::{
    gen_semidegree_digraph, gen_semidegree_digraph_with_density, sample_disjoint_subsets, Digraph, Sign, VertexSet,
};
use crate::embed::{build_absorber, complete_absorption, embed_almost_spanning, embed_spanning};
use crate::embedding::{Embedding, Telemetry};
use crate::error::{Error, FailureCause, Phase, Result};
use crate::guides::{build_guide, restrict_guide, GuideParams, GuideSchedule, RestrictMode};
use crate::matching::{embed_small_forest, find_perfect_matching};
use crate::params::ParamSchedule;
use crate::tree::{decompose, gen_random_tree, OrientedTree, TreeFamily};

/// The construction a trial exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// A perfect `◇`-matching between two random disjoint sets of
    /// `set_size` vertices.
    PerfectMatching,
    /// One unrestricted guide set and its guide graphs: skew bounds and
    /// exact edge counts.
    GuideBuild,
    /// A guide entry restricted to random `V₀` (`p0·n`) and one part
    /// (`p1·n`), checked in `restrict_mode`.
    GuideRestrict,
    /// `components` copies of one random tree on `component_size` vertices.
    SmallForest,
    /// The structural decomposition of a random tree on `n` vertices.
    Decompose,
    /// An absorber for a tree on `μn` vertices, completed onto a random
    /// superset of `A`.
    Absorber,
    /// A tree on `⌊(1-ε)n⌋` vertices with `t` sent to a random vertex.
    Almost,
    /// A tree on `n` vertices covering the host.
    Spanning,
    /// A stored embedding checked against its digraph and tree.
    Verify,
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.trim().to_string()))
            .map_err(|_| Error::InvalidParameter(format!("unknown target `{s}`")))
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v = serde_json::to_value(self).expect("target serializes");
        f.write_str(v.as_str().expect("unit variant"))
    }
}

/// One experiment: a target, a grid and the knobs its instances need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub name: String,
    pub target: Target,
    pub ns: Vec<usize>,
    pub alphas: Vec<f64>,
    pub families: Vec<TreeFamily>,
    pub trials: usize,
    /// Seed for the generator that draws the per-trial seeds.
    pub seed: u64,
    /// Edge probability of generated hosts; default `min(1, 1/2 + 2α)`.
    pub density: Option<f64>,
    /// Schedule overrides applied on top of `ParamSchedule::with_alpha(α)`.
    pub overrides: Vec<(String, String)>,
    pub set_size: Option<usize>,
    pub component_size: usize,
    pub components: usize,
    pub p0: f64,
    pub p1: f64,
    pub restrict_mode: RestrictMode,
    /// Worker threads; 0 lets the pool decide. Does not affect results.
    pub jobs: usize,
    /// Record wall-clock milliseconds (off by default so output is
    /// reproducible byte for byte).
    pub timings: bool,
    pub digraph: Option<PathBuf>,
    pub tree: Option<PathBuf>,
    pub embedding: Option<PathBuf>,
}

impl TrialConfig {
    pub fn new(target: Target) -> Self {
        TrialConfig {
            name: target.to_string(),
            target,
            ns: vec![100],
            alphas: vec![0.3],
            families: vec![TreeFamily::Uniform],
            trials: 10,
            seed: 0,
            density: None,
            overrides: Vec::new(),
            set_size: None,
            component_size: 4,
            components: 50,
            p0: 0.3,
            p1: 0.5,
            restrict_mode: RestrictMode::Strict,
            jobs: 0,
            timings: false,
            digraph: None,
            tree: None,
            embedding: None,
        }
    }

    /// The schedule for one grid cell.
    pub fn params_for(&self, alpha: f64) -> Result<ParamSchedule> {
        let mut p = ParamSchedule::with_alpha(alpha);
        for (k, v) in &self.overrides {
            p.set(k, v)?;
        }
        p.validate()?;
        Ok(p)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::InvalidParameter(format!("bad value `{value}` for `{key}`"));
        let list = |v: &str| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect::<Vec<_>>()
        };
        match key {
            "target" => self.target = value.parse()?,
            "n" => {
                self.ns = list(value)
                    .iter()
                    .map(|s| s.parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?
            }
            "alpha" => {
                self.alphas = list(value)
                    .iter()
                    .map(|s| s.parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?
            }
            "family" => self.families = list(value).iter().map(|s| s.parse()).collect::<Result<_>>()?,
            "trials" => self.trials = value.parse().map_err(|_| bad())?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "density" => self.density = Some(value.parse().map_err(|_| bad())?),
            "set_size" => self.set_size = Some(value.parse().map_err(|_| bad())?),
            "component_size" => self.component_size = value.parse().map_err(|_| bad())?,
            "components" => self.components = value.parse().map_err(|_| bad())?,
            "p0" => self.p0 = value.parse().map_err(|_| bad())?,
            "p1" => self.p1 = value.parse().map_err(|_| bad())?,
            "restrict_mode" => {
                self.restrict_mode = match value {
                    "strict" => RestrictMode::Strict,
                    "lenient" => RestrictMode::Lenient,
                    "unchecked" => RestrictMode::Unchecked,
                    _ => return Err(bad()),
                }
            }
            "jobs" => self.jobs = value.parse().map_err(|_| bad())?,
            "timings" => self.timings = value.parse().map_err(|_| bad())?,
            "digraph" => self.digraph = Some(value.into()),
            "tree" => self.tree = Some(value.into()),
            "embedding" => self.embedding = Some(value.into()),
            _ => match key.strip_prefix("param.") {
                Some(field) => {
                    ParamSchedule::default().set(field, value)?;
                    self.overrides.push((field.to_string(), value.to_string()));
                }
                None => return Err(Error::InvalidParameter(format!("unknown experiment key `{key}`"))),
            },
        }
        Ok(())
    }
}

/// Parses an experiment file into one config per section. A file without
/// sections gives an empty list.
pub fn parse_experiments(text: &str) -> Result<Vec<TrialConfig>> {
    parse_experiments_seeded(text, 0)
}

/// One `key = value` line with its line number.
type Entry = (usize, String, String);

/// As [`parse_experiments`], with `seed` for sections whose file does not
/// set one.
pub fn parse_experiments_seeded(text: &str, seed: u64) -> Result<Vec<TrialConfig>> {
    let mut defaults: Vec<(usize, String, String)> = vec![(0, "seed".into(), seed.to_string())];
    let mut sections: Vec<(String, Vec<Entry>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            sections.push((name.trim().to_string(), Vec::new()));
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        let entry = (i + 1, k.trim().to_string(), v.trim().to_string());
        match sections.last_mut() {
            Some((_, pairs)) => pairs.push(entry),
            None => defaults.push(entry),
        }
    }
    sections
        .into_iter()
        .map(|(name, pairs)| {
            let mut cfg = TrialConfig::new(Target::Spanning);
            cfg.name = name.clone();
            let mut has_target = false;
            for (line, k, v) in defaults.iter().chain(&pairs) {
                has_target |= k == "target";
                cfg.set(k, v).map_err(|e| Error::Parse {
                    line: *line,
                    msg: e.to_string(),
                })?;
            }
            if !has_target {
                return Err(Error::InvalidParameter(format!("section [{name}] names no target")));
            }
            Ok(cfg)
        })
        .collect()
}

/// The outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    /// Seed of this trial's generator; rerunning with it reproduces the
    /// trial exactly.
    pub seed: u64,
    pub n: usize,
    pub alpha: f64,
    pub tree_family: TreeFamily,
    pub target: Target,
    pub success: bool,
    /// Failed attempts recorded by the pipeline. A pipeline that gives up
    /// has used its whole budget, which is what is reported then.
    pub retries: usize,
    pub retries_by_phase: BTreeMap<Phase, usize>,
    pub millis: u64,
    pub failure_cause: Option<FailureCause>,
    pub failure_phase: Option<Phase>,
    pub detail: String,
}

/// Column order of the trial CSV.
pub const CSV_HEADER: [&str; 9] = [
    "seed",
    "n",
    "alpha",
    "tree_family",
    "target",
    "success",
    "retries",
    "millis",
    "failure_cause",
];

impl TrialReport {
    /// The CSV row, in [`CSV_HEADER`] order.
    pub fn csv_row(&self) -> [String; 9] {
        [
            self.seed.to_string(),
            self.n.to_string(),
            self.alpha.to_string(),
            family_name(self.tree_family),
            self.target.to_string(),
            self.success.to_string(),
            self.retries.to_string(),
            self.millis.to_string(),
            self.failure_cause.map(|c| c.to_string()).unwrap_or_default(),
        ]
    }
}

fn family_name(f: TreeFamily) -> String {
    serde_json::to_value(f)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Success counts per grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub target: Target,
    pub n: usize,
    pub alpha: f64,
    pub tree_family: TreeFamily,
    pub trials: usize,
    pub successes: usize,
    pub retries: usize,
    pub millis: u64,
    /// Failure causes with their counts, most frequent first.
    pub causes: Vec<(FailureCause, usize)>,
}

impl TrialSummary {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }

    /// A CSV row in the trial schema: `seed` reads `summary`, `success`
    /// holds the success rate and `failure_cause` the most frequent cause.
    pub fn csv_row(&self) -> [String; 9] {
        [
            "summary".into(),
            self.n.to_string(),
            self.alpha.to_string(),
            family_name(self.tree_family),
            self.target.to_string(),
            format!("{:.4}", self.rate()),
            self.retries.to_string(),
            self.millis.to_string(),
            self.causes.first().map(|(c, _)| c.to_string()).unwrap_or_default(),
        ]
    }
}

/// Groups reports by cell, in first-appearance order.
pub fn summarize(reports: &[TrialReport]) -> Vec<TrialSummary> {
    let mut out: Vec<TrialSummary> = Vec::new();
    for r in reports {
        let same = |s: &TrialSummary| {
            s.target == r.target && s.n == r.n && s.alpha == r.alpha && s.tree_family == r.tree_family
        };
        let idx = match out.iter().position(same) {
            Some(i) => i,
            None => {
                out.push(TrialSummary {
                    target: r.target,
                    n: r.n,
                    alpha: r.alpha,
                    tree_family: r.tree_family,
                    trials: 0,
                    successes: 0,
                    retries: 0,
                    millis: 0,
                    causes: Vec::new(),
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        s.trials += 1;
        s.successes += usize::from(r.success);
        s.retries += r.retries;
        s.millis += r.millis;
        if let Some(c) = r.failure_cause {
            match s.causes.iter_mut().find(|(k, _)| *k == c) {
                Some((_, count)) => *count += 1,
                None => s.causes.push((c, 1)),
            }
        }
    }
    for s in &mut out {
        s.causes.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    }
    out
}

/// Runs every trial of `config`. Seeds come from `rng` in grid order
/// (`n`, then `α`, then family, then trial index), and the reports are
/// returned in that order whatever the thread count.
pub fn run_trials<R: Rng + ?Sized>(config: &TrialConfig, rng: &mut R) -> Result<Vec<TrialReport>> {
    if config.target == Target::Verify {
        return Ok(vec![verify_stored(config)?]);
    }
    let mut jobs = Vec::new();
    for &n in &config.ns {
        for &alpha in &config.alphas {
            let params = config.params_for(alpha)?;
            for &family in &config.families {
                for _ in 0..config.trials {
                    jobs.push((n, alpha, family, params.clone(), rng.gen::<u64>()));
                }
            }
        }
    }
    let run = || -> Vec<TrialReport> {
        jobs.par_iter()
            .map(|(n, alpha, family, params, seed)| run_one(config, *n, *alpha, *family, params, *seed))
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(run))
}

/// The outcome of one trial body, before timing and labelling.
struct Outcome {
    telemetry: Telemetry,
    result: Result<()>,
}

impl Outcome {
    fn ok(telemetry: Telemetry) -> Self {
        Outcome {
            telemetry,
            result: Ok(()),
        }
    }

    fn err(e: Error) -> Self {
        Outcome {
            telemetry: Telemetry::default(),
            result: Err(e),
        }
    }
}

fn run_one(
    config: &TrialConfig,
    n: usize,
    alpha: f64,
    family: TreeFamily,
    params: &ParamSchedule,
    seed: u64,
) -> TrialReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcome = match trial_body(config, n, alpha, family, params, &mut rng) {
        Ok(o) => o,
        Err(e) => Outcome::err(e),
    };
    let millis = if config.timings {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let mut report = TrialReport {
        seed,
        n,
        alpha,
        tree_family: family,
        target: config.target,
        success: outcome.result.is_ok(),
        retries: outcome.telemetry.total_retries(),
        retries_by_phase: outcome.telemetry.retries.clone(),
        millis,
        failure_cause: None,
        failure_phase: None,
        detail: String::new(),
    };
    if let Err(e) = outcome.result {
        report.failure_cause = e.cause();
        if let Error::PhaseFailed { phase, .. } = &e {
            report.failure_phase = Some(*phase);
        }
        if matches!(config.target, Target::Almost | Target::Spanning) && e.is_retryable() {
            report.retries = params.retry_budget.max(1);
        }
        report.detail = e.to_string();
    }
    report
}

fn host(config: &TrialConfig, n: usize, alpha: f64, rng: &mut ChaCha8Rng) -> Result<Digraph> {
    match config.density {
        Some(p) => gen_semidegree_digraph_with_density(n, alpha, p, rng),
        None => gen_semidegree_digraph(n, alpha, rng),
    }
}

fn failed(phase: Phase, cause: FailureCause, detail: impl Into<String>) -> Outcome {
    Outcome::err(Error::phase(phase, cause, detail))
}

fn trial_body(
    config: &TrialConfig,
    n: usize,
    alpha: f64,
    family: TreeFamily,
    params: &ParamSchedule,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome> {
    let cap = params.max_tree_semidegree;
    Ok(match config.target {
        Target::PerfectMatching => {
            let d = host(config, n, alpha, rng)?;
            let size = config.set_size.unwrap_or(n / 10).max(1);
            let sets = sample_disjoint_subsets(&d, &[size, size], rng)?;
            let sign = *Sign::BOTH.choose(rng).expect("two signs");
            match find_perfect_matching(&d, &sets[0], &sets[1], sign) {
                Ok(_) => Outcome::ok(Telemetry::default()),
                Err(e) => Outcome::err(e),
            }
        }
        Target::GuideBuild => {
            let d = host(config, n, alpha, rng)?;
            let v = rng.gen_range(0..n);
            let sign = *Sign::BOTH.choose(rng).expect("two signs");
            let gp = GuideParams {
                eps: params.guide_eps(),
                eta: params.guide_eta(),
                mu: params.guide_bar_mu(),
            };
            let entry = match build_guide(&d, v, sign, alpha, gp) {
                Ok(e) => e,
                Err(e) => return Ok(Outcome::err(e)),
            };
            let width = gp.row_width(n);
            let exact = Sign::BOTH.iter().all(|&c| entry.edge_count(c) == entry.a.len() * width);
            let problems = entry.audit(&d);
            if entry.a.len() == gp.set_size(n) && exact && entry.is_skew_bounded(n) && problems.is_empty() {
                Outcome::ok(Telemetry::default())
            } else {
                failed(
                    Phase::Core,
                    FailureCause::GuideBuild,
                    format!("exact edge counts: {exact}; audit: {problems:?}"),
                )
            }
        }
        Target::GuideRestrict => {
            let d = host(config, n, alpha, rng)?;
            let p0n = (config.p0 * n as f64).round() as usize;
            let p1n = (config.p1 * n as f64).round() as usize;
            let sets = sample_disjoint_subsets(&d, &[p0n, p1n], rng)?;
            let schedule = GuideSchedule::from_params(params, config.p0, config.restrict_mode);
            let v = rng.gen_range(0..n);
            let sign = *Sign::BOTH.choose(rng).expect("two signs");
            let full = match build_guide(&d, v, sign, alpha, schedule.build_params()) {
                Ok(e) => e,
                Err(e) => return Ok(Outcome::err(e)),
            };
            match restrict_guide(&full, n, &sets[0], &sets[1..], schedule.restrict) {
                Ok(_) => Outcome::ok(Telemetry::default()),
                Err(report) => failed(
                    Phase::Core,
                    FailureCause::GuideRestrict,
                    format!(
                        "failed {:?}: inside {}, min row {}, max load {}",
                        report.failed, report.inside, report.min_row, report.max_load
                    ),
                ),
            }
        }
        Target::SmallForest => {
            let d = host(config, n, alpha, rng)?;
            let shape = gen_random_tree(config.component_size, cap, family, rng)?;
            let forest = vec![shape; config.components];
            match embed_small_forest(&d, &forest, params.eps, rng) {
                Ok(emb) => {
                    if verify_forest(&d, &forest, &emb) {
                        Outcome::ok(emb.telemetry)
                    } else {
                        failed(Phase::Forest, FailureCause::HallFail, "forest copy failed verification")
                    }
                }
                Err(e) => Outcome::err(e),
            }
        }
        Target::Decompose => {
            let tree = gen_random_tree(n, cap, family, rng)?;
            let t = rng.gen_range(0..n);
            match decompose(&tree, t, params) {
                Ok(_) => Outcome::ok(Telemetry::default()),
                Err(e) => Outcome::err(e),
            }
        }
        Target::Absorber => {
            let d = host(config, n, alpha, rng)?;
            let size = ((params.mu * n as f64).round() as usize).clamp(1, n);
            let tree = gen_random_tree(size, cap, family, rng)?;
            let t = rng.gen_range(0..size);
            let state = match build_absorber(&d, &tree, t, params, rng) {
                Ok(s) => s,
                Err(e) => return Ok(Outcome::err(e)),
            };
            let mut outside: Vec<usize> = (0..n).filter(|&x| !state.a.contains(x)).collect();
            outside.shuffle(rng);
            let extra: VertexSet = outside.into_iter().take(state.missing()).collect();
            match complete_absorption(&d, &state, &state.a.union(&extra)) {
                Ok(emb) if super::verify_embedding(&d, &tree, &emb) => Outcome::ok(emb.telemetry),
                Ok(_) => failed(Phase::Absorption, FailureCause::SFail, "completion failed verification"),
                Err(e) => Outcome {
                    telemetry: state.telemetry,
                    result: Err(e),
                },
            }
        }
        Target::Almost => {
            let d = host(config, n, alpha, rng)?;
            let size = (((1.0 - params.eps) * n as f64).floor() as usize).max(1);
            let tree = gen_random_tree(size, cap, family, rng)?;
            let t = rng.gen_range(0..size);
            let v = rng.gen_range(0..n);
            pipeline(&d, &tree, embed_almost_spanning(&d, &tree, t, v, params, rng))
        }
        Target::Spanning => {
            let d = host(config, n, alpha, rng)?;
            let tree = gen_random_tree(n, cap, family, rng)?;
            pipeline(&d, &tree, embed_spanning(&d, &tree, params, rng))
        }
        Target::Verify => unreachable!("handled before the grid"),
    })
}

fn pipeline(d: &Digraph, tree: &OrientedTree, result: Result<Embedding>) -> Outcome {
    match result {
        Ok(emb) if super::verify_embedding(d, tree, &emb) => Outcome::ok(emb.telemetry),
        Ok(_) => unreachable!("pipelines verify what they return"),
        Err(e) => Outcome::err(e),
    }
}

/// Whether `emb` is a total injective map of the disjoint union of
/// `forest` (components labelled in order) respecting every edge.
fn verify_forest(d: &Digraph, forest: &[OrientedTree], emb: &Embedding) -> bool {
    let Some(map) = emb.to_vec() else {
        return false;
    };
    let mut seen = vec![false; d.n()];
    if map.iter().any(|&x| x >= d.n() || std::mem::replace(&mut seen[x], true)) {
        return false;
    }
    let mut offset = 0;
    forest.iter().all(|f| {
        let ok = f
            .edges()
            .iter()
            .all(|&(u, w)| d.has_edge(map[offset + u], map[offset + w]));
        offset += f.n();
        ok
    })
}

fn verify_stored(config: &TrialConfig) -> Result<TrialReport> {
    let read = |p: &Option<PathBuf>, what: &str| -> Result<String> {
        let path = p
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter(format!("verify needs `{what} = <path>`")))?;
        Ok(std::fs::read_to_string(path)?)
    };
    let d = Digraph::from_text(&read(&config.digraph, "digraph")?)?;
    let tree = OrientedTree::from_text(&read(&config.tree, "tree")?)?;
    let emb = Embedding::from_json(&read(&config.embedding, "embedding")?)?;
    let ok = super::verify_embedding(&d, &tree, &emb);
    Ok(TrialReport {
        seed: config.seed,
        n: d.n(),
        alpha: 0.0,
        tree_family: TreeFamily::Uniform,
        target: Target::Verify,
        success: ok,
        retries: 0,
        retries_by_phase: BTreeMap::new(),
        millis: 0,
        failure_cause: None,
        failure_phase: None,
        detail: if ok {
            String::new()
        } else {
            "embedding fails verification".into()
        },
    })
}
