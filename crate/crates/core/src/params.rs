//! The parameter schedule: every constant the pipeline uses, in one place.
//!
//! The constants relate asymptotically (`c ≪ ε ≪ μ ≪ α` and so on), which
//! says nothing about concrete values at a few hundred vertices. The schedule
//! therefore stores them as plain configuration, and [`ParamSchedule::warnings`]
//! reports the orderings that a particular choice breaks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How trees hanging off the core by a single edge are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StarMode {
    /// One batch of perfect copies per isomorphism class of hanging tree.
    ByClass,
    /// All hanging trees of one attachment sign in one batch, each chained
    /// independently through shared layers.
    BySign,
}

/// Whether the core embedding steers through guide sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoreGuides {
    /// Guides when the restricted guide sets can hold every child of a core
    /// vertex, full neighbourhoods otherwise.
    Auto,
    /// Always guide sets and guide rows.
    On,
    /// Full neighbourhoods inside `V₀` and the target parts.
    Off,
}

/// Pipeline constants. Fields marked optional have a derived default, see
/// the accessor of the same name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamSchedule {
    /// Semidegree excess of the host: `δ⁰(D) ≥ (1/2 + α)n`.
    pub alpha: f64,
    /// Degree-cap constant; only reported, the concrete cap is
    /// `max_tree_semidegree`.
    pub c: f64,
    /// Slack fraction of the almost-spanning embedding.
    pub eps: f64,
    pub mu: f64,
    pub eta: f64,
    /// Buffer fraction for the path-attachment phase.
    pub beta: f64,
    /// Switch reservoir fraction for the absorber.
    pub lambda: f64,
    /// Minimum size of a path-attached tree.
    pub k: usize,
    /// Maximum size of a hanging or path-attached tree.
    #[serde(rename = "K")]
    pub big_k: usize,
    /// Extra room per star batch, as a fraction of `n`.
    pub p: f64,
    /// Share of the spare host vertices given to the core part `V₀`.
    pub q: f64,
    pub retry_budget: usize,
    pub max_tree_semidegree: usize,
    /// Independent-leaf threshold of the stripping rounds, as a fraction of
    /// `n`; default `1/(5k)`.
    pub strip_eps: Option<f64>,
    /// How far from a chunk end the attachment vertices may sit; default
    /// `max(⌊η³k⌋, ⌈k/8⌉)`.
    pub path_end_window: Option<usize>,
    /// Largest subtree hanging off an attachment vertex; default
    /// `max(⌊ηk/4⌋, ⌊ηK/8⌋)`.
    pub hang_cap: Option<usize>,
    /// Row width of restricted guide graphs, relative to each part; default
    /// `eps`.
    pub guide_eps: Option<f64>,
    /// Degree slack of guide graphs; default 1, the largest the
    /// construction allows.
    pub guide_eta: Option<f64>,
    /// Restricted guide set size as a fraction of `n`; default `α²p₀/4`
    /// for a core part of `p₀n` vertices.
    pub guide_mu: Option<f64>,
    /// Factor by which rows are widened before restriction to random sets.
    pub guide_row_inflation: f64,
    /// Size of the unrestricted guide set as a fraction of `n`; default
    /// `α²/2`, the largest the construction allows.
    pub guide_bar_mu: Option<f64>,
    pub star_mode: StarMode,
    pub core_guides: CoreGuides,
    /// Embed core vertices by conditioning on the target part instead of
    /// rejection.
    pub conditioning: bool,
    /// Complete failed small-forest matchings greedily.
    pub forest_repair: bool,
    /// Size of the absorbing part of the tree as a fraction of `n`.
    pub absorber_share: f64,
    /// Leftover fraction handed to absorption.
    pub absorber_eps: f64,
    /// Pairs sampled when checking the switching property; 0 checks all.
    pub s_check_samples: usize,
}

impl Default for ParamSchedule {
    fn default() -> Self {
        ParamSchedule {
            alpha: 0.25,
            c: 0.01,
            eps: 0.1,
            mu: 0.02,
            eta: 0.05,
            beta: 0.05,
            lambda: 0.01,
            k: 20,
            big_k: 400,
            p: 0.02,
            q: 0.5,
            retry_budget: 10,
            max_tree_semidegree: 3,
            strip_eps: None,
            path_end_window: None,
            hang_cap: None,
            guide_eps: None,
            guide_eta: None,
            guide_mu: None,
            guide_row_inflation: 1.0,
            guide_bar_mu: None,
            star_mode: StarMode::BySign,
            core_guides: CoreGuides::Auto,
            conditioning: false,
            forest_repair: false,
            absorber_share: 0.25,
            absorber_eps: 0.05,
            s_check_samples: 0,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad value `{value}` for `{key}`")))
}

fn parse_opt<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value.trim() {
        "" | "auto" | "default" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

impl ParamSchedule {
    /// Default schedule with the given `α`.
    pub fn with_alpha(alpha: f64) -> Self {
        ParamSchedule {
            alpha,
            ..Default::default()
        }
    }

    pub fn strip_eps(&self) -> f64 {
        self.strip_eps.unwrap_or(1.0 / (5.0 * self.k as f64))
    }

    pub fn path_end_window(&self) -> usize {
        self.path_end_window.unwrap_or_else(|| {
            let k = self.k as f64;
            ((self.eta.powi(3) * k).floor() as usize).max(self.k.div_ceil(8)).max(1)
        })
    }

    pub fn hang_cap(&self) -> usize {
        self.hang_cap.unwrap_or_else(|| {
            let small = (self.eta * self.k as f64 / 4.0).floor() as usize;
            let large = (self.eta * self.big_k as f64 / 8.0).floor() as usize;
            small.max(large)
        })
    }

    pub fn guide_eps(&self) -> f64 {
        self.guide_eps.unwrap_or(self.eps)
    }

    pub fn guide_eta(&self) -> f64 {
        self.guide_eta.unwrap_or(1.0)
    }

    pub fn guide_bar_mu(&self) -> f64 {
        self.guide_bar_mu.unwrap_or(self.alpha * self.alpha / 2.0)
    }

    /// Sets one field from its textual form. Keys are the field names
    /// (`K` or `big_k` for the upper tree size).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "alpha" => self.alpha = parse(key, value)?,
            "c" => self.c = parse(key, value)?,
            "eps" => self.eps = parse(key, value)?,
            "mu" => self.mu = parse(key, value)?,
            "eta" => self.eta = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "K" | "big_k" => self.big_k = parse(key, value)?,
            "p" => self.p = parse(key, value)?,
            "q" => self.q = parse(key, value)?,
            "retry_budget" | "retry" => self.retry_budget = parse(key, value)?,
            "max_tree_semidegree" => self.max_tree_semidegree = parse(key, value)?,
            "strip_eps" => self.strip_eps = parse_opt(key, value)?,
            "path_end_window" => self.path_end_window = parse_opt(key, value)?,
            "hang_cap" => self.hang_cap = parse_opt(key, value)?,
            "guide_eps" => self.guide_eps = parse_opt(key, value)?,
            "guide_eta" => self.guide_eta = parse_opt(key, value)?,
            "guide_mu" => self.guide_mu = parse_opt(key, value)?,
            "guide_row_inflation" => self.guide_row_inflation = parse(key, value)?,
            "guide_bar_mu" => self.guide_bar_mu = parse_opt(key, value)?,
            "star_mode" => {
                self.star_mode = match value.trim() {
                    "by-class" | "by_class" => StarMode::ByClass,
                    "by-sign" | "by_sign" => StarMode::BySign,
                    v => return Err(Error::InvalidParameter(format!("unknown star_mode `{v}`"))),
                }
            }
            "core_guides" => {
                self.core_guides = match value.trim() {
                    "auto" => CoreGuides::Auto,
                    "on" => CoreGuides::On,
                    "off" => CoreGuides::Off,
                    v => return Err(Error::InvalidParameter(format!("unknown core_guides `{v}`"))),
                }
            }
            "conditioning" => self.conditioning = parse(key, value)?,
            "forest_repair" => self.forest_repair = parse(key, value)?,
            "absorber_share" => self.absorber_share = parse(key, value)?,
            "absorber_eps" => self.absorber_eps = parse(key, value)?,
            "s_check_samples" => self.s_check_samples = parse(key, value)?,
            other => return Err(Error::InvalidParameter(format!("unknown parameter `{other}`"))),
        }
        Ok(())
    }

    /// Hard errors: values outside their domain.
    pub fn validate(&self) -> Result<()> {
        let fractions = [
            ("alpha", self.alpha),
            ("c", self.c),
            ("eps", self.eps),
            ("mu", self.mu),
            ("eta", self.eta),
            ("beta", self.beta),
            ("lambda", self.lambda),
            ("p", self.p),
            ("q", self.q),
            ("absorber_share", self.absorber_share),
            ("absorber_eps", self.absorber_eps),
        ];
        for (name, v) in fractions {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter(format!("{name}={v} must lie in (0, 1]")));
            }
        }
        if self.alpha >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "alpha={} must be below 1/2",
                self.alpha
            )));
        }
        if self.k < 2 || self.big_k < 1 || self.max_tree_semidegree < 1 {
            return Err(Error::InvalidParameter(
                "k ≥ 2, K ≥ 1 and max_tree_semidegree ≥ 1 required".into(),
            ));
        }
        if self.guide_row_inflation < 1.0 {
            return Err(Error::InvalidParameter("guide_row_inflation must be at least 1".into()));
        }
        Ok(())
    }

    /// Orderings the asymptotic argument relies on that this schedule breaks.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let chain = [("c", self.c), ("eps", self.eps), ("mu", self.mu), ("alpha", self.alpha)];
        // The chain c ≤ μ ≤ α is required; ε sits above μ in some steps and
        // below in others, so only the outer links are checked against it.
        for w in [(chain[0], chain[2]), (chain[2], chain[3]), (chain[0], chain[1])] {
            let ((a, x), (b, y)) = w;
            if x > y {
                out.push(format!("{a}={x} exceeds {b}={y}"));
            }
        }
        if self.guide_bar_mu() > self.alpha * self.alpha / 2.0 {
            out.push(format!(
                "guide set size {} exceeds α²/2 = {}",
                self.guide_bar_mu(),
                self.alpha * self.alpha / 2.0
            ));
        }
        if self.k < 8 {
            out.push(format!("k={} is below 8; length-6 bare paths may not fit", self.k));
        }
        if self.k > self.big_k {
            out.push(format!("k={} exceeds K={}", self.k, self.big_k));
        }
        if self.lambda > self.absorber_eps {
            out.push(format!(
                "lambda={} exceeds absorber_eps={}",
                self.lambda, self.absorber_eps
            ));
        }
        out
    }
}
