use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::VertexSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which stage of the embedding pipeline produced a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Decompose,
    Core,
    Stars,
    Paths,
    Leaves,
    Almost,
    Absorber,
    Absorption,
    Spanning,
    Forest,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Decompose => "decompose",
            Phase::Core => "core",
            Phase::Stars => "stars",
            Phase::Paths => "paths",
            Phase::Leaves => "leaves",
            Phase::Almost => "almost",
            Phase::Absorber => "absorber",
            Phase::Absorption => "absorption",
            Phase::Spanning => "spanning",
            Phase::Forest => "forest",
        };
        f.write_str(s)
    }
}

/// Failure taxonomy. Each variant names the randomized event that did not
/// occur, so telemetry can be grouped by cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureCause {
    GuideBuild,
    GuideRestrict,
    HallFail,
    SFail,
    ConnectorExhausted,
    LeafGreedyFail,
    /// The parameter schedule leaves no room for the requested sizes.
    Schedule,
}

impl fmt::Display for FailureCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FailureCause::GuideBuild => "guide-build",
            FailureCause::GuideRestrict => "guide-restrict",
            FailureCause::HallFail => "hall-fail",
            FailureCause::SFail => "S-fail",
            FailureCause::ConnectorExhausted => "connector-exhausted",
            FailureCause::LeafGreedyFail => "leaf-greedy-fail",
            FailureCause::Schedule => "schedule",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid digraph: {0}")]
    InvalidGraph(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {vertex} cannot be repaired to semidegree {target} (at most {max} possible)")]
    Unrepairable { vertex: usize, target: usize, max: usize },

    #[error("requested subset sizes sum to {requested} but only {available} vertices are available")]
    SizesExceed { requested: usize, available: usize },

    #[error("no perfect matching: {} vertices violate Hall's condition", .violator.len())]
    NoPerfectMatching { violator: VertexSet },

    #[error("matching precondition violated: {0}")]
    MatchingPrecondition(String),

    #[error("decomposition violates {} structural properties: {}", .violations.len(), join(.violations))]
    Decomposition { violations: Vec<crate::tree::Violation> },

    #[error("{phase} phase failed ({cause}): {detail}")]
    PhaseFailed {
        phase: Phase,
        cause: FailureCause,
        detail: String,
    },

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn join(items: &[crate::tree::Violation]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn phase(phase: Phase, cause: FailureCause, detail: impl Into<String>) -> Self {
        Error::PhaseFailed {
            phase,
            cause,
            detail: detail.into(),
        }
    }

    /// The failure cause, for errors raised by a pipeline phase.
    pub fn cause(&self) -> Option<FailureCause> {
        match self {
            Error::PhaseFailed { cause, .. } => Some(*cause),
            Error::NoPerfectMatching { .. } => Some(FailureCause::HallFail),
            _ => None,
        }
    }

    /// Whether resampling the random choices could make the operation succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            Error::PhaseFailed { cause, .. } => *cause != FailureCause::Schedule,
            Error::NoPerfectMatching { .. } => true,
            _ => false,
        }
    }
}
