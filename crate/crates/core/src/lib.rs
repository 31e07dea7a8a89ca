//! Randomized embedding of spanning oriented trees into digraphs of high
//! minimum semidegree.

pub mod digraph;
pub mod embed;
pub mod embedding;
pub mod error;
pub mod guides;
pub mod matching;
pub mod oracle;
pub mod params;
pub mod tree;

pub use digraph::{Digraph, Sign, VertexSet};
pub use embedding::{Embedding, Telemetry};
pub use error::{Error, FailureCause, Phase, Result};
pub use params::{CoreGuides, ParamSchedule, StarMode};
pub use tree::OrientedTree;

/// The guide's chapters, compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hosts_and_trees.md")]
    mod hosts_and_trees {}
    #[doc = include_str!("../../../book/src/matchings.md")]
    mod matchings {}
    #[doc = include_str!("../../../book/src/guides.md")]
    mod guides {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/almost_spanning.md")]
    mod almost_spanning {}
    #[doc = include_str!("../../../book/src/absorption.md")]
    mod absorption {}
    #[doc = include_str!("../../../book/src/checking.md")]
    mod checking {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
}
