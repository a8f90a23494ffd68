//! The continuum side: excursions coding R-trees, the Poisson identification
//! process on them, and the strongly connected components it produces.

mod excursion;
mod identification;
mod rmq;
mod tree;

pub use excursion::{sample_excursion, sample_tilted_excursion, unit_excursion, ExcursionPath, TiltedExcursion};
pub use identification::{
    mark_density, no_nonancestral_prob, run_identification, IdentificationProcess, Mark, MarkedTree,
    DEFAULT_MARK_CAP,
};
pub use tree::{continuum_sccs, ReducedTree, Spine, TreePoint};
