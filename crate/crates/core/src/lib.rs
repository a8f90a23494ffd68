//! Critical random directed graphs: sampling, depth-first exploration,
//! strongly connected components, and the continuum limit of the rescaled
//! component sequence.

pub mod continuum;
pub mod error;
pub mod exploration;
pub mod graph;
pub mod harness;
pub mod limit;
pub mod mdm;
pub mod realize;
pub mod rng;
pub mod scc;
pub mod stats;

pub use error::{Error, Result};
pub use exploration::{classify_edges, coupled_sample, forward_dfs, EdgeClassification, Exploration};
pub use graph::{critical_probability, sample_directed_gnp, sample_undirected_gnp, DirectedGraph, UndirectedGraph};
pub use mdm::{canonical_code, mdm_distance, sequence_distance, CanonicalCode, Mdm, MdmEdge, MdmStats};
pub use rng::Seed;
pub use scc::{mark_back_edges, ranked_scc_sequence, star_reduction, tarjan_scc, PlaneTree, SccPartition};
pub use continuum::{continuum_sccs, run_identification, sample_excursion, sample_tilted_excursion, ExcursionPath, MarkedTree};
pub use harness::{run_experiment, Experiment, ExperimentConfig, ResultRecord};
pub use limit::{sample_limit, sample_limit_components, LimitSample};
pub use realize::{apply_identifications, realize_sequence, PlaneTreeWithPairs};
