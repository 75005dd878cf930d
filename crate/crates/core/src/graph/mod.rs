//! Sparse graph representation, similarity-based construction, symmetric
//! normalization and enrichment with mined edges.

mod enrich;
pub mod io;
mod normalize;
mod similarity;
mod sme;

pub use enrich::{enrich, EnrichedGraph, MinedEdge, Provenance};
pub use normalize::{normalize_adjacency, spmm, NormalizedAdjacency};
pub use similarity::{build_graph_from_similarity, standardize_columns};
pub use sme::{NodeKind, SmeGraph};
