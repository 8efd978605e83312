//! Knowledge threads as Concept State Diagrams.
//!
//! Concepts are joined by multi-strand links whose affinity is the noisy-OR
//! of the strand weights. A thread ([`Csd`]) is a connected graph of concepts
//! with at least one apex unit (AKU) and one subsidiary unit (SKU); node
//! weights decay geometrically with hop distance from the nearest AKU. Two
//! threads combine through the tensor product of graphs, and the resulting
//! cluster is sieved into unique, valid, ranked derived threads.
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod concept;
pub mod csd;
pub mod learning;
pub mod retrieval;
pub mod tensor;

pub use concept::{
    link_affinity, Concept, ConceptError, ConceptId, ConceptStore, Strand, StrandedLink,
};
pub use csd::{Csd, CsdError, DEFAULT_DECAY};
pub use learning::{
    classify, extract_candidates, learn, sieve, CandidateCsd, CandidateSet, ConstraintSet,
    ExtractOptions, LearningError, Verdict,
};
pub use retrieval::{query, traverse, QueryResult, RetrievalError, ThreadStore};
pub use tensor::{edge_count_check, tensor_product, PairVertex, ProductCluster, TensorError};
