//! Embedded dense-retrieval engine.
//!
//! Embeddings are scored by raw dot product. [`FlatIndex`] answers top-k
//! queries exactly; [`HnswIndex`] answers them approximately from a layered
//! proximity graph. The remaining modules cover the rest of a retrieval
//! experiment: JSON-lines corpus I/O ([`ingest`]), an embedding client with
//! rate limiting, retries and checkpointing ([`embed`]), TREC-style evaluation
//! ([`eval`]) and throughput measurement ([`bench`]).
//!
//! The vector math is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below name the concrete instantiations.

pub mod bench;
pub mod embed;
pub mod error;
pub mod eval;
pub mod flat;
pub mod hnsw;
pub mod ingest;
pub mod scalar;
pub mod vector;

pub use error::{Error, Result};
pub use flat::FlatIndex;
pub use hnsw::{HnswBuilder, HnswIndex, HnswParams, SearchParams};
pub use scalar::Scalar;
pub use vector::{canonical_order, dot, top_k_merge, Embedding, ScoredDoc, SearchResult};

pub type Embedding32 = Embedding<f32>;
pub type Embedding64 = Embedding<f64>;
pub type ScoredDoc32 = ScoredDoc<f32>;
pub type ScoredDoc64 = ScoredDoc<f64>;
pub type FlatIndex32 = FlatIndex<f32>;
pub type FlatIndex64 = FlatIndex<f64>;
pub type HnswIndex32 = HnswIndex<f32>;
pub type HnswIndex64 = HnswIndex<f64>;
