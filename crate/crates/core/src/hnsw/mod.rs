//! Hierarchical navigable small-world graph for approximate top-k dot-product search.
//!
//! Construction goes through [`HnswBuilder`]; [`HnswBuilder::freeze`] yields an
//! immutable [`HnswIndex`] that can be searched concurrently and saved to an image.

mod builder;
mod graph;
mod image;
mod index;
mod params;
mod visited;

pub use builder::HnswBuilder;
pub use image::FORMAT_VERSION;
pub use index::HnswIndex;
pub use params::{HnswParams, SearchParams};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::vector::Embedding;

/// Builds and freezes an index over `items` in order.
pub fn build<S: Scalar>(
    params: HnswParams,
    dim: usize,
    items: Vec<Embedding<S>>,
    threads: usize,
) -> Result<HnswIndex<S>> {
    let mut builder = HnswBuilder::new(params, dim)?;
    builder.insert_all(items, threads)?;
    Ok(builder.freeze())
}
