//! Exhaustive top-k search. Serves as the exact reference for the graph index.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::{check_finite, dot_unchecked, rank_cmp, BoundedTopK, Embedding, ScoredDoc, SearchResult};

/// Append-only collection of same-dimension embeddings stored contiguously.
#[derive(Debug, Clone)]
pub struct FlatIndex<S = f32> {
    dim: usize,
    ids: Vec<String>,
    positions: HashMap<String, u32>,
    vectors: Vec<S>,
}

/// A candidate hit that borrows its doc id from the index.
pub(crate) struct Hit<'a, S> {
    pub(crate) score: S,
    pub(crate) id: &'a str,
}

impl<S: Scalar> PartialEq for Hit<'_, S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Hit<'_, S> {}
impl<S: Scalar> PartialOrd for Hit<'_, S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Hit<'_, S> {
    fn cmp(&self, other: &Self) -> Ordering {
        rank_cmp(self.score, self.id, other.score, other.id)
    }
}

impl<S: Scalar> FlatIndex<S> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(FlatIndex { dim, ids: Vec::new(), positions: HashMap::new(), vectors: Vec::new() })
    }

    /// Builds an index from embeddings in order.
    pub fn from_embeddings<I>(dim: usize, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = Embedding<S>>,
    {
        let mut index = Self::new(dim)?;
        for e in items {
            index.add(e)?;
        }
        Ok(index)
    }

    pub fn add(&mut self, e: Embedding<S>) -> Result<()> {
        if e.values.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: e.values.len() });
        }
        check_finite(&e.id, &e.values)?;
        if self.positions.contains_key(&e.id) {
            return Err(Error::DuplicateId(e.id));
        }
        let pos = u32::try_from(self.ids.len()).map_err(|_| Error::invalid("index is full"))?;
        self.vectors.extend_from_slice(&e.values);
        self.positions.insert(e.id.clone(), pos);
        self.ids.push(e.id);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, id: &str) -> Option<&[S]> {
        self.positions.get(id).map(|&p| self.vector(p as usize))
    }

    fn vector(&self, pos: usize) -> &[S] {
        &self.vectors[pos * self.dim..(pos + 1) * self.dim]
    }

    fn check_query(&self, query: &[S], k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: query.len() });
        }
        Ok(())
    }

    fn scan(&self, query: &[S], k: usize, range: std::ops::Range<usize>) -> Vec<Hit<'_, S>> {
        let mut top = BoundedTopK::new(k);
        for pos in range {
            let score = dot_unchecked(query, self.vector(pos));
            top.push(Hit { score, id: &self.ids[pos] });
        }
        top.into_sorted_vec()
    }

    /// Exact top-k by dot product; returns `min(k, len)` hits.
    pub fn search(&self, query: &[S], k: usize) -> Result<SearchResult<S>> {
        self.check_query(query, k)?;
        Ok(into_result(self.scan(query, k, 0..self.len())))
    }

    /// Same result as [`FlatIndex::search`], with the scan split over `threads` workers.
    pub fn search_parallel(&self, query: &[S], k: usize, threads: usize) -> Result<SearchResult<S>> {
        self.check_query(query, k)?;
        let threads = threads.max(1).min(self.len());
        if threads == 1 {
            return self.search(query, k);
        }
        let chunk = self.len().div_ceil(threads);
        let partials: Vec<Vec<Hit<'_, S>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let range = t * chunk..((t + 1) * chunk).min(self.len());
                    scope.spawn(move || self.scan(query, k, range))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("scan worker panicked")).collect()
        });
        let mut top = BoundedTopK::new(k);
        for hit in partials.into_iter().flatten() {
            top.push(hit);
        }
        Ok(into_result(top.into_sorted_vec()))
    }
}

fn into_result<S: Scalar>(hits: Vec<Hit<'_, S>>) -> SearchResult<S> {
    hits.into_iter().map(|h| ScoredDoc { doc_id: h.id.to_owned(), score: h.score }).collect()
}
