//! Frozen, immutable graph index.

use std::collections::HashMap;

use super::builder::EntryPoint;
use super::graph::{greedy_closest, search_layer, Adjacency, Candidate, Vectors};
use super::params::{HnswParams, SearchParams};
use super::visited::with_scratch;
use crate::error::{Error, Result};
use crate::flat::Hit;
use crate::scalar::Scalar;
use crate::vector::{BoundedTopK, ScoredDoc, SearchResult};

/// Immutable HNSW graph. Safe to share across threads for concurrent search.
///
/// Layer-0 lists use a fixed stride of `m0 + 1` slots (count, then ids); upper
/// layers are stored as blocks of `m + 1` slots, one per layer above 0.
#[derive(Debug, Clone)]
pub struct HnswIndex<S = f32> {
    pub(crate) params: HnswParams,
    pub(crate) dim: usize,
    pub(crate) ids: Vec<String>,
    pub(crate) positions: HashMap<String, u32>,
    pub(crate) vectors: Vec<S>,
    pub(crate) levels: Vec<u32>,
    layer0: Vec<u32>,
    upper_start: Vec<u32>,
    upper: Vec<u32>,
    pub(crate) entry: Option<EntryPoint>,
}

impl<S: Scalar> Adjacency for HnswIndex<S> {
    #[inline]
    fn with_neighbors<R>(&self, node: u32, layer: usize, f: impl FnOnce(&[u32]) -> R) -> R {
        f(self.neighbor_slice(node, layer))
    }
}

impl<S: Scalar> HnswIndex<S> {
    pub(crate) fn from_parts(
        params: HnswParams,
        dim: usize,
        ids: Vec<String>,
        vectors: Vec<S>,
        levels: Vec<u32>,
        links: &[Vec<Vec<u32>>],
        entry: Option<EntryPoint>,
    ) -> Self {
        let stride0 = params.m0 + 1;
        let stride = params.m + 1;
        let mut layer0 = vec![0u32; ids.len() * stride0];
        let mut upper_start = Vec::with_capacity(ids.len());
        let mut upper = Vec::new();
        for (node, node_links) in links.iter().enumerate() {
            write_list(&mut layer0[node * stride0..(node + 1) * stride0], &node_links[0]);
            upper_start.push((upper.len() / stride) as u32);
            for list in &node_links[1..] {
                let at = upper.len();
                upper.resize(at + stride, 0);
                write_list(&mut upper[at..at + stride], list);
            }
        }
        let positions = ids.iter().enumerate().map(|(i, id)| (id.clone(), i as u32)).collect();
        HnswIndex { params, dim, ids, positions, vectors, levels, layer0, upper_start, upper, entry }
    }

    #[inline]
    pub(crate) fn neighbor_slice(&self, node: u32, layer: usize) -> &[u32] {
        let block = if layer == 0 {
            let stride = self.params.m0 + 1;
            &self.layer0[node as usize * stride..(node as usize + 1) * stride]
        } else {
            let stride = self.params.m + 1;
            let start = (self.upper_start[node as usize] as usize + layer - 1) * stride;
            &self.upper[start..start + stride]
        };
        &block[1..1 + block[0] as usize]
    }

    pub fn params(&self) -> &HnswParams {
        &self.params
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

    pub fn vector(&self, id: &str) -> Option<&[S]> {
        self.positions.get(id).map(|&n| self.vectors_view().get(n))
    }

    pub fn entry_point(&self) -> Option<&str> {
        self.entry.map(|ep| self.ids[ep.node as usize].as_str())
    }

    /// Highest layer in the graph; `None` when empty.
    pub fn max_level(&self) -> Option<usize> {
        self.entry.map(|ep| ep.level)
    }

    pub fn level_of(&self, id: &str) -> Option<usize> {
        self.positions.get(id).map(|&n| self.levels[n as usize] as usize)
    }

    /// Neighbor ids of `id` on `layer`; `None` if the node is unknown or does not reach that layer.
    pub fn neighbors(&self, id: &str, layer: usize) -> Option<Vec<&str>> {
        let &node = self.positions.get(id)?;
        if layer > self.levels[node as usize] as usize {
            return None;
        }
        Some(self.neighbor_slice(node, layer).iter().map(|&n| self.ids[n as usize].as_str()).collect())
    }

    fn vectors_view(&self) -> Vectors<'_, S> {
        Vectors { data: &self.vectors, dim: self.dim }
    }

    /// Approximate top-k by dot product: greedy descent through the upper
    /// layers, then best-first expansion on layer 0 with a pool of `ef_search`.
    pub fn search(&self, query: &[S], sp: &SearchParams) -> Result<SearchResult<S>> {
        if sp.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let entry = self.entry.ok_or(Error::EmptyIndex)?;
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: query.len() });
        }
        let vectors = self.vectors_view();
        let mut current = Candidate { dist: vectors.distance(query, entry.node), node: entry.node };
        for layer in (1..=entry.level).rev() {
            current = greedy_closest(self, vectors, query, current, layer);
        }
        let ef = sp.ef_search.max(sp.k);
        let pool = with_scratch(|visited| {
            visited.reset(self.len());
            search_layer(self, vectors, query, &[current], ef, 0, visited)
        });
        let mut top = BoundedTopK::new(sp.k);
        for c in pool {
            top.push(Hit { score: -c.dist, id: &self.ids[c.node as usize] });
        }
        Ok(top
            .into_sorted_vec()
            .into_iter()
            .map(|h| ScoredDoc { doc_id: h.id.to_owned(), score: h.score })
            .collect())
    }
}

fn write_list(slots: &mut [u32], list: &[u32]) {
    slots[0] = list.len() as u32;
    slots[1..1 + list.len()].copy_from_slice(list);
}
