//! Graph construction. Single-threaded inserts are deterministic for a fixed
//! seed and insertion order; batch inserts may link nodes from several threads.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use parking_lot::Mutex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::graph::{greedy_closest, search_layer, select_diverse, Adjacency, Candidate, Vectors};
use super::index::HnswIndex;
use super::params::HnswParams;
use super::visited::Visited;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::{check_finite, Embedding};

#[derive(Debug, Clone, Copy)]
pub(crate) struct EntryPoint {
    pub(crate) node: u32,
    pub(crate) level: usize,
}

/// Per-node adjacency, one list per layer `0..=level`.
type NodeLinks = Vec<Vec<u32>>;

struct LockedLinks<'a>(&'a [Mutex<NodeLinks>]);

impl Adjacency for LockedLinks<'_> {
    fn with_neighbors<R>(&self, node: u32, layer: usize, f: impl FnOnce(&[u32]) -> R) -> R {
        let links = self.0[node as usize].lock();
        f(&links[layer])
    }
}

/// Mutable index under construction. Call [`HnswBuilder::freeze`] to search or save.
pub struct HnswBuilder<S = f32> {
    params: HnswParams,
    dim: usize,
    ids: Vec<String>,
    positions: HashMap<String, u32>,
    vectors: Vec<S>,
    levels: Vec<u32>,
    links: Vec<Mutex<NodeLinks>>,
    entry: Mutex<Option<EntryPoint>>,
    rng: ChaCha8Rng,
    visited: Visited,
}

impl<S: Scalar> HnswBuilder<S> {
    pub fn new(params: HnswParams, dim: usize) -> Result<Self> {
        params.validate()?;
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(HnswBuilder {
            params,
            dim,
            ids: Vec::new(),
            positions: HashMap::new(),
            vectors: Vec::new(),
            levels: Vec::new(),
            links: Vec::new(),
            entry: Mutex::new(None),
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            visited: Visited::default(),
        })
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

    fn check(&self, e: &Embedding<S>) -> Result<()> {
        if e.values.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: e.values.len() });
        }
        check_finite(&e.id, &e.values)?;
        if self.positions.contains_key(&e.id) {
            return Err(Error::DuplicateId(e.id.clone()));
        }
        Ok(())
    }

    /// `floor(-ln(u) * level_scale)` with `u` uniform on (0, 1].
    fn sample_level(&mut self) -> usize {
        let u = 1.0 - self.rng.random::<f64>();
        (-u.ln() * self.params.level_scale).floor() as usize
    }

    fn append(&mut self, e: Embedding<S>) -> Result<u32> {
        let node = u32::try_from(self.ids.len())
            .ok()
            .filter(|&n| n < u32::MAX)
            .ok_or_else(|| Error::invalid("index is full"))?;
        let level = self.sample_level();
        self.vectors.extend_from_slice(&e.values);
        self.positions.insert(e.id.clone(), node);
        self.ids.push(e.id);
        self.levels.push(level as u32);
        self.links.push(Mutex::new(vec![Vec::new(); level + 1]));
        Ok(node)
    }

    /// Inserts one embedding and links it into the graph.
    pub fn insert(&mut self, e: Embedding<S>) -> Result<()> {
        self.check(&e)?;
        let node = self.append(e)?;
        let mut visited = std::mem::take(&mut self.visited);
        self.link(node, &mut visited);
        self.visited = visited;
        Ok(())
    }

    /// Inserts a batch. With `threads > 1` nodes are linked concurrently and the
    /// resulting graph depends on scheduling; levels are still drawn in input order.
    /// The batch is validated up front, so on error nothing is inserted.
    pub fn insert_all(&mut self, items: Vec<Embedding<S>>, threads: usize) -> Result<()> {
        let mut batch_ids = HashSet::with_capacity(items.len());
        for e in &items {
            self.check(e)?;
            if !batch_ids.insert(e.id.as_str()) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
        }
        drop(batch_ids);

        let threads = threads.max(1);
        if threads == 1 {
            for e in items {
                self.insert(e)?;
            }
            return Ok(());
        }

        let start = self.len();
        for e in items {
            self.append(e)?;
        }
        let end = self.len();
        let next = AtomicUsize::new(start);
        let this = &*self;
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(|| {
                    let mut visited = Visited::default();
                    loop {
                        let node = next.fetch_add(1, AtomicOrdering::Relaxed);
                        if node >= end {
                            break;
                        }
                        this.link(node as u32, &mut visited);
                    }
                });
            }
        });
        Ok(())
    }

    fn cap(&self, layer: usize) -> usize {
        if layer == 0 {
            self.params.m0
        } else {
            self.params.m
        }
    }

    /// Connects an appended node. Takes `&self` so batch inserts can share the builder.
    fn link(&self, node: u32, visited: &mut Visited) {
        let level = self.levels[node as usize] as usize;
        let entry = {
            let mut guard = self.entry.lock();
            match *guard {
                None => {
                    *guard = Some(EntryPoint { node, level });
                    return;
                }
                Some(ep) => ep,
            }
        };

        let vectors = Vectors { data: &self.vectors, dim: self.dim };
        let graph = LockedLinks(&self.links);
        let query = vectors.get(node);

        let mut current = Candidate { dist: vectors.distance(query, entry.node), node: entry.node };
        for layer in (level + 1..=entry.level).rev() {
            current = greedy_closest(&graph, vectors, query, current, layer);
        }

        let mut entry_points = vec![current];
        for layer in (0..=level.min(entry.level)).rev() {
            visited.reset(self.len());
            let pool = search_layer(
                &graph,
                vectors,
                query,
                &entry_points,
                self.params.ef_construction,
                layer,
                visited,
            );
            let cap = self.cap(layer);
            let selected = select_diverse(vectors, &pool, cap);
            self.links[node as usize].lock()[layer] = selected.clone();

            for &neighbor in &selected {
                let mut links = self.links[neighbor as usize].lock();
                let list = &mut links[layer];
                if list.contains(&node) {
                    continue;
                }
                if list.len() < cap {
                    list.push(node);
                    continue;
                }
                let base = vectors.get(neighbor);
                let mut cands: Vec<Candidate<S>> = list
                    .iter()
                    .chain(std::iter::once(&node))
                    .map(|&n| Candidate { dist: vectors.distance(base, n), node: n })
                    .collect();
                cands.sort();
                *list = select_diverse(vectors, &cands, cap);
            }
            entry_points = pool;
        }

        if level > entry.level {
            let mut guard = self.entry.lock();
            if guard.is_none_or(|ep| level > ep.level) {
                *guard = Some(EntryPoint { node, level });
            }
        }
    }

    /// Finishes construction.
    pub fn freeze(self) -> HnswIndex<S> {
        let links: Vec<NodeLinks> = self.links.into_iter().map(Mutex::into_inner).collect();
        HnswIndex::from_parts(
            self.params,
            self.dim,
            self.ids,
            self.vectors,
            self.levels,
            &links,
            self.entry.into_inner(),
        )
    }
}
