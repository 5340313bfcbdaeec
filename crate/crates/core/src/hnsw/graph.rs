//! Traversal and neighbor-selection routines shared by the builder and the frozen index.
//!
//! Graph "distance" is the negated dot product, so smaller is closer.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::visited::Visited;
use crate::scalar::Scalar;
use crate::vector::dot_unchecked;

/// Read access to adjacency lists.
pub(crate) trait Adjacency {
    fn with_neighbors<R>(&self, node: u32, layer: usize, f: impl FnOnce(&[u32]) -> R) -> R;
}

/// Contiguous vectors of one dimension.
#[derive(Clone, Copy)]
pub(crate) struct Vectors<'a, S> {
    pub(crate) data: &'a [S],
    pub(crate) dim: usize,
}

impl<'a, S: Scalar> Vectors<'a, S> {
    #[inline]
    pub(crate) fn get(&self, node: u32) -> &'a [S] {
        let start = node as usize * self.dim;
        &self.data[start..start + self.dim]
    }

    #[inline]
    pub(crate) fn distance(&self, query: &[S], node: u32) -> S {
        -dot_unchecked(query, self.get(node))
    }

    #[inline]
    pub(crate) fn distance_between(&self, a: u32, b: u32) -> S {
        -dot_unchecked(self.get(a), self.get(b))
    }
}

/// A node paired with its distance to the current query.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate<S> {
    pub(crate) dist: S,
    pub(crate) node: u32,
}

impl<S: Scalar> PartialEq for Candidate<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Candidate<S> {}
impl<S: Scalar> PartialOrd for Candidate<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Candidate<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .partial_cmp(&other.dist)
            .unwrap_or(Ordering::Equal)
            .then(self.node.cmp(&other.node))
    }
}

/// Walks to a local minimum on `layer`, one best neighbor at a time.
pub(crate) fn greedy_closest<S: Scalar, A: Adjacency>(
    graph: &A,
    vectors: Vectors<'_, S>,
    query: &[S],
    mut current: Candidate<S>,
    layer: usize,
) -> Candidate<S> {
    loop {
        let next = graph.with_neighbors(current.node, layer, |neighbors| {
            let mut best = current;
            for &n in neighbors {
                let c = Candidate { dist: vectors.distance(query, n), node: n };
                if c < best {
                    best = c;
                }
            }
            best
        });
        if next.node == current.node {
            return current;
        }
        current = next;
    }
}

/// Best-first expansion on one layer keeping a pool of `ef` closest nodes.
/// Returns the pool sorted closest first.
pub(crate) fn search_layer<S: Scalar, A: Adjacency>(
    graph: &A,
    vectors: Vectors<'_, S>,
    query: &[S],
    entry_points: &[Candidate<S>],
    ef: usize,
    layer: usize,
    visited: &mut Visited,
) -> Vec<Candidate<S>> {
    let mut frontier: BinaryHeap<Reverse<Candidate<S>>> = BinaryHeap::with_capacity(ef * 2);
    let mut pool: BinaryHeap<Candidate<S>> = BinaryHeap::with_capacity(ef + 1);
    for &ep in entry_points {
        if visited.insert(ep.node) {
            frontier.push(Reverse(ep));
            pool.push(ep);
            if pool.len() > ef {
                pool.pop();
            }
        }
    }

    while let Some(Reverse(closest)) = frontier.pop() {
        let furthest = *pool.peek().expect("pool is never empty here");
        if closest.dist > furthest.dist && pool.len() >= ef {
            break;
        }
        graph.with_neighbors(closest.node, layer, |neighbors| {
            for &n in neighbors {
                if !visited.insert(n) {
                    continue;
                }
                let c = Candidate { dist: vectors.distance(query, n), node: n };
                let worst = pool.peek().expect("pool is never empty here");
                if pool.len() < ef || c < *worst {
                    frontier.push(Reverse(c));
                    pool.push(c);
                    if pool.len() > ef {
                        pool.pop();
                    }
                }
            }
        });
    }
    pool.into_sorted_vec()
}

/// Diversity heuristic: walking candidates closest first, keep one only if it
/// is closer to the base node than to every neighbor already kept.
/// `candidates` must be sorted closest first.
pub(crate) fn select_diverse<S: Scalar>(
    vectors: Vectors<'_, S>,
    candidates: &[Candidate<S>],
    max: usize,
) -> Vec<u32> {
    let mut kept: Vec<u32> = Vec::with_capacity(max);
    for c in candidates {
        if kept.len() >= max {
            break;
        }
        let diverse = kept.iter().all(|&r| c.dist < vectors.distance_between(c.node, r));
        if diverse {
            kept.push(c.node);
        }
    }
    kept
}
