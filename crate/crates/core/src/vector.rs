//! Embeddings, scored hits and the dot-product similarity every index ranks by.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A vector attached to a document or query identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<S = f32> {
    pub id: String,
    pub values: Vec<S>,
}

impl<S: Scalar> Embedding<S> {
    /// Builds an embedding, rejecting empty ids, empty vectors and non-finite components.
    pub fn new(id: impl Into<String>, values: Vec<S>) -> Result<Self> {
        let id = id.into();
        if values.is_empty() {
            return Err(Error::invalid(format!("embedding `{id}` has no components")));
        }
        check_finite(&id, &values)?;
        Ok(Embedding { id, values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn dot(&self, other: &Embedding<S>) -> Result<S> {
        dot(&self.values, &other.values)
    }
}

pub(crate) fn check_finite<S: Scalar>(id: &str, values: &[S]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(pos) => Err(Error::invalid(format!(
            "embedding `{id}` has a non-finite component at position {pos}"
        ))),
        None => Ok(()),
    }
}

/// One hit of a ranked result list.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc<S = f32> {
    pub doc_id: String,
    pub score: S,
}

impl<S: Scalar> ScoredDoc<S> {
    pub fn new(doc_id: impl Into<String>, score: S) -> Self {
        ScoredDoc { doc_id: doc_id.into(), score }
    }
}

/// Hits sorted by score descending, ties by doc id ascending.
pub type SearchResult<S = f32> = Vec<ScoredDoc<S>>;

/// Dot product of two equal-length slices.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> Result<S> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(dot_unchecked(a, b))
}

/// Eight independent partial sums so the loop vectorizes; the reduction order
/// is fixed, so results are reproducible and `dot(a, b) == dot(b, a)` bit for bit.
#[inline]
pub(crate) fn dot_unchecked<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [S::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for lane in 0..8 {
            acc[lane] = acc[lane] + x[lane] * y[lane];
        }
    }
    let mut tail = S::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail = tail + *x * *y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Canonical rank order: higher score first, then lexicographically smaller doc id.
pub fn canonical_order<S: Scalar>(a: &ScoredDoc<S>, b: &ScoredDoc<S>) -> Ordering {
    rank_cmp(a.score, &a.doc_id, b.score, &b.doc_id)
}

#[inline]
pub(crate) fn rank_cmp<S: Scalar>(sa: S, ida: &str, sb: S, idb: &str) -> Ordering {
    sb.partial_cmp(&sa).unwrap_or(Ordering::Equal).then_with(|| ida.cmp(idb))
}

/// Keeps the `k` best items seen so far; `Ord` must sort better items first.
pub(crate) struct BoundedTopK<T: Ord> {
    k: usize,
    heap: BinaryHeap<T>,
}

impl<T: Ord> BoundedTopK<T> {
    pub(crate) fn new(k: usize) -> Self {
        BoundedTopK { k, heap: BinaryHeap::with_capacity(k.min(1 << 16) + 1) }
    }

    #[inline]
    pub(crate) fn push(&mut self, item: T) {
        if self.heap.len() < self.k {
            self.heap.push(item);
        } else if let Some(mut worst) = self.heap.peek_mut() {
            if item < *worst {
                *worst = item;
            }
        }
    }

    /// Items in rank order, best first.
    pub(crate) fn into_sorted_vec(self) -> Vec<T> {
        self.heap.into_sorted_vec()
    }
}

struct Canonical<S>(ScoredDoc<S>);

impl<S: Scalar> PartialEq for Canonical<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Canonical<S> {}
impl<S: Scalar> PartialOrd for Canonical<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Canonical<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        canonical_order(&self.0, &other.0)
    }
}

/// Reduces a stream of hits to the `k` best under the canonical order.
///
/// Candidates are expected to carry distinct doc ids.
pub fn top_k_merge<S, I>(candidates: I, k: usize) -> Result<SearchResult<S>>
where
    S: Scalar,
    I: IntoIterator<Item = ScoredDoc<S>>,
{
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut top = BoundedTopK::new(k);
    for c in candidates {
        top.push(Canonical(c));
    }
    Ok(top.into_sorted_vec().into_iter().map(|c| c.0).collect())
}
