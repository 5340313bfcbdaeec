//! Per-query ranking metrics. Unjudged documents count as non-relevant.

use std::collections::{HashMap, HashSet};

/// `1/r` for the first relevant doc at 1-based rank `r <= k`, else 0.
pub fn rr_at_k<T: AsRef<str>>(ranking: &[T], relevant: &HashSet<&str>, k: usize) -> f64 {
    ranking
        .iter()
        .take(k)
        .position(|d| relevant.contains(d.as_ref()))
        .map_or(0.0, |pos| 1.0 / (pos + 1) as f64)
}

/// Mean over relevant documents of precision at their ranks (up to `cutoff`);
/// relevant documents never retrieved contribute 0. Returns 0 if nothing is relevant.
pub fn average_precision<T: AsRef<str>>(ranking: &[T], relevant: &HashSet<&str>, cutoff: usize) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (pos, doc) in ranking.iter().take(cutoff).enumerate() {
        if relevant.contains(doc.as_ref()) {
            hits += 1;
            sum += hits as f64 / (pos + 1) as f64;
        }
    }
    sum / relevant.len() as f64
}

/// DCG@k over IDCG@k with linear gain and `1/log2(rank + 1)` discount.
/// Returns 0 when no judged document has a positive grade.
pub fn ndcg_at_k<T: AsRef<str>>(ranking: &[T], grades: &HashMap<&str, u32>, k: usize) -> f64 {
    let discount = |pos: usize| 1.0 / ((pos + 2) as f64).log2();
    let mut ideal: Vec<u32> = grades.values().copied().filter(|&g| g > 0).collect();
    if ideal.is_empty() {
        return 0.0;
    }
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal.iter().take(k).enumerate().map(|(pos, &g)| g as f64 * discount(pos)).sum();
    let dcg: f64 = ranking
        .iter()
        .take(k)
        .enumerate()
        .map(|(pos, d)| grades.get(d.as_ref()).copied().unwrap_or(0) as f64 * discount(pos))
        .sum();
    dcg / idcg
}

/// Fraction of relevant documents found in the top `k`; 0 if nothing is relevant.
pub fn recall_at_k<T: AsRef<str>>(ranking: &[T], relevant: &HashSet<&str>, k: usize) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let found = ranking.iter().take(k).filter(|d| relevant.contains(d.as_ref())).count();
    found as f64 / relevant.len() as f64
}
