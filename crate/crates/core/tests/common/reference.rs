//! Second, deliberately naive implementation of the metrics, written directly
//! from their definitions. Shares no code with the library.

use std::collections::BTreeMap;

pub struct Reference {
    pub rr10: f64,
    pub ap: f64,
    pub ndcg10: f64,
    pub r1k: f64,
}

/// `ranking` in rank order; `judged` maps doc -> grade.
pub fn score(ranking: &[String], judged: &BTreeMap<String, u32>, threshold: u32) -> Reference {
    let is_rel = |d: &String| judged.get(d).is_some_and(|&g| g >= threshold);
    let total_rel = judged.values().filter(|&&g| g >= threshold).count();

    let mut rr10 = 0.0;
    for r in 1..=ranking.len().min(10) {
        if is_rel(&ranking[r - 1]) {
            rr10 = 1.0 / r as f64;
            break;
        }
    }

    let mut ap = 0.0;
    if total_rel > 0 {
        for r in 1..=ranking.len().min(1000) {
            if is_rel(&ranking[r - 1]) {
                let rel_up_to_r = ranking[..r].iter().filter(|d| is_rel(d)).count();
                ap += rel_up_to_r as f64 / r as f64;
            }
        }
        ap /= total_rel as f64;
    }

    let gain_at = |r: usize| -> f64 {
        judged.get(&ranking[r - 1]).copied().unwrap_or(0) as f64 / (r as f64 + 1.0).log2()
    };
    let dcg: f64 = (1..=ranking.len().min(10)).map(gain_at).sum();
    let mut ideal: Vec<u32> = judged.values().copied().collect();
    ideal.sort();
    ideal.reverse();
    let idcg: f64 = ideal.iter().take(10).enumerate().map(|(i, &g)| g as f64 / (i as f64 + 2.0).log2()).sum();
    let ndcg10 = if idcg > 0.0 { dcg / idcg } else { 0.0 };

    let r1k = if total_rel > 0 {
        let top: std::collections::HashSet<&String> = ranking.iter().take(1000).collect();
        judged.iter().filter(|(d, &g)| g >= threshold && top.contains(d)).count() as f64 / total_rel as f64
    } else {
        0.0
    };

    Reference { rr10, ap, ndcg10, r1k }
}
