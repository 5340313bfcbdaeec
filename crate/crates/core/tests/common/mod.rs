#![allow(dead_code)]
pub mod reference;

use densekit::eval::{Qrels, Run};
use densekit::{Embedding, ScoredDoc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn unit_vectors(n: usize, dim: usize, seed: u64, prefix: &str) -> Vec<Embedding> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let raw: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            let values = raw.iter().map(|x| (x / norm) as f32).collect();
            Embedding::new(format!("{prefix}{i}"), values).unwrap()
        })
        .collect()
}

pub fn uniform_vectors(n: usize, dim: usize, seed: u64) -> Vec<Embedding> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let values = (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
            Embedding::new(format!("d{i}"), values).unwrap()
        })
        .collect()
}

/// Exact top-k by sorting every f64 dot product. Independent of the engine.
pub fn brute_force_top_k(corpus: &[Embedding], query: &[f32], k: usize) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = corpus
        .iter()
        .map(|e| {
            let s: f64 = e.values.iter().zip(query).map(|(a, b)| *a as f64 * *b as f64).sum();
            (e.id.clone(), s)
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

pub fn recall(found: &[String], truth: &[String]) -> f64 {
    let hits = found.iter().filter(|id| truth.contains(id)).count();
    hits as f64 / truth.len() as f64
}

/// Random qrels and run over `n` queries; pools are small so hits are common.
pub fn synthetic(n: usize, seed: u64) -> (Qrels, Run) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut qrels = Qrels::default();
    let mut run = Run::new("synthetic");
    for q in 0..n {
        let qid = format!("q{q}");
        let pool = rng.random_range(5..1500);
        for _ in 0..rng.random_range(1..12) {
            qrels.insert(qid.clone(), format!("d{}", rng.random_range(0..pool)), rng.random_range(0..4));
        }
        if rng.random_bool(0.05) {
            continue;
        }
        let depth = rng.random_range(1..1200).min(pool);
        let mut docs: Vec<usize> = (0..pool).collect();
        docs.shuffle(&mut rng);
        // coarse scores produce ties
        let hits = docs[..depth].iter().map(|d| ScoredDoc::new(format!("d{d}"), rng.random_range(0..300) as f32)).collect();
        run.insert(qid, hits);
    }
    (qrels, run)
}
