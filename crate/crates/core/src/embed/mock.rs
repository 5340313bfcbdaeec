use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Deterministic unit-norm pseudo-embedding of `text`.
///
/// Components are Gaussian draws from a generator keyed by SHA-256 of the
/// seed and the text, so the direction is uniform on the sphere and stable
/// across platforms and releases.
pub fn mock_embed(text: &str, dimension: usize, seed: u64) -> Result<Vec<f32>> {
    if dimension == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(text.as_bytes());
    let mut rng = ChaCha8Rng::from_seed(hasher.finalize().into());
    let raw: Vec<f64> = (0..dimension).map(|_| rng.sample(StandardNormal)).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(raw.into_iter().map(|x| (x / norm) as f32).collect())
}
