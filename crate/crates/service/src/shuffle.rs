//! Per-annotator column order.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Deterministic permutation of `sources` for one (annotator, document).
///
/// The RNG seed is SHA-256 over the campaign seed and the length-prefixed
/// ids, so distinct pairs get unrelated orders.
pub fn shuffle_columns(annotator_id: &str, document_id: &str, campaign_seed: u64, sources: &[String]) -> Vec<String> {
    let mut h = Sha256::new();
    h.update(campaign_seed.to_le_bytes());
    for part in [annotator_id, document_id] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    let mut rng = ChaCha8Rng::from_seed(seed);
    let mut out = sources.to_vec();
    out.shuffle(&mut rng);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_bijection() {
        let sources: Vec<String> = ["N1", "P1", "P2", "P3"].iter().map(|s| s.to_string()).collect();
        let a = shuffle_columns("A01", "d01", 42, &sources);
        assert_eq!(a, shuffle_columns("A01", "d01", 42, &sources));
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, sources);
        assert_eq!(shuffle_columns("A01", "d01", 42, &sources[..1]), vec!["N1".to_string()]);
        // length prefixes keep ("A0", "1d01") apart from ("A01", "d01")
        let differs = (0..20).any(|s| shuffle_columns("A0", "1d01", s, &sources) != shuffle_columns("A01", "d01", s, &sources));
        assert!(differs);
    }
}
