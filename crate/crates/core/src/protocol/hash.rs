//! Toeplitz universal hashing for the final equality check.
//!
//! A `b x n` Toeplitz matrix over GF(2) drawn from `n + b - 1` uniform key
//! bits is a universal family: two distinct inputs collide with
//! probability exactly `2^-b` over the key.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{substream, Stream};
use crate::error::{Error, Result};

pub const TOEPLITZ: &str = "toeplitz-gf2";

/// A published hash value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashTag {
    pub algorithm: String,
    pub bits: Vec<u8>,
}

impl HashTag {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// `T s` with `T[i][j] = key[i - j + n - 1]`.
pub fn toeplitz(s: &[u8], key: &[u8], b: usize) -> Result<Vec<u8>> {
    let n = s.len();
    if b == 0 {
        return Err(Error::param("tag_bits", "must be >= 1"));
    }
    if key.len() != n + b - 1 {
        return Err(Error::param("key", format!("need {} bits, got {}", n + b - 1, key.len())));
    }
    let ones: Vec<usize> = (0..n).filter(|&j| s[j] == 1).collect();
    Ok((0..b)
        .map(|i| ones.iter().fold(0u8, |acc, &j| acc ^ key[i + n - 1 - j]))
        .collect())
}

/// Tag of `s` under the key derived from `seed`.
pub fn tag(s: &[u8], b: usize, seed: u64) -> Result<HashTag> {
    let mut rng = substream(seed, Stream::Keys, 1);
    let key: Vec<u8> = (0..s.len() + b.max(1) - 1).map(|_| rng.random_range(0..2u8)).collect();
    Ok(HashTag {
        algorithm: TOEPLITZ.to_string(),
        bits: toeplitz(s, &key, b)?,
    })
}

/// Compares `b`-bit tags of `s_a` and `s_b`. Unequal strings of equal
/// length pass with probability `2^-b`; different lengths never pass.
pub fn hash_verify(s_a: &[u8], s_b: &[u8], b: usize, seed: u64) -> Result<bool> {
    if s_a.len() != s_b.len() {
        return Ok(false);
    }
    Ok(tag(s_a, b, seed)? == tag(s_b, b, seed)?)
}

/// Effective rate `(R N - b) / N` once `b` tag bits are spent per frame.
pub fn rate_after_hash(rate: f64, n: usize, b: usize) -> f64 {
    (rate * n as f64 - b as f64) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_strings_verify() {
        let s: Vec<u8> = (0..300).map(|i| (i % 3 == 0) as u8).collect();
        assert!(hash_verify(&s, &s, 32, 1).unwrap());
        assert!(!hash_verify(&s, &s[1..], 32, 1).unwrap());
    }

    #[test]
    fn single_flips_detected() {
        let s: Vec<u8> = (0..200).map(|i| (i % 5 == 0) as u8).collect();
        for i in 0..200 {
            let mut t = s.clone();
            t[i] ^= 1;
            assert!(!hash_verify(&s, &t, 32, 9).unwrap(), "flip at {i}");
        }
    }

    #[test]
    fn toeplitz_matches_dense_product() {
        let key = [1, 0, 1, 1, 0, 0];
        let s = [1, 1, 0, 1];
        let b = 3;
        let n = s.len();
        let dense: Vec<u8> = (0..b)
            .map(|i| (0..n).fold(0, |acc, j| acc ^ (key[i + n - 1 - j] & s[j])))
            .collect();
        assert_eq!(toeplitz(&s, &key, b).unwrap(), dense);
        assert!(toeplitz(&s, &key[1..], b).is_err());
        assert!(toeplitz(&s, &key, 0).is_err());
    }

    #[test]
    fn hash_penalty() {
        let r = rate_after_hash(1.0 / 50.0, 1_000_000, 32);
        assert!((r - 0.019968).abs() < 1e-15);
    }
}
