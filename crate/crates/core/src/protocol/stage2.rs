//! Stage 2: syndrome-based correction of the residual errors left in the
//! accepted frames.
//!
//! Alice concatenates the information bits of every accepted frame into
//! `c_h`, zero-pads it to the code length and sends the syndrome
//! `p_A = c_h H^T` under a one-time pad. Bob forms `p_A + p_B = e H^T`,
//! decodes `e^` over a BSC and corrects his own string. Padding positions
//! are public zeros on both sides, so their error prior is saturated.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{substream, Stream};
use crate::error::{check_len, Error, Result};
use crate::ldpc::construct::{irregular, HIGH_RATE_PROFILE};
use crate::ldpc::decode::{bsc_llr, LLR_LIMIT};
use crate::ldpc::{decode_syndrome, BpConfig, LdpcCode};
use crate::skr::binary_entropy;

/// Crossover probabilities are clamped into `[MIN_CROSSOVER, 0.5)`.
pub const MIN_CROSSOVER: f64 = 1e-9;

/// Pre-shared secret key, spent once.
///
/// Every draw is recorded with its session id; asking for bits that
/// overlap an earlier draw is a [`Error::KeyMaterial`] error.
#[derive(Debug, Clone)]
pub struct OtpPool {
    bits: Vec<u8>,
    cursor: usize,
    spent: Vec<(u32, Range<usize>)>,
}

impl OtpPool {
    pub fn new(bits: Vec<u8>) -> Self {
        OtpPool {
            bits,
            cursor: 0,
            spent: Vec::new(),
        }
    }

    /// Simulated shared key: `len` bits from the key substream of `seed`.
    pub fn from_seed(seed: u64, len: usize) -> Self {
        let mut rng = substream(seed, Stream::Keys, 0);
        OtpPool::new((0..len).map(|_| rng.random_range(0..2u8)).collect())
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.cursor
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// The next `n` unused bits.
    pub fn take(&mut self, session: u32, n: usize) -> Result<Vec<u8>> {
        self.take_at(session, self.cursor, n)
    }

    /// Bits `start..start + n`, which must never have been drawn before.
    pub fn take_at(&mut self, session: u32, start: usize, n: usize) -> Result<Vec<u8>> {
        let range = start..start + n;
        if range.end > self.bits.len() {
            return Err(Error::KeyMaterial(format!(
                "session {session} needs {n} pad bits at offset {start}, pool holds {}",
                self.bits.len()
            )));
        }
        if let Some((s, r)) = self.spent.iter().find(|(_, r)| r.start < range.end && range.start < r.end) {
            return Err(Error::KeyMaterial(format!(
                "pad bits {range:?} overlap bits {r:?} already used by session {s}"
            )));
        }
        self.cursor = self.cursor.max(range.end);
        self.spent.push((session, range.clone()));
        Ok(self.bits[range].to_vec())
    }
}

/// Stage-2 settings shared by both parties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Stage2Config {
    /// Calibrated BER_AF for the session's code, channel and AFR.
    pub crossover_p: f64,
    /// Design efficiency: syndrome length `ceil(L (1 - beta_h (1 - h(p))))`
    /// for `L` payload bits.
    pub beta_h: f64,
    /// Code lengths are multiples of this; the gap is zero padding.
    pub granularity: usize,
    pub code_seed: u64,
    pub bp: BpConfig,
}

impl Default for Stage2Config {
    fn default() -> Self {
        Stage2Config {
            crossover_p: 0.01,
            beta_h: 0.85,
            granularity: 64,
            code_seed: 1,
            bp: BpConfig::default(),
        }
    }
}

impl Stage2Config {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.crossover_p) {
            return Err(Error::param("crossover_p", "must lie in [0, 0.5)"));
        }
        if !(self.beta_h > 0.0 && self.beta_h <= 1.0) {
            return Err(Error::param("beta_h", "must lie in (0, 1]"));
        }
        if self.granularity == 0 {
            return Err(Error::param("granularity", "must be >= 1"));
        }
        Ok(())
    }

    pub fn effective_crossover(&self) -> f64 {
        self.crossover_p.max(MIN_CROSSOVER)
    }
}

/// Stage-2 code dimensions for a payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage2Plan {
    /// Information bits carried (`|c_h|`).
    pub payload_len: usize,
    /// Code length after padding.
    pub n_h: usize,
    /// Syndrome length, equal to the key consumed.
    pub m_h: usize,
}

impl Stage2Plan {
    pub fn new(payload_len: usize, cfg: &Stage2Config) -> Result<Self> {
        cfg.validate()?;
        if payload_len == 0 {
            return Err(Error::param("payload_len", "no bits to reconcile"));
        }
        let h = binary_entropy(cfg.effective_crossover())?;
        let max_degree = HIGH_RATE_PROFILE.iter().map(|p| p.0).max().expect("profile");
        let m_h = ((payload_len as f64) * (1.0 - cfg.beta_h * (1.0 - h))).ceil() as usize;
        let m_h = m_h.max(max_degree);
        let mut n_h = payload_len.div_ceil(cfg.granularity) * cfg.granularity;
        // the constructor needs at least one column beyond the checks
        while n_h <= m_h {
            n_h += cfg.granularity;
        }
        Ok(Stage2Plan { payload_len, n_h, m_h })
    }

    /// Rate on the payload, `1 - m_h / L`.
    pub fn payload_rate(&self) -> f64 {
        1.0 - self.m_h as f64 / self.payload_len as f64
    }

    pub fn padding(&self) -> usize {
        self.n_h - self.payload_len
    }

    /// Deterministic stage-2 code; both parties build the same one.
    pub fn build_code(&self, seed: u64) -> Result<LdpcCode> {
        irregular(self.n_h, self.m_h, &HIGH_RATE_PROFILE, seed)
    }
}

fn padded(bits: &[u8], n: usize) -> Vec<u8> {
    let mut v = bits.to_vec();
    v.resize(n, 0);
    v
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Alice: `p_A + pad`. Spends `rows(H_h)` pad bits.
pub fn alice_stage2(c_h: &[u8], code_h: &LdpcCode, pool: &mut OtpPool, session: u32) -> Result<(Vec<u8>, usize)> {
    if c_h.len() > code_h.n() {
        return Err(Error::param("c_h", "longer than the stage-2 code"));
    }
    let p_a = code_h.syndrome(&padded(c_h, code_h.n()))?;
    let pad = pool.take(session, code_h.m())?;
    Ok((xor(&p_a, &pad), code_h.m()))
}

/// Bob's stage-2 result.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage2Outcome {
    /// `c'_h + e^`, payload positions only.
    pub c_hat: Vec<u8>,
    pub e_hat_weight: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// Bob: strips the pad, forms `p_A + p_B`, decodes `e^` and corrects his
/// own bits.
pub fn bob_stage2(
    own_bits: &[u8],
    p_a_padded: &[u8],
    pool: &mut OtpPool,
    session: u32,
    code_h: &LdpcCode,
    crossover_p: f64,
    bp: &BpConfig,
) -> Result<Stage2Outcome> {
    check_len("padded syndrome", code_h.m(), p_a_padded.len())?;
    if own_bits.len() > code_h.n() {
        return Err(Error::param("own_bits", "longer than the stage-2 code"));
    }
    let pad = pool.take(session, code_h.m())?;
    let p_a = xor(p_a_padded, &pad);
    let p_b = code_h.syndrome(&padded(own_bits, code_h.n()))?;
    let target = xor(&p_a, &p_b);
    let p = crossover_p.clamp(MIN_CROSSOVER, 0.5 - 1e-12);
    let mut prior = vec![bsc_llr(p); code_h.n()];
    prior[own_bits.len()..].fill(LLR_LIMIT);
    let res = decode_syndrome(code_h, &target, &prior, bp)?;
    let e = &res.e_hat[..own_bits.len()];
    Ok(Stage2Outcome {
        c_hat: xor(own_bits, e),
        e_hat_weight: res.e_hat.iter().filter(|&&b| b == 1).count(),
        converged: res.converged,
        iterations: res.iterations_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_bits(seed: u64, n: usize) -> Vec<u8> {
        let mut rng = substream(seed, Stream::Analysis, 1);
        (0..n).map(|_| rng.random_range(0..2u8)).collect()
    }

    #[test]
    fn pool_refuses_reuse_and_overdraw() {
        let mut pool = OtpPool::from_seed(1, 100);
        let a = pool.take(1, 40).unwrap();
        assert_eq!(pool.remaining(), 60);
        assert!(pool.take_at(2, 30, 20).is_err());
        let b = pool.take(2, 60).unwrap();
        assert_ne!(a[..20], b[..20]);
        assert!(matches!(pool.take(3, 1), Err(Error::KeyMaterial(_))));
    }

    #[test]
    fn plan_arithmetic() {
        let cfg = Stage2Config {
            crossover_p: 0.01,
            beta_h: 1.0,
            granularity: 64,
            ..Default::default()
        };
        let plan = Stage2Plan::new(1000, &cfg).unwrap();
        let h = binary_entropy(0.01).unwrap();
        assert_eq!(plan.m_h, (1000.0 * h).ceil() as usize);
        assert_eq!(plan.n_h % 64, 0);
        assert!(plan.n_h >= 1000);
        assert!(Stage2Plan::new(0, &cfg).is_err());
    }

    #[test]
    fn codeword_gives_bare_pad() {
        let code = crate::ldpc::ira(40, 10, 3.0, 1).unwrap();
        let s = random_bits(2, 40);
        let c = code.encode(&s).unwrap();
        let mut pool = OtpPool::from_seed(3, 10);
        let expect = OtpPool::from_seed(3, 10).take(0, 10).unwrap();
        let (sent, used) = alice_stage2(&c, &code, &mut pool, 0).unwrap();
        assert_eq!(used, 10);
        assert_eq!(sent, expect);
    }

    #[test]
    fn no_errors_no_change() {
        let cfg = Stage2Config::default();
        let plan = Stage2Plan::new(500, &cfg).unwrap();
        let code = plan.build_code(cfg.code_seed).unwrap();
        let bits = random_bits(4, 500);
        let (mut pa, mut pb) = (OtpPool::from_seed(9, 10_000), OtpPool::from_seed(9, 10_000));
        let (sent, _) = alice_stage2(&bits, &code, &mut pa, 7).unwrap();
        let out = bob_stage2(&bits, &sent, &mut pb, 7, &code, 0.01, &cfg.bp).unwrap();
        assert!(out.converged);
        assert_eq!(out.c_hat, bits);
        assert_eq!(out.e_hat_weight, 0);
    }

    #[test]
    fn planted_errors_corrected() {
        let cfg = Stage2Config {
            crossover_p: 0.01,
            ..Default::default()
        };
        let plan = Stage2Plan::new(2000, &cfg).unwrap();
        let code = plan.build_code(cfg.code_seed).unwrap();
        let alice = random_bits(5, 2000);
        let mut bob = alice.clone();
        for i in (0..2000).step_by(101) {
            bob[i] ^= 1;
        }
        let (mut pa, mut pb) = (OtpPool::from_seed(1, 4000), OtpPool::from_seed(1, 4000));
        let (sent, used) = alice_stage2(&alice, &code, &mut pa, 0).unwrap();
        assert_eq!(used, plan.m_h);
        let out = bob_stage2(&bob, &sent, &mut pb, 0, &code, 0.01, &cfg.bp).unwrap();
        assert!(out.converged);
        assert_eq!(out.c_hat, alice);
    }

    #[test]
    fn insufficient_key_is_hard_error() {
        let code = crate::ldpc::ira(40, 10, 3.0, 1).unwrap();
        let mut pool = OtpPool::from_seed(3, 5);
        assert!(matches!(
            alice_stage2(&[0; 50], &code, &mut pool, 0),
            Err(Error::KeyMaterial(_))
        ));
    }
}
