//! Stage 1: Bob encodes and maps, Alice demaps and decodes every frame.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{gaussian_samples, substream, Stream, SymbolBlock};
use crate::error::{check_len, Error, Result};
use crate::ldpc::decode::LLR_LIMIT;
use crate::ldpc::{decode_bp, q_metric, BpConfig, DecodeResult, LdpcCode};
use crate::multidim::{demap, map, virtual_channel, MappedBlock, NoiseModel, DEFAULT_DIMENSION};
use crate::skr::mutual_info_awgn;

/// Simulated quantum phase: `y = x + z` with `x ~ N(0, V_x)` and
/// `z ~ N(0, sigma_z2 / 2)` per real sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub modulation_variance: f64,
    pub sigma_z2: f64,
    pub dimension: usize,
    pub noise_model: NoiseModel,
}

impl ChannelSpec {
    /// Unit modulation with the noise that puts a rate-`rate` code at
    /// efficiency `beta`: `SNR = 2^(2 rate / beta) - 1`.
    pub fn for_efficiency(rate: f64, beta: f64) -> Result<Self> {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::param("rate", "must lie in (0, 1)"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::param("beta", "must be > 0"));
        }
        let snr = (2.0 * rate / beta).exp2() - 1.0;
        Ok(ChannelSpec {
            modulation_variance: 1.0,
            sigma_z2: 2.0 / snr,
            dimension: DEFAULT_DIMENSION,
            noise_model: NoiseModel::BlockNorms,
        })
    }

    pub fn noiseless() -> Self {
        ChannelSpec {
            modulation_variance: 1.0,
            sigma_z2: 0.0,
            dimension: DEFAULT_DIMENSION,
            noise_model: NoiseModel::BlockNorms,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.modulation_variance > 0.0) || !self.modulation_variance.is_finite() {
            return Err(Error::param("modulation_variance", "must be > 0"));
        }
        if !(self.sigma_z2 >= 0.0) || !self.sigma_z2.is_finite() {
            return Err(Error::param("sigma_z2", "must be >= 0"));
        }
        if !crate::multidim::algebra::is_supported(self.dimension) {
            return Err(Error::param("dimension", "must be 1, 2, 4 or 8"));
        }
        Ok(())
    }

    /// Per-sample SNR `2 V_x / sigma_z2` (infinite when noiseless).
    pub fn snr(&self) -> f64 {
        2.0 * self.modulation_variance / self.sigma_z2
    }

    /// `I_AB` per real sample.
    pub fn mutual_info(&self) -> f64 {
        mutual_info_awgn(self.snr())
    }

    /// `beta = rate / I_AB`.
    pub fn efficiency(&self, rate: f64) -> f64 {
        rate / self.mutual_info()
    }
}

/// Frame `index` of the simulated quantum phase. Alice and Bob both call
/// this with the shared seed; Alice keeps `x` and Bob keeps `y`.
pub fn simulate_quadratures(spec: &ChannelSpec, n: usize, seed: u64, index: u64) -> SymbolBlock {
    let mut rng = substream(seed, Stream::Modulation, index);
    let x = gaussian_samples(&mut rng, n, spec.modulation_variance);
    let mut rng = substream(seed, Stream::Noise, index);
    let z = gaussian_samples(&mut rng, n, spec.sigma_z2 / 2.0);
    let y = x.iter().zip(&z).map(|(a, b)| a + b).collect();
    SymbolBlock {
        x,
        y,
        noise_variance: spec.sigma_z2,
        rng_seed: seed,
    }
}

/// `u_i = (-1)^c_i`.
pub fn bpsk(c: &[u8]) -> Vec<f64> {
    c.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

/// Bob's side of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BobFrame {
    pub index: u64,
    pub s: Vec<u8>,
    pub c: Vec<u8>,
    pub mapped: MappedBlock,
}

impl BobFrame {
    pub fn u(&self) -> Vec<f64> {
        bpsk(&self.c)
    }
}

/// Draws `s` for frame `index`, encodes it and maps `u` onto `y`.
pub fn bob_frame(code: &LdpcCode, y: &[f64], d: usize, seed: u64, index: u64) -> Result<BobFrame> {
    check_len("y block", code.n(), y.len())?;
    let mut rng = substream(seed, Stream::InfoBits, index);
    let s: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
    let c = code.encode(&s)?;
    let mapped = map(&bpsk(&c), y, d)?;
    Ok(BobFrame {
        index,
        s,
        c,
        mapped,
    })
}

/// [`bob_frame`] for every block; frame `i` uses substream `i`.
pub fn bob_stage1(y_blocks: &[Vec<f64>], code: &LdpcCode, d: usize, seed: u64) -> Result<Vec<BobFrame>> {
    y_blocks
        .par_iter()
        .enumerate()
        .map(|(i, y)| bob_frame(code, y, d, seed, i as u64))
        .collect()
}

/// Alice's decoder settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliceConfig {
    pub sigma_z2: f64,
    pub noise_model: NoiseModel,
    pub bp: BpConfig,
}

/// Alice's view of one decoded frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub index: u64,
    pub r: Vec<f64>,
    pub llr: Vec<f64>,
    pub decode: DecodeResult,
    pub q: f64,
}

fn frame_llr(mapped: &MappedBlock, x: &[f64], sigma_z2: f64, model: NoiseModel) -> Result<(Vec<f64>, Vec<f64>)> {
    if sigma_z2 == 0.0 {
        // noiseless: r = u' exactly, so the sign is certain
        let r = demap(mapped, x)?;
        let llr = r.iter().map(|v| LLR_LIMIT.copysign(*v)).collect();
        return Ok((r, llr));
    }
    let v = virtual_channel(mapped, x, sigma_z2, model)?;
    Ok((v.r, v.llr))
}

/// Demap, LLRs, BP and `q` for one frame.
pub fn alice_frame(
    code: &LdpcCode,
    x: &[f64],
    mapped: &MappedBlock,
    index: u64,
    cfg: &AliceConfig,
) -> Result<FrameRecord> {
    check_len("x block", code.n(), x.len())?;
    let (r, llr) = frame_llr(mapped, x, cfg.sigma_z2, cfg.noise_model)?;
    let decode = decode_bp(code, &llr, &cfg.bp)?;
    let q = q_metric(&decode);
    Ok(FrameRecord {
        index,
        r,
        llr,
        decode,
        q,
    })
}

/// Decodes every frame. A failing frame yields its own error and does not
/// stop the others.
pub fn alice_stage1(
    x_blocks: &[Vec<f64>],
    received: &[MappedBlock],
    code: &LdpcCode,
    cfg: &AliceConfig,
) -> Result<Vec<Result<FrameRecord>>> {
    check_len("mapped blocks", x_blocks.len(), received.len())?;
    Ok(x_blocks
        .par_iter()
        .zip(received)
        .enumerate()
        .map(|(i, (x, m))| alice_frame(code, x, m, i as u64, cfg))
        .collect())
}

/// What a calibration campaign keeps of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSummary {
    pub index: u64,
    pub q: f64,
    pub syndrome_ok: bool,
    /// Information-bit errors of Alice's decision against Bob's `s`.
    pub bit_errors: u32,
    pub iterations: u32,
}

/// Runs one frame end to end with ground truth available.
pub fn simulate_frame(
    code: &LdpcCode,
    spec: &ChannelSpec,
    bp: &BpConfig,
    seed: u64,
    index: u64,
) -> Result<FrameSummary> {
    let block = simulate_quadratures(spec, code.n(), seed, index);
    let bob = bob_frame(code, &block.y, spec.dimension, seed, index)?;
    let cfg = AliceConfig {
        sigma_z2: spec.sigma_z2,
        noise_model: spec.noise_model,
        bp: *bp,
    };
    let rec = alice_frame(code, &block.x, &bob.mapped, index, &cfg)?;
    let bit_errors = rec.decode.s_hat.iter().zip(&bob.s).filter(|(a, b)| a != b).count();
    Ok(FrameSummary {
        index,
        q: rec.q,
        syndrome_ok: rec.decode.syndrome_ok,
        bit_errors: bit_errors as u32,
        iterations: rec.decode.iterations_used as u32,
    })
}

/// [`simulate_frame`] over `indices` in parallel, returned in index
/// order. Degenerate frames (zero-norm blocks) are kept with `q = -inf`
/// and every information bit counted wrong, so they are never preferred.
pub fn simulate_frames(
    code: &LdpcCode,
    spec: &ChannelSpec,
    bp: &BpConfig,
    seed: u64,
    indices: std::ops::Range<u64>,
) -> Result<Vec<FrameSummary>> {
    spec.validate()?;
    let k = code.k() as u32;
    indices
        .into_par_iter()
        .map(|i| match simulate_frame(code, spec, bp, seed, i) {
            Ok(s) => Ok(s),
            Err(Error::DegenerateBlock { .. }) => Ok(FrameSummary {
                index: i,
                q: f64::NEG_INFINITY,
                syndrome_ok: false,
                bit_errors: k,
                iterations: 0,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::CodeSpec;

    fn small_code() -> LdpcCode {
        crate::ldpc::ira(32, 32, 3.0, 3).unwrap()
    }

    #[test]
    fn efficiency_round_trip() {
        let spec = ChannelSpec::for_efficiency(0.1, 1.3).unwrap();
        assert!((spec.efficiency(0.1) - 1.3).abs() < 1e-12);
        assert!(ChannelSpec::for_efficiency(0.0, 1.0).is_err());
        assert!(ChannelSpec::for_efficiency(0.5, -1.0).is_err());
    }

    #[test]
    fn bob_frame_is_reproducible_and_bpsk_consistent() {
        let code = small_code();
        let spec = ChannelSpec::for_efficiency(code.rate(), 0.9).unwrap();
        let blk = simulate_quadratures(&spec, code.n(), 5, 0);
        let a = bob_frame(&code, &blk.y, 8, 5, 0).unwrap();
        let b = bob_frame(&code, &blk.y, 8, 5, 0).unwrap();
        assert_eq!(a, b);
        assert!(code.is_codeword(&a.c));
        for (u, c) in a.u().iter().zip(&a.c) {
            assert_eq!(*u, if *c == 0 { 1.0 } else { -1.0 });
        }
        assert!(bob_frame(&code, &blk.y[..8], 8, 5, 0).is_err());
    }

    #[test]
    fn noiseless_frames_decode() {
        let code = CodeSpec::default().build().unwrap();
        let spec = ChannelSpec::noiseless();
        let bp = BpConfig::with_max_iterations(25);
        for f in simulate_frames(&code, &spec, &bp, 9, 0..20).unwrap() {
            assert!(f.syndrome_ok);
            assert_eq!(f.bit_errors, 0);
        }
    }

    #[test]
    fn hopeless_noise_fails_syndrome() {
        let code = small_code();
        let spec = ChannelSpec {
            sigma_z2: 1e6,
            ..ChannelSpec::noiseless()
        };
        let bp = BpConfig::with_max_iterations(20);
        let ok = simulate_frames(&code, &spec, &bp, 9, 0..50)
            .unwrap()
            .iter()
            .filter(|f| f.syndrome_ok)
            .count();
        assert_eq!(ok, 0);
    }

    #[test]
    fn stage1_batches_match_single_frames() {
        let code = small_code();
        let spec = ChannelSpec::for_efficiency(code.rate(), 0.8).unwrap();
        let blocks: Vec<SymbolBlock> = (0..4).map(|i| simulate_quadratures(&spec, code.n(), 2, i)).collect();
        let ys: Vec<Vec<f64>> = blocks.iter().map(|b| b.y.clone()).collect();
        let xs: Vec<Vec<f64>> = blocks.iter().map(|b| b.x.clone()).collect();
        let bob = bob_stage1(&ys, &code, 8, 2).unwrap();
        let mapped: Vec<MappedBlock> = bob.iter().map(|f| f.mapped.clone()).collect();
        let cfg = AliceConfig {
            sigma_z2: spec.sigma_z2,
            noise_model: NoiseModel::BlockNorms,
            bp: BpConfig::with_max_iterations(50),
        };
        let recs = alice_stage1(&xs, &mapped, &code, &cfg).unwrap();
        for (i, rec) in recs.iter().enumerate() {
            let rec = rec.as_ref().unwrap();
            let single = simulate_frame(&code, &spec, &cfg.bp, 2, i as u64).unwrap();
            assert_eq!(rec.q, single.q);
        }
    }

    #[test]
    fn degenerate_frame_does_not_abort_batch() {
        let code = small_code();
        let spec = ChannelSpec::noiseless();
        let blk = simulate_quadratures(&spec, code.n(), 1, 0);
        let bob = bob_frame(&code, &blk.y, 8, 1, 0).unwrap();
        let mut zero = blk.x.clone();
        zero[..8].fill(0.0);
        let cfg = AliceConfig {
            sigma_z2: 0.0,
            noise_model: NoiseModel::BlockNorms,
            bp: BpConfig::default(),
        };
        let recs = alice_stage1(&[zero, blk.x.clone()], &[bob.mapped.clone(), bob.mapped], &code, &cfg).unwrap();
        assert!(matches!(recs[0], Err(Error::DegenerateBlock { block: 0 })));
        assert!(recs[1].as_ref().unwrap().decode.syndrome_ok);
    }
}
