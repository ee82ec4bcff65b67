//! Gaussian-modulated transmission over an AWGN quantum channel.
//!
//! All randomness comes from ChaCha8 substreams keyed by
//! `(master seed, purpose, frame index)`, so a frame's samples do not depend
//! on which other frames were simulated or in what order. Gaussian samples
//! are drawn with the ziggurat method of `rand_distr::StandardNormal`.
//!
//! Quadrature sequences are interleaved I/Q: `x = [x1_I, x1_Q, x2_I, ...]`.
//! `sigma_z2` is always the total noise variance over both quadratures, so
//! each real sample carries variance `sigma_z2 / 2`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical description of the fibre link and receiver.
///
/// Noise terms are in shot-noise units. `excess_noise` is referred to the
/// channel input, i.e. it reaches Bob's detector scaled by `eta * T`.
/// `modulation_variance` is the per-quadrature variance of Alice's Gaussian
/// modulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkParams {
    pub distance_km: f64,
    pub attenuation_db_per_km: f64,
    pub quantum_efficiency: f64,
    pub electronic_noise: f64,
    pub excess_noise: f64,
    pub modulation_variance: f64,
}

impl Default for LinkParams {
    /// The receiver used throughout the experiments: `eta = 0.6`,
    /// `v_el = 0.01`, `xi = 0.001`, `alpha = 0.2 dB/km`.
    fn default() -> Self {
        LinkParams {
            distance_km: 50.0,
            attenuation_db_per_km: 0.2,
            quantum_efficiency: 0.6,
            electronic_noise: 0.01,
            excess_noise: 0.001,
            modulation_variance: 5.0,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.distance_km,
            self.attenuation_db_per_km,
            self.quantum_efficiency,
            self.electronic_noise,
            self.excess_noise,
            self.modulation_variance,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("link", "all fields must be finite"));
        }
        if self.distance_km < 0.0 {
            return Err(Error::param("distance_km", "must be >= 0"));
        }
        if self.attenuation_db_per_km < 0.0 {
            return Err(Error::param("attenuation_db_per_km", "must be >= 0"));
        }
        if !(self.quantum_efficiency > 0.0 && self.quantum_efficiency <= 1.0) {
            return Err(Error::param("quantum_efficiency", "must lie in (0, 1]"));
        }
        if self.electronic_noise < 0.0 {
            return Err(Error::param("electronic_noise", "must be >= 0"));
        }
        if self.excess_noise < 0.0 {
            return Err(Error::param("excess_noise", "must be >= 0"));
        }
        if self.modulation_variance <= 0.0 {
            return Err(Error::param("modulation_variance", "must be > 0"));
        }
        Ok(())
    }

    /// `T = 10^(-alpha d / 10)`.
    pub fn transmittance(&self) -> f64 {
        transmittance(self.distance_km, self.attenuation_db_per_km)
    }

    pub fn with_distance(self, distance_km: f64) -> Self {
        LinkParams {
            distance_km,
            ..self
        }
    }

    pub fn with_modulation_variance(self, modulation_variance: f64) -> Self {
        LinkParams {
            modulation_variance,
            ..self
        }
    }
}

pub fn transmittance(distance_km: f64, attenuation_db_per_km: f64) -> f64 {
    10f64.powf(-attenuation_db_per_km * distance_km / 10.0)
}

/// Homodyne SNR in shot-noise units:
/// `eta T V_A / (1 + v_el + eta T xi)`.
pub fn effective_snr(params: &LinkParams) -> f64 {
    let eta_t = params.quantum_efficiency * params.transmittance();
    eta_t * params.modulation_variance
        / (1.0 + params.electronic_noise + eta_t * params.excess_noise)
}

/// Purpose tag for a random substream. Distinct purposes never share samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Alice's Gaussian modulation `x`.
    Modulation,
    /// Channel noise `z`.
    Noise,
    /// Bob's information bits `s`.
    InfoBits,
    /// Planted error patterns in stage-2 simulations.
    Errors,
    /// Shared one-time-pad and hash keys.
    Keys,
    /// Bootstrap resampling and other analysis-side draws.
    Analysis,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Modulation => 0x6d6f_6475,
            Stream::Noise => 0x6e6f_6973,
            Stream::InfoBits => 0x6269_7473,
            Stream::Errors => 0x6572_7273,
            Stream::Keys => 0x6b65_7973,
            Stream::Analysis => 0x616e_6c79,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for `(seed, purpose, index)`.
///
/// The ChaCha key is derived from the seed and purpose; the frame index
/// selects the ChaCha stream, so substreams never overlap.
pub fn substream(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(stream.tag())));
    rng.set_stream(index);
    rng
}

/// Paired transmitted and received quadratures of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub noise_variance: f64,
    pub rng_seed: u64,
}

impl SymbolBlock {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The realised noise `y - x`.
    pub fn noise(&self) -> Vec<f64> {
        self.y.iter().zip(&self.x).map(|(y, x)| y - x).collect()
    }
}

/// Draws `n` i.i.d. `N(0, variance)` samples.
pub fn gaussian_samples<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, variance: f64) -> Vec<f64> {
    let sd = variance.sqrt();
    (0..n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            sd * g
        })
        .collect()
}

/// Adds `N(0, sigma_z2 / 2)` noise to every real sample of `x`.
pub fn transmit(x: &[f64], sigma_z2: f64, seed: u64) -> Result<SymbolBlock> {
    transmit_indexed(x, sigma_z2, seed, 0)
}

/// [`transmit`] for frame `index` of a multi-frame run.
pub fn transmit_indexed(x: &[f64], sigma_z2: f64, seed: u64, index: u64) -> Result<SymbolBlock> {
    if !(sigma_z2 >= 0.0) || !sigma_z2.is_finite() {
        return Err(Error::param("sigma_z2", "noise variance must be >= 0"));
    }
    if !x.len().is_multiple_of(2) {
        return Err(Error::param("x", "interleaved I/Q sequence must have even length"));
    }
    let mut rng = substream(seed, Stream::Noise, index);
    let z = gaussian_samples(&mut rng, x.len(), sigma_z2 / 2.0);
    let y = x.iter().zip(&z).map(|(a, b)| a + b).collect();
    Ok(SymbolBlock {
        x: x.to_vec(),
        y,
        noise_variance: sigma_z2,
        rng_seed: seed,
    })
}

/// Alice's Gaussian modulation for frame `index`: `n` real samples of
/// per-quadrature variance `variance`.
pub fn modulate(n: usize, variance: f64, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = substream(seed, Stream::Modulation, index);
    gaussian_samples(&mut rng, n, variance)
}
