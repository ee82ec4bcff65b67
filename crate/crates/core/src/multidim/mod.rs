//! Multi-dimensional reconciliation mapping and the virtual BIAWGN channel.
//!
//! Bob maps his BPSK word `u` onto his measurement `y` block by block:
//! `m = u' * y~^-1`, where `u' = u / sqrt(d)` and `y~ = y / |y|` are unit
//! elements of the d-dimensional Cayley–Dickson algebra. Alice computes
//! `r = m * x~` with `x~ = x / |x|`. For `x = y` this gives back `u'`, so
//! every block of `r` has unit norm and [`VirtualChannelOutput::bpsk`]
//! rescales it to `±1`.
//!
//! For octonions the evaluation order is fixed: `(u' * y~^-1)` on Bob's
//! side, then `(m * x~)` on Alice's side.
//!
//! # LLRs
//!
//! LLRs take the form `l_i = 2 sqrt(d) r_i / sigma_v2`. Given `m`, `|y|`
//! and Gaussian-distributed `x`, the exact bitwise log-likelihood ratio
//! fixes the per-block virtual noise variance to
//!
//! ```text
//! sigma_v2 = d * sigma_z2 / (2 |x| |y|)
//! ```
//!
//! ([`NoiseModel::BlockNorms`]). When Bob withholds the norms, Alice
//! substitutes `|y| ~ sqrt(|x|^2 + d sigma_z2 / 2)`
//! ([`NoiseModel::NormEstimate`]).

pub mod algebra;

use crate::error::{check_len, Error, Result};

use self::algebra::{conj, is_supported, mul, norm, MAX_DIM};

/// Default reconciliation dimension.
pub const DEFAULT_DIMENSION: usize = 8;

/// Bob's public message for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedBlock {
    pub m: Vec<f64>,
    /// `|y|` for each d-dimensional block.
    pub block_norms: Vec<f64>,
    pub dimension: usize,
}

impl MappedBlock {
    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }
}

/// Alice's view of the virtual channel `r = u' + n` and the derived LLRs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VirtualChannelOutput {
    pub r: Vec<f64>,
    pub llr: Vec<f64>,
}

impl VirtualChannelOutput {
    /// `r` rescaled to BPSK amplitude (`sqrt(d) r`).
    pub fn bpsk(&self, d: usize) -> Vec<f64> {
        let s = (d as f64).sqrt();
        self.r.iter().map(|v| v * s).collect()
    }
}

/// How Alice estimates the virtual-channel noise variance per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Uses the `|y|` values Bob sent alongside `m`.
    #[default]
    BlockNorms,
    /// Estimates `|y|` from `|x|` and the channel noise.
    NormEstimate,
}

fn check_dimension(d: usize, n: usize) -> Result<()> {
    if !is_supported(d) {
        return Err(Error::param("dimension", format!("{d} is not one of 1, 2, 4, 8")));
    }
    if !n.is_multiple_of(d) {
        return Err(Error::param(
            "dimension",
            format!("sequence length {n} is not a multiple of {d}"),
        ));
    }
    Ok(())
}

/// `M(u, y)`: maps the BPSK sequence `u` onto `y`.
pub fn map(u: &[f64], y: &[f64], d: usize) -> Result<MappedBlock> {
    check_len("u vs y", y.len(), u.len())?;
    check_dimension(d, y.len())?;
    if let Some(i) = u.iter().position(|v| v.abs() != 1.0) {
        return Err(Error::param("u", format!("entry {i} is not ±1")));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let mut m = vec![0.0; y.len()];
    let mut block_norms = Vec::with_capacity(y.len() / d);
    let mut unit_u = [0.0; MAX_DIM];
    let mut y_inv = [0.0; MAX_DIM];
    for (b, ((yb, ub), mb)) in y
        .chunks_exact(d)
        .zip(u.chunks_exact(d))
        .zip(m.chunks_exact_mut(d))
        .enumerate()
    {
        let ny = norm(yb);
        if !(ny > 0.0) {
            return Err(Error::DegenerateBlock { block: b });
        }
        // y~^-1 = conj(y~) for a unit element
        conj(yb, &mut y_inv[..d]);
        y_inv[..d].iter_mut().for_each(|v| *v /= ny);
        for (t, v) in unit_u[..d].iter_mut().zip(ub) {
            *t = v * scale;
        }
        mul(&unit_u[..d], &y_inv[..d], mb);
        block_norms.push(ny);
    }
    Ok(MappedBlock {
        m,
        block_norms,
        dimension: d,
    })
}

/// `M^-1(m, x)`: the unit-norm virtual-channel output `r = m * x~`.
pub fn demap(mapped: &MappedBlock, x: &[f64]) -> Result<Vec<f64>> {
    let d = mapped.dimension;
    check_len("m vs x", mapped.m.len(), x.len())?;
    check_dimension(d, x.len())?;
    let mut r = vec![0.0; x.len()];
    let mut unit_x = [0.0; MAX_DIM];
    for (b, ((xb, mb), rb)) in x
        .chunks_exact(d)
        .zip(mapped.m.chunks_exact(d))
        .zip(r.chunks_exact_mut(d))
        .enumerate()
    {
        let nx = norm(xb);
        if !(nx > 0.0) {
            return Err(Error::DegenerateBlock { block: b });
        }
        for (t, v) in unit_x[..d].iter_mut().zip(xb) {
            *t = v / nx;
        }
        mul(mb, &unit_x[..d], rb);
    }
    Ok(r)
}

/// `l_i = 2 sqrt(d) r_i / sigma_v2`. Positive LLRs favour bit 0 (`u = +1`).
pub fn compute_llr(r: &[f64], sigma_v2: f64, d: usize) -> Result<Vec<f64>> {
    if !(sigma_v2 > 0.0) || !sigma_v2.is_finite() {
        return Err(Error::param("sigma_v2", "must be > 0"));
    }
    let k = 2.0 * (d as f64).sqrt() / sigma_v2;
    Ok(r.iter().map(|v| k * v).collect())
}

/// [`compute_llr`] with one variance per d-block.
pub fn compute_llr_blockwise(r: &[f64], sigma_v2: &[f64], d: usize) -> Result<Vec<f64>> {
    check_dimension(d, r.len())?;
    check_len("block variances", r.len() / d, sigma_v2.len())?;
    let sd = (d as f64).sqrt();
    let mut out = Vec::with_capacity(r.len());
    for (rb, &v) in r.chunks_exact(d).zip(sigma_v2) {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::param("sigma_v2", "must be > 0"));
        }
        let k = 2.0 * sd / v;
        out.extend(rb.iter().map(|x| k * x));
    }
    Ok(out)
}

/// Per-block virtual noise variance `d sigma_z2 / (2 |x| |y|)`.
pub fn virtual_noise_variance(sigma_z2: f64, x_norm: f64, y_norm: f64, d: usize) -> f64 {
    d as f64 * sigma_z2 / (2.0 * x_norm * y_norm)
}

/// Demaps, then computes LLRs under `model`.
pub fn virtual_channel(
    mapped: &MappedBlock,
    x: &[f64],
    sigma_z2: f64,
    model: NoiseModel,
) -> Result<VirtualChannelOutput> {
    if !(sigma_z2 > 0.0) || !sigma_z2.is_finite() {
        return Err(Error::param("sigma_z2", "must be > 0 to form LLRs"));
    }
    let d = mapped.dimension;
    let r = demap(mapped, x)?;
    let variances: Vec<f64> = x
        .chunks_exact(d)
        .enumerate()
        .map(|(b, xb)| {
            let nx = norm(xb);
            let ny = match model {
                NoiseModel::BlockNorms => mapped.block_norms[b],
                NoiseModel::NormEstimate => (nx * nx + d as f64 * sigma_z2 / 2.0).sqrt(),
            };
            virtual_noise_variance(sigma_z2, nx, ny, d)
        })
        .collect();
    check_len("block norms", x.len() / d, mapped.block_norms.len())?;
    let llr = compute_llr_blockwise(&r, &variances, d)?;
    Ok(VirtualChannelOutput { r, llr })
}
