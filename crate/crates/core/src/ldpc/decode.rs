//! Flooding belief propagation in the LLR domain.
//!
//! One engine serves both uses: ordinary codeword decoding (all checks
//! target parity 0) and syndrome decoding, where the sign of every
//! check-to-variable message is flipped on checks whose target syndrome bit
//! is 1. Updates run in a fixed order, so results are bit-deterministic.
//!
//! A bit whose a-posteriori LLR is exactly zero is decided as 0 but counts
//! as undecided: decoding only succeeds once the syndrome matches and no
//! such tie remains.
//!
//! Channel LLRs and check-to-variable messages are saturated at
//! `±LLR_LIMIT`. The a-posteriori LLRs are the unsaturated sums of those
//! messages, which bounds them by `LLR_LIMIT * (degree + 1)`.

use serde::{Deserialize, Serialize};

use super::LdpcCode;
use crate::error::{check_len, Error, Result};

/// Saturation for channel and check messages.
pub const LLR_LIMIT: f64 = 30.0;

/// Default iteration cap.
pub const DEFAULT_MAX_ITERATIONS: usize = 200;

/// Check-node rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckUpdate {
    /// Exact sum-product (`2 atanh(prod tanh(l/2))`).
    #[default]
    TanhProduct,
    /// Min-sum approximation.
    MinSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BpConfig {
    pub max_iterations: usize,
    pub check_update: CheckUpdate,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            check_update: CheckUpdate::TanhProduct,
        }
    }
}

impl BpConfig {
    pub fn with_max_iterations(max_iterations: usize) -> Self {
        BpConfig {
            max_iterations,
            ..Default::default()
        }
    }
}

/// Output of codeword decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Hard decision `c^`.
    pub c_hat: Vec<u8>,
    /// Information bits of `c^`.
    pub s_hat: Vec<u8>,
    /// A-posteriori LLRs at exit.
    pub l_out: Vec<f64>,
    pub iterations_used: usize,
    /// `c^ H^T = 0` with every bit decided (no zero a-posteriori LLR).
    pub syndrome_ok: bool,
}

/// Output of syndrome decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeDecodeResult {
    /// Estimated error pattern `e^`.
    pub e_hat: Vec<u8>,
    pub l_out: Vec<f64>,
    pub iterations_used: usize,
    /// `e^ H^T` equals the target syndrome.
    pub converged: bool,
}

/// Sum of absolute a-posteriori LLRs: the frame confidence metric `q`.
pub fn q_metric(result: &DecodeResult) -> f64 {
    result.l_out.iter().map(|v| v.abs()).sum()
}

#[inline]
fn saturate(v: f64) -> f64 {
    v.clamp(-LLR_LIMIT, LLR_LIMIT)
}

struct Outcome {
    hard: Vec<u8>,
    l_out: Vec<f64>,
    iterations: usize,
    satisfied: bool,
}

/// Core flooding schedule. `target` is the syndrome to satisfy (`None` =
/// all zeros). `trace`, when given, receives the number of unsatisfied
/// checks after every iteration.
fn run(
    code: &LdpcCode,
    llr_in: &[f64],
    target: Option<&[u8]>,
    config: &BpConfig,
    mut trace: Option<&mut Vec<usize>>,
) -> Outcome {
    let n = code.n();
    let rows = code.rows();
    let edges = code.num_edges();

    // Edges are numbered row-major; var_edges lists each column's edges.
    let mut row_start = Vec::with_capacity(rows.len() + 1);
    let mut edge_var = Vec::with_capacity(edges);
    row_start.push(0usize);
    for r in rows {
        edge_var.extend(r.iter().map(|&c| c as usize));
        row_start.push(edge_var.len());
    }
    let mut var_start = vec![0usize; n + 1];
    for &v in &edge_var {
        var_start[v + 1] += 1;
    }
    for v in 0..n {
        var_start[v + 1] += var_start[v];
    }
    let mut fill = var_start.clone();
    let mut var_edges = vec![0usize; edges];
    for (e, &v) in edge_var.iter().enumerate() {
        var_edges[fill[v]] = e;
        fill[v] += 1;
    }

    let channel: Vec<f64> = llr_in.iter().map(|&v| saturate(v)).collect();
    let mut v2c: Vec<f64> = edge_var.iter().map(|&v| channel[v]).collect();
    let mut c2v = vec![0.0f64; edges];
    let mut total = channel.clone();
    let mut hard = vec![0u8; n];
    let mut scratch = Vec::new();

    let flip = |r: usize| target.is_some_and(|t| t[r] & 1 == 1);

    let mut iterations = 0;
    let mut satisfied = false;
    for _ in 0..config.max_iterations.max(1) {
        iterations += 1;

        // check nodes
        for r in 0..rows.len() {
            let (lo, hi) = (row_start[r], row_start[r + 1]);
            let sign = if flip(r) { -1.0 } else { 1.0 };
            match config.check_update {
                CheckUpdate::TanhProduct => {
                    scratch.clear();
                    scratch.extend(v2c[lo..hi].iter().map(|&v| (0.5 * v).tanh()));
                    // exclusive products via prefix/suffix sweeps
                    let mut prefix = 1.0;
                    for (i, e) in (lo..hi).enumerate() {
                        c2v[e] = prefix;
                        prefix *= scratch[i];
                    }
                    let mut suffix = 1.0;
                    for (i, e) in (lo..hi).enumerate().rev() {
                        let p = c2v[e] * suffix;
                        suffix *= scratch[i];
                        c2v[e] = sign * saturate(2.0 * p.atanh());
                    }
                }
                CheckUpdate::MinSum => {
                    let mut min1 = f64::INFINITY;
                    let mut min2 = f64::INFINITY;
                    let mut arg = lo;
                    let mut parity = sign;
                    for e in lo..hi {
                        let a = v2c[e].abs();
                        if v2c[e] < 0.0 {
                            parity = -parity;
                        }
                        if a < min1 {
                            min2 = min1;
                            min1 = a;
                            arg = e;
                        } else if a < min2 {
                            min2 = a;
                        }
                    }
                    for e in lo..hi {
                        let mag = if e == arg { min2 } else { min1 };
                        let s = if v2c[e] < 0.0 { -parity } else { parity };
                        c2v[e] = saturate(s * mag);
                    }
                }
            }
        }

        // variable nodes
        let mut undecided = 0;
        for v in 0..n {
            let es = &var_edges[var_start[v]..var_start[v + 1]];
            let t = channel[v] + es.iter().map(|&e| c2v[e]).sum::<f64>();
            total[v] = t;
            hard[v] = u8::from(t < 0.0);
            undecided += usize::from(t == 0.0);
            for &e in es {
                v2c[e] = saturate(t - c2v[e]);
            }
        }

        // syndrome check
        let mut unsatisfied = 0;
        #[allow(clippy::needless_range_loop)]
        for r in 0..rows.len() {
            let parity = edge_var[row_start[r]..row_start[r + 1]]
                .iter()
                .fold(0u8, |acc, &v| acc ^ hard[v]);
            let want = target.map_or(0, |t| t[r] & 1);
            if parity != want {
                unsatisfied += 1;
                if trace.is_none() {
                    break;
                }
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(unsatisfied);
        }
        if unsatisfied == 0 && undecided == 0 {
            satisfied = true;
            break;
        }
    }

    Outcome {
        hard,
        l_out: total,
        iterations,
        satisfied,
    }
}

/// Sum-product decoding of a received word. Positive LLRs favour 0.
pub fn decode_bp(code: &LdpcCode, llr_in: &[f64], config: &BpConfig) -> Result<DecodeResult> {
    check_len("channel LLRs", code.n(), llr_in.len())?;
    validate(config)?;
    let out = run(code, llr_in, None, config, None);
    Ok(to_decode_result(code, out))
}

/// [`decode_bp`] that also records the unsatisfied-check count per
/// iteration.
pub fn decode_bp_traced(
    code: &LdpcCode,
    llr_in: &[f64],
    config: &BpConfig,
) -> Result<(DecodeResult, Vec<usize>)> {
    check_len("channel LLRs", code.n(), llr_in.len())?;
    validate(config)?;
    let mut trace = Vec::new();
    let out = run(code, llr_in, None, config, Some(&mut trace));
    Ok((to_decode_result(code, out), trace))
}

fn to_decode_result(code: &LdpcCode, out: Outcome) -> DecodeResult {
    DecodeResult {
        s_hat: code.extract_info(&out.hard),
        c_hat: out.hard,
        l_out: out.l_out,
        iterations_used: out.iterations,
        syndrome_ok: out.satisfied,
    }
}

fn validate(config: &BpConfig) -> Result<()> {
    if config.max_iterations == 0 {
        return Err(Error::param("max_iterations", "must be >= 1"));
    }
    Ok(())
}

/// Syndrome decoding with arbitrary per-bit prior LLRs on the error
/// pattern (positive favours `e_i = 0`).
pub fn decode_syndrome(
    code: &LdpcCode,
    target_syndrome: &[u8],
    prior_llr: &[f64],
    config: &BpConfig,
) -> Result<SyndromeDecodeResult> {
    check_len("target syndrome", code.m(), target_syndrome.len())?;
    check_len("prior LLRs", code.n(), prior_llr.len())?;
    validate(config)?;
    let out = run(code, prior_llr, Some(target_syndrome), config, None);
    Ok(SyndromeDecodeResult {
        e_hat: out.hard,
        l_out: out.l_out,
        iterations_used: out.iterations,
        converged: out.satisfied,
    })
}

/// Syndrome decoding over a binary symmetric channel with crossover `p`:
/// finds `e^` with `e^ H^T = target_syndrome`, preferring low weight.
pub fn decode_syndrome_bsc(
    code: &LdpcCode,
    target_syndrome: &[u8],
    crossover_p: f64,
    config: &BpConfig,
) -> Result<SyndromeDecodeResult> {
    if !(crossover_p > 0.0 && crossover_p < 0.5) {
        return Err(Error::param("crossover_p", "must lie in (0, 0.5)"));
    }
    let prior = vec![bsc_llr(crossover_p); code.n()];
    decode_syndrome(code, target_syndrome, &prior, config)
}

/// `ln((1 - p) / p)`.
pub fn bsc_llr(p: f64) -> f64 {
    ((1.0 - p) / p).ln()
}
