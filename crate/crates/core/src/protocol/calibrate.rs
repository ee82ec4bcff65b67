//! Offline calibration of the frame-selection cutoff `q_c` and the
//! residual error rate `BER_AF` for a code, channel and AFR.
//!
//! Confidence intervals come from a nonparametric bootstrap over frames:
//! each resample draws `K` frames with replacement and repeats the whole
//! selection, so intervals include the randomness of the ranking.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::select::accepted_count;
use super::stage1::{simulate_frames, ChannelSpec, FrameSummary};
use crate::channel::{substream, Stream};
use crate::error::{Error, Result};
use crate::ldpc::{BpConfig, LdpcCode};
use crate::skr::binary_entropy;

/// Fewer accepted frames than this makes a calibration row statistically weak.
pub const MIN_ACCEPTED_FRAMES: usize = 100;

/// Ten-point grid from 1e-3 to 1 used by default sweeps.
pub const DEFAULT_AFR_GRID: [f64; 10] = [0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapOptions {
    pub resamples: usize,
    pub seed: u64,
    /// Two-sided interval level.
    pub confidence: f64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            resamples: 400,
            seed: 0,
            confidence: 0.95,
        }
    }
}

/// One AFR of a calibration table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub afr: f64,
    pub accepted: usize,
    /// Smallest accepted `q`: the empirical `(1 - AFR)` quantile.
    pub q_c: f64,
    pub ber_af: f64,
    pub ber_lo: f64,
    pub ber_hi: f64,
    /// `1 - h(BER_AF)`, the BSC capacity left for stage 2.
    pub capacity_bsc: f64,
    pub low_confidence: bool,
}

/// Calibration result for one channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub frames: usize,
    pub k_info: usize,
    /// Fraction of frames whose decoded word fails the parity checks.
    pub syndrome_fer: f64,
    pub rows: Vec<CalibrationRow>,
    /// `rows.len() x resamples` bootstrap BER_AF values, one row per AFR.
    #[serde(skip)]
    pub bootstrap: Vec<Vec<f64>>,
}

impl Calibration {
    /// The row for `afr`, if it is on the grid.
    pub fn row(&self, afr: f64) -> Option<&CalibrationRow> {
        self.rows.iter().find(|r| r.afr == afr)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.rows
            .iter()
            .filter(|r| r.low_confidence)
            .map(|r| {
                format!(
                    "AFR {} accepts only {} frames (< {MIN_ACCEPTED_FRAMES}); BER_AF is statistically weak",
                    r.afr, r.accepted
                )
            })
            .collect()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::param("afr_grid", "is empty"));
    }
    if let Some(a) = grid.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(Error::param("afr_grid", format!("{a} is not in (0, 1]")));
    }
    Ok(())
}

/// Frames in selection order: `q` descending, then index ascending.
fn ranking(summaries: &[FrameSummary], prefilter_syndrome: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..summaries.len())
        .filter(|&i| !prefilter_syndrome || summaries[i].syndrome_ok)
        .collect();
    order.sort_by(|&a, &b| {
        summaries[b]
            .q
            .total_cmp(&summaries[a].q)
            .then(summaries[a].index.cmp(&summaries[b].index))
    });
    order
}

/// Takes frames in `order` with multiplicities `weight` until `target`
/// are accepted; returns (accepted, bit errors, last q).
fn take(summaries: &[FrameSummary], order: &[usize], weight: impl Fn(usize) -> usize, target: usize) -> (usize, u64, f64) {
    let (mut taken, mut errors, mut last_q) = (0usize, 0u64, f64::INFINITY);
    for &i in order {
        if taken == target {
            break;
        }
        let w = weight(i).min(target - taken);
        if w == 0 {
            continue;
        }
        taken += w;
        errors += w as u64 * summaries[i].bit_errors as u64;
        last_q = summaries[i].q;
    }
    (taken, errors, last_q)
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Builds the (AFR, BER_AF) table from per-frame summaries.
pub fn calibrate_summaries(
    summaries: &[FrameSummary],
    k_info: usize,
    afr_grid: &[f64],
    prefilter_syndrome: bool,
    boot: &BootstrapOptions,
) -> Result<Calibration> {
    check_grid(afr_grid)?;
    if summaries.is_empty() || k_info == 0 {
        return Err(Error::param("frames", "need at least one frame with information bits"));
    }
    let total = summaries.len();
    let order = ranking(summaries, prefilter_syndrome);
    let ber = |taken: usize, errors: u64| {
        if taken == 0 {
            f64::NAN
        } else {
            errors as f64 / (taken * k_info) as f64
        }
    };

    let mut bootstrap = vec![Vec::with_capacity(boot.resamples); afr_grid.len()];
    let mut rng = substream(boot.seed, Stream::Analysis, 0);
    let mut counts = vec![0usize; total];
    for _ in 0..boot.resamples {
        counts.fill(0);
        for _ in 0..total {
            counts[rng.random_range(0..total)] += 1;
        }
        for (j, &afr) in afr_grid.iter().enumerate() {
            let (t, e, _) = take(summaries, &order, |i| counts[i], accepted_count(total, afr));
            bootstrap[j].push(ber(t, e));
        }
    }

    let alpha = (1.0 - boot.confidence) / 2.0;
    let rows = afr_grid
        .iter()
        .zip(&bootstrap)
        .map(|(&afr, samples)| {
            let (accepted, errors, q_c) = take(summaries, &order, |_| 1, accepted_count(total, afr));
            let ber_af = ber(accepted, errors);
            let mut s: Vec<f64> = samples.iter().copied().filter(|v| !v.is_nan()).collect();
            s.sort_by(f64::total_cmp);
            let capacity_bsc = if ber_af.is_nan() {
                f64::NAN
            } else {
                1.0 - binary_entropy(ber_af.min(1.0))?
            };
            Ok(CalibrationRow {
                afr,
                accepted,
                q_c,
                ber_af,
                ber_lo: quantile(&s, alpha),
                ber_hi: quantile(&s, 1.0 - alpha),
                capacity_bsc,
                low_confidence: accepted < MIN_ACCEPTED_FRAMES,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let cal = Calibration {
        frames: total,
        k_info,
        syndrome_fer: summaries.iter().filter(|s| !s.syndrome_ok).count() as f64 / total as f64,
        rows,
        bootstrap,
    };
    for w in cal.warnings() {
        warn!("{w}");
    }
    Ok(cal)
}

/// Simulates `num_frames` frames and calibrates `target_afr` together with
/// [`DEFAULT_AFR_GRID`].
pub fn calibrate(
    code: &LdpcCode,
    channel: &ChannelSpec,
    target_afr: f64,
    num_frames: usize,
    seed: u64,
    bp: &BpConfig,
) -> Result<(CalibrationRow, Calibration)> {
    check_grid(&[target_afr])?;
    let mut grid: Vec<f64> = DEFAULT_AFR_GRID.to_vec();
    if !grid.contains(&target_afr) {
        grid.push(target_afr);
        grid.sort_by(f64::total_cmp);
    }
    let summaries = simulate_frames(code, channel, bp, seed, 0..num_frames as u64)?;
    let boot = BootstrapOptions {
        seed,
        ..Default::default()
    };
    let cal = calibrate_summaries(&summaries, code.k(), &grid, false, &boot)?;
    let row = *cal.row(target_afr).expect("target on grid");
    Ok((row, cal))
}

/// Adjacent-pair comparison of a bootstrap table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairTrend {
    pub afr_lo: f64,
    pub afr_hi: f64,
    /// Fraction of resamples where BER_AF(afr_hi) < BER_AF(afr_lo).
    pub p_decrease: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport {
    pub pairs: Vec<PairTrend>,
    /// No adjacent pair decreases in at least `confidence` of resamples.
    pub monotone: bool,
    /// BER_AF at the largest AFR exceeds that at the smallest in at least
    /// `confidence` of resamples.
    pub increasing_overall: bool,
}

/// Tests "BER_AF non-decreasing in AFR" on a calibration whose grid is
/// sorted ascending.
pub fn trend_check(cal: &Calibration, confidence: f64) -> TrendReport {
    let frac = |a: &[f64], b: &[f64], f: fn(f64, f64) -> bool| {
        let n = a.len().max(1);
        a.iter().zip(b).filter(|(x, y)| f(**x, **y)).count() as f64 / n as f64
    };
    let pairs: Vec<PairTrend> = (1..cal.rows.len())
        .map(|j| PairTrend {
            afr_lo: cal.rows[j - 1].afr,
            afr_hi: cal.rows[j].afr,
            p_decrease: frac(&cal.bootstrap[j], &cal.bootstrap[j - 1], |hi, lo| hi < lo),
        })
        .collect();
    let monotone = pairs.iter().all(|p| p.p_decrease < confidence);
    let last = cal.bootstrap.len().saturating_sub(1);
    let increasing_overall = !cal.bootstrap.is_empty()
        && frac(&cal.bootstrap[last], &cal.bootstrap[0], |hi, lo| hi > lo) >= confidence;
    TrendReport {
        pairs,
        monotone,
        increasing_overall,
    }
}
