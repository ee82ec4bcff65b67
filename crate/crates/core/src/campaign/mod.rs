//! Config-driven experiment campaigns writing CSV tables and a manifest.
//!
//! Every campaign is fully determined by its [`ExperimentConfig`]: frames
//! are seeded by index, so reruns, resumed runs and runs with a different
//! worker count produce byte-identical CSV files. Only `manifest.json`
//! carries wall-clock data.
//!
//! # CSV schemas
//!
//! `fer_beta.csv` (bounds): `i_ab, fer, beta_max` with
//! `beta_max = min(1 / (1 - fer), 1 / i_ab)`.
//!
//! `calibration.csv`, `sweep_afr.csv`, `sweep_blocklength.csv`:
//! `n, k, rate, beta_l, afr, accepted, q_c, ber_af, ber_lo, ber_hi,
//! capacity_bsc, beta_t, low_confidence`, where `beta_t` assumes an ideal
//! stage 2 (`beta_h = 1`) and `ber_lo`/`ber_hi` bound a bootstrap interval.
//!
//! `trend.csv`: `n, beta_l, afr_lo, afr_hi, p_decrease`, the bootstrap
//! probability that BER_AF drops between adjacent AFRs.
//!
//! `skr_vs_distance.csv`: `d_km, transmittance, curve, beta_t, afr,
//! va_max, va_opt, skr_t, skr_t_clamped, va_dw, skr_dw, skr_dw_clamped,
//! skr_plob`. Rates are bits per quadrature use; `*_clamped` columns are
//! floored at [`PLOT_FLOOR`] for log axes; `skr_plob` is `inf` at zero loss.
//!
//! `session.csv` and `session_report.json`: one in-process session.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use log::{info, warn};
use serde::Serialize;

pub use config::{CampaignKind, ExperimentConfig, ValidationReport};

use crate::error::{Error, Result};
use crate::ldpc::{BpConfig, CodeSpec, LdpcCode};
use crate::protocol::calibrate::{calibrate_summaries, trend_check, Calibration};
use crate::protocol::stage1::{simulate_frames, ChannelSpec, FrameSummary};
use crate::protocol::{run_session, SessionReport};
use crate::skr::{fer_beta_curve, optimize_modulation_variance, plob, Bound};

/// Floor applied to key rates in the `*_clamped` plot columns.
pub const PLOT_FLOOR: f64 = 1e-7;

/// Command-line overrides of config values.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub build_id: String,
    pub kind: String,
    pub seed: u64,
    pub workers: usize,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputFile>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

/// What a finished campaign produced.
#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
    /// Human-readable result lines.
    pub summary: Vec<String>,
    /// Set by session campaigns.
    pub session: Option<SessionReport>,
}

/// A `git describe`-style identifier of the source tree, or the crate
/// version when git is unavailable.
pub fn build_id() -> String {
    std::process::Command::new("git")
        .args(["-C", env!("CARGO_MANIFEST_DIR"), "describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| format!("{}-{}", env!("CARGO_PKG_VERSION"), s.trim()))
        .unwrap_or_else(|| env!("CARGO_PKG_VERSION").to_string())
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T], outputs: &mut Vec<OutputFile>) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(name))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    outputs.push(OutputFile {
        file: name.to_string(),
        rows: rows.len(),
    });
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub i_ab: f64,
    pub fer: f64,
    pub beta_max: f64,
}

/// The bound table for every `I_AB` on the FER grid.
pub fn bounds_table(i_ab: &[f64], fer_grid: &[f64]) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::with_capacity(i_ab.len() * fer_grid.len());
    for &i in i_ab {
        for (fer, beta_max) in fer_beta_curve(i, fer_grid)? {
            rows.push(BoundRow { i_ab: i, fer, beta_max });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AfrRow {
    pub n: usize,
    pub k: usize,
    pub rate: f64,
    pub beta_l: f64,
    pub afr: f64,
    pub accepted: usize,
    pub q_c: f64,
    pub ber_af: f64,
    pub ber_lo: f64,
    pub ber_hi: f64,
    pub capacity_bsc: f64,
    pub beta_t: f64,
    pub low_confidence: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendRow {
    pub n: usize,
    pub beta_l: f64,
    pub afr_lo: f64,
    pub afr_hi: f64,
    pub p_decrease: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkrRow {
    pub d_km: f64,
    pub transmittance: f64,
    pub curve: usize,
    pub beta_t: f64,
    pub afr: f64,
    pub va_max: f64,
    pub va_opt: f64,
    pub skr_t: f64,
    pub skr_t_clamped: f64,
    pub va_dw: f64,
    pub skr_dw: f64,
    pub skr_dw_clamped: f64,
    pub skr_plob: f64,
}

/// Devetak-Winter, PLOB and two-step curves over the distance grid.
pub fn skr_table(link: &crate::channel::LinkParams, sweep: &config::SkrSweep) -> Result<Vec<SkrRow>> {
    let mut rows = Vec::new();
    for d in sweep.distances() {
        let l = link.with_distance(d);
        let dw = optimize_modulation_variance(&l, 1.0, 1.0, sweep.va_min, sweep.dw_va_max)?;
        let pl = match plob(d, link.attenuation_db_per_km)? {
            Bound::Finite(v) => v,
            Bound::Unbounded => f64::INFINITY,
        };
        for (ci, c) in sweep.curves.iter().enumerate() {
            let opt = optimize_modulation_variance(&l, c.beta_t, c.afr * (1.0 - c.fer_h), sweep.va_min, c.va_max)?;
            rows.push(SkrRow {
                d_km: d,
                transmittance: l.transmittance(),
                curve: ci,
                beta_t: c.beta_t,
                afr: c.afr,
                va_max: c.va_max,
                va_opt: opt.modulation_variance,
                skr_t: opt.skr,
                skr_t_clamped: opt.skr.max(PLOT_FLOOR),
                va_dw: dw.modulation_variance,
                skr_dw: dw.skr,
                skr_dw_clamped: dw.skr.max(PLOT_FLOOR),
                skr_plob: pl,
            });
        }
    }
    Ok(rows)
}

/// Frame summaries for one (code, channel), resuming from and updating a
/// checkpoint file in `dir`.
#[allow(clippy::too_many_arguments)]
pub fn frames_with_checkpoint(
    dir: &Path,
    tag: &str,
    code: &LdpcCode,
    code_spec: &CodeSpec,
    channel: &ChannelSpec,
    bp: &BpConfig,
    seed: u64,
    frames: usize,
    chunk: usize,
) -> Result<Vec<FrameSummary>> {
    fs::create_dir_all(dir)?;
    let data = dir.join(format!("{tag}.csv"));
    let meta = dir.join(format!("{tag}.json"));
    let fingerprint = serde_json::to_string(&(code_spec, channel, bp, seed)).map_err(|e| Error::Config(e.to_string()))?;

    let mut done: Vec<FrameSummary> = Vec::new();
    if data.exists() && fs::read_to_string(&meta).ok().as_deref() == Some(fingerprint.as_str()) {
        let mut rd = csv::Reader::from_path(&data)?;
        for rec in rd.deserialize::<FrameSummary>() {
            match rec {
                Ok(s) if s.index == done.len() as u64 => done.push(s),
                _ => break,
            }
        }
        info!("{tag}: resuming after {} checkpointed frames", done.len());
    } else if data.exists() {
        warn!("{tag}: checkpoint belongs to a different setup; starting over");
    }
    done.truncate(frames);
    fs::write(&meta, &fingerprint)?;

    while done.len() < frames {
        let start = done.len() as u64;
        let stop = (done.len() + chunk).min(frames) as u64;
        done.extend(simulate_frames(code, channel, bp, seed, start..stop)?);
        let tmp = dir.join(format!("{tag}.csv.tmp"));
        let mut w = csv::Writer::from_path(&tmp)?;
        for s in &done {
            w.serialize(s)?;
        }
        w.flush()?;
        drop(w);
        fs::rename(&tmp, &data)?;
        info!("{tag}: {}/{} frames", done.len(), frames);
    }
    Ok(done)
}

struct AfrSweep {
    rows: Vec<AfrRow>,
    trend: Vec<TrendRow>,
    summary: Vec<String>,
}

fn afr_rows(code: &LdpcCode, beta_l: f64, cal: &Calibration) -> Vec<AfrRow> {
    cal.rows
        .iter()
        .map(|r| AfrRow {
            n: code.n(),
            k: code.k(),
            rate: code.rate(),
            beta_l,
            afr: r.afr,
            accepted: r.accepted,
            q_c: r.q_c,
            ber_af: r.ber_af,
            ber_lo: r.ber_lo,
            ber_hi: r.ber_hi,
            capacity_bsc: r.capacity_bsc,
            beta_t: beta_l * r.capacity_bsc,
            low_confidence: r.low_confidence,
        })
        .collect()
}

fn sweep_codes(cfg: &ExperimentConfig, codes: &[CodeSpec], out: &Path) -> Result<AfrSweep> {
    let mc = &cfg.monte_carlo;
    let bp = BpConfig {
        max_iterations: mc.max_iterations,
        ..Default::default()
    };
    let grid = cfg.afr_points();
    let mut res = AfrSweep {
        rows: Vec::new(),
        trend: Vec::new(),
        summary: Vec::new(),
    };
    for spec in codes {
        let code = spec.build()?;
        for &beta in &cfg.beta_l {
            let channel = ChannelSpec {
                dimension: mc.dimension,
                noise_model: mc.noise_model,
                ..ChannelSpec::for_efficiency(code.rate(), beta)?
            };
            let tag = format!("n{}_k{}_beta{beta}", code.n(), code.k());
            let frames = frames_with_checkpoint(
                &out.join("checkpoints"),
                &tag,
                &code,
                spec,
                &channel,
                &bp,
                cfg.seed,
                mc.frames,
                mc.checkpoint_every,
            )?;
            let boot = crate::protocol::calibrate::BootstrapOptions {
                seed: cfg.seed ^ mc.bootstrap.seed,
                ..mc.bootstrap
            };
            let cal = calibrate_summaries(&frames, code.k(), &grid, mc.prefilter_syndrome, &boot)?;
            let t = trend_check(&cal, boot.confidence);
            res.summary.push(format!(
                "N = {} beta_l = {beta}: stage-1 FER {:.4}, BER_AF monotone in AFR: {}",
                code.n(),
                cal.syndrome_fer,
                t.monotone
            ));
            res.trend.extend(t.pairs.iter().map(|p| TrendRow {
                n: code.n(),
                beta_l: beta,
                afr_lo: p.afr_lo,
                afr_hi: p.afr_hi,
                p_decrease: p.p_decrease,
            }));
            res.rows.extend(afr_rows(&code, beta, &cal));
        }
    }
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SessionRow {
    session_id: u32,
    frames: usize,
    accepted: usize,
    ber_af_realized: Option<f64>,
    payload_bits: usize,
    n_h: Option<usize>,
    m_h: Option<usize>,
    stage2_converged: Option<bool>,
    key_consumed: usize,
    bits_delivered: usize,
    strings_equal: bool,
    transcript_bytes: usize,
}

impl From<&SessionReport> for SessionRow {
    fn from(r: &SessionReport) -> Self {
        SessionRow {
            session_id: r.session_id,
            frames: r.frames,
            accepted: r.accepted,
            ber_af_realized: r.ber_af_realized,
            payload_bits: r.payload_bits,
            n_h: r.n_h,
            m_h: r.m_h,
            stage2_converged: r.stage2_converged,
            key_consumed: r.key_consumed,
            bits_delivered: r.bits_delivered,
            strings_equal: r.strings_equal,
            transcript_bytes: r.transcript_bytes.values().sum(),
        }
    }
}

/// Runs `cfg` after applying `opts`. Config problems are
/// [`Error::Config`]; everything else is a runtime failure.
pub fn run_campaign(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CampaignOutcome> {
    let mut cfg = cfg.clone();
    if let Some(s) = opts.seed {
        cfg.seed = s;
        if let Some(sess) = cfg.session.as_mut() {
            sess.seed = s;
        }
    }
    if let Some(d) = &opts.output_dir {
        cfg.output_dir = d.clone();
    }
    if opts.workers.is_some() {
        cfg.workers = opts.workers;
    }
    let report = cfg.validate();
    if !report.is_ok() {
        return Err(Error::Config(report.errors.join("; ")));
    }
    let workers = cfg.workers.unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| execute(&cfg, workers, report.warnings))
}

fn execute(cfg: &ExperimentConfig, workers: usize, warnings: Vec<String>) -> Result<CampaignOutcome> {
    let started = Instant::now();
    let started_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let out = cfg.output_dir.clone();
    fs::create_dir_all(&out)?;
    let mut outputs = Vec::new();
    let mut notes = Vec::new();
    let mut summary = Vec::new();
    let mut session = None;

    match cfg.kind {
        CampaignKind::Bounds => {
            let b = cfg.bounds_spec();
            let rows = bounds_table(&b.i_ab, &b.fer_grid())?;
            write_csv(&out, "fer_beta.csv", &rows, &mut outputs)?;
            for &i in &b.i_ab {
                summary.push(format!("I_AB = {i}: efficiency ceiling {}", 1.0 / i));
            }
        }
        CampaignKind::Calibrate | CampaignKind::SweepAfr => {
            let res = sweep_codes(cfg, std::slice::from_ref(&cfg.code), &out)?;
            let name = if cfg.kind == CampaignKind::Calibrate {
                "calibration.csv"
            } else {
                "sweep_afr.csv"
            };
            if let Some(t) = cfg.target_afr {
                for r in res.rows.iter().filter(|r| r.afr == t) {
                    summary.push(format!(
                        "beta_l = {}: AFR {t} -> q_c = {:.3}, BER_AF = {:.3e} [{:.3e}, {:.3e}], beta_t = {:.4}",
                        r.beta_l, r.q_c, r.ber_af, r.ber_lo, r.ber_hi, r.beta_t
                    ));
                }
            }
            summary.extend(res.summary);
            write_csv(&out, name, &res.rows, &mut outputs)?;
            write_csv(&out, "trend.csv", &res.trend, &mut outputs)?;
        }
        CampaignKind::SweepBlocklength => {
            let codes = &cfg.blocklength.as_ref().expect("validated").codes;
            let res = sweep_codes(cfg, codes, &out)?;
            summary.extend(res.summary);
            write_csv(&out, "sweep_blocklength.csv", &res.rows, &mut outputs)?;
            write_csv(&out, "trend.csv", &res.trend, &mut outputs)?;
        }
        CampaignKind::SkrVsDistance => {
            let sweep = cfg.skr_sweep();
            let rows = skr_table(&cfg.link, &sweep)?;
            if let Some(n) = sweep.n_privacy {
                notes.push(format!("n_privacy = {n} recorded only; rates are asymptotic"));
            }
            notes.push(format!("*_clamped columns floored at {PLOT_FLOOR}"));
            let last = rows.iter().rfind(|r| r.curve == 0);
            if let Some(r) = last {
                summary.push(format!("at {} km: DW {:.3e}, curve 0 {:.3e}", r.d_km, r.skr_dw, r.skr_t));
            }
            write_csv(&out, "skr_vs_distance.csv", &rows, &mut outputs)?;
        }
        CampaignKind::Session => {
            let sess = cfg.session.as_ref().expect("validated");
            let report = run_session(sess)?;
            summary.push(format!(
                "outcome {:?}: accepted {}, delivered {} bits, key consumed {}, strings equal {}",
                report.outcome, report.accepted, report.bits_delivered, report.key_consumed, report.strings_equal
            ));
            write_json(&out.join("session_report.json"), &report)?;
            outputs.push(OutputFile {
                file: "session_report.json".into(),
                rows: 1,
            });
            write_csv(&out, "session.csv", &[SessionRow::from(&report)], &mut outputs)?;
            session = Some(report);
        }
    }

    let manifest = Manifest {
        build_id: build_id(),
        kind: cfg.kind.name().into(),
        seed: cfg.seed,
        workers,
        started_unix_s,
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs,
        notes,
        warnings,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(CampaignOutcome {
        output_dir: out,
        manifest,
        summary,
        session,
    })
}
