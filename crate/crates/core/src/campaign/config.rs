use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::LinkParams;
use crate::error::{Error, Result};
use crate::ldpc::CodeSpec;
use crate::multidim::{NoiseModel, DEFAULT_DIMENSION};
use crate::protocol::calibrate::{BootstrapOptions, DEFAULT_AFR_GRID, MIN_ACCEPTED_FRAMES};
use crate::protocol::select::accepted_count;
use crate::protocol::{SelectionPolicy, SessionConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampaignKind {
    Calibrate,
    SweepAfr,
    SweepBlocklength,
    SkrVsDistance,
    Bounds,
    Session,
}

impl CampaignKind {
    pub fn name(self) -> &'static str {
        match self {
            CampaignKind::Calibrate => "calibrate",
            CampaignKind::SweepAfr => "sweep_afr",
            CampaignKind::SweepBlocklength => "sweep_blocklength",
            CampaignKind::SkrVsDistance => "skr_vs_distance",
            CampaignKind::Bounds => "bounds",
            CampaignKind::Session => "session",
        }
    }

    fn is_monte_carlo(self) -> bool {
        matches!(
            self,
            CampaignKind::Calibrate | CampaignKind::SweepAfr | CampaignKind::SweepBlocklength
        )
    }
}

/// Frame budget and decoder settings of a Monte-Carlo campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarlo {
    /// Frames per channel point.
    pub frames: usize,
    pub max_iterations: usize,
    /// Frames simulated between checkpoint writes.
    pub checkpoint_every: usize,
    pub dimension: usize,
    pub noise_model: NoiseModel,
    pub prefilter_syndrome: bool,
    pub bootstrap: BootstrapOptions,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo {
            frames: 100_000,
            max_iterations: 25,
            checkpoint_every: 10_000,
            dimension: DEFAULT_DIMENSION,
            noise_model: NoiseModel::BlockNorms,
            prefilter_syndrome: false,
            bootstrap: BootstrapOptions::default(),
        }
    }
}

/// Codes compared by a blocklength sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlocklengthSweep {
    pub codes: Vec<CodeSpec>,
}

/// One two-step curve of a distance sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkrCurve {
    pub beta_t: f64,
    pub afr: f64,
    #[serde(default)]
    pub fer_h: f64,
    /// Upper end of the modulation-variance search.
    pub va_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkrSweep {
    pub distance_start_km: f64,
    pub distance_stop_km: f64,
    pub distance_step_km: f64,
    pub va_min: f64,
    /// Modulation-variance cap for the Devetak-Winter curve.
    pub dw_va_max: f64,
    pub curves: Vec<SkrCurve>,
    /// Privacy-amplification block size. Recorded in the manifest only:
    /// all rates are asymptotic.
    pub n_privacy: Option<f64>,
}

impl Default for SkrSweep {
    fn default() -> Self {
        SkrSweep {
            distance_start_km: 0.0,
            distance_stop_km: 300.0,
            distance_step_km: 5.0,
            va_min: 0.01,
            dw_va_max: 1e4,
            curves: vec![
                SkrCurve {
                    beta_t: 1.5,
                    afr: 0.003,
                    fer_h: 0.0,
                    va_max: 8.0,
                },
                SkrCurve {
                    beta_t: 1.5,
                    afr: 0.003,
                    fer_h: 0.0,
                    va_max: 1e4,
                },
            ],
            n_privacy: None,
        }
    }
}

impl SkrSweep {
    /// `start, start + step, ...` up to and including `stop`.
    pub fn distances(&self) -> Vec<f64> {
        let n = ((self.distance_stop_km - self.distance_start_km) / self.distance_step_km + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.distance_start_km + i as f64 * self.distance_step_km).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSpec {
    pub i_ab: Vec<f64>,
    /// FER grid `i / points` for `i = 0..points`.
    pub points: usize,
}

impl Default for BoundsSpec {
    fn default() -> Self {
        BoundsSpec {
            i_ab: vec![0.2, 0.1, 0.02],
            points: 1000,
        }
    }
}

impl BoundsSpec {
    pub fn fer_grid(&self) -> Vec<f64> {
        (0..self.points).map(|i| i as f64 / self.points as f64).collect()
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_afr_grid() -> Vec<f64> {
    DEFAULT_AFR_GRID.to_vec()
}

/// A campaign, fully specified by one TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: CampaignKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub link: LinkParams,
    #[serde(default)]
    pub code: CodeSpec,
    #[serde(default)]
    pub monte_carlo: MonteCarlo,
    #[serde(default)]
    pub beta_l: Vec<f64>,
    #[serde(default = "default_afr_grid")]
    pub afr_grid: Vec<f64>,
    #[serde(default)]
    pub target_afr: Option<f64>,
    #[serde(default)]
    pub blocklength: Option<BlocklengthSweep>,
    #[serde(default)]
    pub skr: Option<SkrSweep>,
    #[serde(default)]
    pub bounds: Option<BoundsSpec>,
    #[serde(default)]
    pub session: Option<SessionConfig>,
}

/// Outcome of a schema and range check.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn skr_sweep(&self) -> SkrSweep {
        self.skr.clone().unwrap_or_default()
    }

    pub fn bounds_spec(&self) -> BoundsSpec {
        self.bounds.clone().unwrap_or_default()
    }

    /// The AFRs a Monte-Carlo campaign reports, ascending.
    pub fn afr_points(&self) -> Vec<f64> {
        let mut g = self.afr_grid.clone();
        if let Some(t) = self.target_afr {
            if !g.contains(&t) {
                g.push(t);
            }
        }
        g.sort_by(f64::total_cmp);
        g
    }

    /// Range and consistency checks, without running anything.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        let mut err = |key: &str, msg: String| r.errors.push(format!("`{key}`: {msg}"));
        if let Err(e) = self.link.validate() {
            err("link", e.to_string());
        }
        if self.workers == Some(0) {
            err("workers", "must be >= 1".into());
        }
        for &a in &self.afr_grid {
            if !(a > 0.0 && a <= 1.0) {
                err("afr_grid", format!("AFR {a} is not in (0, 1]"));
            }
        }
        if let Some(t) = self.target_afr {
            if !(t > 0.0 && t <= 1.0) {
                err("target_afr", format!("AFR {t} is not in (0, 1]"));
            }
        }
        if self.kind.is_monte_carlo() {
            let mc = &self.monte_carlo;
            if mc.frames == 0 {
                err("monte_carlo.frames", "must be >= 1".into());
            }
            if mc.max_iterations == 0 {
                err("monte_carlo.max_iterations", "must be >= 1".into());
            }
            if mc.checkpoint_every == 0 {
                err("monte_carlo.checkpoint_every", "must be >= 1".into());
            }
            if !(mc.bootstrap.confidence > 0.0 && mc.bootstrap.confidence < 1.0) {
                err("monte_carlo.bootstrap.confidence", "must lie in (0, 1)".into());
            }
            if self.beta_l.is_empty() {
                err("beta_l", "at least one efficiency is required".into());
            }
            if let Some(b) = self.beta_l.iter().find(|b| !(**b > 0.0) || !b.is_finite()) {
                err("beta_l", format!("{b} is not > 0"));
            }
            if self.afr_grid.is_empty() {
                err("afr_grid", "is empty".into());
            }
        }
        match self.kind {
            CampaignKind::Calibrate if self.target_afr.is_none() => {
                err("target_afr", "required for a calibrate campaign".into());
            }
            CampaignKind::SweepBlocklength if self.blocklength.as_ref().is_none_or(|b| b.codes.is_empty()) => {
                err("blocklength.codes", "required for a sweep_blocklength campaign".into());
            }
            CampaignKind::Session => match &self.session {
                None => err("session", "required for a session campaign".into()),
                Some(s) => {
                    if let Err(e) = s.validate() {
                        err("session", e.to_string());
                    }
                }
            },
            CampaignKind::SkrVsDistance => {
                let s = self.skr_sweep();
                if !(s.distance_step_km > 0.0) || s.distance_start_km < 0.0 || s.distance_stop_km < s.distance_start_km {
                    err("skr", "need 0 <= distance_start_km <= distance_stop_km and step > 0".into());
                }
                if !(s.va_min > 0.0 && s.dw_va_max > s.va_min) {
                    err("skr", "need 0 < va_min < dw_va_max".into());
                }
                if s.curves.is_empty() {
                    err("skr.curves", "at least one curve is required".into());
                }
                for c in &s.curves {
                    if !(c.afr > 0.0 && c.afr <= 1.0) {
                        err("skr.curves.afr", format!("AFR {} is not in (0, 1]", c.afr));
                    }
                    if !(0.0..=1.0).contains(&c.fer_h) {
                        err("skr.curves.fer_h", format!("{} is not in [0, 1]", c.fer_h));
                    }
                    if !(c.va_max > s.va_min) {
                        err("skr.curves.va_max", format!("{} must exceed va_min", c.va_max));
                    }
                }
            }
            CampaignKind::Bounds => {
                let b = self.bounds_spec();
                if b.points < 2 {
                    err("bounds.points", "must be >= 2".into());
                }
                if b.i_ab.is_empty() || b.i_ab.iter().any(|v| !(*v > 0.0)) {
                    err("bounds.i_ab", "values must be > 0".into());
                }
            }
            _ => {}
        }

        let weak = |frames: usize, afr: f64| afr > 0.0 && accepted_count(frames, afr) < MIN_ACCEPTED_FRAMES;
        if self.kind.is_monte_carlo() {
            for a in self.afr_points() {
                if weak(self.monte_carlo.frames, a) {
                    r.warnings.push(format!(
                        "AFR {a} with {} frames accepts only {} frames (< {MIN_ACCEPTED_FRAMES}): statistically weak calibration",
                        self.monte_carlo.frames,
                        accepted_count(self.monte_carlo.frames, a)
                    ));
                }
            }
        }
        if let (CampaignKind::Session, Some(s)) = (self.kind, &self.session) {
            if let SelectionPolicy::ByAfr { afr } = s.selection {
                if weak(s.frames, afr) {
                    r.warnings.push(format!(
                        "session selects only {} frames (< {MIN_ACCEPTED_FRAMES})",
                        accepted_count(s.frames, afr)
                    ));
                }
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_bounds_config() {
        let cfg = ExperimentConfig::from_toml("kind = \"bounds\"\n").unwrap();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.bounds_spec().fer_grid().len(), 1000);
    }

    #[test]
    fn zero_afr_rejected() {
        let cfg = ExperimentConfig::from_toml("kind = \"sweep_afr\"\nbeta_l = [1.1]\nafr_grid = [0.0, 0.5]\n").unwrap();
        let r = cfg.validate();
        assert!(!r.is_ok());
        assert!(r.errors[0].contains("afr_grid"));
    }

    #[test]
    fn weak_calibration_warns() {
        let text = "kind = \"calibrate\"\nbeta_l = [1.3]\ntarget_afr = 0.001\nafr_grid = [0.5]\n[monte_carlo]\nframes = 10000\n";
        let r = ExperimentConfig::from_toml(text).unwrap().validate();
        assert!(r.is_ok());
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0].contains("only 10 frames"));
    }

    #[test]
    fn unknown_key_is_named() {
        let e = ExperimentConfig::from_toml("kind = \"bounds\"\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("bogus"));
        let e = ExperimentConfig::from_toml("kind = \"bounds\"\nseed = \"x\"\n").unwrap_err();
        assert!(e.to_string().contains("seed"));
    }

    #[test]
    fn nested_code_and_session() {
        let text = r#"
kind = "session"
[session]
frames = 200
channel = { efficiency = 1.2 }
selection = { mode = "by_afr", afr = 0.5 }
[session.code]
kind = "extended_ira"
n = 512
k = 51
core_checks = 30
core_info_degree = 3.0
extension_degree = 3
info_weight = 6.0
seed = 7
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert!(cfg.validate().is_ok());
        let s = cfg.session.unwrap();
        assert_eq!(s.code, CodeSpec::default());
    }

    #[test]
    fn distance_grid() {
        let s = SkrSweep {
            distance_start_km: 0.0,
            distance_stop_km: 10.0,
            distance_step_km: 2.5,
            ..Default::default()
        };
        assert_eq!(s.distances(), vec![0.0, 2.5, 5.0, 7.5, 10.0]);
    }
}
