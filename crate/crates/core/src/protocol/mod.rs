//! Two-step reconciliation protocol: per-frame stage 1 with q-based
//! frame selection, then a single syndrome exchange over all accepted
//! frames.

pub mod calibrate;
pub mod hash;
pub mod select;
pub mod session;
pub mod stage1;
pub mod stage2;
pub mod wire;

pub use calibrate::{calibrate, calibrate_summaries, trend_check, Calibration, CalibrationRow};
pub use hash::{hash_verify, rate_after_hash, HashTag};
pub use select::{select_indices, SelectionPolicy};
pub use session::{run_party, run_prepared, run_session, Outcome, Role, SessionConfig, SessionReport};
pub use stage1::{alice_stage1, bob_stage1, simulate_frames, ChannelSpec, FrameRecord, FrameSummary};
pub use stage2::{alice_stage2, bob_stage2, OtpPool, Stage2Config, Stage2Plan};
