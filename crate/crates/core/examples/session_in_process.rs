//! A complete reconciliation session with both parties in one process.

use cvqkd_recon::protocol::session::ChannelSetting;
use cvqkd_recon::protocol::{run_session, SelectionPolicy, SessionConfig, Stage2Config};

fn main() -> cvqkd_recon::Result<()> {
    let cfg = SessionConfig {
        frames: 3000,
        channel: ChannelSetting::Efficiency(1.1),
        selection: SelectionPolicy::ByAfr { afr: 0.01 },
        stage2: Stage2Config {
            crossover_p: 0.004,
            ..Default::default()
        },
        ..Default::default()
    };
    let rep = run_session(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&rep).expect("serializable"));
    Ok(())
}
