//! Runs a campaign from a TOML file, as the CLI does.
//!
//! cargo run --release --example campaign_from_toml -- configs/bounds.toml

use cvqkd_recon::campaign::{run_campaign, ExperimentConfig, RunOptions};

fn main() -> cvqkd_recon::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/skr_vs_distance.toml".into());
    let cfg = ExperimentConfig::load(&path)?;
    let report = cfg.validate();
    report.warnings.iter().for_each(|w| eprintln!("warning: {w}"));
    let out = run_campaign(
        &cfg,
        &RunOptions {
            output_dir: Some(std::env::temp_dir().join("cvqkd_campaign")),
            ..Default::default()
        },
    )?;
    out.summary.iter().for_each(|l| println!("{l}"));
    for f in &out.manifest.outputs {
        println!("{} rows -> {}", f.rows, out.output_dir.join(&f.file).display());
    }
    Ok(())
}
