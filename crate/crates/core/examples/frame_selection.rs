//! Small calibration: simulate frames past capacity, rank them by q and
//! tabulate BER_AF against AFR.
//!
//! cargo run --release --example frame_selection -- [beta] [frames]

use cvqkd_recon::ldpc::{BpConfig, CodeSpec};
use cvqkd_recon::protocol::calibrate::BootstrapOptions;
use cvqkd_recon::protocol::{calibrate_summaries, simulate_frames, trend_check, ChannelSpec};

fn main() -> cvqkd_recon::Result<()> {
    let mut args = std::env::args().skip(1);
    let beta: f64 = args.next().map_or(1.3, |a| a.parse().expect("beta"));
    let frames: u64 = args.next().map_or(5000, |a| a.parse().expect("frames"));

    let code = CodeSpec::default().build()?;
    let channel = ChannelSpec::for_efficiency(code.rate(), beta)?;
    let summaries = simulate_frames(&code, &channel, &BpConfig::with_max_iterations(25), 1, 0..frames)?;
    let grid = [0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0];
    let cal = calibrate_summaries(&summaries, code.k(), &grid, false, &BootstrapOptions::default())?;

    println!("beta_l = {beta}, {frames} frames, stage-1 FER = {:.4}", cal.syndrome_fer);
    println!("{:>6} {:>8} {:>10} {:>10} {:>8}", "AFR", "frames", "q_c", "BER_AF", "beta_t");
    for r in &cal.rows {
        println!(
            "{:>6} {:>8} {:>10.2} {:>10.2e} {:>8.4}{}",
            r.afr,
            r.accepted,
            r.q_c,
            r.ber_af,
            beta * r.capacity_bsc,
            if r.low_confidence { "  (few frames)" } else { "" }
        );
    }
    println!("monotone at 95%: {}", trend_check(&cal, 0.95).monotone);
    Ok(())
}
