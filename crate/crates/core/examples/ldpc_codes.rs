//! Builds the stage-1 and a stage-2 code, round-trips one through alist
//! and reports basic structure.
//!
//! cargo run --release --example ldpc_codes

use cvqkd_recon::ldpc::{load_alist, save_alist, CodeSpec};

fn main() -> cvqkd_recon::Result<()> {
    let specs = [
        CodeSpec::default(),
        CodeSpec::HighRate {
            n: 2048,
            rate: 0.8,
            seed: 1,
        },
    ];
    let dir = std::env::temp_dir();
    for spec in &specs {
        let code = spec.build()?;
        println!(
            "{}: N = {}, M = {}, K = {}, R = {:.4}, {} edges, girth {}",
            code.structure_tag(),
            code.n(),
            code.m(),
            code.k(),
            code.rate(),
            code.num_edges(),
            code.girth(12).map_or(">= 12".into(), |g| g.to_string())
        );
        let path = dir.join(format!("cvqkd_example_{}.alist", code.n()));
        save_alist(&code, &path)?;
        let back = load_alist(&path)?;
        println!("  alist round trip identical: {}", back.rows() == code.rows());
    }
    Ok(())
}
