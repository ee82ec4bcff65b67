//! Stage 2 alone: Bob's accepted bits differ from Alice's in a few places;
//! an encrypted syndrome of a high-rate code removes the difference.

use cvqkd_recon::channel::{substream, Stream};
use cvqkd_recon::protocol::{alice_stage2, bob_stage2, OtpPool, Stage2Config, Stage2Plan};
use rand::Rng;

fn main() -> cvqkd_recon::Result<()> {
    let payload = 5100;
    let cfg = Stage2Config {
        crossover_p: 0.002,
        ..Default::default()
    };
    let plan = Stage2Plan::new(payload, &cfg)?;
    let code = plan.build_code(cfg.code_seed)?;
    println!(
        "payload {payload} bits -> N_h = {}, syndrome {} bits, payload rate {:.4}",
        plan.n_h,
        plan.m_h,
        plan.payload_rate()
    );

    let mut rng = substream(3, Stream::Errors, 0);
    let alice: Vec<u8> = (0..payload).map(|_| rng.random_range(0..2u8)).collect();
    let bob: Vec<u8> = alice.iter().map(|b| b ^ rng.random_bool(cfg.crossover_p) as u8).collect();
    let diff = alice.iter().zip(&bob).filter(|(a, b)| a != b).count();

    // both sides hold the same pre-shared pad
    let mut pad_a = OtpPool::from_seed(9, 1 << 14);
    let mut pad_b = OtpPool::from_seed(9, 1 << 14);
    let (sent, used) = alice_stage2(&alice, &code, &mut pad_a, 1)?;
    let out = bob_stage2(&bob, &sent, &mut pad_b, 1, &code, cfg.crossover_p, &cfg.bp)?;
    println!(
        "{diff} differing bits; decoder converged {} in {} iterations; corrected equal: {}; pad used {used}",
        out.converged,
        out.iterations,
        out.c_hat == alice
    );
    Ok(())
}
