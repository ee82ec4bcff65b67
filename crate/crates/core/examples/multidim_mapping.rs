//! Bob maps one encoded frame onto his quadratures, Alice demaps with her
//! own and decodes from the virtual-channel LLRs.
//!
//! cargo run --release --example multidim_mapping

use cvqkd_recon::ldpc::{decode_bp, BpConfig, CodeSpec};
use cvqkd_recon::multidim::{virtual_channel, NoiseModel};
use cvqkd_recon::protocol::stage1::{bob_frame, simulate_quadratures};
use cvqkd_recon::protocol::ChannelSpec;

fn main() -> cvqkd_recon::Result<()> {
    let code = CodeSpec::default().build()?;
    let spec = ChannelSpec::for_efficiency(code.rate(), 0.5)?;
    println!(
        "N = {}, K = {}, SNR = {:.4}, I_AB = {:.4} bits, beta = {:.2}",
        code.n(),
        code.k(),
        spec.snr(),
        spec.mutual_info(),
        spec.efficiency(code.rate())
    );

    let q = simulate_quadratures(&spec, code.n(), 1, 0);
    let bob = bob_frame(&code, &q.y, spec.dimension, 1, 0)?;
    let out = virtual_channel(&bob.mapped, &q.x, spec.sigma_z2, NoiseModel::BlockNorms)?;

    let u = bob.u();
    let flips = out.llr.iter().zip(&u).filter(|(l, u)| l.signum() != u.signum()).count();
    println!("hard-decision errors before decoding: {flips}/{}", code.n());

    let dec = decode_bp(&code, &out.llr, &BpConfig::default())?;
    let errors = dec.s_hat.iter().zip(&bob.s).filter(|(a, b)| a != b).count();
    println!(
        "BP: syndrome ok {}, {} iterations, {errors} information-bit errors",
        dec.syndrome_ok, dec.iterations_used
    );
    Ok(())
}
