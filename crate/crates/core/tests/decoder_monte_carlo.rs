//! Monte-Carlo checks of the decoder and stage 1 against simple oracles.

use cvqkd_recon::channel::{gaussian_samples, substream, Stream};
use cvqkd_recon::ldpc::construct::irregular;
use cvqkd_recon::ldpc::{decode_bp, BpConfig, CodeSpec, LdpcCode};
use cvqkd_recon::protocol::stage1::{bob_frame, simulate_frames, simulate_quadratures};
use cvqkd_recon::protocol::{ChannelSpec, FrameSummary};

/// Plain flooding sum-product on the dense matrix, written for clarity.
fn reference_bp(h: &[Vec<u8>], llr: &[f64], max_iter: usize) -> (Vec<u8>, bool) {
    let (m, n) = (h.len(), llr.len());
    let edges: Vec<Vec<usize>> = h.iter().map(|r| (0..n).filter(|&j| r[j] == 1).collect()).collect();
    let mut c2v = vec![vec![0.0; n]; m];
    let mut hard = vec![0u8; n];
    for _ in 0..max_iter {
        let mut post = llr.to_vec();
        for (i, e) in edges.iter().enumerate() {
            for &j in e {
                post[j] += c2v[i][j];
            }
        }
        for (i, e) in edges.iter().enumerate() {
            let v2c: Vec<f64> = e.iter().map(|&k| (post[k] - c2v[i][k]).clamp(-30.0, 30.0)).collect();
            for (a, &j) in e.iter().enumerate() {
                let prod: f64 = (0..e.len()).filter(|&b| b != a).map(|b| (v2c[b] / 2.0).tanh()).product();
                c2v[i][j] = 2.0 * prod.clamp(-1.0 + 1e-15, 1.0 - 1e-15).atanh();
            }
        }
        let mut post = llr.to_vec();
        for (i, e) in edges.iter().enumerate() {
            for &j in e {
                post[j] += c2v[i][j];
            }
        }
        hard = post.iter().map(|&v| (v < 0.0) as u8).collect();
        if edges.iter().all(|e| e.iter().fold(0, |a, &j| a ^ hard[j]) == 0) {
            return (hard, true);
        }
    }
    (hard, false)
}

fn half_rate_256() -> LdpcCode {
    irregular(256, 128, &[(3, 1.0)], 2).unwrap()
}

fn awgn_llr(code: &LdpcCode, ebn0_db: f64, frame: u64) -> Vec<f64> {
    // all-zero codeword, BPSK +1
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    let sigma2 = 1.0 / (2.0 * code.rate() * ebn0);
    let mut rng = substream(17, Stream::Noise, frame);
    let z = gaussian_samples(&mut rng, code.n(), sigma2);
    z.iter().map(|v| 2.0 * (1.0 + v) / sigma2).collect()
}

#[test]
fn waterfall_point_at_four_db() {
    let code = half_rate_256();
    let bp = BpConfig::with_max_iterations(50);
    let frames = 10_000;
    let errors = (0..frames)
        .filter(|&f| {
            let r = decode_bp(&code, &awgn_llr(&code, 4.0, f), &bp).unwrap();
            !(r.syndrome_ok && r.c_hat.iter().all(|&b| b == 0))
        })
        .count();
    let fer = errors as f64 / frames as f64;
    assert!(fer < 1e-2, "FER {fer}");
}

#[test]
fn decoder_agrees_with_reference_bp() {
    let code = half_rate_256();
    let h = code.to_dense();
    let bp = BpConfig::with_max_iterations(20);
    let (mut agree, mut failed) = (0, 0);
    let frames = 300;
    // 2 dB sits in the waterfall, so both outcomes occur
    for f in 0..frames {
        let llr = awgn_llr(&code, 2.0, f);
        let ours = decode_bp(&code, &llr, &bp).unwrap();
        let (hard, ok) = reference_bp(&h, &llr, 20);
        agree += (ours.c_hat == hard && ours.syndrome_ok == ok) as usize;
        failed += !ok as usize;
    }
    assert!(failed > 0 && failed < frames as usize, "{failed} reference failures");
    assert!(agree >= frames as usize * 99 / 100, "{agree}/{frames}");
}

/// One-sided Mann-Whitney z statistic for `a` tending to exceed `b`.
fn mann_whitney_z(a: &[f64], b: &[f64]) -> f64 {
    let u: f64 = a
        .iter()
        .map(|x| b.iter().map(|y| if x > y { 1.0 } else if x == y { 0.5 } else { 0.0 }).sum::<f64>())
        .sum();
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mean = n1 * n2 / 2.0;
    let sd = (n1 * n2 * (n1 + n2 + 1.0) / 12.0).sqrt();
    (u - mean) / sd
}

#[test]
fn q_separates_correct_from_wrong_frames() {
    let code = CodeSpec::default().build().unwrap();
    let ch = ChannelSpec::for_efficiency(code.rate(), 0.8).unwrap();
    let frames = simulate_frames(&code, &ch, &BpConfig::with_max_iterations(25), 3, 0..600).unwrap();
    let (good, bad): (Vec<&FrameSummary>, Vec<&FrameSummary>) = frames.iter().partition(|f| f.syndrome_ok && f.bit_errors == 0);
    let good: Vec<f64> = good.iter().map(|f| f.q).collect();
    let bad: Vec<f64> = bad.iter().map(|f| f.q).collect();
    assert!(good.len() > 50 && bad.len() > 50, "{} / {}", good.len(), bad.len());
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&good) > mean(&bad));
    // 99% one-sided
    assert!(mann_whitney_z(&good, &bad) > 2.326);
}

#[test]
fn information_bits_are_fair_and_distinct() {
    let code = CodeSpec::default().build().unwrap();
    let ch = ChannelSpec::for_efficiency(code.rate(), 1.0).unwrap();
    let mut words = std::collections::HashSet::new();
    let mut ones = 0usize;
    for i in 0..100 {
        let q = simulate_quadratures(&ch, code.n(), 8, i);
        let f = bob_frame(&code, &q.y, ch.dimension, 8, i).unwrap();
        ones += f.s.iter().filter(|&&b| b == 1).count();
        words.insert(f.s);
    }
    assert_eq!(words.len(), 100);
    let n = (100 * code.k()) as f64;
    let sigma = (n * 0.25).sqrt();
    assert!((ones as f64 - n / 2.0).abs() < 3.0 * sigma, "{ones} ones in {n} bits");
}
