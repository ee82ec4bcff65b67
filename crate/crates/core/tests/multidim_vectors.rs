//! Mapping against vectors from an independent Python implementation
//! (tests/data/gen_multidim_vectors.py).

use cvqkd_recon::multidim::{demap, map};

#[test]
fn map_matches_reference_vectors() {
    let text = include_str!("data/multidim_vectors.txt");
    let mut seen = [0usize; 9];
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let v: Vec<f64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
        let d = v[0] as usize;
        let (y, rest) = v[1..].split_at(d);
        let (u, m_ref) = rest.split_at(d);
        let mapped = map(u, y, d).unwrap();
        for (a, b) in mapped.m.iter().zip(m_ref) {
            assert!((a - b).abs() < 1e-12, "d = {d}: {a} vs {b}");
        }
        let r = demap(&mapped, y).unwrap();
        let s = (d as f64).sqrt();
        assert!(r.iter().zip(u).all(|(a, b)| (a * s - b).abs() < 1e-12));
        seen[d] += 1;
    }
    assert_eq!([seen[1], seen[2], seen[4], seen[8]], [25; 4]);
}
