//! Cayley–Dickson algebras of dimension 1, 2, 4 and 8 (reals, complex
//! numbers, quaternions, octonions).
//!
//! Product convention: `(a, b)(c, d) = (ac - d* b, d a + b c*)`, with `*`
//! the conjugate. All four algebras are normed and alternative, so
//! `|pq| = |p||q|` and `(p q^-1) q = p` hold even for octonions.

/// Largest supported dimension.
pub const MAX_DIM: usize = 8;

pub fn is_supported(d: usize) -> bool {
    matches!(d, 1 | 2 | 4 | 8)
}

/// Writes the conjugate of `a` into `out`.
pub fn conj(a: &[f64], out: &mut [f64]) {
    out[0] = a[0];
    for (o, v) in out[1..a.len()].iter_mut().zip(&a[1..]) {
        *o = -v;
    }
}

/// `out = a * b`. All three slices have the same power-of-two length <= 8.
pub fn mul(a: &[f64], b: &[f64], out: &mut [f64]) {
    let n = a.len();
    debug_assert!(is_supported(n) && b.len() == n && out.len() >= n);
    if n == 1 {
        out[0] = a[0] * b[0];
        return;
    }
    let h = n / 2;
    let (a1, a2) = a.split_at(h);
    let (c, d) = b.split_at(h);

    let mut d_conj = [0.0; MAX_DIM];
    let mut c_conj = [0.0; MAX_DIM];
    conj(d, &mut d_conj[..h]);
    conj(c, &mut c_conj[..h]);

    let mut t1 = [0.0; MAX_DIM];
    let mut t2 = [0.0; MAX_DIM];

    // first half: a1 c - d* a2
    mul(a1, c, &mut t1[..h]);
    mul(&d_conj[..h], a2, &mut t2[..h]);
    for i in 0..h {
        out[i] = t1[i] - t2[i];
    }
    // second half: d a1 + a2 c*
    mul(d, a1, &mut t1[..h]);
    mul(a2, &c_conj[..h], &mut t2[..h]);
    for i in 0..h {
        out[h + i] = t1[i] + t2[i];
    }
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}
