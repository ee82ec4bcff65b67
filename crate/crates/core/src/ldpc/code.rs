use std::fmt;

use super::gf2::{reduce, BitRow};
use crate::error::{check_len, Error, Result};

/// How codewords are produced from information bits.
#[derive(Clone)]
enum Encoder {
    /// `H = [A | T]` with `T` dual-diagonal: info bits occupy the first
    /// `k` positions and parity bit `j` accumulates row `j` of `A`.
    Accumulate { k: usize },
    /// Generic systematic encoder from reduced row-echelon form: every
    /// pivot (parity) position is the parity of a subset of the info bits.
    Dense {
        info_positions: Vec<usize>,
        parity_rules: Vec<(usize, BitRow)>,
    },
}

/// A binary LDPC code defined by a sparse parity-check matrix.
///
/// Immutable after construction; share freely between threads.
#[derive(Clone)]
pub struct LdpcCode {
    n: usize,
    rows: Vec<Vec<u32>>,
    cols: Vec<Vec<u32>>,
    k_info: usize,
    info_positions: Vec<usize>,
    encoder: Encoder,
    structure_tag: String,
}

impl fmt::Debug for LdpcCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LdpcCode")
            .field("n", &self.n)
            .field("m", &self.rows.len())
            .field("k_info", &self.k_info)
            .field("edges", &self.num_edges())
            .field("structure_tag", &self.structure_tag)
            .finish()
    }
}

impl PartialEq for LdpcCode {
    /// Two codes are equal when their parity-check matrices are.
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.rows == other.rows
    }
}

fn sorted_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<(Vec<Vec<u32>>, Vec<Vec<u32>>)> {
    let mut cols = vec![Vec::new(); n];
    let mut out = Vec::with_capacity(rows.len());
    for (r, mut row) in rows.into_iter().enumerate() {
        row.sort_unstable();
        row.dedup();
        if let Some(&c) = row.last() {
            if c >= n {
                return Err(Error::Construction(format!(
                    "row {r} references column {c} >= n = {n}"
                )));
            }
        }
        for &c in &row {
            cols[c].push(r as u32);
        }
        out.push(row.into_iter().map(|c| c as u32).collect());
    }
    if let Some(c) = cols.iter().position(|c| c.is_empty()) {
        return Err(Error::Construction(format!("column {c} has no checks")));
    }
    Ok((out, cols))
}

impl LdpcCode {
    /// Builds a code from row adjacency lists (column indices per check).
    ///
    /// The encoder is derived by Gauss–Jordan elimination, so this is
    /// intended for codes up to a few thousand bits; large structured codes
    /// should come from [`LdpcCode::from_accumulate_rows`].
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>, structure_tag: impl Into<String>) -> Result<Self> {
        let (rows, cols) = sorted_rows(n, rows)?;
        let bit_rows = rows
            .iter()
            .map(|r| {
                let mut b = BitRow::zeros(n);
                r.iter().for_each(|&c| b.set(c as usize));
                b
            })
            .collect();
        let echelon = reduce(bit_rows, n);
        let mut is_pivot = vec![false; n];
        for (c, _) in &echelon.pivots {
            is_pivot[*c] = true;
        }
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let k_info = info_positions.len();
        if k_info == 0 {
            return Err(Error::Construction("parity-check matrix has full column rank".into()));
        }
        let parity_rules = echelon
            .pivots
            .into_iter()
            .map(|(c, row)| {
                let mut mask = BitRow::zeros(k_info);
                for (j, &p) in info_positions.iter().enumerate() {
                    if row.get(p) {
                        mask.set(j);
                    }
                }
                (c, mask)
            })
            .collect();
        Ok(LdpcCode {
            n,
            rows,
            cols,
            k_info,
            info_positions: info_positions.clone(),
            encoder: Encoder::Dense {
                info_positions,
                parity_rules,
            },
            structure_tag: structure_tag.into(),
        })
    }

    /// Builds a code whose last `m` columns form a dual-diagonal
    /// accumulator (`H[j][k+j] = 1`, `H[j+1][k+j] = 1`). Only the first `k`
    /// columns' entries are read from `info_rows`; the accumulator is added
    /// here. Encoding is linear-time and `H` has full rank by construction.
    pub fn from_accumulate_rows(
        k: usize,
        info_rows: Vec<Vec<usize>>,
        structure_tag: impl Into<String>,
    ) -> Result<Self> {
        let m = info_rows.len();
        if m == 0 || k == 0 {
            return Err(Error::Construction("accumulate code needs k > 0 and m > 0".into()));
        }
        let n = k + m;
        let rows: Vec<Vec<usize>> = info_rows
            .into_iter()
            .enumerate()
            .map(|(j, mut r)| {
                if let Some(&c) = r.iter().find(|&&c| c >= k) {
                    return Err(Error::Construction(format!(
                        "info row {j} references column {c} >= k = {k}"
                    )));
                }
                if j > 0 {
                    r.push(k + j - 1);
                }
                r.push(k + j);
                Ok(r)
            })
            .collect::<Result<_>>()?;
        let (rows, cols) = sorted_rows(n, rows)?;
        Ok(LdpcCode {
            n,
            rows,
            cols,
            k_info: k,
            info_positions: (0..k).collect(),
            encoder: Encoder::Accumulate { k },
            structure_tag: structure_tag.into(),
        })
    }

    /// Dense 0/1 matrix constructor, mostly for tests and small examples.
    pub fn from_dense(h: &[Vec<u8>], structure_tag: impl Into<String>) -> Result<Self> {
        let n = h.first().map_or(0, |r| r.len());
        if h.iter().any(|r| r.len() != n) {
            return Err(Error::Construction("ragged dense matrix".into()));
        }
        let rows = h
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &b)| b != 0).map(|(c, _)| c).collect())
            .collect();
        Self::from_rows(n, rows, structure_tag)
    }

    /// Blocklength `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks (rows of `H`), including dependent ones.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Information length `N - rank(H)`.
    pub fn k(&self) -> usize {
        self.k_info
    }

    pub fn rate(&self) -> f64 {
        self.k_info as f64 / self.n as f64
    }

    pub fn structure_tag(&self) -> &str {
        &self.structure_tag
    }

    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Column indices of check `r`.
    pub fn row(&self, r: usize) -> &[u32] {
        &self.rows[r]
    }

    /// Check indices touching bit `c`.
    pub fn col(&self, c: usize) -> &[u32] {
        &self.cols[c]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<u32>] {
        &self.cols
    }

    /// Positions of the information bits within a codeword.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Dense copy of `H`.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![0u8; self.n];
                r.iter().for_each(|&c| row[c as usize] = 1);
                row
            })
            .collect()
    }

    /// `c H^T` over GF(2).
    pub fn syndrome(&self, c: &[u8]) -> Result<Vec<u8>> {
        check_len("codeword", self.n, c.len())?;
        Ok(self.syndrome_unchecked(c))
    }

    pub(crate) fn syndrome_unchecked(&self, c: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(0u8, |acc, &j| acc ^ (c[j as usize] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, c: &[u8]) -> bool {
        c.len() == self.n && self.syndrome_unchecked(c).iter().all(|&b| b == 0)
    }

    /// Systematic encoding: the info positions of the result equal `s`.
    pub fn encode(&self, s: &[u8]) -> Result<Vec<u8>> {
        check_len("information bits", self.k_info, s.len())?;
        let mut c = vec![0u8; self.n];
        match &self.encoder {
            Encoder::Accumulate { k } => {
                c[..*k].copy_from_slice(s);
                let mut acc = 0u8;
                for (j, row) in self.rows.iter().enumerate() {
                    for &col in row.iter() {
                        if (col as usize) < *k {
                            acc ^= s[col as usize] & 1;
                        }
                    }
                    c[k + j] = acc;
                }
            }
            Encoder::Dense {
                info_positions,
                parity_rules,
            } => {
                for (&p, &b) in info_positions.iter().zip(s) {
                    c[p] = b & 1;
                }
                let packed = BitRow::from_bits(s);
                for (col, mask) in parity_rules {
                    c[*col] = mask.dot(&packed);
                }
            }
        }
        Ok(c)
    }

    /// The information subsequence of a codeword.
    pub fn extract_info(&self, c: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| c[p]).collect()
    }

    /// Girth of the Tanner graph, capped at `limit` (returns `None` when no
    /// cycle shorter than `limit` exists). Breadth-first search from every
    /// variable node; fine for codes up to a few thousand bits.
    pub fn girth(&self, limit: usize) -> Option<usize> {
        let nodes = self.n + self.m();
        let mut best = usize::MAX;
        let mut dist = vec![u32::MAX; nodes];
        let mut parent = vec![u32::MAX; nodes];
        let mut queue = std::collections::VecDeque::new();
        for start in 0..self.n {
            dist.iter_mut().for_each(|d| *d = u32::MAX);
            dist[start] = 0;
            queue.clear();
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                let dv = dist[v] as usize;
                if 2 * dv + 1 >= best.min(limit) {
                    break;
                }
                let neighbours: Box<dyn Iterator<Item = usize>> = if v < self.n {
                    Box::new(self.cols[v].iter().map(|&r| self.n + r as usize))
                } else {
                    Box::new(self.rows[v - self.n].iter().map(|&c| c as usize))
                };
                for w in neighbours {
                    if w as u32 == parent[v] {
                        continue;
                    }
                    if dist[w] == u32::MAX {
                        dist[w] = dist[v] + 1;
                        parent[w] = v as u32;
                        queue.push_back(w);
                    } else {
                        best = best.min(dist[v] as usize + dist[w] as usize + 1);
                    }
                }
            }
        }
        (best < limit).then_some(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn hamming74() -> LdpcCode {
        LdpcCode::from_dense(
            &[
                vec![1, 0, 1, 0, 1, 0, 1],
                vec![0, 1, 1, 0, 0, 1, 1],
                vec![0, 0, 0, 1, 1, 1, 1],
            ],
            "hamming(7,4)",
        )
        .unwrap()
    }

    #[test]
    fn hamming_dimensions() {
        let code = hamming74();
        assert_eq!(code.n(), 7);
        assert_eq!(code.k(), 4);
        assert!((code.rate() - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn encoder_outputs_are_codewords() {
        let code = hamming74();
        for v in 0..16u8 {
            let s: Vec<u8> = (0..4).map(|i| (v >> i) & 1).collect();
            let c = code.encode(&s).unwrap();
            assert!(code.is_codeword(&c));
            assert_eq!(code.extract_info(&c), s);
        }
        assert_eq!(code.encode(&[0; 4]).unwrap(), vec![0; 7]);
    }

    #[test]
    fn single_flip_is_detected() {
        let code = hamming74();
        let c = code.encode(&[1, 0, 1, 1]).unwrap();
        for j in 0..7 {
            let mut e = c.clone();
            e[j] ^= 1;
            let s = code.syndrome(&e).unwrap();
            assert!(s.contains(&1));
            // weight-1 error gives column j of H
            let dense = code.to_dense();
            let col: Vec<u8> = dense.iter().map(|r| r[j]).collect();
            assert_eq!(s, col);
        }
    }

    #[test]
    fn rank_deficient_matrix() {
        // third row = sum of the first two
        let code = LdpcCode::from_dense(
            &[vec![1, 1, 0, 0], vec![0, 1, 1, 0], vec![1, 0, 1, 0], vec![0, 0, 1, 1]],
            "dependent",
        )
        .unwrap();
        assert_eq!(code.m(), 4);
        assert_eq!(code.k(), 1);
        let c = code.encode(&[1]).unwrap();
        assert_eq!(c, vec![1, 1, 1, 1]);
    }

    #[test]
    fn empty_column_rejected() {
        assert!(LdpcCode::from_dense(&[vec![1, 0, 1]], "bad").is_err());
    }

    #[test]
    fn syndrome_length_checked() {
        assert!(matches!(
            hamming74().syndrome(&[0; 6]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn accumulate_encoder() {
        let code = LdpcCode::from_accumulate_rows(3, vec![vec![0, 1], vec![2], vec![0], vec![1, 2]], "ira")
            .unwrap();
        assert_eq!((code.n(), code.k()), (7, 3));
        for v in 0..8u8 {
            let s: Vec<u8> = (0..3).map(|i| (v >> i) & 1).collect();
            let c = code.encode(&s).unwrap();
            assert!(code.is_codeword(&c));
            assert_eq!(&c[..3], &s[..]);
        }
    }

    #[test]
    fn girth_of_small_graphs() {
        // two columns sharing two checks: 4-cycle
        let code = LdpcCode::from_dense(&[vec![1, 1, 0], vec![1, 1, 1]], "c4").unwrap();
        assert_eq!(code.girth(20), Some(4));
        assert_eq!(hamming74().girth(20), Some(4));
        // a tree has no cycle
        let tree = LdpcCode::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]], "tree").unwrap();
        assert_eq!(tree.girth(20), None);
    }

    fn random_code() -> impl Strategy<Value = LdpcCode> {
        (4usize..40, 2usize..20, any::<u64>()).prop_map(|(n, m, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut rows: Vec<Vec<usize>> = (0..m)
                .map(|_| (0..n).filter(|_| rng.random_bool(0.3)).collect())
                .collect();
            for c in 0..n {
                rows[c % m].push(c);
            }
            LdpcCode::from_rows(n, rows, "random").unwrap_or_else(|_| {
                LdpcCode::from_rows(n, vec![(0..n).collect()], "fallback").unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn syndrome_is_linear(code in random_code(), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<u8> = (0..code.n()).map(|_| rng.random_range(0..2)).collect();
            let b: Vec<u8> = (0..code.n()).map(|_| rng.random_range(0..2)).collect();
            let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let sa = code.syndrome(&a).unwrap();
            let sb = code.syndrome(&b).unwrap();
            let sab: Vec<u8> = sa.iter().zip(&sb).map(|(x, y)| x ^ y).collect();
            prop_assert_eq!(code.syndrome(&ab).unwrap(), sab);
        }

        #[test]
        fn dense_encoder_is_systematic(code in random_code(), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let s: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let c = code.encode(&s).unwrap();
            prop_assert!(code.is_codeword(&c));
            prop_assert_eq!(code.extract_info(&c), s);
        }
    }
}
